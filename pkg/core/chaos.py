"""
Mixed-field Ising chain with open boundaries:

    H = sum_j (hx X_j + hy Y_j) + J sum_j X_j X_{j+1}

Evolution is exact, through a cached eigendecomposition.
"""
import core
import functools
import numpy as np
from dataclasses import dataclass

# dense diagonalization above this is not a desk-scale job
MAX_SITES = 13

DEFAULT_HX = 0.8090
DEFAULT_HY = 0.9045
DEFAULT_J = 1.0

@dataclass(frozen=True, eq=False)
class ChaoticHamiltonian:
    n_sites: int
    hx: float
    hy: float
    J: float
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return 2 ** self.n_sites

    def energy(self, state) -> float:
        amps = state.amplitudes
        return float(np.real(np.vdot(amps, self.matrix @ amps)))

@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    hamiltonian: ChaoticHamiltonian

    def __post_init__(self):
        if not self.dt > 0:
            raise core.errors.ConfigError(f"dt must be positive, got {self.dt}")

    def propagate(self, vectors: np.ndarray) -> np.ndarray:
        """one dt step for every row"""
        return evolve_vectors(vectors, self.hamiltonian, self.dt)

def ising_matrix(n_sites: int, hx: float, hy: float, J: float) -> np.ndarray:
    """dense H built by index arithmetic, no kron chains"""
    d = 2 ** n_sites
    idx = np.arange(d)
    mat = np.zeros((d, d), dtype=complex)

    for q in range(n_sites):
        shift = n_sites - 1 - q
        flipped = idx ^ (1 << shift)
        bit = (idx >> shift) & 1
        # Y|0> = i|1>, Y|1> = -i|0>
        mat[flipped, idx] += hx + hy * np.where(bit == 0, 1j, -1j)

    for q in range(n_sites - 1):
        mask = (1 << (n_sites - 1 - q)) | (1 << (n_sites - 2 - q))
        mat[idx ^ mask, idx] += J

    return mat

@functools.lru_cache(maxsize=16)
def _spectrum(n_sites: int, hx: float, hy: float, J: float):
    mat = ising_matrix(n_sites, hx, hy, J)
    w, v = np.linalg.eigh(mat)
    for arr in (mat, w, v):
        arr.setflags(write=False)
    return mat, w, v

def build_hamiltonian(n_sites: int, hx: float = DEFAULT_HX, hy: float = DEFAULT_HY, J: float = DEFAULT_J, max_sites: int = MAX_SITES) -> ChaoticHamiltonian:
    n_sites = int(n_sites)
    if n_sites < 2:
        raise core.errors.DimensionError(f"the chain needs at least 2 sites, got {n_sites}")
    if n_sites > max_sites:
        raise core.errors.DimensionError(f"{n_sites} sites is above the dense diagonalization cap of {max_sites}")

    mat, w, v = _spectrum(n_sites, float(hx), float(hy), float(J))
    return ChaoticHamiltonian(n_sites, float(hx), float(hy), float(J), mat, w, v)

def propagator(h: ChaoticHamiltonian, t: float) -> np.ndarray:
    v = h.eigenvectors
    return (v * np.exp(-1j * h.eigenvalues * t)) @ v.conj().T

def evolve_vectors(vectors: np.ndarray, h: ChaoticHamiltonian, t: float) -> np.ndarray:
    """rows of vectors evolved for time t"""
    if vectors.shape[-1] != h.dim:
        raise core.errors.DimensionError(f"state dimension {vectors.shape[-1]} doesn't match {h.n_sites} sites")
    if t < 0:
        raise core.errors.ConfigError(f"evolution time must be non-negative, got {t}")
    if t == 0:
        return np.array(vectors, dtype=complex)

    v = h.eigenvectors
    phases = np.exp(-1j * h.eigenvalues * t)
    return ((vectors @ v.conj()) * phases) @ v.T

def evolve(state, h: ChaoticHamiltonian, t: float):
    if state.n_qubits != h.n_sites:
        raise core.errors.DimensionError(f"{state.n_qubits} qubit state under a {h.n_sites} site Hamiltonian")
    return core.qstate.Ket.from_vector(evolve_vectors(state.amplitudes, h, t), normalize=True)
