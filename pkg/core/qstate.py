"""
Dense statevector primitives.

Conventions shared by every module:
  - qubit 0 is the most-significant bit of the basis index
  - measured qubits are read in ascending order, so an outcome bitstring's
    first character belongs to the lowest-numbered measured qubit
  - states are only ever compared through fidelities or density matrices
"""
import core
import numpy as np
from dataclasses import dataclass

NORM_TOL = 1e-10
UNITARY_TOL = 1e-10
WEIGHT_TOL = 1e-9
# branches below this Born probability are numerical noise
BRANCH_CUTOFF = 1e-14

def qubit_count(length: int) -> int:
    n = int(length).bit_length() - 1
    if n < 1 or 1 << n != length:
        raise core.errors.StateError(f"amplitude vector length {length} is not a power of two >= 2")
    return n

@dataclass(frozen=True, eq=False)
class Ket:
    """unit-norm pure state over 2**n_qubits basis states"""
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        qubit_count(len(amps))
        norm = np.linalg.norm(amps)
        if not np.isfinite(norm) or abs(norm - 1.0) > NORM_TOL:
            raise core.errors.StateError(f"state norm is {norm}, expected 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return qubit_count(len(self.amplitudes))

    @property
    def dim(self) -> int:
        return len(self.amplitudes)

    @classmethod
    def from_vector(cls, vector, normalize: bool = False):
        vec = np.asarray(vector, dtype=complex).reshape(-1)
        if normalize:
            norm = np.linalg.norm(vec)
            if norm == 0:
                raise core.errors.StateError("can't normalize the zero vector")
            vec = vec / norm
        return cls(vec)

    @classmethod
    def basis(cls, bits: str):
        """computational basis state, e.g. Ket.basis("01")"""
        if not bits or any(b not in "01" for b in bits):
            raise core.errors.StateError(f"invalid basis label {bits!r}")
        vec = np.zeros(2 ** len(bits), dtype=complex)
        vec[int(bits, 2)] = 1.0
        return cls(vec)

    @classmethod
    def zeros(cls, n_qubits: int):
        return cls.basis("0" * n_qubits)

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

@dataclass(frozen=True, eq=False)
class StateEnsemble:
    """weighted collection of pure states on the same number of qubits. rows of `vectors` are the states."""
    vectors: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        vecs = np.array(self.vectors, dtype=complex)
        if vecs.ndim != 2 or vecs.shape[0] == 0:
            raise core.errors.StateError("an ensemble needs at least one state")
        qubit_count(vecs.shape[1])

        norms = np.linalg.norm(vecs, axis=1)
        bad = np.flatnonzero(~np.isfinite(norms) | (np.abs(norms - 1.0) > NORM_TOL))
        if len(bad):
            raise core.errors.StateError(f"member {bad[0]} has norm {norms[bad[0]]}")

        w = np.array(self.weights, dtype=float).reshape(-1)
        if len(w) != vecs.shape[0]:
            raise core.errors.StateError(f"{len(w)} weights for {vecs.shape[0]} states")
        if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise core.errors.StateError("weights must be non-negative and sum to 1")

        vecs.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_vectors(cls, vectors, weights=None):
        vecs = np.asarray(vectors, dtype=complex)
        if vecs.ndim == 1:
            vecs = vecs[None, :]
        if weights is None:
            weights = np.full(vecs.shape[0], 1.0 / max(vecs.shape[0], 1))
        return cls(vecs, weights)

    @classmethod
    def from_kets(cls, kets, weights=None):
        kets = list(kets)
        if not kets:
            raise core.errors.StateError("an ensemble needs at least one state")
        n = kets[0].n_qubits
        if any(k.n_qubits != n for k in kets):
            raise core.errors.DimensionError("ensemble members must share a qubit count")
        return cls.from_vectors(np.stack([k.amplitudes for k in kets]), weights)

    def __len__(self):
        return self.vectors.shape[0]

    def __getitem__(self, index) -> Ket:
        return Ket(self.vectors[index])

    @property
    def n_qubits(self) -> int:
        return qubit_count(self.vectors.shape[1])

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def members(self):
        return [(float(w), Ket(v)) for w, v in zip(self.weights, self.vectors)]

    def is_uniform(self) -> bool:
        return bool(np.allclose(self.weights, 1.0 / len(self), rtol=0, atol=1e-12))

    def uniform(self):
        """same states, uniform weights"""
        return StateEnsemble.from_vectors(self.vectors)

    def subset(self, indices):
        return StateEnsemble.from_vectors(self.vectors[np.asarray(indices)])

@dataclass(frozen=True, eq=False)
class MeasurementRecord:
    outcome: str
    probability: float
    post_state: Ket

# --- kernels ---

def apply_matrix(vectors: np.ndarray, matrix: np.ndarray, targets, n: int) -> np.ndarray:
    """
    Apply a 2**m x 2**m matrix to the given target qubits of every row.

    vectors is (2**n,) or (B, 2**n). matrix is either shared (2**m, 2**m) or
    one per row (B, 2**m, 2**m). The first target is the gate's most-significant bit.
    No validation here, this is the hot path.
    """
    single = vectors.ndim == 1
    psi = vectors[None, :] if single else vectors
    rows = psi.shape[0]
    m = len(targets)

    psi = psi.reshape((rows,) + (2,) * n)
    src = [t + 1 for t in targets]
    dst = list(range(n + 1 - m, n + 1))
    psi = np.moveaxis(psi, src, dst)
    moved_shape = psi.shape
    psi = psi.reshape(rows, -1, 2 ** m)

    if matrix.ndim == 2:
        out = psi @ matrix.T
    else:
        out = np.einsum("brj,bij->bri", psi, matrix)

    out = np.moveaxis(out.reshape(moved_shape), dst, src).reshape(rows, 2 ** n)
    return out[0] if single else out

def split_measured(vectors: np.ndarray, measured, n: int) -> np.ndarray:
    """reshape (B, 2**n) into (B, 2**(n-m), 2**m) = (batch, unmeasured index, outcome index)"""
    rows = vectors.shape[0]
    measured = list(measured)
    rest = [q for q in range(n) if q not in measured]
    psi = vectors.reshape((rows,) + (2,) * n)
    psi = np.transpose(psi, [0] + [q + 1 for q in rest] + [q + 1 for q in measured])
    return psi.reshape(rows, 2 ** len(rest), 2 ** len(measured))

def collapse(vectors: np.ndarray, measured, n: int, uniforms: np.ndarray):
    """
    Sample one outcome per row by inverse CDF on the given uniforms.
    Returns (outcome indices, Born probabilities, normalized post-states on the unmeasured qubits).
    """
    blocks = split_measured(vectors, measured, n)
    probs = np.sum(np.abs(blocks) ** 2, axis=1)
    cdf = np.cumsum(probs, axis=1)
    # scale by the row total so rounding in the norm never leaves u past the end
    targets = np.asarray(uniforms) * cdf[:, -1]
    outcomes = np.array([np.searchsorted(c, t, side="right") for c, t in zip(cdf, targets)], dtype=int)
    outcomes = np.minimum(outcomes, probs.shape[1] - 1)

    rows = np.arange(len(outcomes))
    chosen = probs[rows, outcomes]
    posts = blocks[rows, :, outcomes] / np.sqrt(chosen)[:, None]
    return outcomes, chosen, posts

def bitstring(index: int, width: int) -> str:
    return format(int(index), f"0{width}b") if width else ""

def check_measured(measured_qubits, n: int):
    measured = tuple(sorted(int(q) for q in measured_qubits))
    if not measured:
        raise core.errors.StateError("no qubits to measure")
    if len(set(measured)) != len(measured):
        raise core.errors.StateError(f"duplicate measured qubits {measured_qubits}")
    if measured[0] < 0 or measured[-1] >= n:
        raise core.errors.StateError(f"measured qubits {measured_qubits} out of range for {n} qubits")
    if len(measured) == n:
        raise core.errors.StateError("measuring every qubit leaves no post-measurement state")
    return measured

def check_targets(targets, n: int):
    targets = tuple(int(t) for t in targets)
    if len(set(targets)) != len(targets):
        raise core.errors.GateError(f"duplicate targets {targets}")
    if any(t < 0 or t >= n for t in targets):
        raise core.errors.GateError(f"targets {targets} out of range for {n} qubits")
    return targets

def is_unitary(matrix: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    return bool(np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0]))) <= tol)

# --- operations ---

def tensor(a: Ket, b: Ket) -> Ket:
    """a goes on the high-order qubits"""
    return Ket(np.kron(a.amplitudes, b.amplitudes))

def apply_gate(state: Ket, gate, targets) -> Ket:
    gate = np.asarray(gate, dtype=complex)
    targets = check_targets(targets, state.n_qubits)
    m = len(targets)
    if m not in (1, 2):
        raise core.errors.GateError(f"gates act on 1 or 2 qubits, got {m} targets")
    if gate.shape != (2 ** m, 2 ** m):
        raise core.errors.GateError(f"gate of shape {gate.shape} doesn't match {m} targets")
    if not is_unitary(gate):
        raise core.errors.GateError("gate is not unitary")

    return Ket(apply_matrix(state.amplitudes, gate, targets, state.n_qubits))

def fidelity(a: Ket, b: Ket) -> float:
    if a.n_qubits != b.n_qubits:
        raise core.errors.DimensionError(f"fidelity between {a.n_qubits} and {b.n_qubits} qubit states")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))

def measure_subset(state: Ket, measured_qubits, rng) -> MeasurementRecord:
    n = state.n_qubits
    measured = check_measured(measured_qubits, n)
    rng = core.rng.as_generator(rng)

    outcomes, probs, posts = collapse(state.amplitudes[None, :], measured, n, np.array([rng.random()]))
    return MeasurementRecord(
        outcome=bitstring(outcomes[0], len(measured)),
        probability=float(probs[0]),
        post_state=Ket.from_vector(posts[0], normalize=True),
    )

def enumerate_branches(state: Ket, measured_qubits):
    """every outcome with non-negligible Born probability, in outcome order"""
    n = state.n_qubits
    measured = check_measured(measured_qubits, n)

    blocks = split_measured(state.amplitudes[None, :], measured, n)[0]
    probs = np.sum(np.abs(blocks) ** 2, axis=0)

    records = []
    for z, p in enumerate(probs):
        if p < BRANCH_CUTOFF:
            continue
        records.append(MeasurementRecord(
            outcome=bitstring(z, len(measured)),
            probability=float(p),
            post_state=Ket.from_vector(blocks[:, z], normalize=True),
        ))
    return records

def haar_product_vectors(n_qubits: int, count: int, rng) -> np.ndarray:
    """(count, 2**n) array of products of single-qubit Haar states"""
    if n_qubits < 1:
        raise core.errors.StateError("need at least one qubit")
    rng = core.rng.as_generator(rng)
    # a normalized complex gaussian 2-vector is uniform on the Bloch sphere
    qubits = rng.normal(size=(count, n_qubits, 2)) + 1j * rng.normal(size=(count, n_qubits, 2))
    qubits /= np.linalg.norm(qubits, axis=2, keepdims=True)

    out = qubits[:, 0, :]
    for q in range(1, n_qubits):
        out = np.einsum("bi,bj->bij", out, qubits[:, q, :]).reshape(count, -1)
    return out

def haar_product_state(n_qubits: int, rng) -> Ket:
    return Ket.from_vector(haar_product_vectors(n_qubits, 1, rng)[0], normalize=True)

def haar_vectors(n_qubits: int, count: int, rng) -> np.ndarray:
    """(count, 2**n) fully Haar-random states"""
    rng = core.rng.as_generator(rng)
    d = 2 ** n_qubits
    vecs = rng.normal(size=(count, d)) + 1j * rng.normal(size=(count, d))
    return vecs / np.linalg.norm(vecs, axis=1, keepdims=True)

def haar_state(n_qubits: int, rng) -> Ket:
    return Ket.from_vector(haar_vectors(n_qubits, 1, rng)[0], normalize=True)

def gram_matrix(x: StateEnsemble, y: StateEnsemble) -> np.ndarray:
    """entry (i, j) = |<x_i|y_j>|^2"""
    if x.n_qubits != y.n_qubits:
        raise core.errors.DimensionError(f"gram matrix between {x.n_qubits} and {y.n_qubits} qubit ensembles")
    return overlaps(x.vectors, y.vectors)

def overlaps(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.clip(np.abs(a.conj() @ b.T) ** 2, 0.0, 1.0)
