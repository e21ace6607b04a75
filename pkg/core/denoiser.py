"""
Backward denoising: a hardware-efficient ansatz on data + ancilla qubits
followed by a computational-basis measurement of the ancillas.

Data sits on the high-order qubits 0..n_m-1, ancillas on n_m..n_m+n_a-1.
"""
import core
import numpy as np
from collections import namedtuple
from dataclasses import dataclass

Generated = namedtuple("Generated", ["ensemble", "steps", "records"])

def n_params(n: int, L: int) -> int:
    return 2 * n * L

@dataclass(eq=False)
class DenoiserStack:
    """thetas[k - 1] parametrizes V_k"""
    K: int
    n_m: int
    n_a: int
    L: int
    thetas: np.ndarray

    def __post_init__(self):
        thetas = np.array(self.thetas, dtype=float)
        problems = []
        if self.K < 1:
            problems.append(f"K must be >= 1, got {self.K}")
        if self.n_m < 1 or self.n_a < 0 or self.L < 1:
            problems.append(f"bad denoiser shape n_m={self.n_m}, n_a={self.n_a}, L={self.L}")
        if thetas.shape != (self.K, n_params(self.n_m + self.n_a, self.L)):
            problems.append(f"thetas has shape {thetas.shape}, expected {(self.K, n_params(self.n_m + self.n_a, self.L))}")
        if problems:
            raise core.errors.ConfigError(problems)
        self.thetas = thetas

    @classmethod
    def initial(cls, K: int, n_m: int, n_a: int, L: int, rng, low: float = -np.pi, high: float = np.pi):
        rng = core.rng.as_generator(rng)
        thetas = rng.uniform(low, high, size=(K, n_params(n_m + n_a, L)))
        return cls(K, n_m, n_a, L, thetas)

    @property
    def n(self) -> int:
        return self.n_m + self.n_a

    @property
    def n_params(self) -> int:
        return self.thetas.shape[1]

    def theta(self, k: int) -> np.ndarray:
        return self.thetas[k - 1].copy()

    def with_theta(self, k: int, theta):
        """copy with only theta_k replaced"""
        thetas = self.thetas.copy()
        thetas[k - 1] = theta
        return DenoiserStack(self.K, self.n_m, self.n_a, self.L, thetas)

@dataclass(frozen=True, eq=False)
class DenoiseStepRecord:
    k: int
    outcome: str
    born_prob: float
    state: core.qstate.Ket

def build_ansatz_unitary(theta, n: int, L: int):
    """
    L layers of RX then RY on every qubit, then CZ on (0,1),(2,3),... and (1,2),(3,4),...
    Returned as a gate sequence; parameter 2nl+q drives RX and 2nl+n+q drives RY.
    """
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if len(theta) != n_params(n, L):
        raise core.errors.GateError(f"ansatz on {n} qubits with {L} layers needs {n_params(n, L)} parameters, got {len(theta)}")

    gates = []
    for l in range(L):
        base = 2 * n * l
        for q in range(n):
            gates.append(core.circuit.rx(q, theta[base + q], param=base + q))
        for q in range(n):
            gates.append(core.circuit.ry(q, theta[base + n + q], param=base + n + q))
        for start in (0, 1):
            for q in range(start, n - 1, 2):
                gates.append(core.circuit.cz(q, q + 1))
    return gates

def with_ancilla(vectors: np.ndarray, n_a: int) -> np.ndarray:
    """rows psi (x) |0...0>_A"""
    if n_a == 0:
        return np.array(vectors, dtype=complex)
    rows = vectors.shape[0]
    joint = np.zeros((rows, vectors.shape[1], 2 ** n_a), dtype=complex)
    joint[:, :, 0] = vectors
    return joint.reshape(rows, -1)

def ancilla_qubits(n_m: int, n_a: int):
    return tuple(range(n_m, n_m + n_a))

def denoise_vectors(vectors: np.ndarray, theta, n_m: int, n_a: int, L: int, uniforms):
    """one backward step on a batch. returns (outcome indices, Born probabilities, data states)."""
    n = n_m + n_a
    out = core.circuit.apply(with_ancilla(vectors, n_a), build_ansatz_unitary(theta, n, L), n)
    if n_a == 0:
        rows = out.shape[0]
        return np.zeros(rows, dtype=int), np.ones(rows), out / np.linalg.norm(out, axis=1, keepdims=True)

    outcomes, probs, posts = core.qstate.collapse(out, ancilla_qubits(n_m, n_a), n, uniforms)
    return outcomes, probs, posts / np.linalg.norm(posts, axis=1, keepdims=True)

def _layers(theta, n: int):
    theta = np.asarray(theta).reshape(-1)
    if len(theta) % (2 * n):
        raise core.errors.GateError(f"{len(theta)} parameters is not a whole number of layers on {n} qubits")
    return len(theta) // (2 * n)

def denoise_step(state, theta, n_a: int, rng, k: int = 0) -> DenoiseStepRecord:
    n_m = state.n_qubits
    L = _layers(theta, n_m + n_a)
    u = np.array([core.rng.as_generator(rng).random()]) if n_a else np.zeros(1)
    outcomes, probs, posts = denoise_vectors(state.amplitudes[None, :], theta, n_m, n_a, L, u)
    return DenoiseStepRecord(
        k=k,
        outcome=core.qstate.bitstring(outcomes[0], n_a),
        born_prob=float(probs[0]),
        state=core.qstate.Ket.from_vector(posts[0], normalize=True),
    )

def step_branches(state, theta, n_a: int):
    """every ancilla outcome of one backward step with its probability"""
    n_m = state.n_qubits
    n = n_m + n_a
    L = _layers(theta, n)
    out = core.circuit.apply(with_ancilla(state.amplitudes[None, :], n_a), build_ansatz_unitary(theta, n, L), n)[0]
    full = core.qstate.Ket.from_vector(out, normalize=True)
    if n_a == 0:
        return [core.qstate.MeasurementRecord("", 1.0, full)]
    return core.qstate.enumerate_branches(full, ancilla_qubits(n_m, n_a))

def propagate(stack: DenoiserStack, vectors: np.ndarray, steps, rng) -> np.ndarray:
    """push a batch through theta_k for each k in steps (in the given order)"""
    rng = core.rng.as_generator(rng)
    for k in steps:
        uniforms = rng.random(vectors.shape[0])
        _, _, vectors = denoise_vectors(vectors, stack.thetas[k - 1], stack.n_m, stack.n_a, stack.L, uniforms)
    return vectors

def generate(stack: DenoiserStack, n_samples: int, rng) -> Generated:
    """
    Start from Haar-product states and apply theta_K, ..., theta_1.
    steps[k] is the ensemble after reaching step k, steps[0] is the output.
    """
    if n_samples < 1:
        raise core.errors.ConfigError(f"n_samples must be >= 1, got {n_samples}")
    root = core.rng.root(rng)

    vectors = core.qstate.haar_product_vectors(stack.n_m, n_samples, core.rng.stream(root, "inputs"))
    steps = [None] * (stack.K + 1)
    records = [[] for _ in range(stack.K + 1)]
    steps[stack.K] = core.qstate.StateEnsemble.from_vectors(vectors)

    for k in range(stack.K, 0, -1):
        uniforms = core.rng.stream(root, "denoise", k).random(n_samples)
        outcomes, probs, vectors = denoise_vectors(vectors, stack.thetas[k - 1], stack.n_m, stack.n_a, stack.L, uniforms)
        ensemble = core.qstate.StateEnsemble.from_vectors(vectors)
        steps[k - 1] = ensemble
        records[k] = [
            DenoiseStepRecord(k, core.qstate.bitstring(z, stack.n_a), float(p), ensemble[j])
            for j, (z, p) in enumerate(zip(outcomes, probs))
        ]

    return Generated(steps[0], steps, records)
