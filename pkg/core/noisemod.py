"""
Trajectory-level noise for the forward schemes, and executable checks of
how complement-side noise turns into a POVM on the measured qubits.
"""
import core
import numpy as np
from dataclasses import dataclass, field

# RUCD noise sits after these single-qubit rotations only, never after the ZZ entangler
NOISY_GATES = ("ry", "rz")
EXACT_TOL = 1e-12

@dataclass(frozen=True)
class NoiseConfig:
    p1: float = 0.0
    p2: float = 0.0
    gamma_phi: float = 0.0

    def __post_init__(self):
        problems = []
        for key in ("p1", "p2"):
            value = getattr(self, key)
            if not 0.0 <= value <= 0.5:
                problems.append(f"noise.{key} must be in [0, 0.5], got {value}")
        if self.gamma_phi < 0:
            problems.append(f"noise.gamma_phi must be >= 0, got {self.gamma_phi}")
        if problems:
            raise core.errors.ConfigError(problems)

    @classmethod
    def from_gamma(cls, gamma_phi: float, dt: float, p1: float = 0.0):
        return cls(p1=p1, p2=dephasing_prob(dt, gamma_phi), gamma_phi=gamma_phi)

    @property
    def noiseless(self) -> bool:
        return self.p1 == 0 and self.p2 == 0

    def rted_prob(self) -> float:
        return self.p2

    def cted_prob(self, k: int) -> float:
        """flip probability after the full k*dt evolution, composed from the per-step p2"""
        return 0.5 * (1.0 - (1.0 - 2.0 * self.p2) ** k)

@dataclass(frozen=True, eq=False)
class PovmElement:
    outcome: str
    operator: np.ndarray

@dataclass(eq=False)
class NoisyExecution:
    """a gate sequence with trajectory errors spliced in"""
    gates: list
    errors: int = 0
    locations: int = 0
    injected: list = field(default_factory=list)

def dephasing_prob(t: float, gamma_phi: float) -> float:
    if t < 0:
        raise core.errors.ChannelError(f"dephasing time must be non-negative, got {t}")
    return 0.5 * (1.0 - np.exp(-gamma_phi * t))

def inject_rucd_pauli(gates, p1: float, rng) -> NoisyExecution:
    """after every RY/RZ gate apply X, Y or Z with probability p1"""
    if not 0.0 <= p1 <= 0.5:
        raise core.errors.ChannelError(f"p1 must be in [0, 0.5], got {p1}")

    gates = list(gates)
    locations = sum(1 for g in gates if g.name in NOISY_GATES)
    if p1 == 0:
        return NoisyExecution(gates, 0, locations)

    rng = core.rng.as_generator(rng)
    out = []
    injected = []
    for gate in gates:
        out.append(gate)
        if gate.name not in NOISY_GATES:
            continue
        if rng.random() < p1:
            name = "XYZ"[rng.integers(3)]
            out.append(core.circuit.pauli(name, gate.targets[0]))
            injected.append((len(out) - 1, name))

    return NoisyExecution(out, len(injected), locations, injected)

def _parity_signs(n: int, flips: np.ndarray) -> np.ndarray:
    """(d, B) matrix of (-1)^(number of flipped qubits set in each basis index)"""
    idx = np.arange(2 ** n)
    shifts = n - 1 - np.arange(n)
    bits = (idx[:, None] >> shifts[None, :]) & 1
    parity = (bits @ flips.T.astype(int)) % 2
    return 1 - 2 * parity

def dephase_vectors(vectors: np.ndarray, prob: float, rng) -> np.ndarray:
    """independent Z flips on every qubit of every row"""
    if not 0.0 <= prob <= 0.5:
        raise core.errors.ChannelError(f"dephasing probability must be in [0, 0.5], got {prob}")
    if prob == 0:
        return vectors

    rng = core.rng.as_generator(rng)
    batch = np.atleast_2d(vectors)
    n = core.qstate.qubit_count(batch.shape[1])
    flips = rng.random((batch.shape[0], n)) < prob
    out = batch * _parity_signs(n, flips).T
    return out if vectors.ndim == 2 else out[0]

def apply_dephasing(state, per_qubit_prob: float, rng):
    return core.qstate.Ket(dephase_vectors(state.amplitudes, per_qubit_prob, rng))

def is_trace_preserving(kraus, tol: float = 1e-10) -> bool:
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    total = sum(k.conj().T @ k for k in kraus)
    return bool(np.max(np.abs(total - np.eye(total.shape[0]))) <= tol)

def povm_from_channel(kraus):
    """E_z = sum_k K_k^dagger |z><z| K_k for every complement outcome z"""
    kraus = [np.asarray(k, dtype=complex) for k in kraus]
    if not kraus:
        raise core.errors.ChannelError("a channel needs at least one Kraus operator")
    if not is_trace_preserving(kraus):
        raise core.errors.ChannelError("Kraus operators are not trace preserving")

    d = kraus[0].shape[0]
    width = core.qstate.qubit_count(d)
    elements = []
    for z in range(d):
        # K^dagger |z><z| K = outer(conj(row z of K), row z of K)
        op = sum(np.outer(k[z].conj(), k[z]) for k in kraus)
        elements.append(PovmElement(core.qstate.bitstring(z, width), op))
    return elements

def _blocks(generator, measured_qubits):
    n = generator.n_qubits
    measured = core.qstate.check_measured(measured_qubits, n)
    return core.qstate.split_measured(generator.amplitudes[None, :], measured, n)[0]

def povm_probabilities(generator, measured_qubits, povm) -> np.ndarray:
    """<Phi| I (x) E_z |Phi> for each element"""
    blocks = _blocks(generator, measured_qubits)
    return np.array([
        np.real(np.einsum("ra,ab,rb->", blocks.conj(), e.operator, blocks))
        for e in povm
    ])

def channel_probabilities(generator, measured_qubits, kraus) -> np.ndarray:
    """apply the channel to the measured qubits, then measure projectively"""
    blocks = _blocks(generator, measured_qubits)
    probs = np.zeros(blocks.shape[1])
    for k in kraus:
        moved = blocks @ np.asarray(k, dtype=complex).T
        probs += np.sum(np.abs(moved) ** 2, axis=0)
    return probs

@dataclass(frozen=True)
class RelabelVerdict:
    pauli: str
    qubit: int
    relabeled: bool
    prob_error: float
    state_error: float
    metric_error: float

    @property
    def holds(self) -> bool:
        return max(self.prob_error, self.state_error, self.metric_error) <= EXACT_TOL

def _branch_map(generator, measured):
    return {
        r.outcome: (r.probability, r.post_state.density_matrix())
        for r in core.qstate.enumerate_branches(generator, measured)
    }

def _flip(outcome: str, pos: int) -> str:
    return outcome[:pos] + ("1" if outcome[pos] == "0" else "0") + outcome[pos + 1:]

def pauli_relabel_check(generator, q: int, pauli: str, measured_qubits=None) -> RelabelVerdict:
    """
    Compare the projected ensemble of `generator` with the one obtained after a
    Pauli error on measured qubit q. Z leaves it untouched, X and Y only relabel
    z -> z xor e_q.
    """
    pauli = pauli.upper()
    if pauli not in ("X", "Y", "Z"):
        raise core.errors.ChannelError(f"unknown Pauli {pauli!r}")

    n = generator.n_qubits
    measured = core.qstate.check_measured(measured_qubits if measured_qubits is not None else (q,), n)
    if q not in measured:
        raise core.errors.StateError(f"qubit {q} is not measured")

    noisy = core.circuit.run(generator, [core.circuit.pauli(pauli, q)])
    clean = _branch_map(generator, measured)
    dirty = _branch_map(noisy, measured)

    relabeled = pauli != "Z"
    pos = measured.index(q)
    prob_error = 0.0
    state_error = 0.0
    for outcome, (p, rho) in clean.items():
        key = _flip(outcome, pos) if relabeled else outcome
        if key not in dirty:
            prob_error = np.inf
            continue
        p2, rho2 = dirty[key]
        prob_error = max(prob_error, abs(p - p2))
        state_error = max(state_error, float(np.max(np.abs(rho - rho2))))
    if len(dirty) != len(clean):
        prob_error = np.inf

    # permutation-invariant statistics can't see the relabeling
    metric_error = 0.0
    a = core.forward.projected_ensemble(generator, measured)
    b = core.forward.projected_ensemble(noisy, measured)
    for m in (1, 2):
        metric_error = max(metric_error, abs(core.metrics.moment_distance(a, m) - core.metrics.moment_distance(b, m)))

    return RelabelVerdict(pauli, q, relabeled, float(prob_error), state_error, metric_error)
