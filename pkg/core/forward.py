"""
Forward diffusion.

CTED and RTED attach a complement register F in a sampled basis state |x>,
evolve the joint system under the chaotic Hamiltonian and measure F. The
data register M keeps the projected state. RUCD scrambles M directly with
layered random circuits.

Every scheme returns a list indexed by k = 0..K of ForwardStep tuples;
step 0 holds the input ensemble and no records. Per-sample randomness comes
from stream(seed, "forward", k, j), so samples can be processed in any order.
"""
import core
import numpy as np
from collections import namedtuple
from dataclasses import dataclass

SCHEMES = ("CTED", "RTED", "RUCD")
Q_TOL = 1e-12

ForwardStep = namedtuple("ForwardStep", ["ensemble", "records"])

@dataclass(frozen=True, eq=False)
class DiffusionConfig:
    scheme: str
    n_m: int
    n_f: int
    K: int
    dt: float = 0.02
    complement_dist: np.ndarray = None
    noise: core.noisemod.NoiseConfig = None
    # RUCD layer l uses alpha = alpha_scale * l**2 / 100
    alpha_scale: float = 1.0

    def __post_init__(self):
        scheme = str(self.scheme).upper()
        object.__setattr__(self, "scheme", scheme)

        problems = []
        if scheme not in SCHEMES:
            problems.append(f"scheme must be one of {', '.join(SCHEMES)}, got {self.scheme}")
        if self.n_m < 1:
            problems.append(f"n_m must be >= 1, got {self.n_m}")
        if self.K < 1:
            problems.append(f"K must be >= 1, got {self.K}")
        if self.dt < 0:
            problems.append(f"dt must be >= 0, got {self.dt}")
        if self.alpha_scale < 0:
            problems.append(f"alpha_scale must be >= 0, got {self.alpha_scale}")
        if scheme == "RUCD" and self.n_f != 0:
            problems.append(f"RUCD has no complement register, n_f must be 0 (got {self.n_f})")
        if scheme in ("CTED", "RTED") and self.n_f < 1:
            problems.append(f"{scheme} needs n_f >= 1, got {self.n_f}")

        if self.n_f >= 0 and not problems:
            q = self.complement_dist
            if q is None:
                q = np.full(2 ** self.n_f, 1.0 / 2 ** self.n_f)
            q = np.array(q, dtype=float).reshape(-1)
            if len(q) != 2 ** self.n_f:
                problems.append(f"complement_dist has {len(q)} entries, expected {2 ** self.n_f}")
            elif np.any(q < 0) or abs(q.sum() - 1.0) > Q_TOL:
                problems.append("complement_dist entries must be >= 0 and sum to 1")
            q.setflags(write=False)
            object.__setattr__(self, "complement_dist", q)

        if problems:
            raise core.errors.ConfigError(problems)

    @property
    def n_total(self) -> int:
        return self.n_m + self.n_f

    @property
    def measured(self):
        """complement qubits sit on the low-order end"""
        return tuple(range(self.n_m, self.n_total))

@dataclass(frozen=True, eq=False)
class DiffusionStepRecord:
    k: int
    x: str
    z: str
    born_prob: float
    state: core.qstate.Ket

@dataclass(frozen=True, eq=False)
class RucdLayerParams:
    layer: int
    g: np.ndarray
    s: float
    alpha: float

    def __post_init__(self):
        g = np.array(self.g, dtype=float).reshape(-1, 3)
        bound = self.alpha * np.pi / 8
        if np.any(np.abs(g) > bound + 1e-12):
            raise core.errors.ConfigError(f"layer {self.layer}: rotation angles must lie in [-{bound}, {bound}]")
        if not 0.4 * self.alpha - 1e-12 <= self.s <= 0.6 * self.alpha + 1e-12:
            raise core.errors.ConfigError(f"layer {self.layer}: entangler angle {self.s} outside [0.4a, 0.6a]")
        object.__setattr__(self, "g", g)

@dataclass(frozen=True)
class CostModel:
    tau_u: float = 1.0
    tau_c: float = 1.0
    tau_r: float = 1.0
    N: int = 1
    K: int = 1

    def __post_init__(self):
        bad = [k for k in ("tau_u", "tau_c", "tau_r", "N", "K") if not getattr(self, k) > 0]
        if bad:
            raise core.errors.ConfigError([f"{k} must be positive" for k in bad])

def execution_time(cm: CostModel, scheme: str):
    """(number of distinct unitaries, total execution time) of one forward run"""
    steps = cm.N * cm.K * (cm.K + 1) / 2
    match scheme.upper():
        case "RUCD":
            return cm.N * cm.K, cm.tau_u * steps
        case "CTED":
            return cm.K, cm.tau_c * steps
        case "RTED":
            return 1, cm.tau_r * steps
    raise core.errors.ConfigError(f"unknown scheme {scheme}")

# --- chaotic evolution schemes ---

def _check_chaotic(s0, cfg: DiffusionConfig, h, scheme: str):
    if cfg.scheme != scheme:
        raise core.errors.ConfigError(f"config is for {cfg.scheme}, not {scheme}")
    if h.n_sites != cfg.n_total:
        raise core.errors.DimensionError(f"Hamiltonian has {h.n_sites} sites, need n_m + n_f = {cfg.n_total}")
    if s0.n_qubits != cfg.n_m:
        raise core.errors.DimensionError(f"input ensemble has {s0.n_qubits} qubits, config says n_m = {cfg.n_m}")

def attach_complement(vectors: np.ndarray, x: np.ndarray, n_f: int) -> np.ndarray:
    """rows psi_j (x) |x_j>"""
    rows, d_m = vectors.shape
    joint = np.zeros((rows, d_m, 2 ** n_f), dtype=complex)
    joint[np.arange(rows), :, x] = vectors
    return joint.reshape(rows, -1)

def _draws(root, k: int, count: int, q: np.ndarray):
    """complement label and measurement uniform for every sample of step k"""
    x = np.empty(count, dtype=int)
    u = np.empty(count)
    for j in range(count):
        g = core.rng.stream(root, "forward", k, j)
        x[j] = g.choice(len(q), p=q)
        u[j] = g.random()
    return x, u

def _dephase_rows(vectors, prob, root, k):
    if prob == 0:
        return vectors
    out = np.empty_like(vectors)
    for j in range(vectors.shape[0]):
        out[j] = core.noisemod.dephase_vectors(vectors[j], prob, core.rng.stream(root, "noise", k, j))
    return out

def _measure_step(vectors, cfg: DiffusionConfig, k: int, x, u):
    outcomes, probs, posts = core.qstate.collapse(vectors, cfg.measured, cfg.n_total, u)
    posts = posts / np.linalg.norm(posts, axis=1, keepdims=True)
    ensemble = core.qstate.StateEnsemble.from_vectors(posts)
    records = [
        DiffusionStepRecord(
            k=k,
            x=core.qstate.bitstring(x[j], cfg.n_f),
            z=core.qstate.bitstring(outcomes[j], cfg.n_f),
            born_prob=float(probs[j]),
            state=ensemble[j],
        )
        for j in range(len(posts))
    ]
    return ForwardStep(ensemble, records)

def cted_step(s0, cfg: DiffusionConfig, h, k: int, root) -> ForwardStep:
    """step k of CTED: always restarts from s0 and evolves for k*dt"""
    x, u = _draws(root, k, len(s0), cfg.complement_dist)
    joint = attach_complement(s0.vectors, x, cfg.n_f)
    evolved = core.chaos.evolve_vectors(joint, h, k * cfg.dt)
    if cfg.noise is not None:
        evolved = _dephase_rows(evolved, cfg.noise.cted_prob(k), root, k)
    return _measure_step(evolved, cfg, k, x, u)

def rted_step(previous, cfg: DiffusionConfig, h, k: int, root) -> ForwardStep:
    """step k of RTED: consumes the step k-1 ensemble, fresh complement, one dt"""
    x, u = _draws(root, k, len(previous), cfg.complement_dist)
    joint = attach_complement(previous.vectors, x, cfg.n_f)
    if cfg.dt > 0:
        evolved = core.chaos.EvolutionConfig(cfg.dt, h).propagate(joint)
    else:
        # frozen chain: every step measures back the attached |x>
        evolved = core.chaos.evolve_vectors(joint, h, 0.0)
    if cfg.noise is not None:
        evolved = _dephase_rows(evolved, cfg.noise.rted_prob(), root, k)
    return _measure_step(evolved, cfg, k, x, u)

def cted_diffuse(s0, cfg: DiffusionConfig, h, rng):
    _check_chaotic(s0, cfg, h, "CTED")
    root = core.rng.root(rng)
    steps = [ForwardStep(s0, [])]
    for k in range(1, cfg.K + 1):
        steps.append(cted_step(s0, cfg, h, k, root))
    return steps

def rted_diffuse(s0, cfg: DiffusionConfig, h, rng):
    _check_chaotic(s0, cfg, h, "RTED")
    root = core.rng.root(rng)
    steps = [ForwardStep(s0, [])]
    for k in range(1, cfg.K + 1):
        steps.append(rted_step(steps[-1].ensemble, cfg, h, k, root))
    return steps

# --- random unitary circuits ---

def rucd_alpha(layer: int, scale: float = 1.0) -> float:
    return scale * layer ** 2 / 100

def draw_rucd_layer(layer: int, n_m: int, rng, scale: float = 1.0) -> RucdLayerParams:
    rng = core.rng.as_generator(rng)
    alpha = rucd_alpha(layer, scale)
    g = rng.uniform(-alpha * np.pi / 8, alpha * np.pi / 8, size=(n_m, 3))
    s = rng.uniform(0.4 * alpha, 0.6 * alpha)
    return RucdLayerParams(layer, g, float(s), alpha)

def rucd_layer_gates(params: RucdLayerParams, n_m: int):
    """W_l then Omega_l"""
    gates = []
    for q in range(n_m):
        g1, g2, g3 = params.g[q]
        # e^{-i g1 Z/2} e^{-i g2 Y/2} e^{-i g3 Z/2} acting on a ket: rightmost first
        gates.append(core.circuit.rz(q, g3))
        gates.append(core.circuit.ry(q, g2))
        gates.append(core.circuit.rz(q, g1))

    # exp(-i s/(2 sqrt n) ZZ) = rzz with angle s / sqrt(n)
    angle = params.s / np.sqrt(n_m)
    for a in range(n_m):
        for b in range(a + 1, n_m):
            gates.append(core.circuit.rzz(a, b, angle))
    return gates

def rucd_diffuse(s0, cfg: DiffusionConfig, rng):
    if cfg.scheme != "RUCD":
        raise core.errors.ConfigError(f"config is for {cfg.scheme}, not RUCD")
    if s0.n_qubits != cfg.n_m:
        raise core.errors.DimensionError(f"input ensemble has {s0.n_qubits} qubits, config says n_m = {cfg.n_m}")

    root = core.rng.root(rng)
    n = cfg.n_m
    p1 = cfg.noise.p1 if cfg.noise is not None else 0.0

    vectors = np.empty((cfg.K + 1, len(s0), s0.dim), dtype=complex)
    vectors[0] = s0.vectors
    layer_params = [[None] * len(s0) for _ in range(cfg.K + 1)]

    for j in range(len(s0)):
        state = s0.vectors[j]
        for l in range(1, cfg.K + 1):
            params = draw_rucd_layer(l, n, core.rng.stream(root, "forward", l, j), cfg.alpha_scale)
            gates = rucd_layer_gates(params, n)
            if p1 > 0:
                gates = core.noisemod.inject_rucd_pauli(gates, p1, core.rng.stream(root, "noise", l, j)).gates
            state = core.circuit.apply(state, gates, n)
            vectors[l, j] = state
            layer_params[l][j] = params

    steps = [ForwardStep(s0, [])]
    for l in range(1, cfg.K + 1):
        rows = vectors[l] / np.linalg.norm(vectors[l], axis=1, keepdims=True)
        steps.append(ForwardStep(core.qstate.StateEnsemble.from_vectors(rows), layer_params[l]))
    return steps

def diffuse(s0, cfg: DiffusionConfig, rng, h=None):
    match cfg.scheme:
        case "CTED":
            return cted_diffuse(s0, cfg, h, rng)
        case "RTED":
            return rted_diffuse(s0, cfg, h, rng)
        case "RUCD":
            return rucd_diffuse(s0, cfg, rng)

# --- projected ensembles ---

def projected_ensemble(generator, measured_qubits):
    """every branch of one generator state, weighted by Born probability"""
    branches = core.qstate.enumerate_branches(generator, measured_qubits)
    weights = np.array([b.probability for b in branches])
    return core.qstate.StateEnsemble.from_vectors(
        np.stack([b.post_state.amplitudes for b in branches]),
        weights / weights.sum(),
    )

def enhanced_ensemble(data, cfg: DiffusionConfig, h, k: int):
    """
    Exact classically-enhanced projected ensemble at CTED step k: every (x, z)
    branch of every data state, weighted w_j q(x) p_x(z).
    """
    if isinstance(data, core.qstate.Ket):
        data = core.qstate.StateEnsemble.from_kets([data])
    if h.n_sites != cfg.n_total or data.n_qubits != cfg.n_m:
        raise core.errors.DimensionError("data, config and Hamiltonian sizes don't line up")

    q = cfg.complement_dist
    states = []
    weights = []
    for w, psi in zip(data.weights, data.vectors):
        for x in np.flatnonzero(q > 0):
            joint = attach_complement(psi[None, :], np.array([x]), cfg.n_f)
            evolved = core.chaos.evolve_vectors(joint, h, k * cfg.dt)[0]
            evolved = evolved / np.linalg.norm(evolved)
            for branch in core.qstate.enumerate_branches(core.qstate.Ket(evolved), cfg.measured):
                states.append(branch.post_state.amplitudes)
                weights.append(w * q[x] * branch.probability)

    weights = np.array(weights)
    return core.qstate.StateEnsemble.from_vectors(np.stack(states), weights / weights.sum())

def sampled_enhanced_weights(records, q) -> np.ndarray:
    """q(x) p_x(z) for each sampled record, renormalized"""
    q = np.asarray(q, dtype=float)
    w = np.array([q[int(r.x, 2)] * r.born_prob for r in records])
    if w.sum() <= 0:
        raise core.errors.StateError("records carry no weight")
    return w / w.sum()
