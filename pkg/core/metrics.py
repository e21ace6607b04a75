"""
Ensemble distances under the fidelity kernel k(a, b) = |<a|b>|^2.
"""
import core
import ot
import numpy as np
from math import comb
from dataclasses import dataclass
from scipy.optimize import linear_sum_assignment

MMD_CLAMP = 1e-10
MARGINAL_TOL = 1e-12
MAX_MOMENT = 3

@dataclass(frozen=True)
class KernelSpec:
    kind: str = "fidelity"

    def __post_init__(self):
        if self.kind != "fidelity":
            raise core.errors.ConfigError(f"unsupported kernel {self.kind!r}")

    def __call__(self, x, y) -> np.ndarray:
        return core.qstate.gram_matrix(x, y)

FIDELITY = KernelSpec()

@dataclass(frozen=True, eq=False)
class TransportProblem:
    cost: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        cost = np.asarray(self.cost, dtype=float)
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        if cost.ndim != 2 or cost.size == 0:
            raise core.errors.StateError("transport needs a non-empty cost matrix")
        if cost.shape != (len(a), len(b)):
            raise core.errors.DimensionError(f"cost {cost.shape} vs marginals {len(a)}, {len(b)}")
        for name, marginal in (("a", a), ("b", b)):
            if np.any(marginal < 0) or abs(marginal.sum() - 1.0) > MARGINAL_TOL:
                raise core.errors.StateError(f"marginal {name} must be non-negative and sum to 1")
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def is_assignment(self) -> bool:
        n, m = self.cost.shape
        return n == m and np.allclose(self.a, 1.0 / n, rtol=0, atol=1e-15) and np.allclose(self.b, 1.0 / m, rtol=0, atol=1e-15)

@dataclass(frozen=True, eq=False)
class TransportPlan:
    P: np.ndarray
    objective: float
    # dual potentials, only filled by the general solver
    u: np.ndarray = None
    v: np.ndarray = None

@dataclass(frozen=True)
class MomentReport:
    m: int
    delta_haar: float
    delta_target: float

def _check_pair(x, y):
    if x.n_qubits != y.n_qubits:
        raise core.errors.DimensionError(f"can't compare {x.n_qubits} and {y.n_qubits} qubit ensembles")

def mean_kernel(x, y, kernel=None) -> float:
    return float(x.weights @ (kernel or FIDELITY)(x, y) @ y.weights)

def mmd(x, y, kernel=None) -> float:
    _check_pair(x, y)
    value = mean_kernel(x, x, kernel) + mean_kernel(y, y, kernel) - 2.0 * mean_kernel(x, y, kernel)
    if value < -MMD_CLAMP:
        raise core.errors.StateError(f"MMD came out negative ({value})")
    return max(value, 0.0)

def solve_transport(problem: TransportProblem) -> TransportPlan:
    """exact OT. equal-size uniform marginals go to the assignment solver."""
    cost = problem.cost
    if problem.is_assignment:
        n = cost.shape[0]
        rows, cols = linear_sum_assignment(cost)
        plan = np.zeros_like(cost)
        plan[rows, cols] = 1.0 / n
        return TransportPlan(plan, float(cost[rows, cols].sum() / n))

    plan, log = ot.emd(problem.a, problem.b, cost, log=True)
    if log.get("warning"):
        core.log("warning", f"transport solver: {log['warning']}")
    return TransportPlan(plan, float(np.sum(plan * cost)), log["u"], log["v"])

def cost_matrix(x, y) -> np.ndarray:
    return 1.0 - core.qstate.gram_matrix(x, y)

def wasserstein1(x, y, a=None, b=None):
    """uniform marginals unless given"""
    _check_pair(x, y)
    a = np.full(len(x), 1.0 / len(x)) if a is None else a
    b = np.full(len(y), 1.0 / len(y)) if b is None else b
    plan = solve_transport(TransportProblem(cost_matrix(x, y), a, b))
    return plan.objective, plan

def symmetric_dim(d: int, m: int) -> int:
    return comb(d + m - 1, m)

def moment_overlap(x, y, m: int) -> float:
    """Tr[rho_x^(m) rho_y^(m)] = sum_ij w_i v_j |<x_i|y_j>|^(2m)"""
    return float(x.weights @ (core.qstate.gram_matrix(x, y) ** m) @ y.weights)

def _snap_sqrt(delta2: float, scale: float) -> float:
    # cancellation noise around an exact zero
    if abs(delta2) <= 64 * np.finfo(float).eps * max(scale, 1.0):
        return 0.0
    return float(np.sqrt(max(delta2, 0.0)))

def moment_distance(e, m: int, reference=None, max_moment: int = MAX_MOMENT) -> float:
    """
    Normalized Hilbert-Schmidt distance between m-th moment operators,
    ||rho_e - rho_ref|| / ||rho_ref||. reference None means Haar on e's dimension.
    Orders above max_moment are refused.
    """
    if not 1 <= m <= max_moment:
        raise core.errors.ConfigError(f"moment order must be in [1, {max_moment}], got {m}")

    ee = moment_overlap(e, e, m)
    if reference is None or (isinstance(reference, str) and reference.lower() == "haar"):
        # Tr[rho_e rho_haar] = ||rho_haar||^2 = 1/D_sym
        dsym = symmetric_dim(e.dim, m)
        return _snap_sqrt(dsym * ee - 1.0, dsym * ee)

    _check_pair(e, reference)
    ef = moment_overlap(e, reference, m)
    ff = moment_overlap(reference, reference, m)
    return _snap_sqrt((ee - 2.0 * ef + ff) / ff, (ee + 2.0 * abs(ef) + ff) / ff)

def moment_report(e, m: int, target) -> MomentReport:
    return MomentReport(m, moment_distance(e, m), moment_distance(e, m, target))

def swap_test_probability(a, b) -> float:
    """p(0) of the SWAP test: ancilla on qubit 0, a on the next n qubits, b on the last n"""
    if a.n_qubits != b.n_qubits:
        raise core.errors.DimensionError(f"SWAP test between {a.n_qubits} and {b.n_qubits} qubit states")
    n = a.n_qubits
    total = 2 * n + 1
    state = np.kron(np.array([1.0, 0.0], dtype=complex), np.kron(a.amplitudes, b.amplitudes))

    gates = [core.circuit.hadamard(0)]
    gates += [core.circuit.cswap(0, 1 + i, 1 + n + i) for i in range(n)]
    gates.append(core.circuit.hadamard(0))
    out = core.circuit.apply(state, gates, total)

    half = len(out) // 2
    return float(np.clip(np.sum(np.abs(out[:half]) ** 2), 0.5, 1.0))

def swap_test_fidelity(a, b, shots: int, rng) -> float:
    """2 * (frequency of outcome 0) - 1 over Bernoulli shots, clamped to [0, 1]"""
    if shots < 1:
        raise core.errors.ConfigError(f"need at least one shot, got {shots}")
    p0 = swap_test_probability(a, b)
    zeros = core.rng.as_generator(rng).binomial(shots, p0)
    return float(np.clip(2.0 * zeros / shots - 1.0, 0.0, 1.0))

# --- experiment tables ---

DISTANCE_METRICS = ("wass_haar", "wass_target", "mmd_target")
MOMENT_METRICS = ("delta_haar", "delta_target")

def distance_table(ensemble, target, haar=None, names=DISTANCE_METRICS + MOMENT_METRICS, moments=(1, 2, 3)):
    """(metric_name, m, value) rows, m = 0 for the non-moment metrics"""
    rows = []
    for name in names:
        match name:
            case "wass_haar":
                if haar is None:
                    raise core.errors.ConfigError("wass_haar needs a Haar reference ensemble")
                rows.append((name, 0, wasserstein1(ensemble, haar, ensemble.weights, haar.weights)[0]))
            case "wass_target":
                rows.append((name, 0, wasserstein1(ensemble, target, ensemble.weights, target.weights)[0]))
            case "mmd_target":
                rows.append((name, 0, mmd(ensemble, target)))
            case "delta_haar":
                rows.extend((name, m, moment_distance(ensemble, m)) for m in moments)
            case "delta_target":
                rows.extend((name, m, moment_distance(ensemble, m, target)) for m in moments)
            case _:
                raise core.errors.ConfigError(f"unknown metric {name!r}")
    return rows
