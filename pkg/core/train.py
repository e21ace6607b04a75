"""
Layerwise backward training.

Cycle k (K down to 1) freezes theta_{k+1..K}, pushes fresh Haar-product states
through them, and fits theta_k so that the denoised batch matches a batch of
the forward ensemble S_{k-1}.

Gradients are reverse sweeps through the ansatz. The costate at the circuit
output only lives on the ancilla block that was kept: for a kept block u with
p = ||u||^2 and a forward state x, the kernel is f = |<x|u>|^2 / p and

    df/du* = <x|u> x / p - |<x|u>|^2 u / p^2
"""
import core
import time
import numpy as np
from dataclasses import dataclass, field

COSTS = ("wasserstein", "mmd")
GRADIENT_MODES = ("adjoint", "finite_difference")
BRANCH_MODES = ("sampled", "enumerated")
BRANCH_CUTOFF = core.qstate.BRANCH_CUTOFF

@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 1000
    batch_size: int = 100
    learning_rate: float = 0.001
    cost: str = "wasserstein"
    seed: int = 0
    gradient_mode: str = "adjoint"
    branch_mode: str = "sampled"
    fd_step: float = 1e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, "cost", self.cost.lower())
        problems = []
        if self.epochs < 1:
            problems.append(f"train.epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            problems.append(f"train.batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            problems.append(f"train.learning_rate must be positive, got {self.learning_rate}")
        if self.cost not in COSTS:
            problems.append(f"train.cost must be one of {', '.join(COSTS)}, got {self.cost}")
        if self.gradient_mode not in GRADIENT_MODES:
            problems.append(f"train.gradient_mode must be one of {', '.join(GRADIENT_MODES)}")
        if self.branch_mode not in BRANCH_MODES:
            problems.append(f"train.branch_mode must be one of {', '.join(BRANCH_MODES)}")
        if not self.fd_step > 0:
            problems.append("train.fd_step must be positive")
        if problems:
            raise core.errors.ConfigError(problems)

    def optimizer(self):
        return core.optim.Adam(self.learning_rate, self.beta1, self.beta2, self.eps)

@dataclass(eq=False)
class TrainReport:
    losses: dict = field(default_factory=dict)
    wall_clock: dict = field(default_factory=dict)
    final_distances: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    adam: dict = field(default_factory=dict)

    def loss_rows(self):
        rows = []
        for cycle in sorted(self.losses, reverse=True):
            rows.extend((cycle, epoch, loss) for epoch, loss in enumerate(self.losses[cycle]))
        return rows

    def to_dict(self) -> dict:
        return {
            "losses": {str(k): list(map(float, v)) for k, v in self.losses.items()},
            "wall_clock": {str(k): float(v) for k, v in self.wall_clock.items()},
            "final_distances": {str(k): float(v) for k, v in self.final_distances.items()},
            "seeds": dict(self.seeds),
            "adam": dict(self.adam),
        }

    @classmethod
    def from_dict(cls, data: dict):
        def keyed(d):
            return {int(k) if k.lstrip("-").isdigit() else k: v for k, v in d.items()}
        return cls(
            losses=keyed(data.get("losses", {})),
            wall_clock=keyed(data.get("wall_clock", {})),
            final_distances=keyed(data.get("final_distances", {})),
            seeds=dict(data.get("seeds", {})),
            adam=dict(data.get("adam", {})),
        )

@dataclass(eq=False)
class CycleContext:
    """everything about one training batch except theta_k"""
    inputs: np.ndarray
    n_m: int
    n_a: int
    L: int
    # frozen ancilla outcome per input (sampled branch mode)
    outcomes: np.ndarray = None

    @property
    def n(self) -> int:
        return self.n_m + self.n_a

    def resolve_outcomes(self, theta, uniforms):
        """freeze one ancilla outcome per input by sampling at the current theta"""
        if self.n_a == 0:
            self.outcomes = np.zeros(len(self.inputs), dtype=int)
            return self.outcomes
        chi = _outputs(theta, self)
        self.outcomes, _, _ = core.qstate.collapse(chi, core.denoiser.ancilla_qubits(self.n_m, self.n_a), self.n, uniforms)
        return self.outcomes

def _outputs(theta, ctx: CycleContext) -> np.ndarray:
    gates = core.denoiser.build_ansatz_unitary(theta, ctx.n, ctx.L)
    return core.circuit.apply(core.denoiser.with_ancilla(ctx.inputs, ctx.n_a), gates, ctx.n)

# --- cost terms. X: forward batch rows, a: its weights, U: kept unnormalized blocks ---

def _kernel_grad(X, S, U, p, coef):
    """sum_i coef_ij df_ij/du_j* for every column j"""
    term = ((coef * S).T @ X) / p[:, None]
    shrink = np.sum(coef * np.abs(S) ** 2, axis=0) / p ** 2
    return term - shrink[:, None] * U

def sampled_wasserstein(X, a, U):
    p = np.sum(np.abs(U) ** 2, axis=1)
    S = X.conj() @ U.T
    f = np.abs(S) ** 2 / p
    b = np.full(len(U), 1.0 / len(U))
    plan = core.metrics.solve_transport(core.metrics.TransportProblem(np.clip(1.0 - f, 0.0, 1.0), a, b))
    return plan.objective, -_kernel_grad(X, S, U, p, plan.P)

def sampled_mmd(X, a, U):
    B = len(U)
    p = np.sum(np.abs(U) ** 2, axis=1)
    S = X.conj() @ U.T
    T = U.conj() @ U.T
    pp = np.outer(p, p)

    kxx = a @ (np.abs(X.conj() @ X.T) ** 2) @ a
    kyy = np.sum(np.abs(T) ** 2 / pp) / B ** 2
    kxy = np.sum(a[:, None] * np.abs(S) ** 2 / p[None, :]) / B
    cost = max(kxx + kyy - 2.0 * kxy, 0.0)

    # self-overlaps are pinned to 1, only off-diagonal pairs move
    M = T.conj() / pp
    np.fill_diagonal(M, 0.0)
    off = np.abs(T) ** 2 / pp
    np.fill_diagonal(off, 0.0)
    grad_yy = (2.0 / B ** 2) * (M @ U - (np.sum(off, axis=1) / p)[:, None] * U)
    grad_xy = (1.0 / B) * _kernel_grad(X, S, U, p, np.broadcast_to(a[:, None], S.shape))
    return cost, grad_yy - 2.0 * grad_xy

def enumerated_mmd(X, a, U, B):
    """all branches kept, weights p/B. polynomial in U, no normalization left."""
    S = X.conj() @ U.T
    T = U.conj() @ U.T

    kxx = a @ (np.abs(X.conj() @ X.T) ** 2) @ a
    kyy = np.sum(np.abs(T) ** 2) / B ** 2
    kxy = np.sum(a[:, None] * np.abs(S) ** 2) / B
    cost = max(kxx + kyy - 2.0 * kxy, 0.0)

    grad = (2.0 / B ** 2) * (T.T @ U) - (2.0 / B) * ((a[:, None] * S).T @ X)
    return cost, grad

def enumerated_wasserstein(X, a, U, B):
    p = np.sum(np.abs(U) ** 2, axis=1)
    keep = p >= BRANCH_CUTOFF
    Uk = U[keep]
    pk = p[keep]
    S = X.conj() @ Uk.T
    f = np.abs(S) ** 2 / pk
    b = pk / pk.sum()
    plan = core.metrics.solve_transport(core.metrics.TransportProblem(np.clip(1.0 - f, 0.0, 1.0), a, b))

    grad_k = -_kernel_grad(X, S, Uk, pk, plan.P)
    if plan.v is not None:
        # the column marginal moves with theta: dW/db = v
        grad_k += (np.asarray(plan.v) / B)[:, None] * Uk

    grad = np.zeros_like(U)
    grad[keep] = grad_k
    return plan.objective, grad

def _cost_and_costate(theta, batch, ctx: CycleContext, cfg: TrainConfig):
    chi = _outputs(theta, ctx)
    B = len(ctx.inputs)
    A = 2 ** ctx.n_a
    d_m = 2 ** ctx.n_m
    blocks = chi.reshape(B, d_m, A)
    X = batch.vectors
    a = batch.weights

    if cfg.branch_mode == "sampled":
        if ctx.outcomes is None:
            raise core.errors.TrainingError("sampled branch mode needs frozen ancilla outcomes")
        rows = np.arange(B)
        U = blocks[rows, :, ctx.outcomes]
        fn = sampled_wasserstein if cfg.cost == "wasserstein" else sampled_mmd
        cost, gU = fn(X, a, U)
        lam = np.zeros_like(blocks)
        lam[rows, :, ctx.outcomes] = gU
    else:
        # branch rows ordered (input j, outcome z)
        U = blocks.transpose(0, 2, 1).reshape(B * A, d_m)
        fn = enumerated_wasserstein if cfg.cost == "wasserstein" else enumerated_mmd
        cost, gU = fn(X, a, U, B)
        lam = gU.reshape(B, A, d_m).transpose(0, 2, 1)

    return float(cost), lam.reshape(B, -1)

def cost_only(theta, batch, ctx: CycleContext, cfg: TrainConfig) -> float:
    return _cost_and_costate(theta, batch, ctx, cfg)[0]

def finite_difference_gradient(theta, batch, ctx: CycleContext, cfg: TrainConfig) -> np.ndarray:
    """central differences with the context (inputs, outcomes) frozen"""
    theta = np.asarray(theta, dtype=float)
    h = cfg.fd_step
    grad = np.zeros_like(theta)
    for i in range(len(theta)):
        up = theta.copy()
        down = theta.copy()
        up[i] += h
        down[i] -= h
        grad[i] = (cost_only(up, batch, ctx, cfg) - cost_only(down, batch, ctx, cfg)) / (2 * h)
    return grad

def cost_and_gradient(theta, batch, ctx: CycleContext, cfg: TrainConfig):
    if batch.n_qubits != ctx.n_m:
        raise core.errors.DimensionError(f"forward batch has {batch.n_qubits} qubits, denoiser works on {ctx.n_m}")
    theta = np.asarray(theta, dtype=float)

    if cfg.gradient_mode == "finite_difference":
        return cost_only(theta, batch, ctx, cfg), finite_difference_gradient(theta, batch, ctx, cfg)

    cost, lam = _cost_and_costate(theta, batch, ctx, cfg)
    gates = core.denoiser.build_ansatz_unitary(theta, ctx.n, ctx.L)
    grad = core.circuit.adjoint_gradient(gates, ctx.n, core.denoiser.with_ancilla(ctx.inputs, ctx.n_a), lam, len(theta))
    return cost, grad

def _guard(cost, grad, cycle, epoch):
    if not np.isfinite(cost):
        raise core.errors.TrainingError(f"non-finite loss {cost}", cycle=cycle, epoch=epoch)
    bad = np.flatnonzero(~np.isfinite(grad))
    if len(bad):
        raise core.errors.TrainingError("non-finite gradient", cycle=cycle, epoch=epoch, index=int(bad[0]))

def _ensembles(forward_ensembles):
    return [s.ensemble if isinstance(s, core.forward.ForwardStep) else s for s in forward_ensembles]

def make_context(stack, k: int, batch_size: int, branch_mode: str, rng) -> CycleContext:
    """fresh Haar-product inputs pushed through the frozen theta_K..theta_{k+1}"""
    rng = core.rng.as_generator(rng)
    inputs = core.qstate.haar_product_vectors(stack.n_m, batch_size, rng)
    inputs = core.denoiser.propagate(stack, inputs, range(stack.K, k, -1), rng)
    ctx = CycleContext(inputs, stack.n_m, stack.n_a, stack.L)
    if branch_mode == "sampled":
        ctx.resolve_outcomes(stack.thetas[k - 1], rng.random(batch_size))
    return ctx

def distance(x, y, cost: str) -> float:
    if cost == "mmd":
        return core.metrics.mmd(x, y)
    return core.metrics.wasserstein1(x, y)[0]

def train_layerwise(forward_ensembles, stack, cfg: TrainConfig, rng=None, on_cycle=None):
    """
    forward_ensembles[k] is S_k for k = 0..K-1 (extra trailing entries are ignored).
    Returns (trained stack, TrainReport). on_cycle(k, losses) is called after every cycle.
    """
    ensembles = _ensembles(forward_ensembles)
    if len(ensembles) < stack.K:
        raise core.errors.ConfigError(f"need forward ensembles S_0..S_{stack.K - 1}, got {len(ensembles)}")
    for k, ens in enumerate(ensembles[:stack.K]):
        if ens.n_qubits != stack.n_m:
            raise core.errors.DimensionError(f"S_{k} has {ens.n_qubits} qubits, denoiser expects {stack.n_m}")
        if cfg.batch_size > len(ens):
            raise core.errors.ConfigError(f"batch_size {cfg.batch_size} is larger than S_{k} ({len(ens)} states)")

    root = core.rng.root(cfg.seed if rng is None else rng)
    report = TrainReport(seeds={"entropy": str(root.entropy), "spawn_key": list(root.spawn_key)}, adam=cfg.optimizer().hyperparameters())
    started = time.perf_counter()

    for k in range(stack.K, 0, -1):
        target = ensembles[k - 1]
        theta = stack.theta(k)
        opt = cfg.optimizer()
        losses = []
        cycle_start = time.perf_counter()

        for epoch in range(cfg.epochs):
            g = core.rng.stream(root, "train", k, epoch)
            batch = target.subset(np.sort(g.choice(len(target), size=cfg.batch_size, replace=False)))
            ctx = make_context(stack, k, cfg.batch_size, cfg.branch_mode, g)

            cost, grad = cost_and_gradient(theta, batch, ctx, cfg)
            _guard(cost, grad, k, epoch)
            losses.append(cost)
            theta = opt.step(theta, grad)

        stack = stack.with_theta(k, theta)
        report.losses[k] = losses
        report.wall_clock[k] = time.perf_counter() - cycle_start

        # held-out check on a fresh batch through the updated layers
        g = core.rng.stream(root, "final", k)
        generated = core.denoiser.propagate(stack, core.qstate.haar_product_vectors(stack.n_m, cfg.batch_size, g), range(stack.K, k - 1, -1), g)
        batch = target.subset(np.sort(g.choice(len(target), size=cfg.batch_size, replace=False)))
        report.final_distances[k] = distance(core.qstate.StateEnsemble.from_vectors(generated), batch, cfg.cost)

        core.log("train", f"cycle {k}/{stack.K}: loss {losses[0]:.4f} -> {losses[-1]:.4f}, D = {report.final_distances[k]:.4f} ({report.wall_clock[k]:.1f}s)")
        if on_cycle:
            on_cycle(k, losses)

    report.wall_clock["total"] = time.perf_counter() - started
    return stack, report
