"""
Quantum autoencoder for latent-space diffusion.

The latent register is the first n_latent qubits (high-order), trash is the
rest. Encoding post-selects the trash onto |0...0>, decoding runs the exact
inverse circuit on latent (x) |0...0>.
"""
import core
import numpy as np
from dataclasses import dataclass

DEFAULT_DEPTH = 20
DEFAULT_EPOCHS = 2000
COMPRESS_CUTOFF = 1e-12

@dataclass(eq=False)
class QaeModel:
    n_total: int
    n_latent: int
    depth: int
    params: np.ndarray

    def __post_init__(self):
        params = np.array(self.params, dtype=float).reshape(-1)
        problems = []
        if not 1 <= self.n_latent < self.n_total:
            problems.append(f"need 1 <= n_latent < n_total, got {self.n_latent} and {self.n_total}")
        if self.depth < 0:
            problems.append(f"depth must be >= 0, got {self.depth}")
        if len(params) != self.n_total * self.depth:
            problems.append(f"{len(params)} parameters for {self.n_total} qubits x depth {self.depth}")
        if problems:
            raise core.errors.ConfigError(problems)
        self.params = params

    @classmethod
    def initial(cls, n_total: int, n_latent: int, depth: int = DEFAULT_DEPTH, rng=None, scale: float = np.pi):
        rng = core.rng.as_generator(0 if rng is None else rng)
        return cls(n_total, n_latent, depth, rng.uniform(-scale, scale, n_total * depth))

    @property
    def n_trash(self) -> int:
        return self.n_total - self.n_latent

    def with_params(self, params):
        return QaeModel(self.n_total, self.n_latent, self.depth, params)

    def to_dict(self) -> dict:
        return {"n_total": self.n_total, "n_latent": self.n_latent, "depth": self.depth, "params": [float(p) for p in self.params]}

    @classmethod
    def from_dict(cls, data: dict):
        return cls(int(data["n_total"]), int(data["n_latent"]), int(data["depth"]), data["params"])

def encoder_circuit(model: QaeModel):
    """per layer: RY on every qubit, then a CNOT ring q -> q+1 (mod n)"""
    n = model.n_total
    gates = []
    for l in range(model.depth):
        for q in range(n):
            gates.append(core.circuit.ry(q, model.params[l * n + q], param=l * n + q))
        for q in range(n):
            gates.append(core.circuit.cnot(q, (q + 1) % n))
    return gates

def _check(model: QaeModel, n_qubits: int):
    if n_qubits != model.n_total:
        raise core.errors.DimensionError(f"{n_qubits} qubit data for a {model.n_total} qubit autoencoder")

def _kept(model: QaeModel, chi: np.ndarray) -> np.ndarray:
    """(B, 2**n_latent) component with the trash in |0...0>"""
    return chi.reshape(chi.shape[0], 2 ** model.n_latent, 2 ** model.n_trash)[:, :, 0]

def trash_loss_and_gradient(model: QaeModel, batch):
    _check(model, batch.n_qubits)
    gates = encoder_circuit(model)
    chi = core.circuit.apply(batch.vectors, gates, model.n_total)
    kept = _kept(model, chi)
    w = batch.weights
    loss = 1.0 - float(w @ np.sum(np.abs(kept) ** 2, axis=1))

    # dL/dchi* = -w_j (I (x) |0><0|) chi_j
    lam = np.zeros_like(chi).reshape(chi.shape[0], 2 ** model.n_latent, 2 ** model.n_trash)
    lam[:, :, 0] = -w[:, None] * kept
    grad = core.circuit.adjoint_gradient(gates, model.n_total, batch.vectors, lam.reshape(chi.shape), len(model.params))
    return min(max(loss, 0.0), 1.0), grad

def trash_loss(model: QaeModel, batch) -> float:
    _check(model, batch.n_qubits)
    chi = core.circuit.apply(batch.vectors, encoder_circuit(model), model.n_total)
    loss = 1.0 - float(batch.weights @ np.sum(np.abs(_kept(model, chi)) ** 2, axis=1))
    return min(max(loss, 0.0), 1.0)

def train_qae(model: QaeModel, data, epochs: int = DEFAULT_EPOCHS, lr: float = 0.001, rng=None, batch_size: int = None):
    """Adam on the trash loss. full batch unless batch_size is given."""
    _check(model, data.n_qubits)
    rng = core.rng.as_generator(0 if rng is None else rng)
    opt = core.optim.Adam(lr)
    params = model.params.copy()
    curve = []

    for epoch in range(epochs):
        batch = data
        if batch_size and batch_size < len(data):
            batch = data.subset(np.sort(rng.choice(len(data), size=batch_size, replace=False)))

        loss, grad = trash_loss_and_gradient(model.with_params(params), batch)
        if not np.isfinite(loss):
            raise core.errors.TrainingError(f"non-finite trash loss {loss}", epoch=epoch)
        bad = np.flatnonzero(~np.isfinite(grad))
        if len(bad):
            raise core.errors.TrainingError("non-finite trash gradient", epoch=epoch, index=int(bad[0]))

        curve.append(loss)
        params = opt.step(params, grad)
        if epochs >= 10 and (epoch + 1) % (epochs // 10) == 0:
            core.log("qae", f"epoch {epoch + 1}/{epochs}: trash loss {loss:.6f}")

    return model.with_params(params), curve

def encode_vectors(model: QaeModel, vectors: np.ndarray) -> np.ndarray:
    chi = core.circuit.apply(np.atleast_2d(vectors), encoder_circuit(model), model.n_total)
    kept = _kept(model, chi)
    probs = np.sum(np.abs(kept) ** 2, axis=1)
    bad = np.flatnonzero(probs < COMPRESS_CUTOFF)
    if len(bad):
        raise core.errors.NotCompressibleError(f"trash projection probability {probs[bad[0]]:.3g} for state {bad[0]}")
    return kept / np.sqrt(probs)[:, None]

def decode_vectors(model: QaeModel, latents: np.ndarray) -> np.ndarray:
    latents = np.atleast_2d(latents)
    joint = np.zeros((latents.shape[0], latents.shape[1], 2 ** model.n_trash), dtype=complex)
    joint[:, :, 0] = latents
    return core.circuit.apply(joint.reshape(latents.shape[0], -1), core.circuit.inverse(encoder_circuit(model)), model.n_total)

def encode(model: QaeModel, state):
    _check(model, state.n_qubits)
    return core.qstate.Ket.from_vector(encode_vectors(model, state.amplitudes)[0], normalize=True)

def decode(model: QaeModel, latent):
    if latent.n_qubits != model.n_latent:
        raise core.errors.DimensionError(f"{latent.n_qubits} qubit latent for a {model.n_latent} qubit latent space")
    return core.qstate.Ket.from_vector(decode_vectors(model, latent.amplitudes)[0], normalize=True)

def encode_ensemble(model: QaeModel, ensemble):
    _check(model, ensemble.n_qubits)
    return core.qstate.StateEnsemble.from_vectors(encode_vectors(model, ensemble.vectors), ensemble.weights)

def decode_ensemble(model: QaeModel, ensemble):
    out = decode_vectors(model, ensemble.vectors)
    return core.qstate.StateEnsemble.from_vectors(out / np.linalg.norm(out, axis=1, keepdims=True), ensemble.weights)

def roundtrip_fidelity(model: QaeModel, ensemble) -> float:
    """weighted mean fidelity of decode(encode(psi)) with psi"""
    back = decode_vectors(model, encode_vectors(model, ensemble.vectors))
    fids = np.abs(np.sum(ensemble.vectors.conj() * back, axis=1)) ** 2
    return float(ensemble.weights @ fids)
