"""
Datasets and the experiment bundle format.
"""
import os
import core
import datetime
import numpy as np
from ulid import ULID
from collections import namedtuple
from dataclasses import dataclass

SCHEMA = "1.0"
LOAD_NORM_TOL = 1e-8

CompressibleData = namedtuple("CompressibleData", ["ensemble", "reference", "latents"])

@dataclass(frozen=True)
class ClusterSpec:
    n_m: int
    weights: tuple = (0.4, 0.4, 0.2)
    sigma: float = 0.05

    def __post_init__(self):
        problems = []
        if self.n_m < 1:
            problems.append(f"n_m must be >= 1, got {self.n_m}")
        if len(self.weights) != 3 or min(self.weights) < 0 or abs(sum(self.weights) - 1.0) > 1e-12:
            problems.append(f"cluster weights must be 3 non-negative numbers summing to 1, got {self.weights}")
        if self.sigma < 0:
            problems.append(f"sigma must be >= 0, got {self.sigma}")
        if problems:
            raise core.errors.ConfigError(problems)

    def centers(self) -> np.ndarray:
        """|0...0>, |1...1> and GHZ"""
        d = 2 ** self.n_m
        out = np.zeros((3, d), dtype=complex)
        out[0, 0] = 1.0
        out[1, -1] = 1.0
        out[2, 0] = out[2, -1] = 1 / np.sqrt(2)
        return out

@dataclass(frozen=True)
class CircularSpec:
    n_m: int
    beta_range: tuple = (0.0, 2 * np.pi)

    def __post_init__(self):
        if self.n_m < 1:
            raise core.errors.ConfigError(f"n_m must be >= 1, got {self.n_m}")

def _check_count(n_samples):
    if n_samples < 1:
        raise core.errors.ConfigError(f"n_samples must be >= 1, got {n_samples}")

def sample_multicluster_labeled(spec: ClusterSpec, n_samples: int, rng):
    """ensemble plus the cluster index each member was drawn from"""
    _check_count(n_samples)
    rng = core.rng.as_generator(rng)
    labels = rng.choice(3, size=n_samples, p=np.asarray(spec.weights))
    vectors = spec.centers()[labels]

    if spec.sigma > 0:
        # independent N(0, sigma^2) rotations about X, Y and Z on every qubit
        angles = rng.normal(0.0, spec.sigma, size=(n_samples, spec.n_m, 3))
        for q in range(spec.n_m):
            for axis, generator in enumerate((core.circuit.X, core.circuit.Y, core.circuit.Z)):
                mats = core.circuit.rotation_batch(generator, angles[:, q, axis])
                vectors = core.qstate.apply_matrix(vectors, mats, (q,), spec.n_m)

    vectors = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
    return core.qstate.StateEnsemble.from_vectors(vectors), labels

def sample_multicluster(spec: ClusterSpec, n_samples: int, rng):
    return sample_multicluster_labeled(spec, n_samples, rng)[0]

def circular_vectors(n_m: int, betas) -> np.ndarray:
    """cos(b/2)|0...0> + sin(b/2)|1...1>"""
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    out = np.zeros((len(betas), 2 ** n_m), dtype=complex)
    out[:, 0] = np.cos(betas / 2)
    out[:, -1] = np.sin(betas / 2)
    return out

def sample_circular(spec: CircularSpec, n_samples: int, rng):
    _check_count(n_samples)
    rng = core.rng.as_generator(rng)
    low, high = spec.beta_range
    betas = rng.uniform(low, high, size=n_samples)
    return core.qstate.StateEnsemble.from_vectors(circular_vectors(spec.n_m, betas))

def sample_haar_product(n_m: int, n_samples: int, rng):
    _check_count(n_samples)
    return core.qstate.StateEnsemble.from_vectors(core.qstate.haar_product_vectors(n_m, n_samples, rng))

def sample_haar(n_m: int, n_samples: int, rng):
    _check_count(n_samples)
    return core.qstate.StateEnsemble.from_vectors(core.qstate.haar_vectors(n_m, n_samples, rng))

def sample_compressible(n_total: int, n_latent: int, n_samples: int, rng, depth: int = 2) -> CompressibleData:
    """
    Haar latent states (x) |0...0> trash, scrambled by the exact inverse of a
    hidden reference encoder. The reference maps every member back to
    latent (x) |0...0>, so a zero-loss encoder exists.
    """
    _check_count(n_samples)
    rng = core.rng.as_generator(rng)
    reference = core.qae.QaeModel.initial(n_total, n_latent, depth, rng)
    latents = core.qstate.haar_vectors(n_latent, n_samples, rng)
    vectors = core.qae.decode_vectors(reference, latents)
    vectors = vectors / np.linalg.norm(vectors, axis=1, keepdims=True)
    return CompressibleData(core.qstate.StateEnsemble.from_vectors(vectors), reference, core.qstate.StateEnsemble.from_vectors(latents))

def sample_dataset(name: str, n_m: int, n_samples: int, rng, sigma: float = 0.05):
    match name:
        case "cluster" | "multicluster":
            return sample_multicluster(ClusterSpec(n_m, sigma=sigma), n_samples, rng)
        case "circular":
            return sample_circular(CircularSpec(n_m), n_samples, rng)
        case "haar_product":
            return sample_haar_product(n_m, n_samples, rng)
    raise core.errors.ConfigError(f"unknown dataset {name!r}")

# --- bundles ---

def encode_ensemble(ensemble) -> dict:
    if ensemble is None or len(ensemble) == 0:
        raise core.errors.BundleError("can't store an empty ensemble")
    if not isinstance(ensemble, core.qstate.StateEnsemble):
        ensemble = core.qstate.StateEnsemble.from_kets(ensemble)
    return {
        "n_qubits": ensemble.n_qubits,
        "weights": [float(w) for w in ensemble.weights],
        "amplitudes": [[[float(c.real), float(c.imag)] for c in row] for row in ensemble.vectors],
    }

def decode_ensemble(data: dict, name: str = "ensemble"):
    try:
        amps = np.array(data["amplitudes"], dtype=float)
        weights = np.array(data["weights"], dtype=float)
        n = int(data["n_qubits"])
    except (KeyError, TypeError, ValueError) as e:
        raise core.errors.BundleError(f"{name}: malformed ensemble ({e})") from e

    if amps.ndim != 3 or amps.shape[2] != 2 or amps.shape[1] != 2 ** n or amps.shape[0] == 0:
        raise core.errors.BundleError(f"{name}: amplitudes don't fit {n} qubits")
    vectors = amps[:, :, 0] + 1j * amps[:, :, 1]

    norms = np.linalg.norm(vectors, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > LOAD_NORM_TOL)
    if len(bad):
        raise core.errors.BundleError(f"{name}: member {bad[0]} has norm {norms[bad[0]]}")

    try:
        return core.qstate.StateEnsemble(vectors / norms[:, None], weights / weights.sum())
    except core.errors.StateError as e:
        raise core.errors.BundleError(f"{name}: {e}") from e

def encode_stack(stack) -> dict:
    return {
        "K": stack.K, "n_m": stack.n_m, "n_a": stack.n_a, "L": stack.L,
        "thetas": [[float(t) for t in row] for row in stack.thetas],
    }

def decode_stack(data: dict):
    return core.denoiser.DenoiserStack(int(data["K"]), int(data["n_m"]), int(data["n_a"]), int(data["L"]), data["thetas"])

def save_bundle(path: str, artifacts: dict) -> str:
    """
    artifacts may hold: config, seeds, ensembles ({name: StateEnsemble}),
    stack, report, qae, extra. returns the run id.
    """
    doc = {
        "schema": SCHEMA,
        "run_id": artifacts.get("run_id") or str(ULID()),
        "created": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": artifacts.get("config", {}),
        "seeds": artifacts.get("seeds", {}),
    }

    ensembles = artifacts.get("ensembles") or {}
    doc["ensembles"] = {name: encode_ensemble(e) for name, e in ensembles.items()}
    if artifacts.get("stack") is not None:
        doc["stack"] = encode_stack(artifacts["stack"])
    if artifacts.get("report") is not None:
        doc["report"] = artifacts["report"].to_dict()
    if artifacts.get("qae") is not None:
        doc["qae"] = artifacts["qae"].to_dict()
    if artifacts.get("extra"):
        doc["extra"] = artifacts["extra"]

    store = core.storage.StorageDict(path, "json", autoload=False)
    store.update(doc)
    try:
        store.save()
    except (TypeError, ValueError) as e:
        raise core.errors.BundleError(f"can't serialize bundle: {e}") from e

    core.log("data", f"saved bundle {doc['run_id']} to {store.path}")
    return doc["run_id"]

def load_bundle(path: str) -> dict:
    store = core.storage.StorageDict(path, "json", autoload=False)
    if not os.path.exists(store.path):
        raise core.errors.BundleError(f"no bundle at {store.path}")

    try:
        store.load()
    except ValueError as e:
        raise core.errors.BundleError(f"corrupt bundle {store.path}: {e}") from e

    schema = str(store.get("schema", ""))
    if schema.split(".")[0] != SCHEMA.split(".")[0]:
        raise core.errors.BundleError(f"unsupported bundle schema {schema!r}, expected {SCHEMA}")

    out = {
        "schema": schema,
        "run_id": store.get("run_id"),
        "created": store.get("created"),
        "config": store.get("config", {}),
        "seeds": store.get("seeds", {}),
        "ensembles": {name: decode_ensemble(e, name) for name, e in (store.get("ensembles") or {}).items()},
        "stack": None,
        "report": None,
        "qae": None,
        "extra": store.get("extra", {}),
    }
    try:
        if "stack" in store:
            out["stack"] = decode_stack(store["stack"])
        if "report" in store:
            out["report"] = core.train.TrainReport.from_dict(store["report"])
        if "qae" in store:
            out["qae"] = core.qae.QaeModel.from_dict(store["qae"])
    except (KeyError, TypeError, core.errors.ConfigError) as e:
        raise core.errors.BundleError(f"corrupt bundle {store.path}: {e}") from e
    return out
