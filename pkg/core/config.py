import os
import core
import numpy as np

DEFAULT_PATH = "experiment"
DEFAULT_DIR = "config"

METRIC_NAMES = ("wass_haar", "wass_target", "mmd_target", "delta_haar", "delta_target")
DATASETS = ("cluster", "circular", "haar_product")

default_config = {
    "log": True,
    "seed": 1234,
    "trials": 1,
    "threads": 4,
    "out": "results",
    "dataset": {
        "name": "cluster",
        "n_m": 2,
        "n_samples": 200,
        # fresh held-out target states for end-of-run distances
        "n_target": 200,
        "sigma": 0.05,
    },
    "hamiltonian": {
        "hx": 0.8090,
        "hy": 0.9045,
        "J": 1.0,
        "max_sites": 13,
    },
    "diffusion": {
        "scheme": "CTED",
        "n_f": 2,
        "K": 10,
        "dt": 0.02,
        "complement_dist": None,
        "alpha_scale": 1.0,
    },
    "denoiser": {
        "n_a": 1,
        "L": 4,
        "init_low": -np.pi,
        "init_high": np.pi,
    },
    "train": {
        "epochs": 1000,
        "batch_size": 100,
        "learning_rate": 0.001,
        "cost": "wasserstein",
        "gradient_mode": "adjoint",
        "branch_mode": "sampled",
        "fd_step": 1e-5,
        "beta1": 0.9,
        "beta2": 0.999,
        "eps": 1e-8,
    },
    "noise": {
        "p1": 0.0,
        "p2": 0.0,
        "gamma_phi": 0.0,
    },
    "metrics": {
        "moments": [1, 2, 3],
        "distances": list(METRIC_NAMES),
        # size of the Haar-random reference ensemble for wass_haar
        "n_haar": 200,
    },
    "forward": {
        # empty lists fall back to diffusion.scheme / diffusion.n_f
        "schemes": [],
        "n_f": [],
    },
    "sample": {
        "bundle": "results/train_trial0.json",
        "n_samples": 200,
    },
    "evaluate": {
        "bundle_a": "results/sample_trial0.json",
        "ensemble_a": "generated",
        "bundle_b": "results/sample_trial0.json",
        "ensemble_b": "target",
    },
    "noise_sweep": {
        "schemes": ["RUCD", "CTED", "RTED"],
        "p1_grid": [0.0, 0.02, 0.05, 0.1],
        "p2_grid": [0.0, 0.02, 0.05],
        # step at which forward corruption is reported, null means K
        "k_eval": None,
        "train": True,
    },
    "qae": {
        "n_total": 4,
        "n_latent": 2,
        "depth": 20,
        "epochs": 2000,
        "learning_rate": 0.001,
        "batch_size": None,
        "reference_depth": 2,
        "n_samples": 200,
    },
}

def sync_config(user_config, defaults):
    """
    recursively sync user config with defaults
    """
    # Base case: if defaults isn't a dict, can't recurse further
    if not isinstance(defaults, dict):
        return defaults

    result = {}

    for key, default_value in defaults.items():
        if key in user_config:
            user_value = user_config[key]
            # Recurse if both are dicts
            if isinstance(default_value, dict) and isinstance(user_value, dict):
                result[key] = sync_config(user_value, default_value)
            else:
                # Key exists - keep the user's value
                result[key] = user_value
        else:
            # Key missing from user config - add default
            result[key] = default_value

    return result

def unknown_keys(user_config, defaults, prefix=""):
    """dotted paths present in the user config that the defaults don't know about"""
    found = []
    for key, value in user_config.items():
        path = f"{prefix}{key}"
        if key not in defaults:
            found.append(path)
        elif isinstance(value, dict) and isinstance(defaults[key], dict):
            found.extend(unknown_keys(value, defaults[key], f"{path}."))
    return found

def _problems(fn):
    try:
        fn()
    except core.errors.ConfigError as e:
        return e.problems
    return []

def validate(cfg: dict):
    """check every module precondition up front. raises one ConfigError listing all problems."""
    problems = []

    for key in ("trials", "threads"):
        if not isinstance(cfg.get(key), int) or cfg[key] < 1:
            problems.append(f"{key} must be a positive integer, got {cfg.get(key)!r}")
    if not isinstance(cfg.get("seed"), int) or cfg["seed"] < 0:
        problems.append(f"seed must be a non-negative integer, got {cfg.get('seed')!r}")

    ds = cfg["dataset"]
    if ds["name"] not in DATASETS:
        problems.append(f"dataset.name must be one of {', '.join(DATASETS)}, got {ds['name']!r}")
    for key in ("n_m", "n_samples", "n_target"):
        if not isinstance(ds[key], int) or ds[key] < 1:
            problems.append(f"dataset.{key} must be a positive integer, got {ds[key]!r}")
    if ds["sigma"] < 0:
        problems.append(f"dataset.sigma must be >= 0, got {ds['sigma']}")

    exp = ExperimentConfig(cfg)
    schemes = exp.forward_schemes()
    for scheme in schemes:
        for n_f in exp.forward_n_f(scheme):
            problems += _problems(lambda: exp.diffusion(scheme, n_f))
            if scheme != "RUCD" and ds["n_m"] + n_f > cfg["hamiltonian"]["max_sites"]:
                problems.append(f"n_m + n_f = {ds['n_m'] + n_f} is above hamiltonian.max_sites ({cfg['hamiltonian']['max_sites']})")

    den = cfg["denoiser"]
    if not isinstance(den["n_a"], int) or den["n_a"] < 0:
        problems.append(f"denoiser.n_a must be >= 0, got {den['n_a']!r}")
    if not isinstance(den["L"], int) or den["L"] < 1:
        problems.append(f"denoiser.L must be >= 1, got {den['L']!r}")
    if den["init_low"] >= den["init_high"]:
        problems.append("denoiser.init_low must be below denoiser.init_high")

    problems += _problems(exp.train_config)
    if isinstance(cfg["train"].get("batch_size"), int) and cfg["train"]["batch_size"] > ds["n_samples"]:
        problems.append(f"train.batch_size ({cfg['train']['batch_size']}) is larger than dataset.n_samples ({ds['n_samples']})")
    if cfg["train"]["epochs"] < 1:
        problems.append("train.epochs must be >= 1")

    problems += _problems(exp.noise_config)
    for key in ("p1_grid", "p2_grid"):
        for p in cfg["noise_sweep"][key]:
            if not 0.0 <= p <= 0.5:
                problems.append(f"noise_sweep.{key} entries must be in [0, 0.5], got {p}")
    for scheme in cfg["noise_sweep"]["schemes"]:
        if str(scheme).upper() not in core.forward.SCHEMES:
            problems.append(f"noise_sweep.schemes: unknown scheme {scheme!r}")
    k_eval = cfg["noise_sweep"]["k_eval"]
    if k_eval is not None and not 1 <= k_eval <= cfg["diffusion"]["K"]:
        problems.append(f"noise_sweep.k_eval must be in [1, K], got {k_eval}")

    met = cfg["metrics"]
    for m in met["moments"]:
        if not isinstance(m, int) or not 1 <= m <= core.metrics.MAX_MOMENT:
            problems.append(f"metrics.moments entries must be integers in [1, {core.metrics.MAX_MOMENT}], got {m!r}")
    for name in met["distances"]:
        if name not in METRIC_NAMES:
            problems.append(f"metrics.distances: unknown metric {name!r}")
    if met["n_haar"] < 1:
        problems.append("metrics.n_haar must be >= 1")

    q = cfg["qae"]
    if not 1 <= q["n_latent"] < q["n_total"]:
        problems.append(f"qae needs 1 <= n_latent < n_total, got {q['n_latent']} and {q['n_total']}")
    for key in ("depth", "reference_depth", "epochs"):
        if q[key] < 0:
            problems.append(f"qae.{key} must be >= 0")
    if not q["learning_rate"] > 0:
        problems.append("qae.learning_rate must be positive")
    if q["n_samples"] < 1:
        problems.append("qae.n_samples must be >= 1")

    if problems:
        raise core.errors.ConfigError(list(dict.fromkeys(problems)))
    return True

class ExperimentConfig:
    """merged experiment settings plus builders for the typed configs"""

    def __init__(self, data: dict, path: str = None):
        self.data = data
        self.path = path

    def __getitem__(self, key):
        return self.data[key]

    def get(self, *keys, default=None):
        """get("train", "epochs") walks nested sections"""
        node = self.data
        for key in keys:
            if not isinstance(node, dict) or key not in node:
                return default
            node = node[key]
        return node

    @property
    def seed(self) -> int:
        return self.data["seed"]

    @property
    def n_m(self) -> int:
        return self.data["dataset"]["n_m"]

    def forward_schemes(self):
        schemes = self.data["forward"]["schemes"] or [self.data["diffusion"]["scheme"]]
        return [str(s).upper() for s in schemes]

    def forward_n_f(self, scheme: str):
        if scheme.upper() == "RUCD":
            return [0]
        return list(self.data["forward"]["n_f"] or [self.data["diffusion"]["n_f"]])

    def noise_config(self, **overrides) -> core.noisemod.NoiseConfig:
        values = dict(self.data["noise"])
        values.update(overrides)
        return core.noisemod.NoiseConfig(float(values["p1"]), float(values["p2"]), float(values["gamma_phi"]))

    def diffusion(self, scheme: str = None, n_f: int = None, noise=None, n_m: int = None) -> core.forward.DiffusionConfig:
        d = self.data["diffusion"]
        scheme = (scheme or d["scheme"]).upper()
        if n_f is None:
            n_f = 0 if scheme == "RUCD" else d["n_f"]
        # a user-supplied q only fits the configured n_f
        q = d["complement_dist"] if n_f == d["n_f"] else None
        if noise is None:
            noise = self.noise_config()
        return core.forward.DiffusionConfig(
            scheme=scheme,
            n_m=n_m or self.n_m,
            n_f=n_f,
            K=d["K"],
            dt=float(d["dt"]),
            complement_dist=q,
            noise=None if noise.noiseless else noise,
            alpha_scale=float(d["alpha_scale"]),
        )

    def hamiltonian(self, n_f: int, n_m: int = None):
        h = self.data["hamiltonian"]
        return core.chaos.build_hamiltonian((n_m or self.n_m) + n_f, h["hx"], h["hy"], h["J"], h["max_sites"])

    def train_config(self) -> core.train.TrainConfig:
        t = self.data["train"]
        return core.train.TrainConfig(
            epochs=t["epochs"],
            batch_size=t["batch_size"],
            learning_rate=float(t["learning_rate"]),
            cost=t["cost"],
            seed=self.seed,
            gradient_mode=t["gradient_mode"],
            branch_mode=t["branch_mode"],
            fd_step=float(t["fd_step"]),
            beta1=float(t["beta1"]),
            beta2=float(t["beta2"]),
            eps=float(t["eps"]),
        )

    def initial_stack(self, rng, n_m: int = None):
        den = self.data["denoiser"]
        return core.denoiser.DenoiserStack.initial(
            self.data["diffusion"]["K"], n_m or self.n_m, den["n_a"], den["L"], rng, den["init_low"], den["init_high"],
        )

    def run_forward(self, s0, rng, scheme: str = None, n_f: int = None, noise=None):
        """diffuse s0 with the configured scheme, sized to s0's qubit count"""
        cfg = self.diffusion(scheme, n_f, noise, n_m=s0.n_qubits)
        h = None if cfg.scheme == "RUCD" else self.hamiltonian(cfg.n_f, s0.n_qubits)
        return core.forward.diffuse(s0, cfg, rng, h)

    def haar_reference(self, n_qubits: int, rng):
        return core.data.sample_haar(n_qubits, self.data["metrics"]["n_haar"], rng)

    def dataset(self, n_samples: int, rng):
        ds = self.data["dataset"]
        return core.data.sample_dataset(ds["name"], ds["n_m"], n_samples, rng, ds["sigma"])

def load(path: str = None, overrides: dict = None) -> ExperimentConfig:
    """
    read a YAML or JSON experiment file and fill in defaults.
    without a path, config/experiment.yml is used and created on first run.
    """
    if path is None:
        store = core.storage.StorageDict(DEFAULT_PATH, "yaml", data_dir=DEFAULT_DIR)
        if not store:
            store.load(default_config)
            store.save()
            core.log("config", f"a new experiment config was created at {store.path}")
    else:
        store = core.storage.StorageDict(path)
        if not os.path.exists(store.path):
            raise core.errors.ConfigError(f"config file {store.path} does not exist")

    user_config = dict(store)
    for key in unknown_keys(user_config, default_config):
        core.log("warning", f"{store.name}: ignoring unknown setting {key}")

    merged = sync_config(user_config, default_config)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value

    core.set_logging(merged.get("log", True))
    validate(merged)
    return ExperimentConfig(merged, store.path)
