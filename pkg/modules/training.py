import core

LOSS_COLUMNS = ("cycle", "epoch", "loss")
DISTANCE_COLUMNS = ("direction", "k", "metric_name", "value", "trial")
SAMPLE_COLUMNS = ("k", "metric_name", "value", "trial")

def _curve(ensembles, target, haar, names):
    """distance-only metrics for every step of a chain"""
    names = [n for n in names if n in core.metrics.DISTANCE_METRICS]
    return [
        (k, name, value)
        for k, ensemble in enumerate(ensembles)
        for name, _, value in core.metrics.distance_table(ensemble, target, haar, names)
    ]

class Training(core.module.Module):
    """
    Layerwise training of the denoiser stack and sampling from trained bundles.
    Each trial writes its own bundle, the CSV tables cover all trials.
    """

    def train_trial(self, trial: int, seed):
        cfg = self.config
        ds = cfg["dataset"]
        names = cfg["metrics"]["distances"]

        s0 = cfg.dataset(ds["n_samples"], core.rng.stream(seed, "dataset"))
        target = cfg.dataset(ds["n_target"], core.rng.stream(seed, "target"))
        haar = cfg.haar_reference(s0.n_qubits, core.rng.stream(seed, "haar"))

        steps = cfg.run_forward(s0, core.rng.child(seed, "forward"))
        stack = cfg.initial_stack(core.rng.stream(seed, "init"))
        stack, report = core.train.train_layerwise(steps, stack, cfg.train_config(), core.rng.child(seed, "train"))
        generated = core.denoiser.generate(stack, ds["n_target"], core.rng.child(seed, "generate"))

        rows = [("forward", k, name, value, trial) for k, name, value in _curve([s.ensemble for s in steps], target, haar, names)]
        rows += [("backward", k, name, value, trial) for k, name, value in _curve(generated.steps, target, haar, names)]

        core.data.save_bundle(self.manager.out_path(f"train_trial{trial}.json"), {
            "config": cfg.data,
            "seeds": {"trial": trial, "entropy": str(seed.entropy), "spawn_key": list(seed.spawn_key)},
            "ensembles": {"data": s0, "target": target, "generated": generated.ensemble},
            "stack": stack,
            "report": report,
        })
        return report.loss_rows(), rows

    @core.module.command("train")
    async def train(self, args):
        """diffuse the dataset, train every denoising step, save the stack"""
        try:
            results = await self.manager.map_trials(self.train_trial)
            for trial, (losses, _) in enumerate(results):
                self.manager.write_csv(f"loss_trial{trial}.csv", losses, LOSS_COLUMNS)
            rows = [row for _, trial_rows in results for row in trial_rows]
            path = self.manager.write_csv("train_distances.csv", rows, DISTANCE_COLUMNS, sort_by=("trial", "direction", "k", "metric_name"))
            return self.result(f"trained {len(results)} trial(s), distances in {path}")
        except core.errors.ChaosDiffError as e:
            return self.failed("training", e)

    def sample_trial(self, trial: int, seed, bundle):
        cfg = self.config
        stack = bundle["stack"]
        n_samples = cfg["sample"]["n_samples"]

        target = bundle["ensembles"].get("target")
        if target is None:
            target = core.data.sample_dataset(cfg["dataset"]["name"], stack.n_m, n_samples, core.rng.stream(seed, "target"), cfg["dataset"]["sigma"])
        if target.n_qubits != stack.n_m:
            raise core.errors.DimensionError(f"bundle target has {target.n_qubits} qubits, the stack generates {stack.n_m}")
        haar = cfg.haar_reference(stack.n_m, core.rng.stream(seed, "haar"))

        generated = core.denoiser.generate(stack, n_samples, core.rng.child(seed, "generate"))
        rows = [(k, name, value, trial) for k, name, value in _curve(generated.steps, target, haar, cfg["metrics"]["distances"])]

        core.data.save_bundle(self.manager.out_path(f"sample_trial{trial}.json"), {
            "config": cfg.data,
            "seeds": {"trial": trial, "entropy": str(seed.entropy), "spawn_key": list(seed.spawn_key)},
            "ensembles": {"generated": generated.ensemble, "target": target},
            "stack": stack,
            "extra": {"source_run": bundle["run_id"]},
        })
        return rows

    @core.module.command("sample")
    async def sample(self, args):
        """generate ensembles from a trained bundle and write sample.csv"""
        try:
            bundle = core.data.load_bundle(core.resolve_path(self.config["sample"]["bundle"]))
            if bundle["stack"] is None:
                raise core.errors.BundleError(f"bundle {bundle['run_id']} holds no trained denoiser")
            results = await self.manager.map_trials(self.sample_trial, bundle)
            rows = [row for trial_rows in results for row in trial_rows]
            path = self.manager.write_csv("sample.csv", rows, SAMPLE_COLUMNS, sort_by=("trial", "k", "metric_name"))
            return self.result(f"wrote {path}")
        except core.errors.ChaosDiffError as e:
            return self.failed("sampling", e)
