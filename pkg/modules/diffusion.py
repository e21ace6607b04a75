import core

COLUMNS = ("scheme", "k", "n_f", "m", "metric_name", "value", "trial")

class Diffusion(core.module.Module):
    """Forward scrambling experiments: distance to Haar and to the data per step"""

    def forward_trial(self, trial: int, seed):
        cfg = self.config
        metrics = cfg["metrics"]
        s0 = cfg.dataset(cfg["dataset"]["n_samples"], core.rng.stream(seed, "dataset"))
        haar = cfg.haar_reference(s0.n_qubits, core.rng.stream(seed, "haar"))

        rows = []
        for scheme in cfg.forward_schemes():
            for n_f in cfg.forward_n_f(scheme):
                steps = cfg.run_forward(s0, core.rng.child(seed, "forward", n_f), scheme, n_f)
                for k, step in enumerate(steps):
                    for name, m, value in core.metrics.distance_table(step.ensemble, s0, haar, metrics["distances"], metrics["moments"]):
                        rows.append((scheme, k, n_f, m, name, value, trial))
                core.log("forward", f"trial {trial} {scheme} n_f={n_f}: {len(steps) - 1} steps")
        return rows

    @core.module.command("forward")
    async def forward(self, args):
        """run the forward diffusion and write forward.csv"""
        try:
            results = await self.manager.map_trials(self.forward_trial)
            rows = [row for trial_rows in results for row in trial_rows]
            path = self.manager.write_csv("forward.csv", rows, COLUMNS, sort_by=("trial", "scheme", "n_f", "k", "metric_name", "m"))
            return self.result(f"wrote {path}")
        except core.errors.ChaosDiffError as e:
            return self.failed("forward diffusion", e)
