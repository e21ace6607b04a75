import core

SWEEP_COLUMNS = ("scheme", "noise_param", "value", "trial", "D_wass")
MOMENT_COLUMNS = ("scheme", "noise_param", "value", "trial", "m", "delta_target")

def sweep_cells(schemes, p1_grid, p2_grid):
    """(scheme, noise_param, value): RUCD sweeps the gate error p1, the chaotic schemes sweep dephasing p2"""
    cells = []
    for scheme in schemes:
        scheme = str(scheme).upper()
        if scheme == "RUCD":
            cells.extend((scheme, "p1", float(p)) for p in p1_grid)
        else:
            cells.extend((scheme, "p2", float(p)) for p in p2_grid)
    return cells

class Noise(core.module.Module):
    """
    Noise robustness. Every grid cell reuses the same seeds, so only the noise
    level changes between cells of one trial.
    """

    def cell(self, trial: int, seed, scheme: str, param: str, value: float, s0, target):
        cfg = self.config
        sweep = cfg["noise_sweep"]
        k_eval = sweep["k_eval"] or cfg["diffusion"]["K"]
        noise = core.noisemod.NoiseConfig(**{param: value})

        steps = cfg.run_forward(s0, core.rng.child(seed, "forward", scheme), scheme, noise=noise)
        corrupted = steps[k_eval].ensemble
        moments = [
            (scheme, param, value, trial, m, core.metrics.moment_distance(corrupted, m, s0))
            for m in cfg["metrics"]["moments"]
        ]

        if sweep["train"]:
            # the denoiser only ever sees the noisy chain
            stack = cfg.initial_stack(core.rng.stream(seed, "init", scheme))
            stack, _ = core.train.train_layerwise(steps, stack, cfg.train_config(), core.rng.child(seed, "train", scheme))
            output = core.denoiser.generate(stack, len(target), core.rng.child(seed, "generate", scheme)).ensemble
        else:
            output = corrupted

        d_wass = core.metrics.wasserstein1(output, target)[0]
        core.log("noise", f"trial {trial} {scheme} {param}={value}: D_wass {d_wass:.4f}")
        return (scheme, param, value, trial, d_wass), moments

    def sweep_trial(self, trial: int, seed, cells):
        ds = self.config["dataset"]
        s0 = self.config.dataset(ds["n_samples"], core.rng.stream(seed, "dataset"))
        target = self.config.dataset(ds["n_target"], core.rng.stream(seed, "target"))

        rows, moments = [], []
        for scheme, param, value in cells:
            row, cell_moments = self.cell(trial, seed, scheme, param, value, s0, target)
            rows.append(row)
            moments.extend(cell_moments)
        return rows, moments

    @core.module.command("noise_sweep")
    async def noise_sweep(self, args):
        """sweep p1 (RUCD) or p2 (CTED, RTED) and write noise_sweep.csv and noise_moments.csv"""
        try:
            sweep = self.config["noise_sweep"]
            cells = sweep_cells(sweep["schemes"], sweep["p1_grid"], sweep["p2_grid"])
            results = await self.manager.map_trials(self.sweep_trial, cells)

            rows = [row for trial_rows, _ in results for row in trial_rows]
            moments = [row for _, trial_moments in results for row in trial_moments]
            path = self.manager.write_csv("noise_sweep.csv", rows, SWEEP_COLUMNS, sort_by=("trial", "scheme", "value"))
            self.manager.write_csv("noise_moments.csv", moments, MOMENT_COLUMNS, sort_by=("trial", "scheme", "value", "m"))
            return self.result(f"{len(cells)} cells x {len(results)} trial(s), wrote {path}")
        except core.errors.ChaosDiffError as e:
            return self.failed("noise sweep", e)
