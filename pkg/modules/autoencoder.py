import core

COLUMNS = ("scheme", "space", "trial", "trash_loss", "roundtrip_fidelity", "D_wass")
CURVE_COLUMNS = ("scheme", "space", "k", "trial", "D_wass")

class Autoencoder(core.module.Module):
    """
    Latent diffusion: compress a dataset with a trained encoder, run the
    diffusion model on the latent qubits and decode the samples. Every scheme
    in forward.schemes is run in both spaces.
    """

    def diffusion_model(self, data, seed, scheme: str, space: str):
        """train a denoiser on data's own qubit count, return the generated backward chain"""
        cfg = self.config
        steps = cfg.run_forward(data, core.rng.child(seed, "forward", scheme, space), scheme=scheme)
        stack = cfg.initial_stack(core.rng.stream(seed, "init", scheme, space), n_m=data.n_qubits)
        stack, _ = core.train.train_layerwise(steps, stack, cfg.train_config(), core.rng.child(seed, "train", scheme, space))
        return core.denoiser.generate(stack, len(data), core.rng.child(seed, "generate", scheme, space))

    def qae_trial(self, trial: int, seed):
        cfg = self.config
        q = cfg["qae"]

        data = core.data.sample_compressible(q["n_total"], q["n_latent"], q["n_samples"], core.rng.stream(seed, "dataset"), q["reference_depth"])
        model = core.qae.QaeModel.initial(q["n_total"], q["n_latent"], q["depth"], core.rng.stream(seed, "qae_init"))
        model, curve = core.qae.train_qae(model, data.ensemble, q["epochs"], q["learning_rate"], core.rng.stream(seed, "qae"), q["batch_size"])

        trash = core.qae.trash_loss(model, data.ensemble)
        fidelity = core.qae.roundtrip_fidelity(model, data.ensemble)
        core.log("qae", f"trial {trial}: trash loss {trash:.6f}, round trip fidelity {fidelity:.6f}")
        latent_data = core.qae.encode_ensemble(model, data.ensemble)

        def d_wass(ensemble):
            return core.metrics.wasserstein1(ensemble, data.ensemble)[0]

        rows = []
        curves = []
        ensembles = {"data": data.ensemble}
        for scheme in cfg.forward_schemes():
            full = self.diffusion_model(data.ensemble, seed, scheme, "full")
            latent = self.diffusion_model(latent_data, seed, scheme, "latent")
            # backward chain k = K..0, latent steps decoded back to the full register
            for k, step in enumerate(full.steps):
                curves.append((scheme, "full", k, trial, d_wass(step)))
            for k, step in enumerate(latent.steps):
                curves.append((scheme, "latent", k, trial, d_wass(core.qae.decode_ensemble(model, step))))

            decoded = core.qae.decode_ensemble(model, latent.ensemble)
            ensembles[f"full_{scheme.lower()}"] = full.ensemble
            ensembles[f"latent_{scheme.lower()}"] = decoded
            rows.append((scheme, "full", trial, None, None, d_wass(full.ensemble)))
            rows.append((scheme, "latent", trial, trash, fidelity, d_wass(decoded)))

        core.data.save_bundle(self.manager.out_path(f"qae_trial{trial}.json"), {
            "config": cfg.data,
            "seeds": {"trial": trial, "entropy": str(seed.entropy), "spawn_key": list(seed.spawn_key)},
            "ensembles": ensembles,
            "qae": model,
            "extra": {"trash_curve": [float(c) for c in curve]},
        })
        return rows, curves

    @core.module.command("qae")
    async def qae(self, args):
        """train the autoencoder, compare latent against full-space diffusion per scheme and step"""
        try:
            results = await self.manager.map_trials(self.qae_trial)
            rows = [row for trial_rows, _ in results for row in trial_rows]
            curves = [row for _, trial_curves in results for row in trial_curves]
            path = self.manager.write_csv("qae.csv", rows, COLUMNS, sort_by=("trial", "scheme", "space"))
            self.manager.write_csv("qae_curves.csv", curves, CURVE_COLUMNS, sort_by=("trial", "scheme", "space", "k"))
            return self.result(f"wrote {path}")
        except core.errors.ChaosDiffError as e:
            return self.failed("autoencoder run", e)
