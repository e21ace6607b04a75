import core

COLUMNS = ("metric_name", "m", "value")

class Evaluation(core.module.Module):
    """Compare two stored ensembles"""

    def _ensemble(self, bundle_key: str, ensemble_key: str):
        section = self.config["evaluate"]
        bundle = core.data.load_bundle(core.resolve_path(section[bundle_key]))
        name = section[ensemble_key]
        if name not in bundle["ensembles"]:
            known = ", ".join(bundle["ensembles"]) or "none"
            raise core.errors.BundleError(f"bundle {bundle['run_id']} has no ensemble {name!r} (has: {known})")
        return bundle["ensembles"][name]

    def compare(self, a, b):
        if a.n_qubits != b.n_qubits:
            raise core.errors.DimensionError(f"can't compare a {a.n_qubits} qubit ensemble with a {b.n_qubits} qubit one")
        metrics = self.config["metrics"]
        haar = self.config.haar_reference(a.n_qubits, core.rng.stream(self.config.seed, "haar"))
        return core.metrics.distance_table(a, b, haar, metrics["distances"], metrics["moments"])

    @core.module.command("evaluate")
    async def evaluate(self, args):
        """distances and moment errors between two bundled ensembles, written to evaluate.csv"""
        try:
            a = self._ensemble("bundle_a", "ensemble_a")
            b = self._ensemble("bundle_b", "ensemble_b")
            rows = self.compare(a, b)
            path = self.manager.write_csv("evaluate.csv", rows, COLUMNS, sort_by=("metric_name", "m"))
            return self.result(f"wrote {path}")
        except core.errors.ChaosDiffError as e:
            return self.failed("evaluation", e)
