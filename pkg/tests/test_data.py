import os
import json
import core
import numpy as np
import pytest

from core import data
from core.data import ClusterSpec, CircularSpec

def test_clusters_without_spread_sit_on_their_centers():
    spec = ClusterSpec(3, sigma=0.0)
    ens, labels = data.sample_multicluster_labeled(spec, 4000, 0)
    np.testing.assert_allclose(ens.vectors, spec.centers()[labels], atol=1e-15)
    fractions = np.bincount(labels, minlength=3) / len(labels)
    np.testing.assert_allclose(fractions, spec.weights, atol=0.03)

def test_clusters_with_spread_stay_close(rng):
    spec = ClusterSpec(2, sigma=0.05)
    ens, labels = data.sample_multicluster_labeled(spec, 200, rng)
    fids = np.abs(np.sum(ens.vectors.conj() * spec.centers()[labels], axis=1)) ** 2
    assert np.all(fids > 0.9)
    np.testing.assert_allclose(np.linalg.norm(ens.vectors, axis=1), 1.0)

def test_cluster_spec_validation():
    with pytest.raises(core.errors.ConfigError):
        ClusterSpec(2, weights=(0.5, 0.5, 0.5))
    with pytest.raises(core.errors.ConfigError) as e:
        ClusterSpec(0, sigma=-1.0)
    assert len(e.value.problems) == 2

def test_circular_states():
    vecs = data.circular_vectors(2, [0.0, np.pi])
    np.testing.assert_allclose(vecs[0], [1, 0, 0, 0])
    np.testing.assert_allclose(vecs[1], [0, 0, 0, 1], atol=1e-15)

    ens = data.sample_circular(CircularSpec(3), 50, 1)
    assert np.all(ens.vectors[:, 1:-1] == 0)
    np.testing.assert_allclose(np.abs(ens.vectors[:, 0]) ** 2 + np.abs(ens.vectors[:, -1]) ** 2, 1.0)

def test_haar_product_states_have_no_entanglement():
    ens = data.sample_haar_product(2, 20, 3)
    for v in ens.vectors:
        assert np.linalg.svd(v.reshape(2, 2), compute_uv=False)[1] < 1e-12

def test_dataset_dispatch():
    assert data.sample_dataset("cluster", 2, 5, 0).n_qubits == 2
    assert len(data.sample_dataset("circular", 1, 7, 0)) == 7
    with pytest.raises(core.errors.ConfigError):
        data.sample_dataset("mnist", 2, 5, 0)
    with pytest.raises(core.errors.ConfigError):
        data.sample_haar(2, 0, 0)

def test_bundle_round_trip(tmp_path, haar_ensemble):
    ens = haar_ensemble(2, 5)
    stack = core.denoiser.DenoiserStack.initial(2, 2, 1, 1, 0)
    report = core.train.TrainReport(losses={1: [0.3]}, wall_clock={1: 0.5, "total": 0.5})
    path = str(tmp_path / "run.json")

    run_id = data.save_bundle(path, {
        "config": {"seed": 3}, "seeds": {"root": 3},
        "ensembles": {"data": ens}, "stack": stack, "report": report,
        "extra": {"note": "x"},
    })
    assert len(run_id) == 26

    back = data.load_bundle(path)
    assert back["run_id"] == run_id
    assert back["schema"] == data.SCHEMA
    assert back["config"] == {"seed": 3}
    assert back["extra"] == {"note": "x"}
    np.testing.assert_array_equal(back["ensembles"]["data"].vectors, ens.vectors)
    np.testing.assert_array_equal(back["stack"].thetas, stack.thetas)
    assert back["report"].losses == {1: [0.3]}
    assert back["qae"] is None

def test_bundle_keeps_the_qae_model(tmp_path):
    model = core.qae.QaeModel.initial(3, 1, 2, 0)
    path = str(tmp_path / "qae")
    data.save_bundle(path, {"qae": model})
    assert os.path.exists(path + ".json")
    np.testing.assert_array_equal(data.load_bundle(path)["qae"].params, model.params)

def test_empty_ensembles_are_refused(tmp_path):
    with pytest.raises(core.errors.BundleError):
        data.save_bundle(str(tmp_path / "x.json"), {"ensembles": {"data": None}})

def _write(path, doc):
    with open(path, "w") as f:
        f.write(doc if isinstance(doc, str) else json.dumps(doc))
    return str(path)

def _ensemble_doc(amplitudes):
    return {"n_qubits": 1, "weights": [1.0] * len(amplitudes), "amplitudes": amplitudes}

def test_load_errors(tmp_path):
    with pytest.raises(core.errors.BundleError):
        data.load_bundle(str(tmp_path / "missing.json"))

    with pytest.raises(core.errors.BundleError):
        data.load_bundle(_write(tmp_path / "schema.json", {"schema": "2.0"}))

    with pytest.raises(core.errors.BundleError):
        data.load_bundle(_write(tmp_path / "corrupt.json", "{not json"))

    bad_norm = {"schema": "1.0", "ensembles": {"data": _ensemble_doc([[[1.0, 0.0], [1.0, 0.0]]])}}
    with pytest.raises(core.errors.BundleError) as e:
        data.load_bundle(_write(tmp_path / "norm.json", bad_norm))
    assert "norm" in str(e.value)

    wrong_shape = {"schema": "1.0", "ensembles": {"data": _ensemble_doc([[[1.0, 0.0]]])}}
    with pytest.raises(core.errors.BundleError):
        data.load_bundle(_write(tmp_path / "shape.json", wrong_shape))

    bad_stack = {"schema": "1.0", "stack": {"K": 1, "n_m": 1, "n_a": 0, "L": 1, "thetas": [[0.0]]}}
    with pytest.raises(core.errors.BundleError):
        data.load_bundle(_write(tmp_path / "stack.json", bad_stack))

def test_minor_schema_versions_load(tmp_path):
    doc = {"schema": "1.3", "ensembles": {"data": _ensemble_doc([[[0.0, 0.0], [0.0, 1.0]]])}}
    back = data.load_bundle(_write(tmp_path / "minor.json", doc))
    np.testing.assert_allclose(back["ensembles"]["data"].vectors, [[0, 1j]])
