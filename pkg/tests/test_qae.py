import core
import numpy as np
import pytest

from core import qae
from core.qae import QaeModel

@pytest.fixture
def compressible():
    return core.data.sample_compressible(3, 2, 12, 5)

def test_reference_encoder_compresses_perfectly(compressible):
    data = compressible
    assert qae.trash_loss(data.reference, data.ensemble) == pytest.approx(0.0, abs=1e-12)
    assert qae.roundtrip_fidelity(data.reference, data.ensemble) == pytest.approx(1.0, abs=1e-12)
    latents = qae.encode_ensemble(data.reference, data.ensemble)
    np.testing.assert_allclose(latents.vectors, data.latents.vectors, atol=1e-12)

def test_encode_decode_single_states(compressible):
    data = compressible
    ket = core.qstate.Ket(data.ensemble.vectors[0])
    latent = qae.encode(data.reference, ket)
    assert latent.n_qubits == 2
    assert core.qstate.fidelity(qae.decode(data.reference, latent), ket) == pytest.approx(1.0)

def test_trash_gradient_matches_finite_difference(rng, compressible):
    model = QaeModel.initial(3, 2, 2, rng)
    _, grad = qae.trash_loss_and_gradient(model, compressible.ensemble)
    eps = 1e-6
    fd = np.zeros_like(model.params)
    for i in range(len(fd)):
        up = model.params.copy()
        down = model.params.copy()
        up[i] += eps
        down[i] -= eps
        fd[i] = (qae.trash_loss(model.with_params(up), compressible.ensemble) - qae.trash_loss(model.with_params(down), compressible.ensemble)) / (2 * eps)
    np.testing.assert_allclose(grad, fd, rtol=1e-5, atol=1e-8)

def test_training_lowers_the_trash_loss(compressible):
    model = QaeModel.initial(3, 2, 2, 1)
    trained, curve = qae.train_qae(model, compressible.ensemble, epochs=50, lr=0.05, rng=0)
    assert len(curve) == 50
    assert qae.trash_loss(trained, compressible.ensemble) < qae.trash_loss(model, compressible.ensemble)

def test_minibatch_training_is_reproducible(compressible):
    model = QaeModel.initial(3, 2, 1, 1)
    a, _ = qae.train_qae(model, compressible.ensemble, epochs=5, lr=0.05, rng=3, batch_size=4)
    b, _ = qae.train_qae(model, compressible.ensemble, epochs=5, lr=0.05, rng=3, batch_size=4)
    np.testing.assert_array_equal(a.params, b.params)

def test_incompressible_state_is_reported():
    model = QaeModel(2, 1, 0, [])
    with pytest.raises(core.errors.NotCompressibleError):
        qae.encode(model, core.qstate.Ket.basis("01"))
    assert qae.encode(model, core.qstate.Ket.basis("10")).n_qubits == 1

def test_dimension_checks(haar_ket):
    model = QaeModel.initial(3, 1, 1)
    with pytest.raises(core.errors.DimensionError):
        qae.decode(model, haar_ket(2))
    with pytest.raises(core.errors.DimensionError):
        qae.encode(model, haar_ket(2))

def test_model_validation():
    with pytest.raises(core.errors.ConfigError):
        QaeModel(2, 2, 1, np.zeros(2))
    with pytest.raises(core.errors.ConfigError):
        QaeModel(3, 1, 2, np.zeros(5))

def test_model_round_trips_through_a_dict():
    model = QaeModel.initial(4, 2, 3, 7)
    back = QaeModel.from_dict(model.to_dict())
    assert (back.n_total, back.n_latent, back.depth) == (4, 2, 3)
    np.testing.assert_array_equal(back.params, model.params)

def test_encoder_layout():
    gates = qae.encoder_circuit(QaeModel.initial(3, 1, 2))
    assert len(gates) == 2 * (3 + 3)
    assert [g.name for g in gates[:6]] == ["ry"] * 3 + ["cnot"] * 3
    assert [g.targets for g in gates[3:6]] == [(0, 1), (1, 2), (2, 0)]
    assert gates[6].param == 3

def test_encoder_matches_dense_product(rng):
    model = QaeModel.initial(3, 1, depth=2, rng=rng)
    idx = np.arange(8)
    bit = lambda q: (idx >> (2 - q)) & 1

    def cnot(c, t):
        perm = np.zeros((8, 8))
        perm[idx ^ (bit(c) << (2 - t)), idx] = 1
        return perm

    expected = np.eye(8)
    for l in range(2):
        ry = np.eye(1)
        for q in range(3):
            t = model.params[3 * l + q]
            ry = np.kron(ry, np.array([[np.cos(t / 2), -np.sin(t / 2)], [np.sin(t / 2), np.cos(t / 2)]]))
        expected = cnot(2, 0) @ cnot(1, 2) @ cnot(0, 1) @ ry @ expected

    psi = core.qstate.haar_vectors(3, 4, rng)
    np.testing.assert_allclose(core.circuit.apply(psi, qae.encoder_circuit(model), 3), psi @ expected.T, atol=1e-12)
