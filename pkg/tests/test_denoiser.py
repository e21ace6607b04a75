import core
import numpy as np
import pytest

from core import denoiser
from core.denoiser import DenoiserStack

def test_parameter_count():
    assert denoiser.n_params(3, 2) == 12
    stack = DenoiserStack.initial(4, 2, 1, 3, 0)
    assert stack.thetas.shape == (4, 18)
    assert stack.n == 3
    assert np.all(np.abs(stack.thetas) <= np.pi)

def test_stack_shape_is_checked():
    with pytest.raises(core.errors.ConfigError):
        DenoiserStack(2, 2, 1, 1, np.zeros((2, 5)))
    with pytest.raises(core.errors.ConfigError):
        DenoiserStack(0, 2, 1, 1, np.zeros((0, 6)))

def test_with_theta_copies():
    stack = DenoiserStack.initial(3, 1, 1, 1, 0)
    before = stack.thetas.copy()
    other = stack.with_theta(2, np.zeros(4))
    np.testing.assert_array_equal(stack.thetas, before)
    np.testing.assert_array_equal(other.theta(2), np.zeros(4))
    np.testing.assert_array_equal(other.theta(1), before[0])

def test_ansatz_layout():
    theta = np.arange(12, dtype=float)
    gates = denoiser.build_ansatz_unitary(theta, 3, 2)
    assert len(gates) == 2 * (3 + 3 + 2)
    first = gates[:8]
    assert [g.name for g in first] == ["rx"] * 3 + ["ry"] * 3 + ["cz", "cz"]
    assert [g.param for g in first[:6]] == [0, 1, 2, 3, 4, 5]
    assert [g.targets for g in first[6:]] == [(0, 1), (1, 2)]
    assert gates[8].param == 6
    with pytest.raises(core.errors.GateError):
        denoiser.build_ansatz_unitary(theta[:-1], 3, 2)

def test_ansatz_is_unitary(rng):
    gates = denoiser.build_ansatz_unitary(rng.uniform(-3, 3, 16), 4, 2)
    assert core.qstate.is_unitary(core.circuit.unitary(gates, 4))

def test_zero_angles_leave_zero_state_alone():
    out = core.circuit.apply(core.qstate.Ket.zeros(3).amplitudes, denoiser.build_ansatz_unitary(np.zeros(12), 3, 2), 3)
    np.testing.assert_allclose(out, core.qstate.Ket.zeros(3).amplitudes)

def test_ancilla_attachment():
    psi = np.array([[0.6, 0.8]], dtype=complex)
    joint = denoiser.with_ancilla(psi, 2)
    np.testing.assert_allclose(joint[0], np.kron(psi[0], [1, 0, 0, 0]))
    assert denoiser.ancilla_qubits(1, 2) == (1, 2)

def test_denoise_step_without_ancilla_is_unitary(haar_ket, rng):
    state = haar_ket(2)
    theta = rng.uniform(-3, 3, 8)
    record = denoiser.denoise_step(state, theta, 0, rng, k=3)
    expected = core.circuit.run(state, denoiser.build_ansatz_unitary(theta, 2, 2))
    assert record.k == 3
    assert record.outcome == ""
    assert record.born_prob == 1.0
    assert core.qstate.fidelity(record.state, expected) == pytest.approx(1.0)

def test_denoise_step_measures_ancillas(haar_ket, rng):
    state = haar_ket(2)
    theta = rng.uniform(-3, 3, 12)
    record = denoiser.denoise_step(state, theta, 1, rng)
    branches = denoiser.step_branches(state, theta, 1)
    assert sum(b.probability for b in branches) == pytest.approx(1.0)
    match = [b for b in branches if b.outcome == record.outcome][0]
    assert record.born_prob == pytest.approx(match.probability)
    assert core.qstate.fidelity(record.state, match.post_state) == pytest.approx(1.0)

def test_generate():
    stack = DenoiserStack.initial(3, 2, 1, 2, 5)
    out = denoiser.generate(stack, 16, 9)
    assert len(out.steps) == 4
    assert len(out.ensemble) == 16
    assert out.ensemble is out.steps[0]
    assert out.records[0] == []
    for k in (1, 2, 3):
        assert len(out.records[k]) == 16
        assert all(r.k == k for r in out.records[k])
        assert all(len(r.outcome) == 1 for r in out.records[k])

    # the starting ensemble is made of product states
    for v in out.steps[3].vectors:
        assert np.linalg.svd(v.reshape(2, 2), compute_uv=False)[1] < 1e-12

    again = denoiser.generate(stack, 16, 9)
    np.testing.assert_array_equal(out.ensemble.vectors, again.ensemble.vectors)

def test_generate_needs_samples():
    with pytest.raises(core.errors.ConfigError):
        denoiser.generate(DenoiserStack.initial(1, 1, 1, 1, 0), 0, 0)

def test_propagate_matches_generate():
    stack = DenoiserStack.initial(2, 1, 1, 1, 3)
    vectors = core.qstate.haar_product_vectors(1, 5, 0)
    out = denoiser.propagate(stack, vectors, [2, 1], np.random.default_rng(0))
    assert out.shape == (5, 2)
    np.testing.assert_allclose(np.linalg.norm(out, axis=1), 1.0)

def _on_each(mats):
    out = np.eye(1)
    for m in mats:
        out = np.kron(out, m)
    return out

def _cz_diag(a, b, n):
    idx = np.arange(2 ** n)
    both = ((idx >> (n - 1 - a)) & 1) & ((idx >> (n - 1 - b)) & 1)
    return np.diag(np.where(both, -1.0, 1.0))

def test_ansatz_matches_dense_product(rng):
    n, L = 3, 2
    theta = rng.uniform(-np.pi, np.pi, denoiser.n_params(n, L))
    rot = lambda p, t: np.cos(t / 2) * np.eye(2) - 1j * np.sin(t / 2) * p

    expected = np.eye(2 ** n)
    for l in range(L):
        base = 2 * n * l
        rx = _on_each([rot(core.circuit.X, theta[base + q]) for q in range(n)])
        ry = _on_each([rot(core.circuit.Y, theta[base + n + q]) for q in range(n)])
        expected = _cz_diag(1, 2, n) @ _cz_diag(0, 1, n) @ ry @ rx @ expected

    gates = denoiser.build_ansatz_unitary(theta, n, L)
    psi = core.qstate.haar_vectors(n, 4, rng)
    np.testing.assert_allclose(core.circuit.apply(psi, gates, n), psi @ expected.T, atol=1e-12)
