import core
import numpy as np
import pytest
from scipy import stats

from core.qstate import Ket, StateEnsemble

def test_ket_rejects_bad_vectors():
    with pytest.raises(core.errors.StateError):
        Ket(np.array([1.0, 1.0]))
    with pytest.raises(core.errors.StateError):
        Ket(np.array([1.0, 0.0, 0.0]))
    with pytest.raises(core.errors.StateError):
        Ket(np.array([1.0]))

def test_ket_is_read_only():
    ket = Ket.basis("01")
    with pytest.raises(ValueError):
        ket.amplitudes[0] = 1.0

def test_basis_and_msb_convention():
    ket = Ket.basis("01")
    assert ket.n_qubits == 2
    assert ket.amplitudes[1] == 1.0

    # X on qubit 0 flips the most significant bit
    flipped = core.qstate.apply_gate(Ket.zeros(2), core.circuit.X, (0,))
    np.testing.assert_allclose(flipped.amplitudes, Ket.basis("10").amplitudes)

def test_apply_gate_validation():
    state = Ket.zeros(2)
    with pytest.raises(core.errors.GateError):
        core.qstate.apply_gate(state, np.array([[1, 1], [0, 1]]), (0,))
    with pytest.raises(core.errors.GateError):
        core.qstate.apply_gate(state, core.circuit.CZ, (1, 1))
    with pytest.raises(core.errors.GateError):
        core.qstate.apply_gate(state, core.circuit.X, (2,))
    with pytest.raises(core.errors.GateError):
        core.qstate.apply_gate(state, core.circuit.CZ, (0,))

def test_two_qubit_gate_target_order():
    # control on qubit 1, target on qubit 0
    out = core.qstate.apply_gate(Ket.basis("01"), core.circuit.CNOT, (1, 0))
    np.testing.assert_allclose(out.amplitudes, Ket.basis("11").amplitudes)

def test_tensor_puts_first_factor_high():
    out = core.qstate.tensor(Ket.basis("1"), Ket.basis("0"))
    np.testing.assert_allclose(out.amplitudes, Ket.basis("10").amplitudes)

def test_batched_matrices_match_single_rows(rng):
    vectors = core.qstate.haar_vectors(3, 5, rng)
    thetas = rng.uniform(-np.pi, np.pi, 5)
    mats = core.circuit.rotation_batch(core.circuit.Y, thetas)
    batched = core.qstate.apply_matrix(vectors, mats, (1,), 3)
    for j in range(5):
        single = core.qstate.apply_matrix(vectors[j], mats[j], (1,), 3)
        np.testing.assert_allclose(batched[j], single, atol=1e-14)

def test_measure_bell_state():
    bell = Ket(np.array([1, 0, 0, 1]) / np.sqrt(2))
    record = core.qstate.measure_subset(bell, (0,), np.random.default_rng(0))
    assert record.probability == pytest.approx(0.5)
    expected = Ket.basis(record.outcome)
    assert core.qstate.fidelity(record.post_state, expected) == pytest.approx(1.0)

def test_collapse_uses_inverse_cdf():
    bell = np.array([[1, 0, 0, 1]], dtype=complex) / np.sqrt(2)
    low, _, _ = core.qstate.collapse(bell, (0,), 2, np.array([0.1]))
    high, _, _ = core.qstate.collapse(bell, (0,), 2, np.array([0.9]))
    assert low[0] == 0
    assert high[0] == 1

def test_measure_rejects_bad_subsets():
    state = Ket.zeros(2)
    with pytest.raises(core.errors.StateError):
        core.qstate.measure_subset(state, (0, 1), 0)
    with pytest.raises(core.errors.StateError):
        core.qstate.measure_subset(state, (), 0)
    with pytest.raises(core.errors.StateError):
        core.qstate.measure_subset(state, (5,), 0)

def test_enumerate_branches(haar_ket):
    state = haar_ket(3)
    branches = core.qstate.enumerate_branches(state, (1, 2))
    assert sum(b.probability for b in branches) == pytest.approx(1.0)
    assert [b.outcome for b in branches] == ["00", "01", "10", "11"]
    for b in branches:
        assert b.post_state.n_qubits == 1

def test_enumerate_branches_drops_zero_probability():
    # |0> (x) |0>: measuring qubit 1 can only give 0
    branches = core.qstate.enumerate_branches(Ket.zeros(2), (1,))
    assert len(branches) == 1
    assert branches[0].outcome == "0"

def test_haar_product_states_are_products(rng):
    vectors = core.qstate.haar_product_vectors(2, 20, rng)
    np.testing.assert_allclose(np.linalg.norm(vectors, axis=1), 1.0)
    for v in vectors:
        s = np.linalg.svd(v.reshape(2, 2), compute_uv=False)
        assert s[1] < 1e-12

def test_fidelity(haar_ket):
    a = haar_ket(2)
    b = haar_ket(2)
    assert core.qstate.fidelity(a, a) == pytest.approx(1.0)
    assert core.qstate.fidelity(a, b) == pytest.approx(core.qstate.fidelity(b, a))
    with pytest.raises(core.errors.DimensionError):
        core.qstate.fidelity(a, haar_ket(1))

def test_ensemble_validation():
    vectors = np.eye(2, dtype=complex)
    with pytest.raises(core.errors.StateError):
        StateEnsemble(vectors, [0.7, 0.7])
    with pytest.raises(core.errors.StateError):
        StateEnsemble(vectors, [1.0])
    with pytest.raises(core.errors.StateError):
        StateEnsemble(np.zeros((0, 2)), [])

    ens = StateEnsemble(vectors, [0.25, 0.75])
    assert len(ens) == 2
    assert not ens.is_uniform()
    assert ens.uniform().is_uniform()
    assert ens[1].amplitudes[1] == 1.0

def test_ensemble_from_kets_needs_matching_sizes():
    with pytest.raises(core.errors.DimensionError):
        StateEnsemble.from_kets([Ket.zeros(1), Ket.zeros(2)])

def test_gram_matrix(haar_ensemble):
    x = haar_ensemble(2, 4)
    g = core.qstate.gram_matrix(x, x)
    np.testing.assert_allclose(np.diag(g), 1.0)
    np.testing.assert_allclose(g, g.T, atol=1e-15)

def _embed(gate, targets, n):
    """dense 2**n matrix of a gate on `targets`, built entry by entry"""
    d = 2 ** n
    bits = lambda i: [(i >> (n - 1 - q)) & 1 for q in range(n)]
    local = lambda b: sum(b[t] << (len(targets) - 1 - a) for a, t in enumerate(targets))
    full = np.zeros((d, d), dtype=complex)
    for i in range(d):
        bi = bits(i)
        for j in range(d):
            bj = bits(j)
            if all(bi[q] == bj[q] for q in range(n) if q not in targets):
                full[i, j] = gate[local(bi), local(bj)]
    return full

def test_embedding_helper_matches_kron():
    u = core.circuit.rotation(core.circuit.Y, 0.3)
    np.testing.assert_allclose(_embed(u, (1,), 3), np.kron(np.kron(np.eye(2), u), np.eye(2)))
    np.testing.assert_allclose(_embed(core.circuit.CZ, (0, 1), 2), core.circuit.CZ)

@pytest.mark.parametrize("targets", [(0, 1), (1, 2), (2, 0), (0, 2)])
def test_apply_gate_matches_dense_embedding(rng, haar_ket, targets):
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    state = haar_ket(3)
    out = core.qstate.apply_gate(state, q, targets)
    np.testing.assert_allclose(out.amplitudes, _embed(q, targets, 3) @ state.amplitudes, atol=1e-12)

def test_measurement_histogram_follows_born_rule(haar_ket):
    state = haar_ket(3)
    exact = np.sum(np.abs(state.amplitudes.reshape(2, 4)) ** 2, axis=0)

    draws = 20000
    g = np.random.default_rng(5)
    counts = np.zeros(4)
    for _ in range(draws):
        counts[int(core.qstate.measure_subset(state, (1, 2), g).outcome, 2)] += 1

    assert stats.chisquare(counts, exact * draws).pvalue > 0.001

def test_branches_match_sampled_frequencies(haar_ket):
    state = haar_ket(4)
    branches = core.qstate.enumerate_branches(state, (0, 3))
    u = np.random.default_rng(8).random(20000)
    outcomes, _, _ = core.qstate.collapse(np.repeat(state.amplitudes[None, :], len(u), axis=0), (0, 3), 4, u)
    frequencies = np.bincount(outcomes, minlength=4) / len(u)
    for b in branches:
        p = b.probability
        assert abs(frequencies[int(b.outcome, 2)] - p) < 4 * np.sqrt(p * (1 - p) / len(u)) + 1e-12

def test_measurement_is_seeded(haar_ket):
    state = haar_ket(3)
    a = core.qstate.measure_subset(state, (2,), 42)
    b = core.qstate.measure_subset(state, (2,), 42)
    assert a.outcome == b.outcome
    assert a.probability == b.probability
    np.testing.assert_array_equal(a.post_state.amplitudes, b.post_state.amplitudes)

@pytest.mark.parametrize("measured", [(2,), (1, 2)])
def test_branches_reconstruct_the_state(haar_ket, measured):
    state = haar_ket(3)
    rebuilt = np.zeros(8, dtype=complex)
    for b in core.qstate.enumerate_branches(state, measured):
        z = Ket.basis(b.outcome).amplitudes
        rebuilt += np.sqrt(b.probability) * np.kron(b.post_state.amplitudes, z)
    rho = np.outer(state.amplitudes, state.amplitudes.conj())
    np.testing.assert_allclose(np.outer(rebuilt, rebuilt.conj()), rho, atol=1e-10)

def test_single_qubit_haar_moments():
    vectors = core.qstate.haar_product_vectors(1, 100000, np.random.default_rng(17))
    p0 = np.abs(vectors[:, 0]) ** 2
    assert p0.mean() == pytest.approx(0.5, abs=0.005)
    assert (p0 ** 2).mean() == pytest.approx(1 / 3, abs=0.01)

def test_haar_product_state_is_normalized(rng):
    assert np.linalg.norm(core.qstate.haar_product_state(3, rng).amplitudes) == pytest.approx(1.0, abs=1e-12)

def test_gram_matrix_matches_fidelity_loop(haar_ensemble):
    x = haar_ensemble(2, 5)
    y = haar_ensemble(2, 4)
    g = core.qstate.gram_matrix(x, y)
    loop = [[core.qstate.fidelity(x[i], y[j]) for j in range(4)] for i in range(5)]
    np.testing.assert_allclose(g, loop, atol=1e-12)
