import core
import numpy as np
import pytest

from core import noisemod
from core.noisemod import NoiseConfig

def test_dephasing_composition_law(rng):
    for _ in range(10):
        gamma = rng.uniform(0.01, 5.0)
        dt = rng.uniform(0.001, 0.1)
        cfg = NoiseConfig.from_gamma(gamma, dt)
        for k in range(0, 101):
            assert cfg.cted_prob(k) == pytest.approx(noisemod.dephasing_prob(k * dt, gamma), abs=1e-13)

def test_dephasing_prob_edges():
    assert noisemod.dephasing_prob(0.0, 3.0) == 0.0
    assert noisemod.dephasing_prob(1e6, 1.0) == pytest.approx(0.5)
    with pytest.raises(core.errors.ChannelError):
        noisemod.dephasing_prob(-1.0, 1.0)

def test_noise_config_validation():
    with pytest.raises(core.errors.ConfigError):
        NoiseConfig(p1=0.6)
    with pytest.raises(core.errors.ConfigError) as e:
        NoiseConfig(p2=-0.1, gamma_phi=-1.0)
    assert len(e.value.problems) == 2
    assert NoiseConfig().noiseless
    assert not NoiseConfig(p2=0.1).noiseless
    assert NoiseConfig(p2=0.1).rted_prob() == 0.1

def _random_channel(rng, d, rank):
    """Kraus operators cut from a random isometry"""
    g = rng.normal(size=(d * rank, d)) + 1j * rng.normal(size=(d * rank, d))
    q, _ = np.linalg.qr(g)
    return [q[i * d:(i + 1) * d] for i in range(rank)]

def test_povm_matches_channel_then_measurement(rng):
    for _ in range(20):
        kraus = _random_channel(rng, 4, int(rng.integers(1, 4)))
        generator = core.qstate.haar_state(4, rng)
        povm = noisemod.povm_from_channel(kraus)
        assert [e.outcome for e in povm] == ["00", "01", "10", "11"]
        p_povm = noisemod.povm_probabilities(generator, (2, 3), povm)
        p_chan = noisemod.channel_probabilities(generator, (2, 3), kraus)
        np.testing.assert_allclose(p_povm, p_chan, atol=1e-12)
        assert p_povm.sum() == pytest.approx(1.0)

def test_povm_elements_sum_to_identity(rng):
    povm = noisemod.povm_from_channel(_random_channel(rng, 2, 2))
    np.testing.assert_allclose(sum(e.operator for e in povm), np.eye(2), atol=1e-12)

def test_povm_rejects_non_channels():
    with pytest.raises(core.errors.ChannelError):
        noisemod.povm_from_channel([np.eye(2) * 0.5])
    with pytest.raises(core.errors.ChannelError):
        noisemod.povm_from_channel([])

@pytest.mark.parametrize("pauli", ["X", "Y", "Z"])
def test_pauli_errors_only_relabel_outcomes(rng, pauli):
    for _ in range(20):
        generator = core.qstate.haar_state(3, rng)
        verdict = noisemod.pauli_relabel_check(generator, 2, pauli, (1, 2))
        assert verdict.holds
        assert verdict.relabeled == (pauli != "Z")

def test_relabel_check_arguments(haar_ket):
    with pytest.raises(core.errors.ChannelError):
        noisemod.pauli_relabel_check(haar_ket(2), 1, "H")
    with pytest.raises(core.errors.StateError):
        noisemod.pauli_relabel_check(haar_ket(3), 0, "X", (1, 2))

def test_inject_rucd_pauli_counts(rng):
    params = core.forward.draw_rucd_layer(5, 3, rng)
    gates = core.forward.rucd_layer_gates(params, 3)

    clean = noisemod.inject_rucd_pauli(gates, 0.0, rng)
    assert clean.gates == gates
    assert clean.errors == 0
    assert clean.locations == 9

    noisy = noisemod.inject_rucd_pauli(gates, 0.5, rng)
    assert noisy.locations == 9
    assert noisy.errors == len(noisy.injected)
    assert len(noisy.gates) == len(gates) + noisy.errors
    for position, name in noisy.injected:
        assert noisy.gates[position].name == name.lower()
        assert noisy.gates[position - 1].name in noisemod.NOISY_GATES
        assert noisy.gates[position].targets == noisy.gates[position - 1].targets

def test_inject_rejects_bad_probability():
    with pytest.raises(core.errors.ChannelError):
        noisemod.inject_rucd_pauli([], 0.7, 0)

def test_dephasing_flips_signs_only(haar_ket):
    state = haar_ket(3)
    out = noisemod.apply_dephasing(state, 0.5, 4)
    np.testing.assert_allclose(np.abs(out.amplitudes), np.abs(state.amplitudes))
    ratio = out.amplitudes / state.amplitudes
    np.testing.assert_allclose(np.abs(np.abs(ratio.real) - 1), 0, atol=1e-12)

    assert noisemod.dephase_vectors(state.amplitudes, 0.0, 0) is state.amplitudes
    with pytest.raises(core.errors.ChannelError):
        noisemod.apply_dephasing(state, 0.8, 0)

def _trace_norm(a):
    return float(np.sum(np.abs(np.linalg.eigvalsh(a))))

def _dephased(rho, p):
    z = core.circuit.Z
    return (1 - p) * rho + p * z @ rho @ z

@pytest.mark.parametrize("p", [0.1, 0.3, 0.5])
def test_dephasing_trajectories_average_to_the_channel(p):
    g = np.random.default_rng(int(p * 100))
    psi = core.qstate.haar_state(1, g).amplitudes if p < 0.5 else np.array([1, 1]) / np.sqrt(2)
    rho = np.outer(psi, psi.conj())

    shots = 100000
    batch = noisemod.dephase_vectors(np.repeat(psi[None, :], shots, axis=0), p, g)
    average = np.einsum("ja,jb->ab", batch, batch.conj()) / shots
    assert _trace_norm(average - _dephased(rho, p)) < 1e-2

def test_basis_states_are_fixed_by_dephasing():
    state = core.qstate.Ket.basis("101")
    out = noisemod.apply_dephasing(state, 0.5, 3)
    assert core.qstate.fidelity(out, state) == pytest.approx(1.0)

def test_injected_error_count_tracks_p1():
    g = np.random.default_rng(21)
    gates = core.forward.rucd_layer_gates(core.forward.draw_rucd_layer(4, 3, g), 3)
    p1 = 0.2
    trajectories = 10000
    errors = [noisemod.inject_rucd_pauli(gates, p1, g) for _ in range(trajectories)]
    n_1q = errors[0].locations
    mean = np.mean([e.errors for e in errors])
    sigma = np.sqrt(n_1q * p1 * (1 - p1) / trajectories)
    assert abs(mean - p1 * n_1q) < 4 * sigma

def _pauli_channel(u, rho, p):
    out = u @ rho @ u.conj().T
    paulis = (core.circuit.X, core.circuit.Y, core.circuit.Z)
    return (1 - p) * out + p / 3 * sum(s @ out @ s for s in paulis)

@pytest.mark.parametrize("name, seed", [("ry", 0), ("rz", 1), ("ry", 2)])
def test_pauli_trajectories_average_to_the_channel(name, seed):
    g = np.random.default_rng(seed)
    angle = g.uniform(-np.pi, np.pi)
    gate = getattr(core.circuit, name)(0, angle)
    psi = core.qstate.haar_state(1, g)
    rho = np.outer(psi.amplitudes, psi.amplitudes.conj())
    p1 = 0.5

    # every trajectory ends in one of four states, keyed by the injected Pauli
    outputs = {}
    average = np.zeros((2, 2), dtype=complex)
    trajectories = 100000
    for _ in range(trajectories):
        noisy = noisemod.inject_rucd_pauli([gate], p1, g)
        key = tuple(pauli for _, pauli in noisy.injected)
        if key not in outputs:
            v = core.circuit.apply(psi.amplitudes, noisy.gates, 1)
            outputs[key] = np.outer(v, v.conj())
        average += outputs[key]
    average /= trajectories

    assert _trace_norm(average - _pauli_channel(gate.matrix, rho, p1)) < 1e-2
