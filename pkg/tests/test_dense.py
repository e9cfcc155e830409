"""Tests for the dense density-matrix engine."""

import numpy as np
import pytest

from rcslab.circuits.architecture import build_architecture
from rcslab.circuits.realization import CircuitRealization, GateOp
from rcslab.core.errors import CorruptedStateError, ResourceLimitError, ValidationError
from rcslab.core.models import HeraldedDephasingSpec, PauliChannel
from rcslab.engines.dense import (
    PAULI_I,
    PAULI_X,
    DensityState,
    OutputDistribution,
    apply_pauli_channel,
    check_qubit_cap,
    collision_probability,
    global_haar_distribution,
    iterate_single_qubit_channel,
    marginal_zero_probabilities,
    marginal_zero_probability,
    output_distribution,
    pauli_kraus_operators,
    sample_haar_circuit,
    sample_haar_two_qubit,
    sample_haar_unitary,
    simulate_noisy_circuit,
    single_qubit_channel_power,
    tvd_to_uniform,
)


def fixed_gate_circuit(arch, unitary, noise=None):
    gates = tuple(
        tuple(GateOp(sites=pair, unitary=unitary) for pair in layer) for layer in arch.layers
    )
    return CircuitRealization(arch, gates, noise=noise)


def run(circuit):
    return output_distribution(simulate_noisy_circuit(circuit))


class TestHaarSampling:
    """Tests for Haar unitary and circuit sampling."""

    @pytest.mark.parametrize("dim", [2, 4, 16])
    def test_unitary(self, dim):
        u = sample_haar_unitary(dim, 3)
        assert np.allclose(u.conj().T @ u, np.eye(dim), atol=1e-12)

    def test_seeded(self):
        assert np.array_equal(sample_haar_unitary(4, 8), sample_haar_unitary(4, 8))

    def test_two_qubit_gate(self):
        u = sample_haar_two_qubit(5)
        assert u.shape == (4, 4)
        assert np.array_equal(u, sample_haar_unitary(4, 5))

    def test_circuit_reproducible(self, brickwork4):
        first = sample_haar_circuit(brickwork4, 42)
        second = sample_haar_circuit(brickwork4, 42)
        for ops_a, ops_b in zip(first.gates, second.gates, strict=True):
            for a, b in zip(ops_a, ops_b, strict=True):
                assert np.array_equal(a.unitary, b.unitary)

    def test_readout_layer_only_for_dephasing(self, brickwork4):
        """Test the readout layer appears for heralded dephasing at d >= 1."""
        spec = HeraldedDephasingSpec(0.5, 0.2)
        assert len(sample_haar_circuit(brickwork4, 1, spec).readout) == 4
        assert sample_haar_circuit(brickwork4, 1, spec, readout_layer=False).readout is None
        assert sample_haar_circuit(build_architecture(4, 0), 1, spec).readout is None
        assert sample_haar_circuit(brickwork4, 1, PauliChannel.dephasing(0.2)).readout is None

    def test_leading_layer(self, brickwork4):
        circuit = sample_haar_circuit(brickwork4, 1, leading_layer=True)
        assert len(circuit.leading) == 4


class TestSimulation:
    """Tests for simulate_noisy_circuit."""

    def test_depth_zero_is_point_mass(self):
        """Test d = 0 leaves |0^n> with TVD 1 - 2^-n."""
        dist = run(sample_haar_circuit(build_architecture(4, 0), 1))
        assert dist.probs[0] == pytest.approx(1.0)
        assert tvd_to_uniform(dist) == pytest.approx(1 - 2**-4, abs=1e-12)
        assert collision_probability(dist) == pytest.approx(1.0)

    def test_gate_local_qubit_order(self):
        """Test local qubit 0 of a gate acts on sites[0]."""
        arch = build_architecture(2, 1)
        x_on_first = np.kron(PAULI_X, PAULI_I)
        forward = CircuitRealization(arch, ((GateOp((0, 1), unitary=x_on_first),),))
        backward = CircuitRealization(arch, ((GateOp((1, 0), unitary=x_on_first),),))
        assert run(forward).probs[1] == pytest.approx(1.0)
        assert run(backward).probs[2] == pytest.approx(1.0)

    def test_channel_power_matches_kraus(self):
        """Test d rounds of a channel on identity gates give the closed-form p0."""
        channel = PauliChannel(0.1, 0.05, 0.2)
        circuit = fixed_gate_circuit(build_architecture(2, 3), np.eye(4, dtype=complex), channel)
        dist = run(circuit)
        expected = single_qubit_channel_power(channel, 3)
        kraus = float(np.real(iterate_single_qubit_channel(channel, 3)[0, 0]))
        assert marginal_zero_probability(dist, 0) == pytest.approx(expected, abs=1e-12)
        assert kraus == pytest.approx(expected, abs=1e-12)

    def test_full_depolarizing_gives_uniform(self, brickwork4):
        circuit = sample_haar_circuit(brickwork4, 5, PauliChannel.full_depolarizing())
        dist = run(circuit)
        assert np.allclose(dist.probs, 1 / 16, atol=1e-12)
        assert tvd_to_uniform(dist) == pytest.approx(0.0, abs=1e-12)

    def test_noisy_output_is_normalized(self, brickwork4):
        spec = HeraldedDephasingSpec(0.5, 0.3)
        state = simulate_noisy_circuit(sample_haar_circuit(brickwork4, 9, spec))
        assert np.trace(state.matrix).real == pytest.approx(1.0, abs=1e-10)
        dist = output_distribution(state)
        assert 2**-4 - 1e-12 <= collision_probability(dist) <= 1.0

    def test_noise_brings_output_closer_to_uniform(self, brickwork4):
        """Test depolarizing noise lowers collision probability on the same gates."""
        circuit = sample_haar_circuit(brickwork4, 13)
        clean = collision_probability(run(circuit))
        noisy = collision_probability(run(circuit.with_noise(PauliChannel.depolarizing(0.3))))
        assert noisy < clean

    def test_non_unitary_gate(self):
        arch = build_architecture(2, 1)
        circuit = fixed_gate_circuit(arch, 1.5 * np.eye(4, dtype=complex))
        with pytest.raises(ValidationError):
            simulate_noisy_circuit(circuit)

    def test_qubit_cap(self):
        with pytest.raises(ResourceLimitError):
            simulate_noisy_circuit(sample_haar_circuit(build_architecture(12, 0), 1))

    def test_initial_state_size(self, brickwork4):
        with pytest.raises(ValidationError):
            simulate_noisy_circuit(sample_haar_circuit(brickwork4, 1), DensityState.zero(2))


class TestQubitCap:
    """Tests for check_qubit_cap."""

    def test_default_cap(self):
        check_qubit_cap(10)
        with pytest.raises(ResourceLimitError):
            check_qubit_cap(11)

    def test_large_cap_needs_flag(self):
        with pytest.raises(ResourceLimitError):
            check_qubit_cap(11, cap=12)
        check_qubit_cap(12, cap=12, allow_large=True)

    def test_hard_cap(self):
        with pytest.raises(ResourceLimitError):
            check_qubit_cap(13, cap=14, allow_large=True)


class TestPauliChannelApplication:
    """Tests for apply_pauli_channel."""

    def test_matches_kraus_sum(self, rng):
        """Test the closed form against explicit Kraus operators on site 1 of 2."""
        psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        psi /= np.linalg.norm(psi)
        rho = np.outer(psi, psi.conj())
        channel = PauliChannel(0.07, 0.11, 0.19)

        out = apply_pauli_channel(rho.reshape((2,) * 4), 2, 1, channel).reshape(4, 4)
        expected = sum(
            np.kron(k, PAULI_I) @ rho @ np.kron(k, PAULI_I).conj().T
            for k in pauli_kraus_operators(channel)
        )
        assert np.allclose(out, expected, atol=1e-12)


class TestDistributions:
    """Tests for output distributions and their statistics."""

    def test_marginals(self):
        dist = OutputDistribution.point_mass(2, 1)
        assert marginal_zero_probability(dist, 0) == 0.0
        assert marginal_zero_probability(dist, 1) == 1.0
        assert np.array_equal(marginal_zero_probabilities(dist), [0.0, 1.0])

    def test_marginal_site_range(self):
        with pytest.raises(ValidationError):
            marginal_zero_probability(OutputDistribution.uniform(2), 2)

    def test_uniform_statistics(self):
        dist = OutputDistribution.uniform(3)
        assert tvd_to_uniform(dist) == 0.0
        assert collision_probability(dist) == pytest.approx(1 / 8)

    def test_rejects_unnormalized(self):
        with pytest.raises(ValidationError):
            OutputDistribution(1, np.array([0.5, 0.4]))

    def test_global_haar_normalized(self):
        dist = global_haar_distribution(4, 2)
        assert dist.probs.sum() == pytest.approx(1.0)
        assert dist.probs.min() >= 0.0

    def test_corrupted_state(self):
        matrix = np.array([[1.0, 0.5], [0.0, 0.0]], dtype=complex)
        with pytest.raises(CorruptedStateError):
            DensityState(1, matrix).validate()
        with pytest.raises(CorruptedStateError):
            DensityState(1, np.diag([1.5, -0.5]).astype(complex)).validate()

    def test_maximally_mixed_is_valid(self):
        DensityState.maximally_mixed(3).validate()

    def test_channel_power_negative_depth(self):
        with pytest.raises(ValidationError):
            single_qubit_channel_power(PauliChannel.dephasing(0.1), -1)

    def test_output_distribution_rejects_trace_drift(self):
        """Test a diagonal summing to 1 + 1e-9 is rejected, not renormalized."""
        drifted = np.diag([0.5 + 5e-10, 0.5 + 5e-10]).astype(complex)
        with pytest.raises(CorruptedStateError):
            output_distribution(DensityState(1, drifted))

    def test_output_distribution_rejects_negative_probability(self):
        matrix = np.diag([1.0 + 1e-9, -1e-9]).astype(complex)
        with pytest.raises(CorruptedStateError):
            output_distribution(DensityState(1, matrix))

    def test_output_distribution_absorbs_rounding(self):
        matrix = np.diag([0.75 + 1e-12, 0.25, -1e-13, 0.0]).astype(complex)
        dist = output_distribution(DensityState(2, matrix))
        assert dist.probs.sum() == pytest.approx(1.0, abs=1e-15)
        assert dist.probs[2] == 0.0


GRID = (0.0, 0.05, 0.15, 0.25)


class TestChannelPowerGrid:
    """Tests for the closed-form single-qubit channel power."""

    @pytest.mark.parametrize("qx", GRID)
    @pytest.mark.parametrize("qy", GRID)
    @pytest.mark.parametrize("qz", GRID)
    def test_matches_kraus_iteration(self, qx, qy, qz):
        """Test the closed form against explicit Kraus sums for d = 0..50."""
        channel = PauliChannel(qx, qy, qz)
        for d in range(51):
            kraus = float(np.real(iterate_single_qubit_channel(channel, d)[0, 0]))
            assert abs(single_qubit_channel_power(channel, d) - kraus) <= 1e-12


class TestHaarMoments:
    """Tests for low moments of Haar two-qubit gates."""

    def test_entry_moments(self):
        """Test E|U00|^2 = 1/4 and E|U00|^4 = 1/10 within 5 standard errors."""
        rng = np.random.default_rng(2024)
        entries = np.array([abs(sample_haar_unitary(4, rng)[0, 0]) ** 2 for _ in range(4000)])
        for values, expected in ((entries, 1 / 4), (entries**2, 1 / 10)):
            se = values.std(ddof=1) / np.sqrt(values.size)
            assert abs(values.mean() - expected) <= 5 * se
