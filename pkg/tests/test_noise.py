"""Tests for noise locations, SWAP paths and circuit realizations."""

import numpy as np
import pytest

from rcslab.circuits.architecture import build_architecture
from rcslab.circuits.noise import (
    NoiseLocationSet,
    path_event_counts,
    sample_noise_locations,
    sample_swap_network,
)
from rcslab.circuits.realization import CircuitRealization, GateOp, is_unitary
from rcslab.core.errors import ValidationError
from rcslab.core.models import HeraldedDephasingSpec, NoiseKind, PauliChannel


def identity_circuit(arch, noise=None, dephasing_q=0.0):
    gates = tuple(
        tuple(GateOp(sites=pair, unitary=np.eye(4, dtype=complex)) for pair in layer)
        for layer in arch.layers
    )
    return CircuitRealization(arch, gates, noise=noise, dephasing_q=dephasing_q)


class TestNoiseLocationSet:
    """Tests for NoiseLocationSet."""

    def test_mask_roundtrip(self):
        mask = np.array([[True, False, False, True], [False, False, True, False]])
        noise = NoiseLocationSet.from_mask(mask)
        assert np.array_equal(noise.mask(), mask)
        assert len(noise) == 3

    def test_iteration_order(self):
        noise = NoiseLocationSet(4, 2, (frozenset({3, 1}), frozenset({0})))
        assert list(noise) == [(1, 1), (3, 1), (0, 2)]

    def test_membership(self):
        noise = NoiseLocationSet(4, 2, (frozenset({3}), frozenset()))
        assert (3, 1) in noise
        assert (3, 2) not in noise
        assert (3, 5) not in noise

    def test_out_of_range_site(self):
        with pytest.raises(ValidationError):
            NoiseLocationSet(2, 1, (frozenset({2}),))

    def test_sampling_extremes(self, brickwork4):
        """Test p = 0 and p = 1 give the empty and full sets."""
        empty = sample_noise_locations(brickwork4, HeraldedDephasingSpec(0.0, 0.25), 1)
        full = sample_noise_locations(brickwork4, HeraldedDephasingSpec(1.0, 0.25), 1)
        assert empty == NoiseLocationSet.empty(4, 3)
        assert full == NoiseLocationSet.full(4, 3)

    def test_sampling_rate(self):
        arch = build_architecture(10, 40)
        noise = sample_noise_locations(arch, HeraldedDephasingSpec(0.3, 0.1), 5)
        # 400 Bernoulli(0.3) draws: stderr about 0.023
        assert len(noise) / 400 == pytest.approx(0.3, abs=0.1)

    def test_sampling_rate_large(self):
        """Test 10^4 location draws hit p within 4 standard errors, site by site too."""
        arch = build_architecture(10, 1000)
        mask = sample_noise_locations(arch, HeraldedDephasingSpec(0.3, 0.1), 17).mask()
        assert mask.size == 10**4
        assert abs(mask.mean() - 0.3) <= 4 * np.sqrt(0.3 * 0.7 / mask.size)
        per_site = mask.mean(axis=0)
        assert np.all(np.abs(per_site - 0.3) <= 5 * np.sqrt(0.3 * 0.7 / arch.d))


class TestEventCounts:
    """Tests for per-path dephasing event counts."""

    def setup_method(self):
        self.arch = build_architecture(2, 2)
        self.noise = NoiseLocationSet(2, 2, (frozenset({0}), frozenset({0})))

    def test_identity_routing(self):
        assert path_event_counts(self.arch, self.noise) == [2, 0]

    def test_swap_moves_qubit(self):
        assert path_event_counts(self.arch, self.noise, ((True,), (False,))) == [0, 2]

    def test_swap_back(self):
        assert path_event_counts(self.arch, self.noise, ((True,), (True,))) == [1, 1]

    def test_total_is_preserved(self, brickwork4):
        """Test SWAPs redistribute but never create events."""
        noise = NoiseLocationSet.full(4, 3)
        swaps = sample_swap_network(brickwork4, 17)
        assert sum(path_event_counts(brickwork4, noise, swaps)) == 12

    def test_swaps_need_pairs(self):
        with pytest.raises(ValidationError):
            self.noise.event_counts(((True,), (True,)))

    def test_shape_mismatch(self, brickwork4):
        with pytest.raises(ValidationError):
            path_event_counts(brickwork4, self.noise)


class TestCircuitRealization:
    """Tests for CircuitRealization and GateOp."""

    def test_gate_needs_one_payload(self):
        with pytest.raises(ValidationError):
            GateOp(sites=(0, 1))
        with pytest.raises(ValidationError):
            GateOp(sites=(0, 1), unitary=np.eye(4), clifford_id=0)

    def test_gates_must_follow_pairs(self, brickwork4):
        circuit = identity_circuit(brickwork4)
        swapped = (circuit.gates[1], circuit.gates[0], circuit.gates[2])
        with pytest.raises(ValidationError, match="layer 1"):
            CircuitRealization(brickwork4, swapped)

    def test_noise_kinds(self, brickwork4):
        assert identity_circuit(brickwork4).noise_kind is NoiseKind.NONE
        pauli = identity_circuit(brickwork4, PauliChannel.depolarizing(0.1))
        assert pauli.noise_kind is NoiseKind.PAULI
        assert len(pauli.noise_locations()) == 12
        assert pauli.without_noise().noise_kind is NoiseKind.NONE

    def test_dephasing_locations(self, brickwork4):
        noise = NoiseLocationSet(4, 3, (frozenset({1}), frozenset(), frozenset({0, 2})))
        circuit = identity_circuit(brickwork4, noise, dephasing_q=0.2)
        assert circuit.noise_kind is NoiseKind.DEPHASING
        assert [(s, m) for s, m, _ in circuit.noise_locations()] == [(1, 1), (0, 3), (2, 3)]
        assert circuit.layer_channels(3)[0] == PauliChannel.dephasing(0.2)

    def test_identity_channel_has_no_locations(self, brickwork4):
        circuit = identity_circuit(brickwork4, PauliChannel(0.0, 0.0, 0.0))
        assert circuit.noise_locations() == []

    def test_check_unitaries(self, brickwork4):
        circuit = identity_circuit(brickwork4)
        circuit.check_unitaries()
        bad = CircuitRealization(
            brickwork4,
            ((GateOp((0, 1), unitary=2 * np.eye(4)), *circuit.gates[0][1:]), *circuit.gates[1:]),
        )
        with pytest.raises(ValidationError, match="non-unitary"):
            bad.check_unitaries()

    def test_is_unitary(self):
        assert is_unitary(np.array([[0, 1], [1, 0]]))
        assert not is_unitary(np.ones((2, 2)))
        assert not is_unitary(np.eye(4)[:3])
