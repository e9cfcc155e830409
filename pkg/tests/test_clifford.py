"""Tests for the Clifford table and the stabilizer engine."""

from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from rcslab.circuits.architecture import build_architecture
from rcslab.circuits.realization import CircuitRealization, GateOp
from rcslab.core.errors import CliffordTypeError, ResourceLimitError, ValidationError
from rcslab.core.models import HeraldedDephasingSpec, PauliChannel
from rcslab.engines.clifford import (
    CLIFFORD_GROUP_ORDER,
    GENERATORS,
    IDENTITY,
    PauliString,
    StabilizerTableau,
    clifford_id,
    clifford_table,
    clifford_unitary,
    enumerate_two_qubit_cliffords,
    extreme_event_circuit,
    fraction_fixing_z1,
    group_table_text,
    hadamard_pair_id,
    noiseless_clifford_distribution,
    noisy_clifford_distribution,
    propagate_pauli,
    sample_clifford_circuit,
    verify_noise_monotonicity,
    walsh_hadamard,
    z1_fixing_ids,
)
from rcslab.engines.dense import (
    PAULI_I,
    PAULI_X,
    PAULI_Z,
    marginal_zero_probability,
    output_distribution,
    sample_haar_circuit,
    simulate_noisy_circuit,
    single_qubit_channel_power,
)


def pauli_matrix(p):
    """4x4 matrix of a two-qubit Pauli, site 0 the most significant factor."""
    xs = np.kron(PAULI_X if p.x & 1 else PAULI_I, PAULI_X if p.x & 2 else PAULI_I)
    zs = np.kron(PAULI_Z if p.z & 1 else PAULI_I, PAULI_Z if p.z & 2 else PAULI_I)
    return (1j**p.phase) * xs @ zs


def dense_probs(circuit):
    return output_distribution(simulate_noisy_circuit(circuit)).probs


class TestPauliString:
    """Tests for PauliString."""

    def test_product_phase(self):
        """Test X Z = -iY."""
        product = PauliString(1, 0) * PauliString(0, 1)
        assert product == PauliString(1, 1, 0)
        assert product.label(1) == "-iY"

    def test_labels(self):
        assert PauliString.from_label("Y").label(1) == "+Y"
        assert PauliString.from_label("-XIZ") == PauliString(1, 4, 2)
        assert PauliString.from_label("-XIZ").label(3) == "-XIZ"

    def test_bad_label(self):
        with pytest.raises(ValidationError):
            PauliString.from_label("XQ")

    def test_commutation(self):
        x0, z0, z1 = PauliString(1, 0), PauliString(0, 1), PauliString(0, 2)
        assert not x0.commutes(z0)
        assert x0.commutes(z1)

    def test_hermitian(self):
        assert PauliString.from_label("Y").is_hermitian
        assert not PauliString(1, 1, 0).is_hermitian


class TestCliffordTable:
    """Tests for the enumerated two-qubit Clifford group."""

    def test_order(self):
        assert len(enumerate_two_qubit_cliffords()) == CLIFFORD_GROUP_ORDER
        assert clifford_table().unitaries.shape == (CLIFFORD_GROUP_ORDER, 4, 4)

    def test_identity_first(self):
        assert clifford_table().elements[0] == IDENTITY
        assert clifford_id(IDENTITY) == 0

    def test_all_symplectic(self):
        assert all(e.is_symplectic() for e in clifford_table().elements)

    def test_z1_fixing_census(self):
        """Test 384 of the 11520 elements fix +Z on the first qubit."""
        assert len(z1_fixing_ids()) == 384
        assert fraction_fixing_z1() == Fraction(1, 30)

    @pytest.mark.parametrize("cid", [0, 1, 7, 100, 2024, 5000, 11519])
    def test_unitary_matches_images(self, cid):
        """Test U P U^† equals the stored image of X0, Z0, X1, Z1."""
        u = clifford_unitary(cid)
        element = clifford_table().elements[cid]
        generators = (PauliString(1, 0), PauliString(0, 1), PauliString(2, 0), PauliString(0, 2))
        for p, image in zip(generators, element.images, strict=True):
            conjugated = u @ pauli_matrix(p) @ u.conj().T
            assert np.allclose(conjugated, pauli_matrix(image), atol=1e-10)

    def test_unitaries_are_unitary(self):
        unitaries = clifford_table().unitaries[::97]
        eye = np.eye(4)
        for u in unitaries:
            assert np.allclose(u.conj().T @ u, eye, atol=1e-10)

    def test_composition_order(self):
        """Test then() applies the receiver first."""
        h0, s0 = GENERATORS[0][1], GENERATORS[1][1]
        cid = clifford_id(h0.then(s0))
        expected = GENERATORS[1][2] @ GENERATORS[0][2]
        phase = np.vdot(clifford_unitary(cid).reshape(-1), expected.reshape(-1)) / 4
        assert abs(phase) == pytest.approx(1.0)
        assert np.allclose(phase * clifford_unitary(cid), expected, atol=1e-10)

    def test_hadamard_pair(self):
        element = clifford_table().elements[hadamard_pair_id()]
        assert element.images == (
            PauliString(0, 1),
            PauliString(1, 0),
            PauliString(0, 2),
            PauliString(2, 0),
        )

    def test_table_text(self):
        lines = group_table_text().splitlines()
        assert lines[0] == "# id X0 Z0 X1 Z1"
        assert lines[1] == "0 +XI +ZI +IX +IZ"
        assert len(lines) == CLIFFORD_GROUP_ORDER + 1


class TestStabilizerTableau:
    """Tests for StabilizerTableau."""

    def test_zero_state(self):
        tableau = StabilizerTableau.zero_state(3)
        tableau.validate()
        probs = tableau.probabilities()
        assert probs[0] == 1.0
        assert tableau.nonzero_probability() == 1.0

    def test_hadamard_spreads_one_bit(self):
        tableau = StabilizerTableau.zero_state(2)
        tableau.apply_clifford(clifford_id(GENERATORS[0][1]), (0, 1))
        assert np.allclose(tableau.probabilities(), [0.5, 0.5, 0.0, 0.0])

    def test_bell_state(self):
        tableau = StabilizerTableau.zero_state(2)
        tableau.apply_clifford(clifford_id(GENERATORS[0][1].then(GENERATORS[4][1])), (0, 1))
        assert np.allclose(tableau.probabilities(), [0.5, 0.0, 0.0, 0.5])

    def test_pauli_flips_outcome(self):
        tableau = StabilizerTableau.zero_state(2)
        tableau.apply_pauli(PauliString(2, 0))
        assert tableau.probabilities()[2] == 1.0

    def test_invalid_generators(self):
        with pytest.raises(ValidationError, match="independent"):
            StabilizerTableau(2, [PauliString(0, 1), PauliString(0, 1)]).validate()
        with pytest.raises(ValidationError, match="commute"):
            StabilizerTableau(2, [PauliString(1, 0), PauliString(0, 1)]).validate()


class TestCliffordCircuits:
    """Tests for noiseless and noisy Clifford circuit outputs."""

    def test_noiseless_matches_dense(self, brickwork4):
        circuit = sample_clifford_circuit(brickwork4, 3)
        dist, z = noiseless_clifford_distribution(circuit)
        assert np.allclose(dist.probs, dense_probs(circuit), atol=1e-10)
        assert z == pytest.approx(float(dist.probs.max()))

    def test_pauli_noise_matches_dense(self, brickwork4):
        """Test the exact XOR-convolution mode against density matrices."""
        circuit = sample_clifford_circuit(brickwork4, 5, PauliChannel(0.1, 0.05, 0.2))
        result = noisy_clifford_distribution(circuit)
        assert result.mode == "exact"
        assert result.discarded_mass == 0.0
        assert np.allclose(result.distribution.probs, dense_probs(circuit), atol=1e-10)

    def test_dephasing_matches_dense(self, brickwork4):
        circuit = sample_clifford_circuit(brickwork4, 8, HeraldedDephasingSpec(0.5, 0.3))
        result = noisy_clifford_distribution(circuit)
        assert np.allclose(result.distribution.probs, dense_probs(circuit), atol=1e-10)

    def test_noise_argument_overrides(self, brickwork4):
        circuit = sample_clifford_circuit(brickwork4, 9)
        channel = PauliChannel.depolarizing(0.2)
        result = noisy_clifford_distribution(circuit, channel)
        assert np.allclose(
            result.distribution.probs, dense_probs(circuit.with_noise(channel)), atol=1e-10
        )

    @pytest.mark.parametrize("seed", range(5))
    def test_noise_never_raises_collision(self, seed):
        """Test Z(U, E) <= Z(U, I) and Z >= 2^-n."""
        arch = build_architecture(6, 3)
        circuit = sample_clifford_circuit(arch, seed)
        report = verify_noise_monotonicity(circuit, PauliChannel(0.05, 0.1, 0.02))
        assert report.holds
        assert report.z_noisy >= 2**-6 - 1e-12

    @pytest.mark.parametrize("d", [1, 2, 4])
    def test_extreme_event_marginal(self, d):
        """Test the site-0 marginal follows the single-qubit channel power."""
        channel = PauliChannel(0.07, 0.03, 0.11)
        circuit = extreme_event_circuit(build_architecture(4, d), 17, channel)
        result = noisy_clifford_distribution(circuit)
        p0 = marginal_zero_probability(result.distribution, 0)
        assert p0 == pytest.approx(single_qubit_channel_power(channel, d), abs=1e-10)

    def test_extreme_event_orientation(self, brickwork4):
        circuit = extreme_event_circuit(brickwork4, 2)
        fixing = set(z1_fixing_ids())
        for ops in circuit.gates:
            for op in ops:
                if 0 in op.sites:
                    assert op.sites[0] == 0
                    assert op.clifford_id in fixing

    def test_monte_carlo_fallback(self, brickwork4):
        """Test the Monte Carlo estimate agrees with the exact value."""
        circuit = sample_clifford_circuit(brickwork4, 12, PauliChannel.depolarizing(0.15))
        exact = noisy_clifford_distribution(circuit).collision
        with pytest.raises(ResourceLimitError):
            noisy_clifford_distribution(circuit, cap=8)
        mc = noisy_clifford_distribution(circuit, cap=8, allow_mc=True, mc_pairs=2000, seed=4)
        assert mc.mode == "mc"
        assert mc.distribution is None
        assert abs(mc.collision - exact) <= 5 * mc.stderr + 1e-12

    def test_propagate_identity_layers(self, brickwork4):
        gates = tuple(
            tuple(GateOp(pair, clifford_id=0) for pair in layer) for layer in brickwork4.layers
        )
        circuit = CircuitRealization(brickwork4, gates)
        p = PauliString(5, 2, 1)
        assert propagate_pauli(circuit, p, 0) == p

    def test_haar_circuit_rejected(self, brickwork4):
        with pytest.raises(CliffordTypeError):
            noiseless_clifford_distribution(sample_haar_circuit(brickwork4, 1))

    def test_walsh_hadamard_involution(self, rng):
        v = rng.random(16)
        assert np.allclose(walsh_hadamard(walsh_hadamard(v)), 16 * v)


def same_up_to_phase(a, b):
    phase = np.vdot(a.reshape(-1), b.reshape(-1)) / a.shape[0]
    return abs(abs(phase) - 1.0) < 1e-10 and np.allclose(phase * a, b, atol=1e-10)


class TestCliffordGroupProperties:
    """Tests for closure and uniform sampling of the enumerated group."""

    def test_closure_on_random_pairs(self):
        """Test products of random elements are table elements with the product unitary."""
        table = clifford_table()
        rng = np.random.default_rng(11)
        for a, b in rng.integers(CLIFFORD_GROUP_ORDER, size=(100, 2)):
            cid = clifford_id(table.elements[a].then(table.elements[b]))
            assert 0 <= cid < CLIFFORD_GROUP_ORDER
            assert same_up_to_phase(clifford_unitary(cid), table.unitaries[b] @ table.unitaries[a])

    def test_gate_sampling_is_uniform(self):
        """Test sampled gate ids spread evenly over 24 blocks of the table."""
        arch = build_architecture(8, 20)
        ids = [
            op.clifford_id
            for seed in range(200)
            for layer in sample_clifford_circuit(arch, seed).gates
            for op in layer
        ]
        counts = np.bincount(np.array(ids) // (CLIFFORD_GROUP_ORDER // 24), minlength=24)
        assert counts.sum() == 200 * sum(len(layer) for layer in arch.layers)
        assert stats.chisquare(counts).pvalue > 1e-4


class TestNoiseMonotonicitySweep:
    """Tests for Z(U, E) <= Z(U, I) over many random Clifford instances."""

    def test_random_instances(self):
        rng = np.random.default_rng(500)
        for _ in range(500):
            n = int(rng.choice([2, 4]))
            arch = build_architecture(n, int(rng.integers(0, 5)))
            channel = PauliChannel(*rng.uniform(0.0, 0.1, size=3))
            report = verify_noise_monotonicity(sample_clifford_circuit(arch, rng), channel)
            assert report.z_noisy <= report.z_noiseless + 1e-10
            assert report.z_noisy >= 2.0**-n - 1e-12
