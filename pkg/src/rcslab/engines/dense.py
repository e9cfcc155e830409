"""Exact density-matrix simulation of noisy circuits on small n.

Site k is bit k of every basis-state index. In the (2,)*n tensor view of a
vector (or the (2,)*2n view of a matrix, rows first) site k lives on axis
n-1-k.
"""

import logging
from dataclasses import dataclass

import numpy as np

from rcslab.circuits.architecture import ArchitectureSpec
from rcslab.circuits.noise import NoiseLocationSet, sample_noise_locations
from rcslab.circuits.realization import CircuitRealization, GateOp
from rcslab.core.errors import CorruptedStateError, ResourceLimitError, ValidationError
from rcslab.core.models import GateSet, HeraldedDephasingSpec, PauliChannel
from rcslab.core.seeds import as_generator

logger = logging.getLogger(__name__)

DEFAULT_QUBIT_CAP = 10
HARD_QUBIT_CAP = 12
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
EIGEN_SLACK = 1e-8
PROB_CLAMP = 1e-12

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def site_axis(n: int, site: int) -> int:
    """Tensor axis of ``site`` in the (2,)*n view."""
    return n - 1 - site


@dataclass(eq=False)
class DensityState:
    """A 2^n x 2^n density matrix."""

    n: int
    matrix: np.ndarray

    def validate(self, check_spectrum: bool = True) -> None:
        """Raise CorruptedStateError unless Hermitian, unit-trace and PSD."""
        dim = 2**self.n
        if self.matrix.shape != (dim, dim):
            raise CorruptedStateError(f"expected a {dim}x{dim} matrix, got {self.matrix.shape}")
        herm = float(np.max(np.abs(self.matrix - self.matrix.conj().T)))
        if herm > HERMITIAN_TOL:
            raise CorruptedStateError(f"state is not Hermitian (deviation {herm:.3g})")
        trace = complex(np.trace(self.matrix))
        if abs(trace - 1.0) > TRACE_TOL:
            raise CorruptedStateError(f"state trace is {trace:.12g}, expected 1")
        if check_spectrum:
            lowest = float(np.linalg.eigvalsh(self.matrix)[0])
            if lowest < -EIGEN_SLACK:
                raise CorruptedStateError(f"state has eigenvalue {lowest:.3g} < 0")

    @classmethod
    def zero(cls, n: int) -> "DensityState":
        """|0^n><0^n|."""
        matrix = np.zeros((2**n, 2**n), dtype=complex)
        matrix[0, 0] = 1.0
        return cls(n, matrix)

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityState":
        return cls(n, np.eye(2**n, dtype=complex) / 2**n)


@dataclass(eq=False)
class OutputDistribution:
    """Computational-basis probabilities, index bit k = outcome of site k."""

    n: int
    probs: np.ndarray

    def __post_init__(self) -> None:
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (2**self.n,):
            raise ValidationError(f"expected {2**self.n} probabilities, got {self.probs.shape}")
        if self.probs.size and float(self.probs.min()) < -PROB_CLAMP:
            raise ValidationError("distribution has a negative probability")
        total = float(self.probs.sum())
        if abs(total - 1.0) > TRACE_TOL:
            raise ValidationError(f"probabilities sum to {total:.12g}, expected 1")

    @classmethod
    def uniform(cls, n: int) -> "OutputDistribution":
        return cls(n, np.full(2**n, 2.0**-n))

    @classmethod
    def point_mass(cls, n: int, x: int = 0) -> "OutputDistribution":
        probs = np.zeros(2**n)
        probs[x] = 1.0
        return cls(n, probs)


def sample_haar_unitary(dim: int, seed: int | np.random.Generator) -> np.ndarray:
    """Haar-random dim x dim unitary via QR of a complex Ginibre matrix.

    The columns are rephased by diag(R)/|diag(R)| so the result is exactly
    Haar distributed.
    """
    rng = as_generator(seed)
    ginibre = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(ginibre)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def sample_haar_two_qubit(seed: int | np.random.Generator) -> np.ndarray:
    """A 4x4 Haar-random two-qubit gate."""
    return sample_haar_unitary(4, seed)


def sample_haar_circuit(
    arch: ArchitectureSpec,
    seed: int | np.random.Generator,
    noise: PauliChannel | HeraldedDephasingSpec | None = None,
    *,
    locations: NoiseLocationSet | None = None,
    leading_layer: bool = False,
    readout_layer: bool = True,
) -> CircuitRealization:
    """Sample Haar two-qubit gates on every pair of ``arch``.

    Heralded dephasing either uses the given ``locations`` or samples them
    from the same stream after the gates. ``readout_layer`` adds single-qubit
    Haar gates after the final noise round; it only applies to heralded
    dephasing at d >= 1.
    """
    rng = as_generator(seed)
    gates = tuple(
        tuple(GateOp(sites=pair, unitary=sample_haar_two_qubit(rng)) for pair in layer)
        for layer in arch.layers
    )
    leading = (
        tuple(sample_haar_unitary(2, rng) for _ in range(arch.n)) if leading_layer else None
    )
    realized: PauliChannel | NoiseLocationSet | None = None
    dephasing_q = 0.0
    readout = None
    if isinstance(noise, HeraldedDephasingSpec):
        realized = locations if locations is not None else sample_noise_locations(arch, noise, rng)
        dephasing_q = noise.q
        if readout_layer and arch.d > 0:
            readout = tuple(sample_haar_unitary(2, rng) for _ in range(arch.n))
    elif isinstance(noise, PauliChannel):
        realized = noise
    return CircuitRealization(
        architecture=arch,
        gates=gates,
        noise=realized,
        dephasing_q=dephasing_q,
        seed=seed if isinstance(seed, int) else None,
        gate_set=GateSet.HAAR,
        leading=leading,
        readout=readout,
    )


def gate_matrix(op: GateOp) -> np.ndarray:
    """The 4x4 unitary of a gate, looking Clifford ids up in the group table."""
    if op.unitary is not None:
        return op.unitary
    from rcslab.engines.clifford import clifford_unitary

    assert op.clifford_id is not None
    return clifford_unitary(op.clifford_id)


def apply_operator(
    tensor: np.ndarray, op: np.ndarray, axes: list[int], conjugate: bool = False
) -> np.ndarray:
    """Contract a 2^k x 2^k operator into ``axes`` of a (2,)*m tensor.

    With ``conjugate`` the operator's complex conjugate is used, which applied
    to the column axes of a density tensor gives rho U^†.
    """
    k = len(axes)
    op_t = (op.conj() if conjugate else op).reshape((2,) * (2 * k))
    out = np.tensordot(op_t, tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def _apply_unitary(rho: np.ndarray, n: int, u: np.ndarray, sites: tuple[int, ...]) -> np.ndarray:
    rows = [site_axis(n, s) for s in sites]
    cols = [n + a for a in rows]
    rho = apply_operator(rho, u, rows)
    return apply_operator(rho, u, cols, conjugate=True)


def apply_pauli_channel(
    rho: np.ndarray, n: int, site: int, channel: PauliChannel
) -> np.ndarray:
    """Apply a single-site Pauli channel to a (2,)*2n density tensor.

    Closed form on the site's 2x2 block structure: the diagonal blocks mix
    with weight qx+qy, the off-diagonal blocks with weight qx-qy.
    """
    a = site_axis(n, site)
    view = np.moveaxis(rho, (a, n + a), (0, 1))
    flip = channel.q_x + channel.q_y
    keep = 1.0 - channel.q - channel.q_z
    cross = channel.q_x - channel.q_y
    out = np.empty_like(view)
    out[0, 0] = (1.0 - flip) * view[0, 0] + flip * view[1, 1]
    out[1, 1] = (1.0 - flip) * view[1, 1] + flip * view[0, 0]
    out[0, 1] = keep * view[0, 1] + cross * view[1, 0]
    out[1, 0] = keep * view[1, 0] + cross * view[0, 1]
    return np.moveaxis(out, (0, 1), (a, n + a))


def check_qubit_cap(n: int, cap: int = DEFAULT_QUBIT_CAP, allow_large: bool = False) -> None:
    """Raise ResourceLimitError when a 4^n density matrix is out of bounds."""
    limit = min(cap, HARD_QUBIT_CAP)
    if cap > DEFAULT_QUBIT_CAP and not allow_large:
        limit = DEFAULT_QUBIT_CAP
    if n > limit:
        raise ResourceLimitError(
            f"dense simulation of n={n} exceeds the cap of {limit} qubits"
        )


def simulate_noisy_circuit(
    realization: CircuitRealization,
    initial: DensityState | None = None,
    *,
    cap: int = DEFAULT_QUBIT_CAP,
    allow_large: bool = False,
    check_spectrum: bool | None = None,
) -> DensityState:
    """Apply C_m then E_m for every layer and return the final state."""
    n = realization.n
    check_qubit_cap(n, cap, allow_large)
    realization.check_unitaries()
    state = initial if initial is not None else DensityState.zero(n)
    if state.n != n:
        raise ValidationError(f"initial state has {state.n} qubits, circuit has {n}")
    rho = state.matrix.reshape((2,) * (2 * n))

    for site, u in enumerate(realization.leading or ()):
        rho = _apply_unitary(rho, n, u, (site,))
    for m, ops in enumerate(realization.gates, start=1):
        for op in ops:
            rho = _apply_unitary(rho, n, gate_matrix(op), op.sites)
        for site, channel in realization.layer_channels(m).items():
            rho = apply_pauli_channel(rho, n, site, channel)
    for site, u in enumerate(realization.readout or ()):
        rho = _apply_unitary(rho, n, u, (site,))

    result = DensityState(n, np.ascontiguousarray(rho).reshape(2**n, 2**n))
    result.validate(check_spectrum=n <= 6 if check_spectrum is None else check_spectrum)
    return result


def output_distribution(state: DensityState) -> OutputDistribution:
    """Diagonal of the state, tiny negatives clamped and renormalized."""
    probs = np.real(np.diag(state.matrix)).copy()
    if probs.min() < -PROB_CLAMP:
        raise CorruptedStateError(f"negative probability {probs.min():.3g} in output")
    probs = np.clip(probs, 0.0, None)
    total = float(probs.sum())
    if abs(total - 1.0) > TRACE_TOL:
        raise CorruptedStateError(f"output probabilities sum to {total:.12g}")
    return OutputDistribution(state.n, probs / total)


def tvd_to_uniform(dist: OutputDistribution) -> float:
    """(1/2) sum_x |p_x - 2^-n|."""
    return 0.5 * float(np.abs(dist.probs - 2.0**-dist.n).sum())


def collision_probability(dist: OutputDistribution) -> float:
    """Z = sum_x p_x^2."""
    return float(np.dot(dist.probs, dist.probs))


def marginal_zero_probability(dist: OutputDistribution, site: int) -> float:
    """Probability that ``site`` reads 0."""
    if not 0 <= site < dist.n:
        raise ValidationError(f"site {site} out of range 0..{dist.n - 1}")
    tensor = dist.probs.reshape((2,) * dist.n)
    return float(np.take(tensor, 0, axis=site_axis(dist.n, site)).sum())


def marginal_zero_probabilities(dist: OutputDistribution) -> np.ndarray:
    """p_{i0} for every site i."""
    return np.array([marginal_zero_probability(dist, i) for i in range(dist.n)])


def global_haar_distribution(n: int, seed: int | np.random.Generator) -> OutputDistribution:
    """Output of |0^n> under one Haar-random unitary on all n qubits."""
    u = sample_haar_unitary(2**n, seed)
    probs = np.abs(u[:, 0]) ** 2
    return OutputDistribution(n, probs / probs.sum())


def pauli_kraus_operators(channel: PauliChannel) -> list[np.ndarray]:
    """Kraus operators sqrt(1-q) I, sqrt(qx) X, sqrt(qy) Y, sqrt(qz) Z."""
    weights = (1.0 - channel.q, channel.q_x, channel.q_y, channel.q_z)
    paulis = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)
    return [np.sqrt(max(w, 0.0)) * p for w, p in zip(weights, paulis, strict=True)]


def iterate_single_qubit_channel(channel: PauliChannel, d: int) -> np.ndarray:
    """Apply the channel d times to |0><0| by explicit 2x2 Kraus sums."""
    rho = np.array([[1, 0], [0, 0]], dtype=complex)
    kraus = pauli_kraus_operators(channel)
    for _ in range(d):
        rho = sum(k @ rho @ k.conj().T for k in kraus)
    return rho


def single_qubit_channel_power(channel: PauliChannel, d: int) -> float:
    """p0 after d applications of the channel to |0>: 1/2 + (1/2)(1-2(qx+qy))^d."""
    if d < 0:
        raise ValidationError(f"d must be >= 0, got {d}")
    return 0.5 + 0.5 * (1.0 - 2.0 * (channel.q_x + channel.q_y)) ** d
