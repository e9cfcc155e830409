"""Exact ensemble-averaged collision probabilities via {I, S}^n configurations.

The two-copy average of a Haar random circuit is a weighted sum of products
of I (identity) and S (swap) on each site. Index bit k of a ConfigVector is
the configuration of site k, with 1 meaning S. Starting from the uniform
vector (a leading layer of single-qubit Haar gates), gates and dephasing
events act by local transition rules, and the average collision
probability is the total weight divided by 3^n.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from rcslab.circuits.architecture import ArchitectureSpec, Pair
from rcslab.circuits.noise import NoiseLocationSet
from rcslab.core.errors import ConventionMismatchError, ResourceLimitError, ValidationError
from rcslab.core.models import HeraldedDephasingSpec

logger = logging.getLogger(__name__)

DEFAULT_STATMECH_CAP = 24
HAAR_MIXING_WEIGHT = 2.0 / 5.0


class Convention(str, Enum):
    """Whether a layer of single-qubit Haar gates precedes the circuit."""

    LEADING_LAYER = "leading_layer"
    NO_LEADING_LAYER = "no_leading_layer"


@dataclass(frozen=True)
class CompositeCoefficients:
    """Dephasing(q) followed by a single-qubit Haar gate maps S to alpha I + beta S."""

    q: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.q <= 0.5:
            raise ValidationError(f"q must lie in [0, 1/2], got {self.q}")

    @property
    def alpha(self) -> float:
        return 4.0 * self.q * (1.0 - self.q) / 3.0

    @property
    def beta(self) -> float:
        return 1.0 - 8.0 * self.q * (1.0 - self.q) / 3.0

    @property
    def gamma(self) -> float:
        return 1.0 - self.beta


@dataclass
class ConfigVector:
    """Weight of every configuration in {I, S}^n."""

    n: int
    weights: np.ndarray

    @classmethod
    def uniform(cls, n: int) -> "ConfigVector":
        return cls(n, np.ones(2**n))

    @classmethod
    def indicator(cls, n: int, config: int) -> "ConfigVector":
        weights = np.zeros(2**n)
        weights[config] = 1.0
        return cls(n, weights)

    def total(self) -> float:
        return float(self.weights.sum())

    def _axis(self, site: int) -> int:
        if not 0 <= site < self.n:
            raise ValidationError(f"site {site} out of range 0..{self.n - 1}")
        return self.n - 1 - site

    def tensor(self) -> np.ndarray:
        return self.weights.reshape((2,) * self.n)


def _pair_view(v: ConfigVector, pair: Pair) -> tuple[np.ndarray, tuple[int, int]]:
    i, j = pair
    if i == j:
        raise ValidationError(f"pair sites must differ, got {pair}")
    axes = (v._axis(i), v._axis(j))
    return np.moveaxis(v.tensor(), axes, (0, 1)), axes


def apply_haar_gate_transition(v: ConfigVector, pair: Pair) -> ConfigVector:
    """Two-qubit Haar gate: equal pairs stay, unequal pairs split 2/5 into II and SS."""
    view, axes = _pair_view(v, pair)
    mix = HAAR_MIXING_WEIGHT * (view[0, 1] + view[1, 0])
    out = np.zeros_like(view)
    out[0, 0] = view[0, 0] + mix
    out[1, 1] = view[1, 1] + mix
    return ConfigVector(v.n, np.moveaxis(out, (0, 1), axes).reshape(-1))


def apply_swap_average_transition(v: ConfigVector, pair: Pair) -> ConfigVector:
    """SWAP or identity with probability 1/2, then single-qubit Haar gates."""
    view, axes = _pair_view(v, pair)
    out = 0.5 * (view + view.swapaxes(0, 1))
    return ConfigVector(v.n, np.moveaxis(out, (0, 1), axes).reshape(-1))


def apply_dephasing_transition(
    v: ConfigVector, site: int, q: float, p: float = 1.0
) -> ConfigVector:
    """Dephasing then a single-site Haar gate: S at ``site`` -> alpha I + beta S.

    With ``p`` < 1 the event happens with probability p, giving the averaged
    rule S -> p alpha I + (1 - p gamma) S.
    """
    coeffs = CompositeCoefficients(q)
    axis = v._axis(site)
    view = np.moveaxis(v.tensor(), axis, 0)
    out = np.empty_like(view)
    out[0] = view[0] + p * coeffs.alpha * view[1]
    out[1] = (1.0 - p * coeffs.gamma) * view[1]
    return ConfigVector(v.n, np.moveaxis(out, 0, axis).reshape(-1))


def check_convention(circuit_has_leading_layer: bool, convention: Convention) -> None:
    """Raise unless the circuit and the statmech convention agree."""
    expected = (
        Convention.LEADING_LAYER if circuit_has_leading_layer else Convention.NO_LEADING_LAYER
    )
    if convention is not expected:
        raise ConventionMismatchError(
            f"circuit convention {expected.value} does not match statmech {convention.value}"
        )


def _evolve(
    arch: ArchitectureSpec,
    q: float,
    locations: NoiseLocationSet | None,
    p_all: float | None,
    swap_ensemble: bool,
    readout_layer: bool,
    cap: int,
) -> ConfigVector:
    if arch.n > cap:
        raise ResourceLimitError(f"statmech vector for n={arch.n} exceeds the cap of {cap}")
    if locations is not None and (locations.n, locations.d) != (arch.n, arch.d):
        raise ValidationError("noise locations do not match the architecture")
    gate = apply_swap_average_transition if swap_ensemble else apply_haar_gate_transition
    v = ConfigVector.uniform(arch.n)
    for m, layer in enumerate(arch.layers, start=1):
        for pair in layer:
            v = gate(v, pair)
        # Dephasing right before readout does not change computational-basis outcomes.
        if m == arch.d and not readout_layer:
            continue
        if p_all is not None:
            if p_all > 0.0 and q > 0.0:
                for site in range(arch.n):
                    v = apply_dephasing_transition(v, site, q, p_all)
        elif locations is not None and q > 0.0:
            for site in sorted(locations.layers[m - 1]):
                v = apply_dephasing_transition(v, site, q)
    return v


def _contract(v: ConfigVector, d: int, convention: Convention) -> float:
    if convention is Convention.NO_LEADING_LAYER and d == 0:
        return 1.0
    return v.total() / 3.0**v.n


def exact_average_collision(
    arch: ArchitectureSpec,
    noise_locations: NoiseLocationSet | None,
    q: float,
    *,
    convention: Convention = Convention.LEADING_LAYER,
    readout_layer: bool = True,
    cap: int = DEFAULT_STATMECH_CAP,
) -> float:
    """E[Z] over Haar gates for fixed heralded dephasing locations.

    Without a leading single-qubit layer the value differs only at d = 0,
    where the output is a point mass; from d >= 1 the first two-qubit gates
    absorb that layer.
    """
    v = _evolve(arch, q, noise_locations, None, False, readout_layer, cap)
    return _contract(v, arch.d, convention)


def exact_average_collision_over_locations(
    arch: ArchitectureSpec,
    spec: HeraldedDephasingSpec,
    *,
    convention: Convention = Convention.LEADING_LAYER,
    readout_layer: bool = True,
    cap: int = DEFAULT_STATMECH_CAP,
) -> float:
    """E[Z] over Haar gates and over Bernoulli(p) noise locations."""
    v = _evolve(arch, spec.q, None, spec.p, False, readout_layer, cap)
    return _contract(v, arch.d, convention)


def modified_ensemble_average(
    arch: ArchitectureSpec,
    noise_locations: NoiseLocationSet | None,
    q: float,
    *,
    convention: Convention = Convention.LEADING_LAYER,
    readout_layer: bool = True,
    cap: int = DEFAULT_STATMECH_CAP,
) -> float:
    """E[Z] when every gate is replaced by SWAP-or-identity plus single-qubit Haar gates."""
    v = _evolve(arch, q, noise_locations, None, True, readout_layer, cap)
    return _contract(v, arch.d, convention)


def modified_ensemble_average_over_locations(
    arch: ArchitectureSpec,
    spec: HeraldedDephasingSpec,
    *,
    convention: Convention = Convention.LEADING_LAYER,
    readout_layer: bool = True,
    cap: int = DEFAULT_STATMECH_CAP,
) -> float:
    """SWAP-ensemble E[Z] averaged over Bernoulli(p) locations.

    With the readout layer this equals :func:`location_averaged`.
    """
    v = _evolve(arch, spec.q, None, spec.p, True, readout_layer, cap)
    return _contract(v, arch.d, convention)


def average_collision_profile(
    arch: ArchitectureSpec, *, cap: int = DEFAULT_STATMECH_CAP
) -> list[float]:
    """Noiseless E[Z] after 0, 1, ..., d layers (leading-layer convention)."""
    if arch.n > cap:
        raise ResourceLimitError(f"statmech vector for n={arch.n} exceeds the cap of {cap}")
    v = ConfigVector.uniform(arch.n)
    profile = [v.total() / 3.0**arch.n]
    for layer in arch.layers:
        for pair in layer:
            v = apply_haar_gate_transition(v, pair)
        profile.append(v.total() / 3.0**arch.n)
    return profile


def composite_channel_state(q: float, k: int) -> tuple[float, float]:
    """(I, S) coefficients of one site after k composite channels."""
    if k < 0:
        raise ValidationError(f"k must be >= 0, got {k}")
    beta_k = CompositeCoefficients(q).beta ** k
    return (3.0 - beta_k) / 12.0, beta_k / 6.0


def modified_ensemble_collision(n: int, t: list[int] | np.ndarray, q: float) -> float:
    """2^-n prod_i (1 + beta^t_i / 3) for per-path event counts t."""
    counts = np.asarray(t, dtype=float)
    if counts.shape != (n,) or np.any(counts < 0):
        raise ValidationError(f"expected {n} non-negative event counts")
    beta = CompositeCoefficients(q).beta
    return float(2.0**-n * np.prod(1.0 + beta**counts / 3.0))


def location_averaged(n: int, d: int, p: float, q: float) -> float:
    """2^-n [1 + (1/3)(1 - p gamma)^d]^n."""
    spec = HeraldedDephasingSpec(p, q)
    return float(2.0**-n * (1.0 + (1.0 - p * spec.gamma) ** d / 3.0) ** n)


def collision_upper_bound(n: int, d: int, p: float, q: float) -> float:
    """2^-n exp[(n/3) e^(-gamma p d)]."""
    spec = HeraldedDephasingSpec(p, q)
    return math.exp(-n * math.log(2.0) + (n / 3.0) * math.exp(-spec.gamma * p * d))


def identity_swap_operators() -> tuple[np.ndarray, np.ndarray]:
    """I and S on two copies of one qubit (4x4, copy 1 the major factor)."""
    swap = np.zeros((4, 4))
    for a in range(2):
        for b in range(2):
            swap[2 * b + a, 2 * a + b] = 1.0
    return np.eye(4), swap


def identity_swap_coefficients(op: np.ndarray) -> tuple[float, float]:
    """(a, b) with op = a I + b S, from Tr op = 4a + 2b and Tr(op S) = 2a + 4b."""
    _, swap = identity_swap_operators()
    t, ts = float(np.real(np.trace(op))), float(np.real(np.trace(op @ swap)))
    return (4.0 * t - 2.0 * ts) / 12.0, (4.0 * ts - 2.0 * t) / 12.0


def single_qubit_twirl(op: np.ndarray) -> np.ndarray:
    """Average of (U x U) op (U x U)^† over single-qubit Haar U."""
    eye, swap = identity_swap_operators()
    t, ts = float(np.real(np.trace(op))), float(np.real(np.trace(op @ swap)))
    return (t - ts / 2.0) / 3.0 * eye + (ts - t / 2.0) / 3.0 * swap


def dephase_two_copies(op: np.ndarray, q: float) -> np.ndarray:
    """Apply the dephasing channel to both copies."""
    z = np.diag([1.0, -1.0])
    kraus = [np.sqrt(1.0 - q) * np.eye(2), np.sqrt(q) * z]
    out = np.zeros_like(op, dtype=complex)
    for k1 in kraus:
        for k2 in kraus:
            k = np.kron(k1, k2)
            out += k @ op @ k.conj().T
    return out
