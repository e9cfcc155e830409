"""Closed-form bounds and reference constants.

Everything is evaluated in log space so that deep circuits neither underflow
nor overflow; :class:`BoundReport` carries the log-value and the sign (all
quantities here are non-negative, so the sign only separates exact zero).
"""

import math
from dataclasses import dataclass, field
from typing import Any

from scipy.special import logsumexp

from rcslab.core.errors import ValidationError
from rcslab.core.models import BoundSide, HeraldedDephasingSpec, PauliChannel
from rcslab.engines.statmech import collision_upper_bound

LOG2 = math.log(2.0)
LOG30 = math.log(30.0)
MU_UPPER = 2.48
PORTER_THOMAS_LIMIT = math.exp(-1.0)


@dataclass(frozen=True)
class BoundReport:
    """One bound evaluation."""

    name: str
    side: BoundSide
    log_value: float
    params: dict[str, Any] = field(default_factory=dict)
    notes: str = ""

    @property
    def sign(self) -> int:
        return 0 if self.log_value == -math.inf else 1

    @property
    def value(self) -> float:
        if self.log_value == -math.inf:
            return 0.0
        if self.log_value > 709.0:
            return math.inf
        return math.exp(self.log_value)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "side": self.side.value,
            "log_value": self.log_value,
            "value": self.value,
            "params": self.params,
            "notes": self.notes,
        }


def decay_rate(channel: PauliChannel) -> float:
    """a = -2 log(1 - 2b) + log 30 (infinite at b = 1/2)."""
    if channel.b >= 0.5:
        return math.inf
    return -2.0 * math.log1p(-2.0 * channel.b) + LOG30


def _check_depth(d: int) -> None:
    if d < 0:
        raise ValidationError(f"d must be >= 0, got {d}")


def tvd_lower_bound_report(channel: PauliChannel, d: int) -> BoundReport:
    """(1 - 2b)^(2d) / (4 * 30^d)."""
    _check_depth(d)
    params = {"d": d, **channel.to_dict(), "b": channel.b}
    if d == 0:
        return BoundReport("tvd_lower", BoundSide.LOWER, -math.log(4.0), params)
    if channel.b >= 0.5:
        return BoundReport(
            "tvd_lower", BoundSide.LOWER, -math.inf, params, notes="b = 1/2: trivial bound"
        )
    log_value = 2 * d * math.log1p(-2.0 * channel.b) - math.log(4.0) - d * LOG30
    return BoundReport("tvd_lower", BoundSide.LOWER, log_value, params)


def tvd_lower_bound(channel: PauliChannel, d: int) -> float:
    return tvd_lower_bound_report(channel, d).value


def typicality_tail_report(n: int, d: int, channel: PauliChannel) -> BoundReport:
    """Pr[delta < e^(-2ad)] <= 8 e^(-ad) + 16 e^((2a + log 4) d) / n."""
    _check_depth(d)
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    params = {"n": n, "d": d, **channel.to_dict(), "b": channel.b}
    a = decay_rate(channel)
    if math.isinf(a):
        return BoundReport(
            "typicality_tail", BoundSide.UPPER, 0.0, params,
            notes="b = 1/2: a diverges, tail saturated at 1",
        )
    first = math.log(8.0) - a * d
    second = math.log(16.0) + (2.0 * a + math.log(4.0)) * d - math.log(n)
    log_value = float(logsumexp([first, second]))
    return BoundReport("typicality_tail", BoundSide.UPPER, log_value, params)


def typicality_tail(n: int, d: int, channel: PauliChannel) -> float:
    return typicality_tail_report(n, d, channel).value


def typicality_threshold(d: int, channel: PauliChannel) -> float:
    """The delta threshold e^(-2ad) of the tail bound."""
    a = decay_rate(channel)
    return 0.0 if math.isinf(a) and d > 0 else math.exp(-2.0 * a * d) if d else 1.0


def depth_threshold(n: int, channel: PauliChannel) -> float:
    """Depths below log n / (2a + log 4) make the tail bound decay with n."""
    a = decay_rate(channel)
    if math.isinf(a):
        return 0.0
    return math.log(n) / (2.0 * a + math.log(4.0))


def tvd_upper_bound_report(n: int, d: int, p: float, q: float) -> BoundReport:
    """(3^(2/3) / 2) n^(1/3) e^(-gamma p d / 3)."""
    _check_depth(d)
    spec = HeraldedDephasingSpec(p, q)
    log_value = (
        (2.0 / 3.0) * math.log(3.0) - LOG2 + math.log(n) / 3.0 - spec.gamma * p * d / 3.0
    )
    notes = "vacuous" if log_value >= 0.0 else ""
    params = {"n": n, "d": d, "p": p, "q": q, "gamma": spec.gamma}
    return BoundReport("tvd_upper", BoundSide.UPPER, log_value, params, notes=notes)


def tvd_upper_bound(n: int, d: int, p: float, q: float) -> float:
    return tvd_upper_bound_report(n, d, p, q).value


def collision_upper_bound_report(n: int, d: int, p: float, q: float) -> BoundReport:
    """2^-n exp[(n/3) e^(-gamma p d)] as a report."""
    _check_depth(d)
    spec = HeraldedDephasingSpec(p, q)
    log_value = -n * LOG2 + (n / 3.0) * math.exp(-spec.gamma * p * d)
    return BoundReport(
        "collision_upper", BoundSide.UPPER, log_value, {"n": n, "d": d, "p": p, "q": q}
    )


def anticoncentration_threshold(n: int, d: int) -> float:
    """2^-n e^(-n / (8 * 30^d))."""
    if d < 1:
        raise ValidationError(f"threshold needs d >= 1, got {d}")
    return math.exp(-n * LOG2 - n * math.exp(-d * LOG30) / 8.0)


def noisy_variant(n: int, d: int, b: float) -> float:
    """2^-n e^(-n e^(-ad) / 8), a from the noise parameter b."""
    if d < 1:
        raise ValidationError(f"threshold needs d >= 1, got {d}")
    if not 0.0 <= b <= 0.5:
        raise ValidationError(f"b must lie in [0, 1/2], got {b}")
    if b == 0.5:
        return math.exp(-n * LOG2)
    a = -2.0 * math.log1p(-2.0 * b) + LOG30
    return math.exp(-n * LOG2 - n * math.exp(-a * d) / 8.0)


def mu_lower(d: int, b: float = 0.0) -> float:
    """log 2 + e^(-ad) / 4."""
    if b >= 0.5:
        return LOG2
    a = -2.0 * math.log1p(-2.0 * b) + LOG30
    return LOG2 + math.exp(-a * d) / 4.0


def porter_thomas_tvd(n: int) -> float:
    """Exact E[delta] of a global Haar state: (1 - 2^-n)^(2^n).

    Each outcome probability is Beta(1, 2^n - 1) distributed; the value
    increases towards e^-1 as n grows.
    """
    dim = 2.0**n
    return math.exp(dim * math.log1p(-1.0 / dim))


@dataclass(frozen=True)
class ReferenceConstants:
    """Reference values for an n-qubit system."""

    n: int
    haar_collision: float
    porter_thomas_tvd_floor: float
    porter_thomas_tvd: float
    mu_upper: float

    def mu_lower(self, d: int, b: float = 0.0) -> float:
        return mu_lower(d, b)


def reference_constants(n: int) -> ReferenceConstants:
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    return ReferenceConstants(
        n=n,
        haar_collision=2.0 / (2.0**n + 1.0),
        porter_thomas_tvd_floor=PORTER_THOMAS_LIMIT,
        porter_thomas_tvd=porter_thomas_tvd(n),
        mu_upper=MU_UPPER,
    )


def collision_tvd_bound(n: int, z: float) -> float:
    """delta <= sqrt((n log 2 + log Z) / 2), Pinsker with the Renyi-2 entropy."""
    return math.sqrt(max(n * LOG2 + math.log(z), 0.0) / 2.0)


def cauchy_schwarz_tvd_bound(n: int, z: float) -> float:
    """delta <= (1/2) sqrt(2^n Z - 1)."""
    return 0.5 * math.sqrt(max(2.0**n * z - 1.0, 0.0))


def paley_zygmund_floor(alpha: float, n: int, z: float) -> float:
    """Pr[p_0 >= alpha 2^-n] >= (1 - alpha)^2 / (2^n Z)."""
    return (1.0 - alpha) ** 2 / (2.0**n * z)


def bounds_table(
    n_values: list[int],
    d_values: list[int],
    channels: list[PauliChannel],
    dephasing: list[HeraldedDephasingSpec],
) -> list[BoundReport]:
    """Every bound over a parameter grid, in a fixed order."""
    reports: list[BoundReport] = []
    for n in n_values:
        for d in d_values:
            for channel in channels:
                reports.append(tvd_lower_bound_report(channel, d))
                reports.append(typicality_tail_report(n, d, channel))
            for spec in dephasing:
                reports.append(tvd_upper_bound_report(n, d, spec.p, spec.q))
                reports.append(collision_upper_bound_report(n, d, spec.p, spec.q))
    return reports


__all__ = [
    "BoundReport",
    "ReferenceConstants",
    "anticoncentration_threshold",
    "bounds_table",
    "cauchy_schwarz_tvd_bound",
    "collision_tvd_bound",
    "collision_upper_bound",
    "collision_upper_bound_report",
    "decay_rate",
    "depth_threshold",
    "mu_lower",
    "noisy_variant",
    "paley_zygmund_floor",
    "porter_thomas_tvd",
    "reference_constants",
    "tvd_lower_bound",
    "tvd_lower_bound_report",
    "tvd_upper_bound",
    "tvd_upper_bound_report",
    "typicality_tail",
    "typicality_tail_report",
    "typicality_threshold",
]
