"""Monte Carlo summaries and bound verdicts.

Verdicts use the standardized gap between an estimate and its bound.
Tolerant grading gives the estimate the benefit of the doubt: a lower bound
passes while ``value >= bound - 3 sigma``, fails down to ``bound - 4 sigma``
and is a hard failure beyond that. Confident grading, used where a bound
must hold with the whole error bar, passes only when
``value - 3 sigma >= bound``. Exact quantities (zero standard error) are
compared with a fixed floating-point slack. Records carry the multipliers
through :func:`tolerance_fields`.
"""

from collections.abc import Sequence

import numpy as np
from scipy import stats

from rcslab.core.models import Verdict

SIGMA_FAIL = 3.0
SIGMA_HARD_FAIL = 4.0
EXACT_SLACK = 1e-12


def tolerance_fields(confident: bool = False) -> dict[str, float | str]:
    """Sigma multipliers and grading side behind a verdict, for report rows."""
    return {
        "sigma_fail": SIGMA_FAIL,
        "sigma_hard_fail": SIGMA_HARD_FAIL,
        "grading": "confident" if confident else "tolerant",
    }


def mean_stderr(values: Sequence[float] | np.ndarray) -> tuple[float, float]:
    """Sample mean and standard error of the mean."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("no samples")
    if arr.size == 1 or np.ptp(arr) == 0.0:
        return float(arr[0]), 0.0
    return float(arr.mean()), float(stats.sem(arr))


def _grade(gap: float, stderr: float, slack: float, confident: bool = False) -> Verdict:
    """Verdict for a gap that should be >= 0.

    Tolerant grading passes a gap down to -3 sigma; confident grading needs
    gap >= +3 sigma. Both call a gap beyond -4 sigma a hard failure.
    """
    margin = SIGMA_FAIL * stderr if confident else 0.0
    if gap - margin >= -slack:
        return Verdict.PASS
    if stderr <= 0.0:
        return Verdict.HARD_FAIL
    score = gap / stderr
    if not confident and score >= -SIGMA_FAIL:
        return Verdict.PASS
    if score >= -SIGMA_HARD_FAIL:
        return Verdict.FAIL
    return Verdict.HARD_FAIL


def compare_lower(
    value: float,
    stderr: float,
    bound: float,
    slack: float = EXACT_SLACK,
    *,
    confident: bool = False,
) -> Verdict:
    """Check value >= bound."""
    return _grade(value - bound, stderr, slack, confident)


def compare_upper(
    value: float,
    stderr: float,
    bound: float,
    slack: float = EXACT_SLACK,
    *,
    confident: bool = False,
) -> Verdict:
    """Check value <= bound."""
    return _grade(bound - value, stderr, slack, confident)


def compare_two_sided(
    value: float, stderr: float, reference: float, slack: float = EXACT_SLACK
) -> Verdict:
    """Check agreement with a reference value."""
    return _grade(-abs(value - reference), stderr, slack)


def worst(verdicts: Sequence[Verdict]) -> Verdict:
    """The most severe verdict; pass when there is nothing to grade."""
    for verdict in (Verdict.HARD_FAIL, Verdict.FAIL):
        if verdict in verdicts:
            return verdict
    return Verdict.PASS
