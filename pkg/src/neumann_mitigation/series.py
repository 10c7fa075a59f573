"""Truncated-series algebra: coefficients, truncation order, shot budgets.

The inverse of a column-stochastic noise matrix A expands as the geometric
series in (I - A); truncating after K+1 terms and regrouping by matrix
powers gives signed binomial coefficients on A^0..A^K.  All identities here
are exact integer arithmetic.  Logarithms are base 2 throughout.
"""

from __future__ import annotations

import math

from .exceptions import DeviceTooNoisyError, ValidationError

#: Largest truncation order with an exact integer budget; the combined
#: binomial for the shot count has 62 bits at 30 and overflows fixed-width
#: arithmetic beyond it.
MAX_TRUNCATION = 30


def coefficient(truncation: int, k: int) -> int:
    """Signed weight of the k-th matrix power in the regrouped series."""
    if truncation < 0:
        raise ValidationError(f"truncation order must be >= 0, got {truncation}")
    if not 0 <= k <= truncation:
        raise ValidationError(f"series index must lie in 0..{truncation}, got {k}")
    c = math.comb(truncation + 1, k + 1)
    return -c if k & 1 else c


def coefficients(truncation: int) -> tuple[int, ...]:
    """All series weights ``k = 0..truncation``; they sum to exactly 1."""
    return tuple(coefficient(truncation, k) for k in range(truncation + 1))


def optimal_truncation(epsilon: float, xi: float) -> int:
    """Smallest order whose worst-case series tail is below ``epsilon``.

    Floored at 0: when the requested precision already exceeds the
    resistance, a single term suffices.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValidationError(f"precision must lie in (0, 1), got {epsilon}")
    if xi >= 1.0:
        raise DeviceTooNoisyError(
            f"noise resistance {xi} >= 1: series mitigation needs a resistance below 1"
        )
    if xi <= 0.0:
        raise ValidationError(f"noise resistance must lie in (0, 1), got {xi}")
    return max(0, math.ceil(math.log2(epsilon) / math.log2(xi) - 1.0))


def truncation_bound(xi: float, truncation: int) -> float:
    """Worst-case bias of the order-``truncation`` combination: xi^(K+1)."""
    if truncation < 0:
        raise ValidationError(f"truncation order must be >= 0, got {truncation}")
    return float(xi) ** (truncation + 1)


def sample_budget(truncation: int, epsilon: float, delta: float) -> tuple[int, int]:
    """Variance factor and per-order shot count for a confidence-``delta`` run.

    The variance factor is the exact sum of squared series weights
    (a central binomial minus one); the shot count is the Hoeffding budget
    ``ceil(2 (K+1) factor log2(2/delta) / epsilon^2)``.
    """
    if truncation < 0:
        raise ValidationError(f"truncation order must be >= 0, got {truncation}")
    if truncation > MAX_TRUNCATION:
        raise ValidationError(
            f"truncation order {truncation} overflows the exact budget range "
            f"(max {MAX_TRUNCATION}); the device is too noisy for this precision"
        )
    if not 0.0 < epsilon < 1.0:
        raise ValidationError(f"precision must lie in (0, 1), got {epsilon}")
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"confidence tolerance must lie in (0, 1), got {delta}")
    factor = math.comb(2 * truncation + 2, truncation + 1) - 1
    shots = math.ceil(2.0 * (truncation + 1) * factor * math.log2(2.0 / delta) / epsilon**2)
    return factor, shots
