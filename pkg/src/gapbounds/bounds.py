"""Deviation radii driven by a variance proxy, plus a classical baseline.

Two self-normalized bounds are exposed.  The scale-free form needs both
the realized variance proxy v and its expectation ev and holds for any
x > 0 with failure probability sqrt(2) * exp(-x).  The logarithmic form
replaces ev with a user-chosen regularizer y > 0 at the price of a
log(1 + v/y) factor and the restriction x >= 1, with failure probability
exp(-x).  The McDiarmid radius is included as the bounded-differences
comparison point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .stats import UnboundedStatisticError  # noqa: F401  (re-exported for callers)

__all__ = ["BoundResult", "bound_scale_free", "bound_logarithmic", "mcdiarmid_radius"]

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class BoundResult:
    """A deviation radius, the failure probability it buys, and a vacuity flag."""

    radius: float
    failure_probability: float
    vacuous: bool


def _check_nonneg(value: float, what: str) -> None:
    if not (value >= 0) or not math.isfinite(value):
        raise ValueError(f"{what} must be finite and nonnegative, got {value}")


def bound_scale_free(v: float, ev: float, x: float) -> BoundResult:
    """Radius 2 sqrt((v + ev) x), failure probability sqrt(2) exp(-x), x > 0.

    Scale equivariant: scaling v and ev by c^2 scales the radius by c.
    Flagged vacuous when the failure probability reaches 1, i.e. for
    x <= log(2)/2.
    """
    _check_nonneg(v, "variance proxy v")
    _check_nonneg(ev, "expected variance proxy ev")
    if not (x > 0):
        raise ValueError(f"x must be positive, got {x}")
    radius = 2.0 * math.sqrt((v + ev) * x)
    fp = SQRT2 * math.exp(-x)
    return BoundResult(radius, fp, fp >= 1.0)


def bound_logarithmic(v: float, y: float, x: float) -> BoundResult:
    """Radius sqrt(2 (v + y) (1 + log(1 + v/y)/2) x), failure prob exp(-x).

    Valid only for x >= 1; smaller x is refused because the underlying
    tail inequality needs t >= sqrt(2).  The log term uses log1p so tiny
    v/y ratios lose no precision.
    """
    _check_nonneg(v, "variance proxy v")
    if not (y > 0) or not math.isfinite(y):
        raise ValueError(f"regularizer y must be positive and finite, got {y}")
    if not (x >= 1):
        raise ValueError(
            f"x below 1 is outside the valid regime of the logarithmic bound, got {x}"
        )
    radius = math.sqrt(2.0 * (v + y) * (1.0 + 0.5 * math.log1p(v / y)) * x)
    fp = math.exp(-x)
    return BoundResult(radius, fp, fp >= 1.0)


def mcdiarmid_radius(diff_bounds, delta: float) -> float:
    """Bounded-differences radius sqrt(sum c_k^2 log(2/delta) / 2)."""
    c = np.asarray(diff_bounds, dtype=float)
    if c.ndim != 1 or len(c) < 1:
        raise ValueError("diff_bounds must be a nonempty vector")
    if not np.all(np.isfinite(c)) or np.any(c < 0):
        raise UnboundedStatisticError(
            "no bounded differences: constants must be finite and nonnegative"
        )
    if not (0 < delta < 1):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    total = float(sum(ck * ck for ck in c))
    return math.sqrt(0.5 * total * math.log(2.0 / delta))
