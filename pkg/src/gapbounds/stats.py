"""Statistics of a sample vector and their exact or Monte Carlo expectations."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .distributions import ProductDistribution, Sample, SeedSpec, sample_product_batch

__all__ = [
    "WeightedSum",
    "Mean",
    "Max",
    "SoftMax",
    "PairwiseUStat",
    "Constant",
    "Statistic",
    "ClosedForm",
    "MonteCarlo",
    "ExpectationMethod",
    "EstimateWithError",
    "ArityError",
    "NoClosedFormError",
    "UnboundedStatisticError",
    "evaluate",
    "evaluate_batch",
    "has_closed_form_mean",
    "closed_form_mean",
    "expected_value",
    "gap",
    "bounded_difference_constants",
]

SQUARED_DIFFERENCE = "squared_difference"
PRODUCT = "product"


class ArityError(ValueError):
    """Statistic and input vector disagree on dimension."""


class NoClosedFormError(ValueError):
    """A closed-form expectation was requested where none is registered."""


class UnboundedStatisticError(ValueError):
    """No bounded-differences constants exist for this statistic/distribution pair."""


@dataclass(frozen=True)
class WeightedSum:
    weights: tuple[float, ...]
    kind = "weighted_sum"

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.weights) < 1:
            raise ValueError("weighted sum needs at least one weight")
        if not all(math.isfinite(w) for w in self.weights):
            raise ValueError("weights must be finite")


@dataclass(frozen=True)
class Mean:
    kind = "mean"


@dataclass(frozen=True)
class Max:
    kind = "max"


@dataclass(frozen=True)
class SoftMax:
    """Smooth maximum t * log(sum_i exp(v_i / t)); tends to Max as t -> 0+."""

    temperature: float
    kind = "softmax"

    def __post_init__(self):
        if not (self.temperature > 0) or not math.isfinite(self.temperature):
            raise ValueError(f"temperature must be positive and finite, got {self.temperature}")


@dataclass(frozen=True)
class PairwiseUStat:
    """Order-two U-statistic over ordered pairs, normalized by n(n-1)."""

    kernel: str
    kind = "pairwise_u"

    def __post_init__(self):
        if self.kernel not in (SQUARED_DIFFERENCE, PRODUCT):
            raise ValueError(f"unknown pairwise kernel: {self.kernel!r}")


@dataclass(frozen=True)
class Constant:
    value: float
    kind = "constant"

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError("constant value must be finite")


Statistic = Union[WeightedSum, Mean, Max, SoftMax, PairwiseUStat, Constant]


def _check_arity(stat: Statistic, n: int) -> None:
    if n < 1:
        raise ArityError("arity mismatch: empty input vector")
    if isinstance(stat, WeightedSum) and len(stat.weights) != n:
        raise ArityError(
            f"arity mismatch: statistic expects {len(stat.weights)} coordinates, got {n}"
        )
    if isinstance(stat, PairwiseUStat) and n < 2:
        raise ArityError("arity mismatch: pairwise statistic needs at least two coordinates")


def evaluate_batch(stat: Statistic, values: np.ndarray) -> np.ndarray:
    """Evaluate the statistic along the last axis of ``values``.

    Reductions iterate over coordinates in index order with elementwise
    accumulators, so results are reproducible bit-for-bit and independent
    of any BLAS threading.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    _check_arity(stat, n)

    if isinstance(stat, Constant):
        return np.full(values.shape[:-1], stat.value)

    if isinstance(stat, WeightedSum):
        acc = stat.weights[0] * values[..., 0]
        for j in range(1, n):
            acc = acc + stat.weights[j] * values[..., j]
        return acc

    if isinstance(stat, Mean):
        acc = values[..., 0].copy()
        for j in range(1, n):
            acc += values[..., j]
        return acc / n

    if isinstance(stat, Max):
        acc = values[..., 0].copy()
        for j in range(1, n):
            np.maximum(acc, values[..., j], out=acc)
        return acc

    if isinstance(stat, SoftMax):
        t = stat.temperature
        shift = values[..., 0].copy()
        for j in range(1, n):
            np.maximum(shift, values[..., j], out=shift)
        # The shifted exponents saturate to -inf (hence exp 0) for entries
        # far below the maximum; that is the point of the shift.
        with np.errstate(over="ignore"):
            acc = np.exp((values[..., 0] - shift) / t)
            for j in range(1, n):
                acc += np.exp((values[..., j] - shift) / t)
        return shift + t * np.log(acc)

    if isinstance(stat, PairwiseUStat):
        s1 = values[..., 0].copy()
        s2 = values[..., 0] ** 2
        for j in range(1, n):
            s1 += values[..., j]
            s2 += values[..., j] ** 2
        norm = n * (n - 1)
        if stat.kernel == SQUARED_DIFFERENCE:
            # sum_{i != j} (v_i - v_j)^2 = 2 (n sum v^2 - (sum v)^2)
            return 2.0 * (n * s2 - s1**2) / norm
        # product kernel: sum_{i != j} v_i v_j = (sum v)^2 - sum v^2
        return (s1**2 - s2) / norm

    raise TypeError(f"unknown statistic: {stat!r}")


def evaluate(stat: Statistic, values) -> float:
    """Evaluate the statistic on a single vector."""
    if isinstance(values, Sample):
        values = values.values
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1:
        raise ArityError("evaluate expects a single vector; use evaluate_batch for batches")
    return float(evaluate_batch(stat, arr[None, :])[0])


@dataclass(frozen=True)
class ClosedForm:
    kind = "closed_form"


@dataclass(frozen=True)
class MonteCarlo:
    replicates: int
    kind = "monte_carlo"

    def __post_init__(self):
        if self.replicates < 2:
            raise ValueError(f"monte carlo needs at least 2 replicates, got {self.replicates}")


ExpectationMethod = Union[ClosedForm, MonteCarlo]


@dataclass(frozen=True)
class EstimateWithError:
    """A point estimate, its standard error, and the replicate count behind it.

    ``stderr`` is 0 for closed-form values (replicates == 0) and may also
    collapse to 0 for degenerate inputs whose replicates are all equal.
    """

    value: float
    stderr: float
    replicates: int

    def __post_init__(self):
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")


def has_closed_form_mean(stat: Statistic) -> bool:
    return isinstance(stat, (WeightedSum, Mean, Constant)) or (
        isinstance(stat, PairwiseUStat) and stat.kernel == PRODUCT
    )


def closed_form_mean(stat: Statistic, pd: ProductDistribution) -> float:
    """Exact E[f(S)] for the statistics that admit one under independence."""
    _check_arity(stat, pd.n)
    if isinstance(stat, Constant):
        return stat.value
    if isinstance(stat, (WeightedSum, Mean, PairwiseUStat)) and pd.has_infinite_mean():
        raise NoClosedFormError("no closed form: a coordinate mean is infinite")
    if isinstance(stat, WeightedSum):
        m = pd.means()
        return float(sum(w * mu for w, mu in zip(stat.weights, m)))
    if isinstance(stat, Mean):
        return float(pd.means().mean())
    if isinstance(stat, PairwiseUStat) and stat.kernel == PRODUCT:
        m = pd.means()
        s1 = float(m.sum())
        s2 = float((m**2).sum())
        return (s1**2 - s2) / (pd.n * (pd.n - 1))
    raise NoClosedFormError(f"no closed form registered for {type(stat).__name__}")


def expected_value(
    stat: Statistic,
    pd: ProductDistribution,
    method: ExpectationMethod,
    seed: SeedSpec | None = None,
) -> EstimateWithError:
    """E[f(S)] by registered closed form or by vectorized Monte Carlo."""
    _check_arity(stat, pd.n)
    if isinstance(method, ClosedForm):
        return EstimateWithError(closed_form_mean(stat, pd), 0.0, 0)
    if seed is None:
        raise ValueError("monte carlo expectation needs a seed spec")
    draws = sample_product_batch(pd, seed, method.replicates)
    vals = evaluate_batch(stat, draws)
    est = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(method.replicates))
    return EstimateWithError(est, se, method.replicates)


def gap(stat: Statistic, sample, mean_value: float) -> float:
    """f(s) minus the supplied mean value."""
    return evaluate(stat, sample) - mean_value


def bounded_difference_constants(stat: Statistic, pd: ProductDistribution) -> np.ndarray:
    """Per-coordinate bounded-differences constants, when they exist.

    The constants are safe (not necessarily tight) upper bounds on how far
    replacing one coordinate can move the statistic, valid over the full
    coordinate supports.  Raises for any statistic/distribution pair with
    an unbounded reach.
    """
    _check_arity(stat, pd.n)
    n = pd.n
    if isinstance(stat, Constant):
        return np.zeros(n)

    supports = [c.support() for c in pd.coordinates]
    ranges = np.array([hi - lo for lo, hi in supports])
    if not np.all(np.isfinite(ranges)):
        raise UnboundedStatisticError(
            "no bounded differences: a coordinate has unbounded support"
        )

    if isinstance(stat, WeightedSum):
        return np.abs(np.array(stat.weights)) * ranges
    if isinstance(stat, Mean):
        return ranges / n
    if isinstance(stat, (Max, SoftMax)):
        # Both are 1-Lipschitz in each coordinate.
        return ranges.copy()
    if isinstance(stat, PairwiseUStat):
        lo_all = min(lo for lo, _ in supports)
        hi_all = max(hi for _, hi in supports)
        if stat.kernel == SQUARED_DIFFERENCE:
            # |(a-b)^2 - (a'-b)^2| <= |a-a'| * 2(hi-lo) over the global range.
            return ranges * (4.0 * (hi_all - lo_all) / n)
        mag = max(abs(lo_all), abs(hi_all))
        return ranges * (2.0 * mag / n)
    raise TypeError(f"unknown statistic: {stat!r}")
