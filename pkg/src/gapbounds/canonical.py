"""Monte Carlo checks for self-normalizing pairs.

A pair (A, B) with B >= 0 is *canonical* when E[exp(lambda A - lambda^2
B^2 / 2)] <= 1 for every real lambda.  The gap of a statistic paired
with the square root of its semi-empirical variance has this property,
which is what turns the variance estimators into confidence bounds.
This module estimates the exponential moment on a lambda grid, checks
the two tail inequalities such pairs satisfy, and checks the
square-to-linear exponential moment conversion used by the scale-free
bound.

All verdicts are three-way: an estimate that exceeds its threshold by
more than the margin fails, but only if its relative standard error is
small enough to trust; noisy exceedances come back "inconclusive" so
heavy tails never masquerade as violations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .distributions import ProductDistribution, SeedSpec, derive_substream, sample_product_batch
from .estimators import (
    NestedMcConfig,
    exact_semi_empirical_batch,
    semi_empirical_totals_batch,
)
from .stats import (
    EstimateWithError,
    MonteCarlo,
    Statistic,
    closed_form_mean,
    evaluate_batch,
    expected_value,
    has_closed_form_mean,
)

__all__ = [
    "GaussianScalePair",
    "GapVariancePair",
    "ScaledControlPair",
    "PairSampler",
    "AbsNormalU",
    "ConstantU",
    "USampler",
    "MgfRow",
    "MgfReport",
    "TailRow",
    "TailReport",
    "ClaimRow",
    "ClaimReport",
    "draw_pairs",
    "check_canonical_mgf",
    "check_tail_i",
    "check_tail_ii",
    "check_subgaussian_claim",
    "DEFAULT_LAMBDA_GRID",
]

DEFAULT_LAMBDA_GRID = (-3.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0, 3.0)

# Relative-stderr ceilings beyond which an exceedance is not trusted.
_HEAVY_TAIL_REL_SE = 0.20
_CLAIM_REL_SE = 0.50

# Substream roles inside a checker's namespace.
_ROLE_PAIRS = 0
_ROLE_PREESTIMATE = 1


@dataclass(frozen=True)
class GaussianScalePair:
    """A = sigma * g with g standard normal, B = sigma; canonical for sigma >= 0."""

    sigma: float
    kind = "gaussian_scale"

    def __post_init__(self):
        if not (self.sigma >= 0) or not math.isfinite(self.sigma):
            raise ValueError(f"sigma must be nonnegative and finite, got {self.sigma}")


@dataclass(frozen=True)
class GapVariancePair:
    """A = f(S) - E[f(S)], B = sqrt of the semi-empirical variance at S.

    The centering constant comes from the registered closed form when one
    exists, otherwise from a dedicated Monte Carlo pre-estimate on its
    own substream.  The variance uses the closed form or the nested
    estimator according to ``oracle``.
    """

    statistic: Statistic
    pd: ProductDistribution
    oracle: str = "nested_mc"
    inner_replicates: int = 2000
    reuse_suffix: bool = False
    mean_replicates: int = 1_000_000

    kind = "gap_variance"

    def __post_init__(self):
        if self.oracle not in ("closed_form", "nested_mc"):
            raise ValueError(f"oracle must be closed_form or nested_mc, got {self.oracle!r}")


@dataclass(frozen=True)
class ScaledControlPair:
    """Wraps another pair and multiplies B; used as a negative control."""

    base: "PairSampler"
    b_multiplier: float
    kind = "scaled_control"

    def __post_init__(self):
        if not (self.b_multiplier > 0) or not math.isfinite(self.b_multiplier):
            raise ValueError(f"b_multiplier must be positive, got {self.b_multiplier}")


PairSampler = Union[GaussianScalePair, GapVariancePair, ScaledControlPair]


def draw_pairs(pair: PairSampler, n_samples: int, seed: SeedSpec):
    """Draw ``n_samples`` realizations of (A, B) as two arrays."""
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    if isinstance(pair, GaussianScalePair):
        gen = derive_substream(seed.child(_ROLE_PAIRS))
        u = np.maximum(gen.random(n_samples), 2.0**-64)
        from scipy.special import ndtri

        a = pair.sigma * ndtri(u)
        b = np.full(n_samples, pair.sigma)
        return a, b
    if isinstance(pair, ScaledControlPair):
        a, b = draw_pairs(pair.base, n_samples, seed)
        return a, pair.b_multiplier * b
    if isinstance(pair, GapVariancePair):
        stat, pd = pair.statistic, pair.pd
        if has_closed_form_mean(stat):
            mean_value = closed_form_mean(stat, pd)
        else:
            mean_value = expected_value(
                stat, pd, MonteCarlo(pair.mean_replicates), seed.child(_ROLE_PREESTIMATE)
            ).value
        samples = sample_product_batch(pd, seed.child(_ROLE_PAIRS), n_samples)
        a = evaluate_batch(stat, samples) - mean_value
        if pair.oracle == "closed_form":
            totals = exact_semi_empirical_batch(stat, pd, samples)
        else:
            cfg = NestedMcConfig(
                pair.inner_replicates, seed.child(_ROLE_PAIRS, pd.n), pair.reuse_suffix
            )
            totals, _ = semi_empirical_totals_batch(stat, pd, samples, cfg)
        return a, np.sqrt(np.maximum(totals, 0.0))
    raise TypeError(f"unknown pair sampler: {pair!r}")


@dataclass(frozen=True)
class MgfRow:
    lam: float
    estimate: float
    stderr: float
    verdict: str  # pass | fail | inconclusive | unstable
    heavy_tail: bool


@dataclass(frozen=True)
class MgfReport:
    rows: tuple[MgfRow, ...]
    verdict: str  # pass | fail | inconclusive
    n_samples: int
    margin: float


def check_canonical_mgf(
    pair: PairSampler,
    seed: SeedSpec,
    lambda_grid=DEFAULT_LAMBDA_GRID,
    n_samples: int = 100_000,
    margin: float = 3.0,
) -> MgfReport:
    """Estimate E[exp(lambda A - lambda^2 B^2 / 2)] on a grid of lambdas.

    One set of (A, B) draws is shared across the grid; each row reduces
    in a fixed order, so the report is reproducible for equal inputs.  A
    row passes when its estimate is at most 1 + margin * stderr.  Rows
    whose estimate overflows are marked unstable, and an exceedance with
    relative stderr above 20% is inconclusive rather than a failure.
    """
    if n_samples < 100:
        raise ValueError(f"n_samples must be >= 100, got {n_samples}")
    a, b = draw_pairs(pair, n_samples, seed)
    b2 = b * b
    rows = []
    any_fail = False
    any_soft = False
    for lam in lambda_grid:
        lam = float(lam)
        with np.errstate(over="ignore", invalid="ignore"):
            terms = np.exp(lam * a - 0.5 * lam * lam * b2)
        if not np.all(np.isfinite(terms)):
            rows.append(MgfRow(lam, math.inf, math.inf, "unstable", True))
            any_soft = True
            continue
        est = float(terms.mean())
        se = float(terms.std(ddof=1) / math.sqrt(n_samples))
        heavy = se > _HEAVY_TAIL_REL_SE * max(abs(est), 1e-300)
        if est <= 1.0 + margin * se:
            verdict = "pass"
        elif heavy:
            verdict = "inconclusive"
            any_soft = True
        else:
            verdict = "fail"
            any_fail = True
        rows.append(MgfRow(lam, est, se, verdict, heavy))
    overall = "fail" if any_fail else ("inconclusive" if any_soft else "pass")
    return MgfReport(tuple(rows), overall, n_samples, margin)


@dataclass(frozen=True)
class TailRow:
    t: float
    frequency: float
    bound: float
    margin: float
    verdict: str  # pass | fail | vacuous


@dataclass(frozen=True)
class TailReport:
    which: str  # mean_scaled | regularized
    rows: tuple[TailRow, ...]
    verdict: str
    n_samples: int
    eb: Optional[EstimateWithError] = None
    y: Optional[float] = None


def _tail_rows(ratio: np.ndarray, t_grid, bound_fn, margin: float, n_samples: int):
    rows = []
    any_fail = False
    for t in t_grid:
        t = float(t)
        freq = float((ratio >= t).mean())
        bound = bound_fn(t)
        if bound >= 1.0:
            rows.append(TailRow(t, freq, bound, 0.0, "vacuous"))
            continue
        mrg = margin * math.sqrt(bound * (1.0 - bound) / n_samples)
        verdict = "pass" if freq <= bound + mrg else "fail"
        any_fail = any_fail or verdict == "fail"
        rows.append(TailRow(t, freq, bound, mrg, verdict))
    return rows, ("fail" if any_fail else "pass")


def check_tail_i(
    pair: PairSampler,
    seed: SeedSpec,
    t_grid=(1.0, 2.0, 3.0),
    n_samples: int = 100_000,
    eb: Optional[float] = None,
    eb_replicates: int = 100_000,
    margin: float = 3.0,
) -> TailReport:
    """Tail of |A| / sqrt(B^2 + E[B]^2) against sqrt(2) exp(-t^2 / 4).

    ``eb`` is E[B], supplied exactly when known.  When omitted it is
    pre-estimated from draws on a separate substream, never from the
    draws used for the frequency; the estimate is folded conservatively
    by using its lower 3-sigma value, which can only raise the measured
    frequency.
    """
    for t in t_grid:
        if not (t > 0):
            raise ValueError(f"tail thresholds must be positive, got {t}")
    if eb is not None:
        if not (eb >= 0) or not math.isfinite(eb):
            raise ValueError(f"eb must be nonnegative and finite, got {eb}")
        eb_est = EstimateWithError(float(eb), 0.0, 0)
    else:
        _, b_pre = draw_pairs(pair, eb_replicates, seed.child(_ROLE_PREESTIMATE, 1))
        eb_est = EstimateWithError(
            float(b_pre.mean()),
            float(b_pre.std(ddof=1) / math.sqrt(eb_replicates)),
            eb_replicates,
        )
    eb_eff = max(0.0, eb_est.value - margin * eb_est.stderr)
    a, b = draw_pairs(pair, n_samples, seed)
    denom = np.sqrt(b * b + eb_eff * eb_eff)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(denom > 0, np.abs(a) / np.where(denom > 0, denom, 1.0), math.inf)
        ratio = np.where((denom == 0) & (np.abs(a) == 0), 0.0, ratio)
    rows, verdict = _tail_rows(
        ratio, t_grid, lambda t: math.sqrt(2.0) * math.exp(-t * t / 4.0), margin, n_samples
    )
    return TailReport("mean_scaled", tuple(rows), verdict, n_samples, eb=eb_est)


def check_tail_ii(
    pair: PairSampler,
    seed: SeedSpec,
    y: float,
    t_grid=(math.sqrt(2.0), 2.0),
    n_samples: int = 100_000,
    margin: float = 3.0,
) -> TailReport:
    """Tail of |A| / sqrt((B^2 + y)(1 + log(1 + B^2/y)/2)) against exp(-t^2/2).

    Thresholds below sqrt(2) are refused: the inequality only holds from
    there up.
    """
    if not (y > 0) or not math.isfinite(y):
        raise ValueError(f"regularizer y must be positive and finite, got {y}")
    for t in t_grid:
        if t < math.sqrt(2.0) - 1e-12:
            raise ValueError(
                f"threshold {t} below sqrt(2) is outside the valid regime of the regularized tail"
            )
    a, b = draw_pairs(pair, n_samples, seed)
    b2 = b * b
    denom = np.sqrt((b2 + y) * (1.0 + 0.5 * np.log1p(b2 / y)))
    ratio = np.abs(a) / denom
    rows, verdict = _tail_rows(
        ratio, t_grid, lambda t: math.exp(-t * t / 2.0), margin, n_samples
    )
    return TailReport("regularized", tuple(rows), verdict, n_samples, y=y)


@dataclass(frozen=True)
class AbsNormalU:
    """U = |sigma * g| for standard normal g."""

    sigma: float
    kind = "abs_normal"

    def __post_init__(self):
        if not (self.sigma > 0) or not math.isfinite(self.sigma):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")


@dataclass(frozen=True)
class ConstantU:
    value: float
    kind = "constant"

    def __post_init__(self):
        if not (self.value >= 0) or not math.isfinite(self.value):
            raise ValueError(f"a nonnegative sampler needs value >= 0, got {self.value}")


USampler = Union[AbsNormalU, ConstantU]


def _draw_u(u_sampler: USampler, n: int, seed: SeedSpec) -> np.ndarray:
    gen = derive_substream(seed)
    if isinstance(u_sampler, AbsNormalU):
        from scipy.special import ndtri

        return np.abs(u_sampler.sigma * ndtri(np.maximum(gen.random(n), 2.0**-64)))
    if isinstance(u_sampler, ConstantU):
        return np.full(n, u_sampler.value)
    raise TypeError(f"unknown nonnegative sampler: {u_sampler!r}")


@dataclass(frozen=True)
class ClaimRow:
    x: float
    estimate: float
    stderr: float
    threshold: float
    margin: float
    verdict: str


@dataclass(frozen=True)
class ClaimReport:
    alpha: float
    c_estimate: EstimateWithError
    rows: tuple[ClaimRow, ...]
    verdict: str
    n_samples: int


def check_subgaussian_claim(
    u_sampler: USampler,
    seed: SeedSpec,
    alpha: float = 0.25,
    x_grid=(0.0, 0.5, 1.0, 2.0),
    n_samples: int = 100_000,
    margin: float = 3.0,
) -> ClaimReport:
    """Check E[exp(x U)] <= C(alpha) exp(x^2 / (4 alpha)) for U >= 0.

    C(alpha) = E[exp(alpha U^2)] is estimated from draws independent of
    those used for the linear moments; the two standard errors combine in
    quadrature for the margin.  If the C estimate itself carries more
    than 50% relative error the whole report is inconclusive.
    """
    if not (alpha > 0) or not math.isfinite(alpha):
        raise ValueError(f"alpha must be positive and finite, got {alpha}")
    for x in x_grid:
        if not (x >= 0):
            raise ValueError(f"x grid must be nonnegative, got {x}")
    if n_samples < 100:
        raise ValueError(f"n_samples must be >= 100, got {n_samples}")
    u_for_c = _draw_u(u_sampler, n_samples, seed.child(_ROLE_PREESTIMATE))
    with np.errstate(over="ignore"):
        c_terms = np.exp(alpha * u_for_c * u_for_c)
    if not np.all(np.isfinite(c_terms)):
        c_est = EstimateWithError(math.inf, math.inf, n_samples)
        return ClaimReport(alpha, c_est, (), "inconclusive", n_samples)
    c_est = EstimateWithError(
        float(c_terms.mean()),
        float(c_terms.std(ddof=1) / math.sqrt(n_samples)),
        n_samples,
    )
    if c_est.stderr > _CLAIM_REL_SE * abs(c_est.value):
        return ClaimReport(alpha, c_est, (), "inconclusive", n_samples)
    u = _draw_u(u_sampler, n_samples, seed.child(_ROLE_PAIRS))
    rows = []
    any_fail = False
    for x in x_grid:
        x = float(x)
        terms = np.exp(x * u)
        est = float(terms.mean())
        se = float(terms.std(ddof=1) / math.sqrt(n_samples))
        scale = math.exp(x * x / (4.0 * alpha))
        threshold = c_est.value * scale
        mrg = margin * math.sqrt(se**2 + (scale * c_est.stderr) ** 2)
        verdict = "pass" if est <= threshold + mrg else "fail"
        any_fail = any_fail or verdict == "fail"
        rows.append(ClaimRow(x, est, se, threshold, mrg, verdict))
    return ClaimReport(alpha, c_est, tuple(rows), "fail" if any_fail else "pass", n_samples)
