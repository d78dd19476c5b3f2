"""Replace-one variance estimators for the gap of a statistic.

Two related quantities are estimated for a realized sample s and a
statistic f over a product law:

* the semi-empirical variance, whose k-th term conditions on the first k
  coordinates and averages (f(S) - f(S with coordinate k replaced))^2
  over a fresh suffix and a fresh replacement drawn together, and

* the replace-one positive-part variance, whose k-th term conditions on
  the whole realized sample and averages the squared positive part of
  f(s) - f(s with coordinate k replaced).

The coupling in the first quantity matters: each inner replicate draws
one suffix (coordinates k+1..n) and evaluates the statistic twice with
that same suffix, once with the realized coordinate k and once with the
replacement.  Drawing separate suffixes for the two evaluations estimates
a different (larger) quantity and is carefully avoided here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import (
    ProductDistribution,
    Sample,
    SeedSpec,
    derive_substream,
    sample_coordinate,
    sample_product_batch,
)
from .stats import (
    Constant,
    EstimateWithError,
    Mean,
    NoClosedFormError,
    Statistic,
    WeightedSum,
    evaluate_batch,
    _check_arity,
)

__all__ = [
    "NestedMcConfig",
    "VarianceBreakdown",
    "InfiniteVarianceError",
    "estimate_semi_empirical",
    "estimate_efron_stein",
    "estimate_mean_semi_empirical",
    "exact_semi_empirical",
    "exact_mean_semi_empirical",
    "has_exact_semi_empirical",
    "semi_empirical_totals_batch",
    "exact_semi_empirical_batch",
]

# Substream roles under an estimator's seed namespace.  Each coordinate k
# draws from its own stream, so changing the replicate count for one
# coordinate never perturbs another's draws; within a stream, replicate r
# of a single-sample estimate occupies a fixed block of uniforms.
_ROLE_FRESH = 0
_ROLE_COPY = 1
_ROLE_OUTER = 2
_ROLE_REPLACE = 3

_CHUNK_ELEMENTS = 8_000_000


class InfiniteVarianceError(ValueError):
    """A closed-form path was asked to use a coordinate with infinite variance."""


@dataclass(frozen=True)
class NestedMcConfig:
    """Inner Monte Carlo settings for the replace-one estimators.

    ``reuse_suffix`` switches on common random numbers: a single
    independent copy of the whole vector is drawn per replicate and
    shared across coordinates, instead of fresh draws per coordinate.
    """

    inner_replicates: int
    seed: SeedSpec
    reuse_suffix: bool = False

    def __post_init__(self):
        if self.inner_replicates < 2:
            raise ValueError(
                f"inner_replicates must be >= 2, got {self.inner_replicates}"
            )


@dataclass(frozen=True)
class VarianceBreakdown:
    """Per-coordinate variance terms plus their total.

    ``total.value`` is the plain left-to-right sum of the per-coordinate
    values; ``total.stderr`` combines per-coordinate errors in quadrature,
    which treats the coordinate estimates as uncorrelated (exact unless
    suffix draws are shared via ``reuse_suffix``).
    """

    per_k: tuple[EstimateWithError, ...]
    total: EstimateWithError
    heavy_tail: bool = False


def _total(per_k: list[EstimateWithError], replicates: int, heavy: bool) -> VarianceBreakdown:
    value = 0.0
    var = 0.0
    for e in per_k:
        value += e.value
        var += e.stderr**2
    return VarianceBreakdown(
        per_k=tuple(per_k),
        total=EstimateWithError(value, math.sqrt(var), replicates),
        heavy_tail=heavy,
    )


def _coupled_sq_diffs(stat, blk, k, zprime, suffix):
    """Squared differences for coordinate k over a (b, m) replicate block.

    ``blk`` holds the realized prefixes (b, n); both statistic evaluations
    share the suffix draws, differing only in coordinate k.
    """
    b, m = zprime.shape
    n = blk.shape[1]
    mat = np.empty((b, m, n))
    mat[:, :, : k + 1] = blk[:, None, : k + 1]
    if k + 1 < n:
        mat[:, :, k + 1 :] = suffix
    f_kept = evaluate_batch(stat, mat)
    mat[:, :, k] = zprime
    f_replaced = evaluate_batch(stat, mat)
    d = f_kept - f_replaced
    return d * d


def _draw_fresh(pd, gen, k, b, m):
    """Draw the replacement and suffix for coordinate k from one stream.

    One uniform block of width 1 + (n-k-1) per replicate, transformed
    column-wise: column 0 is the replacement for coordinate k, the rest
    are the suffix coordinates in index order.  Replicate r of a
    single-sample estimate therefore sits at a fixed stream offset no
    matter how many replicates follow it.
    """
    n = pd.n
    width = 1 + (n - k - 1)
    u = gen.random((b, m, width))
    zprime = pd.coordinates[k].from_uniform(u[:, :, 0])
    if width > 1:
        suffix = np.empty((b, m, n - k - 1))
        for j in range(k + 1, n):
            suffix[:, :, j - k - 1] = pd.coordinates[j].from_uniform(u[:, :, 1 + j - k - 1])
    else:
        suffix = None
    return zprime, suffix


def _draw_copy(pd, gen, b, m):
    """Draw a full independent copy (b, m, n), coordinate-wise."""
    u = gen.random((b, m, pd.n))
    copy = np.empty((b, m, pd.n))
    for j, dist in enumerate(pd.coordinates):
        copy[:, :, j] = dist.from_uniform(u[:, :, j])
    return copy


def _semi_empirical_per_k(stat, pd, samples, cfg):
    """Per-coordinate values and stderrs, shape (N, n) each, chunked over N."""
    samples = np.asarray(samples, dtype=float)
    N, n = samples.shape
    m = cfg.inner_replicates
    gens = [derive_substream(cfg.seed.child(_ROLE_FRESH, k)) for k in range(n)]
    copy_gen = derive_substream(cfg.seed.child(_ROLE_COPY))
    vals = np.empty((N, n))
    ses = np.empty((N, n))
    step = max(1, _CHUNK_ELEMENTS // (m * n))
    root_m = math.sqrt(m)
    for start in range(0, N, step):
        blk = samples[start : start + step]
        b = blk.shape[0]
        copy = _draw_copy(pd, copy_gen, b, m) if cfg.reuse_suffix else None
        for k in range(n):
            if cfg.reuse_suffix:
                zprime = copy[:, :, k]
                suffix = copy[:, :, k + 1 :] if k + 1 < n else None
            else:
                zprime, suffix = _draw_fresh(pd, gens[k], k, b, m)
            sq = _coupled_sq_diffs(stat, blk, k, zprime, suffix)
            vals[start : start + b, k] = sq.mean(axis=1)
            ses[start : start + b, k] = sq.std(axis=1, ddof=1) / root_m
    return vals, ses


def estimate_semi_empirical(
    stat: Statistic,
    pd: ProductDistribution,
    sample: Sample,
    cfg: NestedMcConfig,
) -> VarianceBreakdown:
    """Nested Monte Carlo estimate of the semi-empirical variance at ``sample``."""
    s = np.asarray(sample.values if isinstance(sample, Sample) else sample, dtype=float)
    _check_arity(stat, pd.n)
    if len(s) != pd.n:
        raise ValueError(f"sample has {len(s)} coordinates, distribution has {pd.n}")
    vals, ses = _semi_empirical_per_k(stat, pd, s[None, :], cfg)
    per_k = [
        EstimateWithError(float(vals[0, k]), float(ses[0, k]), cfg.inner_replicates)
        for k in range(pd.n)
    ]
    return _total(per_k, cfg.inner_replicates, pd.has_infinite_variance())


def estimate_efron_stein(
    stat: Statistic,
    pd: ProductDistribution,
    sample: Sample,
    cfg: NestedMcConfig,
) -> VarianceBreakdown:
    """Replace-one positive-part variance, conditioning on the whole sample.

    The realized vector is held fixed; only the replacement for
    coordinate k is drawn, and the difference is clipped at zero before
    squaring.
    """
    s = np.asarray(sample.values if isinstance(sample, Sample) else sample, dtype=float)
    _check_arity(stat, pd.n)
    if len(s) != pd.n:
        raise ValueError(f"sample has {len(s)} coordinates, distribution has {pd.n}")
    n = pd.n
    m = cfg.inner_replicates
    f_s = float(evaluate_batch(stat, s[None, :])[0])
    per_k = []
    mat = np.empty((m, n))
    for k in range(n):
        gen = derive_substream(cfg.seed.child(_ROLE_REPLACE, k))
        zprime = sample_coordinate(pd.coordinates[k], gen, m)
        mat[:, :] = s[None, :]
        mat[:, k] = zprime
        f_rep = evaluate_batch(stat, mat)
        pos = np.maximum(f_s - f_rep, 0.0)
        sq = pos * pos
        per_k.append(
            EstimateWithError(float(sq.mean()), float(sq.std(ddof=1) / math.sqrt(m)), m)
        )
    return _total(per_k, m, pd.has_infinite_variance())


def estimate_mean_semi_empirical(
    stat: Statistic,
    pd: ProductDistribution,
    outer: int,
    cfg: NestedMcConfig,
) -> EstimateWithError:
    """Average of semi-empirical totals over ``outer`` independent samples."""
    if outer < 2:
        raise ValueError(f"outer must be >= 2, got {outer}")
    samples = sample_product_batch(pd, cfg.seed.child(_ROLE_OUTER), outer)
    vals, _ = _semi_empirical_per_k(stat, pd, samples, cfg)
    totals = vals.sum(axis=1)
    return EstimateWithError(
        float(totals.mean()), float(totals.std(ddof=1) / math.sqrt(outer)), outer
    )


def semi_empirical_totals_batch(
    stat: Statistic,
    pd: ProductDistribution,
    samples: np.ndarray,
    cfg: NestedMcConfig,
):
    """Totals and their stderrs for a batch of samples, shapes (N,) and (N,).

    Used by runners that need the variance at many realized samples; the
    draw-to-sample assignment depends on the batch as a whole, so equal
    (statistic, law, batch, config) inputs reproduce exactly.
    """
    vals, ses = _semi_empirical_per_k(stat, pd, samples, cfg)
    totals = vals.sum(axis=1)
    total_ses = np.sqrt((ses**2).sum(axis=1))
    return totals, total_ses


def _closed_form_weights(stat: Statistic, n: int):
    if isinstance(stat, Constant):
        return np.zeros(n)
    if isinstance(stat, WeightedSum):
        return np.array(stat.weights)
    if isinstance(stat, Mean):
        return np.full(n, 1.0 / n)
    return None


def has_exact_semi_empirical(stat: Statistic) -> bool:
    """True when the semi-empirical variance has a registered closed form."""
    return isinstance(stat, (Constant, WeightedSum, Mean))


def exact_semi_empirical(
    stat: Statistic, pd: ProductDistribution, sample: Sample
) -> VarianceBreakdown:
    """Closed-form semi-empirical variance for linear statistics.

    For a weighted sum the k-th term is w_k^2 ((s_k - mu_k)^2 + var_k):
    the suffix cancels in the coupled difference, leaving the second
    moment of s_k minus an independent replacement.
    """
    s = np.asarray(sample.values if isinstance(sample, Sample) else sample, dtype=float)
    _check_arity(stat, pd.n)
    if len(s) != pd.n:
        raise ValueError(f"sample has {len(s)} coordinates, distribution has {pd.n}")
    w = _closed_form_weights(stat, pd.n)
    if w is None:
        raise NoClosedFormError(
            f"no closed form registered for the semi-empirical variance of {type(stat).__name__}"
        )
    if isinstance(stat, Constant):
        per_k = [EstimateWithError(0.0, 0.0, 0) for _ in range(pd.n)]
        return _total(per_k, 0, False)
    if pd.has_infinite_variance():
        raise InfiniteVarianceError(
            "infinite variance: closed-form path refused; use the Monte Carlo path, "
            "which reports a heavy-tail caveat"
        )
    means = pd.means()
    variances = pd.variances()
    per_k = [
        EstimateWithError(
            float(w[k] ** 2 * ((s[k] - means[k]) ** 2 + variances[k])), 0.0, 0
        )
        for k in range(pd.n)
    ]
    return _total(per_k, 0, False)


def exact_semi_empirical_batch(
    stat: Statistic, pd: ProductDistribution, samples: np.ndarray
) -> np.ndarray:
    """Closed-form totals for a batch of samples, shape (N,)."""
    samples = np.asarray(samples, dtype=float)
    _check_arity(stat, samples.shape[1])
    w = _closed_form_weights(stat, pd.n)
    if w is None:
        raise NoClosedFormError(
            f"no closed form registered for the semi-empirical variance of {type(stat).__name__}"
        )
    if isinstance(stat, Constant):
        return np.zeros(samples.shape[0])
    if pd.has_infinite_variance():
        raise InfiniteVarianceError(
            "infinite variance: closed-form path refused; use the Monte Carlo path, "
            "which reports a heavy-tail caveat"
        )
    means = pd.means()
    variances = pd.variances()
    acc = w[0] ** 2 * ((samples[:, 0] - means[0]) ** 2 + variances[0])
    for k in range(1, pd.n):
        acc = acc + w[k] ** 2 * ((samples[:, k] - means[k]) ** 2 + variances[k])
    return acc


def exact_mean_semi_empirical(stat: Statistic, pd: ProductDistribution) -> float:
    """Closed-form expectation of the semi-empirical total: 2 sum_k w_k^2 var_k."""
    _check_arity(stat, pd.n)
    w = _closed_form_weights(stat, pd.n)
    if w is None:
        raise NoClosedFormError(
            f"no closed form registered for the mean semi-empirical variance of {type(stat).__name__}"
        )
    if isinstance(stat, Constant):
        return 0.0
    if pd.has_infinite_variance():
        raise InfiniteVarianceError(
            "infinite variance: closed-form path refused; use the Monte Carlo path, "
            "which reports a heavy-tail caveat"
        )
    variances = pd.variances()
    return float(sum(2.0 * w[k] ** 2 * variances[k] for k in range(pd.n)))
