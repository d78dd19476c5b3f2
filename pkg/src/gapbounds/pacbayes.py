"""Posterior-averaged gap bounds over a finite hypothesis class.

A finite family of statistics is scored on the realized sample, a Gibbs
posterior tilts the prior by those scores, and the same two deviation
radii that hold for a single statistic hold for posterior averages with
the KL divergence to the prior added to the exponent budget.  The module
also checks two exponential-moment certificates behind those bounds: a
subgaussian bound for the square-root form of the normalized posterior
gap, and a unit bound for its regularized likelihood-ratio form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bounds import BoundResult
from .distributions import ProductDistribution, SeedSpec, sample_product_batch
from .estimators import (
    NestedMcConfig,
    exact_semi_empirical_batch,
    has_exact_semi_empirical,
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
    "FiniteHypothesisClass",
    "PosteriorDistribution",
    "PosteriorTrials",
    "DegeneratePosteriorError",
    "AbsoluteContinuityError",
    "gibbs_posterior",
    "kl_divergence",
    "posterior_average",
    "pb_bound_scale_free",
    "pb_bound_logarithmic",
    "posterior_trials",
    "MomentRow",
    "MomentReport",
    "check_root_moment",
    "check_unit_moment",
]

_WEIGHT_TOL = 1e-12

# Substream roles inside a posterior-trials namespace.
_ROLE_SAMPLES = 0
_ROLE_MEANS = 1
_ROLE_VARIANCE = 2
_ROLE_EV = 3


class DegeneratePosteriorError(ValueError):
    """Every Gibbs weight vanished; the posterior is undefined."""


class AbsoluteContinuityError(ValueError):
    """The posterior puts mass where the prior has none."""


@dataclass(frozen=True)
class FiniteHypothesisClass:
    """Statistics of a common arity with a strictly positive prior."""

    hypotheses: tuple[Statistic, ...]
    prior: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "hypotheses", tuple(self.hypotheses))
        object.__setattr__(self, "prior", tuple(float(p) for p in self.prior))
        m = len(self.hypotheses)
        if m < 1:
            raise ValueError("hypothesis class must be nonempty")
        if len(self.prior) != m:
            raise ValueError(
                f"prior has {len(self.prior)} entries for {m} hypotheses"
            )
        if any(not (p > 0) for p in self.prior):
            raise ValueError("prior entries must all be strictly positive")
        if abs(sum(self.prior) - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"prior must sum to 1, got {sum(self.prior)!r}")

    @property
    def m(self) -> int:
        return len(self.hypotheses)

    @classmethod
    def with_uniform_prior(cls, hypotheses) -> "FiniteHypothesisClass":
        hyps = tuple(hypotheses)
        return cls(hyps, tuple(1.0 / len(hyps) for _ in hyps))


@dataclass(frozen=True)
class PosteriorDistribution:
    weights: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if len(self.weights) < 1:
            raise ValueError("posterior must be nonempty")
        if any(w < 0 for w in self.weights):
            raise ValueError("posterior weights must be nonnegative")
        if abs(sum(self.weights) - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"posterior must sum to 1, got {sum(self.weights)!r}")


def gibbs_posterior(
    cls: FiniteHypothesisClass, scores, beta: float
) -> PosteriorDistribution:
    """Posterior proportional to prior * exp(-beta * score), max-shifted.

    beta = 0 returns the prior exactly.  The shift makes the largest
    exponent zero, so the normalizer never underflows for finite inputs;
    the degenerate error is kept as a guard against non-finite scores.
    """
    s = np.asarray(scores, dtype=float)
    if s.shape != (cls.m,):
        raise ValueError(f"expected {cls.m} scores, got shape {s.shape}")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    if not math.isfinite(beta):
        raise ValueError(f"beta must be finite, got {beta}")
    logw = np.log(np.array(cls.prior)) - beta * s
    logw -= logw.max()
    w = np.exp(logw)
    z = float(w.sum())
    if not (z > 0) or not math.isfinite(z):
        raise DegeneratePosteriorError("degenerate posterior: all weights underflowed")
    w = w / z
    w = w / float(w.sum())  # renormalize so the tuple passes the sum check
    return PosteriorDistribution(tuple(float(x) for x in w))


def kl_divergence(posterior, prior) -> float:
    """KL(q || q0) = sum_i q_i log(q_i / q0_i) with the 0 log 0 = 0 convention."""
    q = np.asarray(
        posterior.weights if isinstance(posterior, PosteriorDistribution) else posterior,
        dtype=float,
    )
    q0 = np.asarray(
        prior.prior if isinstance(prior, FiniteHypothesisClass) else prior, dtype=float
    )
    if q.shape != q0.shape:
        raise ValueError(f"shape mismatch: {q.shape} vs {q0.shape}")
    if np.any((q > 0) & (q0 <= 0)):
        raise AbsoluteContinuityError(
            "absolute continuity violated: posterior mass where the prior has none"
        )
    total = 0.0
    for qi, q0i in zip(q, q0):
        if qi > 0:
            total += qi * math.log(qi / q0i)
    if total < 0:
        if total < -_WEIGHT_TOL:
            raise ValueError(f"KL computed negative beyond tolerance: {total}")
        total = 0.0
    return total


def posterior_average(posterior, values) -> float:
    """Posterior-weighted average in fixed index order."""
    q = np.asarray(
        posterior.weights if isinstance(posterior, PosteriorDistribution) else posterior,
        dtype=float,
    )
    v = np.asarray(values, dtype=float)
    if q.shape != v.shape:
        raise ValueError(f"shape mismatch: {q.shape} vs {v.shape}")
    total = 0.0
    for qi, vi in zip(q, v):
        total += qi * vi
    return total


def pb_bound_scale_free(qv: float, ev: float, kl: float, x: float) -> BoundResult:
    """Posterior radius sqrt(2 (ev + qv)(kl + 2x)), failure prob 2 exp(-x).

    With a single hypothesis (kl = 0) this reduces bit-for-bit to the
    single-statistic scale-free radius.
    """
    if not (qv >= 0) or not (ev >= 0):
        raise ValueError("variance proxies must be nonnegative")
    if not (kl >= 0):
        raise ValueError(f"kl must be nonnegative, got {kl}")
    if not (x > 0):
        raise ValueError(f"x must be positive, got {x}")
    radius = math.sqrt(2.0 * (ev + qv) * (kl + 2.0 * x))
    fp = 2.0 * math.exp(-x)
    return BoundResult(radius, fp, fp >= 1.0)


def pb_bound_logarithmic(qv: float, kl: float, y: float, x: float) -> BoundResult:
    """Posterior radius sqrt(2 (qv + y)(kl + x + (x/2) log(1 + qv/y))).

    Failure probability exp(-x); x below 1 is refused for the same
    reason as the single-statistic logarithmic bound.
    """
    if not (qv >= 0):
        raise ValueError("variance proxy must be nonnegative")
    if not (kl >= 0):
        raise ValueError(f"kl must be nonnegative, got {kl}")
    if not (y > 0) or not math.isfinite(y):
        raise ValueError(f"regularizer y must be positive and finite, got {y}")
    if not (x >= 1):
        raise ValueError(
            f"x below 1 is outside the valid regime of the logarithmic bound, got {x}"
        )
    radius = math.sqrt(2.0 * (qv + y) * (kl + x + 0.5 * x * math.log1p(qv / y)))
    fp = math.exp(-x)
    return BoundResult(radius, fp, fp >= 1.0)


@dataclass(frozen=True)
class PosteriorTrials:
    """Vectorized per-trial posterior quantities over independent samples."""

    qgap: np.ndarray  # posterior-averaged gap per trial
    qvar: np.ndarray  # posterior-averaged variance proxy per trial
    qvar_se: np.ndarray  # stderr of qvar (zeros on the closed-form path)
    kl: np.ndarray  # KL(posterior || prior) per trial


def posterior_trials(
    cls: FiniteHypothesisClass,
    pd: ProductDistribution,
    beta: float,
    n_trials: int,
    seed: SeedSpec,
    estimator: Optional[NestedMcConfig] = None,
    mean_replicates: int = 1_000_000,
) -> PosteriorTrials:
    """Draw trials and compute posterior-gap quantities for each.

    Every hypothesis is evaluated on the same sample draws (common random
    numbers).  The Gibbs score of a hypothesis is its realized statistic
    value.  Per-hypothesis variance proxies use registered closed forms
    when available, otherwise the nested estimator config (required in
    that case) on a per-hypothesis substream.
    """
    if n_trials < 1:
        raise ValueError(f"n_trials must be >= 1, got {n_trials}")
    samples = sample_product_batch(pd, seed.child(_ROLE_SAMPLES), n_trials)
    m = cls.m
    values = np.empty((n_trials, m))
    gaps = np.empty((n_trials, m))
    variances = np.empty((n_trials, m))
    var_ses = np.zeros((n_trials, m))
    for j, stat in enumerate(cls.hypotheses):
        values[:, j] = evaluate_batch(stat, samples)
        if has_closed_form_mean(stat):
            mean_j = closed_form_mean(stat, pd)
        else:
            mean_j = expected_value(
                stat, pd, MonteCarlo(mean_replicates), seed.child(_ROLE_MEANS, j)
            ).value
        gaps[:, j] = values[:, j] - mean_j
        if has_exact_semi_empirical(stat):
            variances[:, j] = exact_semi_empirical_batch(stat, pd, samples)
        else:
            if estimator is None:
                raise ValueError(
                    "hypotheses without a closed-form variance need a nested estimator config"
                )
            cfg = NestedMcConfig(
                estimator.inner_replicates,
                seed.child(_ROLE_VARIANCE, j),
                estimator.reuse_suffix,
            )
            variances[:, j], var_ses[:, j] = semi_empirical_totals_batch(
                stat, pd, samples, cfg
            )

    log_prior = np.log(np.array(cls.prior))
    logw = log_prior[None, :] - beta * values
    logw -= logw.max(axis=1, keepdims=True)
    w = np.exp(logw)
    z = w.sum(axis=1, keepdims=True)
    q = w / z

    with np.errstate(divide="ignore", invalid="ignore"):
        kl_terms = np.where(q > 0, q * (np.log(np.where(q > 0, q, 1.0)) - log_prior[None, :]), 0.0)
    kl = np.maximum(kl_terms.sum(axis=1), 0.0)

    qgap = (q * gaps).sum(axis=1)
    qvar = (q * variances).sum(axis=1)
    qvar_se = np.sqrt(((q * var_ses) ** 2).sum(axis=1))
    return PosteriorTrials(qgap=qgap, qvar=qvar, qvar_se=qvar_se, kl=kl)


@dataclass(frozen=True)
class MomentRow:
    parameter: float  # x for the root form, y for the unit form
    estimate: float
    stderr: float
    threshold: float
    margin: float
    verdict: str


@dataclass(frozen=True)
class MomentReport:
    which: str  # root | unit
    rows: tuple[MomentRow, ...]
    verdict: str
    n_trials: int
    ev: Optional[EstimateWithError] = None


_HEAVY_REL_SE = 0.20


def _moment_verdicts(rows_data, n_trials, which, ev=None):
    rows = []
    any_fail = False
    any_soft = False
    for param, est, se, threshold in rows_data:
        if not math.isfinite(est):
            rows.append(MomentRow(param, math.inf, math.inf, threshold, 0.0, "unstable"))
            any_soft = True
            continue
        margin = 3.0 * se
        if est <= threshold + margin:
            verdict = "pass"
        elif se > _HEAVY_REL_SE * max(abs(est), 1e-300):
            verdict = "inconclusive"
            any_soft = True
        else:
            verdict = "fail"
            any_fail = True
        rows.append(MomentRow(param, est, se, threshold, margin, verdict))
    overall = "fail" if any_fail else ("inconclusive" if any_soft else "pass")
    return MomentReport(which, tuple(rows), overall, n_trials, ev=ev)


def check_root_moment(
    cls: FiniteHypothesisClass,
    pd: ProductDistribution,
    beta: float,
    seed: SeedSpec,
    x_grid=(0.0, 0.5, 1.0),
    n_trials: int = 100_000,
    ev_trials: int = 10_000,
    estimator: Optional[NestedMcConfig] = None,
) -> MomentReport:
    """Check E[exp(x sqrt((qgap^2/(ev + qvar) - 2 kl)_+))] <= 2 exp(x^2).

    ev is the expectation over trials of the posterior-averaged variance
    proxy, pre-estimated on an independent substream; its lower 3-sigma
    value is used, which can only enlarge the left-hand side.
    """
    for x in x_grid:
        if not (x >= 0):
            raise ValueError(f"x grid must be nonnegative, got {x}")
    pre = posterior_trials(cls, pd, beta, ev_trials, seed.child(_ROLE_EV), estimator)
    ev_est = EstimateWithError(
        float(pre.qvar.mean()),
        float(pre.qvar.std(ddof=1) / math.sqrt(ev_trials)),
        ev_trials,
    )
    ev_eff = max(0.0, ev_est.value - 3.0 * ev_est.stderr)
    tr = posterior_trials(cls, pd, beta, n_trials, seed, estimator)
    u = np.sqrt(np.maximum(tr.qgap**2 / (ev_eff + tr.qvar) - 2.0 * tr.kl, 0.0))
    rows_data = []
    for x in x_grid:
        x = float(x)
        with np.errstate(over="ignore"):
            terms = np.exp(x * u)
        if not np.all(np.isfinite(terms)):
            rows_data.append((x, math.inf, math.inf, 2.0 * math.exp(x * x)))
            continue
        est = float(terms.mean())
        se = float(terms.std(ddof=1) / math.sqrt(n_trials))
        rows_data.append((x, est, se, 2.0 * math.exp(x * x)))
    return _moment_verdicts(rows_data, n_trials, "root", ev=ev_est)


def check_unit_moment(
    cls: FiniteHypothesisClass,
    pd: ProductDistribution,
    beta: float,
    seed: SeedSpec,
    y_grid=(0.1, 1.0),
    n_trials: int = 100_000,
    estimator: Optional[NestedMcConfig] = None,
) -> MomentReport:
    """Check E[(y / sqrt(y^2 + qvar)) exp(qgap^2 / (2 (y^2 + qvar)) - kl)] <= 1.

    The regularizer enters as y^2 inside both the damping factor and the
    exponent; the inequality holds for every y > 0 with threshold exactly 1.
    """
    for y in y_grid:
        if not (y > 0) or not math.isfinite(y):
            raise ValueError(f"y grid must be positive and finite, got {y}")
    tr = posterior_trials(cls, pd, beta, n_trials, seed, estimator)
    rows_data = []
    for y in y_grid:
        y = float(y)
        denom = y * y + tr.qvar
        with np.errstate(over="ignore"):
            terms = (y / np.sqrt(denom)) * np.exp(tr.qgap**2 / (2.0 * denom) - tr.kl)
        if not np.all(np.isfinite(terms)):
            rows_data.append((y, math.inf, math.inf, 1.0))
            continue
        est = float(terms.mean())
        se = float(terms.std(ddof=1) / math.sqrt(n_trials))
        rows_data.append((y, est, se, 1.0))
    return _moment_verdicts(rows_data, n_trials, "unit")
