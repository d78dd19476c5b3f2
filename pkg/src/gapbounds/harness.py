"""Scenario runners: coverage sweeps and delegating wrappers for the checkers.

Determinism contract: every trial draws from substreams derived from the
master seed and the trial index, and reductions happen in trial order, so
results are byte-identical for any worker count.  Workers only change how
trial tasks are scheduled, never what any task computes.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bounds import mcdiarmid_radius
from .canonical import (
    ClaimReport,
    MgfReport,
    PairSampler,
    TailReport,
    USampler,
    check_canonical_mgf,
    check_subgaussian_claim,
    check_tail_i,
    check_tail_ii,
)
from .distributions import ProductDistribution, Sample, SeedSpec, sample_product
from .estimators import (
    NestedMcConfig,
    VarianceBreakdown,
    estimate_efron_stein,
    estimate_mean_semi_empirical,
    estimate_semi_empirical,
    exact_mean_semi_empirical,
    exact_semi_empirical,
    has_exact_semi_empirical,
)
from .pacbayes import (
    FiniteHypothesisClass,
    MomentReport,
    check_root_moment,
    check_unit_moment,
    posterior_trials,
)
from .stats import (
    EstimateWithError,
    MonteCarlo,
    Statistic,
    bounded_difference_constants,
    closed_form_mean,
    evaluate,
    expected_value,
    has_closed_form_mean,
)

__all__ = [
    "EstimatorSpec",
    "BoundSpec",
    "EstimateScenario",
    "CoverageScenario",
    "CanonicalScenario",
    "TailsScenario",
    "ClaimScenario",
    "PacBayesScenario",
    "TrialRecord",
    "CoverageCell",
    "CoverageReport",
    "EstimateReport",
    "TailsBundle",
    "PacBayesMoments",
    "run_estimate",
    "run_coverage",
    "run_canonical",
    "run_tails",
    "run_claim",
    "run_pacbayes",
]

ORACLE_CLOSED_FORM = "closed_form"
ORACLE_NESTED_MC = "nested_mc"

# Top-level substream tags that can never collide with a trial index.
_TAG_MEAN = 2**63
_TAG_EV = 2**63 + 1

# Roles under a trial's label.
_TRIAL_SAMPLE = 0
_TRIAL_ESTIMATOR = 1


@dataclass(frozen=True)
class EstimatorSpec:
    inner_replicates: int = 2000
    reuse_suffix: bool = False

    def __post_init__(self):
        if self.inner_replicates < 2:
            raise ValueError(
                f"inner_replicates must be >= 2, got {self.inner_replicates}"
            )


@dataclass(frozen=True)
class BoundSpec:
    """One bound to sweep: which radius, and the grid of parameters."""

    bound_id: str  # scale_free | logarithmic | mcdiarmid
    xs: tuple[float, ...] = ()
    ys: tuple[float, ...] = ()
    deltas: tuple[float, ...] = ()

    def __post_init__(self):
        if self.bound_id not in ("scale_free", "logarithmic", "mcdiarmid"):
            raise ValueError(f"unknown bound id: {self.bound_id!r}")


@dataclass(frozen=True)
class EstimateScenario:
    pd: ProductDistribution
    statistic: Statistic
    oracle: str
    estimator: EstimatorSpec
    master_seed: int
    sample: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class CoverageScenario:
    pd: ProductDistribution
    statistic: Statistic
    oracle: str
    estimator: EstimatorSpec
    bounds: tuple[BoundSpec, ...]
    trials: int
    master_seed: int
    mean_replicates: int = 1_000_000
    ev_outer: int = 2000


@dataclass(frozen=True)
class CanonicalScenario:
    pair: PairSampler
    lambda_grid: tuple[float, ...]
    n_samples: int
    master_seed: int
    margin: float = 3.0


@dataclass(frozen=True)
class TailsScenario:
    pair: PairSampler
    n_samples: int
    master_seed: int
    t_grid_i: tuple[float, ...] = ()
    eb: Optional[float] = None
    eb_replicates: int = 100_000
    t_grid_ii: tuple[float, ...] = ()
    y: Optional[float] = None
    margin: float = 3.0


@dataclass(frozen=True)
class ClaimScenario:
    u: USampler
    alpha: float
    x_grid: tuple[float, ...]
    n_samples: int
    master_seed: int
    margin: float = 3.0


@dataclass(frozen=True)
class PacBayesScenario:
    pd: ProductDistribution
    hypothesis_class: FiniteHypothesisClass
    beta: float
    mode: str  # coverage | moments
    master_seed: int
    estimator: EstimatorSpec = field(default_factory=EstimatorSpec)
    trials: int = 10_000
    bounds: tuple[BoundSpec, ...] = ()
    ev_trials: int = 10_000
    x_grid: tuple[float, ...] = (0.0, 0.5, 1.0)
    y_grid: tuple[float, ...] = (0.1, 1.0)
    n_trials_moments: int = 100_000

    def __post_init__(self):
        if self.mode not in ("coverage", "moments"):
            raise ValueError(f"unknown pacbayes mode: {self.mode!r}")


@dataclass(frozen=True)
class TrialRecord:
    index: int
    gap: float
    variance: float
    variance_se: float


@dataclass(frozen=True)
class CoverageCell:
    bound_id: str
    x: Optional[float]
    y: Optional[float]
    delta: Optional[float]
    violations: int
    violations_robust: int
    nominal: float
    rate: float
    rate_robust: float
    stderr: float
    verdict: str  # pass | fail | vacuous


@dataclass(frozen=True)
class CoverageReport:
    cells: tuple[CoverageCell, ...]
    trials: int
    oracle: str
    mean_estimate: EstimateWithError
    ev_estimate: Optional[EstimateWithError]
    verdict: str


@dataclass(frozen=True)
class EstimateReport:
    sample: tuple[float, ...]
    semi_empirical: VarianceBreakdown
    efron_stein: VarianceBreakdown
    oracle: str


@dataclass(frozen=True)
class TailsBundle:
    mean_scaled: Optional[TailReport]
    regularized: Optional[TailReport]
    verdict: str


@dataclass(frozen=True)
class PacBayesMoments:
    root: MomentReport
    unit: MomentReport
    verdict: str


def run_estimate(scn: EstimateScenario) -> EstimateReport:
    """Per-coordinate breakdowns of both replace-one estimators at one sample."""
    spec = SeedSpec(scn.master_seed)
    if scn.sample is not None:
        sample = Sample(np.array(scn.sample, dtype=float))
    else:
        sample = sample_product(scn.pd, spec.child(_TRIAL_SAMPLE))
    if scn.oracle == ORACLE_CLOSED_FORM:
        semi = exact_semi_empirical(scn.statistic, scn.pd, sample)
    else:
        cfg = NestedMcConfig(
            scn.estimator.inner_replicates, spec.child(_TRIAL_ESTIMATOR), scn.estimator.reuse_suffix
        )
        semi = estimate_semi_empirical(scn.statistic, scn.pd, sample, cfg)
    es_cfg = NestedMcConfig(
        scn.estimator.inner_replicates, spec.child(2), scn.estimator.reuse_suffix
    )
    es = estimate_efron_stein(scn.statistic, scn.pd, sample, es_cfg)
    return EstimateReport(
        sample=tuple(float(v) for v in sample.values),
        semi_empirical=semi,
        efron_stein=es,
        oracle=scn.oracle,
    )


def _coverage_trial(scn: CoverageScenario, spec: SeedSpec, ef: float, t: int):
    try:
        sample = sample_product(scn.pd, spec.child(t, _TRIAL_SAMPLE))
        g = evaluate(scn.statistic, sample) - ef
        if scn.oracle == ORACLE_CLOSED_FORM:
            vb = exact_semi_empirical(scn.statistic, scn.pd, sample)
        else:
            cfg = NestedMcConfig(
                scn.estimator.inner_replicates,
                spec.child(t, _TRIAL_ESTIMATOR),
                scn.estimator.reuse_suffix,
            )
            vb = estimate_semi_empirical(scn.statistic, scn.pd, sample, cfg)
        return TrialRecord(t, g, vb.total.value, vb.total.stderr)
    except Exception as exc:
        raise RuntimeError(f"trial {t} failed: {exc}") from exc


def _run_trials(scn: CoverageScenario, spec: SeedSpec, ef: float, workers: int):
    trials = scn.trials
    if workers <= 1:
        return [_coverage_trial(scn, spec, ef, t) for t in range(trials)]
    chunk = max(1, math.ceil(trials / (workers * 8)))
    ranges = [(a, min(a + chunk, trials)) for a in range(0, trials, chunk)]

    def work(bounds_):
        a, b = bounds_
        return [_coverage_trial(scn, spec, ef, t) for t in range(a, b)]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(work, ranges))
    return [rec for part in parts for rec in part]


def _binomial_verdict(rate_used: float, nominal: float, trials: int):
    if nominal >= 1.0:
        return "vacuous", 0.0
    se = math.sqrt(nominal * (1.0 - nominal) / trials)
    return ("pass" if rate_used <= nominal + 3.0 * se else "fail"), se


def _radius_scale_free(v, ev, x):
    return 2.0 * np.sqrt((v + ev) * x)


def _radius_logarithmic(v, y, x):
    return np.sqrt(2.0 * (v + y) * (1.0 + 0.5 * np.log1p(v / y)) * x)


def run_coverage(scn: CoverageScenario, workers: int = 1) -> CoverageReport:
    """Monte Carlo coverage of the deviation bounds over independent trials.

    The centering constant and (when a scale-free bound is present) the
    expected variance proxy are resolved once, before any trial runs.
    With the nested-Monte-Carlo oracle each cell reports both the plain
    violation count and the count of violations that survive inflating
    the variance estimates by three standard errors; the verdict is based
    on the surviving count, so estimator noise is not mistaken for a
    failure of the bound.  With the closed-form oracle the two counts
    coincide.
    """
    spec = SeedSpec(scn.master_seed)
    if has_closed_form_mean(scn.statistic):
        ef = EstimateWithError(closed_form_mean(scn.statistic, scn.pd), 0.0, 0)
    else:
        ef = expected_value(
            scn.statistic, scn.pd, MonteCarlo(scn.mean_replicates), spec.child(_TAG_MEAN)
        )

    needs_ev = any(b.bound_id == "scale_free" for b in scn.bounds)
    ev = None
    if needs_ev:
        if has_exact_semi_empirical(scn.statistic):
            ev = EstimateWithError(exact_mean_semi_empirical(scn.statistic, scn.pd), 0.0, 0)
        else:
            cfg = NestedMcConfig(
                scn.estimator.inner_replicates, spec.child(_TAG_EV), scn.estimator.reuse_suffix
            )
            ev = estimate_mean_semi_empirical(scn.statistic, scn.pd, scn.ev_outer, cfg)

    records = _run_trials(scn, spec, ef.value, workers)
    gaps = np.array([r.gap for r in records])
    v = np.array([r.variance for r in records])
    v_se = np.array([r.variance_se for r in records])
    v_hi = v + 3.0 * v_se
    abs_gap = np.abs(gaps)
    T = scn.trials
    robust_mode = scn.oracle == ORACLE_NESTED_MC

    cells = []
    any_fail = False
    for bspec in scn.bounds:
        if bspec.bound_id == "scale_free":
            ev_hi = ev.value + 3.0 * ev.stderr
            prev_plain = prev_robust = None
            for x in bspec.xs:
                plain = int((abs_gap > _radius_scale_free(v, ev.value, x)).sum())
                robust = int((abs_gap > _radius_scale_free(v_hi, ev_hi, x)).sum())
                # Radii grow with x, so violation counts cannot increase.
                if prev_plain is not None:
                    assert plain <= prev_plain and robust <= prev_robust
                prev_plain, prev_robust = plain, robust
                nominal = math.sqrt(2.0) * math.exp(-x)
                rate, rate_r = plain / T, robust / T
                verdict, se = _binomial_verdict(rate_r if robust_mode else rate, nominal, T)
                any_fail = any_fail or verdict == "fail"
                cells.append(
                    CoverageCell(
                        "scale_free", x, None, None, plain, robust, nominal, rate, rate_r, se, verdict
                    )
                )
        elif bspec.bound_id == "logarithmic":
            for y in bspec.ys:
                prev_plain = prev_robust = None
                for x in bspec.xs:
                    plain = int((abs_gap > _radius_logarithmic(v, y, x)).sum())
                    robust = int((abs_gap > _radius_logarithmic(v_hi, y, x)).sum())
                    if prev_plain is not None:
                        assert plain <= prev_plain and robust <= prev_robust
                    prev_plain, prev_robust = plain, robust
                    nominal = math.exp(-x)
                    rate, rate_r = plain / T, robust / T
                    verdict, se = _binomial_verdict(rate_r if robust_mode else rate, nominal, T)
                    any_fail = any_fail or verdict == "fail"
                    cells.append(
                        CoverageCell(
                            "logarithmic", x, y, None, plain, robust, nominal, rate, rate_r, se, verdict
                        )
                    )
        else:
            c = bounded_difference_constants(scn.statistic, scn.pd)
            for delta in bspec.deltas:
                radius = mcdiarmid_radius(c, delta)
                plain = int((abs_gap > radius).sum())
                verdict, se = _binomial_verdict(plain / T, delta, T)
                any_fail = any_fail or verdict == "fail"
                cells.append(
                    CoverageCell(
                        "mcdiarmid", None, None, delta, plain, plain, delta, plain / T, plain / T, se, verdict
                    )
                )
    return CoverageReport(
        cells=tuple(cells),
        trials=T,
        oracle=scn.oracle,
        mean_estimate=ef,
        ev_estimate=ev,
        verdict="fail" if any_fail else "pass",
    )


def run_canonical(scn: CanonicalScenario) -> MgfReport:
    return check_canonical_mgf(
        scn.pair,
        SeedSpec(scn.master_seed),
        lambda_grid=scn.lambda_grid,
        n_samples=scn.n_samples,
        margin=scn.margin,
    )


def run_tails(scn: TailsScenario) -> TailsBundle:
    spec = SeedSpec(scn.master_seed)
    rep_i = None
    rep_ii = None
    if scn.t_grid_i:
        rep_i = check_tail_i(
            scn.pair,
            spec.child(0),
            t_grid=scn.t_grid_i,
            n_samples=scn.n_samples,
            eb=scn.eb,
            eb_replicates=scn.eb_replicates,
            margin=scn.margin,
        )
    if scn.t_grid_ii:
        rep_ii = check_tail_ii(
            scn.pair,
            spec.child(1),
            y=scn.y,
            t_grid=scn.t_grid_ii,
            n_samples=scn.n_samples,
            margin=scn.margin,
        )
    verdicts = [r.verdict for r in (rep_i, rep_ii) if r is not None]
    verdict = "fail" if "fail" in verdicts else "pass"
    return TailsBundle(rep_i, rep_ii, verdict)


def run_claim(scn: ClaimScenario) -> ClaimReport:
    return check_subgaussian_claim(
        scn.u,
        SeedSpec(scn.master_seed),
        alpha=scn.alpha,
        x_grid=scn.x_grid,
        n_samples=scn.n_samples,
        margin=scn.margin,
    )


def _pb_estimator(scn: PacBayesScenario) -> NestedMcConfig | None:
    needs_mc = not all(has_exact_semi_empirical(h) for h in scn.hypothesis_class.hypotheses)
    if not needs_mc:
        return None
    # The seed inside is a placeholder; posterior_trials rebases it per hypothesis.
    return NestedMcConfig(
        scn.estimator.inner_replicates, SeedSpec(scn.master_seed), scn.estimator.reuse_suffix
    )


def run_pacbayes(scn: PacBayesScenario, workers: int = 1) -> "CoverageReport | PacBayesMoments":
    """Coverage of the posterior-averaged bounds, or the moment certificates."""
    spec = SeedSpec(scn.master_seed)
    estimator = _pb_estimator(scn)
    if scn.mode == "moments":
        root = check_root_moment(
            scn.hypothesis_class,
            scn.pd,
            scn.beta,
            spec.child(0),
            x_grid=scn.x_grid,
            n_trials=scn.n_trials_moments,
            ev_trials=scn.ev_trials,
            estimator=estimator,
        )
        unit = check_unit_moment(
            scn.hypothesis_class,
            scn.pd,
            scn.beta,
            spec.child(0),
            y_grid=scn.y_grid,
            n_trials=scn.n_trials_moments,
            estimator=estimator,
        )
        verdicts = {root.verdict, unit.verdict}
        verdict = (
            "fail"
            if "fail" in verdicts
            else ("inconclusive" if "inconclusive" in verdicts else "pass")
        )
        return PacBayesMoments(root, unit, verdict)

    needs_ev = any(b.bound_id == "scale_free" for b in scn.bounds)
    ev = None
    if needs_ev:
        pre = posterior_trials(
            scn.hypothesis_class, scn.pd, scn.beta, scn.ev_trials, spec.child(_TAG_EV), estimator
        )
        ev = EstimateWithError(
            float(pre.qvar.mean()),
            float(pre.qvar.std(ddof=1) / math.sqrt(scn.ev_trials)),
            scn.ev_trials,
        )
    tr = posterior_trials(
        scn.hypothesis_class, scn.pd, scn.beta, scn.trials, spec.child(0), estimator
    )
    abs_gap = np.abs(tr.qgap)
    qv_hi = tr.qvar + 3.0 * tr.qvar_se
    T = scn.trials
    robust_mode = estimator is not None
    cells = []
    any_fail = False
    for bspec in scn.bounds:
        if bspec.bound_id == "scale_free":
            ev_hi = ev.value + 3.0 * ev.stderr
            for x in bspec.xs:
                r_plain = np.sqrt(2.0 * (ev.value + tr.qvar) * (tr.kl + 2.0 * x))
                r_robust = np.sqrt(2.0 * (ev_hi + qv_hi) * (tr.kl + 2.0 * x))
                plain = int((abs_gap > r_plain).sum())
                robust = int((abs_gap > r_robust).sum())
                nominal = 2.0 * math.exp(-x)
                rate, rate_r = plain / T, robust / T
                verdict, se = _binomial_verdict(rate_r if robust_mode else rate, nominal, T)
                any_fail = any_fail or verdict == "fail"
                cells.append(
                    CoverageCell(
                        "scale_free", x, None, None, plain, robust, nominal, rate, rate_r, se, verdict
                    )
                )
        elif bspec.bound_id == "logarithmic":
            for y in bspec.ys:
                for x in bspec.xs:
                    r_plain = np.sqrt(
                        2.0 * (tr.qvar + y) * (tr.kl + x + 0.5 * x * np.log1p(tr.qvar / y))
                    )
                    r_robust = np.sqrt(
                        2.0 * (qv_hi + y) * (tr.kl + x + 0.5 * x * np.log1p(qv_hi / y))
                    )
                    plain = int((abs_gap > r_plain).sum())
                    robust = int((abs_gap > r_robust).sum())
                    nominal = math.exp(-x)
                    rate, rate_r = plain / T, robust / T
                    verdict, se = _binomial_verdict(rate_r if robust_mode else rate, nominal, T)
                    any_fail = any_fail or verdict == "fail"
                    cells.append(
                        CoverageCell(
                            "logarithmic", x, y, None, plain, robust, nominal, rate, rate_r, se, verdict
                        )
                    )
        else:
            raise ValueError(f"bound {bspec.bound_id!r} is not defined for posterior coverage")
    mean_est = EstimateWithError(0.0, 0.0, 0)  # gaps are centered per hypothesis
    return CoverageReport(
        cells=tuple(cells),
        trials=T,
        oracle=ORACLE_CLOSED_FORM if estimator is None else ORACLE_NESTED_MC,
        mean_estimate=mean_est,
        ev_estimate=ev,
        verdict="fail" if any_fail else "pass",
    )
