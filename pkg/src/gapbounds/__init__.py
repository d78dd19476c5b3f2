"""Deviation bounds for nonlinear statistics with data-dependent variance.

The package estimates replace-one-coordinate variance proxies for a
statistic of independent coordinates, turns them into high-probability
bounds on the deviation from the mean, checks the underlying exponential
moment certificates by simulation, and extends the bounds to posterior
averages over a finite hypothesis class.
"""

from .bounds import BoundResult, bound_logarithmic, bound_scale_free, mcdiarmid_radius
from .canonical import (
    DEFAULT_LAMBDA_GRID,
    AbsNormalU,
    ClaimReport,
    ConstantU,
    GapVariancePair,
    GaussianScalePair,
    MgfReport,
    ScaledControlPair,
    TailReport,
    check_canonical_mgf,
    check_subgaussian_claim,
    check_tail_i,
    check_tail_ii,
    draw_pairs,
)
from .config import ConfigError, load_config, parse_config, parse_config_text, scenario_to_config
from .distributions import (
    Exponential,
    Normal,
    Pareto,
    ProductDistribution,
    Sample,
    ScaledBernoulli,
    SeedSpec,
    Uniform,
    derive_substream,
    sample_product,
    sample_product_batch,
)
from .estimators import (
    InfiniteVarianceError,
    NestedMcConfig,
    VarianceBreakdown,
    estimate_efron_stein,
    estimate_mean_semi_empirical,
    estimate_semi_empirical,
    exact_mean_semi_empirical,
    exact_semi_empirical,
    has_exact_semi_empirical,
)
from .harness import (
    BoundSpec,
    CanonicalScenario,
    ClaimScenario,
    CoverageReport,
    CoverageScenario,
    EstimateReport,
    EstimateScenario,
    EstimatorSpec,
    PacBayesMoments,
    PacBayesScenario,
    TailsBundle,
    TailsScenario,
    run_canonical,
    run_claim,
    run_coverage,
    run_estimate,
    run_pacbayes,
    run_tails,
)
from .pacbayes import (
    AbsoluteContinuityError,
    DegeneratePosteriorError,
    FiniteHypothesisClass,
    MomentReport,
    PosteriorDistribution,
    check_root_moment,
    check_unit_moment,
    gibbs_posterior,
    kl_divergence,
    pb_bound_logarithmic,
    pb_bound_scale_free,
    posterior_average,
    posterior_trials,
)
from .stats import (
    PRODUCT,
    SQUARED_DIFFERENCE,
    ArityError,
    Constant,
    EstimateWithError,
    Max,
    Mean,
    MonteCarlo,
    NoClosedFormError,
    PairwiseUStat,
    SoftMax,
    UnboundedStatisticError,
    WeightedSum,
    bounded_difference_constants,
    closed_form_mean,
    evaluate,
    expected_value,
    gap,
    has_closed_form_mean,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # distributions
    "SeedSpec", "derive_substream", "Normal", "Uniform", "Exponential",
    "ScaledBernoulli", "Pareto", "ProductDistribution", "Sample",
    "sample_product", "sample_product_batch",
    # statistics
    "WeightedSum", "Mean", "Max", "SoftMax", "PairwiseUStat", "Constant",
    "SQUARED_DIFFERENCE", "PRODUCT", "ArityError", "NoClosedFormError",
    "UnboundedStatisticError", "EstimateWithError", "MonteCarlo",
    "evaluate", "gap", "has_closed_form_mean", "closed_form_mean",
    "expected_value", "bounded_difference_constants",
    # estimators
    "NestedMcConfig", "VarianceBreakdown", "InfiniteVarianceError",
    "estimate_semi_empirical", "estimate_efron_stein",
    "estimate_mean_semi_empirical", "has_exact_semi_empirical",
    "exact_semi_empirical", "exact_mean_semi_empirical",
    # bounds
    "BoundResult", "bound_scale_free", "bound_logarithmic", "mcdiarmid_radius",
    # canonical checks
    "DEFAULT_LAMBDA_GRID", "GaussianScalePair", "GapVariancePair",
    "ScaledControlPair", "AbsNormalU", "ConstantU", "draw_pairs",
    "MgfReport", "TailReport", "ClaimReport", "check_canonical_mgf",
    "check_tail_i", "check_tail_ii", "check_subgaussian_claim",
    # posterior averages
    "FiniteHypothesisClass", "PosteriorDistribution", "gibbs_posterior",
    "kl_divergence", "posterior_average", "pb_bound_scale_free",
    "pb_bound_logarithmic", "posterior_trials", "check_root_moment",
    "check_unit_moment", "MomentReport", "DegeneratePosteriorError",
    "AbsoluteContinuityError",
    # harness
    "EstimatorSpec", "BoundSpec", "EstimateScenario", "CoverageScenario",
    "CanonicalScenario", "TailsScenario", "ClaimScenario", "PacBayesScenario",
    "CoverageReport", "EstimateReport", "TailsBundle", "PacBayesMoments",
    "run_estimate", "run_coverage", "run_canonical", "run_tails",
    "run_claim", "run_pacbayes",
    # configuration
    "ConfigError", "load_config", "parse_config", "parse_config_text",
    "scenario_to_config",
]
