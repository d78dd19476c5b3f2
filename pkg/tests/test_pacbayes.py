"""Tests for posterior reweighting and the posterior-averaged bounds."""
import math

import numpy as np
import pytest
from hypothesis import given, strategies as hst

from gapbounds import (
    AbsoluteContinuityError,
    FiniteHypothesisClass,
    Max,
    Mean,
    NestedMcConfig,
    ProductDistribution,
    SeedSpec,
    Uniform,
    WeightedSum,
    bound_logarithmic,
    bound_scale_free,
    check_root_moment,
    check_unit_moment,
    exact_mean_semi_empirical,
    gibbs_posterior,
    kl_divergence,
    pb_bound_logarithmic,
    pb_bound_scale_free,
    posterior_average,
    posterior_trials,
)

from conftest import assert_within, standard_normal_product

TWO_SUMS = FiniteHypothesisClass.with_uniform_prior(
    (WeightedSum((1.0, 1.0, 1.0)), WeightedSum((0.5, 0.5, 0.5)))
)

weight_vectors = hst.lists(
    hst.floats(min_value=1e-3, max_value=1.0), min_size=2, max_size=6
).map(lambda ws: tuple(w / sum(ws) for w in ws))


class TestGibbsPosterior:
    def test_zero_inverse_temperature_returns_the_prior(self):
        post = gibbs_posterior(TWO_SUMS, (5.0, -3.0), 0.0)
        assert post.weights == TWO_SUMS.prior

    def test_equal_scores_return_the_prior(self):
        post = gibbs_posterior(TWO_SUMS, (2.5, 2.5), 4.0)
        assert post.weights == pytest.approx(TWO_SUMS.prior, rel=1e-15)

    def test_two_point_hand_value(self):
        # weights proportional to exp(0) and exp(-log 2) under a uniform prior
        post = gibbs_posterior(TWO_SUMS, (0.0, math.log(2.0)), 1.0)
        assert post.weights[0] == pytest.approx(2.0 / 3.0, rel=1e-15)
        assert post.weights[1] == pytest.approx(1.0 / 3.0, rel=1e-15)

    def test_larger_beta_concentrates_on_the_low_score(self):
        soft = gibbs_posterior(TWO_SUMS, (0.0, 1.0), 1.0)
        sharp = gibbs_posterior(TWO_SUMS, (0.0, 1.0), 10.0)
        assert sharp.weights[0] > soft.weights[0] > 0.5

    @given(shift=hst.floats(min_value=-1e6, max_value=1e6))
    def test_shift_invariance(self, shift):
        # Tolerance must absorb the cancellation error of (score - max) at
        # large magnitudes: roughly beta * ulp(shift), ~2e-10 near 1e6.
        base = gibbs_posterior(TWO_SUMS, (0.3, 1.9), 2.0)
        moved = gibbs_posterior(TWO_SUMS, (0.3 + shift, 1.9 + shift), 2.0)
        assert moved.weights == pytest.approx(base.weights, rel=1e-8)

    def test_rejects_bad_scores(self):
        with pytest.raises(ValueError):
            gibbs_posterior(TWO_SUMS, (math.inf, 0.0), 1.0)
        with pytest.raises(ValueError):
            gibbs_posterior(TWO_SUMS, (0.0,), 1.0)

    def test_negative_beta_tilts_toward_the_high_score(self):
        """The library leaves the sign of beta free; only configs insist on >= 0."""
        post = gibbs_posterior(TWO_SUMS, (0.0, 1.0), -3.0)
        assert post.weights[1] > 0.9


class TestKlDivergence:
    def test_identical_arguments_give_exactly_zero(self):
        assert kl_divergence((0.3, 0.7), (0.3, 0.7)) == 0.0

    def test_point_mass_against_uniform(self):
        assert kl_divergence((1.0, 0.0), (0.5, 0.5)) == pytest.approx(math.log(2.0), rel=1e-15)

    def test_four_point_hand_value(self):
        q = (0.4, 0.3, 0.2, 0.1)
        q0 = (0.25,) * 4
        want = sum(qi * math.log(qi / 0.25) for qi in q)
        assert kl_divergence(q, q0) == pytest.approx(want, rel=1e-12)

    def test_absolute_continuity_is_enforced(self):
        with pytest.raises(AbsoluteContinuityError):
            kl_divergence((0.5, 0.5), (1.0, 0.0))

    def test_zero_posterior_mass_contributes_nothing(self):
        assert kl_divergence((1.0, 0.0), (0.9, 0.1)) == pytest.approx(
            math.log(1.0 / 0.9), rel=1e-12
        )

    @given(q=weight_vectors)
    def test_nonnegative_against_uniform(self, q):
        q0 = tuple(1.0 / len(q) for _ in q)
        assert kl_divergence(q, q0) >= 0.0


class TestPosteriorAverage:
    def test_hand_values(self):
        assert posterior_average((1.0, 0.0), (5.0, 7.0)) == 5.0
        assert posterior_average((2.0 / 3.0, 1.0 / 3.0), (0.0, 3.0)) == pytest.approx(
            1.0, rel=1e-15
        )


class TestPosteriorBounds:
    def test_scale_free_hand_values(self):
        assert pb_bound_scale_free(1.0, 1.0, 0.0, 1.0).radius == pytest.approx(
            2.0 * math.sqrt(2.0), rel=1e-15
        )
        assert pb_bound_scale_free(1.0, 1.0, 2.0, 1.0).radius == 4.0

    def test_scale_free_reduces_to_the_single_hypothesis_radius(self):
        """At zero divergence the posterior radius is bitwise the plain one."""
        rng = np.random.default_rng(0)
        for _ in range(500):
            qv = float(rng.uniform(0.0, 50.0))
            ev = float(rng.uniform(0.0, 50.0))
            x = float(rng.uniform(0.01, 20.0))
            assert pb_bound_scale_free(qv, ev, 0.0, x).radius == bound_scale_free(qv, ev, x).radius

    def test_scale_free_failure_probability(self):
        got = pb_bound_scale_free(1.0, 1.0, 0.5, 2.0)
        assert got.failure_probability == pytest.approx(2.0 * math.exp(-2.0), rel=1e-15)
        assert not got.vacuous
        assert pb_bound_scale_free(1.0, 1.0, 0.5, 0.5).vacuous  # 2 e^{-1/2} > 1

    def test_logarithmic_hand_values(self):
        want = math.sqrt(2.0 * 5.0 * (0.5 + 1.0 + 0.5 * math.log(5.0)))
        assert pb_bound_logarithmic(4.0, 0.5, 1.0, 1.0).radius == pytest.approx(want, rel=1e-12)
        assert pb_bound_logarithmic(0.0, 0.0, 1.0, 1.0).radius == pytest.approx(
            math.sqrt(2.0), rel=1e-15
        )

    def test_logarithmic_reduces_to_the_single_hypothesis_radius(self):
        rng = np.random.default_rng(1)
        for _ in range(500):
            qv = float(rng.uniform(0.0, 50.0))
            y = float(rng.uniform(0.01, 5.0))
            x = float(rng.uniform(1.0, 10.0))
            a = pb_bound_logarithmic(qv, 0.0, y, x).radius
            b = bound_logarithmic(qv, y, x).radius
            assert a == pytest.approx(b, rel=1e-15)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            pb_bound_scale_free(1.0, 1.0, -0.1, 1.0)
        with pytest.raises(ValueError):
            pb_bound_scale_free(1.0, 1.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            pb_bound_logarithmic(1.0, 0.0, 1.0, 0.9)
        with pytest.raises(ValueError):
            pb_bound_logarithmic(1.0, 0.0, 0.0, 1.0)

    @given(
        kl=hst.floats(min_value=0.0, max_value=50.0),
        x=hst.floats(min_value=1.0, max_value=20.0),
    )
    def test_monotone_in_divergence_and_x(self, kl, x):
        r = pb_bound_scale_free(1.0, 1.0, kl, x).radius
        assert pb_bound_scale_free(1.0, 1.0, kl + 1.0, x).radius > r
        assert pb_bound_scale_free(1.0, 1.0, kl, x + 1.0).radius > r
        rl = pb_bound_logarithmic(1.0, kl, 1.0, x).radius
        assert pb_bound_logarithmic(1.0, kl + 1.0, 1.0, x).radius > rl
        assert pb_bound_logarithmic(1.0, kl, 1.0, x + 1.0).radius > rl


class TestHypothesisClass:
    def test_uniform_prior_constructor(self):
        assert TWO_SUMS.prior == (0.5, 0.5)

    def test_prior_validation(self):
        hyps = (Mean(), Max())
        with pytest.raises(ValueError):
            FiniteHypothesisClass(hyps, (0.7, 0.7))
        with pytest.raises(ValueError):
            FiniteHypothesisClass(hyps, (1.0, 0.0))
        with pytest.raises(ValueError):
            FiniteHypothesisClass(hyps, (0.5,))
        with pytest.raises(ValueError):
            FiniteHypothesisClass((), ())


class TestPosteriorTrials:
    def test_single_hypothesis_reduces_to_plain_trials(self):
        cls = FiniteHypothesisClass.with_uniform_prior((WeightedSum((1.0, 1.0, 1.0)),))
        pd = standard_normal_product(3)
        trials = posterior_trials(cls, pd, 1.0, 400, SeedSpec(11))
        assert np.all(trials.kl == 0.0)
        assert np.all(trials.qvar_se == 0.0)  # closed form, no nested noise
        se = float(trials.qgap.std(ddof=1)) / math.sqrt(400)
        assert_within(float(trials.qgap.mean()), 0.0, se)
        want_var = exact_mean_semi_empirical(cls.hypotheses[0], pd)
        se_var = float(trials.qvar.std(ddof=1)) / math.sqrt(400)
        assert_within(float(trials.qvar.mean()), want_var, se_var)

    def test_flat_posterior_averages_the_closed_forms(self):
        pd = standard_normal_product(3)
        trials = posterior_trials(TWO_SUMS, pd, 0.0, 300, SeedSpec(12))
        assert np.all(trials.kl == 0.0)
        want = 0.5 * (6.0 + 1.5)  # expected decomposition totals of the two sums
        se = float(trials.qvar.std(ddof=1)) / math.sqrt(300)
        assert_within(float(trials.qvar.mean()), want, se)

    def test_positive_beta_spends_divergence(self):
        pd = standard_normal_product(3)
        trials = posterior_trials(TWO_SUMS, pd, 2.0, 300, SeedSpec(13))
        assert np.all(trials.kl >= 0.0)
        assert float(trials.kl.max()) > 0.0

    def test_deterministic(self):
        pd = standard_normal_product(3)
        a = posterior_trials(TWO_SUMS, pd, 1.0, 50, SeedSpec(14))
        b = posterior_trials(TWO_SUMS, pd, 1.0, 50, SeedSpec(14))
        assert np.array_equal(a.qgap, b.qgap)
        assert np.array_equal(a.qvar, b.qvar)
        assert np.array_equal(a.kl, b.kl)

    def test_nested_estimator_path(self):
        cls = FiniteHypothesisClass.with_uniform_prior((Max(), Mean()))
        pd = ProductDistribution((Uniform(0.0, 1.0), Uniform(0.0, 1.0)))
        with pytest.raises(ValueError):
            posterior_trials(cls, pd, 1.0, 10, SeedSpec(15))
        trials = posterior_trials(
            cls, pd, 1.0, 40, SeedSpec(15), estimator=NestedMcConfig(100, SeedSpec(16))
        )
        assert trials.qvar.shape == (40,)
        assert np.all(np.isfinite(trials.qvar))
        assert np.all(trials.qvar >= 0.0)
        assert float(trials.qvar_se.max()) > 0.0


class TestMomentChecks:
    def test_root_moment_on_flat_posterior(self):
        report = check_root_moment(
            TWO_SUMS, standard_normal_product(3), 0.0, SeedSpec(17),
            x_grid=(0.0, 0.5, 1.0), n_trials=20_000, ev_trials=5_000,
        )
        assert report.which == "root"
        assert report.verdict == "pass"
        by_x = {row.parameter: row for row in report.rows}
        assert by_x[0.0].estimate == 1.0
        assert by_x[0.0].stderr == 0.0
        for x, row in by_x.items():
            assert row.threshold == pytest.approx(2.0 * math.exp(x * x), rel=1e-15)
            assert row.verdict == "pass"
        # the pre-estimated expected posterior variance: uniform mixture of
        # the two closed-form totals 6 and 1.5
        assert report.ev is not None
        assert_within(report.ev.value, 3.75, report.ev.stderr)

    def test_unit_moment_on_flat_posterior(self):
        report = check_unit_moment(
            TWO_SUMS, standard_normal_product(3), 0.0, SeedSpec(18),
            y_grid=(0.1, 1.0), n_trials=20_000,
        )
        assert report.which == "unit"
        assert report.verdict == "pass"
        for row in report.rows:
            assert row.threshold == 1.0
            assert row.estimate <= 1.0 + 3.0 * row.stderr
            assert row.verdict == "pass"
        assert {row.parameter for row in report.rows} == {0.1, 1.0}

    def test_moment_checks_respect_beta(self):
        report = check_root_moment(
            TWO_SUMS, standard_normal_product(3), 2.0, SeedSpec(19),
            x_grid=(0.5,), n_trials=10_000, ev_trials=4_000,
        )
        assert report.verdict == "pass"
        assert report.n_trials == 10_000
