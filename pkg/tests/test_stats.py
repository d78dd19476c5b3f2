"""Tests for the statistic zoo: evaluation, means, and difference bounds."""
import math

import numpy as np
import pytest
from hypothesis import given, strategies as hst

from gapbounds import (
    ArityError,
    Constant,
    EstimateWithError,
    Max,
    Mean,
    MonteCarlo,
    NoClosedFormError,
    Normal,
    PairwiseUStat,
    ProductDistribution,
    SeedSpec,
    SoftMax,
    Uniform,
    UnboundedStatisticError,
    WeightedSum,
    bounded_difference_constants,
    closed_form_mean,
    evaluate,
    expected_value,
    gap,
    has_closed_form_mean,
)
from gapbounds.stats import ClosedForm, evaluate_batch

from conftest import assert_within, standard_normal_product, unit_uniform_product

finite_vectors = hst.lists(
    hst.floats(min_value=-50.0, max_value=50.0), min_size=2, max_size=6
).map(tuple)


class TestEvaluate:
    def test_hand_values(self):
        assert evaluate(WeightedSum((1.0, 1.0, 1.0)), (1.0, 2.0, 3.0)) == 6.0
        assert evaluate(WeightedSum((2.0, -1.0)), (3.0, 4.0)) == 2.0
        assert evaluate(Mean(), (1.0, 2.0, 3.0, 6.0)) == 3.0
        assert evaluate(Max(), (1.0, 2.0, 3.0)) == 3.0
        assert evaluate(Constant(5.0), (1.0, 2.0)) == 5.0
        # average of (z_i - z_j)^2 over the single unordered pair
        assert evaluate(PairwiseUStat("squared_difference"), (0.0, 2.0)) == 4.0
        # products over the three unordered pairs of (1, 2, 3): (2 + 3 + 6) / 3
        got = evaluate(PairwiseUStat("product"), (1.0, 2.0, 3.0))
        assert math.isclose(got, 11.0 / 3.0, rel_tol=1e-15)

    def test_pairwise_matches_brute_force(self, rng):
        for kernel, fn in (
            ("squared_difference", lambda a, b: (a - b) ** 2),
            ("product", lambda a, b: a * b),
        ):
            stat = PairwiseUStat(kernel)
            for _ in range(20):
                v = rng.normal(size=rng.integers(2, 7))
                total = 0.0
                count = 0
                for i in range(len(v)):
                    for j in range(len(v)):
                        if i != j:
                            total += fn(v[i], v[j])
                            count += 1
                assert math.isclose(evaluate(stat, v), total / count, rel_tol=1e-12)

    def test_softmax_sandwich(self, rng):
        stat = SoftMax(0.5)
        for _ in range(50):
            v = rng.normal(scale=3.0, size=4)
            top = evaluate(Max(), v)
            soft = evaluate(stat, v)
            assert top <= soft <= top + 0.5 * math.log(4.0) + 1e-12

    def test_softmax_tightens_as_temperature_drops(self):
        v = (1.0, 2.0, 3.0)
        assert evaluate(SoftMax(0.01), v) - 3.0 < evaluate(SoftMax(1.0), v) - 3.0
        assert math.isclose(evaluate(SoftMax(1e-8), v), 3.0, abs_tol=1e-6)

    def test_softmax_is_stable_at_extreme_inputs(self):
        assert evaluate(SoftMax(2.0), (1e308, 1e308, -1e308)) == pytest.approx(
            1e308, rel=1e-9
        )
        assert math.isfinite(evaluate(SoftMax(0.5), (-1e308, -1e308)))

    @given(v=finite_vectors)
    def test_symmetric_statistics_ignore_order(self, v):
        rev = tuple(reversed(v))
        for stat in (Mean(), Max(), SoftMax(0.7), PairwiseUStat("product")):
            assert evaluate(stat, v) == pytest.approx(evaluate(stat, rev), rel=1e-12, abs=1e-12)

    def test_arity_errors(self):
        with pytest.raises(ArityError):
            evaluate(WeightedSum((1.0, 2.0)), (1.0, 2.0, 3.0))
        with pytest.raises(ArityError):
            evaluate(PairwiseUStat("product"), (1.0,))

    def test_batch_matches_scalar(self, rng):
        rows = rng.normal(size=(40, 5))
        for stat in (WeightedSum(tuple(range(1, 6))), Mean(), Max(), SoftMax(0.3),
                     PairwiseUStat("squared_difference"), Constant(2.0)):
            got = evaluate_batch(stat, rows)
            want = np.array([evaluate(stat, r) for r in rows])
            assert np.allclose(got, want, rtol=1e-12, atol=1e-12)

    def test_constructor_validation(self):
        with pytest.raises(ValueError):
            WeightedSum(())
        with pytest.raises(ValueError):
            WeightedSum((math.nan,))
        with pytest.raises(ValueError):
            SoftMax(0.0)
        with pytest.raises(ValueError):
            PairwiseUStat("cubed")
        with pytest.raises(ValueError):
            Constant(math.inf)

    def test_estimate_validation(self):
        with pytest.raises(ValueError):
            EstimateWithError(1.0, -0.1, 5)


class TestExpectedValue:
    def test_weighted_sum_closed_form(self):
        pd = ProductDistribution((Normal(1.0, 1.0), Normal(3.0, 2.0)))
        assert closed_form_mean(WeightedSum((2.0, -1.0)), pd) == -1.0
        est = expected_value(WeightedSum((2.0, -1.0)), pd, ClosedForm())
        assert est == EstimateWithError(-1.0, 0.0, 0)

    def test_product_kernel_closed_form(self):
        pd = ProductDistribution((Normal(1.0, 1.0), Normal(3.0, 2.0)))
        assert closed_form_mean(PairwiseUStat("product"), pd) == 3.0
        # three coordinates: mean over pairs of mu_i * mu_j
        pd3 = ProductDistribution((Normal(1.0, 1.0), Normal(2.0, 1.0), Normal(4.0, 1.0)))
        want = (1 * 2 + 1 * 4 + 2 * 4) / 3.0
        assert math.isclose(closed_form_mean(PairwiseUStat("product"), pd3), want, rel_tol=1e-15)

    def test_closed_form_registry(self):
        assert has_closed_form_mean(WeightedSum((1.0,)))
        assert has_closed_form_mean(Mean())
        assert has_closed_form_mean(Constant(3.0))
        assert has_closed_form_mean(PairwiseUStat("product"))
        assert not has_closed_form_mean(Max())
        assert not has_closed_form_mean(SoftMax(1.0))
        assert not has_closed_form_mean(PairwiseUStat("squared_difference"))
        with pytest.raises(NoClosedFormError):
            closed_form_mean(Max(), standard_normal_product(2))

    def test_monte_carlo_max_of_two_gaussians(self):
        # E[max(g1, g2)] = 1 / sqrt(pi) for independent standard normals
        est = expected_value(
            Max(), standard_normal_product(2), MonteCarlo(100_000), SeedSpec(41)
        )
        assert est.replicates == 100_000
        assert est.stderr > 0
        assert_within(est.value, 1.0 / math.sqrt(math.pi), est.stderr, sigmas=3.0)

    def test_monte_carlo_agrees_with_closed_form(self):
        pd = ProductDistribution((Uniform(0.0, 2.0), Normal(1.0, 0.5)))
        stat = WeightedSum((1.0, 2.0))
        mc = expected_value(stat, pd, MonteCarlo(50_000), SeedSpec(17))
        assert_within(mc.value, closed_form_mean(stat, pd), mc.stderr)

    def test_gap_subtracts_the_mean(self):
        pd = ProductDistribution((Normal(1.0, 1.0), Normal(3.0, 2.0)))
        stat = WeightedSum((2.0, -1.0))
        sample = (5.0, 1.0)
        assert gap(stat, sample, closed_form_mean(stat, pd)) == 10.0
        assert gap(Constant(4.0), sample, 4.0) == 0.0


class TestBoundedDifferences:
    def test_hand_values(self):
        assert np.allclose(
            bounded_difference_constants(Mean(), ProductDistribution((Uniform(0.0, 2.0),) * 4)),
            [0.5] * 4,
        )
        got = bounded_difference_constants(
            WeightedSum((2.0, -3.0)), ProductDistribution((Uniform(0.0, 1.0), Uniform(1.0, 2.0)))
        )
        assert np.allclose(got, [2.0, 3.0])
        assert np.allclose(
            bounded_difference_constants(Max(), unit_uniform_product(3)), [1.0, 1.0, 1.0]
        )
        # a constant never moves, even over unbounded coordinates
        assert np.allclose(
            bounded_difference_constants(Constant(5.0), standard_normal_product(2)), [0.0, 0.0]
        )

    def test_unbounded_support_is_refused(self):
        with pytest.raises(UnboundedStatisticError):
            bounded_difference_constants(Max(), standard_normal_product(2))
        with pytest.raises(UnboundedStatisticError):
            bounded_difference_constants(
                Mean(), ProductDistribution((Uniform(0.0, 1.0), Normal(0.0, 1.0)))
            )

    @pytest.mark.parametrize(
        "stat",
        [
            WeightedSum((1.5, -2.0, 0.5)),
            Mean(),
            Max(),
            SoftMax(0.4),
            PairwiseUStat("squared_difference"),
            PairwiseUStat("product"),
        ],
        ids=lambda s: type(s).__name__ + getattr(s, "kernel", ""),
    )
    def test_constants_dominate_single_coordinate_swings(self, stat, rng):
        """|f(s) - f(s')| <= c_k whenever s and s' differ only in coordinate k."""
        pd = ProductDistribution(
            (Uniform(0.0, 1.0), Uniform(-2.0, 0.5), Uniform(1.0, 3.0))
        )
        cs = bounded_difference_constants(stat, pd)
        los = np.array([c.support()[0] for c in pd.coordinates])
        his = np.array([c.support()[1] for c in pd.coordinates])
        for _ in range(200):
            s = los + (his - los) * rng.random(3)
            k = rng.integers(0, 3)
            s2 = s.copy()
            s2[k] = los[k] + (his[k] - los[k]) * rng.random()
            diff = abs(evaluate(stat, s) - evaluate(stat, s2))
            assert diff <= cs[k] + 1e-9
