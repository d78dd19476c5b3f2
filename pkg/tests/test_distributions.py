"""Tests for seeded substreams and the coordinate distribution families."""
import math

import numpy as np
import pytest
from hypothesis import given, strategies as hst
from scipy import integrate

from gapbounds import (
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
from gapbounds.distributions import sample_coordinate

from conftest import assert_within

FAMILIES = (
    Normal(0.3, 1.7),
    Uniform(-1.0, 2.0),
    Exponential(0.7),
    ScaledBernoulli(0.3, 2.5),
    Pareto(5.0, 2.0),
)


class TestSeedSpec:
    def test_master_seed_must_be_u64(self):
        with pytest.raises(ValueError):
            SeedSpec(-1)
        with pytest.raises(ValueError):
            SeedSpec(2**64)
        assert SeedSpec(2**64 - 1).master_seed == 2**64 - 1

    def test_child_labels_must_be_u64(self):
        spec = SeedSpec(0)
        with pytest.raises(ValueError):
            spec.child(-1)
        with pytest.raises(ValueError):
            spec.child(2**64)

    def test_child_appends_labels(self):
        spec = SeedSpec(9, (1,))
        assert spec.child(2, 3).labels == (1, 2, 3)
        # the parent is untouched
        assert spec.labels == (1,)

    def test_same_spec_same_stream(self):
        a = derive_substream(SeedSpec(42, (7, 9))).random(100)
        b = derive_substream(SeedSpec(42, (7, 9))).random(100)
        assert np.array_equal(a, b)

    def test_different_labels_different_streams(self):
        base = SeedSpec(42)
        a = derive_substream(base.child(0)).random(50)
        b = derive_substream(base.child(1)).random(50)
        c = derive_substream(SeedSpec(43).child(0)).random(50)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_label_path_matters_not_just_leaf(self):
        # (1, 2) and (2, 1) must name different streams.
        a = derive_substream(SeedSpec(0, (1, 2))).random(20)
        b = derive_substream(SeedSpec(0, (2, 1))).random(20)
        assert not np.array_equal(a, b)

    def test_first_draws_distinct_across_many_substreams(self):
        base = SeedSpec(2024)
        n = 10_000
        firsts = np.array([derive_substream(base.child(i)).random() for i in range(n)])
        assert np.unique(firsts).size == n

    def test_adjacent_substreams_uncorrelated(self):
        base = SeedSpec(5150)
        n = 10_000
        firsts = np.array([derive_substream(base.child(i)).random() for i in range(n)])
        corr = np.corrcoef(firsts[:-1], firsts[1:])[0, 1]
        assert abs(corr) <= 3.0 / math.sqrt(n)
        # and the firsts themselves look uniform
        assert abs(firsts.mean() - 0.5) <= 3.0 * firsts.std() / math.sqrt(n)


class TestFamilies:
    @pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.kind)
    def test_mean_matches_quantile_integral(self, dist):
        """mean() must agree with the integral of the quantile function."""
        value, err = integrate.quad(
            lambda u: float(dist.from_uniform(u)), 0.0, 1.0, limit=200
        )
        assert math.isclose(value, dist.mean(), rel_tol=1e-6, abs_tol=1e-8)
        assert err < 1e-6

    @pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.kind)
    def test_variance_matches_quantile_integral(self, dist):
        mu = dist.mean()
        value, err = integrate.quad(
            lambda u: (float(dist.from_uniform(u)) - mu) ** 2, 0.0, 1.0, limit=200
        )
        assert math.isclose(value, dist.variance(), rel_tol=1e-5, abs_tol=1e-8)

    @pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.kind)
    def test_sampling_matches_declared_moments(self, dist):
        gen = derive_substream(SeedSpec(99, (FAMILIES.index(dist),)))
        draws = sample_coordinate(dist, gen, size=100_000)
        n = draws.size
        se_mean = draws.std(ddof=1) / math.sqrt(n)
        assert_within(float(draws.mean()), dist.mean(), se_mean)
        sq = (draws - dist.mean()) ** 2
        assert_within(float(sq.mean()), dist.variance(), float(sq.std(ddof=1)) / math.sqrt(n))

    @pytest.mark.parametrize("dist", FAMILIES, ids=lambda d: d.kind)
    def test_draws_stay_in_support(self, dist):
        gen = derive_substream(SeedSpec(3))
        draws = sample_coordinate(dist, gen, size=10_000)
        lo, hi = dist.support()
        assert np.all(draws >= lo)
        assert np.all(draws <= hi)

    @pytest.mark.parametrize(
        "dist",
        [d for d in FAMILIES if not isinstance(d, ScaledBernoulli)],
        ids=lambda d: d.kind,
    )
    @given(u=hst.floats(min_value=1e-12, max_value=1.0 - 1e-12))
    def test_quantile_is_monotone(self, dist, u):
        eps = 1e-6
        lo = dist.from_uniform(max(u - eps, 1e-13))
        hi = dist.from_uniform(min(u + eps, 1.0 - 1e-13))
        assert lo <= hi

    @given(u=hst.floats(min_value=1e-12, max_value=1.0 - 1e-12))
    def test_two_point_family_puts_its_atom_on_the_low_side(self, u):
        """The two-point map is u < p -> scale, else 0 (not the usual inverse CDF).

        It preserves the law all the same -- P(u < p) = p -- and the explicit
        branch keeps the behavior stable for negative scales too.
        """
        dist = ScaledBernoulli(0.3, 2.5)
        assert dist.from_uniform(u) == (2.5 if u < 0.3 else 0.0)
        flipped = ScaledBernoulli(0.3, -2.5)
        assert flipped.from_uniform(u) == (-2.5 if u < 0.3 else 0.0)

    def test_degenerate_bernoulli(self):
        gen = derive_substream(SeedSpec(12))
        always = sample_coordinate(ScaledBernoulli(1.0, 3.0), gen, size=200)
        assert np.all(always == 3.0)
        never = sample_coordinate(ScaledBernoulli(0.0, 3.0), gen, size=200)
        assert np.all(never == 0.0)

    def test_pareto_moment_flags(self):
        assert math.isinf(Pareto(0.5, 1.0).mean())
        assert math.isinf(Pareto(1.5, 1.0).variance())
        assert math.isfinite(Pareto(1.5, 1.0).mean())
        assert math.isfinite(Pareto(2.5, 1.0).variance())

    def test_constructor_validation(self):
        with pytest.raises(ValueError):
            Normal(0.0, 0.0)
        with pytest.raises(ValueError):
            Normal(math.inf, 1.0)
        with pytest.raises(ValueError):
            Uniform(1.0, 1.0)
        with pytest.raises(ValueError):
            Exponential(0.0)
        with pytest.raises(ValueError):
            ScaledBernoulli(1.2, 1.0)
        with pytest.raises(ValueError):
            Pareto(0.0, 1.0)
        with pytest.raises(ValueError):
            Pareto(1.0, -1.0)


class TestProduct:
    def test_requires_a_coordinate(self):
        with pytest.raises(ValueError):
            ProductDistribution(())

    def test_vectors_and_flags(self):
        pd = ProductDistribution((Normal(1.0, 2.0), Uniform(0.0, 1.0)))
        assert pd.n == 2
        assert np.allclose(pd.means(), [1.0, 0.5])
        assert np.allclose(pd.variances(), [4.0, 1.0 / 12.0])
        assert not pd.has_infinite_variance()
        heavy = ProductDistribution((Normal(0.0, 1.0), Pareto(1.5, 1.0)))
        assert heavy.has_infinite_variance()
        assert not heavy.has_infinite_mean()
        assert ProductDistribution((Pareto(0.9, 1.0),)).has_infinite_mean()

    def test_sample_is_deterministic(self):
        pd = ProductDistribution((Normal(0.0, 1.0), Uniform(0.0, 1.0), Exponential(2.0)))
        spec = SeedSpec(123, (4, 5))
        a = sample_product(pd, spec)
        b = sample_product(pd, spec)
        assert isinstance(a, Sample)
        assert len(a) == 3
        assert np.array_equal(a.values, b.values)

    def test_batch_first_row_matches_single_sample(self):
        pd = ProductDistribution((Normal(0.0, 1.0), Uniform(0.0, 1.0), Exponential(2.0)))
        spec = SeedSpec(123, (4, 5))
        single = sample_product(pd, spec).values
        batch = sample_product_batch(pd, spec, 7)
        assert batch.shape == (7, 3)
        assert np.array_equal(batch[0], single)

    def test_coordinates_draw_from_independent_substreams(self):
        """Extending the product must not disturb earlier coordinates."""
        first = (Normal(0.0, 1.0), Uniform(0.0, 1.0), Exponential(2.0))
        spec = SeedSpec(123, (4, 5))
        small = sample_product(ProductDistribution(first), spec).values
        big = sample_product(
            ProductDistribution(first + (Normal(2.0, 3.0), Uniform(-1.0, 1.0))), spec
        ).values
        assert np.array_equal(big[:3], small)

    def test_batch_columns_are_uncorrelated(self):
        pd = ProductDistribution((Normal(0.0, 1.0), Normal(0.0, 1.0)))
        batch = sample_product_batch(pd, SeedSpec(77), 20_000)
        corr = np.corrcoef(batch[:, 0], batch[:, 1])[0, 1]
        assert abs(corr) <= 3.0 / math.sqrt(batch.shape[0])
