"""Shared fixtures and helpers for the test suite."""
import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gapbounds import Normal, ProductDistribution, Uniform

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def standard_normal_product(n: int) -> ProductDistribution:
    return ProductDistribution(tuple(Normal(0.0, 1.0) for _ in range(n)))


def unit_uniform_product(n: int) -> ProductDistribution:
    return ProductDistribution(tuple(Uniform(0.0, 1.0) for _ in range(n)))


def assert_within(estimate: float, truth: float, stderr: float, sigmas: float = 4.0):
    """Assert a Monte Carlo estimate sits within ``sigmas`` stderr of truth."""
    slack = sigmas * stderr
    assert abs(estimate - truth) <= slack, (
        f"estimate {estimate} is {abs(estimate - truth):.3g} from {truth}, "
        f"allowed {slack:.3g} ({sigmas} x {stderr:.3g})"
    )


def binomial_stderr(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 1e-12) / n)


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)
