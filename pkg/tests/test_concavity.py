import math

import numpy as np
import pytest
from scipy import stats

from selgroup.concavity import (
    ShapeProperty,
    Verdict,
    is_left_log_concave,
    is_log_concave_density,
    skewness,
)
from selgroup.distributions import (
    EmpiricalDistribution,
    Gaussian,
    SkewSymmetric,
    TwoGaussianMixture,
)
from selgroup.errors import DegenerateSample, DensityUnavailable

from conftest import BATTERY

MUS = (0.2, 0.5, 0.9, 1.1, 1.5, 2.0, 3.0)
SIGMAS = (0.5, 1.0, 2.0)


@pytest.mark.parametrize("mu", [-3.0, 0.0, 2.0])
@pytest.mark.parametrize("sigma", [0.3, 1.0, 4.0])
def test_gaussian_is_left_log_concave(mu, sigma):
    r = is_left_log_concave(Gaussian(mu, sigma))
    assert r.verdict is Verdict.HOLDS and r.witness is None
    assert r.property is ShapeProperty.LEFT_LOG_CONCAVE_CDF
    assert r.mean == pytest.approx(mu)


def test_gaussian_log_concave_density():
    assert is_log_concave_density(Gaussian(0, 1)).holds


def test_mixture_examples():
    assert is_left_log_concave(TwoGaussianMixture.symmetric(2.0, 1.0)).holds
    assert is_log_concave_density(TwoGaussianMixture.symmetric(0.8, 1.0)).holds
    r = is_log_concave_density(TwoGaussianMixture.symmetric(2.0, 1.0))
    assert r.verdict is Verdict.FAILS
    assert abs(r.witness) < 0.1
    assert r.max_violation > 1e-9


@pytest.mark.parametrize("mu", MUS)
@pytest.mark.parametrize("sigma", SIGMAS)
def test_mixture_dichotomy(mu, sigma):
    m = TwoGaussianMixture.symmetric(mu, sigma)
    assert is_log_concave_density(m).holds == (mu <= sigma)
    assert is_left_log_concave(m).holds


def test_reflected_skew_probe_is_reported():
    d = SkewSymmetric(10.0).reflected()
    r = is_left_log_concave(d)
    # the ratio route is an independent check of the same property
    assert r.ratio_route is r.verdict
    assert r.probe[1] == pytest.approx(float(d.mean))
    assert r.to_dict()["verdict"] in ("holds", "fails")


@pytest.mark.parametrize("name", sorted(BATTERY))
def test_two_routes_agree(name):
    r = is_left_log_concave(BATTERY[name])
    assert r.ratio_route is r.verdict


def test_failure_has_witness():
    # a bimodal mixture with a far left bump has a kinked log CDF
    m = TwoGaussianMixture(0.05, -6.0, 0.3, 2.0, 0.3)
    r = is_left_log_concave(m)
    assert r.verdict is Verdict.FAILS
    assert r.witness is not None and r.probe[0] <= r.witness <= r.probe[1]


def test_empirical_has_no_density():
    with pytest.raises(DensityUnavailable):
        is_left_log_concave(EmpiricalDistribution((-1.0, 1.0)))
    with pytest.raises(DensityUnavailable):
        is_log_concave_density(EmpiricalDistribution((-1.0, 1.0)))


def test_skewness_examples():
    assert skewness(Gaussian(1.3, 2.0)) == 0.0
    assert skewness([-1.0, 0.0, 1.0]) == 0.0
    x = np.array([0.0, 0.0, 1.0, 5.0])
    assert skewness(x) == pytest.approx(stats.skew(x, bias=True), abs=1e-12)


def test_skewness_half_normal_limit():
    limit = math.sqrt(2) * (4 - math.pi) / (math.pi - 2) ** 1.5
    assert limit == pytest.approx(0.9953, abs=1e-4)
    alpha = 1e4
    delta = alpha / math.sqrt(1 + alpha**2)
    closed = (4 - math.pi) / 2 * (delta * math.sqrt(2 / math.pi)) ** 3 / (1 - 2 * delta**2 / math.pi) ** 1.5
    got = skewness(SkewSymmetric(alpha))
    assert got == pytest.approx(closed, abs=1e-6)
    assert got == pytest.approx(limit, abs=1e-4)


@pytest.mark.parametrize("alpha", [0.5, 2.0, 5.0])
def test_skewness_sign(alpha):
    pos = skewness(SkewSymmetric(alpha, 0.3, 1.2))
    neg = skewness(SkewSymmetric(-alpha, 0.3, 1.2))
    assert pos > 0
    assert neg == pytest.approx(-pos, abs=1e-8)
    assert pos == pytest.approx(stats.skewnorm(alpha, 0.3, 1.2).stats(moments="s"), abs=1e-8)


def test_degenerate_samples():
    with pytest.raises(DegenerateSample):
        skewness([1.0, 1.0, 2.0])
    with pytest.raises(DegenerateSample):
        skewness([1.0, 1.0 + 1e-9, 1.0 + 2e-9])
