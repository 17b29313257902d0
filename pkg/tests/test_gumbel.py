import math

import numpy as np
import pytest
from scipy import stats

from sbmtwosample.gumbel import (
    LOCATION,
    SCALE,
    gumbel_cdf,
    gumbel_pdf,
    gumbel_quantile,
    gumbel_sample,
    gumbel_sf,
)


def test_cdf_at_location_is_inverse_e():
    assert gumbel_cdf(-math.log(math.pi)) == pytest.approx(math.exp(-1), abs=1e-12)
    assert LOCATION == pytest.approx(-math.log(math.pi))


def test_cdf_near_conventional_threshold():
    assert abs(gumbel_cdf(4.79) - 0.9499) <= 5e-4


@pytest.mark.parametrize("p", [1e-6, 0.01, 0.5, 0.9, 0.95, 0.99, 1 - 1e-9])
def test_quantile_round_trip(p):
    assert gumbel_cdf(gumbel_quantile(p)) == pytest.approx(p, rel=1e-10)


def test_matches_scipy_gumbel():
    ref = stats.gumbel_r(loc=LOCATION, scale=SCALE)
    y = np.linspace(-8, 30, 200)
    np.testing.assert_allclose(gumbel_cdf(y), ref.cdf(y), rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(gumbel_pdf(y), ref.pdf(y), rtol=1e-10, atol=1e-15)
    np.testing.assert_allclose(gumbel_sf(y), ref.sf(y), rtol=1e-10)
    assert gumbel_quantile(0.95) == pytest.approx(ref.ppf(0.95), rel=1e-12)


def test_sf_accurate_in_far_tail():
    # 1 - cdf underflows to 0 here, the survival function must not
    assert gumbel_sf(90.0) > 0
    assert gumbel_sf(90.0) == pytest.approx(math.exp(-45) / math.sqrt(math.pi), rel=1e-9)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.5, 2.0])
def test_quantile_rejects_levels_outside_unit_interval(p):
    with pytest.raises(ValueError):
        gumbel_quantile(p)


def test_sampler_follows_cdf():
    draws = gumbel_sample(20_000, np.random.default_rng(0))
    assert stats.kstest(draws, gumbel_cdf).statistic < 0.02
