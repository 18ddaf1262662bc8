import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from curvetail.errors import DomainError
from curvetail.gpd import GpdParams, gpd_draw, gpd_quantile, gpd_sample, gpd_tail

xis = st.floats(-3.0, 3.0, allow_nan=False)
probs = st.floats(1e-12, 1.0, exclude_min=True)


class TestGpdParams:
    def test_defaults_are_exponential(self):
        p = GpdParams()
        assert (p.mu, p.sigma, p.xi) == (0.0, 1.0, 0.0)
        assert p.upper == math.inf

    @pytest.mark.parametrize("sigma", [0.0, -1.0, math.nan])
    def test_bad_scale(self, sigma):
        with pytest.raises(ValueError):
            GpdParams(sigma=sigma)

    def test_upper_endpoint(self):
        assert GpdParams(mu=1.0, sigma=2.0, xi=-0.5).upper == pytest.approx(5.0)


class TestTail:
    @pytest.mark.parametrize("xi", [-2.0, -0.5, 0.0, 0.3, 1.0, 4.0])
    def test_matches_scipy(self, xi):
        p = GpdParams(mu=0.5, sigma=1.7, xi=xi)
        top = p.upper if xi < 0 else 50.0
        x = np.linspace(0.5, top, 41)[:-1]
        ref = stats.genpareto.sf(x, xi, loc=0.5, scale=1.7)
        np.testing.assert_allclose(gpd_tail(x, p), ref, rtol=1e-10)

    def test_exponential_limit(self):
        x = np.linspace(0, 30, 61)
        np.testing.assert_allclose(gpd_tail(x, GpdParams()), np.exp(-x), rtol=1e-14)

    @pytest.mark.parametrize("eps", [1e-5, 1e-9, 1e-12, 1e-15])
    def test_continuous_through_zero(self, eps):
        x = np.array([0.1, 1.0, 10.0])
        lo = gpd_tail(x, GpdParams(xi=-eps))
        hi = gpd_tail(x, GpdParams(xi=eps))
        # first-order deviation from exp(-x) is xi x^2 / 2
        ref = np.exp(-x)
        tol = eps * x**2 + 1e-14
        assert np.all(np.abs(lo / ref - 1) <= tol)
        assert np.all(np.abs(hi / ref - 1) <= tol)

    def test_strict_rejects_outside_support(self):
        with pytest.raises(DomainError):
            gpd_tail(-0.1, GpdParams())
        with pytest.raises(DomainError):
            gpd_tail(3.0, GpdParams(xi=-0.5))

    def test_lenient_clips(self):
        p = GpdParams(xi=-0.5)
        out = gpd_tail([-1.0, 0.0, 2.0, 5.0], p, strict=False)
        np.testing.assert_array_equal(out, [1.0, 1.0, 0.0, 0.0])

    def test_scalar_in_scalar_out(self):
        assert isinstance(gpd_tail(1.0, GpdParams()), float)


class TestQuantile:
    @given(xi=xis, g=probs)
    @settings(max_examples=300, deadline=None)
    def test_round_trip(self, xi, g):
        p = GpdParams(mu=-1.0, sigma=0.5, xi=xi)
        x = gpd_quantile(g, p)
        back = gpd_tail(x, p, strict=False)
        # G(Q(g)) amplifies relative error in x by |d log G / d log z|,
        # which is |1 - g^xi| / |xi|; it grows without bound near the upper
        # endpoint of a bounded tail
        lg = math.log(g)
        cond = abs(math.expm1(xi * lg) / xi) if xi != 0 else -lg
        assert back == pytest.approx(g, rel=1e-12 * max(1.0, cond))

    @pytest.mark.parametrize("xi", [-1.0, 0.0, 2.0])
    def test_matches_scipy(self, xi):
        g = np.geomspace(1e-10, 1, 25)
        ref = stats.genpareto.isf(g, xi, loc=2.0, scale=3.0)
        np.testing.assert_allclose(gpd_quantile(g, GpdParams(2.0, 3.0, xi)), ref, rtol=1e-10)

    def test_g_one_is_location(self):
        assert gpd_quantile(1.0, GpdParams(mu=3.0, xi=0.7)) == 3.0

    @pytest.mark.parametrize("g", [0.0, -0.1, 1.5, math.nan])
    def test_rejects_bad_probability(self, g):
        with pytest.raises(DomainError):
            gpd_quantile(g, GpdParams())


class TestSampling:
    def test_sample_is_descending_and_seeded(self):
        a = gpd_sample(50, GpdParams(xi=0.3), 7)
        b = gpd_sample(50, GpdParams(xi=0.3), 7)
        assert np.all(np.diff(a.values) <= 0)
        np.testing.assert_array_equal(a.values, b.values)

    def test_sample_needs_two_points(self):
        with pytest.raises(ValueError):
            gpd_sample(1, GpdParams(), 0)

    @pytest.mark.parametrize("xi", [-0.5, 0.0, 0.5])
    def test_draws_follow_distribution(self, xi):
        rng = np.random.default_rng(11)
        x = gpd_draw(GpdParams(xi=xi), 20000, rng)
        res = stats.kstest(x, stats.genpareto(xi).cdf)
        assert res.pvalue > 1e-3

    def test_draws_stay_finite(self):
        x = gpd_draw(GpdParams(xi=3.0), 100000, np.random.default_rng(0))
        assert np.all(np.isfinite(x)) and x.min() >= 0
