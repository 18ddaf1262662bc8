import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvetail.construction import (Convention, OrderedSample, ScaledTail, analytic_u,
                                    analytic_u_derivative, as_convention, check_k,
                                    curve_points, ordinate, scale_tail, xy_coords)
from curvetail.errors import DegenerateDataError, DomainError
from curvetail.gpd import GpdParams, gpd_quantile, gpd_sample

mp.mp.dps = 60


def mp_u(i, k, xi, n, convention):
    """Scaled tail of exact GPD quantiles, in extended precision."""
    pos = (lambda m: mp.mpf(m) / (n + 1)) if convention == "basic" \
        else (lambda m: (mp.mpf(m) - mp.mpf("0.5")) / n)
    xi = mp.mpf(xi)

    def q(g):
        return -mp.log(g) if xi == 0 else (g ** (-xi) - 1) / xi

    gi, gj, gk = pos(int(i)), pos(mp.mpf(k) / 2), pos(k)
    return (q(gi) - q(gj)) / (q(gj) - q(gk))


class TestConvention:
    def test_positions(self):
        np.testing.assert_allclose(Convention.BASIC.positions([1, 20], 20), [1 / 21, 20 / 21])
        np.testing.assert_allclose(Convention.K_HALF.positions([1, 20], 20), [0.025, 0.975])

    @pytest.mark.parametrize("text", ["k_half", "K-HALF", Convention.K_HALF])
    def test_as_convention(self, text):
        assert as_convention(text) is Convention.K_HALF

    def test_unknown(self):
        with pytest.raises(ValueError, match="unknown plotting convention"):
            as_convention("median")


class TestOrderedSample:
    def test_sorts_descending_and_freezes(self):
        s = OrderedSample.from_values([3.0, 1.0, 2.0])
        np.testing.assert_array_equal(s.values, [3.0, 2.0, 1.0])
        with pytest.raises(ValueError):
            s.values[0] = 5.0

    def test_rejects_unsorted_direct_construction(self):
        with pytest.raises(ValueError):
            OrderedSample(np.array([1.0, 2.0]))

    @pytest.mark.parametrize("bad", [[1.0, np.nan], [1.0, np.inf], [1.0]])
    def test_rejects_bad_values(self, bad):
        with pytest.raises(ValueError):
            OrderedSample.from_values(bad)

    def test_affine_negative_scale_rejected(self):
        with pytest.raises(ValueError):
            OrderedSample.from_values([1.0, 2.0]).affine(-1.0, 0.0)


class TestCheckK:
    @pytest.mark.parametrize("k,n", [(3, 20), (2, 20), (21, 30), (22, 20), (4.5, 20)])
    def test_invalid(self, k, n):
        with pytest.raises(ValueError):
            check_k(k, n)

    @pytest.mark.parametrize("k,n", [(4, 4), (20, 20), (20, 200)])
    def test_valid(self, k, n):
        check_k(k, n)


class TestScaleTail:
    def test_anchors_are_exact(self):
        s = gpd_sample(40, GpdParams(xi=0.4), 3)
        t = scale_tail(s, 20)
        assert t.u[9] == 0.0 and t.u[19] == -1.0
        assert t.j == 10 and t.fit_u.shape == (9,)
        assert np.all(np.diff(t.u) <= 0)

    @given(a=st.floats(1e-3, 1e3), b=st.floats(-1e3, 1e3), seed=st.integers(0, 10**6))
    @settings(max_examples=50, deadline=None)
    def test_affine_invariance(self, a, b, seed):
        s = gpd_sample(20, GpdParams(xi=0.2), seed)
        u0 = scale_tail(s).u
        u1 = scale_tail(s.affine(a, b)).u
        np.testing.assert_allclose(u1, u0, rtol=1e-9, atol=1e-9)

    def test_degenerate_spacing(self):
        data = [5.0] * 5 + [1.0] * 15
        with pytest.raises(DegenerateDataError):
            scale_tail(data, 20)

    def test_accepts_plain_arrays(self):
        x = np.arange(20.0)
        t = scale_tail(x, 20)
        assert t.u[0] == pytest.approx(9 / 10)

    def test_scaled_tail_shape_checked(self):
        with pytest.raises(ValueError):
            ScaledTail(np.zeros(5), 20)


class TestAnalyticU:
    @pytest.mark.parametrize("convention", ["basic", "k_half"])
    @pytest.mark.parametrize("xi", [-3.0, -0.7, 0.0, 1e-9, 0.4, 2.5])
    def test_matches_exact_quantiles(self, convention, xi):
        i = np.arange(1, 21)
        got = analytic_u(i, 20, xi, convention, 20)
        ref = np.array([float(mp_u(m, 20, xi, 20, convention)) for m in i])
        np.testing.assert_allclose(got, ref, rtol=1e-13, atol=1e-14)

    def test_anchor_values(self):
        assert analytic_u(10, 20, 0.7) == pytest.approx(0.0, abs=1e-15)
        assert analytic_u(20, 20, -1.3) == pytest.approx(-1.0, rel=1e-14)

    def test_quantile_oracle(self):
        # direct use of the GPD quantile under the basic positions
        p = GpdParams(xi=0.8)
        gi = np.arange(1, 21) / 21
        q = gpd_quantile(gi, p)
        ref = (q - q[9]) / (q[9] - q[19])
        np.testing.assert_allclose(analytic_u(np.arange(1, 21), 20, 0.8, "basic"), ref,
                                   rtol=1e-12, atol=1e-14)

    def test_kink_free_at_zero(self):
        xi = np.array([-1e-7, -1e-9, -1e-12, 0.0, 1e-12, 1e-9, 1e-7])
        vals = analytic_u(1, 20, xi)
        slope = analytic_u_derivative(1, 20, 0.0)
        np.testing.assert_allclose(vals - vals[3], slope * xi, rtol=1e-5, atol=2e-15)

    def test_rejects_nonpositive_position(self):
        with pytest.raises(DomainError):
            analytic_u(0.5, 20, 0.0, "k_half")


class TestDerivative:
    @pytest.mark.parametrize("xi", [-4.0, -1e-3, 0.0, 1e-10, 0.5, 3.0])
    def test_against_extended_precision(self, xi):
        for i in (1, 4, 9):
            # central difference at 60 digits; truncation error ~ h^2
            h, x0 = mp.mpf("1e-12"), mp.mpf(xi)
            ref = (mp_u(i, 20, x0 + h, 20, "k_half") - mp_u(i, 20, x0 - h, 20, "k_half")) / (2 * h)
            got = analytic_u_derivative(i, 20, xi)
            assert got == pytest.approx(float(ref), rel=1e-10)


class TestOrdinate:
    def test_endpoints(self):
        assert ordinate(10, 20) == pytest.approx(0.0, abs=1e-15)
        assert ordinate(20, 20) == np.inf

    def test_xi_zero_falling_diagonal(self):
        i = np.arange(1, 20)
        x, y = xy_coords(analytic_u(i, 20, 0.0, "basic"), i, 20, "basic")
        np.testing.assert_allclose(y, -x, atol=1e-12)

    def test_rejects_u_at_or_below_minus_one(self):
        with pytest.raises(DomainError):
            xy_coords(-1.0, 20, 20)


class TestCurvePoints:
    def test_clipped_and_finite(self):
        r, x, y = curve_points(2.0, 20)
        assert r.shape == x.shape == y.shape == (200,)
        assert np.all(np.abs(x) <= 6.0) and np.all(np.abs(y) <= 6.0)

    def test_xi_zero_diagonal(self):
        _r, x, y = curve_points(0.0, 20, "basic")
        keep = np.abs(y) < 6
        np.testing.assert_allclose(y[keep], -x[keep], atol=1e-9)

    def test_k_half_masks_missing_positions(self):
        r, x, _y = curve_points(0.5, 20, "k_half")
        assert np.all(np.isnan(x[r * 20 <= 0.5]))
        assert np.all(np.isfinite(x[r * 20 > 0.5]))

    def test_ratio_range(self):
        with pytest.raises(ValueError):
            curve_points(0.0, 20, r_grid=[0.0, 0.5])
