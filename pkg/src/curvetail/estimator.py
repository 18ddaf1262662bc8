"""Least-squares curve-fit estimator of the tail index.

The fit minimises the horizontal distance, in ``X = log(1 + u)``, between the
scaled data and the GPD curve ``analytic_u(., xi)`` over ``i = 1 .. j-1``
(the ``j``-th point sits at the origin for every ``xi``).  Stationary points
are bracketed on a coarse grid of the gradient and refined with a bracketed
root finder.  The batch entry point is vectorised across samples and is
what the Monte Carlo code uses; the scalar functions are thin wrappers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import elementwise

from .construction import (
    DEFAULT_K,
    Convention,
    OrderedSample,
    ScaledTail,
    _du_from_logs,
    _log_ratios,
    _u_from_logs,
    as_convention,
    scale_tail,
)
from .errors import DomainError


@dataclass(frozen=True)
class FitConfig:
    """Settings of the curve fit.

    ``tol`` is the absolute tolerance on the gradient at the returned root.
    """

    k: int = DEFAULT_K
    convention: Convention = Convention.K_HALF
    xi_bracket: tuple[float, float] = (-10.0, 10.0)
    tol: float = 1e-10
    grid_points: int = 61

    def __post_init__(self):
        lo, hi = self.xi_bracket
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ValueError("xi_bracket must be finite with low < high")
        if self.grid_points < 2:
            raise ValueError("grid_points must be at least 2")
        object.__setattr__(self, "convention", as_convention(self.convention))
        object.__setattr__(self, "xi_bracket", (float(lo), float(hi)))


@dataclass(frozen=True)
class Estimate:
    """A tail-index estimate; ``boundary`` marks a bracket-end fallback."""

    xi: float
    boundary: bool = False

    def __float__(self):
        return float(self.xi)


@dataclass(frozen=True)
class KPrimeConfig:
    m_count: int = 8
    weight_exponent: float = 2.0

    def __post_init__(self):
        if self.m_count < 2:
            raise ValueError("m_count must be at least 2")


class _Curve:
    """Log-ratios of one (k, convention, n) layout, shared by every sample."""

    def __init__(self, k, convention, n=None):
        j = k // 2
        self.k, self.j = k, j
        self.a, self.b = _log_ratios(np.arange(1, j), k, convention, n)

    def terms(self, xi):
        """log(1+u~), and du~/dxi / (1+u~), for xi of shape (..., 1)."""
        u = _u_from_logs(xi, self.a, self.b)
        du = _du_from_logs(xi, self.a, self.b)
        return np.log1p(u), du / (1.0 + u)

    def objective(self, xi, log_data):
        lu, _ = self.terms(np.asarray(xi, dtype=float)[..., None])
        return np.sum((log_data - lu) ** 2, axis=-1)

    def gradient(self, xi, log_data):
        lu, w = self.terms(np.asarray(xi, dtype=float)[..., None])
        return -np.sum(w * (log_data - lu), axis=-1)


def _check_fit_u(u):
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise DomainError("scaled data contains non-finite values")
    if np.any(u <= -1):
        raise DomainError("scaled data u_i <= -1: log(1 + u_i) undefined")
    return u


def curvefit_objective(xi, tail: ScaledTail):
    """Sum of squared horizontal residuals ``sum_{i<j} (log(1+u_i) - log(1+u~_i))^2``."""
    curve = _Curve(tail.k, tail.convention, tail.n)
    log_data = np.log1p(_check_fit_u(tail.fit_u))
    out = curve.objective(xi, log_data)
    return out[()] if np.ndim(out) == 0 else out


def curvefit_gradient(xi, tail: ScaledTail):
    """Half the derivative of :func:`curvefit_objective` with respect to ``xi``.

    Equal to ``-sum 1/(1+u~_i) du~_i/dxi log((1+u_i)/(1+u~_i))``: positive
    where the objective is rising, so minima are rising zero crossings.
    """
    curve = _Curve(tail.k, tail.convention, tail.n)
    log_data = np.log1p(_check_fit_u(tail.fit_u))
    out = curve.gradient(xi, log_data)
    return out[()] if np.ndim(out) == 0 else out


def estimate_xi_batch(u, k: int = DEFAULT_K, cfg: FitConfig | None = None,
                      n: int | None = None):
    """Curve-fit estimates for many samples at once.

    Parameters
    ----------
    u : array_like, shape (m, j-1) or (m, k)
        Scaled data, one sample per row.  Only the first ``j-1`` columns are
        used.
    k : int
        Tail length of the normalisation.
    cfg : FitConfig, optional
        Solver settings; ``cfg.k`` is ignored in favour of ``k``.
    n : int, optional
        Sample size, for conventions that depend on it.

    Returns
    -------
    xi : ndarray, shape (m,)
    boundary : ndarray of bool, shape (m,)
    """
    cfg = cfg or FitConfig(k=k)
    curve = _Curve(k, cfg.convention, n)
    u = _check_fit_u(np.atleast_2d(u)[:, : curve.j - 1])
    log_data = np.log1p(u)
    m = log_data.shape[0]
    lo, hi = cfg.xi_bracket

    grid = np.linspace(lo, hi, cfg.grid_points)
    lu, w = curve.terms(grid[:, None])
    # gradient on the grid for every sample: (m, grid_points)
    grad = -(log_data @ w.T) + np.sum(w * lu, axis=1)
    rising = (grad[:, :-1] <= 0) & (grad[:, 1:] > 0)
    rows, cells = np.nonzero(rising)

    xi = np.empty(m)
    boundary = np.ones(m, dtype=bool)
    if rows.size:
        cols = tuple(log_data[rows, c] for c in range(log_data.shape[1]))

        def f(x, *data):
            lu_x, w_x = curve.terms(x[..., None])
            return -np.sum(w_x * (np.stack(data, axis=-1) - lu_x), axis=-1)

        res = elementwise.find_root(
            f, (grid[cells], grid[cells + 1]), args=cols,
            tolerances=dict(xatol=1e-14, xrtol=4 * np.finfo(float).eps,
                            fatol=cfg.tol, frtol=0.0))
        roots = res.x
        obj = curve.objective(roots, log_data[rows])
        # several minima in one sample: keep the lowest objective
        order = np.lexsort((obj, rows))
        first = np.unique(rows[order], return_index=True)[1]
        best = order[first]
        xi[rows[best]] = roots[best]
        boundary[rows[best]] = False

    if boundary.any():
        ends = np.array([lo, hi])
        end_obj = curve.objective(ends[None, :], log_data[boundary][:, None, :])
        xi[boundary] = ends[np.argmin(end_obj, axis=1)]
    return xi, boundary


def estimate_xi(tail: ScaledTail, cfg: FitConfig | None = None) -> Estimate:
    """Curve-fit estimate of the tail index from one scaled tail.

    Returns the stationary point of the objective with the lowest objective
    value inside ``cfg.xi_bracket``; when no minimum lies inside the bracket,
    returns the better end point with ``boundary=True``.
    """
    cfg = cfg or FitConfig(k=tail.k, convention=tail.convention)
    if cfg.convention is not tail.convention:
        cfg = FitConfig(tail.k, tail.convention, cfg.xi_bracket, cfg.tol, cfg.grid_points)
    xi, boundary = estimate_xi_batch(tail.fit_u[None, :], tail.k, cfg, tail.n)
    return Estimate(float(xi[0]), bool(boundary[0]))


def fit_sample(sample, k: int = DEFAULT_K, cfg: FitConfig | None = None) -> Estimate:
    """Scale the top ``k`` of ``sample`` and estimate the tail index."""
    cfg = cfg or FitConfig(k=k)
    return estimate_xi(scale_tail(sample, k, cfg.convention), cfg)


def kprime_schedule(k: int, m_count: int = 8) -> list[int]:
    """Distinct sub-tail lengths ``k'`` at the ``m/m_count`` fractions of ``k``.

    Each is rounded half away from zero, then odd values are moved up to the
    next even number and floored at 4.  Values never exceed ``k``.
    """
    out = []
    for m in range(1, m_count + 1):
        kp = int(np.floor(m * k / m_count + 0.5))
        kp += kp % 2
        kp = min(max(kp, 4), k)
        if kp not in out:
            out.append(kp)
    return out


def kprime_sequence(sample, k: int, cfg: KPrimeConfig | None = None,
                    fit: FitConfig | None = None):
    """Curve-fit estimates over the ``k'`` schedule.

    Returns the schedule and the estimate at each ``k'``.
    """
    cfg = cfg or KPrimeConfig()
    if not isinstance(sample, OrderedSample):
        sample = OrderedSample.from_values(sample)
    if k % 2 or k > sample.n:
        raise ValueError(f"k must be even and <= n, got k={k}, n={sample.n}")
    kps = kprime_schedule(k, cfg.m_count)
    if len(kps) < 2:
        raise ValueError(f"k={k} yields fewer than 2 distinct sub-tail lengths")
    fit = fit or FitConfig()
    estimates = [fit_sample(sample, kp, FitConfig(kp, Convention.K_HALF, fit.xi_bracket,
                                                  fit.tol, fit.grid_points)).xi
                 for kp in kps]
    return np.array(kps), np.array(estimates)


def kprime_intercept(kps, estimates, weight_exponent: float = 2.0) -> float:
    """``k' = 0`` intercept of the weighted line through ``(k', xi'(k'))``.

    The squared residuals are weighted by ``k'**weight_exponent``.
    """
    kps = np.asarray(kps, dtype=float)
    # polyfit weights multiply the residuals, hence the square root
    w = kps ** (weight_exponent / 2.0)
    _slope, intercept = np.polyfit(kps, np.asarray(estimates, dtype=float), 1, w=w)
    return float(intercept)


def kprime_estimate(sample, k: int, cfg: KPrimeConfig | None = None,
                    fit: FitConfig | None = None) -> float:
    """Back-extrapolated tail index: the intercept of :func:`kprime_intercept`
    over the estimates of :func:`kprime_sequence`."""
    cfg = cfg or KPrimeConfig()
    kps, est = kprime_sequence(sample, k, cfg, fit)
    return kprime_intercept(kps, est, cfg.weight_exponent)
