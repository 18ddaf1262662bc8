"""Extreme-value prediction from the top ``k`` order statistics.

Estimation runs on the ``(i - 0.5)/N`` construction; the extrapolation then
uses the ``i/(N+1)`` positions with ``G_T = 1/T``::

    x_T = x_j + (x_j - x_k) u_T,   u_T = (g_T^xi_p - 1) / (1 - alpha^xi_p)

with ``g_T = G_j/G_T = j E_R`` and ``alpha = j/k``.  In NAIVE mode
``xi_p = xi_hat``; in ADJUSTED mode ``xi_p = xi_hat + dxi(xi_hat, E_R)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .construction import (DEFAULT_K, Convention, OrderedSample, _u_from_logs,
                           check_k, scale_tail)
from .estimator import FitConfig, estimate_xi, estimate_xi_batch
from .increment.table import IncrementTable, default_table, dxi_lookup


class PredictorMode(str, enum.Enum):
    NAIVE = "naive"
    ADJUSTED = "adjusted"


@dataclass(frozen=True)
class PredictionRequest:
    """Inputs of one prediction; ``table`` defaults to the shipped table."""

    sample: OrderedSample
    t_des: float
    k: int = DEFAULT_K
    mode: PredictorMode = PredictorMode.ADJUSTED
    table: IncrementTable | None = None

    def __post_init__(self):
        sample = self.sample
        if not isinstance(sample, OrderedSample):
            sample = OrderedSample.from_values(sample)
            object.__setattr__(self, "sample", sample)
        object.__setattr__(self, "mode", PredictorMode(self.mode))
        check_k(self.k, sample.n)
        if not self.t_des > sample.n:
            raise ValueError(f"desired level T={self.t_des:g} must exceed N={sample.n}")

    @property
    def e_ratio(self) -> float:
        return self.t_des / (self.sample.n + 1)


@dataclass(frozen=True)
class PredictionResult:
    x_t: float
    xi_hat: float
    xi_p: float
    e_ratio: float
    u_t: float
    boundary: bool = False


def normalised_prediction(xi_p, e_ratio, k: int = DEFAULT_K):
    """``u_T`` for prediction shape ``xi_p`` at extrapolation ratio ``E_R``."""
    j = k // 2
    a = np.log(j * np.asarray(e_ratio, dtype=float))  # log g_T
    b = np.log(j / k)  # log alpha
    out = _u_from_logs(np.asarray(xi_p, dtype=float), a, b)
    return out[()] if np.ndim(out) == 0 else out


def _resolve_table(mode, table):
    if mode is PredictorMode.NAIVE:
        return None
    return table if table is not None else default_table()


def predict(req: PredictionRequest) -> PredictionResult:
    """Predict the level exceeded with probability ``1/t_des``.

    Affine equivariant: scaling the data by ``a > 0`` and shifting by ``b``
    maps ``x_t`` to ``a x_t + b``.

    Raises
    ------
    DegenerateDataError
        If ``x_j == x_k``.
    LevelRangeError
        In ADJUSTED mode, if ``E_R`` is outside the table's levels.
    """
    table = _resolve_table(req.mode, req.table)
    tail = scale_tail(req.sample, req.k, Convention.K_HALF)
    est = estimate_xi(tail, FitConfig(k=req.k))
    return _extrapolate(req.sample, est, req.e_ratio, req.k, table)


def _extrapolate(sample, est, e, k, table):
    dxi = 0.0 if table is None else dxi_lookup(table, est.xi, e)
    xi_p = est.xi + dxi
    u_t = float(normalised_prediction(xi_p, e, k))
    x = sample.values
    j = k // 2
    x_t = x[j - 1] + (x[j - 1] - x[k - 1]) * u_t
    return PredictionResult(float(x_t), est.xi, float(xi_p), e, u_t, est.boundary)


def prediction_curve(sample, e_grid, k: int = DEFAULT_K,
                     mode=PredictorMode.ADJUSTED, table: IncrementTable | None = None):
    """Predictions over a grid of extrapolation ratios.

    Returns the ratios and the corresponding ``x_T`` as arrays; the
    estimate is computed once.
    """
    mode = PredictorMode(mode)
    if not isinstance(sample, OrderedSample):
        sample = OrderedSample.from_values(sample)
    e_grid = np.atleast_1d(np.asarray(e_grid, dtype=float))
    # validates k and the smallest level against N
    PredictionRequest(sample, e_grid.min() * (sample.n + 1), k, mode, table)
    table = _resolve_table(mode, table)
    est = estimate_xi(scale_tail(sample, k, Convention.K_HALF), FitConfig(k=k))
    x_t = [_extrapolate(sample, est, e, k, table).x_t for e in e_grid]
    return e_grid, np.array(x_t)


def predict_batch(top, e_ratios, k: int = DEFAULT_K, mode=PredictorMode.ADJUSTED,
                  table: IncrementTable | None = None, n: int | None = None):
    """Vectorised predictions for many samples.

    Parameters
    ----------
    top : array_like, shape (m, >= k)
        Each row holds a sample's order statistics, descending.
    e_ratios : sequence of float
        Extrapolation ratios.

    Returns
    -------
    x_t : ndarray, shape (m, len(e_ratios))
        NaN rows mark samples with a degenerate spacing.
    xi_hat : ndarray, shape (m,)
    boundary : ndarray of bool, shape (m,)
    degenerate : ndarray of bool, shape (m,)
    """
    mode = PredictorMode(mode)
    table = _resolve_table(mode, table)
    top = np.asarray(top, dtype=float)
    j = k // 2
    xj, xk = top[:, j - 1], top[:, k - 1]
    spacing = xj - xk
    degenerate = ~(spacing > 0)
    safe = np.where(degenerate, 1.0, spacing)
    u = (top[:, : j - 1] - xj[:, None]) / safe[:, None]
    u[degenerate] = 1.0
    xi_hat, boundary = estimate_xi_batch(u, k, FitConfig(k=k), n)
    e_ratios = np.atleast_1d(np.asarray(e_ratios, dtype=float))
    x_t = np.empty((top.shape[0], e_ratios.size))
    for c, e in enumerate(e_ratios):
        xi_p = xi_hat if table is None else xi_hat + dxi_lookup(table, xi_hat, e)
        x_t[:, c] = xj + spacing * normalised_prediction(xi_p, e, k)
    x_t[degenerate] = np.nan
    return x_t, xi_hat, boundary, degenerate

