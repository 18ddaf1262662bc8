"""Automated calibration of increment columns on GPD samples.

One column ``dxi(., E_R)`` is calibrated at a time:

1. For each test shape ``xi`` a fixed batch of GPD samples is drawn and
   estimated once (common random numbers across sweeps, so the loop is
   deterministic and cheap).
2. The column starts as an exponential through the constant increments that
   match the target at the two extreme test shapes.
3. Broad Gaussian bumps, centred one bandwidth apart across the test range,
   are added to it.  Each sweep is a damped Gauss-Newton step on the bump
   amplitudes that drives ``log(T_des / T_del)`` towards zero at every test
   shape; the Jacobian comes from finite differences of the exact
   exceedance probabilities.  Steps move the column by at most
   ``MAX_STEP`` anywhere.
4. It stops once ``max |T_del / T_des - 1| <= band``.

Levels are calibrated in ascending order and each column is kept at or
above the previous one.  Setting ``min_increment`` also bounds columns
beyond ``E_R = 1`` from below; this is off by default because it costs
accuracy at strongly negative shapes.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .. import __version__
from ..errors import CalibrationError
from ..predictor import normalised_prediction
from ..estimator import FitConfig, estimate_xi_batch
from ..validation import Mode, draw_tops, exceedance
from ..zoo import gpd_spec
from .table import DEFAULT_LEVELS, DEFAULT_XI_GRID, IncrementTable, dxi_lookup

MAX_STEP = 0.2
_JAC_DELTA = 0.01
_RATIO_CAP = 50.0
_RIDGE = 1e-3


@dataclass(frozen=True)
class CalibConfig:
    """Calibration settings.  Counts below 100 are rejected."""

    xi_test_grid: tuple = tuple(np.round(np.linspace(-5.0, 5.0, 41), 12))
    samples: int = 10000
    test_points: int = 10000
    band: float = 0.05
    max_sweeps: int = 60
    bandwidth: float = 0.5
    seed: int = 20240521
    mode: Mode = Mode.ANALYTIC
    xi_grid: tuple = tuple(DEFAULT_XI_GRID)
    n: int = 20
    k: int = 20
    workers: int = 1
    min_increment: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "xi_test_grid", tuple(float(x) for x in self.xi_test_grid))
        object.__setattr__(self, "xi_grid", tuple(float(x) for x in self.xi_grid))
        if self.samples < 100 or self.test_points < 100:
            raise ValueError("samples and test_points must be >= 100")
        if not (self.band > 0 and self.bandwidth > 0):
            raise ValueError("band and bandwidth must be positive")
        if self.min_increment is not None and self.min_increment < 0:
            raise ValueError("min_increment must be >= 0")
        if self.max_sweeps < 0:
            raise ValueError("max_sweeps must be >= 0")
        if len(self.xi_test_grid) < 2:
            raise ValueError("need at least two test shapes")
        if self.n < self.k:
            raise ValueError("n must be >= k")

    def describe(self) -> dict:
        return {
            "xi_test_grid": list(self.xi_test_grid), "samples": self.samples,
            "test_points": self.test_points, "band": self.band,
            "max_sweeps": self.max_sweeps, "bandwidth": self.bandwidth,
            "seed": self.seed, "mode": self.mode.value,
            "xi_grid": [self.xi_grid[0], self.xi_grid[-1], len(self.xi_grid)],
            "n": self.n, "k": self.k, "min_increment": self.min_increment,
        }


@dataclass
class CalibrationResult:
    """Outcome for one level: the best column found and its deviations.

    ``deviation[t]`` is ``T_del / T_des - 1`` at test shape ``t``.
    """

    e_ratio: float
    column: np.ndarray
    deviation: np.ndarray
    converged: bool
    sweeps: int
    history: list = field(default_factory=list)

    @property
    def max_deviation(self) -> float:
        return float(np.max(np.abs(self.deviation)))


@dataclass
class _Node:
    xi: float
    xj: np.ndarray
    spacing: np.ndarray
    xi_hat: np.ndarray
    test_seed: np.random.SeedSequence


class CalibrationSet:
    """Fixed GPD sample batches, one per test shape, estimated once."""

    def __init__(self, cfg: CalibConfig):
        self.cfg = cfg
        children = np.random.SeedSequence(cfg.seed).spawn(len(cfg.xi_test_grid))

        def build(item):
            xi, seq = item
            sample_seq, test_seq = seq.spawn(2)
            rng = np.random.default_rng(sample_seq)
            top = draw_tops(gpd_spec(xi), cfg.n, cfg.k, cfg.samples, rng)
            j = cfg.k // 2
            xj, xk = top[:, j - 1], top[:, cfg.k - 1]
            u = (top[:, : j - 1] - xj[:, None]) / (xj - xk)[:, None]
            xi_hat, _ = estimate_xi_batch(u, cfg.k, FitConfig(k=cfg.k), cfg.n)
            return _Node(xi, xj, xj - xk, xi_hat, test_seq)

        items = list(zip(cfg.xi_test_grid, children))
        if cfg.workers > 1:
            with ThreadPoolExecutor(cfg.workers) as pool:
                self.nodes = list(pool.map(build, items))
        else:
            self.nodes = [build(it) for it in items]

    def analytic_view(self) -> "CalibrationSet":
        """The same batches, with exceedances evaluated exactly."""
        view = CalibrationSet.__new__(CalibrationSet)
        view.cfg = CalibConfig(**{**self.cfg.__dict__, "mode": Mode.ANALYTIC})
        view.nodes = self.nodes
        return view

    def delivered(self, e_ratio: float, dxi_fn) -> np.ndarray:
        """``T_del`` at every test shape for increments ``dxi_fn(xi_hat)``."""
        cfg = self.cfg
        out = np.empty(len(self.nodes))
        for t, node in enumerate(self.nodes):
            xi_p = node.xi_hat + dxi_fn(node.xi_hat)
            x_t = node.xj + node.spacing * normalised_prediction(xi_p, e_ratio, cfg.k)
            rng = np.random.default_rng(node.test_seed)
            g = exceedance(gpd_spec(node.xi), x_t[:, None], cfg.mode, cfg.test_points, rng)
            mean = float(g.mean())
            out[t] = 1.0 / mean if mean > 0 else math.inf
        return out


def _column_fn(cfg, column, e_ratio):
    table = IncrementTable(np.array(cfg.xi_grid), [e_ratio], column[None, :], cfg.k, cfg.n)
    return lambda xi_hat: dxi_lookup(table, xi_hat, e_ratio)


def _constant_match(cset, node, e_ratio, t_des):
    """Constant increment that hits ``t_des`` at one test shape."""
    sub = CalibrationSet.__new__(CalibrationSet)
    sub.cfg, sub.nodes = cset.cfg, [node]

    def misfit(c):
        t_del = sub.delivered(e_ratio, lambda x: np.full_like(x, c))[0]
        return math.log(min(t_del, 1e300) / t_des)

    lo, hi = -3.0, 6.0
    f_lo, f_hi = misfit(lo), misfit(hi)
    if f_lo > 0:
        return lo
    if f_hi < 0:
        return hi
    return brentq(misfit, lo, hi, xtol=1e-4)


def initial_column(cset: CalibrationSet, e_ratio: float) -> np.ndarray:
    """Exponential base through the matched increments at the extreme shapes."""
    cfg = cset.cfg
    t_des = (cfg.n + 1) * e_ratio
    first, last = cset.nodes[0], cset.nodes[-1]
    c_lo = _constant_match(cset, first, e_ratio, t_des)
    c_hi = _constant_match(cset, last, e_ratio, t_des)
    grid = np.array(cfg.xi_grid)
    s = (grid - first.xi) / (last.xi - first.xi)
    if c_lo > 0 and c_hi > 0:
        return c_lo * (c_hi / c_lo) ** s
    return c_lo + (c_hi - c_lo) * s


def bump_basis(cfg) -> np.ndarray:
    """Gaussian bumps on the table grid, shape (grid nodes, bumps)."""
    lo, hi = cfg.xi_test_grid[0], cfg.xi_test_grid[-1]
    count = max(2, int(round((hi - lo) / cfg.bandwidth)) + 1)
    centres = np.linspace(lo, hi, count)
    grid = np.array(cfg.xi_grid)[:, None]
    return np.exp(-0.5 * ((grid - centres[None, :]) / cfg.bandwidth) ** 2)


def _log_misfit(t_del, t_des):
    # bounded so that unreachable nodes (T_del = inf) stay usable
    return np.log(t_des / np.clip(t_del, t_des / _RATIO_CAP, t_des * _RATIO_CAP))


def calibrate(cfg: CalibConfig, e_ratio: float, cset: CalibrationSet | None = None,
              initial=None, floor=None) -> CalibrationResult:
    """Calibrate the increment column for one extrapolation ratio.

    Returns the best column found; ``converged`` tells whether it met the
    band.  ``cset`` lets several levels share the same sample batches.
    ``floor`` is a column the result may not go below (the column of the
    next lower level, so that increments never decrease with ``E_R``).
    """
    cset = cset or CalibrationSet(cfg)
    t_des = (cfg.n + 1) * e_ratio
    base = (np.asarray(initial, dtype=float).copy() if initial is not None
            else initial_column(cset, e_ratio))
    basis = bump_basis(cfg)
    # analytic Jacobians even when residuals are counted empirically
    jac_set = cset if cfg.mode is Mode.ANALYTIC else cset.analytic_view()

    def measure(column, where=cset):
        return where.delivered(e_ratio, _column_fn(cfg, column, e_ratio))

    floor = None if floor is None else np.asarray(floor, dtype=float)
    if floor is not None:
        base = np.maximum(base, floor)
    amps = np.zeros(basis.shape[1])
    column = base.copy()
    t_del = measure(column)
    resid = _log_misfit(t_del, t_des)
    damping = 1e-2
    history = []
    best = None
    sweep = 0
    while True:
        dev = t_del / t_des - 1.0
        worst = float(np.max(np.abs(dev)))
        history.append(worst)
        if best is None or worst < best.max_deviation:
            best = CalibrationResult(e_ratio, column.copy(), dev, worst <= cfg.band, sweep)
        if worst <= cfg.band or sweep >= cfg.max_sweeps:
            break
        sweep += 1
        ref = _log_misfit(measure(column, jac_set), t_des)
        jac = np.empty((resid.size, amps.size))
        for b in range(amps.size):
            shifted = measure(column + _JAC_DELTA * basis[:, b], jac_set)
            jac[:, b] = (ref - _log_misfit(shifted, t_des)) / _JAC_DELTA
        jtj = jac.T @ jac
        # ridge on the accumulated amplitudes keeps weakly identified bumps small
        ridge = _RIDGE * float(np.trace(jtj)) / amps.size
        grad = jac.T @ resid - ridge * amps
        cost = float(resid @ resid) + ridge * float(amps @ amps)
        eye = np.eye(amps.size)
        for _attempt in range(8):
            delta = np.linalg.solve(jtj + (ridge + damping * ridge / _RIDGE) * eye, grad)
            move = basis @ delta
            peak = float(np.max(np.abs(move)))
            if peak > MAX_STEP:
                delta *= MAX_STEP / peak
                move *= MAX_STEP / peak
            trial = column + move if floor is None else np.maximum(column + move, floor)
            t_trial = measure(trial)
            r_trial = _log_misfit(t_trial, t_des)
            new_amps = amps + delta
            if float(r_trial @ r_trial) + ridge * float(new_amps @ new_amps) < cost:
                amps = new_amps
                column, t_del, resid = trial, t_trial, r_trial
                damping = max(damping / 3.0, 1e-6)
                break
            damping *= 4.0
        else:
            break
    best.history = history
    best.sweeps = sweep
    return best


def calibrate_table(cfg: CalibConfig, levels=DEFAULT_LEVELS):
    """Calibrate every level on shared sample batches.

    Returns
    -------
    table : IncrementTable
    results : list of CalibrationResult

    Raises
    ------
    CalibrationError
        If a level misses the band or the table is not non-decreasing in
        ``E_R`` at some node.  ``exc.result`` is ``(table, results)``.
    """
    cset = CalibrationSet(cfg)
    results = []
    for e in sorted(float(v) for v in levels):
        floor = results[-1].column if results else None
        if cfg.min_increment is not None and e > 1.0 + 1e-9:
            lower = np.full(len(cfg.xi_grid), cfg.min_increment)
            floor = lower if floor is None else np.maximum(floor, lower)
        results.append(calibrate(cfg, e, cset, floor=floor))
    meta = {
        "source": "calibrate", "seed": cfg.seed, "samples": cfg.samples,
        "test_points": cfg.test_points, "mode": cfg.mode.value, "band": cfg.band,
        "bandwidth": cfg.bandwidth, "max_sweeps": cfg.max_sweeps,
        "min_increment": "none" if cfg.min_increment is None else cfg.min_increment,
        "xi_test_grid": f"{cfg.xi_test_grid[0]:g}:{cfg.xi_test_grid[-1]:g}:"
                        f"{len(cfg.xi_test_grid)}",
        "library_version": __version__,
        "max_deviation": ",".join(f"{r.max_deviation:.4f}" for r in results),
        "converged": ",".join("1" if r.converged else "0" for r in results),
    }
    table = IncrementTable(np.array(cfg.xi_grid), np.array([r.e_ratio for r in results]),
                           np.vstack([r.column for r in results]), cfg.k, cfg.n, meta)
    failed = [r.e_ratio for r in results if not r.converged]
    if failed:
        raise CalibrationError(
            "calibration did not reach the band at E_R = "
            + ", ".join(f"{e:.4g}" for e in failed), result=(table, results))
    if not table.is_monotone():
        nodes, _ = table.monotone_violations()
        raise CalibrationError(
            f"increments decrease with E_R at xi_hat = {table.xi_grid[nodes[0]]:g}",
            result=(table, results))
    return table, results
