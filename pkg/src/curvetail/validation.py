"""Monte Carlo measurement of delivered recurrence levels.

For each of ``samples`` draws of size ``n`` a prediction ``x_T`` is issued at
every requested extrapolation ratio.  Its realised exceedance probability
``G_del`` is either counted among ``test_points`` fresh draws (EMPIRICAL) or
evaluated exactly from the distribution (ANALYTIC).  The delivered level is
``T_del = 1 / mean(G_del)``.

Samples are processed in fixed-size chunks, each with its own child of the
master :class:`numpy.random.SeedSequence`, and reduced in chunk order, so the
result does not depend on how many workers run the chunks.
"""

from __future__ import annotations

import csv
import enum
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NumericFailure
from .increment.table import DEFAULT_LEVELS, IncrementTable
from .predictor import PredictorMode, predict_batch
from .zoo import DistributionSpec, zoo_draw, zoo_tail

CSV_HEADER = ("family", "params", "n", "k", "e_ratio", "t_des", "t_del", "g_del_mean",
              "g_del_sem", "samples", "test_points", "mode", "seed")
MAX_FAILED_FRACTION = 0.01
MIN_COUNT = 100


class Mode(str, enum.Enum):
    EMPIRICAL = "empirical"
    ANALYTIC = "analytic"


@dataclass(frozen=True)
class ValidationConfig:
    """One delivered-level experiment.

    ``table`` is only consulted in ADJUSTED mode; ``None`` means the shipped
    table.  ``chunk`` sets the RNG sub-stream granularity and therefore is
    part of what makes a run reproducible.
    """

    spec: DistributionSpec
    n: int = 20
    k: int = 20
    levels: tuple = DEFAULT_LEVELS
    samples: int = 10000
    test_points: int = 10000
    mode: Mode = Mode.EMPIRICAL
    predictor: PredictorMode = PredictorMode.ADJUSTED
    seed: int = 0
    table: IncrementTable | None = field(default=None, compare=False, repr=False)
    chunk: int = 250

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "predictor", PredictorMode(self.predictor))
        object.__setattr__(self, "levels", tuple(float(e) for e in self.levels))
        if not self.levels:
            raise ValueError("at least one extrapolation ratio is required")
        if self.samples < MIN_COUNT or self.test_points < MIN_COUNT:
            raise ValueError(f"samples and test_points must be >= {MIN_COUNT}")
        if self.n < self.k:
            raise ValueError(f"n={self.n} must be >= k={self.k}")
        if self.chunk < 1:
            raise ValueError("chunk must be positive")

    def describe(self) -> dict:
        return {
            "family": self.spec.family.value, "label": self.spec.label,
            "params": self.spec.params_text(), "xi_da": self.spec.xi_da,
            "n": self.n, "k": self.k, "levels": list(self.levels),
            "samples": self.samples, "test_points": self.test_points,
            "mode": self.mode.value, "predictor": self.predictor.value,
            "seed": self.seed, "chunk": self.chunk,
            "table": None if self.table is None else dict(self.table.meta),
        }


@dataclass(frozen=True)
class LevelResult:
    e_ratio: float
    t_des: float
    t_del: float
    g_mean: float
    g_sem: float
    samples: int
    test_points: int | None

    @property
    def ratio(self) -> float:
        """``T_del / T_des``."""
        return self.t_del / self.t_des


@dataclass
class ValidationReport:
    config: ValidationConfig
    levels: list
    failed_samples: int = 0
    boundary_estimates: int = 0
    wall_time: float = 0.0

    def level(self, e_ratio: float) -> LevelResult:
        for lev in self.levels:
            if math.isclose(lev.e_ratio, e_ratio, rel_tol=1e-9):
                return lev
        raise KeyError(e_ratio)

    def csv_rows(self):
        cfg = self.config
        for lev in self.levels:
            yield (cfg.spec.family.value, cfg.spec.params_text(), cfg.n, cfg.k,
                   repr(lev.e_ratio), repr(lev.t_des), repr(lev.t_del), repr(lev.g_mean),
                   repr(lev.g_sem), lev.samples,
                   "" if lev.test_points is None else lev.test_points,
                   cfg.mode.value, cfg.seed)


def _chunk_sizes(total, chunk):
    full, rest = divmod(total, chunk)
    return [chunk] * full + ([rest] if rest else [])


def draw_tops(spec, n, k, size, rng):
    """The top ``k`` order statistics, descending, of ``size`` samples."""
    data = zoo_draw(spec, (size, n), rng)
    return -np.sort(-data, axis=1)[:, :k]


def exceedance(spec, x_t, mode, test_points, rng):
    """Realised exceedance probabilities of predictions ``x_t`` (m, L)."""
    if mode is Mode.ANALYTIC:
        return zoo_tail(spec, x_t, strict=False)
    test = zoo_draw(spec, (x_t.shape[0], test_points), rng)
    counts = np.empty(x_t.shape)
    for c in range(x_t.shape[1]):
        counts[:, c] = np.count_nonzero(test > x_t[:, c : c + 1], axis=1)
    return counts / test_points


def _run_chunk(cfg, size, seed_seq, predictor, table):
    rng = np.random.default_rng(seed_seq)
    top = draw_tops(cfg.spec, cfg.n, cfg.k, size, rng)
    if predictor is None:
        x_t, _, boundary, bad = predict_batch(top, cfg.levels, cfg.k, cfg.predictor, table,
                                              cfg.n)
    else:
        x_t = np.asarray(predictor(top, cfg.levels, cfg.n), dtype=float)
        boundary = np.zeros(size, dtype=bool)
        bad = ~np.all(np.isfinite(x_t), axis=1)
    g = exceedance(cfg.spec, np.where(bad[:, None], 0.0, x_t), cfg.mode, cfg.test_points, rng)
    return g[~bad], int(bad.sum()), int(boundary.sum())


def delivered_levels(cfg: ValidationConfig, workers: int = 1,
                     predictor=None) -> ValidationReport:
    """Measure ``T_del`` at every level of ``cfg``.

    Parameters
    ----------
    cfg : ValidationConfig
    workers : int
        Threads used to run chunks; results are identical for any value.
    predictor : callable, optional
        Replaces the curve-fit predictor: called as
        ``predictor(top, e_ratios, n)`` with the ``(m, k)`` top order
        statistics and returning ``x_T`` of shape ``(m, len(e_ratios))``.

    Raises
    ------
    NumericFailure
        If more than 1% of samples failed to produce a prediction.
    """
    start = time.perf_counter()
    table = cfg.table
    if predictor is None and cfg.predictor is PredictorMode.ADJUSTED and table is None:
        from .increment.table import default_table
        table = default_table()
    sizes = _chunk_sizes(cfg.samples, cfg.chunk)
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(sizes))
    tasks = list(zip(sizes, seeds))

    def run(task):
        return _run_chunk(cfg, task[0], task[1], predictor, table)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, tasks))
    else:
        parts = [run(t) for t in tasks]

    g = np.concatenate([p[0] for p in parts], axis=0)
    failed = sum(p[1] for p in parts)
    boundary = sum(p[2] for p in parts)
    if failed > MAX_FAILED_FRACTION * cfg.samples:
        raise NumericFailure(f"{failed} of {cfg.samples} samples failed to predict")

    used = g.shape[0]
    results = []
    for c, e in enumerate(cfg.levels):
        mean = float(g[:, c].mean())
        sem = float(g[:, c].std(ddof=1) / math.sqrt(used)) if used > 1 else math.nan
        t_del = 1.0 / mean if mean > 0 else math.inf
        tp = cfg.test_points if cfg.mode is Mode.EMPIRICAL else None
        results.append(LevelResult(e, (cfg.n + 1) * e, t_del, mean, sem, used, tp))
    return ValidationReport(cfg, results, failed, boundary, time.perf_counter() - start)


@dataclass
class SweepResult:
    reports: list
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def sweep(cfgs, workers: int = 1, predictor=None) -> SweepResult:
    """Run :func:`delivered_levels` over several configurations.

    A failing configuration does not stop the sweep; it is recorded in
    ``failures`` as ``(config, exception)``.
    """
    cfgs = list(cfgs)
    if not cfgs:
        raise ValueError("sweep needs at least one configuration")
    out = SweepResult([])
    for cfg in cfgs:
        try:
            out.reports.append(delivered_levels(cfg, workers, predictor))
        except (NumericFailure, ValueError) as exc:
            out.failures.append((cfg, exc))
    return out


def write_csv(reports, destination) -> None:
    """One row per (distribution, n, level); LF line endings, ``.`` decimals."""
    def emit(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for rep in reports:
            writer.writerows(rep.csv_rows())

    if hasattr(destination, "write"):
        emit(destination)
    else:
        with Path(destination).open("w", encoding="utf-8", newline="") as fh:
            emit(fh)


def gpd_configs(xis, **kwargs):
    from .zoo import gpd_spec
    return [ValidationConfig(gpd_spec(xi), **kwargs) for xi in xis]
