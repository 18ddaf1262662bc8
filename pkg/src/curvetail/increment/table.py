"""The increment surface dxi(xi_hat, E_R): storage, lookup and file format.

File layout (version 1)::

    # comment lines are ignored
    version=1
    k=20
    n=20
    seed=12345
    samples=10000
    test_points=10000
    levels=1,2.380952380952381,...
    xi_hat,dxi_1,dxi_2,...
    -6,0.41,0.93,...
    ...

Any other ``key=value`` header is kept verbatim in ``meta``.  Floats are
written with ``repr`` so a save/load round trip is lossless.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import LevelRangeError, TableFormatError

TABLE_VERSION = 1
DEFAULT_LEVELS = (1.0, 50 / 21, 100 / 21, 200 / 21, 400 / 21)
DEFAULT_XI_GRID = np.round(np.linspace(-6.0, 6.0, 121), 12)
TABLE_ENV = "CURVETAIL_TABLE"
_SHIPPED = "increment_n20_k20.txt"
_RESERVED = ("version", "k", "n", "levels")


@dataclass
class IncrementTable:
    """Tabulated increments, ``values[level, node]``.

    ``meta`` holds calibration provenance (seed, sample counts, ...); its
    values round-trip as strings.
    """

    xi_grid: np.ndarray
    levels: np.ndarray
    values: np.ndarray
    k: int = 20
    n: int = 20
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.xi_grid = np.asarray(self.xi_grid, dtype=float)
        self.levels = np.asarray(self.levels, dtype=float)
        self.values = np.atleast_2d(np.asarray(self.values, dtype=float))
        self.meta = {str(k): str(v) for k, v in self.meta.items()}
        if self.xi_grid.ndim != 1 or self.xi_grid.size < 3:
            raise ValueError("xi grid needs at least 3 nodes")
        if np.any(np.diff(self.xi_grid) <= 0):
            raise ValueError("xi grid must be strictly ascending")
        if self.levels.ndim != 1 or self.levels.size < 1 or np.any(np.diff(self.levels) <= 0):
            raise ValueError("levels must be non-empty and strictly ascending")
        if self.values.shape != (self.levels.size, self.xi_grid.size):
            raise ValueError(f"values shape {self.values.shape} does not match "
                             f"{self.levels.size} levels x {self.xi_grid.size} nodes")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("increment values must be finite")

    def __eq__(self, other):
        if not isinstance(other, IncrementTable):
            return NotImplemented
        return (np.array_equal(self.xi_grid, other.xi_grid)
                and np.array_equal(self.levels, other.levels)
                and np.array_equal(self.values, other.values)
                and self.k == other.k and self.n == other.n and self.meta == other.meta)

    def monotone_violations(self):
        """(node indices, level indices) where dxi decreases with E_R."""
        bad = np.diff(self.values, axis=0) < 0
        lev, node = np.nonzero(bad)
        return node, lev

    def is_monotone(self) -> bool:
        return not np.any(np.diff(self.values, axis=0) < 0)

    @property
    def level_range(self):
        return float(self.levels[0]), float(self.levels[-1])


def zero_table(levels=DEFAULT_LEVELS, xi_grid=DEFAULT_XI_GRID, k=20, n=20) -> IncrementTable:
    """A table of zero increments: adjusted prediction equals the naive one."""
    levels = np.asarray(levels, dtype=float)
    xi_grid = np.asarray(xi_grid, dtype=float)
    return IncrementTable(xi_grid, levels, np.zeros((levels.size, xi_grid.size)), k, n,
                          {"source": "zero"})


def _tail_extrapolate(x, nodes, vals):
    """Exponential continuation ``A + B r^m`` through the last three nodes.

    ``nodes``/``vals`` run outward from the grid end.  A decaying ratio
    (``0 < r < 1``) approaches an asymptote; otherwise the end value is held.
    """
    h = nodes[1] - nodes[0]
    d1, d2 = vals[1] - vals[0], vals[2] - vals[1]
    m = (x - nodes[2]) / h
    if d1 == 0 or d2 == 0 or not 0 < d2 / d1 < 1:
        return np.full_like(x, vals[2])
    r = d2 / d1
    # continuation of the geometric series of increments past the end node
    return vals[2] + d2 * r * (1 - r ** m) / (1 - r)


def _interp_column(table, col, xi_hat):
    grid = table.xi_grid
    out = np.interp(xi_hat, grid, col)
    left = xi_hat < grid[0]
    if np.any(left):
        out[left] = _tail_extrapolate(xi_hat[left], grid[2::-1], col[2::-1])
    right = xi_hat > grid[-1]
    if np.any(right):
        out[right] = _tail_extrapolate(xi_hat[right], grid[-3:], col[-3:])
    return out


def dxi_lookup(table: IncrementTable, xi_hat, e_ratio):
    """Increment at estimate(s) ``xi_hat`` and extrapolation ratio ``e_ratio``.

    Bilinear inside the grid.  Beyond the ends of the ``xi_hat`` grid each
    level column is continued exponentially from its last three nodes.  No
    extrapolation in ``E_R``.

    Raises
    ------
    LevelRangeError
        If ``e_ratio`` lies outside the stored levels.
    """
    xi_hat = np.asarray(xi_hat, dtype=float)
    scalar = xi_hat.ndim == 0
    xi_hat = np.atleast_1d(xi_hat)
    levels = table.levels
    # tolerate float noise from T/(N+1) at the level ends
    tol = 1e-12 * max(1.0, abs(levels[-1]))
    if not levels[0] - tol <= e_ratio <= levels[-1] + tol:
        raise LevelRangeError(
            f"extrapolation ratio {e_ratio:g} outside the table range "
            f"[{levels[0]:g}, {levels[-1]:g}]")
    e = min(max(e_ratio, levels[0]), levels[-1])
    hi = int(np.searchsorted(levels, e))
    if hi < levels.size and levels[hi] == e:
        out = _interp_column(table, table.values[hi], xi_hat)
    else:
        lo = hi - 1
        t = (e - levels[lo]) / (levels[hi] - levels[lo])
        out = ((1 - t) * _interp_column(table, table.values[lo], xi_hat)
               + t * _interp_column(table, table.values[hi], xi_hat))
    return float(out[0]) if scalar else out


def _fmt(x) -> str:
    return repr(float(x))


def dumps_table(table: IncrementTable) -> str:
    buf = io.StringIO()
    buf.write(f"version={TABLE_VERSION}\n")
    buf.write(f"k={table.k}\n")
    buf.write(f"n={table.n}\n")
    for key in sorted(table.meta):
        if key in _RESERVED or "\n" in table.meta[key]:
            continue
        buf.write(f"{key}={table.meta[key]}\n")
    buf.write("levels=" + ",".join(_fmt(v) for v in table.levels) + "\n")
    buf.write("xi_hat," + ",".join(f"dxi_{m + 1}" for m in range(table.levels.size)) + "\n")
    for node, xi in enumerate(table.xi_grid):
        buf.write(",".join([_fmt(xi)] + [_fmt(v) for v in table.values[:, node]]) + "\n")
    return buf.getvalue()


def save_table(table: IncrementTable, destination) -> None:
    """Write ``table`` to a path or text stream."""
    text = dumps_table(table)
    if hasattr(destination, "write"):
        destination.write(text)
        return
    Path(destination).write_text(text, encoding="utf-8", newline="\n")


def _parse_float(text, line):
    try:
        value = float(text)
    except ValueError:
        raise TableFormatError(f"not a number: {text!r}", line) from None
    if not math.isfinite(value):
        raise TableFormatError(f"non-finite value {text!r}", line)
    return value


def loads_table(text: str) -> IncrementTable:
    header = {}
    rows = []
    column_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if column_line is None:
            if line.startswith("xi_hat,"):
                column_line = lineno
                ncols = len(line.split(","))
                continue
            if "=" not in line:
                raise TableFormatError(f"expected key=value header, got {line!r}", lineno)
            key, value = line.split("=", 1)
            header[key.strip()] = (value.strip(), lineno)
            continue
        cells = line.split(",")
        if len(cells) != ncols:
            raise TableFormatError(f"expected {ncols} columns, got {len(cells)}", lineno)
        rows.append(([_parse_float(c, lineno) for c in cells], lineno))

    if "version" not in header:
        raise TableFormatError("missing version header")
    version, vline = header["version"]
    if version != str(TABLE_VERSION):
        raise TableFormatError(f"unsupported table version {version!r} "
                               f"(expected {TABLE_VERSION})", vline)
    if "levels" not in header:
        raise TableFormatError("missing levels header")
    if column_line is None or not rows:
        raise TableFormatError("no data rows")
    lev_text, lev_line = header["levels"]
    levels = [_parse_float(v, lev_line) for v in lev_text.split(",")]
    if len(levels) != ncols - 1:
        raise TableFormatError(f"{len(levels)} levels but {ncols - 1} value columns",
                               column_line)
    prev = None
    for cells, lineno in rows:
        if prev is not None and cells[0] <= prev:
            raise TableFormatError("xi_hat grid must be strictly ascending", lineno)
        prev = cells[0]
    ints = {}
    for key in ("k", "n"):
        if key in header:
            value, line = header[key]
            try:
                ints[key] = int(value)
            except ValueError:
                raise TableFormatError(f"{key} must be an integer", line) from None
    meta = {k: v for k, (v, _) in header.items() if k not in _RESERVED}
    data = np.array([cells for cells, _ in rows])
    try:
        return IncrementTable(data[:, 0], np.array(levels), data[:, 1:].T,
                              ints.get("k", 20), ints.get("n", 20), meta)
    except ValueError as exc:
        raise TableFormatError(str(exc)) from None


def load_table(source) -> IncrementTable:
    """Read a table from a path or text stream, validating every invariant.

    Raises
    ------
    TableFormatError
        On version mismatch, malformed or non-finite rows (with the line
        number), or a non-ascending grid.
    """
    if hasattr(source, "read"):
        return loads_table(source.read())
    return loads_table(Path(source).read_text(encoding="utf-8"))


def shipped_table_path():
    return resources.files("curvetail").joinpath("data", _SHIPPED)


def default_table() -> IncrementTable:
    """The table named by ``$CURVETAIL_TABLE``, else the shipped N=k=20 table."""
    env = os.environ.get(TABLE_ENV)
    if env:
        return load_table(env)
    return loads_table(shipped_table_path().read_text(encoding="utf-8"))
