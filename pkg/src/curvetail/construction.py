"""Location/scale-invariant scaling of upper order statistics and the (X, Y)
coordinates of the double-logarithmic construction.

Order statistics are held descending, ``x_1`` being the sample maximum.  The
top ``k`` of them are normalised with the ``j = k/2``-th and ``k``-th values::

    u_i = (x_i - x_j) / (x_j - x_k)

and plotted at ``X = log(1 + u_i)`` against an ordinate fixed by the plotting
positions alone.  A GPD with shape ``xi`` traces one curve of the diagram,
given by :func:`analytic_u`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ._stable import exprel, expm1_second
from .errors import DegenerateDataError, DomainError

DEFAULT_K = 20
DEFAULT_Y_CLIP = 6.0


class Convention(str, enum.Enum):
    """Plotting-position rule for the surrogate exceedance probability G_i.

    ``BASIC`` uses ``i / (N + 1)``, ``K_HALF`` uses ``(i - 0.5) / N``.
    """

    BASIC = "basic"
    K_HALF = "k_half"

    def positions(self, i, n):
        """Plotting positions ``G_i`` for (possibly fractional) indices ``i``."""
        i = np.asarray(i, dtype=float)
        if self is Convention.BASIC:
            return i / (n + 1.0)
        return (i - 0.5) / n


def as_convention(value) -> Convention:
    if isinstance(value, Convention):
        return value
    try:
        return Convention(str(value).lower().replace("-", "_"))
    except ValueError:
        raise ValueError(f"unknown plotting convention {value!r}; "
                         f"expected one of {[c.value for c in Convention]}") from None


@dataclass(frozen=True)
class OrderedSample:
    """A sample stored as descending order statistics.

    Use :meth:`from_values` to build one from unsorted data.  ``meta`` holds
    free-form provenance (distribution, seed, source file ...).
    """

    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ValueError("an ordered sample needs at least 2 values")
        if np.any(np.diff(values) > 0):
            raise ValueError("values must be sorted descending")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, data, **meta) -> "OrderedSample":
        values = np.asarray(data, dtype=float).ravel()
        if not np.all(np.isfinite(values)):
            raise ValueError("sample contains non-finite values")
        return cls(np.sort(values)[::-1], meta=dict(meta))

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self):
        return self.values.size

    def affine(self, a: float, b: float) -> "OrderedSample":
        """The sample mapped through x -> a*x + b (a > 0)."""
        if not a > 0:
            raise ValueError("affine scale must be positive")
        return OrderedSample(a * self.values + b, meta=dict(self.meta))


@dataclass(frozen=True)
class ScaledTail:
    """Invariant statistics ``u_1 .. u_k`` of one sample.

    ``n`` is the size of the sample the tail was taken from; it only matters
    for conventions whose positions are not pure index ratios.
    """

    u: np.ndarray
    k: int
    convention: Convention = Convention.K_HALF
    n: int | None = None

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        check_k(self.k, self.n if self.n is not None else self.k)
        if u.shape != (self.k,):
            raise ValueError(f"expected {self.k} scaled values, got shape {u.shape}")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "convention", as_convention(self.convention))
        if self.n is None:
            object.__setattr__(self, "n", self.k)

    @property
    def j(self) -> int:
        return self.k // 2

    @property
    def fit_u(self) -> np.ndarray:
        """The values entering the curve fit, ``u_1 .. u_{j-1}``."""
        return self.u[: self.j - 1]


def check_k(k, n):
    if int(k) != k or k % 2 or k < 4:
        raise ValueError(f"k must be an even integer >= 4, got {k}")
    if k > n:
        raise ValueError(f"k={k} exceeds the sample size {n}")


def scale_tail(sample, k: int = DEFAULT_K,
               convention=Convention.K_HALF) -> ScaledTail:
    """Normalise the top ``k`` order statistics by the ``k/2``-th and ``k``-th.

    Parameters
    ----------
    sample : OrderedSample or array_like
        Data; plain arrays are sorted descending first.
    k : int
        Even tail length, ``4 <= k <= n``.
    convention : Convention
        Plotting convention recorded on the result.

    Returns
    -------
    ScaledTail
        With ``u[j-1] == 0`` and ``u[k-1] == -1`` exactly.

    Raises
    ------
    DegenerateDataError
        If ``x_j == x_k``.
    """
    if not isinstance(sample, OrderedSample):
        sample = OrderedSample.from_values(sample)
    check_k(k, sample.n)
    x = sample.values[:k]
    j = k // 2
    xj, xk = x[j - 1], x[k - 1]
    spacing = xj - xk
    if not spacing > 0:
        raise DegenerateDataError(f"x_{j} == x_{k}: the normalising spacing vanishes")
    u = (x - xj) / spacing
    u[j - 1] = 0.0
    u[k - 1] = -1.0
    return ScaledTail(u, k, as_convention(convention), sample.n)


def _log_ratios(i, k, convention, n):
    """(log g_i, log alpha) with g_i = G_j/G_i and alpha = G_j/G_k."""
    convention = as_convention(convention)
    n = k if n is None else n
    j = k / 2
    gi = convention.positions(i, n)
    if np.any(gi <= 0):
        raise DomainError("plotting position G_i must be positive")
    gj = convention.positions(j, n)
    gk = convention.positions(k, n)
    return np.log(gj / gi), np.log(gj / gk)


def _u_from_logs(xi, a, b):
    # (g^xi - 1)/(1 - alpha^xi) = a*exprel(a xi) / (-b*exprel(b xi))
    return a * exprel(a * xi) / (-b * exprel(b * xi))


def _du_from_logs(xi, a, b):
    # cancellation-free d/dxi of _u_from_logs; c = a + b
    c = a + b
    num = (a ** 3 * expm1_second(a * xi) + (b - a) * c ** 2 * expm1_second(c * xi)
           - b ** 3 * expm1_second(b * xi))
    return num / (b * exprel(b * xi)) ** 2


def analytic_u(i, k: int = DEFAULT_K, xi=0.0, convention=Convention.K_HALF,
               n: int | None = None):
    """GPD approximation ``(g_i^xi - 1) / (1 - alpha^xi)`` of the scaled tail.

    ``g_i = G_j / G_i`` and ``alpha = G_j / G_k`` under ``convention`` with
    sample size ``n`` (default ``k``).  The ``xi -> 0`` limit
    ``log(g_i) / log(1/alpha)`` is reached continuously.  Broadcasts over
    ``i`` and ``xi``; ``i`` may be fractional.
    """
    a, b = _log_ratios(i, k, convention, n)
    return _u_from_logs(np.asarray(xi, dtype=float), a, b)


def analytic_u_derivative(i, k: int = DEFAULT_K, xi=0.0,
                          convention=Convention.K_HALF, n: int | None = None):
    """d(analytic_u)/d(xi), evaluated without cancellation near xi = 0."""
    a, b = _log_ratios(i, k, convention, n)
    return _du_from_logs(np.asarray(xi, dtype=float), a, b)


def ordinate(i, k: int = DEFAULT_K, convention=Convention.BASIC,
             n: int | None = None):
    """Y = -log(1 - V_i), V_i = log(G_i/G_j) / log(G_k/G_j).

    Returns ``+inf`` where ``V_i = 1`` (``i = k``); that is the unbounded
    ordinate at the bottom of the tail, not an error.
    """
    convention = as_convention(convention)
    n = k if n is None else n
    gi = convention.positions(i, n)
    gj = convention.positions(k / 2, n)
    gk = convention.positions(k, n)
    v = np.log(gi / gj) / np.log(gk / gj)
    with np.errstate(divide="ignore"):
        y = -np.log1p(-v)
    return y[()] if np.ndim(y) == 0 else y


def xy_coords(u_i, i, k: int = DEFAULT_K, convention=Convention.BASIC,
              n: int | None = None):
    """Construction coordinates ``(X, Y)`` of a scaled value ``u_i``.

    ``X = log(1 + u_i)``.  ``Y`` comes from :func:`ordinate` and is ``inf``
    at ``i = k``.

    Raises
    ------
    DomainError
        If any ``u_i <= -1``.
    """
    u_i = np.asarray(u_i, dtype=float)
    if np.any(u_i <= -1):
        raise DomainError("u_i must exceed -1 for X = log(1 + u_i) to exist")
    x = np.log1p(u_i)
    y = ordinate(i, k, convention, n)
    return (x[()] if x.ndim == 0 else x), y


def curve_points(xi: float, k: int = DEFAULT_K, convention=Convention.BASIC,
                 n: int | None = None, r_grid=None, clip: float = DEFAULT_Y_CLIP):
    """Background curve of the construction for shape ``xi``.

    Evaluates :func:`analytic_u` and :func:`ordinate` at fractional indices
    ``i = r*k``.  Coordinates are clipped to ``[-clip, clip]`` so that the
    ``r = 1`` end, where ``X -> -inf`` and ``Y -> +inf``, stays finite.
    Under ``K_HALF``, ratios with ``r*k <= 0.5`` have no plotting position
    and are returned as NaN.

    Returns
    -------
    r, X, Y : ndarray
    """
    if r_grid is None:
        r_grid = np.linspace(0.0, 1.0, 201)[1:]
    r = np.asarray(r_grid, dtype=float)
    if np.any((r <= 0) | (r > 1)):
        raise ValueError("curve ratios must lie in (0, 1]")
    convention = as_convention(convention)
    n = k if n is None else n
    i = r * k
    ok = convention.positions(i, n) > 0
    i_safe = np.where(ok, i, k / 2)
    u = analytic_u(i_safe, k, xi, convention, n)
    with np.errstate(divide="ignore"):
        x = np.log1p(np.maximum(u, -1.0))
    y = ordinate(i_safe, k, convention, n)
    x = np.where(ok, np.clip(x, -clip, clip), np.nan)
    y = np.where(ok, np.clip(y, -clip, clip), np.nan)
    return r, x, y
