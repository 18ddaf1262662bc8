"""Generalised Pareto distribution: tail function, quantiles, sampling.

Everything is written through :func:`~curvetail._stable.exprel` /
:func:`~curvetail._stable.log1prel`, so ``xi = 0`` (the exponential) is an
ordinary point rather than a special case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._stable import exprel, log1prel
from .construction import OrderedSample
from .errors import DomainError

# largest double strictly below 1; keeps inverse-transform draws off g = 1
_ONE_MINUS = 1.0 - 2.0 ** -53


@dataclass(frozen=True)
class GpdParams:
    """Location ``mu``, scale ``sigma > 0`` and shape ``xi`` of a GPD."""

    mu: float = 0.0
    sigma: float = 1.0
    xi: float = 0.0

    def __post_init__(self):
        for name in ("mu", "sigma", "xi"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"GPD parameter {name} must be finite")
        if not self.sigma > 0:
            raise ValueError(f"GPD scale must be positive, got {self.sigma}")

    @property
    def upper(self) -> float:
        """Upper support endpoint (``inf`` for ``xi >= 0``)."""
        return self.mu - self.sigma / self.xi if self.xi < 0 else math.inf


def gpd_tail(x, p: GpdParams, strict: bool = True):
    """Exceedance probability ``G(x) = [1 + xi (x - mu)/sigma]^(-1/xi)``.

    Parameters
    ----------
    x : float or array_like
    p : GpdParams
    strict : bool
        If true, points outside the support raise :class:`DomainError`.
        Otherwise they map to 1 (below ``mu``) or 0 (above the upper
        endpoint), which is what exceedance counting needs.
    """
    x = np.asarray(x, dtype=float)
    z = (x - p.mu) / p.sigma
    z_max = -1.0 / p.xi if p.xi < 0 else np.inf
    if strict:
        if np.any(z < 0):
            raise DomainError(f"x below the lower support bound mu={p.mu}")
        if np.any(z > z_max):
            raise DomainError(f"x above the upper support bound {p.upper}")
    zc = np.clip(z, 0.0, z_max)
    # log(1 + xi z)/xi = z * log1prel(xi z); the upper endpoint gives exp(-inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(-zc * log1prel(p.xi * zc))
    out = np.where(zc == 0.0, 1.0, out)
    return out[()] if out.ndim == 0 else out


def gpd_quantile(g, p: GpdParams):
    """Level exceeded with probability ``g``: ``mu + sigma/xi (g^-xi - 1)``.

    Raises
    ------
    DomainError
        Unless ``0 < g <= 1``.
    """
    g = np.asarray(g, dtype=float)
    if np.any(~((g > 0) & (g <= 1))):
        raise DomainError("exceedance probability must lie in (0, 1]")
    ell = -np.log(g)
    out = p.mu + p.sigma * ell * exprel(p.xi * ell)
    return out[()] if out.ndim == 0 else out


def uniform_exceedance(rng: np.random.Generator, size):
    """Uniform exceedance probabilities on (0, 1) for inverse-transform draws."""
    return np.minimum(1.0 - rng.random(size), _ONE_MINUS)


def gpd_draw(p: GpdParams, size, rng: np.random.Generator) -> np.ndarray:
    """Unsorted i.i.d. GPD draws of the given shape."""
    return gpd_quantile(uniform_exceedance(rng, size), p)


def gpd_sample(n: int, p: GpdParams, rng) -> OrderedSample:
    """``n`` i.i.d. GPD draws by inverse transform, sorted descending.

    ``rng`` is a :class:`numpy.random.Generator` or anything accepted by
    :func:`numpy.random.default_rng` (e.g. an integer seed).
    """
    if n < 2:
        raise ValueError("an ordered sample needs n >= 2")
    rng = np.random.default_rng(rng)
    x = np.sort(gpd_draw(p, n, rng))[::-1]
    return OrderedSample(x, meta={"family": "gpd", "params": p})
