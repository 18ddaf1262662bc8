"""Cancellation-free helpers for expressions with a removable singularity at 0.

Every GPD-type expression in this package is a ratio of the form
(e^{a xi} - 1) / xi or log(1 + xi z) / xi, which are 0/0 at xi = 0.  They are
evaluated through the "relative" functions below, which are smooth through 0.
"""

import numpy as np

# below this |x| the leading series terms are exact to double precision
SERIES_THRESHOLD = 1e-8


def exprel(x):
    """(e^x - 1) / x, with the value 1 at x = 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SERIES_THRESHOLD
    safe = np.where(small, 1.0, x)
    with np.errstate(over="ignore"):
        out = np.where(small, 1.0 + 0.5 * x, np.expm1(safe) / safe)
    return out[()] if out.ndim == 0 else out


def log1prel(x):
    """log(1 + x) / x, with the value 1 at x = 0.  Requires x > -1."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SERIES_THRESHOLD
    safe = np.where(small, 1.0, x)
    with np.errstate(divide="ignore"):
        out = np.where(small, 1.0 - 0.5 * x, np.log1p(safe) / safe)
    return out[()] if out.ndim == 0 else out


# (e^x - 1 - x) / x^2 = sum_n x^n / (n + 2)!
_Q_COEFFS = np.array([1 / 2, 1 / 6, 1 / 24, 1 / 120, 1 / 720, 1 / 5040, 1 / 40320])


def expm1_second(x):
    """(e^x - 1 - x) / x^2, with the value 1/2 at x = 0."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 0.05
    safe = np.where(small, 1.0, x)
    series = np.polynomial.polynomial.polyval(x, _Q_COEFFS)
    with np.errstate(over="ignore", invalid="ignore"):
        direct = (np.expm1(safe) - safe) / (safe * safe)
    out = np.where(small, series, direct)
    return out[()] if out.ndim == 0 else out
