"""Test distributions with known domain-of-attraction tail index.

Each family provides an exact exceedance function ``G(x) = 1 - F(x)`` and its
inverse, so sampling is inverse transform throughout and exceedance
probabilities of predictions can be evaluated analytically.

The registry fixes one parameterisation per documented tail index.  Where a
family appears twice (Burr, Student t, Beta, reversed Burr) the parameters
are our choice, picked so the stated index holds:

==============  ==================  ========================
family          parameters          tail index
==============  ==================  ========================
Frechet         alpha = 4           1/alpha = 0.25
Burr XII        c, d                1/(c d): (2,1)->0.5, (4,1)->0.25
Student t       nu                  1/nu: 10->0.1, 20->0.05
Weibull         tau = 0.5           0
EV Weibull      alpha = 4           -1/alpha = -0.25
Beta            a, b                -1/b: (2,2)->-0.5, (2,5)->-0.2
reversed Burr   c, d                -1/(c d): (2,1)->-0.5, (4,1)->-0.25
==============  ==================  ========================
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.optimize import elementwise

from .construction import OrderedSample
from .errors import DomainError
from .gpd import GpdParams, gpd_quantile, gpd_tail, uniform_exceedance


class Family(str, enum.Enum):
    GPD = "gpd"
    FRECHET = "frechet"
    BURR = "burr"
    STUDENT_T = "student_t"
    EXPONENTIAL = "exponential"
    GUMBEL = "gumbel"
    LOGISTIC = "logistic"
    WEIBULL = "weibull"
    NORMAL = "normal"
    LOGNORMAL = "lognormal"
    EV_WEIBULL = "ev_weibull"
    BETA = "beta"
    REVERSED_BURR = "reversed_burr"


@dataclass(frozen=True)
class DistributionSpec:
    """A family, its parameters, and its documented tail index ``xi_da``."""

    family: Family
    params: tuple = ()
    xi_da: float = 0.0
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        params = tuple((str(k), float(v)) for k, v in dict(self.params).items())
        object.__setattr__(self, "params", params)
        _validate(self.family, dict(params))
        if not self.label:
            object.__setattr__(self, "label", self.family.value)

    @property
    def p(self) -> dict:
        return dict(self.params)

    def params_text(self) -> str:
        """Parameters as ``name=value`` pairs joined by ``;`` (CSV-safe)."""
        return ";".join(f"{k}={v:g}" for k, v in self.params)


_REQUIRED = {
    Family.GPD: ("mu", "sigma", "xi"),
    Family.FRECHET: ("alpha",),
    Family.BURR: ("c", "d"),
    Family.STUDENT_T: ("nu",),
    Family.EXPONENTIAL: (),
    Family.GUMBEL: (),
    Family.LOGISTIC: (),
    Family.WEIBULL: ("tau",),
    Family.NORMAL: (),
    Family.LOGNORMAL: (),
    Family.EV_WEIBULL: ("alpha",),
    Family.BETA: ("a", "b"),
    Family.REVERSED_BURR: ("c", "d"),
}


def _validate(family, p):
    missing = [k for k in _REQUIRED[family] if k not in p]
    if missing:
        raise ValueError(f"{family.value}: missing parameters {missing}")
    for key, value in p.items():
        if not np.isfinite(value):
            raise ValueError(f"{family.value}: parameter {key} must be finite")
        if key != "mu" and key != "xi" and value <= 0:
            raise ValueError(f"{family.value}: parameter {key} must be positive")


def _gpd(spec):
    p = spec.p
    return GpdParams(p["mu"], p["sigma"], p["xi"])


def _support(spec):
    f = spec.family
    if f is Family.GPD:
        g = _gpd(spec)
        return g.mu, g.upper
    if f in (Family.FRECHET, Family.BURR, Family.EXPONENTIAL, Family.WEIBULL,
             Family.LOGNORMAL):
        return 0.0, np.inf
    if f in (Family.EV_WEIBULL, Family.REVERSED_BURR):
        return -np.inf, 0.0
    if f is Family.BETA:
        return 0.0, 1.0
    return -np.inf, np.inf


def support(spec: DistributionSpec) -> tuple[float, float]:
    """(lower, upper) support bounds."""
    return _support(spec)


def _student_tail(x, nu):
    return special.stdtr(nu, -x)


def _student_quantile(g, nu):
    # numerical inversion of the tail; the tail is decreasing in x
    g = np.asarray(g, dtype=float)
    flat = g.ravel()

    def f(x, target):
        return _student_tail(x, nu) - target

    br = elementwise.bracket_root(f, np.zeros_like(flat), args=(flat,))
    res = elementwise.find_root(
        f, (br.bracket[0], br.bracket[1]), args=(flat,),
        tolerances=dict(xatol=0.0, xrtol=2 * np.finfo(float).eps,
                        fatol=0.0, frtol=0.0))
    out = np.where(flat == 0.5, 0.0, res.x).reshape(g.shape)
    return out


def zoo_tail(spec: DistributionSpec, x, strict: bool = True):
    """Exact exceedance probability ``1 - F(x)``.

    With ``strict=False`` points outside the support map to 1 or 0 instead
    of raising.
    """
    x = np.asarray(x, dtype=float)
    lo, hi = _support(spec)
    if strict and (np.any(x < lo) or np.any(x > hi)):
        raise DomainError(f"{spec.label}: x outside the support [{lo}, {hi}]")
    f, p = spec.family, spec.p
    if f is Family.GPD:
        return gpd_tail(x, _gpd(spec), strict=False)
    xc = np.clip(x, lo, hi)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if f is Family.EXPONENTIAL:
            out = np.exp(-xc)
        elif f is Family.FRECHET:
            out = -np.expm1(-(xc ** -p["alpha"]))
        elif f is Family.BURR:
            out = np.exp(-p["d"] * np.log1p(xc ** p["c"]))
        elif f is Family.STUDENT_T:
            out = _student_tail(xc, p["nu"])
        elif f is Family.GUMBEL:
            out = -np.expm1(-np.exp(-xc))
        elif f is Family.LOGISTIC:
            out = special.expit(-xc)
        elif f is Family.WEIBULL:
            out = np.exp(-(xc ** p["tau"]))
        elif f is Family.NORMAL:
            out = special.ndtr(-xc)
        elif f is Family.LOGNORMAL:
            out = special.ndtr(-np.log(xc))
        elif f is Family.EV_WEIBULL:
            out = -np.expm1(-((-xc) ** p["alpha"]))
        elif f is Family.BETA:
            # P(X > x) = I_{1-x}(b, a)
            out = special.betainc(p["b"], p["a"], 1.0 - xc)
        elif f is Family.REVERSED_BURR:
            out = np.exp(-p["d"] * np.log1p((-1.0 / xc) ** p["c"]))
        else:  # pragma: no cover
            raise ValueError(f"unknown family {f}")
    out = np.where(x <= lo, 1.0, np.where(x >= hi, 0.0, out))
    return out[()] if out.ndim == 0 else out


def zoo_quantile(spec: DistributionSpec, g):
    """Level exceeded with probability ``g`` (inverse of :func:`zoo_tail`)."""
    g = np.asarray(g, dtype=float)
    if np.any(~((g > 0) & (g <= 1))):
        raise DomainError("exceedance probability must lie in (0, 1]")
    f, p = spec.family, spec.p
    with np.errstate(divide="ignore"):
        # -log F, computed without cancellation for g near 0
        neg_log_f = -np.log1p(-g)
        if f is Family.GPD:
            out = gpd_quantile(g, _gpd(spec))
        elif f is Family.EXPONENTIAL:
            out = -np.log(g)
        elif f is Family.FRECHET:
            out = neg_log_f ** (-1.0 / p["alpha"])
        elif f is Family.BURR:
            out = np.expm1(-np.log(g) / p["d"]) ** (1.0 / p["c"])
        elif f is Family.STUDENT_T:
            out = _student_quantile(g, p["nu"])
        elif f is Family.GUMBEL:
            out = -np.log(neg_log_f)
        elif f is Family.LOGISTIC:
            out = np.log1p(-g) - np.log(g)
        elif f is Family.WEIBULL:
            out = (-np.log(g)) ** (1.0 / p["tau"])
        elif f is Family.NORMAL:
            out = -special.ndtri(g)
        elif f is Family.LOGNORMAL:
            out = np.exp(-special.ndtri(g))
        elif f is Family.EV_WEIBULL:
            out = -(neg_log_f ** (1.0 / p["alpha"]))
        elif f is Family.BETA:
            out = 1.0 - special.betaincinv(p["b"], p["a"], g)
        elif f is Family.REVERSED_BURR:
            out = -1.0 / np.expm1(-np.log(g) / p["d"]) ** (1.0 / p["c"])
        else:  # pragma: no cover
            raise ValueError(f"unknown family {f}")
    out = np.asarray(out, dtype=float)
    return out[()] if out.ndim == 0 else out


def zoo_draw(spec: DistributionSpec, size, rng: np.random.Generator) -> np.ndarray:
    """Unsorted inverse-transform draws of any shape."""
    return zoo_quantile(spec, uniform_exceedance(rng, size))


def zoo_sample(spec: DistributionSpec, n: int, rng) -> OrderedSample:
    """``n`` draws sorted descending, deterministic under the seed."""
    rng = np.random.default_rng(rng)
    x = np.sort(zoo_draw(spec, n, rng))[::-1]
    return OrderedSample(x, meta={"family": spec.family.value, "label": spec.label})


def weibull_analytic_u(i, j: int, k: int, tau: float, positions):
    """Scaled-tail values of Weibull quantiles at the given plotting positions.

    ``positions[m - 1]`` is ``G_m``.  Returns
    ``(g_i^(1/tau) - 1) / (1 - alpha^(1/tau))`` with
    ``g_i = log G_i / log G_j`` and ``alpha = log G_k / log G_j``.  At
    ``tau = 1`` this coincides with the GPD ``xi = 0`` curve.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    pos = np.asarray(positions, dtype=float)
    if np.any((pos <= 0) | (pos >= 1)):
        raise ValueError("plotting positions must lie in (0, 1)")
    i = np.asarray(i)
    log_g = np.log(pos[i - 1])
    g = log_g / np.log(pos[j - 1])
    alpha = np.log(pos[k - 1]) / np.log(pos[j - 1])
    s = 1.0 / tau
    # g^s - 1 over 1 - alpha^s, via expm1 of the logs
    out = np.expm1(s * np.log(g)) / -np.expm1(s * np.log(alpha))
    return out[()] if np.ndim(out) == 0 else out


def _spec(family, label, xi_da, **params):
    return DistributionSpec(Family(family), tuple(params.items()), xi_da, label)


REGISTRY: tuple[DistributionSpec, ...] = (
    # positive tail index
    _spec("gpd", "gpd_xi1", 1.0, mu=0.0, sigma=1.0, xi=1.0),
    _spec("frechet", "frechet_a4", 0.25, alpha=4.0),
    _spec("burr", "burr_c2_d1", 0.5, c=2.0, d=1.0),
    _spec("burr", "burr_c4_d1", 0.25, c=4.0, d=1.0),
    _spec("student_t", "student_t_nu10", 0.1, nu=10.0),
    _spec("student_t", "student_t_nu20", 0.05, nu=20.0),
    # zero tail index
    _spec("exponential", "exponential", 0.0),
    _spec("gumbel", "gumbel", 0.0),
    _spec("logistic", "logistic", 0.0),
    _spec("weibull", "weibull_tau0.5", 0.0, tau=0.5),
    _spec("normal", "normal", 0.0),
    _spec("lognormal", "lognormal", 0.0),
    # negative tail index
    _spec("gpd", "gpd_xi-1", -1.0, mu=0.0, sigma=1.0, xi=-1.0),
    _spec("ev_weibull", "ev_weibull_a4", -0.25, alpha=4.0),
    _spec("beta", "beta_2_2", -0.5, a=2.0, b=2.0),
    _spec("beta", "beta_2_5", -0.2, a=2.0, b=5.0),
    _spec("reversed_burr", "reversed_burr_c2_d1", -0.5, c=2.0, d=1.0),
    _spec("reversed_burr", "reversed_burr_c4_d1", -0.25, c=4.0, d=1.0),
)


def gpd_spec(xi: float, mu: float = 0.0, sigma: float = 1.0) -> DistributionSpec:
    """A GPD entry outside the registry (used for GPD sweeps)."""
    return _spec("gpd", f"gpd_xi{xi:g}", xi, mu=mu, sigma=sigma, xi=xi)


def lookup(label: str) -> DistributionSpec:
    """Registry entry by label, or ``gpd:<xi>`` for an arbitrary GPD."""
    if label.startswith("gpd:"):
        return gpd_spec(float(label[4:]))
    for spec in REGISTRY:
        if spec.label == label:
            return spec
    raise KeyError(f"unknown distribution {label!r}; see `zoo list`")


def registry_text() -> str:
    """One line per registry entry: label, family, parameters, tail index."""
    rows = [("label", "family", "params", "xi_da")]
    rows += [(s.label, s.family.value, s.params_text() or "-", f"{s.xi_da:g}")
             for s in REGISTRY]
    widths = [max(len(r[c]) for r in rows) for c in range(4)]
    return "\n".join("  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip()
                     for r in rows) + "\n"
