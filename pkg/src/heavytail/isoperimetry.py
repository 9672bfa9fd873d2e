"""Weighted perimeters and the Cheeger-type route to a universal Poincaré bound.

For ``mu`` with density ``p = V^-beta`` and ``nu = (r + |x|) mu`` the
perimeter ``nu+(A)`` is computed in closed form (balls, 1D half-lines) or by
a 1D radial integral over the hyperplane (half-spaces in ``n >= 2``).
Half-space masses use the fraction of the sphere cut off by the
hyperplane, an incomplete beta function, which also gives an independent
finite-difference route to the Minkowski content.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from . import _quad
from .errors import NumericError, ParameterError, PreconditionError
from .integrate import DEFAULT, IntegralEstimate, exact, variance, weighted_dirichlet
from .measures import ConvexMeasureSpec, geometric_mean_m0, quantile_r, radial_cdf
from .reports import make_report

__all__ = ["ParametricSet", "set_mass", "weighted_perimeter", "minkowski_content",
           "cheeger_D", "c_kappa", "check_c_kappa", "check_perimeter_bound_eq56",
           "check_cheeger_eq55", "thm51_constant", "check_universal_poincare_thm51",
           "StructureReport", "check_cor52_structure", "half_line_grid", "ball_grid",
           "FD_EPS"]

FD_EPS = 1e-4
THM51_LEVEL = 2.0 / 3.0
RTOL = 1e-11


@dataclass(frozen=True)
class ParametricSet:
    """A half-space ``{<theta, x> <= a}`` or a centred ball ``{|x| <= s}``."""

    family: str
    param: float
    direction: Optional[tuple] = None

    @classmethod
    def half_space(cls, theta, a):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        norm = float(np.linalg.norm(theta))
        if norm == 0:
            raise ParameterError("half-space direction must be nonzero")
        return cls("half_space", float(a), tuple(theta / norm))

    @classmethod
    def ball(cls, s):
        if not s > 0:
            raise ParameterError(f"ball radius must be positive, got {s}")
        return cls("ball", float(s))

    @property
    def name(self):
        if self.family == "ball":
            return f"ball(s={self.param:.17g})"
        return f"half_space(a={self.param:.17g})"

    def grown(self, eps):
        """``A + eps B_1``."""
        return ParametricSet(self.family, self.param + eps, self.direction)

    def contains(self, x):
        x = np.atleast_2d(x)
        if self.family == "ball":
            return np.einsum("ij,ij->i", x, x) <= self.param ** 2
        return x @ np.asarray(self.direction) <= self.param


def _require(measure, A):
    n = measure.n
    if A.family == "half_space" and len(A.direction) != n:
        raise ParameterError("half-space direction has the wrong dimension")
    if (A.family == "ball" or n >= 2) and not measure.radial:
        raise ParameterError("balls and half-spaces in n >= 2 need a rotation-invariant measure")


def _cap_fraction(u, n):
    """Fraction of the unit sphere in R^n with ``x_1 <= u``."""
    if u >= 1.0:
        return 1.0
    if u <= -1.0:
        return 0.0
    half = 0.5 * special.betainc(0.5, 0.5 * (n - 1), u * u)
    return 0.5 + half if u >= 0 else 0.5 - half


def _check(res, what):
    if not math.isfinite(res.value) or (res.warning and res.error > 1e-8 * max(abs(res.value), 1e-12)):
        raise NumericError(f"{what} quadrature did not converge", partial=res.value,
                           details={"warning": res.warning, "error": res.error})
    return res.value


def _line_mass(measure, lo, hi, weight=None):
    def ld(t):
        return float(measure.log_density(np.array([[t]]))[0])

    dlo, dhi = measure.domain.interval()
    lo, hi = max(lo, dlo), min(hi, dhi)
    if hi <= lo:
        return 0.0
    breaks = tuple(b for b in (0.0, -measure.scale, measure.scale) if lo < b < hi)
    res = _quad.line(weight, ld, lo, hi, measure.scale, rtol=RTOL, atol=1e-300, breaks=breaks)
    return _check(res, "mass")


def _halfspace_mass(measure, a, r=None):
    """``mu(x_1 <= a)`` (or ``nu`` with weight ``r + |x|``) for a radial measure, n >= 2."""
    n = measure.n

    def fn(rho):
        frac = _cap_fraction(a / rho, n) if rho > 0 else float(a >= 0)
        return frac if r is None else frac * (r + rho)

    breaks = (abs(a), measure.scale) if a != 0 else (measure.scale,)
    res = _quad.radial(fn, measure.log_density_r, n, measure.scale, rtol=RTOL, atol=1e-300,
                       breaks=breaks)
    return _check(res, "half-space mass")


def set_mass(A, measure, r=None):
    """``mu(A)``, or ``nu(A) = int_A (r + |x|) dmu`` when ``r`` is given."""
    _require(measure, A)
    n = measure.n
    weight = None if r is None else (lambda t: r + abs(t))
    if A.family == "ball":
        if r is None:
            return radial_cdf(measure, A.param, rtol=RTOL)
        res = _quad.radial(lambda rho: r + rho, measure.log_density_r, n, measure.scale, 0.0,
                           A.param, rtol=RTOL, atol=1e-300)
        return _check(res, "ball mass")
    if n == 1:
        if A.direction[0] > 0:
            return _line_mass(measure, -math.inf, A.param, weight)
        return _line_mass(measure, -A.param, math.inf, weight)
    return _halfspace_mass(measure, A.param, r)


def weighted_perimeter(A, measure, r, weight_scale=1.0):
    """``nu+(A) = int_(boundary A) p(x) (r + |x|) dH_(n-1)``.

    ``weight_scale`` multiplies the weight ``r + |x|``.
    """
    _require(measure, A)
    n = measure.n
    if A.family == "ball":
        s = A.param
        return weight_scale * _quad.sphere_area(n) * s ** (n - 1) * math.exp(measure.log_density_r(s)) * (r + s)
    a = A.param
    if n == 1:
        point = np.array([[a * A.direction[0]]])
        return weight_scale * float(measure.density(point)[0]) * (r + abs(a))

    def ld(rho):
        return measure.log_density_r(math.hypot(a, rho))

    # polar coordinates on the hyperplane around its foot point
    res = _quad.line(lambda rho: (r + math.hypot(a, rho)) * rho ** (n - 2), ld, 0.0, math.inf,
                     measure.scale, rtol=RTOL, atol=1e-300, breaks=(measure.scale,))
    area = _quad.sphere_area(n - 1)
    return weight_scale * area * _check(res, "hyperplane")


def minkowski_content(A, measure, r, eps=FD_EPS):
    """``(nu(A + eps B_1) - nu(A)) / eps`` from the mass of the added layer.

    Balls and 1D half-lines integrate ``(r + |x|) dmu`` over the shell or
    interval directly; half-spaces in ``n >= 2`` use the difference of the
    sphere-cap masses.
    """
    _require(measure, A)
    n = measure.n
    if A.family == "ball":
        s = A.param
        res = _quad.radial(lambda rho: r + rho, measure.log_density_r, n, measure.scale, s, s + eps,
                           rtol=RTOL, atol=1e-300)
        return _check(res, "shell") / eps
    a = A.param
    if n == 1:
        weight = lambda t: r + abs(t)  # noqa: E731
        if A.direction[0] > 0:
            return _line_mass(measure, a, a + eps, weight) / eps
        return _line_mass(measure, -a - eps, -a, weight) / eps

    def fn(rho):
        if rho <= 0:
            return 0.0
        return (_cap_fraction((a + eps) / rho, n) - _cap_fraction(a / rho, n)) * (r + rho)

    res = _quad.radial(fn, measure.log_density_r, n, measure.scale, rtol=RTOL, atol=1e-300,
                       breaks=tuple(sorted({abs(a), abs(a + eps), measure.scale})))
    return _check(res, "slab") / eps


# ---------------------------------------------------------------------------
# the isoperimetric inequalities


def _kappa(measure):
    if not isinstance(measure, ConvexMeasureSpec):
        raise ParameterError("needs a measure with density V^-beta")
    if measure.beta <= measure.n:
        raise ParameterError(f"needs beta > n, got beta={measure.beta}, n={measure.n}")
    return -1.0 / (measure.beta - measure.n)


def _radius(measure, r):
    if r is None:
        r = quantile_r(measure, THM51_LEVEL)
    if not r > 0:
        raise ParameterError(f"r must be positive, got {r}")
    return float(r)


def cheeger_D(kappa, p_r):
    """``D = (1 - kappa) / log(2 p_r)``; needs ``p_r > 1/2``."""
    if not p_r > 0.5:
        raise ParameterError(f"needs mu(B_r) > 1/2, got {p_r}")
    return (1.0 - kappa) / math.log(2.0 * p_r)


def c_kappa(kappa, p_r):
    """``c_kappa = (1 - (2 p_r)^kappa) / (-kappa)``."""
    return (1.0 - (2.0 * p_r) ** kappa) / (-kappa)


def check_c_kappa(kappas, p_rs):
    """``c_kappa >= log(2 p_r)/(1 - kappa)`` on a grid; returns a boolean matrix."""
    kap = np.asarray(kappas, dtype=float)[:, None]
    pr = np.asarray(p_rs, dtype=float)[None, :]
    lhs = (1.0 - (2.0 * pr) ** kap) / (-kap)
    rhs = np.log(2.0 * pr) / (1.0 - kap)
    return lhs >= rhs * (1.0 - 1e-14)


def _params(measure, A, r, **extra):
    out = {"n": measure.n, "beta": measure.beta, "set": A.family, "param": A.param, "r": r}
    out.update(extra)
    return out


def check_perimeter_bound_eq56(A, measure, r=None, cfg=None):
    """``mu(A)^(1-kappa) (mu(A)^kappa - mu(B_r)^kappa) / (-kappa) <= nu+(A)``."""
    kappa = _kappa(measure)
    r = _radius(measure, r)
    t = set_mass(A, measure)
    p_r = radial_cdf(measure, r, rtol=RTOL)
    lhs = t ** (1.0 - kappa) * (t ** kappa - p_r ** kappa) / (-kappa) if t > 0 else 0.0
    rhs = weighted_perimeter(A, measure, r)
    return make_report("eq56", _params(measure, A, r), A.name,
                       IntegralEstimate(lhs, "quadrature"), IntegralEstimate(rhs, "quadrature"),
                       1.0, mass=t, p_r=p_r, kappa=kappa)


def check_cheeger_eq55(A, measure, r=None, cfg=None):
    """``mu(A) <= D nu+(A)`` with ``D = (1 - kappa)/log(2 mu(B_r))``, for ``mu(A) <= 1/2``."""
    kappa = _kappa(measure)
    r = _radius(measure, r)
    p_r = radial_cdf(measure, r, rtol=RTOL)
    D = cheeger_D(kappa, p_r)
    t = set_mass(A, measure)
    if not 0 < t <= 0.5 * (1 + 1e-12):
        raise PreconditionError("the Cheeger reduction needs 0 < mu(A) <= 1/2", details={"mass": t})
    rhs = D * weighted_perimeter(A, measure, r)
    return make_report("eq55", _params(measure, A, r), A.name, IntegralEstimate(t, "quadrature"),
                       IntegralEstimate(rhs, "quadrature"), D, p_r=p_r, kappa=kappa)


def half_line_grid(measure, count=50, level=0.998, cheeger=False):
    """Offsets ``a`` of 1D half-lines ``(-inf, a]``; ``cheeger`` keeps ``mu(A) <= 1/2``."""
    R = quantile_r(measure, level)
    hi = 0.0 if cheeger else R
    return np.linspace(-R, hi, count)


def ball_grid(measure, count=50, level=0.998, cheeger=False):
    """Radii ``s`` of centred balls; ``cheeger`` keeps ``mu(B_s) <= 1/2``."""
    R = quantile_r(measure, 0.5 if cheeger else level)
    return np.linspace(R / count, R, count)


# ---------------------------------------------------------------------------
# universal weighted Poincaré


def thm51_constant(beta, n):
    """``(8 / log^2(4/3)) (beta - n + 1)/(beta - n)``."""
    if beta <= n:
        raise ParameterError(f"needs beta > n, got beta={beta}, n={n}")
    return 8.0 / math.log(4.0 / 3.0) ** 2 * (beta - n + 1.0) / (beta - n)


def _weight(c2):
    def w2(x):
        return c2 + np.einsum("ij,ij->i", x, x)
    return w2


def check_universal_poincare_thm51(measure, g, cfg=None):
    """``Var(g) <= C ((beta-n+1)/(beta-n)) int |grad g|^2 (r^2 + |x|^2) dmu``.

    ``r`` is the ``2/3``-quantile of ``|x|`` and ``C = 8/log^2(4/3)``.
    """
    cfg = cfg or DEFAULT
    _kappa(measure)
    n, beta = measure.n, measure.beta
    const = thm51_constant(beta, n)
    r = quantile_r(measure, THM51_LEVEL, samples=cfg.samples, seed=cfg.seed)
    lhs = variance(g, measure, cfg)
    rhs = weighted_dirichlet(g, _weight(r * r), measure, cfg, weight_deg=2.0).scaled(const)
    return make_report("thm51", {"n": n, "beta": beta, "r": r}, g.name, lhs, rhs, const)


@dataclass(frozen=True)
class StructureReport:
    """Measured ratio ``Var(g) / int |grad g|^2 (m_0^2 + |x|^2)``; no verdict."""

    params: dict
    g_name: str
    variance: IntegralEstimate
    dirichlet: IntegralEstimate
    r: float
    m0: float

    @property
    def ratio(self):
        d = self.dirichlet.value
        if d == 0:
            return 0.0
        return self.variance.value / d if math.isfinite(d) else 0.0

    @property
    def r_over_m0(self):
        return self.r / self.m0

    def to_dict(self):
        return {"id": "cor52", "params": dict(self.params), "g": self.g_name,
                "method": self.variance.method,
                "variance": {"value": self.variance.value, "err": self.variance.abs_error},
                "dirichlet": {"value": self.dirichlet.value, "err": self.dirichlet.abs_error},
                "ratio": self.ratio, "r": self.r, "m0": self.m0, "r_over_m0": self.r_over_m0}


def check_cor52_structure(measure, g, cfg=None):
    """Ratio with the weight ``m_0^2 + |x|^2`` and the scale ratio ``r / m_0``."""
    cfg = cfg or DEFAULT
    _kappa(measure)
    m0 = geometric_mean_m0(measure, samples=cfg.samples, seed=cfg.seed)
    r = quantile_r(measure, THM51_LEVEL, samples=cfg.samples, seed=cfg.seed)
    var = variance(g, measure, cfg)
    dir_ = weighted_dirichlet(g, _weight(m0 * m0), measure, cfg, weight_deg=2.0)
    if g.constant is not None:
        var, dir_ = exact(0.0), exact(0.0)
    return StructureReport({"n": measure.n, "beta": measure.beta}, g.name, var, dir_, r, m0)
