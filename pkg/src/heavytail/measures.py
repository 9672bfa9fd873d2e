"""Generalized Cauchy measures, convex measures ``V^-beta`` and samplers.

Every measure exposes the same small surface used by the integration
engine: ``n``, ``domain``, ``scale`` (a length hint for quadrature maps),
``radial``, ``tail_exponent`` (density ~ |x|^-tail_exponent), a vectorized
``log_density`` and a block-deterministic sampler.
"""

import itertools
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy import interpolate, optimize, special

from . import _quad, _rng
from .errors import DomainError, NumericError, ParameterError

__all__ = [
    "CauchyParams", "Domain", "Potential", "ConvexMeasureSpec",
    "LogConcaveMeasure", "cauchy_potential", "smoothed_norm_potential",
    "gaussian_potential", "exponential_potential", "check_potential",
    "cauchy_measure", "rescaled_density", "convex_measure",
    "gaussian_measure", "exponential_measure", "cauchy_log_density",
    "cauchy_normalizer", "moment_Im", "sample_cauchy", "quantile_r",
    "geometric_mean_m0", "radial_cdf", "inv1px2_variance", "inv1px2_dirichlet",
]


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class CauchyParams:
    """Dimension ``n`` and exponent ``beta`` of ``nu_beta``; needs beta > n/2."""

    n: int
    beta: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"dimension must be a positive integer, got {self.n!r}")
        beta = float(self.beta)
        if not math.isfinite(beta) or beta <= self.n / 2.0:
            raise ParameterError(
                f"beta must exceed n/2 = {self.n / 2} for an integrable density, got {self.beta!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "beta", beta)

    @property
    def d(self):
        """Degrees of freedom ``2 beta - n`` of the chi variate in ``Y / xi``."""
        return 2.0 * self.beta - self.n

    @property
    def alpha(self):
        return self.beta - self.n / 2.0

    @property
    def kappa(self):
        """Optimal concavity index ``-1 / (2 beta - n)``."""
        return -1.0 / self.d


# ---------------------------------------------------------------------------
# domains and potentials


@dataclass(frozen=True)
class Domain:
    """Open convex region: all of R^n, an axis-aligned box, or a centred ball."""

    kind: str = "all"
    lo: float = -math.inf
    hi: float = math.inf
    radius: float = math.inf

    def __post_init__(self):
        if self.kind not in ("all", "box", "ball"):
            raise ParameterError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def box(cls, lo, hi):
        return cls("box", float(lo), float(hi))

    @classmethod
    def ball(cls, radius):
        return cls("ball", radius=float(radius))

    def contains(self, x):
        x = np.atleast_2d(x)
        if self.kind == "all":
            return np.ones(len(x), dtype=bool)
        if self.kind == "box":
            return np.all((x > self.lo) & (x < self.hi), axis=1)
        return np.einsum("ij,ij->i", x, x) < self.radius ** 2

    def interval(self):
        """Coordinate range as ``(lo, hi)``; used for 1D quadrature."""
        if self.kind == "ball":
            return -self.radius, self.radius
        return self.lo, self.hi


@dataclass(frozen=True)
class Potential:
    """A positive convex function with gradient and (optional) Hessian.

    All callables take an ``(N, n)`` array.  ``degree`` is the polynomial
    growth order of ``value`` at infinity and ``hess_inv_degree`` that of
    ``|hess^-1|``; both feed the integrability bookkeeping and may be None.
    ``cost``, when given, is a closed form of the Bregman cost
    ``V(y) - V(x) - <V'(x), y - x>`` taking broadcastable ``(..., n)`` arrays.
    """

    value: Callable
    grad: Callable
    hess: Optional[Callable] = None
    domain: Domain = field(default_factory=Domain)
    name: str = "custom"
    radial: bool = False
    degree: Optional[float] = None
    hess_inv_degree: Optional[float] = None
    cost: Optional[Callable] = None


def _sq(x):
    return np.einsum("ij,ij->i", x, x)


def cauchy_potential(n, scale=1.0):
    """``V(x) = 1 + |x|^2 / scale^2``; cost ``d_V(x, y) = |x - y|^2 / scale^2``."""
    s2 = float(scale) ** 2

    def hess(x):
        x = np.atleast_2d(x)
        return np.broadcast_to(2.0 / s2 * np.eye(x.shape[1]), (len(x), x.shape[1], x.shape[1])).copy()

    return Potential(
        value=lambda x: 1.0 + _sq(np.atleast_2d(x)) / s2,
        grad=lambda x: 2.0 * np.atleast_2d(x) / s2,
        hess=hess, name="cauchy" if s2 == 1.0 else f"cauchy(scale={scale:g})",
        radial=True, degree=2.0, hess_inv_degree=0.0,
        cost=lambda x, y: np.sum((np.asarray(y) - np.asarray(x)) ** 2, axis=-1) / s2,
    )


def smoothed_norm_potential(n, delta=1e-3):
    """``V(x) = 1 + sqrt(delta^2 + |x|^2)``, a non-Cauchy convex potential."""
    d2 = float(delta) ** 2

    def value(x):
        return 1.0 + np.sqrt(d2 + _sq(np.atleast_2d(x)))

    def grad(x):
        x = np.atleast_2d(x)
        return x / np.sqrt(d2 + _sq(x))[:, None]

    def hess(x):
        x = np.atleast_2d(x)
        s = np.sqrt(d2 + _sq(x))
        eye = np.eye(x.shape[1])[None]
        return eye / s[:, None, None] - np.einsum("ni,nj->nij", x, x) / (s ** 3)[:, None, None]

    return Potential(value, grad, hess, name=f"smoothnorm(delta={delta:g})",
                     radial=True, degree=1.0, hess_inv_degree=3.0)


def gaussian_potential(n):
    """``W(x) = |x|^2 / 2`` (log-density of the standard Gaussian, unnormalized)."""

    def hess(x):
        x = np.atleast_2d(x)
        return np.broadcast_to(np.eye(x.shape[1]), (len(x), x.shape[1], x.shape[1])).copy()

    return Potential(lambda x: 0.5 * _sq(np.atleast_2d(x)), lambda x: np.atleast_2d(x).astype(float),
                     hess, name="gaussian", radial=True, degree=2.0, hess_inv_degree=0.0,
                     cost=lambda x, y: 0.5 * np.sum((np.asarray(y) - np.asarray(x)) ** 2, axis=-1))


def exponential_potential(lam):
    """``W(x) = lam * x`` on ``(0, inf)``."""
    lam = float(lam)
    if lam <= 0:
        raise ParameterError("exponential rate must be positive")
    return Potential(
        value=lambda x: lam * np.atleast_2d(x)[:, 0],
        grad=lambda x: np.full(np.atleast_2d(x).shape, lam),
        hess=lambda x: np.zeros((len(np.atleast_2d(x)), 1, 1)),
        domain=Domain.box(0.0, math.inf), name=f"exponential(lam={lam:g})",
        degree=1.0,
        cost=lambda x, y: np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape[:-1]),
    )


def check_potential(potential, n, count=200, seed=0, tol=1e-10, require_pd=True):
    """Spot-check positivity, convexity and (when given) Hessian definiteness.

    Raises :class:`NumericError` naming the first failing point.
    """
    gen = _rng.block_generator(seed, 0)
    x = _domain_points(potential.domain, gen, count, n)
    y = _domain_points(potential.domain, gen, count, n)
    t = gen.random(count)[:, None]
    vx, vy = potential.value(x), potential.value(y)
    if np.any(vx <= 0):
        raise NumericError("potential is not positive", details={"point": x[np.argmin(vx)].tolist()})
    mid = potential.value(t * x + (1 - t) * y)
    gap = mid - (t[:, 0] * vx + (1 - t[:, 0]) * vy)
    if np.any(gap > tol * (1.0 + np.abs(vx) + np.abs(vy))):
        k = int(np.argmax(gap))
        raise NumericError("convexity violated", details={"x": x[k].tolist(), "y": y[k].tolist(),
                                                          "gap": float(gap[k])})
    if potential.hess is not None:
        h = potential.hess(x)
        if not np.allclose(h, np.swapaxes(h, 1, 2), atol=1e-12):
            raise NumericError("Hessian is not symmetric")
        if require_pd:
            cholesky_or_raise(h, x)
    return True


def cholesky_or_raise(mats, points):
    """Batched Cholesky factors; a failure names the point and its eigenvalues."""
    try:
        return np.linalg.cholesky(mats)
    except np.linalg.LinAlgError:
        eig = np.linalg.eigvalsh(mats)
        k = int(np.argmin(eig[:, 0]))
        raise NumericError(
            "matrix is not positive definite",
            details={"point": np.atleast_2d(points)[k].tolist(), "min_eigenvalue": float(eig[k, 0])},
        ) from None


def _domain_points(domain, gen, count, n):
    z = 2.0 * gen.standard_normal((count, n))
    if domain.kind == "box":
        lo, hi = domain.lo, domain.hi
        if math.isinf(lo) and math.isinf(hi):
            return z
        if math.isinf(hi):
            return lo + np.abs(z) + 1e-3
        if math.isinf(lo):
            return hi - np.abs(z) - 1e-3
        return lo + (hi - lo) * gen.uniform(0.01, 0.99, (count, n))
    if domain.kind == "ball":
        return z / (1.0 + np.sqrt(_sq(z)))[:, None] * domain.radius
    return z


# ---------------------------------------------------------------------------
# measures

_token = itertools.count()
_cache_lock = threading.Lock()
_sample_cache = OrderedDict()
_CACHE_ENTRIES = 4
_CACHE_MAX_SAMPLES = 4_000_000


class _MeasureBase:
    """Shared sampling and integrability helpers."""

    def moment_finite(self, k):
        """True iff ``int |x|^k dmu`` is finite (k may be -inf)."""
        if k == -math.inf or math.isinf(self.tail_exponent):
            return True
        return k + self.n < self.tail_exponent

    def iter_blocks(self, count, seed):
        if self._sampler is None:
            raise NumericError(f"measure {self.label!r} has no sampler")
        for b, m in enumerate(_rng.block_sizes(count)):
            yield self._sampler(_rng.block_generator(seed, b), m)

    def _sample_block(self, seed, b, m):
        return self._sampler(_rng.block_generator(seed, b), m)

    def sample(self, count, seed, workers=None):
        """``count`` points as an ``(count, n)`` array; deterministic in seed."""
        count = int(count)
        if count <= 0:
            return np.empty((0, self.n))
        key = (self.key, count, int(seed))
        with _cache_lock:
            if key in _sample_cache:
                _sample_cache.move_to_end(key)
                return _sample_cache[key]
        if self._sampler is None:
            raise NumericError(f"measure {self.label!r} has no sampler")
        sizes = _rng.block_sizes(count)
        blocks = _rng.ordered_map(lambda bm: self._sample_block(seed, *bm),
                                  list(enumerate(sizes)), workers)
        out = np.concatenate(blocks)
        out.setflags(write=False)
        if count <= _CACHE_MAX_SAMPLES:
            with _cache_lock:
                _sample_cache[key] = out
                while len(_sample_cache) > _CACHE_ENTRIES:
                    _sample_cache.popitem(last=False)
        return out

    def log_density_r(self, r):
        """Log-density at a point of norm ``r`` (radial measures only)."""
        x = np.zeros((1, self.n))
        x[0, 0] = r
        return float(self.log_density(x)[0])

    def density(self, x):
        return np.exp(self.log_density(x))


@dataclass(frozen=True, eq=False)
class ConvexMeasureSpec(_MeasureBase):
    """Probability measure with density ``V(x)^-beta / Z`` on ``V``'s domain.

    ``normalizer`` is computed lazily by quadrature when not supplied (radial
    potentials, or n = 1).  ``cauchy`` records the parameters when the
    measure is a (possibly rescaled) generalized Cauchy law.
    """

    potential: Potential
    beta: float
    n: int
    normalizer: Optional[float] = None
    sampler: Optional[Callable] = None
    scale: float = 1.0
    cauchy: Optional[CauchyParams] = None
    label: str = "convex"

    def __post_init__(self):
        if self.n < 1 or self.beta <= self.n / 2.0:
            raise ParameterError(f"need beta > n/2, got n={self.n}, beta={self.beta}")
        object.__setattr__(self, "_tok", next(_token))

    @property
    def key(self):
        if self.cauchy is not None:
            return ("cauchy", self.cauchy.n, self.cauchy.beta, self.scale)
        return ("convex", self.label, self._tok)

    @property
    def domain(self):
        return self.potential.domain

    @property
    def radial(self):
        return self.potential.radial

    @property
    def tail_exponent(self):
        if self.potential.degree is None:
            return math.inf
        return self.beta * self.potential.degree

    @property
    def kappa(self):
        """Concavity index ``-1 / (beta - n)`` of a ``V^-beta`` density."""
        return -1.0 / (self.beta - self.n) if self.beta > self.n else -math.inf

    @cached_property
    def log_normalizer(self):
        if self.normalizer is not None:
            return math.log(self.normalizer)
        return math.log(_normalize(self, lambda x: -self.beta * np.log(self.potential.value(x))))

    @property
    def Z(self):
        return math.exp(self.log_normalizer)

    def log_density(self, x):
        x = np.atleast_2d(x)
        v = self.potential.value(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = -self.beta * np.log(v) - self.log_normalizer
        return np.where(self.domain.contains(x) & (v > 0), out, -np.inf)

    @cached_property
    def _sampler(self):
        if self.sampler is not None:
            return self.sampler
        if self.radial:
            return _radial_sampler(self)
        return None

    def with_beta(self, beta):
        """Same potential with another exponent (``mu_beta`` families)."""
        if self.cauchy is not None:
            return cauchy_measure(CauchyParams(self.n, beta), self.scale)
        return convex_measure(self.potential, beta, self.n, label=self.label)


@dataclass(frozen=True, eq=False)
class LogConcaveMeasure(_MeasureBase):
    """Probability measure with density ``exp(-W(x)) / Z``."""

    potential: Potential
    n: int
    normalizer: Optional[float] = None
    sampler: Optional[Callable] = None
    scale: float = 1.0
    label: str = "logconcave"

    def __post_init__(self):
        object.__setattr__(self, "_tok", next(_token))

    @property
    def key(self):
        return ("logconcave", self.label, self.n) if self.sampler is not None else ("lc", self._tok)

    @property
    def domain(self):
        return self.potential.domain

    @property
    def radial(self):
        return self.potential.radial

    tail_exponent = math.inf

    @cached_property
    def log_normalizer(self):
        if self.normalizer is not None:
            return math.log(self.normalizer)
        return math.log(_normalize(self, lambda x: -self.potential.value(x)))

    def log_density(self, x):
        x = np.atleast_2d(x)
        out = -self.potential.value(x) - self.log_normalizer
        return np.where(self.domain.contains(x), out, -np.inf)

    @cached_property
    def _sampler(self):
        if self.sampler is not None:
            return self.sampler
        if self.radial:
            return _radial_sampler(self)
        return None


def _normalize(measure, log_unnorm):
    n = measure.n
    if measure.radial:
        def lp(r):
            x = np.zeros((1, n))
            x[0, 0] = r
            return float(log_unnorm(x)[0])
        res = _quad.radial(None, lp, n, measure.scale)
    elif n == 1:
        lo, hi = measure.domain.interval()
        res = _quad.line(None, lambda t: float(log_unnorm(np.array([[t]]))[0]), lo, hi, measure.scale)
    else:
        raise NumericError("normalizer of a non-radial measure in n >= 2 must be supplied")
    if not (res.value > 0 and math.isfinite(res.value)):
        raise NumericError("normalizer is not a positive finite number", partial=res.value)
    return res.value


# ---------------------------------------------------------------------------
# the generalized Cauchy family


def cauchy_normalizer(params):
    """``Z = n omega_n Gamma(n/2) Gamma(beta - n/2) / (2 Gamma(beta))``."""
    if not isinstance(params, CauchyParams):
        params = CauchyParams(*params)
    n, beta = params.n, params.beta
    log_z = (math.log(_quad.sphere_area(n)) + special.gammaln(n / 2.0)
             + special.gammaln(beta - n / 2.0) - math.log(2.0) - special.gammaln(beta))
    return math.exp(log_z)


def cauchy_log_density(x, params):
    """``-beta log(1 + |x|^2) - log Z`` for one point or an ``(N, n)`` array."""
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    x = x.reshape(1, -1) if single else x
    if x.shape[1] != params.n:
        raise ParameterError(f"point has dimension {x.shape[1]}, expected {params.n}")
    out = -params.beta * np.log1p(_sq(x)) - math.log(cauchy_normalizer(params))
    return float(out[0]) if single else out


def moment_Im(params, m):
    """``I_m = int (1+|x|^2)^-m dnu_beta = prod_{j<m} (alpha + j) / (beta + j)``."""
    if int(m) != m or m < 0:
        raise ParameterError("m must be a non-negative integer")
    a, b = params.alpha, params.beta
    out = 1.0
    for j in range(int(m)):
        out *= (a + j) / (b + j)
    return out


def inv1px2_variance(params):
    """``Var(g)`` for ``g = 1/(1+|x|^2)`` under ``nu_beta``: ``alpha (n/2) / (beta^2 (beta+1))``."""
    a, b = params.alpha, params.beta
    return a * (params.n / 2.0) / (b * b * (b + 1.0))


def inv1px2_dirichlet(params):
    """``int |grad g|^2 (1+|x|^2) dnu_beta = 4 (I_2 - I_3)`` for ``g = 1/(1+|x|^2)``."""
    a, b = params.alpha, params.beta
    return 4.0 * a * (a + 1.0) * (params.n / 2.0) / (b * (b + 1.0) * (b + 2.0))


def _cauchy_sampler(params, scale):
    n, half_d = params.n, params.d / 2.0

    def draw(gen, m):
        y = gen.standard_normal((m, n))
        xi = np.sqrt(gen.gamma(half_d, 2.0, m))
        return scale * y / xi[:, None]

    return draw


def sample_cauchy(params, count, seed, workers=None):
    """``count`` draws of ``Y / xi`` (Y standard Gaussian, xi ~ chi_d)."""
    return cauchy_measure(params).sample(count, seed, workers)


def cauchy_measure(params, scale=1.0):
    """``nu_beta`` itself (``scale = 1``) or its image under ``x -> scale * x``."""
    scale = float(scale)
    pot = cauchy_potential(params.n, scale)
    z = cauchy_normalizer(params) * scale ** params.n
    label = f"nu(n={params.n},beta={params.beta:g})"
    if scale != 1.0:
        label += f"*{scale:g}"
    return ConvexMeasureSpec(pot, params.beta, params.n, normalizer=z,
                             sampler=_cauchy_sampler(params, scale), scale=scale,
                             cauchy=params, label=label)


def rescaled_density(params):
    """``nu~_beta``: density proportional to ``(1 + |x|^2/(2 beta - n))^-beta``."""
    return cauchy_measure(params, math.sqrt(params.d))


def convex_measure(potential, beta, n, normalizer=None, sampler=None, label=None):
    """General ``V^-beta / Z``; radial potentials get an inverse-CDF sampler."""
    return ConvexMeasureSpec(potential, float(beta), int(n), normalizer=normalizer,
                             sampler=sampler, label=label or f"{potential.name}^-{beta:g}")


def gaussian_measure(n):
    def draw(gen, m):
        return gen.standard_normal((m, n))
    return LogConcaveMeasure(gaussian_potential(n), n, normalizer=(2 * math.pi) ** (n / 2.0),
                             sampler=draw, label=f"gaussian(n={n})")


def exponential_measure(lam):
    lam = float(lam)

    def draw(gen, m):
        return gen.exponential(1.0 / lam, (m, 1))
    return LogConcaveMeasure(exponential_potential(lam), 1, normalizer=1.0 / lam,
                             sampler=draw, scale=1.0 / lam, label=f"exponential(lam={lam:g})")


# ---------------------------------------------------------------------------
# radial summaries


def _require_radial(measure):
    if not measure.radial:
        raise ParameterError(f"{measure.label} is not rotation invariant")


def radial_cdf(measure, r, rtol=1e-11):
    """``mu(|x| <= r)`` by radial quadrature."""
    _require_radial(measure)
    if r <= 0:
        return 0.0
    if math.isinf(r):
        return 1.0
    res = _quad.radial(None, measure.log_density_r, measure.n, measure.scale, 0.0, r, rtol=rtol)
    return res.value


def quantile_r(measure, level, method="auto", samples=10**6, seed=42):
    """Radius ``r`` with ``mu(|x| <= r) = level``.

    Radial measures: Brent root search on the radial CDF in the compactified
    angle.  Otherwise (or ``method="mc"``) the empirical quantile of ``|X|``.
    """
    if not 0.0 < level < 1.0:
        raise ParameterError("level must lie in (0, 1)")
    if method == "mc" or (method == "auto" and not measure.radial):
        x = measure.sample(samples, seed)
        return float(np.quantile(np.sqrt(_sq(x)), level))
    _require_radial(measure)
    s = measure.scale

    def gap(theta):
        return radial_cdf(measure, s * math.tan(theta)) - level

    lo, hi = 1e-12, _quad.HALF_PI * (1 - 1e-12)
    f_lo, f_hi = gap(lo), gap(hi)
    if f_lo * f_hi > 0:
        raise NumericError("radial CDF does not bracket the level",
                           details={"level": level, "cdf_lo": f_lo + level, "cdf_hi": f_hi + level})
    theta = optimize.brentq(gap, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    return s * math.tan(theta)


def geometric_mean_m0(measure, method="auto", samples=10**6, seed=42):
    """``m_0 = exp int log|x| dmu``; radial quadrature handles the log at 0."""
    if method == "mc" or (method == "auto" and not measure.radial):
        x = measure.sample(samples, seed)
        return float(math.exp(np.mean(0.5 * np.log(_sq(x)))))
    _require_radial(measure)
    res = _quad.radial(math.log, measure.log_density_r, measure.n, measure.scale,
                       rtol=1e-11, breaks=(measure.scale,))
    if res.warning and res.error > 1e-6 * (1 + abs(res.value)):
        raise NumericError("log-moment quadrature did not converge", partial=res.value,
                           details={"warning": res.warning})
    return math.exp(res.value)


# ---------------------------------------------------------------------------
# generic radial sampler


def _radial_sampler(measure, cells=4096):
    """Inverse-CDF sampler for a rotation-invariant measure.

    The radial law is tabulated on a composite Gauss-Legendre grid in the
    angle ``theta = atan(r / scale)`` and inverted with a monotone cubic.
    """
    n, s = measure.n, measure.scale
    edges = np.linspace(0.0, _quad.HALF_PI, cells + 1)
    nodes, weights = _quad.gauss_legendre_cells(edges, 10)
    r = s * np.tan(nodes.ravel())
    pts = np.zeros((r.size, n))
    pts[:, 0] = r
    with np.errstate(divide="ignore"):
        lw = (math.log(_quad.sphere_area(n)) + math.log(s) - 2 * np.log(np.cos(nodes.ravel()))
              + measure.log_density(pts) + (n - 1) * np.log(np.where(r > 0, r, 1.0)))
    mass = (np.exp(lw).reshape(nodes.shape) * weights).sum(axis=1)
    cdf = np.concatenate([[0.0], np.cumsum(mass)])
    total = cdf[-1]
    if not abs(total - 1.0) < 1e-6:
        raise NumericError("radial law does not integrate to one", partial=total)
    cdf /= total
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    inverse = interpolate.PchipInterpolator(cdf[keep], edges[keep])

    def draw(gen, m):
        u = gen.random(m)
        direction = gen.standard_normal((m, n))
        direction /= np.sqrt(_sq(direction))[:, None]
        theta = np.clip(inverse(u), 0.0, _quad.HALF_PI * (1 - 1e-15))
        return (s * np.tan(theta))[:, None] * direction

    return draw


def _check_domain(potential, x):
    if not np.all(potential.domain.contains(x)):
        raise DomainError(f"point outside the domain of {potential.name}")
