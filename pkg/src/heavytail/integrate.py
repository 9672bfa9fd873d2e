"""Expectations under convex measures: quadrature and Monte Carlo.

Quadrature is used when it is exact in structure (n = 1, or a radial
integrand against a radial measure); everything else goes to Monte Carlo
over block-deterministic sample streams.  The derived functionals
(variance, entropy, best-shift norm) are evaluated as one integral of a
nonnegative integrand whose centring constant comes from a first pass.
This avoids the cancellation of ``E[g^2] - E[g]^2`` and, for Monte Carlo,
gives the delta-method standard error directly because the centring
constant is a stationary point of each functional.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _quad, _rng
from .errors import NumericError, ParameterError
from .fields import ScalarField

__all__ = ["IntegrationConfig", "IntegralEstimate", "expect", "expect_many", "variance",
           "entropy", "weighted_dirichlet", "best_shift_weighted_norm", "resolve_method"]

NEGATIVE_CLAMP = 1e-12


@dataclass(frozen=True)
class IntegrationConfig:
    """``method`` is ``auto``, ``quad`` or ``mc``; quadrature falls back to MC
    when the integrand is not radial in n >= 2."""

    method: str = "auto"
    samples: int = 1_000_000
    seed: int = 42
    rtol: float = 1e-8
    workers: Optional[int] = None

    def __post_init__(self):
        aliases = {"quadrature": "quad", "monte_carlo": "mc"}
        object.__setattr__(self, "method", aliases.get(self.method, self.method))
        if self.method not in ("auto", "quad", "mc"):
            raise ParameterError(f"unknown integration method {self.method!r}")
        if int(self.samples) < 1:
            raise ParameterError("samples must be positive")
        if not 0 < self.rtol < 1:
            raise ParameterError("rtol must lie in (0, 1)")


DEFAULT = IntegrationConfig()


@dataclass(frozen=True)
class IntegralEstimate:
    """A computed integral.

    ``method`` is ``quadrature``, ``monte_carlo`` or ``exact`` (known in
    closed form, e.g. the integral of a constant).  ``abs_error`` is the
    quadrature error bound or the MC standard error.
    """

    value: float
    method: str
    abs_error: float = 0.0
    samples: int = 0
    seed: Optional[int] = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    def scaled(self, c):
        c = float(c)
        if c == 0.0:
            return IntegralEstimate(0.0, self.method, 0.0, self.samples, self.seed, dict(self.diagnostics))
        return IntegralEstimate(c * self.value, self.method, abs(c) * self.abs_error,
                                self.samples, self.seed, dict(self.diagnostics))

    def plus(self, other):
        """Sum of two estimates; errors add (conservative for shared samples)."""
        methods = {self.method, other.method} - {"exact"}
        method = methods.pop() if len(methods) == 1 else ("exact" if not methods else "mixed")
        diag = {**self.diagnostics, **other.diagnostics}
        seed = self.seed if self.seed is not None else other.seed
        return IntegralEstimate(self.value + other.value, method, self.abs_error + other.abs_error,
                                max(self.samples, other.samples), seed, diag)

    @property
    def finite(self):
        return math.isfinite(self.value)


def exact(value, **diag):
    return IntegralEstimate(float(value), "exact", 0.0, diagnostics=diag)


def divergent(method, reason):
    return IntegralEstimate(math.inf, method, 0.0, diagnostics={"divergent": reason})


def resolve_method(cfg, measure, radial):
    """``quadrature`` or ``monte_carlo`` for an integrand with the given symmetry."""
    if cfg.method == "mc":
        return "monte_carlo"
    if measure.n == 1 or (radial and measure.radial):
        return "quadrature"
    return "monte_carlo"


def _finite(measure, degree):
    return degree is None or measure.moment_finite(degree)


# ---------------------------------------------------------------------------
# the two engines


def _quad_components(fn, k, measure, rtol):
    """Quadrature of each column of ``fn``; values and error bounds."""
    n = measure.n
    memo = {}

    def row(t):
        out = memo.get(t)
        if out is None:
            x = np.zeros((1, n))
            x[0, 0] = t
            out = np.asarray(fn(x), dtype=float).reshape(k)
            memo[t] = out
        return out

    vals, errs, warn = np.empty(k), np.empty(k), None
    for j in range(k):
        def comp(t, j=j):
            return row(t)[j]
        if n == 1:
            lo, hi = measure.domain.interval()
            s = measure.scale
            res = _quad.line(comp, lambda t: float(measure.log_density(np.array([[t]]))[0]),
                             lo, hi, s, rtol=rtol, atol=1e-15, breaks=(0.0, -s, s))
        else:
            res = _quad.radial(comp, measure.log_density_r, n, measure.scale,
                               rtol=rtol, atol=1e-15, breaks=(measure.scale,))
        if not math.isfinite(res.value) or (res.warning and res.error > 1e-6 * max(abs(res.value), 1e-6)):
            raise NumericError("quadrature did not converge", partial=res.value,
                               details={"warning": res.warning, "error": res.error, "component": j})
        vals[j], errs[j] = res.value, res.error
        warn = warn or res.warning
    return vals, errs, warn


def _mc_components(fn, k, measure, cfg):
    """Sample means and standard errors of each column of ``fn``.

    Block statistics are merged in block order (Chan's pairwise update), so
    the result depends only on the seed and sample count.
    """
    count = int(cfg.samples)
    sizes = _rng.block_sizes(count)
    if count <= 4_000_000:
        x_all = measure.sample(count, cfg.seed, cfg.workers)
        starts = np.concatenate([[0], np.cumsum(sizes)])

        def block(b):
            return x_all[starts[b]:starts[b + 1]]
    else:
        def block(b):
            return measure._sample_block(cfg.seed, b, sizes[b])

    def stats(b):
        y = np.asarray(fn(block(b)), dtype=float).reshape(sizes[b], k)
        if not np.all(np.isfinite(y)):
            raise NumericError("integrand is not finite at a sampled point", details={"block": b})
        mean = y.mean(axis=0)
        return sizes[b], mean, ((y - mean) ** 2).sum(axis=0)

    tot, mean, m2 = 0, np.zeros(k), np.zeros(k)
    for m, mu, s2 in _rng.ordered_map(stats, range(len(sizes)), cfg.workers):
        delta = mu - mean
        new = tot + m
        mean = mean + delta * (m / new)
        m2 = m2 + s2 + delta ** 2 * (tot * m / new)
        tot = new
    stderr = np.sqrt(m2 / max(tot - 1, 1) / tot)
    return mean, stderr


def expect_many(fn, k, measure, cfg=None, radial=False):
    """Expectations of the ``k`` columns of ``fn: (N, n) -> (N, k)``.

    Returns ``(values, errors, method)``.
    """
    cfg = cfg or DEFAULT
    method = resolve_method(cfg, measure, radial)
    if method == "quadrature":
        vals, errs, _ = _quad_components(fn, k, measure, cfg.rtol)
    else:
        vals, errs = _mc_components(fn, k, measure, cfg)
    return vals, errs, method


def _estimate(fn, measure, cfg, radial, **diag):
    vals, errs, method = expect_many(lambda x: fn(x)[:, None], 1, measure, cfg, radial)
    mc = method == "monte_carlo"
    return IntegralEstimate(float(vals[0]), method, float(errs[0]),
                            int(cfg.samples) if mc else 0, cfg.seed if mc else None, diag)


def _callable(f):
    return f.value if isinstance(f, ScalarField) else f


# ---------------------------------------------------------------------------
# functionals


def expect(f, measure, cfg=None, radial=None, degree=None):
    """``int f dmu`` for a ScalarField or a vectorized callable.

    ``degree`` is the polynomial growth order of ``|f|``; a divergent
    integral returns ``+inf`` flagged in the diagnostics.
    """
    cfg = cfg or DEFAULT
    if isinstance(f, ScalarField):
        if f.constant is not None:
            return exact(f.constant)
        radial = f.radial if radial is None else radial
        degree = f.tail_degree(measure.n, value_power=1) if degree is None else degree
    method = resolve_method(cfg, measure, bool(radial))
    if not _finite(measure, degree):
        return divergent(method, f"|f| grows like |x|^{degree}")
    return _estimate(_callable(f), measure, cfg, bool(radial))


def variance(g, measure, cfg=None):
    """``Var_mu(g)`` as ``int (g - m)^2 dmu`` with ``m`` from a first pass."""
    cfg = cfg or DEFAULT
    if g.constant is not None:
        return exact(0.0)
    method = resolve_method(cfg, measure, g.radial)
    if not _finite(measure, g.tail_degree(measure.n, value_power=2)):
        return divergent(method, "g is not square integrable")
    mean = expect(g, measure, cfg)
    m = mean.value

    def centred(x):
        return (g.value(x) - m) ** 2

    est = _estimate(centred, measure, cfg, g.radial, mean=m)
    return _clamp(est)


def _clamp(est):
    if est.value < 0:
        if est.value < -NEGATIVE_CLAMP:
            raise NumericError("negative estimate of a nonnegative functional", partial=est.value)
        return IntegralEstimate(0.0, est.method, est.abs_error, est.samples, est.seed,
                                {**est.diagnostics, "clamped": est.value})
    return est


def entropy(g2, measure, cfg=None, radial=None, degree=None):
    """``Ent_mu(g2)`` for ``g2 >= 0`` (``0 log 0 = 0``).

    Evaluated as ``int [g2 log(g2/m) - g2 + m] dmu`` with ``m = int g2 dmu``;
    the integrand is pointwise nonnegative.
    """
    cfg = cfg or DEFAULT
    if isinstance(g2, ScalarField):
        if g2.constant is not None:
            return exact(0.0)
        radial = g2.radial if radial is None else radial
        degree = g2.tail_degree(measure.n, value_power=1) if degree is None else degree
    radial = bool(radial)
    f = _callable(g2)
    method = resolve_method(cfg, measure, radial)
    if not _finite(measure, degree):
        return divergent(method, "g2 log g2 is not integrable")
    m = _estimate(f, measure, cfg, radial).value
    if m < 0:
        raise ParameterError("entropy needs a nonnegative function")
    if m == 0:
        return exact(0.0, mean=m)

    def phi(x):
        v = f(x)
        if np.any(v < 0):
            raise ParameterError("entropy needs a nonnegative function")
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(v > 0, v * np.log(v / m), 0.0)
        return t - v + m

    return _clamp(_estimate(phi, measure, cfg, radial, mean=m))


def weighted_dirichlet(g, weight_sq, measure, cfg=None, weight_deg=0.0, weight_radial=True):
    """``int |grad g|^2 w^2 dmu``; ``weight_sq=None`` means ``w = 1``.

    ``weight_deg`` is the growth order of ``w^2`` (None if unknown).
    """
    cfg = cfg or DEFAULT
    if g.constant is not None:
        return exact(0.0)
    if weight_sq is None:
        weight_deg = 0.0
        if g.grad_norm_sq is not None:
            return exact(g.grad_norm_sq)
    radial = g.radial and weight_radial
    method = resolve_method(cfg, measure, radial)
    if not _finite(measure, g.tail_degree(measure.n, grad_power=2, weight_deg=weight_deg)):
        return divergent(method, "|grad g|^2 w^2 is not integrable")

    def integrand(x):
        gr = g.grad(x)
        out = np.einsum("ij,ij->i", gr, gr)
        return out if weight_sq is None else out * weight_sq(x)

    return _estimate(integrand, measure, cfg, radial)


def best_shift_weighted_norm(g, weight_inv, measure, cfg=None, weight_deg=-2.0, weight_radial=True):
    """``inf_c int (g - c)^2 w dmu`` with ``w = weight_inv`` positive.

    The minimizer is ``c* = int g w dmu / int w dmu``.  Returns ``(c*, estimate)``.
    """
    cfg = cfg or DEFAULT
    radial = g.radial and weight_radial
    method = resolve_method(cfg, measure, radial)
    if g.constant is not None:
        return g.constant, exact(0.0)
    if not _finite(measure, g.tail_degree(measure.n, value_power=2, weight_deg=weight_deg)):
        return math.nan, divergent(method, "g^2 w is not integrable")

    def first(x):
        w = weight_inv(x)
        return np.stack([w, g.value(x) * w], axis=1)

    (sw, sgw), _, _ = expect_many(first, 2, measure, cfg, radial)
    if not sw > 0:
        raise NumericError("weight integrates to zero", partial=sw)
    c = float(sgw / sw)

    def centred(x):
        return (g.value(x) - c) ** 2 * weight_inv(x)

    return c, _clamp(_estimate(centred, measure, cfg, radial, c_star=c))
