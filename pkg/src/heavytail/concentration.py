"""Moment growth and tail bounds for Lipschitz functions.

Weight-moment norms for the rescaled Cauchy law, the moment bound for
Lipschitz functions under a weighted Poincaré or log-Sobolev inequality,
the piecewise tail envelopes derived from it, and Monte Carlo tail
experiments checked against those envelopes.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special

from . import _quad
from .errors import NumericError, ParameterError
from .integrate import DEFAULT, IntegralEstimate, exact, expect, resolve_method, _estimate
from .measures import CauchyParams
from .reports import HOLDS, VIOLATED, make_report
from .inequalities import thm31_constant

__all__ = [
    "weight_moment_product", "weight_norm_wp", "lsi_weight_norm", "moment_bound_thm41",
    "TailEnvelope", "tail_envelope", "TailRow", "TailReport", "empirical_tail",
    "default_t_grid", "ExpMoment", "exp_moment_alpha", "tail_rate_fit", "constant_chain",
    "cor44_floor",
]


def _params(params):
    return params if isinstance(params, CauchyParams) else CauchyParams(*params)


# ---------------------------------------------------------------------------
# weight norms


def weight_moment_product(params, q):
    """``int (1 + |x|^2/(2 beta - n))^q dnu~_beta = prod_(j=1..q) (beta-j)/(alpha-j)``."""
    p = _params(params)
    if int(q) != q or q < 0:
        raise ParameterError("q must be a nonnegative integer")
    if q >= p.alpha:
        raise ParameterError(f"moment of order q={q} diverges: needs q < beta - n/2 = {p.alpha}")
    out = 1.0
    for j in range(1, int(q) + 1):
        out *= (p.beta - j) / (p.alpha - j)
    return out


def weight_norm_wp(params, q, scale15=False):
    """The weight moment of order ``q``, or the norm ``||w||_(2q)``.

    Without ``scale15`` this is the product above.  With it, the weight is
    ``w^2 = 15 (1 + |x|^2/(2 beta - n))`` and the result is
    ``||w||_(2q) = sqrt(15) * product^(1/(2q))``.
    """
    prod = weight_moment_product(params, q)
    if not scale15:
        return prod
    if q < 1:
        raise ParameterError("the norm needs q >= 1")
    return math.sqrt(15.0) * prod ** (1.0 / (2.0 * q))


def lsi_weight_norm(params, p):
    """``||w||_p`` for ``w^2 = (alpha/(beta-1)) (1 + |x|^2/(2 beta - n))^2``, integer p."""
    prm = _params(params)
    if prm.beta <= 1:
        raise ParameterError("needs beta > 1")
    return math.sqrt(prm.alpha / (prm.beta - 1.0)) * weight_moment_product(prm, p) ** (1.0 / p)


def constant_chain(n, betas):
    """For ``beta >= n + 1``: ``C_beta <= (sqrt 2 + sqrt 3)^2 < 10`` and
    ``C_beta (beta - n/2)/(beta - 1) < 15``.  Returns one bool per beta."""
    cap = (math.sqrt(2.0) + math.sqrt(3.0)) ** 2
    out = []
    for b in betas:
        if b < n + 1:
            raise ParameterError("the chain is stated for beta >= n + 1")
        c = thm31_constant(b)
        out.append(c <= cap + 1e-12 and cap < 10 and c * (b - n / 2.0) / (b - 1.0) < 15)
    return out


def cor44_floor(n, beta):
    """``floor(beta - 3n/4)``, the integer moment order used for the rescaled law."""
    k = math.floor(beta - 0.75 * n + 1e-12)
    if k < 1:
        raise ParameterError(f"beta - 3n/4 must be at least 1, got {beta - 0.75 * n}")
    return k


# ---------------------------------------------------------------------------
# moment bound


def moment_bound_thm41(f, measure, wp_norm, p, kind="poincare", cfg=None, center=True):
    """``||f - mean||_p <= (p/sqrt 2) ||w||_p`` (Poincaré) or ``sqrt(p-1) ||w||_p`` (LSI).

    ``f`` must be 1-Lipschitz.  With ``center`` the field is centred by its
    computed mean first (recorded in the diagnostics).
    """
    cfg = cfg or DEFAULT
    p = float(p)
    if p < 2:
        raise ParameterError(f"needs p >= 2, got {p}")
    if kind not in ("poincare", "lsi"):
        raise ParameterError(f"unknown kind {kind!r}")
    if f.lipschitz is not None and f.lipschitz > 1 + 1e-12:
        raise ParameterError(f"{f.name} has Lipschitz constant {f.lipschitz} > 1")
    const = p / math.sqrt(2.0) if kind == "poincare" else math.sqrt(p - 1.0)
    rhs = exact(const * wp_norm)
    diag = {}
    if f.constant is not None:
        lhs = exact(0.0 if center else abs(f.constant))
        return make_report("thm41", {"n": measure.n, "beta": getattr(measure, "beta", None),
                                     "p": p, "kind": kind}, f.name, lhs, rhs, const)
    m = 0.0
    if center:
        m = expect(f, measure, cfg).value
        diag["centered"] = m
    deg = f.tail_degree(measure.n, value_power=p)
    if deg is not None and not measure.moment_finite(deg):
        lhs = IntegralEstimate(math.inf, resolve_method(cfg, measure, f.radial), 0.0,
                               diagnostics={"divergent": "|f|^p not integrable"})
    else:
        mom = _estimate(lambda x: np.abs(f.value(x) - m) ** p, measure, cfg, f.radial)
        val = mom.value ** (1.0 / p)
        err = val / (p * mom.value) * mom.abs_error if mom.value > 0 else 0.0
        lhs = IntegralEstimate(val, mom.method, err, mom.samples, mom.seed)
    params = {"n": measure.n, "beta": getattr(measure, "beta", None), "p": p, "kind": kind}
    return make_report("thm41", params, f.name, lhs, rhs, const, wp_norm=wp_norm, **diag)


# ---------------------------------------------------------------------------
# envelopes


@dataclass(frozen=True)
class TailEnvelope:
    """Piecewise tail bound ``t -> bound(t)``.

    ``generic_poincare``: ``2 exp(-t/(C e))`` up to ``t1 = C e p``, then
    ``2 (C p / t)^p``.  ``generic_lsi``: ``2 exp(-t^2/(2 C^2 e))`` up to
    ``t0 = C sqrt(e p)``, then ``2 (C sqrt(p) / t)^p``.
    ``cauchy_three_regime``: Gaussian, exponential and polynomial branches
    with breakpoints ``t0``, ``t1``.
    """

    kind: str
    C: float
    p: float
    t0: Optional[float] = None
    t1: Optional[float] = None
    k: Optional[int] = None

    def branch(self, t):
        """Branch index (0 = first) used at each ``t``."""
        t = np.asarray(t, dtype=float)
        if self.kind == "generic_poincare":
            return np.where(t <= self.t1, 0, 1)
        if self.kind == "generic_lsi":
            return np.where(t < self.t0, 0, 1)
        return np.where(t < self.t0, 0, np.where(t <= self.t1, 1, 2))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        e = math.e
        with np.errstate(divide="ignore", over="ignore"):
            safe = np.where(t > 0, t, 1.0)
            if self.kind == "generic_poincare":
                out = np.where(t <= self.t1, 2.0 * np.exp(-t / (self.C * e)),
                               2.0 * (self.C * self.p / safe) ** self.p)
            elif self.kind == "generic_lsi":
                out = np.where(t < self.t0, 2.0 * np.exp(-t ** 2 / (2.0 * self.C ** 2 * e)),
                               2.0 * (self.C * math.sqrt(self.p) / safe) ** self.p)
            else:
                out = np.where(t < self.t0, 2.0 * np.exp(-t ** 2 / (32.0 * e)),
                               np.where(t <= self.t1, 2.0 * np.exp(-t / (7.0 * e)),
                                        2.0 * (7.0 * self.p / safe) ** self.p))
        out = np.minimum(out, 2.0)
        return float(out[0]) if scalar else out

    def breakpoints(self):
        return tuple(b for b in (self.t0, self.t1) if b is not None)


def tail_envelope(kind, C=None, p=None, n=None, beta=None):
    """Build an envelope.  The three-regime Cauchy form takes ``n`` and ``beta``
    (``beta >= n + 1``) and sets ``p = 2 k``, ``t0 = 4 sqrt(e k)``,
    ``t1 = 7 e k`` with ``k = floor(beta - 3n/4)``."""
    if kind == "cauchy_three_regime":
        if n is None or beta is None:
            raise ParameterError("the Cauchy envelope needs n and beta")
        if beta < n + 1:
            raise ParameterError(f"needs beta >= n + 1, got n={n}, beta={beta}")
        k = cor44_floor(n, beta)
        return TailEnvelope(kind, 7.0, 2.0 * k, 4.0 * math.sqrt(math.e * k), 7.0 * math.e * k, k)
    if kind not in ("generic_poincare", "generic_lsi"):
        raise ParameterError(f"unknown envelope kind {kind!r}")
    if C is None or p is None or not C > 0 or not p >= 1:
        raise ParameterError("need C > 0 and p >= 1")
    C, p = float(C), float(p)
    if kind == "generic_poincare":
        return TailEnvelope(kind, C, p, t1=C * math.e * p)
    return TailEnvelope(kind, C, p, t0=C * math.sqrt(math.e * p))


def default_t_grid(envelope, count=20, t_min=0.25, t_max=None):
    """Log-spaced grid with the envelope's breakpoints included."""
    bps = envelope.breakpoints()
    t_max = t_max or 1.5 * max(bps)
    base = np.geomspace(t_min, t_max, count - len(bps))
    return np.unique(np.concatenate([base, bps]))


# ---------------------------------------------------------------------------
# tail experiments


@dataclass(frozen=True)
class TailRow:
    t: float
    bound: float
    empirical: float
    stderr: float
    verdict: str


@dataclass(frozen=True)
class TailReport:
    f_name: str
    params: dict
    envelope: TailEnvelope
    rows: tuple
    mean: float
    mean_stderr: float
    samples: int
    seed: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def verdict(self):
        return HOLDS if all(r.verdict == HOLDS for r in self.rows) else VIOLATED


def empirical_tail(f, measure, envelope, t_grid=None, samples=1_000_000, seed=42, workers=None):
    """Empirical ``mu(|f - mean| >= t)`` against ``envelope(t)``.

    The mean is estimated from the same samples; its uncertainty is folded
    in by counting ``|f - mean| >= t - 3 se(mean)``.  A row holds when the
    empirical frequency is at most ``bound + 3 * binomial stderr``.
    """
    if f.lipschitz is not None and f.lipschitz > 1 + 1e-12:
        raise ParameterError(f"{f.name} is not 1-Lipschitz")
    if t_grid is None:
        t_grid = default_t_grid(envelope)
    x = measure.sample(samples, seed, workers)
    v = f.value(x)
    m = float(v.mean())
    se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
    dev = np.sort(np.abs(v - m))
    rows = []
    for t in np.asarray(t_grid, dtype=float):
        thr = max(t - 3.0 * se, 0.0)
        cnt = len(dev) - np.searchsorted(dev, thr, side="left")
        pe = cnt / len(dev)
        sd = math.sqrt(pe * (1.0 - pe) / len(dev))
        b = envelope(t)
        rows.append(TailRow(float(t), float(b), float(pe), sd,
                            HOLDS if pe <= b + 3.0 * sd else VIOLATED))
    params = {"n": measure.n, "beta": getattr(measure, "beta", None)}
    return TailReport(f.name, params, envelope, tuple(rows), m, se, int(samples), int(seed))


def tail_rate_fit(f, measure, samples=1_000_000, seed=42, min_count=100):
    """Least-squares slope of ``-log mu(|f - mean| >= t)`` against ``t``.

    Uses thresholds with at least ``min_count`` exceedances; a report-only
    diagnostic for exponential tail shape.
    """
    x = measure.sample(samples, seed)
    v = f.value(x)
    dev = np.sort(np.abs(v - v.mean()))
    hi = dev[-min_count]
    ts = np.linspace(0.0, hi, 50)[1:]
    tail = (len(dev) - np.searchsorted(dev, ts, side="left")) / len(dev)
    slope = np.polyfit(ts, -np.log(tail), 1)[0]
    return float(slope)


# ---------------------------------------------------------------------------
# exponential moments


@dataclass(frozen=True)
class ExpMoment:
    """Smallest ``alpha`` with ``int exp(w^2/alpha) dmu <= 2``; ``divergent`` when none exists."""

    alpha: float
    divergent: bool
    method: str
    value: float = math.nan


def _log_exp_moment(weight_sq, measure, alpha, cfg, radial):
    """``log int exp(w^2/alpha) dmu`` evaluated in log space (inf if divergent)."""
    method = resolve_method(cfg, measure, radial)
    if method == "quadrature":
        try:
            return _log_exp_moment_quad(weight_sq, measure, alpha)
        except OverflowError:
            return math.inf
    x = measure.sample(cfg.samples, cfg.seed, cfg.workers)
    return float(special.logsumexp(weight_sq(x) / alpha) - math.log(len(x)))


def _log_exp_moment_quad(weight_sq, measure, alpha):
    n = measure.n

    def lw(x):
        return float(weight_sq(x)[0]) / alpha

    if n == 1:
        lo, hi = measure.domain.interval()

        def ld(t):
            pt = np.array([[t]])
            return float(measure.log_density(pt)[0]) + lw(pt)

        res = _quad.line(None, ld, lo, hi, measure.scale, rtol=1e-11, atol=1e-300,
                         breaks=(0.0,))
    else:
        def ld(r):
            pt = np.zeros((1, n))
            pt[0, 0] = r
            return measure.log_density_r(r) + lw(pt)

        res = _quad.radial(None, ld, n, measure.scale, rtol=1e-11, atol=1e-300)
    if not math.isfinite(res.value) or (res.warning and res.error > 1e-6 * abs(res.value)):
        return math.inf
    return math.log(res.value)


def exp_moment_alpha(weight_sq, measure, weight_deg=None, cfg=None, radial=True, rtol=1e-10):
    """Bisection (in ``log alpha``) for the Orlicz-type level ``int e^(w^2/alpha) = 2``.

    Divergence is decided from the tails: a polynomially growing ``w^2``
    against a polynomially decaying density, or ``w^2`` growing faster than
    the log-concave potential, makes the integral infinite for every alpha.
    """
    cfg = cfg or DEFAULT
    method = resolve_method(cfg, measure, radial)
    if weight_deg is not None:
        if math.isfinite(measure.tail_exponent):
            diverges = weight_deg > 0
        else:
            dpot = measure.potential.degree
            diverges = dpot is not None and weight_deg > dpot
        if diverges:
            return ExpMoment(math.inf, True, method)
    log2 = math.log(2.0)

    def h(alpha):
        return _log_exp_moment(weight_sq, measure, alpha, cfg, radial)

    hi = 1.0
    for _ in range(200):
        if h(hi) <= log2:
            break
        hi *= 2.0
    else:
        return ExpMoment(math.inf, True, method)
    lo = hi / 2.0
    for _ in range(200):
        if h(lo) > log2:
            break
        hi, lo = lo, lo / 2.0
    else:
        raise NumericError("exponential moment stays below 2 as alpha -> 0 (is w zero?)")
    a, b = math.log(lo), math.log(hi)
    while b - a > rtol:
        mid = 0.5 * (a + b)
        if h(math.exp(mid)) > log2:
            a = mid
        else:
            b = mid
    alpha = math.exp(b)
    return ExpMoment(alpha, False, method, math.exp(h(alpha)))
