"""Checkers for the weighted Poincaré, reversed Poincaré, log-Sobolev and
Brascamp-Lieb-type inequalities, plus the Hardy constant and the
optimality lower bound for the Cauchy family.

Every checker returns an :class:`InequalityReport` whose two sides are
computed independently (closed-form constants times numerically
integrated functionals).  Parameters outside a statement's hypotheses raise
:class:`ParameterError`; a divergent right-hand side makes the check
vacuous rather than failing.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from . import _quad
from .errors import NumericError, ParameterError, PreconditionError
from .fields import ScalarField, exp_linear_field
from .integrate import (DEFAULT, IntegralEstimate, best_shift_weighted_norm, divergent, entropy,
                        exact, expect, resolve_method, variance, weighted_dirichlet, _estimate,
                        _finite)
from .measures import (CauchyParams, cauchy_measure, cholesky_or_raise, gaussian_measure,
                       moment_Im)
from .reports import HOLDS, INCONCLUSIVE, make_report

__all__ = [
    "thm31_constant", "thm24_constant", "eq35_constant", "check_weighted_poincare_thm31",
    "check_reversed_cor32", "check_reversed_lowbeta_eq35", "check_transfer_prop33",
    "check_weighted_lsi_thm34", "check_gross_lsi_eq39", "check_brascamp_lieb_ext_thm23",
    "check_moment_shift_eq211", "check_moment_shift_eq212", "check_RW_poincare_thm24",
    "check_eq217", "check_eq218", "hardy_constant_B", "check_hardy_cauchy",
    "cauchy_hardy_weights", "optimality_lower_bound", "OptimalityBound", "prop33_constants",
    "HardyResult", "split_quadratic_bound",
]


def _sq(x):
    return np.einsum("ij,ij->i", x, x)


def _one_plus_sq(x):
    return 1.0 + _sq(x)


def _one_plus_sq_squared(x):
    return (1.0 + _sq(x)) ** 2


def _inv_one_plus_sq(x):
    return 1.0 / (1.0 + _sq(x))


def _params(params):
    return params if isinstance(params, CauchyParams) else CauchyParams(*params)


def _pdict(params, **extra):
    return {"n": params.n, "beta": params.beta, **extra}


# ---------------------------------------------------------------------------
# constants


def thm31_constant(beta):
    """``C_beta = (sqrt(1 + 2/(beta-1)) + sqrt(2/(beta-1)))^2``, defined for beta > 1."""
    if beta <= 1:
        raise ParameterError(f"C_beta needs beta > 1, got {beta}")
    u = 2.0 / (beta - 1.0)
    return (math.sqrt(1.0 + u) + math.sqrt(u)) ** 2


def thm24_constant(beta):
    """``(1 + sqrt(beta + 1))^2 / beta``."""
    if beta <= 0:
        raise ParameterError("beta must be positive")
    return (1.0 + math.sqrt(beta + 1.0)) ** 2 / beta


def eq35_constant(n, beta):
    """``(n+2)^2 / (2 (n+1) (beta+1) (2 beta - n))``."""
    return (n + 2.0) ** 2 / (2.0 * (n + 1.0) * (beta + 1.0) * (2.0 * beta - n))


# ---------------------------------------------------------------------------
# the Cauchy family


def check_weighted_poincare_thm31(params, g, cfg=None):
    """``Var(g) <= C_beta / (2(beta-1)) int |grad g|^2 (1+|x|^2) dnu_beta``."""
    p = _params(params)
    if p.beta < p.n:
        raise ParameterError(f"needs beta >= n, got n={p.n}, beta={p.beta}")
    const = thm31_constant(p.beta) / (2.0 * (p.beta - 1.0))
    mu = cauchy_measure(p)
    lhs = variance(g, mu, cfg)
    rhs = weighted_dirichlet(g, _one_plus_sq, mu, cfg, weight_deg=2.0).scaled(const)
    return make_report("thm31", _pdict(p), g.name, lhs, rhs, const)


def check_reversed_cor32(params, g, cfg=None):
    """``inf_c int (g-c)^2/(1+|x|^2) dnu_beta <= 1/(2 beta) int |grad g|^2 dnu_beta``."""
    p = _params(params)
    if p.beta < p.n + 1:
        raise ParameterError(f"needs beta >= n + 1, got n={p.n}, beta={p.beta}")
    const = 1.0 / (2.0 * p.beta)
    return _reversed("cor32", p, g, const, cfg)


def _reversed(ident, p, g, const, cfg, **extra):
    mu = cauchy_measure(p)
    c_star, lhs = best_shift_weighted_norm(g, _inv_one_plus_sq, mu, cfg, weight_deg=-2.0)
    rhs = weighted_dirichlet(g, None, mu, cfg).scaled(const)
    return make_report(ident, _pdict(p), g.name, lhs, rhs, const, c_star=c_star, **extra)


def check_reversed_lowbeta_eq35(params, g, cfg=None):
    """Reversed inequality for ``n/2 < beta <= n + 1`` with the low-beta constant.

    Also records whether the constant satisfies ``C <= 1/(beta - n/2)``.
    """
    p = _params(params)
    if p.beta > p.n + 1:
        raise ParameterError(f"needs n/2 < beta <= n + 1, got n={p.n}, beta={p.beta}")
    const = eq35_constant(p.n, p.beta)
    chain = const <= 1.0 / p.alpha * (1 + 1e-15)
    return _reversed("eq35", p, g, const, cfg, constant_chain=chain)


def check_transfer_prop33(a, b, measure, g, cfg=None, weight_radial=True):
    """Median-weighted Poincaré (hypothesis) implies the reversed form.

    The hypothesis ``int |g - m|^2 <= int |grad g|^2 (a + b|x|^2)`` is checked
    first with ``m`` the empirical median of ``g`` under ``measure``; if it
    fails the verdict is inconclusive.
    """
    a, b = float(a), float(b)
    if not a > 0:
        raise ParameterError("a must be positive")
    if not 0.0 <= b < 1.0:
        raise ParameterError(f"b must lie in [0, 1), got {b}")
    cfg = cfg or DEFAULT
    wdeg = 2.0 if b > 0 else 0.0
    med = _median(g, measure, cfg)

    def dev(x):
        return (g.value(x) - med) ** 2

    deg = g.tail_degree(measure.n, value_power=2)
    h_lhs = (exact(0.0) if g.constant is not None else
             divergent(resolve_method(cfg, measure, g.radial), "g not square integrable")
             if not _finite(measure, deg) else _estimate(dev, measure, cfg, g.radial))
    h_rhs = weighted_dirichlet(g, lambda x: a + b * _sq(x), measure, cfg, weight_deg=wdeg)
    hyp = make_report("prop33_hypothesis", {}, g.name, h_lhs, h_rhs, 1.0)

    const = 1.0 / (1.0 - math.sqrt(b)) ** 2
    c_star, lhs = best_shift_weighted_norm(g, lambda x: 1.0 / (a + b * _sq(x)), measure, cfg,
                                           weight_deg=-wdeg, weight_radial=weight_radial)
    rhs = weighted_dirichlet(g, None, measure, cfg).scaled(const)
    params = {"n": measure.n, "beta": getattr(measure, "beta", None), "a": a, "b": b}
    forced = None if hyp.verdict == HOLDS else INCONCLUSIVE
    return make_report("prop33", params, g.name, lhs, rhs, const, verdict=forced, c_star=c_star,
                       median=med, hypothesis=hyp.verdict, hypothesis_ratio=hyp.ratio)


def _median(g, measure, cfg):
    if g.constant is not None:
        return g.constant
    x = measure.sample(cfg.samples, cfg.seed, cfg.workers)
    return float(np.median(g.value(x)))


def prop33_constants(beta):
    """``a = b = 3 C_beta / (2 (beta - 1))`` from the median-variance comparison."""
    k = 3.0 * thm31_constant(beta) / (2.0 * (beta - 1.0))
    return k, k


def check_weighted_lsi_thm34(params, g, cfg=None):
    """``Ent(g^2) <= 1/(beta-1) int |grad g|^2 (1+|x|^2)^2 dnu_beta``."""
    p = _params(params)
    if p.beta < (p.n + 1) / 2.0 or p.beta <= 1:
        raise ParameterError(f"needs beta >= (n+1)/2 and beta > 1, got n={p.n}, beta={p.beta}")
    const = 1.0 / (p.beta - 1.0)
    mu = cauchy_measure(p)
    lhs = entropy(g.squared(), mu, cfg)
    rhs = weighted_dirichlet(g, _one_plus_sq_squared, mu, cfg, weight_deg=4.0).scaled(const)
    return make_report("thm34", _pdict(p), g.name, lhs, rhs, const)


def check_gross_lsi_eq39(g=None, n=1, cfg=None, s=None):
    """Gaussian baseline ``Ent(g^2) <= 2 int |grad g|^2 dgamma_n``.

    With ``s`` given, ``g(x) = exp(s x_1 / 2)``, for which equality holds.
    """
    if g is None:
        if s is None:
            raise ParameterError("give a field g or an exponent s")
        g = exp_linear_field(s, n)
    mu = gaussian_measure(n)
    lhs = entropy(g.squared(), mu, cfg)
    rhs = weighted_dirichlet(g, None, mu, cfg).scaled(2.0)
    extra = {} if s is None else {"s": float(s)}
    return make_report("eq39", {"n": n, "beta": None, **extra}, g.name, lhs, rhs, 2.0)


# ---------------------------------------------------------------------------
# general convex measures V^-beta


def split_quadratic_bound(A, u, v, r):
    """Both sides of ``<A(u+v), u+v> <= r <Au, u> + r/(r-1) <Av, v>``.

    ``A`` is positive semi-definite and ``r > 1``.  Returns ``(lhs, rhs)``.
    """
    r = float(r)
    if not r > 1:
        raise ParameterError(f"needs r > 1, got {r}")
    A, u, v = (np.asarray(a, dtype=float) for a in (A, u, v))
    w = u + v
    return float(w @ A @ w), float(r * (u @ A @ u) + r / (r - 1.0) * (v @ A @ v))


def _quadratic_form(mats, vecs, points):
    """``<A^-1 v, v>`` for stacked SPD matrices via Cholesky."""
    chol = cholesky_or_raise(mats, points)
    y = np.linalg.solve(chol, vecs[..., None])[..., 0]
    return _sq(y)


def _G_parts(measure, g):
    pot = measure.potential

    def G(x):
        return pot.value(x) * g.value(x)

    def gradG(x):
        return g.value(x)[:, None] * pot.grad(x) + pot.value(x)[:, None] * g.grad(x)

    return G, gradG


def _form_degree(measure, g):
    """Growth order of ``<V''^-1 grad G, grad G> / V`` for ``G = V g``."""
    pot = measure.potential
    D, h = pot.degree, pot.hess_inv_degree
    if D is None or h is None:
        return None
    d1 = g.tail_degree(measure.n, value_power=2, weight_deg=2 * (D - 1) + h - D)
    d2 = g.tail_degree(measure.n, grad_power=2, weight_deg=2 * D + h - D)
    if d1 is None or d2 is None:
        return None
    return max(d1, d2)


def _require_hessian(measure):
    if measure.potential.hess is None:
        raise ParameterError(f"potential {measure.potential.name} has no Hessian")


def check_brascamp_lieb_ext_thm23(measure, g, cfg=None):
    """``(beta+1) Var(g) <= int <V''^-1 grad G, grad G>/V dmu + n/(beta-n) (int g dmu)^2``.

    ``G = V g`` is assembled here.  At ``beta = n`` the field is centred
    first, which removes the last term.
    """
    cfg = cfg or DEFAULT
    _require_hessian(measure)
    n, beta = measure.n, measure.beta
    if beta < n:
        raise ParameterError(f"needs beta >= n, got n={n}, beta={beta}")
    diag = {}
    if beta == n and g.constant is None:
        m = expect(g, measure, cfg).value
        g = g.affine(1.0, -m, name=g.name)
        diag["centered"] = m
    pot = measure.potential
    radial = g.radial and measure.radial
    method = resolve_method(cfg, measure, radial)
    _, gradG = _G_parts(measure, g)

    def form(x):
        return _quadratic_form(pot.hess(x), gradG(x), x) / pot.value(x)

    lhs = variance(g, measure, cfg).scaled(beta + 1.0)
    if g.constant == 0.0:
        first = exact(0.0)
    elif not _finite(measure, _form_degree(measure, g)):
        first = divergent(method, "<V''^-1 grad G, grad G>/V is not integrable")
    else:
        first = _estimate(form, measure, cfg, radial)
    if beta > n:
        mean = expect(g, measure, cfg)
        coef = n / (beta - n)
        second = IntegralEstimate(coef * mean.value ** 2, mean.method,
                                  coef * (2 * abs(mean.value) * mean.abs_error + mean.abs_error ** 2),
                                  mean.samples, mean.seed)
        rhs = first.plus(second)
    else:
        rhs = first
    return make_report("thm23", {"n": n, "beta": beta, "potential": pot.name}, g.name,
                       lhs, rhs, beta + 1.0, **diag)


def _centre_for_shift(measure, G, cfg, auto_center, tol=1e-10):
    if G.constant is not None:
        return G.affine(1.0, -G.constant, name=G.name), {"centered": G.constant} if G.constant else {}
    m = expect(G, measure, cfg)
    if m.method != "monte_carlo" and abs(m.value) <= tol * (1 + abs(m.value)):
        return G, {}
    if not auto_center:
        raise PreconditionError("G must have mean zero under mu_beta",
                                details={"mean": m.value, "err": m.abs_error})
    return G.affine(1.0, -m.value, name=G.name), {"centered": m.value}


def _z_ratio(measure):
    """``Z_beta / Z_(beta+1)`` for the family sharing the potential."""
    return math.exp(measure.log_normalizer - measure.with_beta(measure.beta + 1).log_normalizer)


def check_moment_shift_eq211(measure, G, cfg=None, auto_center=True):
    """``int G^2 dmu_(beta+1) <= (1/beta) (Z_beta/Z_(beta+1)) int <V''^-1 grad G, grad G> dmu_beta``.

    ``G`` must have ``mu_beta`` mean zero; it is centred when ``auto_center``.
    """
    cfg = cfg or DEFAULT
    _require_hessian(measure)
    n, beta = measure.n, measure.beta
    if beta - 1 < n:
        raise ParameterError(f"needs beta - 1 >= n, got n={n}, beta={beta}")
    G, diag = _centre_for_shift(measure, G, cfg, auto_center)
    ratio = _z_ratio(measure)
    const = ratio / beta
    pot = measure.potential
    radial = G.radial and measure.radial
    method = resolve_method(cfg, measure, radial)
    lhs = _second_moment(G, measure.with_beta(beta + 1), cfg)
    D, h = pot.degree, pot.hess_inv_degree
    deg = None if h is None else G.tail_degree(n, grad_power=2, weight_deg=h)

    def form(x):
        return _quadratic_form(pot.hess(x), G.grad(x), x)

    if G.constant is not None:
        rhs = exact(0.0)
    elif not _finite(measure, deg):
        rhs = divergent(method, "<V''^-1 grad G, grad G> is not integrable")
    else:
        rhs = _estimate(form, measure, cfg, radial).scaled(const)
    return make_report("eq211", {"n": n, "beta": beta, "potential": pot.name}, G.name,
                       lhs, rhs, const, z_ratio=ratio, **diag)


def _second_moment(G, measure, cfg):
    if G.constant is not None:
        return exact(G.constant ** 2)
    deg = G.tail_degree(measure.n, value_power=2)
    if not _finite(measure, deg):
        return divergent(resolve_method(cfg, measure, G.radial), "G not square integrable")
    return _estimate(lambda x: G.value(x) ** 2, measure, cfg, G.radial)


def check_moment_shift_eq212(measure, G, c=2.0, cfg=None, auto_center=True, hess_check=256):
    """``int G^2 dmu_(beta+1) <= 1/(c beta) (Z_beta/Z_(beta+1)) int |grad G|^2 dmu_beta``.

    Requires ``V'' >= c Id``, spot-checked at ``hess_check`` sampled points.
    """
    cfg = cfg or DEFAULT
    n, beta = measure.n, measure.beta
    if beta < n + 1:
        raise ParameterError(f"needs beta >= n + 1, got n={n}, beta={beta}")
    if not c > 0:
        raise ParameterError("c must be positive")
    pot = measure.potential
    if pot.hess is not None and hess_check:
        x = measure.sample(hess_check, cfg.seed)
        lam = np.linalg.eigvalsh(pot.hess(x))[:, 0]
        if np.min(lam) < c * (1 - 1e-12):
            k = int(np.argmin(lam))
            raise PreconditionError("V'' >= c Id fails", details={"point": x[k].tolist(),
                                                                  "min_eigenvalue": float(lam[k])})
    G, diag = _centre_for_shift(measure, G, cfg, auto_center)
    ratio = _z_ratio(measure)
    const = ratio / (c * beta)
    lhs = _second_moment(G, measure.with_beta(beta + 1), cfg)
    rhs = weighted_dirichlet(G, None, measure, cfg).scaled(const)
    return make_report("eq212", {"n": n, "beta": beta, "c": c, "potential": pot.name}, G.name,
                       lhs, rhs, const, z_ratio=ratio, **diag)


# ---------------------------------------------------------------------------
# log-concave measures e^-W


def _R_form(measure, beta, g, cfg, scale_const, ident, params, weight=None):
    """Shared body of the ``R_(W,beta)`` checkers.

    ``weight(x, grad_g)`` overrides the quadratic form (used by the explicit
    Gaussian variant).
    """
    cfg = cfg or DEFAULT
    pot = measure.potential
    if pot.hess is None:
        raise ParameterError(f"potential {pot.name} has no Hessian")

    def form(x):
        gr = g.grad(x)
        if weight is not None:
            return weight(x, gr)
        w1 = pot.grad(x)
        R = pot.hess(x) + np.einsum("ni,nj->nij", w1, w1) / beta
        return _quadratic_form(R, gr, x)

    radial = g.radial and measure.radial
    lhs = variance(g, measure, cfg)
    if g.constant is not None:
        rhs = exact(0.0)
    else:
        rhs = _estimate(form, measure, cfg, radial).scaled(scale_const)
    return make_report(ident, params, g.name, lhs, rhs, scale_const)


def check_RW_poincare_thm24(measure, beta, g, cfg=None):
    """``Var(g) <= C_beta int <R^-1 grad g, grad g> dmu`` with ``R = W'' + W' W'^T / beta``.

    ``measure`` has density ``e^-W``; R (not W'') is factorized, so a
    vanishing W'' is allowed as long as R is positive definite.
    """
    n = measure.n
    beta = float(beta)
    if beta < n:
        raise ParameterError(f"needs beta >= n, got n={n}, beta={beta}")
    const = thm24_constant(beta)
    return _R_form(measure, beta, g, cfg, const, "thm24",
                   {"n": n, "beta": beta, "potential": measure.potential.name})


def check_eq217(measure, g, cfg=None):
    """1D, beta = 1: ``Var(g) <= 6 int g'^2 / (W'' + W'^2) dmu``."""
    if measure.n != 1:
        raise ParameterError("the one-dimensional form needs n = 1")
    return _R_form(measure, 1.0, g, cfg, 6.0, "eq217",
                   {"n": 1, "beta": 1.0, "potential": measure.potential.name})


def check_eq218(n, g, cfg=None):
    """``Var(g) <= 6 int [|grad g|^2 - <grad g, x>^2/(n + |x|^2)] dgamma_n``."""
    mu = gaussian_measure(n)

    def weight(x, gr):
        return _sq(gr) - np.einsum("ij,ij->i", gr, x) ** 2 / (n + _sq(x))

    return _R_form(mu, float(n), g, cfg, 6.0, "eq218", {"n": n, "beta": float(n)}, weight)


# ---------------------------------------------------------------------------
# Hardy constant


def cauchy_hardy_weights(beta):
    """``p = (1+x^2)^-beta``, ``q = (1+x^2)^-(beta-1)`` and the closed-form tail of p."""
    beta = float(beta)
    if beta <= 0.5:
        raise ParameterError("p is integrable only for beta > 1/2")
    half_b = 0.5 * special.beta(0.5, beta - 0.5)

    def p(t):
        return (1.0 + t * t) ** -beta

    def q(t):
        return (1.0 + t * t) ** -(beta - 1.0)

    def p_tail(x):
        # int_x^inf p = (1/2) B(1/2, beta - 1/2) I_w(beta - 1/2, 1/2), w = 1/(1+x^2);
        # w rather than 1 - w keeps precision for large x
        return half_b * special.betainc(beta - 0.5, 0.5, 1.0 / (1.0 + x * x))

    return p, q, p_tail


def hardy_constant_B(p, q, p_tail=None, inv_q_cum=None, lo=1e-6, hi=1e6, points=1000):
    """``B = sup_(x>0) int_0^x dt/q(t) * int_x^inf p(t) dt``.

    Log-spaced grid on ``[lo, hi]``, then bounded golden-section refinement
    around the grid maximizer.  ``p_tail(x)`` and ``inv_q_cum(x)`` are
    optional closed forms of the two inner integrals.
    """
    xs = np.geomspace(lo, hi, points)

    def inv_q(t):
        return 1.0 / q(t)

    def quad(f, a, b):
        res = _quad.qags(f, a, b, rtol=1e-12, atol=1e-300)
        if not math.isfinite(res.value):
            raise NumericError("inner Hardy integral diverges", partial=res.value)
        return res.value

    def tail_p(x):
        if p_tail is not None:
            return float(p_tail(x))
        res = _quad.line(p, lambda t: 0.0, x, math.inf, scale=max(1.0, x), rtol=1e-12,
                         atol=1e-300, breaks=())
        if not math.isfinite(res.value) or res.error > 1e-8 * abs(res.value):
            raise NumericError("tail integral of p diverges", partial=res.value)
        return res.value

    def cum_q(x):
        if inv_q_cum is not None:
            return float(inv_q_cum(x))
        return quad(inv_q, 0.0, x)

    # cumulative integrals along the grid
    if inv_q_cum is None:
        # 1/q can overflow for steep weights; the grid is cut where it does
        A = np.full(points, math.inf)
        acc = 0.0
        with np.errstate(over="ignore"):
            for k in range(points):
                acc += _quad.qags(inv_q, xs[k - 1] if k else 0.0, xs[k], rtol=1e-12,
                                  atol=1e-300).value
                if not math.isfinite(acc):
                    break
                A[k] = acc
    else:
        A = np.array([cum_q(x) for x in xs])
    kept = int(np.sum(np.isfinite(A)))
    if kept < 2:
        raise NumericError("inner Hardy integral diverges", partial=float(A[0]))
    xs, A, points = xs[:kept], A[:kept], kept
    if p_tail is None:
        P = np.empty(points)
        P[-1] = tail_p(xs[-1])
        for k in range(points - 2, -1, -1):
            P[k] = P[k + 1] + quad(p, xs[k], xs[k + 1])
    else:
        P = np.array([tail_p(x) for x in xs])
    prod = A * P
    if not np.all(np.isfinite(prod)):
        raise NumericError("Hardy product is not finite on the grid")
    k = int(np.argmax(prod))
    a, b = math.log(xs[max(k - 1, 0)]), math.log(xs[min(k + 1, points - 1)])

    def neg(logx):
        x = math.exp(logx)
        return -cum_q(x) * tail_p(x)

    res = optimize.minimize_scalar(neg, bounds=(a, b), method="bounded",
                                   options={"xatol": 1e-12, "maxiter": 500})
    best = max(-res.fun, float(prod[k]))
    argmax = math.exp(res.x) if -res.fun >= prod[k] else float(xs[k])
    return HardyResult(best, argmax, at_edge=k in (0, points - 1))


@dataclass(frozen=True)
class HardyResult:
    """``B`` with its maximizer; ``at_edge`` flags a supremum at the grid boundary."""

    B: float
    argmax: float
    at_edge: bool = False

    def __float__(self):
        return self.B


def check_hardy_cauchy(beta, slack=1e-6):
    """Numeric B for the weighted Cauchy pair against ``1/max(2(beta-1), 1)``."""
    p, q, tail = cauchy_hardy_weights(beta)
    res = hardy_constant_B(p, q, p_tail=tail)
    bound = 1.0 / max(2.0 * (beta - 1.0), 1.0)
    lhs = IntegralEstimate(res.B, "quadrature")
    rhs = exact(bound)
    return make_report("hardy", {"n": 1, "beta": float(beta)}, "hardy", lhs, rhs, bound, tol=slack,
                       argmax=res.argmax, at_edge=res.at_edge)


# ---------------------------------------------------------------------------
# optimality of the Poincaré constant


@dataclass(frozen=True)
class OptimalityBound:
    """Lower bound for the weighted Poincaré constant from ``g = 1/(1+|x|^2)``.

    ``bound`` is ``(beta+2)/(4 beta (beta - n/2 + 1))``; ``ratio_closed`` is
    Var/Dirichlet from the moment products; ``ratio_quad`` the same from
    quadrature (None unless requested).
    """

    params: CauchyParams
    bound: float
    floor: float
    ratio_closed: float
    ratio_quad: float = None

    def report(self):
        lhs = exact(self.bound)
        rhs = exact(self.ratio_closed)
        return make_report("lower_bound", _pdict(self.params), "inv1px2", lhs, rhs, self.bound,
                           tol=1e-10, floor=self.floor, ratio_quad=self.ratio_quad)


def optimality_lower_bound(params, quadrature=False, cfg=None):
    """Closed-form lower bound and the measured ratio for ``g = 1/(1+|x|^2)``."""
    p = _params(params)
    b, a = p.beta, p.alpha
    bound = (b + 2.0) / (4.0 * b * (a + 1.0))
    floor = 1.0 / (4.0 * b)
    i1, i2, i3 = (moment_Im(p, m) for m in (1, 2, 3))
    ratio = (i2 - i1 * i1) / (4.0 * (i2 - i3))
    if ratio < bound - 1e-10 or ratio < floor - 1e-10:
        raise NumericError("measured ratio falls below the lower bound",
                           details={"ratio": ratio, "bound": bound, "floor": floor})
    rq = None
    if quadrature:
        from .fields import gallery_field
        g = gallery_field("inv1px2", p.n)
        mu = cauchy_measure(p)
        cfg = cfg or DEFAULT
        rq = (variance(g, mu, cfg).value
              / weighted_dirichlet(g, _one_plus_sq, mu, cfg, weight_deg=2.0).value)
    return OptimalityBound(p, bound, floor, ratio, rq)
