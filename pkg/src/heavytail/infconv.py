"""The Bregman cost of a convex potential and infimum convolution.

``F_eps(x) = inf_y [G(y) + d_V(x, y) / eps]`` is computed for ``n <= 2`` by a
coarse grid around ``x`` followed by a derivative-free local refinement.
The cost is nonnegative and quadratic near the diagonal, so the minimizer
sits at distance ``O(eps |grad G|)`` from ``x``; the search box starts at
``sqrt(eps) (1 + |grad G(x)|)`` and is doubled while the grid minimum lies
on its edge.  The module also builds admissible pairs and checks the
inequality for ``V^-beta`` measures and its log-concave limit.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from .errors import DomainError, NumericError, ParameterError, PreconditionError
from .fields import ScalarField
from .integrate import DEFAULT, IntegralEstimate, exact, expect
from .measures import ConvexMeasureSpec, LogConcaveMeasure, Potential, gaussian_measure, quantile_r
from .reports import make_report

__all__ = ["CostOracle", "cost_dV", "infimum_convolution", "infconv_field", "admissible_f",
           "slope_eq210", "check_thm21", "check_maurey_cor22", "GRID_POINTS", "ADMISSIBILITY_GRID"]

GRID_POINTS = 65
REFINE_TOL = 1e-10
MAX_DOUBLINGS = 40
ADMISSIBILITY_GRID = 41
ADMISSIBILITY_MARGIN = 1e-9
SUPPORT_LEVEL = 0.999


@dataclass(frozen=True)
class CostOracle:
    """``d_V(x, y) = V(y) - V(x) - <V'(x), y - x>`` for a convex potential."""

    potential: Potential

    @property
    def domain(self):
        return self.potential.domain

    def __call__(self, x, y):
        """Cost between broadcastable point arrays of trailing dimension ``n``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        pot = self.potential
        if pot.cost is not None:
            return np.asarray(pot.cost(x, y), dtype=float)
        shape = np.broadcast(x, y).shape
        n = shape[-1]
        xb = np.broadcast_to(x, shape).reshape(-1, n)
        yb = np.broadcast_to(y, shape).reshape(-1, n)
        vx, vy = pot.value(xb), pot.value(yb)
        gx = pot.grad(xb)
        out = vy - vx - np.einsum("ij,ij->i", gx, yb - xb)
        return out.reshape(shape[:-1])

    def pairwise(self, xs, ys):
        """Matrix ``d_V(xs[i], ys[j])``."""
        xs, ys = np.atleast_2d(xs), np.atleast_2d(ys)
        pot = self.potential
        if pot.cost is not None:
            return np.asarray(pot.cost(xs[:, None, :], ys[None, :, :]), dtype=float)
        vx, vy, gx = pot.value(xs), pot.value(ys), pot.grad(xs)
        return vy[None, :] - vx[:, None] - (gx @ ys.T - np.einsum("ij,ij->i", gx, xs)[:, None])


def _in_domain(oracle, x):
    if not np.all(oracle.domain.contains(np.atleast_2d(x))):
        raise DomainError(f"point outside the domain of {oracle.potential.name}")


def cost_dV(oracle, x, y):
    """The cost ``d_V(x, y)`` of two points of the potential's domain."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    _in_domain(oracle, x)
    _in_domain(oracle, y)
    return float(oracle(x, y))


# ---------------------------------------------------------------------------
# the operator


def _axis_range(center, radius, lo, hi):
    """Grid range along one axis, clipped to the open interval ``(lo, hi)``."""
    pad_lo = 1e-12 * (1.0 + abs(lo)) if math.isfinite(lo) else 0.0
    pad_hi = 1e-12 * (1.0 + abs(hi)) if math.isfinite(hi) else 0.0
    a, b = center - radius, center + radius
    clip_lo, clip_hi = a <= lo + pad_lo, b >= hi - pad_hi
    return (lo + pad_lo if clip_lo else a), (hi - pad_hi if clip_hi else b), clip_lo, clip_hi


def _infconv(G, oracle, eps, x, points=GRID_POINTS, xtol=REFINE_TOL):
    """``(F_eps(x), argmin)``."""
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n > 2:
        raise ParameterError("infimum convolution is implemented for n <= 2")
    if not eps > 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    _in_domain(oracle, x)
    dom = oracle.domain
    lo, hi = dom.interval() if dom.kind == "box" else (-math.inf, math.inf)

    def objective(y):
        y = np.atleast_2d(y)
        with np.errstate(invalid="ignore", over="ignore"):
            val = G.value(y) + oracle(x[None, :], y) / eps
        return np.where(dom.contains(y) & ~np.isnan(val), val, np.inf)

    g0 = float(G.value(x[None, :])[0])
    radius = math.sqrt(eps) * (1.0 + float(np.linalg.norm(G.grad(x[None, :])[0])))
    for _ in range(MAX_DOUBLINGS):
        ranges = [_axis_range(x[i], radius, lo, hi) for i in range(n)]
        axes = [np.linspace(a, b, points) for a, b, _, _ in ranges]
        mesh = np.stack([m.ravel() for m in np.meshgrid(*axes, indexing="ij")], axis=1)
        vals = objective(mesh).reshape((points,) * n)
        idx = np.unravel_index(int(np.argmin(vals)), vals.shape)
        on_edge = any((idx[i] == 0 and not ranges[i][2]) or (idx[i] == points - 1 and not ranges[i][3])
                      for i in range(n))
        if not on_edge:
            break
        radius *= 2.0
    else:
        raise NumericError("objective still decreasing at the edge of the search region; "
                           "G + d_V/eps may be unbounded below, or a larger region is needed",
                           partial=float(vals[idx]), details={"x": x.tolist(), "radius": radius})
    best_y = np.array([axes[i][idx[i]] for i in range(n)])
    best = float(vals[idx])
    if n == 1:
        i = idx[0]
        a, b = axes[0][max(i - 1, 0)], axes[0][min(i + 1, points - 1)]
        res = optimize.minimize_scalar(lambda t: float(objective([[t]])[0]), bounds=(a, b),
                                       method="bounded", options={"xatol": xtol})
        cand, cval = np.array([res.x]), float(res.fun)
    else:
        h = np.array([ax[1] - ax[0] for ax in axes])
        simplex = np.array([best_y, best_y + [h[0], 0.0], best_y + [0.0, h[1]]])
        res = optimize.minimize(lambda y: float(objective(y)[0]), best_y, method="Nelder-Mead",
                                options={"xatol": xtol, "fatol": 1e-14 * (1.0 + abs(best)),
                                         "initial_simplex": simplex, "maxiter": 4000})
        cand, cval = np.asarray(res.x), float(res.fun)
    if cval < best:
        best, best_y = cval, cand
    if g0 <= best:
        return g0, x.copy()
    return best, best_y


def infimum_convolution(G, oracle, eps, x):
    """``F_eps(x) = inf_y [G(y) + d_V(x, y) / eps]`` (``n <= 2``).

    Never exceeds ``G(x)``.  Raises :class:`NumericError` when the objective
    keeps decreasing at the edge of an expanding search region.
    """
    return _infconv(G, oracle, eps, x)[0]


def infconv_field(G, oracle, eps, divide_by_potential=False, name=None):
    """``F_eps`` (or ``F_eps / V``) as a field, with its envelope-theorem gradient.

    ``grad F_eps(x) = V''(x) (x - y*) / eps`` where ``y*`` is the minimizer.
    """
    pot = oracle.potential

    def solve(x):
        x = np.atleast_2d(x)
        out = np.empty(len(x))
        arg = np.empty_like(x, dtype=float)
        for i, row in enumerate(x):
            out[i], arg[i] = _infconv(G, oracle, eps, row)
        return x, out, arg

    def value(x):
        x, F, _ = solve(x)
        return F / pot.value(x) if divide_by_potential else F

    def grad(x):
        x, F, arg = solve(x)
        if pot.hess is None:
            raise NumericError("the gradient of an inf-convolution needs the potential's Hessian")
        dF = np.einsum("nij,nj->ni", pot.hess(x), x - arg) / eps
        if not divide_by_potential:
            return dF
        v = pot.value(x)
        return dF / v[:, None] - (F / v ** 2)[:, None] * pot.grad(x)

    label = name or (f"infconv({G.name})/V" if divide_by_potential else f"infconv({G.name})")
    radial = G.radial and pot.radial
    return ScalarField(value, grad, name=label, radial=radial)


def _times_potential(g, pot):
    """The field ``G = g V``."""
    def value(x):
        return g.value(x) * pot.value(x)

    def grad(x):
        x = np.atleast_2d(x)
        return g.grad(x) * pot.value(x)[:, None] + g.value(x)[:, None] * pot.grad(x)

    return ScalarField(value, grad, name=f"{g.name}*V", radial=g.radial and pot.radial)


def admissible_f(g, potential, name=None):
    """``f = F_1[g V] / V``, the largest ``f`` with ``f(x)V(x) <= g(y)V(y) + d_V(x, y)``."""
    if g.constant == 0.0:
        return g
    return infconv_field(_times_potential(g, potential), CostOracle(potential), 1.0,
                         divide_by_potential=True, name=name or f"adm({g.name})")


def slope_eq210(G, oracle, x, eps):
    """Finite-difference slope ``(F_eps(x) - G(x)) / eps`` against its limit.

    Returns ``(numeric, limit, extrapolated)`` where ``limit`` is
    ``-<V''^-1 grad G, grad G>(x) / 2`` and ``extrapolated`` is the Richardson
    combination of the slopes at ``eps`` and ``eps/2``.
    """
    x = np.asarray(x, dtype=float).ravel()
    pot = oracle.potential
    if pot.hess is None:
        raise ParameterError("the expansion needs the potential's Hessian")
    gx = float(G.value(x[None, :])[0])
    grad = G.grad(x[None, :])[0]
    limit = -0.5 * float(grad @ np.linalg.solve(pot.hess(x[None, :])[0], grad))
    s1 = (infimum_convolution(G, oracle, eps, x) - gx) / eps
    s2 = (infimum_convolution(G, oracle, eps / 2.0, x) - gx) / (eps / 2.0)
    return s1, limit, 2.0 * s2 - s1


# ---------------------------------------------------------------------------
# checkers


def _support_grid(measure, points):
    """Product grid over the effective support, one plane per coordinate pair."""
    n = measure.n
    if measure.radial:
        radius = quantile_r(measure, SUPPORT_LEVEL)
    else:
        radius = quantile_r(measure, SUPPORT_LEVEL, method="mc")
    lo, hi = measure.domain.interval() if measure.domain.kind == "box" else (-math.inf, math.inf)
    pad = 1e-9 * (1.0 + radius)
    lo = -radius if lo <= -radius else lo + pad
    hi = radius if hi >= radius else hi - pad
    axis = np.linspace(lo, hi, points)
    if n == 1:
        return axis[:, None]
    planes = []
    for i in range(n):
        for j in range(i + 1, n):
            a, b = np.meshgrid(axis, axis, indexing="ij")
            pts = np.zeros((a.size, n))
            pts[:, i], pts[:, j] = a.ravel(), b.ravel()
            planes.append(pts)
    return np.unique(np.concatenate(planes), axis=0)


def _admissibility(f, g, potential, pts, margin, chunk=2048):
    """Worst violation of ``f(x)V(x) <= g(y)V(y) + d_V(x, y)`` over grid pairs."""
    oracle = CostOracle(potential)
    fv = f.value(pts) * potential.value(pts)
    gv = g.value(pts) * potential.value(pts)
    worst, where = -math.inf, None
    for start in range(0, len(pts), chunk):
        xs = pts[start:start + chunk]
        gap = fv[start:start + chunk, None] - gv[None, :] - oracle.pairwise(xs, pts)
        scale = 1.0 + np.abs(fv[start:start + chunk, None]) + np.abs(gv[None, :])
        rel = gap / scale
        k = int(np.argmax(rel))
        if rel.flat[k] > worst:
            i, j = np.unravel_index(k, rel.shape)
            worst, where = float(rel.flat[k]), (xs[i].tolist(), pts[j].tolist())
    if worst > margin:
        raise PreconditionError("admissibility f(x)V(x) <= g(y)V(y) + d_V(x, y) fails on the grid",
                                details={"worst_relative_gap": worst, "x": where[0], "y": where[1]})
    return worst


def check_thm21(measure, f, g, cfg=None, grid=ADMISSIBILITY_GRID, margin=ADMISSIBILITY_MARGIN):
    """``1 + (beta/(beta-n)) int f <= (int (1+g)^-beta)^(-1/(beta-n))`` for ``mu = V^-beta``.

    ``f = None`` builds the admissible ``f`` from ``g`` by inf-convolution.
    Admissibility and ``g >= -1`` are verified on a grid over the
    ``0.999``-quantile ball.
    """
    cfg = cfg or DEFAULT
    if not isinstance(measure, ConvexMeasureSpec):
        raise ParameterError("needs a V^-beta measure")
    n, beta = measure.n, measure.beta
    if beta <= n:
        raise ParameterError(f"needs beta > n, got beta={beta}, n={n}")
    pot = measure.potential
    built = f is None
    if built:
        f = admissible_f(g, pot)
    kappa = -1.0 / (beta - n)
    kappa_n = kappa / (1.0 - n * kappa)
    params = {"n": n, "beta": beta, "f": f.name}
    pts = _support_grid(measure, grid)
    gmin = float(np.min(g.value(pts)))
    if gmin < -1.0:
        raise PreconditionError("g must be >= -1", details={"min_on_grid": gmin})
    unbounded = None
    try:
        gap = _admissibility(f, g, pot, pts, margin)
    except NumericError as exc:
        if not built or "decreasing at the edge" not in str(exc):
            raise
        # gV + d_V(x, .) is unbounded below for some x: the largest admissible
        # f is -inf there, so the left side is -inf
        gap, unbounded = None, exc.details.get("x")
    if f.constant is not None and g.constant is not None:
        lhs = exact(1.0 + (kappa / kappa_n) * f.constant)
        rhs = exact((1.0 + g.constant) ** (kappa / kappa_n) if g.constant > -1 else math.inf)
    else:
        if unbounded is not None:
            lhs = exact(-math.inf)
        else:
            mf = expect(f, measure, cfg)
            lhs = mf.scaled(kappa / kappa_n).plus(exact(1.0))

        def power(x):
            with np.errstate(divide="ignore"):
                return (1.0 + g.value(x)) ** (1.0 / kappa_n)

        try:
            mg = expect(power, measure, cfg, radial=g.radial, degree=None)
        except NumericError:
            if unbounded is None:
                raise
            # lhs = -inf already decides; the right side is a power, hence >= 0
            mg = None
        if mg is None:
            rhs = IntegralEstimate(0.0, "quadrature", 0.0,
                                   diagnostics={"rhs": "integral did not converge; lower bound 0"})
        else:
            val = mg.value ** kappa if mg.value > 0 else math.inf
            err = abs(kappa) * val / mg.value * mg.abs_error if mg.value > 0 else 0.0
            rhs = IntegralEstimate(val, mg.method, err, mg.samples, mg.seed, dict(mg.diagnostics))
    extra = {"admissibility_gap": gap} if unbounded is None else {"f_unbounded_below_at": unbounded}
    return make_report("thm21", params, g.name, lhs, rhs, kappa / kappa_n,
                       kappa=kappa, kappa_n=kappa_n, **extra)


def _ridge_profile(g):
    """The one-dimensional profile ``t -> g(t axis)`` of a ridge field with unit axis."""
    axis = np.asarray(g.axis, dtype=float)

    def value(t):
        return g.value(np.atleast_2d(t)[:, :1] * axis[None, :])

    def grad(t):
        return (g.grad(np.atleast_2d(t)[:, :1] * axis[None, :]) @ axis)[:, None]

    return ScalarField(value, grad, name=g.name)


def check_maurey_cor22(measure, g, cfg=None, reduce_ridge=True):
    """``int e^f dmu <= exp(int g dmu)`` with ``f = inf_y [g(y) + d_W(x, y)]``.

    ``measure`` has density ``e^-W``; ``f`` is built by inf-convolution so
    the hypothesis holds by construction.  Under the standard Gaussian a
    ridge ``g`` has a ridge ``f`` (the cost is split orthogonally), so both
    sides reduce exactly to the one-dimensional problem for the profile;
    ``reduce_ridge=False`` keeps the n-dimensional route.
    """
    cfg = cfg or DEFAULT
    if not isinstance(measure, LogConcaveMeasure):
        raise ParameterError("needs a log-concave measure e^-W")
    params = {"n": measure.n, "W": measure.potential.name}
    if (reduce_ridge and measure.n >= 2 and measure.potential.name == "gaussian"
            and g.axis is not None and g.constant is None
            and abs(float(np.linalg.norm(g.axis)) - 1.0) < 1e-12):
        rep = check_maurey_cor22(gaussian_measure(1), _ridge_profile(g), cfg)
        return replace(rep, params=params, diagnostics={**rep.diagnostics, "reduced": "ridge"})
    if g.constant is not None:
        c = math.exp(g.constant)
        return make_report("cor22", params, g.name, exact(c), exact(c), 1.0)
    f = infconv_field(g, CostOracle(measure.potential), 1.0)
    ef = expect(lambda x: np.exp(f.value(x)), measure, cfg, radial=f.radial)
    mg = expect(g, measure, cfg)
    val = math.exp(mg.value) if math.isfinite(mg.value) else math.inf
    rhs = IntegralEstimate(val, mg.method, val * mg.abs_error, mg.samples, mg.seed,
                           dict(mg.diagnostics))
    return make_report("cor22", params, g.name, ef, rhs, 1.0)
