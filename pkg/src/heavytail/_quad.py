"""Adaptive quadrature on compactified variables.

Heavy tails are handled by the map ``r = scale * tan(theta)``, which sends
``(0, inf)`` onto ``(0, pi/2)``.  For the Cauchy family this is the same
compactification as ``u = r**2 / (1 + r**2)`` (``u = sin(theta)**2``) and it
turns ``(1 + r**2)**(-beta) dr`` into a bounded power of ``cos(theta)``.
All routines call QUADPACK's QAGS (scipy ``quad``) on each sub-interval.
"""

import math

import numpy as np
from scipy import integrate, special

HALF_PI = 0.5 * math.pi


def sphere_area(n):
    """Surface area ``n * omega_n`` of the unit sphere in R^n (2 for n = 1)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def ball_volume(n):
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


class QuadResult:
    __slots__ = ("value", "error", "neval", "warning")

    def __init__(self, value=0.0, error=0.0, neval=0, warning=None):
        self.value = value
        self.error = error
        self.neval = neval
        self.warning = warning

    def __iadd__(self, other):
        self.value += other.value
        self.error += other.error
        self.neval += other.neval
        self.warning = self.warning or other.warning
        return self

    def __repr__(self):
        return f"QuadResult(value={self.value!r}, error={self.error!r})"


def qags(f, a, b, rtol=1e-10, atol=1e-14, limit=400):
    """One call of scipy ``quad``; a QUADPACK diagnostic is kept in ``warning``."""
    if a == b:
        return QuadResult()
    out = integrate.quad(f, a, b, epsabs=atol, epsrel=rtol, limit=limit, full_output=1)
    value, error, info = out[:3]
    msg = str(out[3]).splitlines()[0] if len(out) > 3 else None
    return QuadResult(float(value), float(error), int(info["neval"]), msg)


def _theta_pieces(lo, hi, breaks):
    cuts = sorted({lo, hi, *(t for t in breaks if lo < t < hi)})
    return list(zip(cuts[:-1], cuts[1:]))


def radial(fn, log_density, n, scale=1.0, r_lo=0.0, r_hi=math.inf,
           rtol=1e-10, atol=1e-14, breaks=()):
    """``int_{r_lo}^{r_hi} fn(r) * S_n r^(n-1) p(r) dr`` for a radial density.

    ``log_density(r)`` is the log of the density evaluated at any point of
    norm ``r``.  ``fn`` may be ``None`` for the constant 1.  ``breaks`` are
    radii where the integrand is known to bend sharply.
    """
    log_area = math.log(sphere_area(n))
    log_scale = math.log(scale)

    def integrand(theta):
        r = scale * math.tan(theta)
        c = math.cos(theta)
        if r <= 0.0 and n > 1:
            return 0.0
        lw = log_area + log_scale - 2.0 * math.log(c) + log_density(r)
        if n > 1:
            lw += (n - 1) * math.log(r)
        w = math.exp(lw) if lw > -745.0 else 0.0
        if w == 0.0:
            return 0.0
        return w if fn is None else w * fn(r)

    t_lo = math.atan(r_lo / scale)
    t_hi = HALF_PI if math.isinf(r_hi) else math.atan(r_hi / scale)
    out = QuadResult()
    tb = [math.atan(b / scale) for b in breaks]
    for a, b in _theta_pieces(t_lo, t_hi, tb):
        out += qags(integrand, a, b, rtol, atol)
    return out


def line(fn, log_density, lo=-math.inf, hi=math.inf, scale=1.0,
         rtol=1e-10, atol=1e-14, breaks=(0.0,)):
    """``int_lo^hi fn(x) p(x) dx`` on the real line, tails compactified.

    The interval is split at every point of ``breaks`` that lies inside it;
    infinite ends use ``x = c +- scale * tan(theta)``.
    """
    if fn is None:
        fn = _one
    cuts = sorted({lo, hi, *(b for b in breaks if lo < b < hi)})
    out = QuadResult()
    for a, b in zip(cuts[:-1], cuts[1:]):
        out += _segment(fn, log_density, a, b, scale, rtol, atol)
    return out


def _one(_x):
    return 1.0


def _weighted(fn, log_density, x, jac_log):
    lw = log_density(x) + jac_log
    if lw < -745.0:
        return 0.0
    return math.exp(lw) * fn(x)


def _segment(fn, log_density, a, b, scale, rtol, atol):
    if math.isinf(a) and math.isinf(b):
        raise ValueError("split the real line before calling _segment")
    if math.isinf(b):
        def g(t):
            c = math.cos(t)
            return _weighted(fn, log_density, a + scale * math.tan(t),
                             math.log(scale) - 2.0 * math.log(c))
        return qags(g, 0.0, HALF_PI, rtol, atol)
    if math.isinf(a):
        def g(t):
            c = math.cos(t)
            return _weighted(fn, log_density, b - scale * math.tan(t),
                             math.log(scale) - 2.0 * math.log(c))
        return qags(g, 0.0, HALF_PI, rtol, atol)

    def g(x):
        return _weighted(fn, log_density, x, 0.0)
    return qags(g, a, b, rtol, atol)


def gauss_legendre_cells(edges, order=10):
    """Nodes and weights of a composite Gauss-Legendre rule on ``edges``.

    Returns arrays of shape ``(cells, order)``.
    """
    x, w = special.roots_legendre(order)
    edges = np.asarray(edges, dtype=float)
    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    return mid + half * x[None, :], half * w[None, :]
