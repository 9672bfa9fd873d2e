"""Test functions with analytic gradients, and the fixed gallery.

Each field carries enough growth metadata to decide, for heavy-tailed
measures, whether an integral such as ``int |grad g|^2 (1+|x|^2) dmu`` is
finite before anyone tries to estimate it.  Gallery members are either
radial (a function of ``|x|``) or ridge functions (a function of
``<axis, x>``).
"""

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import ParameterError

__all__ = ["ScalarField", "GALLERY", "gallery", "gallery_field", "constant_field",
           "linear_field", "exp_linear_field", "radial_field", "check_gradient"]

GALLERY = ("inv1px2", "linear", "x1", "log1px2", "gauss", "smoothnorm", "tanh")
SMOOTHING = 1e-3


@dataclass(frozen=True, eq=False)
class ScalarField:
    """A function ``g`` on R^n with its gradient.

    ``value_deg`` / ``grad_deg`` are the growth orders of ``|g|`` and
    ``|grad g|`` along the variable the field depends on (``|x|`` for radial
    fields, ``<axis, x>`` for ridge fields); ``-inf`` means faster than any
    power.  ``None`` means unknown, in which case integrals are assumed
    finite.
    """

    value: Callable
    grad: Callable
    name: str = "custom"
    radial: bool = False
    axis: Optional[tuple] = None
    value_deg: Optional[float] = None
    grad_deg: Optional[float] = None
    lipschitz: Optional[float] = None
    constant: Optional[float] = None
    grad_norm_sq: Optional[float] = None

    def __call__(self, x):
        return self.value(np.atleast_2d(x))

    def affine(self, a=1.0, b=0.0, name=None):
        """The field ``a * g + b``."""
        val, grd = self.value, self.grad
        const = None if self.constant is None else a * self.constant + b
        return replace(
            self,
            value=lambda x: a * val(x) + b,
            grad=lambda x: a * grd(x),
            name=name or (self.name if (a, b) == (1.0, 0.0) else f"{a:g}*{self.name}+{b:g}"),
            lipschitz=None if self.lipschitz is None else abs(a) * self.lipschitz,
            constant=const,
            grad_norm_sq=None if self.grad_norm_sq is None else a * a * self.grad_norm_sq,
            grad_deg=-math.inf if a == 0 else self.grad_deg,
            value_deg=(0.0 if b != 0 and self.value_deg is not None and self.value_deg < 0
                       else self.value_deg),
        )

    def squared(self):
        """The field ``g^2`` (used for entropies of squares)."""
        val, grd = self.value, self.grad

        def value(x):
            return val(x) ** 2

        def grad(x):
            return 2.0 * val(x)[:, None] * grd(x)

        vd, gd = self.value_deg, self.grad_deg
        return replace(
            self, value=value, grad=grad, name=f"{self.name}^2",
            value_deg=None if vd is None else 2.0 * vd,
            grad_deg=None if vd is None or gd is None else vd + gd,
            lipschitz=None, grad_norm_sq=None,
            constant=None if self.constant is None else self.constant ** 2,
        )

    def tail_degree(self, n, value_power=0, grad_power=0, weight_deg=0.0):
        """Effective radial growth order of ``|g|^p |grad g|^q |x|^m``.

        For a ridge field in n >= 2 the profile is integrated over the
        sphere, which caps its decay at ``|x|^-1``.  Returns None when the
        field's growth is unknown.
        """
        prof = 0.0
        for power, deg in ((value_power, self.value_deg), (grad_power, self.grad_deg)):
            if power == 0:
                continue
            if deg is None:
                return None
            prof += power * deg
        if weight_deg is None:
            return None
        if self.radial or n == 1 or self.constant is not None:
            return prof + weight_deg
        return max(prof, -1.0) + weight_deg


def _sq(x):
    return np.einsum("ij,ij->i", x, x)


def constant_field(c, n=None):
    c = float(c)
    return ScalarField(lambda x: np.full(len(np.atleast_2d(x)), c),
                       lambda x: np.zeros(np.atleast_2d(x).shape),
                       name=f"const({c:g})", radial=True, value_deg=0.0, grad_deg=-math.inf,
                       lipschitz=0.0, constant=c, grad_norm_sq=0.0)


def linear_field(coef, name=None):
    """``g(x) = <coef, x>``."""
    coef = np.asarray(coef, dtype=float).ravel()
    norm = float(np.linalg.norm(coef))
    return ScalarField(lambda x: np.atleast_2d(x) @ coef,
                       lambda x: np.broadcast_to(coef, np.atleast_2d(x).shape).copy(),
                       name=name or "linear", axis=tuple(coef / norm) if norm else None,
                       value_deg=1.0, grad_deg=0.0 if norm else -math.inf, lipschitz=norm,
                       constant=0.0 if norm == 0 else None, grad_norm_sq=norm * norm)


def exp_linear_field(s, n=1):
    """``g(x) = exp(s x_1 / 2)``, the equality case of the Gaussian log-Sobolev bound."""
    s = float(s)

    def value(x):
        return np.exp(0.5 * s * np.atleast_2d(x)[:, 0])

    def grad(x):
        x = np.atleast_2d(x)
        out = np.zeros(x.shape)
        out[:, 0] = 0.5 * s * np.exp(0.5 * s * x[:, 0])
        return out

    e1 = tuple(np.eye(n)[0])
    return ScalarField(value, grad, name=f"explin({s:g})", axis=e1)


def radial_field(profile, dprofile, name="radial", **meta):
    """Field ``phi(|x|)`` from a profile and its derivative (``dprofile(0) = 0``)."""

    def value(x):
        return profile(np.sqrt(_sq(np.atleast_2d(x))))

    def grad(x):
        x = np.atleast_2d(x)
        r = np.sqrt(_sq(x))
        with np.errstate(invalid="ignore", divide="ignore"):
            factor = np.where(r > 0, dprofile(r) / r, 0.0)
        return factor[:, None] * x

    return ScalarField(value, grad, name=name, radial=True, **meta)


def _ridge(profile, dprofile, axis, name, **meta):
    axis = np.asarray(axis, dtype=float)

    def value(x):
        return profile(np.atleast_2d(x) @ axis)

    def grad(x):
        x = np.atleast_2d(x)
        return dprofile(x @ axis)[:, None] * axis[None, :]

    return ScalarField(value, grad, name=name, axis=tuple(axis), **meta)


def _sech2(s):
    e = np.exp(-2.0 * np.abs(s))
    return 4.0 * e / (1.0 + e) ** 2


def gallery_field(name, n):
    """One gallery member in dimension ``n``."""
    n = int(n)
    e1 = np.eye(n)[0]
    if name == "inv1px2":
        return ScalarField(lambda x: 1.0 / (1.0 + _sq(np.atleast_2d(x))),
                           lambda x: -2.0 * np.atleast_2d(x) / ((1.0 + _sq(np.atleast_2d(x))) ** 2)[:, None],
                           name=name, radial=True, value_deg=-2.0, grad_deg=-3.0,
                           lipschitz=3.0 * math.sqrt(3.0) / 8.0)
    if name == "linear":
        theta = np.ones(n) / math.sqrt(n)
        return _ridge(lambda s: s, np.ones_like, theta, name,
                      value_deg=1.0, grad_deg=0.0, lipschitz=1.0, grad_norm_sq=1.0)
    if name == "x1":
        return _ridge(lambda s: s, np.ones_like, e1, name,
                      value_deg=1.0, grad_deg=0.0, lipschitz=1.0, grad_norm_sq=1.0)
    if name == "log1px2":
        return ScalarField(lambda x: np.log1p(_sq(np.atleast_2d(x))),
                           lambda x: 2.0 * np.atleast_2d(x) / (1.0 + _sq(np.atleast_2d(x)))[:, None],
                           name=name, radial=True, value_deg=0.0, grad_deg=-1.0, lipschitz=1.0)
    if name == "gauss":
        return ScalarField(lambda x: np.exp(-0.5 * _sq(np.atleast_2d(x))),
                           lambda x: -np.atleast_2d(x) * np.exp(-0.5 * _sq(np.atleast_2d(x)))[:, None],
                           name=name, radial=True, value_deg=-math.inf, grad_deg=-math.inf,
                           lipschitz=math.exp(-0.5))
    if name == "smoothnorm":
        d2 = SMOOTHING ** 2
        return ScalarField(lambda x: np.sqrt(d2 + _sq(np.atleast_2d(x))),
                           lambda x: np.atleast_2d(x) / np.sqrt(d2 + _sq(np.atleast_2d(x)))[:, None],
                           name=name, radial=True, value_deg=1.0, grad_deg=0.0, lipschitz=1.0)
    if name == "tanh":
        return _ridge(np.tanh, _sech2, e1, name,
                      value_deg=0.0, grad_deg=-math.inf, lipschitz=1.0)
    raise ParameterError(f"unknown gallery field {name!r}; choose from {', '.join(GALLERY)}")


def gallery(n):
    """All gallery fields in dimension ``n``, keyed by name."""
    return {name: gallery_field(name, n) for name in GALLERY}


def check_gradient(g, points, rtol=1e-6, atol=1e-9):
    """Central-difference check of ``g.grad`` with step ``1e-5 (1 + |x|)``.

    Returns the worst relative discrepancy; raises AssertionError above tolerance.
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    n = x.shape[1]
    h = 1e-5 * (1.0 + np.sqrt(_sq(x)))
    fd = np.empty_like(x)
    for i in range(n):
        step = np.zeros_like(x)
        step[:, i] = h
        fd[:, i] = (g.value(x + step) - g.value(x - step)) / (2.0 * h)
    an = g.grad(x)
    err = np.sqrt(_sq(fd - an))
    scale = np.sqrt(_sq(an))
    worst = float(np.max(err / np.maximum(scale, atol / rtol)))
    if worst > rtol:
        k = int(np.argmax(err / np.maximum(scale, atol / rtol)))
        raise AssertionError(f"{g.name}: gradient mismatch {worst:.3g} at {x[k].tolist()}")
    return worst
