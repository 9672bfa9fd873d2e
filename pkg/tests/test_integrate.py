import math

import numpy as np
import pytest
from scipy import integrate as sint, optimize

from heavytail.errors import ParameterError
from heavytail.fields import constant_field, exp_linear_field, gallery_field, linear_field
from heavytail.integrate import (
    IntegralEstimate, IntegrationConfig, best_shift_weighted_norm, entropy, expect, exact,
    expect_many, variance, weighted_dirichlet,
)
from heavytail.measures import CauchyParams, cauchy_measure, cauchy_normalizer, gaussian_measure, moment_Im

QUAD = IntegrationConfig(method="quad", rtol=1e-10)
MC = IntegrationConfig(method="mc", samples=400000, seed=3)


def _sq(x):
    return np.einsum("ij,ij->i", x, x)


def _onepx2(x):
    return 1 + _sq(x)


class TestConfig:
    def test_aliases(self):
        assert IntegrationConfig(method="quadrature").method == "quad"
        assert IntegrationConfig(method="monte_carlo").method == "mc"

    @pytest.mark.parametrize("kw", [{"method": "simpson"}, {"samples": 0}, {"rtol": 0.0}])
    def test_invalid(self, kw):
        with pytest.raises(ParameterError):
            IntegrationConfig(**kw)


class TestEstimate:
    def test_scaled_and_plus(self):
        a = IntegralEstimate(2.0, "monte_carlo", 0.1, 100, 7)
        b = exact(1.0)
        assert a.scaled(-3).value == -6.0 and a.scaled(-3).abs_error == pytest.approx(0.3)
        s = a.plus(b)
        assert s.value == 3.0 and s.method == "monte_carlo" and s.seed == 7
        assert a.plus(IntegralEstimate(1.0, "quadrature", 1e-9)).method == "mixed"
        assert a.scaled(0).value == 0.0


class TestExpect:
    def test_constant_exact(self):
        est = expect(constant_field(2.5), cauchy_measure(CauchyParams(2, 3)))
        assert est.value == 2.5 and est.method == "exact"

    @pytest.mark.parametrize("n,beta", [(1, 1.0), (2, 3.0), (3, 2.0)])
    def test_first_moment(self, n, beta):
        p = CauchyParams(n, beta)
        est = expect(lambda x: 1 / _onepx2(x), cauchy_measure(p), QUAD, radial=True)
        assert est.method == "quadrature"
        assert est.value == pytest.approx(moment_Im(p, 1), rel=1e-9)

    def test_quad_vs_mc(self):
        mu = cauchy_measure(CauchyParams(2, 3))
        f = lambda x: _onepx2(x) ** -2
        q = expect(f, mu, QUAD, radial=True)
        m = expect(f, mu, MC, radial=True)
        assert m.method == "monte_carlo" and m.samples == MC.samples and m.seed == MC.seed
        assert abs(q.value - m.value) <= 3 * m.abs_error

    def test_mc_reproducible_across_workers(self):
        mu = cauchy_measure(CauchyParams(2, 3))
        f = lambda x: np.tanh(x[:, 0]) ** 2
        a = expect(f, mu, IntegrationConfig(method="mc", samples=300000, seed=1, workers=1))
        b = expect(f, mu, IntegrationConfig(method="mc", samples=300000, seed=1, workers=4))
        assert a.value == b.value and a.abs_error == b.abs_error

    def test_nonradial_falls_back_to_mc(self):
        est = expect(gallery_field("tanh", 2), cauchy_measure(CauchyParams(2, 3)), QUAD)
        assert est.method == "monte_carlo"

    def test_divergent_flagged(self):
        # |x| has no first moment under the standard Cauchy law
        est = expect(gallery_field("smoothnorm", 1), cauchy_measure(CauchyParams(1, 1)))
        assert est.value == math.inf and "divergent" in est.diagnostics

    def test_expect_many(self):
        mu = cauchy_measure(CauchyParams(1, 2))
        vals, errs, method = expect_many(lambda x: np.stack([1 / _onepx2(x), _onepx2(x) ** -2], 1),
                                         2, mu, QUAD, radial=True)
        assert method == "quadrature"
        assert np.allclose(vals, [moment_Im(CauchyParams(1, 2), 1), 0.625], rtol=1e-9)


class TestVariance:
    def test_constant(self):
        assert variance(constant_field(3.0), gaussian_measure(2)).value == 0.0

    def test_inv1px2(self):
        est = variance(gallery_field("inv1px2", 1), cauchy_measure(CauchyParams(1, 2)), QUAD)
        assert est.value == pytest.approx(0.0625, rel=1e-9)

    def test_gaussian_linear(self):
        assert variance(linear_field([2.0]), gaussian_measure(1), QUAD).value == pytest.approx(4.0)

    def test_infinite_variance(self):
        est = variance(gallery_field("x1", 1), cauchy_measure(CauchyParams(1, 1.4)))
        assert est.value == math.inf


class TestEntropy:
    def test_constant(self):
        assert entropy(constant_field(2.0), gaussian_measure(1)).value == 0.0

    @pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
    def test_gaussian_closed_form(self, s):
        g = exp_linear_field(s)
        est = entropy(g.squared(), gaussian_measure(1), QUAD)
        assert est.value == pytest.approx(s * s / 2 * math.exp(s * s / 2), rel=1e-8)

    def test_homogeneity(self):
        mu = cauchy_measure(CauchyParams(1, 2))
        g2 = gallery_field("gauss", 1)
        a = entropy(g2, mu, QUAD).value
        b = entropy(g2.affine(3.0), mu, QUAD).value
        assert b == pytest.approx(3 * a, rel=1e-8)

    def test_negative_rejected(self):
        with pytest.raises(ParameterError):
            entropy(gallery_field("x1", 1).affine(1.0, 0.5), gaussian_measure(1), QUAD, degree=2.0)
        with pytest.raises(ParameterError):
            entropy(gallery_field("x1", 1).affine(1.0, -0.5), gaussian_measure(1), QUAD, degree=2.0)


class TestDirichlet:
    def test_constant(self):
        assert weighted_dirichlet(constant_field(1.0), _onepx2, gaussian_measure(1)).value == 0.0

    def test_inv1px2(self):
        est = weighted_dirichlet(gallery_field("inv1px2", 1), _onepx2,
                                 cauchy_measure(CauchyParams(1, 2)), QUAD, weight_deg=2.0)
        assert est.value == pytest.approx(0.3125, rel=1e-9)

    def test_unit_gradient_exact(self):
        est = weighted_dirichlet(gallery_field("linear", 3), None, cauchy_measure(CauchyParams(3, 4)))
        assert est.value == 1.0 and est.method == "exact"

    def test_weight_homogeneity(self):
        mu = cauchy_measure(CauchyParams(1, 3))
        g = gallery_field("tanh", 1)
        a = weighted_dirichlet(g, _onepx2, mu, QUAD, weight_deg=2.0).value
        b = weighted_dirichlet(g, lambda x: 2 * _onepx2(x), mu, QUAD, weight_deg=2.0).value
        assert b == pytest.approx(2 * a, rel=1e-10)


class TestBestShift:
    def test_constant(self):
        c, est = best_shift_weighted_norm(constant_field(0.7), lambda x: 1 / _onepx2(x),
                                          cauchy_measure(CauchyParams(1, 2)))
        assert c == 0.7 and est.value == 0.0

    def test_odd_field_centred(self):
        c, _ = best_shift_weighted_norm(gallery_field("tanh", 1), lambda x: 1 / _onepx2(x),
                                        cauchy_measure(CauchyParams(1, 3)), QUAD)
        assert abs(c) < 1e-10

    def test_grid_minimization_oracle(self):
        p = CauchyParams(1, 2)
        z = cauchy_normalizer(p)
        c, est = best_shift_weighted_norm(gallery_field("x1", 1).affine(1.0, 0.4),
                                          lambda x: 1 / _onepx2(x), cauchy_measure(p), QUAD)

        def obj(cc):
            f = lambda x: (x + 0.4 - cc) ** 2 / (1 + x * x) ** (p.beta + 1) / z
            return sint.quad(f, -np.inf, np.inf, epsabs=0, epsrel=1e-12)[0]

        res = optimize.minimize_scalar(obj, bracket=(-1, 1), tol=1e-12)
        assert c == pytest.approx(res.x, abs=1e-6)
        assert est.value == pytest.approx(res.fun, abs=1e-8)
