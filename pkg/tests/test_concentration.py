import math

import numpy as np
import pytest

from heavytail.concentration import (
    constant_chain, cor44_floor, default_t_grid, empirical_tail, exp_moment_alpha,
    lsi_weight_norm, moment_bound_thm41, tail_envelope, tail_rate_fit, weight_moment_product,
    weight_norm_wp,
)
from heavytail.errors import ParameterError
from heavytail.fields import constant_field, gallery_field
from heavytail.integrate import IntegrationConfig, expect
from heavytail.measures import CauchyParams, cauchy_measure, gaussian_measure, rescaled_density

QUAD = IntegrationConfig(method="quad", rtol=1e-10)


def _sq(x):
    return np.einsum("ij,ij->i", x, x)


class TestWeightNorms:
    def test_example(self):
        assert weight_norm_wp(CauchyParams(2, 4), 1) == pytest.approx(1.5)

    @pytest.mark.parametrize("n,beta,q", [(1, 4.0, 2), (2, 6.0, 3), (3, 5.0, 1)])
    def test_quadrature_oracle(self, n, beta, q):
        p = CauchyParams(n, beta)
        est = expect(lambda x: (1 + _sq(x) / p.d) ** q, rescaled_density(p), QUAD, radial=True)
        assert weight_moment_product(p, q) == pytest.approx(est.value, rel=1e-8)

    def test_product_bound(self):
        for n in (1, 2, 3):
            for beta in (n + 1.0, 2.0 * n + 1, 5.0 * n):
                p = CauchyParams(n, beta)
                for q in range(1, math.ceil(p.alpha)):
                    assert weight_moment_product(p, q) <= ((beta - q) / (p.alpha - q)) ** q * (1 + 1e-12)

    def test_scale15_below_seven(self):
        for n in (1, 2, 4):
            for beta in (n + 1.0, 2.0 * n, 6.0 * n):
                for q in range(1, cor44_floor(n, beta) + 1):
                    assert weight_norm_wp((n, beta), q, scale15=True) <= math.sqrt(45) < 7

    def test_divergent_order(self):
        with pytest.raises(ParameterError):
            weight_moment_product(CauchyParams(2, 3), 2)

    def test_lsi_norm(self):
        p = CauchyParams(1, 4)
        expected = math.sqrt(p.alpha / 3) * weight_moment_product(p, 2) ** 0.5
        assert lsi_weight_norm(p, 2) == pytest.approx(expected)

    def test_constant_chain(self):
        assert all(constant_chain(2, [3.0, 4.0, 10.0, 100.0]))
        with pytest.raises(ParameterError):
            constant_chain(2, [2.5])


class TestMomentBound:
    def test_zero_field(self):
        rep = moment_bound_thm41(constant_field(0.0), rescaled_density(CauchyParams(1, 4)), 2.0, 2)
        assert rep.lhs.value == 0.0 and rep.verdict == "holds"

    def test_x1_p2(self):
        p = CauchyParams(1, 4)
        mu = rescaled_density(p)
        w2 = weight_norm_wp(p, 1, scale15=True)
        rep = moment_bound_thm41(gallery_field("x1", 1), mu, w2, 2, cfg=QUAD)
        var = expect(lambda x: _sq(x), mu, QUAD, radial=True).value
        assert rep.lhs.value == pytest.approx(math.sqrt(var), rel=1e-8)
        assert rep.rhs.value == pytest.approx(math.sqrt(2) * w2)
        assert rep.verdict == "holds"

    def test_p_sweep(self):
        n, beta = 2, 6.0
        p = CauchyParams(n, beta)
        mu = rescaled_density(p)
        for q in range(1, cor44_floor(n, beta) + 1):
            wp = weight_norm_wp(p, q, scale15=True)
            for name in ("linear", "smoothnorm", "tanh"):
                rep = moment_bound_thm41(gallery_field(name, n), mu, wp, 2 * q,
                                         cfg=IntegrationConfig(samples=200000, seed=2))
                assert rep.verdict == "holds"

    def test_lsi_kind(self):
        p = CauchyParams(1, 5)
        rep = moment_bound_thm41(gallery_field("tanh", 1), rescaled_density(p), lsi_weight_norm(p, 3),
                                 3, kind="lsi", cfg=QUAD)
        assert rep.constant_used == pytest.approx(math.sqrt(2)) and rep.verdict == "holds"

    def test_invalid(self):
        mu = rescaled_density(CauchyParams(1, 4))
        with pytest.raises(ParameterError):
            moment_bound_thm41(gallery_field("x1", 1), mu, 1.0, 1.5)
        with pytest.raises(ParameterError):
            moment_bound_thm41(gallery_field("x1", 1).affine(2.0), mu, 1.0, 2)


class TestEnvelopes:
    def test_generic_breakpoint(self):
        env = tail_envelope("generic_poincare", C=1, p=4)
        assert env(env.t1) == pytest.approx(2 * math.exp(-4), rel=1e-15)
        assert env(2 * math.e) == pytest.approx(2 * math.exp(-2), rel=1e-15)

    def test_lsi_breakpoint(self):
        env = tail_envelope("generic_lsi", C=1.3, p=3)
        t0 = env.t0
        left = 2 * math.exp(-t0 ** 2 / (2 * 1.3 ** 2 * math.e))
        assert env(t0) == pytest.approx(left, rel=1e-12)

    def test_cauchy_example(self):
        env = tail_envelope("cauchy_three_regime", n=4, beta=5)
        assert env.p == 4 and env.t1 == pytest.approx(14 * math.e)

    @pytest.mark.parametrize("kind,kw", [
        ("generic_poincare", {"C": 0.7, "p": 3}), ("generic_lsi", {"C": 2.0, "p": 5}),
        ("cauchy_three_regime", {"n": 2, "beta": 6}),
    ])
    def test_range_and_monotone(self, kind, kw):
        env = tail_envelope(kind, **kw)
        t = np.linspace(1e-3, 3 * max(env.breakpoints()), 2000)
        b = env(t)
        assert np.all((b > 0) & (b <= 2))
        br = env.branch(t)
        for k in np.unique(br):
            seg = b[br == k]
            assert np.all(np.diff(seg) <= 1e-15)

    def test_invalid(self):
        with pytest.raises(ParameterError):
            tail_envelope("cauchy_three_regime", n=2, beta=2.5)
        with pytest.raises(ParameterError):
            tail_envelope("generic_poincare", C=1, p=0.5)
        with pytest.raises(ParameterError):
            tail_envelope("subgaussian", C=1, p=2)

    def test_grid_contains_breakpoints(self):
        env = tail_envelope("cauchy_three_regime", n=2, beta=4)
        grid = default_t_grid(env)
        assert env.t0 in grid and env.t1 in grid and len(grid) == 20


class TestEmpiricalTail:
    def test_t_zero(self):
        env = tail_envelope("cauchy_three_regime", n=2, beta=4)
        rep = empirical_tail(gallery_field("linear", 2), rescaled_density(CauchyParams(2, 4)), env,
                             t_grid=[0.0, 1.0], samples=20000, seed=1)
        assert rep.rows[0].empirical <= 1 < 2 == rep.rows[0].bound

    def test_reproducible(self):
        env = tail_envelope("cauchy_three_regime", n=2, beta=4)
        mu = rescaled_density(CauchyParams(2, 4))
        a = empirical_tail(gallery_field("smoothnorm", 2), mu, env, samples=50000, seed=3, workers=1)
        b = empirical_tail(gallery_field("smoothnorm", 2), mu, env, samples=50000, seed=3, workers=3)
        assert a.rows == b.rows and a.verdict == "holds"

    def test_non_lipschitz_rejected(self):
        env = tail_envelope("cauchy_three_regime", n=1, beta=3)
        with pytest.raises(ParameterError):
            empirical_tail(gallery_field("x1", 1).affine(3.0), rescaled_density(CauchyParams(1, 3)), env)

    def test_rate_fit_gaussian(self):
        # report-only diagnostic: Gaussian |x| tails decay faster than any exponential
        slope = tail_rate_fit(gallery_field("x1", 1), gaussian_measure(1), samples=200000, seed=1)
        assert slope > 1.0


class TestExpMoment:
    def test_unit_weight(self):
        res = exp_moment_alpha(lambda x: np.ones(len(x)), cauchy_measure(CauchyParams(1, 2)), 0)
        assert res.alpha == pytest.approx(1 / math.log(2), rel=1e-8) and not res.divergent

    def test_cauchy_divergent(self):
        res = exp_moment_alpha(lambda x: (1 + _sq(x)) ** 2, cauchy_measure(CauchyParams(1, 2)), 4)
        assert res.divergent and res.alpha == math.inf

    def test_gaussian_quadrature(self):
        res = exp_moment_alpha(lambda x: 1 + _sq(x), gaussian_measure(1), 2)
        a = res.alpha
        # int exp((1 + x^2)/a) dgamma = e^(1/a) / sqrt(1 - 2/a)
        assert math.exp(1 / a) / math.sqrt(1 - 2 / a) == pytest.approx(2.0, rel=1e-8)

    def test_gaussian_mc_route(self):
        exact = exp_moment_alpha(lambda x: 1 + _sq(x), gaussian_measure(1), 2).alpha
        mc = exp_moment_alpha(lambda x: 1 + _sq(x), gaussian_measure(1), 2,
                              cfg=IntegrationConfig(method="mc", samples=400000, seed=4), rtol=1e-6)
        assert mc.alpha == pytest.approx(exact, rel=2e-2)
