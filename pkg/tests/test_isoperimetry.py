import math

import numpy as np
import pytest
from scipy import integrate as sint

from heavytail.errors import ParameterError, PreconditionError
from heavytail.fields import constant_field, gallery, gallery_field
from heavytail.integrate import IntegrationConfig
from heavytail.isoperimetry import (
    ParametricSet, ball_grid, c_kappa, check_c_kappa, check_cheeger_eq55, check_cor52_structure,
    check_perimeter_bound_eq56, check_universal_poincare_thm51, cheeger_D, half_line_grid,
    minkowski_content, set_mass, thm51_constant, weighted_perimeter,
)
from heavytail.measures import (
    CauchyParams, cauchy_measure, cauchy_normalizer, convex_measure, gaussian_measure, quantile_r,
    radial_cdf, smoothed_norm_potential,
)


def _density0(mu, n):
    return float(mu.density(np.zeros((1, n)))[0])


class TestSets:
    def test_constructors(self):
        A = ParametricSet.half_space([3.0, 4.0], 1.0)
        assert A.direction == pytest.approx((0.6, 0.8))
        assert A.contains([[0.0, 0.0]])[0] and not A.contains([[3.0, 3.0]])[0]
        assert ParametricSet.ball(2.0).grown(0.5).param == 2.5
        with pytest.raises(ParameterError):
            ParametricSet.ball(0.0)
        with pytest.raises(ParameterError):
            ParametricSet.half_space([0.0, 0.0], 1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ParameterError):
            set_mass(ParametricSet.half_space([1.0], 0.0), cauchy_measure(CauchyParams(2, 3)))


class TestMass:
    def test_marginal_cross_check(self):
        # the x_1-marginal of nu_beta in R^2 is nu_(beta - 1/2) on the line
        mu2 = cauchy_measure(CauchyParams(2, 3))
        mu1 = cauchy_measure(CauchyParams(1, 2.5))
        for a in (-2.0, -0.3, 0.0, 1.1):
            m2 = set_mass(ParametricSet.half_space([1.0, 0.0], a), mu2)
            m1 = set_mass(ParametricSet.half_space([1.0], a), mu1)
            assert m2 == pytest.approx(m1, abs=1e-12)

    def test_standard_cauchy_half_line(self):
        mu = cauchy_measure(CauchyParams(1, 1))
        assert set_mass(ParametricSet.half_space([1.0], 1.0), mu) == pytest.approx(0.75, rel=1e-10)

    def test_ball_matches_radial_cdf(self):
        mu = cauchy_measure(CauchyParams(2, 3))
        assert set_mass(ParametricSet.ball(1.0), mu) == pytest.approx(0.75, rel=1e-10)

    def test_weighted_mass(self):
        mu = cauchy_measure(CauchyParams(1, 3))
        z = cauchy_normalizer(CauchyParams(1, 3))
        ref = sint.quad(lambda t: (2 + abs(t)) * (1 + t * t) ** -3 / z, -np.inf, 0.5)[0]
        assert set_mass(ParametricSet.half_space([1.0], 0.5), mu, r=2.0) == pytest.approx(ref, rel=1e-9)


class TestPerimeter:
    def test_half_line_at_zero(self):
        mu = cauchy_measure(CauchyParams(1, 2))
        per = weighted_perimeter(ParametricSet.half_space([1.0], 0.0), mu, 1.7)
        assert per == pytest.approx(_density0(mu, 1) * 1.7, rel=1e-14)

    def test_ball_n2(self):
        mu = cauchy_measure(CauchyParams(2, 3))
        p1 = float(mu.density(np.array([[1.0, 0.0]]))[0])
        per = weighted_perimeter(ParametricSet.ball(1.0), mu, 0.5)
        assert per == pytest.approx(2 * math.pi * p1 * 1.5, rel=1e-12)

    def test_weight_scaling(self):
        mu = cauchy_measure(CauchyParams(2, 4))
        A = ParametricSet.half_space([1.0, 1.0], 0.4)
        assert weighted_perimeter(A, mu, 1.0, weight_scale=2.0) == pytest.approx(
            2 * weighted_perimeter(A, mu, 1.0), rel=1e-12)

    @pytest.mark.parametrize("n,beta", [(1, 2.0), (2, 3.0), (3, 5.0)])
    def test_minkowski(self, n, beta):
        mu = cauchy_measure(CauchyParams(n, beta))
        sets = [ParametricSet.ball(0.7), ParametricSet.half_space(np.eye(n)[0], -0.5)]
        for A in sets:
            per = weighted_perimeter(A, mu, 1.0)
            assert minkowski_content(A, mu, 1.0) == pytest.approx(per, rel=1e-3)


class TestCheeger:
    def test_D_and_c_kappa(self):
        assert cheeger_D(-1.0, 0.75) == pytest.approx(2 / math.log(1.5))
        with pytest.raises(ParameterError):
            cheeger_D(-1.0, 0.5)
        assert c_kappa(-1.0, 0.75) == pytest.approx(1 - 1 / 1.5)

    def test_c_kappa_grid(self):
        kappas = -np.geomspace(1e-3, 5, 30)
        prs = np.linspace(0.501, 1.0, 30)
        assert check_c_kappa(kappas, prs).all()

    def test_eq56_ball_equal_to_Br(self):
        mu = cauchy_measure(CauchyParams(2, 4))
        r = quantile_r(mu, 2 / 3)
        rep = check_perimeter_bound_eq56(ParametricSet.ball(r), mu, r)
        assert abs(rep.lhs.value) < 1e-12 and rep.verdict == "holds"

    def test_eq56_half_lines(self):
        mu = cauchy_measure(CauchyParams(1, 3))
        for a in half_line_grid(mu, 20):
            assert check_perimeter_bound_eq56(ParametricSet.half_space([1.0], a), mu).verdict == "holds"

    def test_eq55_critical_half_line(self):
        mu = cauchy_measure(CauchyParams(1, 2))
        rep = check_cheeger_eq55(ParametricSet.half_space([1.0], 0.0), mu)
        assert rep.lhs.value == pytest.approx(0.5, rel=1e-12)
        r = rep.params["r"]
        D = cheeger_D(-1.0, radial_cdf(mu, r))
        assert rep.rhs.value == pytest.approx(D * _density0(mu, 1) * r, rel=1e-10)
        assert rep.verdict == "holds"

    def test_eq55_far_tail(self):
        mu = cauchy_measure(CauchyParams(1, 3))
        ratios = [check_cheeger_eq55(ParametricSet.half_space([1.0], a), mu).ratio
                  for a in (-5.0, -50.0, -500.0)]
        assert all(q <= 1 for q in ratios)

    def test_eq55_precondition(self):
        mu = cauchy_measure(CauchyParams(1, 3))
        with pytest.raises(PreconditionError):
            check_cheeger_eq55(ParametricSet.half_space([1.0], 1.0), mu)
        with pytest.raises(ParameterError):
            check_cheeger_eq55(ParametricSet.half_space([1.0], -1.0), mu, r=0.1)

    def test_grids(self):
        mu = cauchy_measure(CauchyParams(2, 4))
        s = ball_grid(mu, 50, cheeger=True)
        assert len(s) == 50 and radial_cdf(mu, s[-1]) <= 0.5 + 1e-9
        a = half_line_grid(cauchy_measure(CauchyParams(1, 2)), 50, cheeger=True)
        assert a[-1] == 0.0


class TestThm51:
    def test_constant(self):
        assert thm51_constant(3.0, 1) == pytest.approx(8 / math.log(4 / 3) ** 2 * 1.5)
        with pytest.raises(ParameterError):
            thm51_constant(2.0, 2)

    def test_constant_field(self):
        rep = check_universal_poincare_thm51(cauchy_measure(CauchyParams(1, 2)), constant_field(1.0))
        assert rep.lhs.value == 0.0 and rep.verdict == "holds"

    def test_gallery(self):
        mu = cauchy_measure(CauchyParams(1, 2))
        for g in gallery(1).values():
            rep = check_universal_poincare_thm51(mu, g)
            assert rep.verdict == "holds"
            if math.isfinite(rep.rhs.value) and rep.rhs.value > 0:
                assert rep.ratio < 1
        assert rep.params["r"] == pytest.approx(quantile_r(mu, 2 / 3))

    @pytest.mark.parametrize("n", [1, 2])
    def test_smoothed_norm_potential(self, n):
        mu = convex_measure(smoothed_norm_potential(n), n + 2.0, n)
        for name in ("inv1px2", "tanh", "gauss"):
            rep = check_universal_poincare_thm51(mu, gallery_field(name, n),
                                                 IntegrationConfig(samples=200000, seed=1))
            assert rep.verdict == "holds"

    def test_needs_convex_measure(self):
        with pytest.raises(ParameterError):
            check_universal_poincare_thm51(gaussian_measure(1), gallery_field("tanh", 1))


class TestCor52:
    def test_constant(self):
        assert check_cor52_structure(cauchy_measure(CauchyParams(1, 2)), constant_field(2.0)).ratio == 0.0

    def test_table(self):
        mu = cauchy_measure(CauchyParams(1, 2))
        for g in gallery(1).values():
            rep = check_cor52_structure(mu, g)
            d = rep.to_dict()
            assert d["id"] == "cor52" and d["ratio"] >= 0
        z = cauchy_normalizer(CauchyParams(1, 2))
        f = lambda t: 2 * math.log(t) * (1 + t * t) ** -2 / z
        log_m0 = sint.quad(f, 0, 1)[0] + sint.quad(f, 1, np.inf)[0]
        assert rep.m0 == pytest.approx(math.exp(log_m0), rel=1e-8)

    def test_r_over_m0_bounded(self):
        vals = [check_cor52_structure(cauchy_measure(CauchyParams(1, b)), gallery_field("tanh", 1)).r_over_m0
                for b in (1.5, 2.0, 4.0, 8.0, 16.0)]
        assert all(1.0 < v < 10.0 for v in vals)
