"""Cheeger-type bounds for half-lines under the one-dimensional Cauchy law."""

from heavytail.isoperimetry import (
    ParametricSet, check_cheeger_eq55, check_perimeter_bound_eq56, half_line_grid,
)
from heavytail.measures import CauchyParams, cauchy_measure


def main(beta=3.0):
    mu = cauchy_measure(CauchyParams(1, beta))
    print(f"{'a':>9} {'mu(A)':>10} {'eq56 ratio':>11} {'eq55 ratio':>11}")
    for a in half_line_grid(mu, 12, cheeger=True):
        A = ParametricSet.half_space([1.0], a)
        r56 = check_perimeter_bound_eq56(A, mu)
        r55 = check_cheeger_eq55(A, mu)
        print(f"{a:9.3f} {r55.lhs.value:10.4e} {r56.ratio:11.4f} {r55.ratio:11.4f}")


if __name__ == "__main__":
    main()
