"""Moments of the generalized Cauchy law: closed form, quadrature and Monte Carlo."""

import numpy as np

from heavytail.integrate import IntegrationConfig, expect
from heavytail.measures import CauchyParams, cauchy_measure, moment_Im


def main():
    quad = IntegrationConfig(method="quad")
    mc = IntegrationConfig(method="mc", samples=10**6, seed=1)
    print(f"{'n':>2} {'beta':>5} {'m':>2} {'closed':>12} {'quad':>12} {'mc':>12} {'mc se':>9}")
    for n, beta in [(1, 1.0), (2, 3.0), (3, 6.0), (4, 8.0)]:
        p = CauchyParams(n, beta)
        mu = cauchy_measure(p)
        for m in (1, 2, 3):
            f = lambda x, m=m: (1 + np.einsum("ij,ij->i", x, x)) ** (-m)
            q = expect(f, mu, quad, radial=True)
            s = expect(f, mu, mc, radial=True)
            print(f"{n:2d} {beta:5g} {m:2d} {moment_Im(p, m):12.8f} {q.value:12.8f} "
                  f"{s.value:12.8f} {s.abs_error:9.2e}")


if __name__ == "__main__":
    main()
