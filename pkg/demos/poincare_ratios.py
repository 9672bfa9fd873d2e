"""How tight is the weighted Poincaré constant?  Measured ratios over beta."""

from heavytail.fields import gallery
from heavytail.inequalities import check_weighted_poincare_thm31, optimality_lower_bound
from heavytail.integrate import IntegrationConfig


def main():
    cfg = IntegrationConfig(method="quad")
    names = ("inv1px2", "log1px2", "gauss", "tanh")
    print("beta  " + " ".join(f"{k:>9}" for k in names) + "  lower bound / constant")
    for beta in (1.5, 2.0, 3.0, 5.0, 10.0, 30.0):
        fields = gallery(1)
        ratios = [check_weighted_poincare_thm31((1, beta), fields[k], cfg).ratio for k in names]
        rep = check_weighted_poincare_thm31((1, beta), fields["inv1px2"], cfg)
        low = optimality_lower_bound((1, beta)).bound
        print(f"{beta:4g}  " + " ".join(f"{r:9.4f}" for r in ratios) + f"  {low / rep.constant_used:9.4f}")


if __name__ == "__main__":
    main()
