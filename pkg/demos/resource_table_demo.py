"""Query-count comparison of the simulation methods in the two
benchmark parameter regimes (weak and strong dissipation)."""

from biqsp import resource_estimator as re_

REGIMES = {
    "weak": (338.0, 15.6, 1e-3),
    "strong": (338.0, 338.0, 1e-3),
}


def main():
    for name, (alphaT, betaT, eps) in REGIMES.items():
        print(f"\nregime '{name}': alphaT={alphaT}, betaT={betaT}, "
              f"eps={eps}")
        print(f"{'method':<12}{'dR':>8}{'dI':>8}{'Q_total':>10}"
              f"{'reference':>12}")
        for row in re_.benchmark_table(alphaT, betaT, eps):
            ref = row["reference_Q"] or "-"
            print(f"{row['method']:<12}{row['dR']:>8}{row['dI']:>8}"
                  f"{row['Q_total']:>10}{ref:>12}")
        lb = re_.lower_bound(alphaT, betaT, eps)
        print(f"query lower bound: {lb:.1f}")
        _P, log10_rep = re_.postselection_cost(betaT, 1.0)
        print(f"postselection repetitions: 10^{log10_rep:.1f}")


if __name__ == "__main__":
    main()
