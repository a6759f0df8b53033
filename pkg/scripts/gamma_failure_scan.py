"""How often the codegree condition fails in G(n, p) as n grows.

Used to check whether the good event of the triangle example becomes likely
at sizes that fit on a laptop. It does not: the cap n^eps stays below the
typical maximum codegree until n is far beyond what a dense matrix allows.
"""

import argparse
from scipy import stats

from tbdlab.harness import TriangleConfig, triangle_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", default="100,200,400,800")
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'n':>6} {'p':>9} {'cap':>7} {'2np^2':>8} {'fail':>6} {'ci_low':>7}")
    for n in (int(x) for x in args.grid.split(",")):
        p = n ** (-2 / 3 + args.eps)
        rep = triangle_experiment(TriangleConfig(n=n, p=p, eps=args.eps, trials=args.trials, seed=args.seed))
        f = rep["gamma_failure"]
        print(f"{n:6d} {p:9.5f} {rep['codegree_cap']:7.2f} {2 * n * p * p:8.3f} {f['point']:6.3f} {f['ci_low']:7.3f}")
    # smallest k with C(n,2) * P(Bin(n-2, p^2) > k) < 1, a proxy for the max codegree
    print("\nmax codegree proxy vs cap at larger n:")
    for ni in (1e3, 1e4, 1e5, 1e6, 1e8):
        ni = int(ni)
        p = ni ** (-2 / 3 + args.eps)
        pairs = ni * (ni - 1) / 2
        k = 0
        while pairs * stats.binom.sf(k, ni - 2, p * p) >= 1:
            k += 1
        cap = max(2 * ni * p * p, ni ** args.eps)
        print(f"  n={ni:.0e} cap={cap:.2f} max_codegree~{k}")

if __name__ == "__main__":
    main()
