"""Tail exponent and constant of W from Monte Carlo, against the asymptotes.

    python3 scripts/tails.py --alpha 0.49 --replicates 1000000 --caps 1000000
"""
import argparse
import time

from treerunoff.analytics import solve
from treerunoff.core import BinaryParams
from treerunoff.montecarlo import estimate, run_replicates, survival_km
from treerunoff.trees import SampleCaps


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--alpha", type=float, nargs="+", default=[0.25, 0.49])
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--replicates", type=int, default=10**6)
    ap.add_argument("--caps", type=int, default=10**6, help="node and height cap")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int, default=0)
    ap.add_argument("--survival-csv", help="write x, KM survival and the asymptote")
    args = ap.parse_args()

    for alpha in args.alpha:
        p = BinaryParams(alpha, args.beta)
        exact = solve(p)
        t = time.perf_counter()
        caps = SampleCaps(args.caps, args.caps)
        table = run_replicates(p, args.replicates, args.seed, caps, threads=args.threads)
        r = estimate(p, args.replicates, caps, args.seed, table=table)
        dt = time.perf_counter() - t
        print(f"alpha={alpha} beta={args.beta} regime={exact.regime.value} ({dt:.0f} s)")
        print(f"  truncated fraction {r.truncated_fraction:.2e}")
        print(f"  p0   {r.p0.value:.5f} +- {r.p0.stderr:.5f}   exact {exact.p0:.7f}")
        if r.tail is None:
            print(f"  tail: {r.tail_note}")
            continue
        tail = exact.tail
        print(f"  fit  exponent {r.tail.exponent:.4f}  constant {r.tail.constant:.4f}  "
              f"(Hill {r.tail.hill_exponent:.4f}, window x >= {r.tail.x_min:g}, {r.tail.n_points} points)")
        if not tail.all_moments_finite:
            print(f"  exact exponent {tail.exponent}  constant {tail.constant:.7f}")
        if args.survival_csv and not tail.all_moments_finite:
            x, s, _ = survival_km(table.w0, table.truncated)
            keep = x > 0
            with open(f"{args.survival_csv.removesuffix('.csv')}_{alpha}.csv", "w") as fh:
                fh.write("x,survival,asymptote\n")
                for xi, si in zip(x[keep], s[keep]):
                    fh.write(f"{xi},{si:.10g},{tail.constant * xi ** -tail.exponent:.10g}\n")


if __name__ == "__main__":
    main()
