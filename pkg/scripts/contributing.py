"""Height of the contributing region in tall trees, across the transition.

    python3 scripts/contributing.py --alphas 0.1 0.2 0.25 0.3 0.49
"""
import argparse

from treerunoff.core import BinaryParams
from treerunoff.montecarlo import contrib_table, summarize_contrib
from treerunoff.trees import SampleCaps


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.1, 0.2, 0.25, 0.3, 0.4, 0.49])
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--trees", type=int, default=200_000)
    ap.add_argument("--heights", type=int, nargs="+", default=[50, 100, 200])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int, default=0)
    args = ap.parse_args()
    caps = SampleCaps(10**6, 10**6)
    print("alpha  min_height  trees  mean_contrib_height  mean_fraction  P(fraction>=0.9)")
    for a in args.alphas:
        p = BinaryParams(a, args.beta)
        table = contrib_table(p, args.trees, args.seed, caps, args.threads)
        for h in args.heights:
            s = summarize_contrib(table, p, h)
            print(f"{a:<6} {h:<11} {s.conditioned:<6} {s.mean_contrib_height:<20.3f} {s.mean_fraction:<14.4f} {s.frac_at_least_090:.4f}")


if __name__ == "__main__":
    main()
