"""Total progeny of the drainage tree: empirical pmf against the asymptote,
the random-walk hitting-time sampler, and the interval-row construction.

    python3 scripts/tree_sizes.py --count 1000000
"""
import argparse

import numpy as np
from scipy.stats import ks_2samp

from treerunoff.analytics import nt_pmf_asymptote, nt_pmf_exact
from treerunoff.core import RngStream
from treerunoff.montecarlo import hitting_times, tree_sizes
from treerunoff.trees import SampleCaps, sample_diamond_tree


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--count", type=int, default=10**6)
    ap.add_argument("--cap", type=int, default=10**4)
    ap.add_argument("--diamond", type=int, default=20_000, help="trees from the interval-row construction")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--threads", type=int, default=0)
    args = ap.parse_args()
    b = args.beta

    sizes = tree_sizes(b, args.count, args.seed, args.cap, args.threads)
    print("n      empirical      exact          asymptote")
    for n in (1, 2, 3, 5, 10, 30, 100, 300, 1000):
        print(f"{n:<6} {np.mean(sizes == n):.4e}     {nt_pmf_exact(n, b):.4e}     {nt_pmf_asymptote(n, b):.4e}")
    n = np.arange(100, 1001)
    emp = np.mean((sizes >= 100) & (sizes <= 1000))
    print(f"pooled 100..1000: empirical {emp:.5f}, asymptote {nt_pmf_asymptote(n, b).sum():.5f}")

    walk = hitting_times(b, min(args.count, 10**5), args.seed + 1, args.cap, args.threads)
    print(f"KS tree sizes vs hitting times: p = {ks_2samp(sizes[: walk.size], walk).pvalue:.3f}")

    caps = SampleCaps(args.cap, args.cap)
    diamond = np.array([
        min(sample_diamond_tree(b, RngStream(args.seed + 2, r), caps).n_nodes, args.cap + 1)
        for r in range(args.diamond)
    ])
    diamond[diamond >= args.cap] = args.cap + 1
    # Row widths of the interval-row tree move by one step per row, so its size
    # is the area of a +-1 walk excursion and need not match the BGW law.
    print(f"KS tree sizes vs interval-row trees: p = {ks_2samp(sizes[: diamond.size], diamond).pvalue:.3f}")
    for n in (10, 100, 1000):
        print(f"  P(N >= {n}): BGW {np.mean(sizes >= n):.4f}  interval-row {np.mean(diamond >= n):.4f}")


if __name__ == "__main__":
    main()
