"""Convergence of the pmf fixed-point iteration at the critical point, and
the extrapolated mean.

    python3 scripts/critical_mean.py --n-max 10000
"""
import argparse

from treerunoff.analytics import alpha_c, expected_w_critical
from treerunoff.core import BinaryParams
from treerunoff.montecarlo import extrapolated_mean, pmf_iterates


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--beta", type=float, default=0.5)
    ap.add_argument("--n-max", type=int, default=10**4)
    ap.add_argument("--iters", type=int, nargs="+", default=[500, 1000, 2000, 4000, 8000, 16000])
    args = ap.parse_args()
    p = BinaryParams(alpha_c(args.beta), args.beta)
    target = expected_w_critical(args.beta)
    print(f"alpha_c = {p.alpha:.10f}, exact E W = {target:.10f}")
    print("iterations  E min(W_k, N+1)  gap")
    for w in pmf_iterates(p, args.n_max, args.iters):
        print(f"{w.iterations:<11} {w.mean_capped:<16.6f} {target - w.mean_capped:.3e}")
    e = extrapolated_mean(p, args.n_max, max(args.iters))
    print(f"extrapolated: {e.limit:.6f} (ratio per doubling {e.ratio:.3f})")


if __name__ == "__main__":
    main()
