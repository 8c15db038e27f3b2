"""Bottom-row statistics of the hill-slope lattice as diversion and slope
length vary, averaged over seeds.

    python3 scripts/lattice_sweep.py --seeds 20
"""
import argparse

import numpy as np

from treerunoff.core import RngStream
from treerunoff.lattice import LatticeParams, bottom_row_stats, simulate_lattice


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rho", type=float, default=0.7)
    ap.add_argument("--n", type=int, default=300)
    ap.add_argument("--ms", type=int, nargs="+", default=[75, 150, 300, 600])
    ap.add_argument("--deltas", type=float, nargs="+", default=[0.0, 0.1, 0.2, 0.3, 0.5])
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args()
    print("m     delta  wet_fraction  mean_bottom  max_bottom")
    for m in args.ms:
        for d in args.deltas:
            s = [bottom_row_stats(simulate_lattice(LatticeParams(m, args.n, args.rho, d, RngStream(1000 + k))))
                 for k in range(args.seeds)]
            print(f"{m:<5} {d:<6} {np.mean([x.wet_fraction for x in s]):<13.4f} "
                  f"{np.mean([x.mean_runoff for x in s]):<12.3f} {np.mean([x.max_runoff for x in s]):.2f}")


if __name__ == "__main__":
    main()
