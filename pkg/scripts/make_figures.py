"""Write the data behind every standard figure into one directory: lattice
snapshots (PGM, plus PNG when Pillow is installed), the critical curve,
mean-runoff curves and the three-point phase diagram.

    python3 scripts/make_figures.py --outdir figures
"""
import argparse
from pathlib import Path

from treerunoff.figures import figure_recipes


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir", default="figures")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--phase-step", type=float, default=0.005)
    args = ap.parse_args()
    paths = figure_recipes(args.outdir, seed=args.seed, phase_step=args.phase_step)
    try:
        from PIL import Image
    except ImportError:
        Image = None
    for path in paths:
        print(path)
        if Image is not None and Path(path).suffix == ".pgm":
            png = Path(path).with_suffix(".png")
            Image.open(path).save(png)
            print(png)


if __name__ == "__main__":
    main()
