"""Data behind the standard plots: lattice snapshots, the critical curve
alpha_c(beta), E W against alpha, and the three-point phase diagram."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from . import analytics, general_x
from .core import BinaryParams, RngStream
from .lattice import LatticeParams, render_grayscale, simulate_lattice

LATTICE_DELTAS = (0.0, 0.1, 0.3)
EW_BETAS = (0.05, 0.1, 0.2, 0.3, 0.4, 0.5)


def fmt(x: float) -> str:
    """CSV number format: 10 significant digits."""
    return format(float(x), ".10g")


def write_csv(path: Path, header: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")


def alpha_c_curve(step: float = 0.005):
    betas = np.linspace(0.0, 0.5, int(round(0.5 / step)) + 1)
    return [(b, analytics.alpha_c(b)) for b in betas]


def expected_w_curves(betas=EW_BETAS, points: int = 200):
    """(beta, alpha, E W) on alpha in [0, alpha_c(beta)]; each curve ends at
    the critical point, beyond which E W is infinite."""
    rows = []
    for b in betas:
        ac = analytics.alpha_c(b)
        for a in np.linspace(0.0, ac, points):
            a = min(a, ac)
            rows.append((b, a, analytics.expected_w(BinaryParams(a, b))))
        rows[-1] = (b, ac, analytics.expected_w_critical(b))
    return rows


def lattice_snapshots(outdir: Path, seed: int, m: int = 150, n: int = 300, rho: float = 0.7) -> list[Path]:
    paths = []
    for d in LATTICE_DELTAS:
        f = simulate_lattice(LatticeParams(m, n, rho, d, RngStream(seed)))
        path = outdir / f"lattice_delta{d:g}.pgm"
        path.write_bytes(render_grayscale(f))
        paths.append(path)
    return paths


def figure_recipes(outdir, seed: int = 0, phase_step: float = 0.005) -> list[Path]:
    """Write every figure input into ``outdir``; returns the files written."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = lattice_snapshots(outdir, seed)
    p = outdir / "alpha_c.csv"
    write_csv(p, "beta,alpha_c", alpha_c_curve())
    written.append(p)
    p = outdir / "expected_w.csv"
    write_csv(p, "beta,alpha,expected_w", expected_w_curves())
    written.append(p)
    p = outdir / "phase.csv"
    write_csv(p, "a,b,hprime1,regime", general_x.example1_phase_grid(phase_step).rows())
    written.append(p)
    return written
