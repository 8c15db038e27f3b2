"""Hill-slope lattice: an m x n grid where water flows one row downslope per
step, straight down or diverted one column sideways.

Each cell (i, j) has an infiltration capacity J ~ Exp(1) and a fixed flow
direction.  Rain falls at rate rho everywhere, and the equilibrium runoff is

    W[i, j] = max(0, rho - J[i, j] + sum of W[i-1, k] over cells k draining into j).

Row 0 is the top of the slope.  Because flow is strictly downslope, a single
top-to-bottom sweep gives the equilibrium exactly.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import ParameterError, ResourceError, RngStream

LEFT, DOWN, RIGHT = -1, 0, 1


@dataclass(frozen=True)
class LatticeParams:
    m: int
    n: int
    rho: float
    delta: float
    seed: RngStream = RngStream(0)

    def __post_init__(self):
        if int(self.m) < 1:
            raise ParameterError("m", "need at least one row")
        if int(self.n) < 1:
            raise ParameterError("n", "need at least one column")
        if not (self.rho >= 0.0 and np.isfinite(self.rho)):
            raise ParameterError("rho", f"rainfall rate must be finite and >= 0, got {self.rho!r}")
        if not (0.0 <= self.delta <= 0.5):
            raise ParameterError("delta", f"need 0 <= delta <= 1/2, got {self.delta!r}")
        seed = self.seed if isinstance(self.seed, RngStream) else RngStream(int(self.seed))
        object.__setattr__(self, "seed", seed)
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "delta", float(self.delta))


@dataclass(frozen=True, eq=False)
class LatticeField:
    params: LatticeParams
    infiltration: np.ndarray
    direction: np.ndarray
    runoff: np.ndarray

    def inflow(self) -> np.ndarray:
        """Inflow into every cell from the row above (zero for row 0)."""
        m, n = self.runoff.shape
        out = np.zeros_like(self.runoff)
        cols = np.arange(n)
        for i in range(1, m):
            out[i] = np.bincount(cols + self.direction[i - 1], weights=self.runoff[i - 1], minlength=n)
        return out

    def residual(self) -> float:
        """Largest deviation from the equilibrium equation over all cells."""
        expected = np.maximum(0.0, self.params.rho - self.infiltration + self.inflow())
        return float(np.max(np.abs(expected - self.runoff)))


def draw_directions(u: np.ndarray, delta: float) -> np.ndarray:
    """Map uniforms to LEFT (u < delta), RIGHT (u >= 1 - delta) or DOWN,
    then turn diversions that would leave the grid into DOWN."""
    d = np.zeros(u.shape, dtype=np.int8)
    d[u < delta] = LEFT
    d[u >= 1.0 - delta] = RIGHT
    d[:, 0][d[:, 0] == LEFT] = DOWN
    d[:, -1][d[:, -1] == RIGHT] = DOWN
    return d


def simulate_lattice(p: LatticeParams) -> LatticeField:
    """Sample infiltration and directions, then sweep the equilibrium runoff.

    The infiltration matrix is drawn before the direction matrix, so for a
    fixed seed both are the same whatever rho is.
    """
    try:
        gen = p.seed.generator()
        J = -np.log1p(-gen.random((p.m, p.n)))
        d = draw_directions(gen.random((p.m, p.n)), p.delta)
        W = np.empty((p.m, p.n))
    except MemoryError as exc:
        raise ResourceError(f"a {p.m} x {p.n} lattice does not fit in memory") from exc
    cols = np.arange(p.n)
    incoming = np.zeros(p.n)
    for i in range(p.m):
        W[i] = np.maximum(0.0, p.rho - J[i] + incoming)
        incoming = np.bincount(cols + d[i], weights=W[i], minlength=p.n)
    return LatticeField(p, J, d, W)


class BottomRowStats(NamedTuple):
    wet_fraction: float
    mean_runoff: float
    max_runoff: float


def bottom_row_stats(f: LatticeField) -> BottomRowStats:
    row = f.runoff[-1]
    return BottomRowStats(float(np.mean(row > 0)), float(row.mean()), float(row.max()))


def grayscale_pixels(f: LatticeField) -> np.ndarray:
    """uint8 image, 255 (white) for no flow down to 0 at the field maximum."""
    w = f.runoff
    wmax = float(w.max())
    if wmax <= 0.0:
        return np.full(w.shape, 255, dtype=np.uint8)
    return np.rint(255.0 * (1.0 - w / wmax)).astype(np.uint8)


def render_grayscale(f: LatticeField) -> bytes:
    """Binary PGM (P5) of the runoff field."""
    px = grayscale_pixels(f)
    m, n = px.shape
    return f"P5\n{n} {m}\n255\n".encode("ascii") + px.tobytes()


def render_png(f: LatticeField) -> bytes:
    """Same image as PNG; needs Pillow."""
    try:
        from PIL import Image
    except ImportError as exc:
        raise RuntimeError("PNG output needs Pillow (pip install pillow)") from exc
    buf = io.BytesIO()
    Image.fromarray(grayscale_pixels(f), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def read_pgm(data: bytes) -> np.ndarray:
    """Parse a binary PGM written by ``render_grayscale``."""
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    n, m = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(m, n)
