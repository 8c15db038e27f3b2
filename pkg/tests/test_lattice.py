import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treerunoff.core import ParameterError, ResourceError, RngStream
from treerunoff.lattice import (
    DOWN,
    LEFT,
    RIGHT,
    LatticeField,
    LatticeParams,
    bottom_row_stats,
    draw_directions,
    grayscale_pixels,
    read_pgm,
    render_grayscale,
    simulate_lattice,
)


def sim(m=40, n=60, rho=0.7, delta=0.2, seed=0):
    return simulate_lattice(LatticeParams(m, n, rho, delta, RngStream(seed)))


def test_params_validation():
    for kw in (dict(m=0), dict(n=0), dict(rho=-0.1), dict(delta=0.6), dict(rho=math.inf)):
        base = dict(m=2, n=2, rho=0.5, delta=0.1)
        base.update(kw)
        with pytest.raises(ParameterError):
            LatticeParams(**base)
    assert LatticeParams(1, 1, 0.7, 0.0, seed=5).seed == RngStream(5)


def test_no_rain_no_runoff():
    f = sim(rho=0.0)
    assert not f.runoff.any()
    assert bottom_row_stats(f) == (0.0, 0.0, 0.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30), st.floats(0, 3), st.floats(0, 0.5), st.integers(0, 10**6))
def test_equilibrium_identity(m, n, rho, delta, seed):
    f = sim(m, n, rho, delta, seed)
    assert f.residual() <= 1e-12
    assert (f.runoff >= 0).all() and (f.infiltration >= 0).all()
    cols = np.arange(n) + f.direction
    assert cols.min() >= 0 and cols.max() <= n - 1
    # runoff at the bottom cannot exceed total rainfall
    assert f.runoff[-1].sum() <= m * n * rho + 1e-9


def test_reproducible():
    a, b = sim(seed=3), sim(seed=3)
    assert a.runoff.tobytes() == b.runoff.tobytes()
    assert not np.array_equal(a.runoff, sim(seed=4).runoff)


def test_monotone_in_rho():
    prev = None
    for rho in (0.0, 0.2, 0.5, 0.7, 1.0, 2.0):
        f = sim(rho=rho, seed=9)
        if prev is not None:
            assert np.all(f.runoff >= prev - 1e-12)
        prev = f.runoff


def test_single_cell_wet_probability():
    # W = max(0, rho - J), so P(W > 0) = 1 - exp(-rho)
    wet = [simulate_lattice(LatticeParams(1, 1, 0.7, 0.0, RngStream(1, r))).runoff[0, 0] > 0 for r in range(20_000)]
    target = 1 - math.exp(-0.7)
    assert target == pytest.approx(0.50341, abs=5e-6)
    assert abs(np.mean(wet) - target) < 4 * math.sqrt(target * (1 - target) / 20_000)


def test_first_row_fraction_matches_exponential():
    f = sim(m=1, n=200_000, rho=0.7, delta=0.3, seed=2)
    assert abs(np.mean(f.runoff > 0) - (1 - math.exp(-0.7))) < 0.005


def test_direction_law_and_boundaries():
    u = np.random.default_rng(0).random((400, 500))
    d = draw_directions(u, 0.2)
    inner = d[:, 1:-1]
    freq = [np.mean(inner == v) for v in (LEFT, DOWN, RIGHT)]
    np.testing.assert_allclose(freq, [0.2, 0.6, 0.2], atol=0.005)
    assert not (d[:, 0] == LEFT).any() and not (d[:, -1] == RIGHT).any()
    assert (draw_directions(u, 0.0) == DOWN).all()
    one = draw_directions(u[:, :1], 0.5)
    assert (one == DOWN).all()


def test_delta_zero_columns_independent():
    f = sim(m=50, n=10, delta=0.0, seed=11)
    # each column is its own chain: recompute column 3 alone
    w, out = 0.0, []
    for i in range(50):
        w = max(0.0, 0.7 - f.infiltration[i, 3] + w)
        out.append(w)
    np.testing.assert_allclose(f.runoff[:, 3], out, rtol=0, atol=1e-12)


def test_bottom_row_stats():
    f = sim()
    s = bottom_row_stats(f)
    row = f.runoff[-1]
    assert s.wet_fraction == np.mean(row > 0)
    assert s.mean_runoff == pytest.approx(row.mean())
    assert s.max_runoff == row.max()


def test_grayscale_contract():
    f = sim(seed=5)
    px = grayscale_pixels(f)
    assert px.dtype == np.uint8 and px.shape == f.runoff.shape
    assert px.flat[np.argmax(f.runoff)] == 0
    assert (px[f.runoff == 0] == 255).all()
    assert (grayscale_pixels(sim(rho=0.0)) == 255).all()


def test_grayscale_scale_invariant():
    f = sim(seed=6)
    g = LatticeField(f.params, f.infiltration, f.direction, 3.7 * f.runoff)
    assert np.array_equal(grayscale_pixels(f), grayscale_pixels(g))


def test_pgm_round_trip():
    f = sim(m=7, n=13, seed=1)
    data = render_grayscale(f)
    assert data.startswith(b"P5\n13 7\n255\n")
    assert np.array_equal(read_pgm(data), grayscale_pixels(f))
    with pytest.raises(ValueError):
        read_pgm(b"P6\n1 1\n255\n\x00")


def test_png_matches_pgm():
    pil = pytest.importorskip("PIL.Image")
    import io

    from treerunoff.lattice import render_png

    f = sim(m=9, n=11, seed=2)
    img = np.asarray(pil.open(io.BytesIO(render_png(f))))
    assert np.array_equal(img, grayscale_pixels(f))


def test_huge_grid_is_resource_error():
    with pytest.raises(ResourceError):
        simulate_lattice(LatticeParams(10**7, 10**7, 0.7, 0.1))


def test_more_diversion_more_runoff():
    def mean_bottom(delta):
        return np.mean([bottom_row_stats(sim(150, 300, 0.7, delta, s)).mean_runoff for s in range(10)])

    assert mean_bottom(0.3) > 2 * mean_bottom(0.0)
