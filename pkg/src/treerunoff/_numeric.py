"""Small numerical helpers shared by the closed-form solvers."""
from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar

RICHARDSON_STEPS = (1e-3, 5e-4)


def second_derivative(f: Callable[[float], float], x: float, steps=RICHARDSON_STEPS) -> float:
    """Central second difference at ``x`` with one Richardson step (O(h^4))."""
    h1, h2 = steps
    d1 = (f(x + h1) - 2.0 * f(x) + f(x - h1)) / h1**2
    d2 = (f(x + h2) - 2.0 * f(x) + f(x - h2)) / h2**2
    r = (h1 / h2) ** 2
    return (r * d2 - d1) / (r - 1.0)


def first_derivative(f: Callable[[float], float], x: float, steps=RICHARDSON_STEPS) -> float:
    h1, h2 = steps
    d1 = (f(x + h1) - f(x - h1)) / (2 * h1)
    d2 = (f(x + h2) - f(x - h2)) / (2 * h2)
    r = (h1 / h2) ** 2
    return (r * d2 - d1) / (r - 1.0)


def argmax_on_unit_interval(
    f: Callable[[float], float],
    slope_sign: Callable[[float], float] | None = None,
    tol: float = 1e-12,
    grid: int = 129,
) -> float:
    """Maximiser of a unimodal ``f`` on [0, 1].

    A grid scan finds the bracket (and catches a maximiser at either end),
    golden-section search narrows it, and, when ``slope_sign`` (any function
    with the sign of f') is given, a root of it in the bracket is polished
    with Brent's method.  Function values alone cannot pin a smooth maximum
    below ~sqrt(machine eps); the polish recovers full precision.
    """
    ts = np.linspace(0.0, 1.0, grid)
    vals = np.array([f(t) for t in ts])
    k = int(np.argmax(vals))
    lo, hi = ts[max(k - 1, 0)], ts[min(k + 1, grid - 1)]
    if 0 < k < grid - 1:
        res = minimize_scalar(lambda t: -f(t), bracket=(lo, ts[k], hi), method="golden", options={"xtol": tol})
    else:
        res = minimize_scalar(lambda t: -f(t), bounds=(lo, hi), method="bounded", options={"xatol": max(tol, 1e-10)})
    best = float(np.clip(res.x, 0.0, 1.0))
    if slope_sign is not None:
        a, b = max(lo, 0.0), min(hi, 1.0)
        sa, sb = slope_sign(a), slope_sign(b)
        if sa > 0 > sb:
            best = brentq(slope_sign, a, b, xtol=1e-16, rtol=4 * np.finfo(float).eps)
        elif sb >= 0:
            best = 1.0
        elif sa <= 0:
            best = a
    return best
