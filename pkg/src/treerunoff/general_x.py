"""Left-continuous X on {-1, 0, 1, ..., K} with symmetric drainage (beta = 1/2).

With eta(t) = E t^(X+1) and alpha = P(X >= 0),

    h(t) = 4 / (1 - alpha) * t (eta(t) - t) / ((1 - t) eta(t)).

For a finite support, (eta(t) - t) / (1 - t) is itself a polynomial (eta(1)
= 1), so h is evaluated as a ratio of polynomials with no cancellation near
t = 1, and its derivatives come from exact polynomial calculus.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from . import _numeric
from .analytics import CRITICAL_TOL, Regime, Tail
from .core import ParameterError, XLaw

UNIMODAL_GRID = 10_000


class UnimodalityWarning(UserWarning):
    pass


class NotUnimodalError(ValueError):
    """h has more than one local maximum on [0, 1]; the closed forms do not apply."""


class InconsistentRegimeError(ValueError):
    pass


@dataclass(frozen=True)
class GeneralSolution:
    regime: Regime
    m: float
    var_x: float
    alpha: float
    p0: float
    expected_w: float
    t0: float
    h_at_t0: float
    h_prime_1: float
    tail: Tail


def _check_law(x: XLaw) -> None:
    if x.probs.get(-1, 0.0) == 0.0:
        raise ParameterError("x_pmf", "need P(X = -1) > 0 (otherwise 1 - alpha = 0)")


def _eta_minus_t_over_1_minus_t(x: XLaw) -> Polynomial:
    c = x.eta_coeffs
    c = np.concatenate((c, [0.0])) if c.size < 2 else c
    c[1] -= 1.0
    partial = np.cumsum(c)
    # the last partial sum is eta(1) - 1 = 0
    return Polynomial(partial[:-1])


def _h_parts(x: XLaw) -> tuple[Polynomial, Polynomial, float]:
    """h = scale * num / den with polynomials num, den."""
    t = Polynomial([0.0, 1.0])
    return t * _eta_minus_t_over_1_minus_t(x), Polynomial(x.eta_coeffs), 4.0 / (1.0 - x.alpha)


def _h_function(x: XLaw):
    num, den, scale = _h_parts(x)
    return lambda t: scale * num(t) / den(t)


def h_general(t: float, x: XLaw) -> float:
    """h(t) for beta = 1/2; t = 1 gives the limit -4 m / (1 - alpha)."""
    _check_law(x)
    t = float(t)
    if not (0.0 <= t <= 1.0):
        raise ParameterError("t", f"h is evaluated on [0, 1], got {t!r}")
    return float(_h_function(x)(t))


def h_general_beta(t: float, x: XLaw, beta: float) -> float:
    """h(t) for arbitrary beta in (0, 1), evaluation only (0 <= t < 1).

    No regime theory is attached to this form when beta != 1/2.
    """
    _check_law(x)
    if not (0.0 < beta < 1.0):
        raise ParameterError("beta", "need beta in (0, 1)")
    if not (0.0 <= t < 1.0):
        raise ParameterError("t", "need t in [0, 1)")
    a, b = x.alpha, beta
    bb = 1.0 - b
    eta = x.eta(t)
    q = (1.0 - eta) / (1.0 - t)
    k = (1.0 - 2.0 * b) ** 2
    inner = k * eta * q + (1.0 - a) * k * eta - 2.0 * (b * b + bb * bb) * eta - q + 1.0 + t
    return inner / (4.0 * b * b * bb * bb * (1.0 - a) * eta)


def h_slope_numerator(x: XLaw) -> Polynomial:
    num, den, _ = _h_parts(x)
    return num.deriv() * den - num * den.deriv()


def h_derivatives_exact(t: float, x: XLaw) -> tuple[float, float]:
    """(h'(t), h''(t)) by polynomial calculus."""
    num, den, c = _h_parts(x)
    n0, n1, n2 = num(t), num.deriv()(t), num.deriv(2)(t)
    d0, d1, d2 = den(t), den.deriv()(t), den.deriv(2)(t)
    first = (n1 * d0 - n0 * d1) / d0**2
    second = (n2 * d0 - n0 * d2) / d0**2 - 2 * d1 * (n1 * d0 - n0 * d1) / d0**3
    return c * first, c * second


def h_prime_at_one(x: XLaw) -> float:
    """2 (-m (1 - m) - Var X) / (1 - alpha)."""
    _check_law(x)
    m = x.mean
    return 2.0 * (-m * (1.0 - m) - x.var) / (1.0 - x.alpha)


def h_second_at_one(x: XLaw) -> float:
    """h''(1) by Richardson-extrapolated central differences."""
    _check_law(x)
    return _numeric.second_derivative(_h_function(x), 1.0)


def count_slope_sign_changes(x: XLaw, grid: int = UNIMODAL_GRID) -> int:
    """Sign changes of h' on a uniform grid of [0, 1] (0 or 1 for unimodal h)."""
    slope = h_slope_numerator(x)(np.linspace(0.0, 1.0, grid))
    signs = np.sign(slope[np.abs(slope) > 1e-14])
    return int(np.count_nonzero(np.diff(signs)))


def locate_t0(x: XLaw, tol: float = 1e-12) -> tuple[float, float]:
    """(t0, h(t0)) with t0 the maximiser of h on [0, 1]."""
    _check_law(x)
    h = _h_function(x)
    t0 = _numeric.argmax_on_unit_interval(h, slope_sign=h_slope_numerator(x), tol=tol)
    return t0, float(h(t0))


def _regime_from_slope(hp1: float) -> Regime:
    if abs(hp1) <= CRITICAL_TOL:
        return Regime.CRITICAL
    return Regime.SUBCRITICAL if hp1 > 0 else Regime.SUPERCRITICAL


def _nonpositive_only(x: XLaw) -> bool:
    return x.max_value <= 0


def classify_general(x: XLaw) -> Regime:
    """Regime from the sign of h'(1), cross-checked against the location of t0.

    Valid when h has at most one inflection on [0, 1]; a disagreement with
    the numerically located maximiser is reported as a ``UnimodalityWarning``.
    """
    if _nonpositive_only(x):
        return Regime.SUBCRITICAL
    hp1 = h_prime_at_one(x)
    regime = _regime_from_slope(hp1)
    if regime is not Regime.SUPERCRITICAL and x.mean >= 0:
        raise InconsistentRegimeError(
            f"h'(1) = {hp1:.6g} says t0 = 1, but E X = {x.mean:.6g} >= 0; t0 = 1 requires E X < 0"
        )
    t0, _ = locate_t0(x)
    if (t0 < 1.0) != (regime is Regime.SUPERCRITICAL):
        warnings.warn(
            f"h'(1) = {hp1:.6g} gives {regime.value} but max of h is at t = {t0:.6g}",
            UnimodalityWarning,
            stacklevel=2,
        )
    return regime


def solve_general(x: XLaw) -> GeneralSolution:
    """p0, E W, t0 and the tail of W for a general left-continuous X.

    Raises ``NotUnimodalError`` if h has more than one local maximum on
    [0, 1] (the closed forms assume a unique maximiser).
    """
    m, var = x.mean, x.var
    if _nonpositive_only(x):
        # X <= 0 everywhere: no runoff is ever generated
        return GeneralSolution(Regime.SUBCRITICAL, m, var, x.alpha, 1.0, 0.0, 1.0, h_general(1.0, x) if x.alpha < 1 else 0.0,
                               h_prime_at_one(x) if x.alpha < 1 else math.inf, Tail())
    _check_law(x)
    if count_slope_sign_changes(x) > 1:
        raise NotUnimodalError("h' changes sign more than once on [0, 1]")
    a = x.alpha
    hp1 = h_prime_at_one(x)
    regime = _regime_from_slope(hp1)
    t0, h0 = locate_t0(x)
    if (t0 < 1.0 - 1e-9) != (regime is Regime.SUPERCRITICAL):
        warnings.warn(f"h'(1) = {hp1:.6g} gives {regime.value} but max of h is at t = {t0:.6g}",
                      UnimodalityWarning, stacklevel=2)
    if regime is Regime.SUPERCRITICAL:
        p0 = math.sqrt(h0) - 1.0
        tail = Tail(0.5, math.sqrt((h0 - h_general(1.0, x)) * (1.0 - a) / math.pi))
        return GeneralSolution(Regime.SUPERCRITICAL, m, var, a, p0, math.inf, t0, h0, hp1, tail)
    if m >= 0:
        raise InconsistentRegimeError(f"maximum of h at t = 1 needs E X < 0, got {m:.6g}")
    t0, h0 = 1.0, h_general(1.0, x)
    p0 = 2.0 * math.sqrt(-m / (1.0 - a)) - 1.0
    ew = -2.0 * m - math.sqrt(max(0.0, 2.0 * (-m * (1.0 - m) - var)))
    if regime is Regime.CRITICAL:
        h2 = h_second_at_one(x)
        tail = Tail(1.5, math.sqrt(max(0.0, -h2 * (1.0 - a) / (8.0 * math.pi))))
    else:
        tail = Tail()
    return GeneralSolution(regime, m, var, a, p0, ew, 1.0, h0, hp1, tail)


def example1_law(a: float, b: float) -> XLaw:
    """X = 1, 0, -1 with probabilities a, b, 1 - a - b."""
    return XLaw({1: a, 0: b, -1: 1.0 - a - b})


def example1_hprime1(a: float, b: float) -> float:
    return 4.0 * ((1 - b) ** 2 + 4 * a * a - a * (5 - 4 * b)) / (1 - a - b)


def example1_critical_a(b):
    """Critical a for given b: the root of 4a^2 - (5 - 4b) a + (1 - b)^2 = 0
    inside the simplex (the other root always has a + b >= 1)."""
    b = np.asarray(b, dtype=float)
    return (5 - 4 * b - np.sqrt(9 - 8 * b)) / 8


@dataclass(frozen=True)
class PhaseGrid:
    a: np.ndarray
    b: np.ndarray
    hprime1: np.ndarray
    regime: np.ndarray
    curve_a: np.ndarray
    curve_b: np.ndarray

    def rows(self, include_curve: bool = True):
        for a, b, hp, r in zip(self.a, self.b, self.hprime1, self.regime):
            yield float(a), float(b), float(hp), str(r)
        if include_curve:
            for a, b in zip(self.curve_a, self.curve_b):
                yield float(a), float(b), 0.0, Regime.CRITICAL.value


def example1_phase_grid(step: float) -> PhaseGrid:
    """Regime of every (a, b) on a ``step`` lattice with a, b >= 0, a + b < 1,
    plus points of the critical curve a = a_c(b) at the same b spacing."""
    if not (0.0 < step <= 0.1):
        raise ParameterError("step", "need 0 < step <= 0.1")
    n = int(round(1.0 / step))
    ticks = np.arange(n + 1) * step
    A, B = np.meshgrid(ticks, ticks, indexing="ij")
    inside = A + B < 1.0 - 1e-12
    a, b = A[inside], B[inside]
    hp = example1_hprime1(a, b)
    regime = np.where(np.abs(hp) <= CRITICAL_TOL, Regime.CRITICAL.value,
                      np.where(hp > 0, Regime.SUBCRITICAL.value, Regime.SUPERCRITICAL.value))
    cb = ticks[ticks < 1.0]
    ca = example1_critical_a(cb)
    return PhaseGrid(a, b, hp, regime, ca, cb)
