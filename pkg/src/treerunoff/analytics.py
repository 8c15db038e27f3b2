"""Closed-form results for X in {-1, +1} on the critical BGW drainage tree.

Notation: alpha = P(X = 1), beta = left-drain probability (folded onto
[0, 1/2]), s = beta^2 + (1-beta)^2, bb = beta (1-beta).  The pgf f of W
solves a quadratic whose discriminant g factorises through the auxiliary
function h; the maximiser t0 of h on [0, 1] decides which root f uses and
hence p0, E W and the tail of W.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from . import _numeric
from .core import BinaryParams, ParameterError, validate_binary

CRITICAL_TOL = 1e-12


class Regime(str, enum.Enum):
    SUBCRITICAL = "subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class Tail:
    """Right tail P(W > x) ~ constant * x**-exponent, or all moments finite."""

    exponent: float | None = None
    constant: float | None = None

    @property
    def all_moments_finite(self) -> bool:
        return self.exponent is None


@dataclass(frozen=True)
class ExactSolution:
    regime: Regime
    alpha_c: float
    p0: float
    expected_w: float
    t0: float | None
    h_at_t0: float | None
    tail: Tail


def alpha_c(beta: float) -> float:
    """Critical rain probability: E W is finite iff alpha <= alpha_c(beta)."""
    beta = float(beta)
    if not (0.0 <= beta <= 0.5):
        raise ParameterError("beta", f"alpha_c is defined for beta in [0, 1/2], got {beta!r} (use 1 - beta)")
    bb = beta * (1.0 - beta)
    return 0.5 * (1.0 + bb - math.sqrt(bb * (2.0 + bb)))


def classify(p: BinaryParams) -> Regime:
    p = validate_binary(p)
    ac = alpha_c(p.beta)
    if abs(p.alpha - ac) <= CRITICAL_TOL:
        return Regime.CRITICAL
    return Regime.SUBCRITICAL if p.alpha < ac else Regime.SUPERCRITICAL


def _require_quadratic_case(p: BinaryParams) -> BinaryParams:
    p = validate_binary(p)
    if p.beta_zero:
        raise ParameterError("beta", "beta = 0 has no quadratic pgf; use w_law_beta0")
    return p


def _h_parts(p: BinaryParams) -> tuple[Polynomial, Polynomial, float]:
    """h = N / (scale * D) with polynomials N, D and a constant scale."""
    a, b = p.alpha, p.beta
    gamma = 4 * b * (1 - b)
    t = Polynomial([0.0, 1.0])
    num = t * (1 - a * (gamma + t) - a**2 * (1 - gamma) * (1 - t**2))
    den = 1 - a * (1 - t**2)
    scale = 4 * (1 - a) * b**2 * (1 - b) ** 2
    return num, den, scale


def _h(t: float, p: BinaryParams) -> float:
    a, b = p.alpha, p.beta
    bb = b * (1 - b)
    num = t * (1 - a * (4 * bb + t) - a**2 * (1 - 2 * b) ** 2 * (1 - t * t))
    return num / (4 * (1 - a) * bb * bb * (1 - a * (1 - t * t)))


def h_eval(t: float, p: BinaryParams) -> float:
    p = _require_quadratic_case(p)
    if not (0.0 < p.alpha < 1.0):
        raise ParameterError("alpha", "h is defined for alpha in (0, 1)")
    t = float(t)
    if not (0.0 <= t <= 1.0):
        raise ParameterError("t", f"h is evaluated on [0, 1], got {t!r}")
    return _h(t, p)


def h_slope_numerator(p: BinaryParams) -> Polynomial:
    """Polynomial with the sign of h'(t) (numerator of the quotient rule)."""
    num, den, _ = _h_parts(p)
    return num.deriv() * den - num * den.deriv()


def h_derivatives_exact(t: float, p: BinaryParams) -> tuple[float, float]:
    """(h'(t), h''(t)) by exact polynomial calculus on h = N / (c D)."""
    num, den, c = _h_parts(p)
    n0, n1, n2 = num(t), num.deriv()(t), num.deriv(2)(t)
    d0, d1, d2 = den(t), den.deriv()(t), den.deriv(2)(t)
    first = (n1 * d0 - n0 * d1) / d0**2
    second = (n2 * d0 - n0 * d2) / d0**2 - 2 * d1 * (n1 * d0 - n0 * d1) / d0**3
    return first / c, second / c


def h_prime_at_one(p: BinaryParams) -> float:
    """Closed form of h'(1); negative exactly in the supercritical regime."""
    p = _require_quadratic_case(p)
    a, bb = p.alpha, p.beta * (1 - p.beta)
    return (1 + 4 * a * a - 4 * a * (1 + bb)) / (4 * (1 - a) * bb * bb)


def h_second_at_one(p: BinaryParams) -> float:
    """h''(1) by Richardson-extrapolated central differences."""
    p = _require_quadratic_case(p)
    return _numeric.second_derivative(lambda t: _h(t, p), 1.0)


def t_max(p: BinaryParams, tol: float = 1e-12) -> tuple[float, float]:
    """(t0, h(t0)) for the unique maximiser t0 of h on [0, 1].

    t0 = 1 exactly when alpha <= alpha_c; otherwise t0 < 1 is found by a
    bracketed search and polished on the exact sign of h'.
    """
    p = _require_quadratic_case(p)
    if not (0.0 < p.alpha < 1.0):
        raise ParameterError("alpha", "h is defined for alpha in (0, 1)")
    if classify(p) is not Regime.SUPERCRITICAL:
        return 1.0, _h(1.0, p)
    slope = h_slope_numerator(p)
    t0 = _numeric.argmax_on_unit_interval(lambda t: _h(t, p), slope_sign=slope, tol=tol)
    return t0, _h(t0, p)


def _s_over_2bb(p: BinaryParams) -> float:
    b = p.beta
    return (b * b + (1 - b) ** 2) / (2 * b * (1 - b))


def p_zero(p: BinaryParams) -> float:
    """P(W = 0)."""
    p = _require_quadratic_case(p)
    a, b = p.alpha, p.beta
    if a == 0.0:
        return 1.0
    if a == 1.0:
        return 0.0
    bb = b * (1 - b)
    if classify(p) is not Regime.SUPERCRITICAL:
        disc = max(0.0, 1 - 4 * bb * a / (1 - a))
        # rationalised form of (2bb - 1 + sqrt(disc)) / (2bb); no cancellation
        return 1.0 - 2 * a / ((1 - a) * (1 + math.sqrt(disc)))
    _, h0 = t_max(p)
    return math.sqrt(h0) - _s_over_2bb(p)


def expected_w_critical(beta: float) -> float:
    """E W at alpha = alpha_c(beta)."""
    bb = beta * (1 - beta)
    return 0.5 * (math.sqrt(1 + 2 / bb) - 1)


def expected_w(p: BinaryParams) -> float:
    p = _require_quadratic_case(p)
    regime = classify(p)
    if regime is Regime.SUPERCRITICAL:
        return math.inf
    if regime is Regime.CRITICAL:
        return expected_w_critical(p.beta)
    a, bb = p.alpha, p.beta * (1 - p.beta)
    disc = max(0.0, 1 - 4 * a * (1 - a + bb))
    return (1 - 2 * a - math.sqrt(disc)) / (2 * bb)


def tail_asymptote(p: BinaryParams) -> Tail:
    p = _require_quadratic_case(p)
    if p.alpha == 1.0:
        # W is the tree size: P(N_T > x) ~ x^(-1/2) / sqrt(pi bb)
        return Tail(0.5, 1 / math.sqrt(math.pi * p.beta * (1 - p.beta)))
    regime = classify(p)
    if regime is Regime.SUBCRITICAL:
        return Tail()
    if regime is Regime.CRITICAL:
        h2 = h_second_at_one(p)
        return Tail(1.5, math.sqrt(max(0.0, -h2 * (1 - p.alpha) / (8 * math.pi))))
    _, h0 = t_max(p)
    return Tail(0.5, math.sqrt((h0 - _h(1.0, p)) * (1 - p.alpha) / math.pi))


def g_eval(t: float, p: BinaryParams, p0: float | None = None) -> float:
    """Discriminant g(t) of the pgf quadratic, in its h-factored form."""
    p = _require_quadratic_case(p)
    a, b = p.alpha, p.beta
    bb = b * (1 - b)
    if p0 is None:
        p0 = p_zero(p)
    hstar = (p0 + _s_over_2bb(p)) ** 2
    return 4 * (1 - a) * bb * bb * (1 - a * (1 - t * t)) * (1 - t) * (hstar - _h(t, p))


def pgf_quadratic(t: float, p: BinaryParams, p0: float) -> tuple[float, float, float]:
    """Coefficients (A, B, C) with A f^2 + B f + C = 0 for f = E t^W.

    Read directly off the one-step decomposition of W at the root; an
    independent route to the discriminant B^2 - 4AC = g(t).
    """
    a, b = p.alpha, p.beta
    bb = b * (1 - b)
    s = b * b + (1 - b) ** 2
    d = 1 + a * (t * t - 1)
    A = bb * d
    B = s * d - t
    C = (1 - a) * s * p0 * (t - 1) + (1 - a) * bb * p0 * p0 * (t - 1) + bb * (1 + a * (t - 1)) * t
    return A, B, C


def pgf_eval(t: float, p: BinaryParams) -> float:
    """f(t) = E t^W, switching from the + to the - root of g at t0."""
    p = _require_quadratic_case(p)
    t = float(t)
    if not (0.0 <= t <= 1.0):
        raise ParameterError("t", f"pgf is evaluated on [0, 1], got {t!r}")
    a, b = p.alpha, p.beta
    if a == 0.0:
        return 1.0
    if a == 1.0:
        raise ParameterError("alpha", "alpha = 1 (W = tree size) is outside the quadratic solution")
    p0 = p_zero(p)
    t0, _ = t_max(p)
    g = g_eval(t, p, p0)
    root = math.sqrt(max(g, 0.0))
    sign = 1.0 if t <= t0 else -1.0
    bb = b * (1 - b)
    s = b * b + (1 - b) ** 2
    d = 1 - a * (1 - t * t)
    return (t - s * d + sign * root) / (2 * bb * d)


@dataclass(frozen=True)
class GeometricLaw:
    """P(W = k) = p0 (1 - p0)^k; ``p0 == 0`` encodes W = infinity a.s."""

    p0: float

    @property
    def infinite(self) -> bool:
        return self.p0 == 0.0

    @property
    def mean(self) -> float:
        return math.inf if self.infinite else (1 - self.p0) / self.p0

    def pmf(self, k) -> np.ndarray:
        k = np.asarray(k)
        return self.p0 * (1 - self.p0) ** k


def w_law_beta0(alpha: float) -> GeometricLaw:
    """Law of W when the tree is a single infinite path (beta = 0)."""
    a = BinaryParams(alpha, 0.0).alpha
    if a >= 0.5:
        return GeometricLaw(0.0)
    return GeometricLaw((1 - 2 * a) / (1 - a))


def expected_y(p: BinaryParams) -> float:
    """E Y, where Y = W - (inflow to the root) is the root's net contribution."""
    p = _require_quadratic_case(p)
    a, b = p.alpha, p.beta
    p0 = p_zero(p)
    return 2 * a - 1 + (1 - a) * (b + (1 - b) * p0) * (1 - b + b * p0)


def nt_pmf_asymptote(n, beta: float):
    """Large-n approximation to P(N_T = n) for the tree size N_T."""
    beta = float(beta)
    if not (0.0 < beta <= 0.5):
        raise ParameterError("beta", "need beta in (0, 1/2]")
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise ParameterError("n", "need n >= 1")
    out = n**-1.5 / (2 * math.sqrt(math.pi * beta * (1 - beta)))
    return float(out) if out.ndim == 0 else out


def nt_pmf_exact(n: int, beta: float) -> float:
    """P(N_T = n) = P(S_n = -1) / n for the walk with steps Z - 1.

    S_n = M1 - M3 for (M1, M2, M3) multinomial(n; bb, 1 - 2bb, bb), so
    P(S_n = -1) sums over M1 = k, M3 = k + 1.
    """
    from scipy.special import gammaln

    n = int(n)
    bb = beta * (1 - beta)
    k = np.arange(0, (n - 1) // 2 + 1)
    rest = n - 2 * k - 1
    logw = gammaln(n + 1) - gammaln(k + 1) - gammaln(k + 2) - gammaln(rest + 1)
    logw = logw + (2 * k + 1) * math.log(bb)
    if 1 - 2 * bb > 0:
        logw = logw + rest * math.log(1 - 2 * bb)
    else:
        logw = np.where(rest == 0, logw, -np.inf)
    return float(np.exp(logw).sum() / n)


def solve(p: BinaryParams) -> ExactSolution:
    """Every closed-form quantity for ``p`` in one record."""
    p = validate_binary(p)
    if p.beta_zero:
        return _solve_beta0(p)
    regime = classify(p)
    ac = alpha_c(p.beta)
    tail = tail_asymptote(p)
    if p.alpha == 0.0:
        return ExactSolution(regime, ac, 1.0, 0.0, 1.0, None, tail)
    if p.alpha == 1.0:
        return ExactSolution(regime, ac, 0.0, math.inf, None, None, tail)
    t0, h0 = t_max(p)
    return ExactSolution(regime, ac, p_zero(p), expected_w(p), t0, h0, tail)


def _solve_beta0(p: BinaryParams) -> ExactSolution:
    law = w_law_beta0(p.alpha)
    ac = 0.5
    if abs(p.alpha - ac) <= CRITICAL_TOL:
        regime = Regime.CRITICAL
    else:
        regime = Regime.SUBCRITICAL if p.alpha < ac else Regime.SUPERCRITICAL
    if law.infinite:
        # W = infinity almost surely: P(W > x) = 1
        return ExactSolution(regime, ac, 0.0, math.inf, None, None, Tail(0.0, 1.0))
    return ExactSolution(regime, ac, law.p0, law.mean, 1.0, None, Tail())
