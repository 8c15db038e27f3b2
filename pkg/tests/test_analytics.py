import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treerunoff import analytics as A
from treerunoff.core import BinaryParams, ParameterError

HALF = 0.5


def bp(alpha, beta=HALF):
    return BinaryParams(alpha, beta)


def alpha_c_oracle(beta):
    bb = beta * (1 - beta)
    return 0.5 * (1 + bb - math.sqrt(bb * (2 + bb)))


# ---- critical point

def test_alpha_c_endpoints():
    assert A.alpha_c(0.0) == pytest.approx(0.5, abs=1e-12)
    assert A.alpha_c(0.5) == pytest.approx(0.25, abs=1e-12)


def test_alpha_c_quarter():
    # bb = 3/16; closed form gives 0.273532788...
    assert A.alpha_c(0.25) == pytest.approx(alpha_c_oracle(0.25), abs=1e-15)
    assert A.alpha_c(0.25) == pytest.approx(0.2735326, abs=5e-7)


def test_alpha_c_domain():
    with pytest.raises(ParameterError):
        A.alpha_c(0.6)


def test_alpha_c_monotone():
    vals = [A.alpha_c(b) for b in np.linspace(0, 0.5, 501)]
    assert np.all(np.diff(vals) < 0)


def test_alpha_c_is_zero_of_h_slope_at_one():
    # h'(1) changes sign at alpha_c
    for b in (0.1, 0.3, 0.5):
        ac = A.alpha_c(b)
        assert A.h_prime_at_one(bp(ac - 1e-3, b)) > 0 > A.h_prime_at_one(bp(ac + 1e-3, b))


@pytest.mark.parametrize("alpha, regime", [(0.2, "subcritical"), (0.25, "critical"), (0.3, "supercritical")])
def test_classify(alpha, regime):
    assert A.classify(bp(alpha)).value == regime


# ---- h

def h_half_alpha_quarter(t):
    return 16 * t * (3 - t) / (3 * (t * t + 3))


def test_h_values():
    assert A.h_eval(0.0, bp(0.3, 0.2)) == 0.0
    for t in np.linspace(0, 1, 11):
        assert A.h_eval(t, bp(0.25)) == pytest.approx(h_half_alpha_quarter(t), rel=1e-13)
    assert A.h_eval(1.0, bp(0.25)) == pytest.approx(8 / 3)
    a = 0.49
    assert A.h_eval(3 / 7, bp(a)) == pytest.approx(2 / (math.sqrt(a) + a), rel=1e-13)
    assert A.h_eval(3 / 7, bp(a)) == pytest.approx(1.680672, abs=5e-7)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.5))
def test_h_at_one_closed_form(a, b):
    bb = b * (1 - b)
    expected = (1 - a - 4 * a * bb) / (4 * (1 - a) * bb * bb)
    assert A.h_eval(1.0, bp(a, b)) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(0.01, 0.5))
def test_h_slope_at_one_closed_form(a, b):
    p = bp(a, b)
    bb = b * (1 - b)
    closed = (1 + 4 * a * a - 4 * a * (1 + bb)) / (4 * (1 - a) * bb * bb)
    assert A.h_prime_at_one(p) == pytest.approx(closed, rel=1e-9, abs=1e-9)
    # numerical derivative of h itself
    h = 1e-5
    fd = (A._h(1 + h, p) - A._h(1 - h, p)) / (2 * h)
    assert fd == pytest.approx(closed, rel=1e-6, abs=1e-6)


def test_h_second_at_one_critical_half():
    assert A.h_second_at_one(bp(0.25)) == pytest.approx(-4.0, abs=1e-6)
    assert A.h_derivatives_exact(1.0, bp(0.25))[1] == pytest.approx(-4.0, abs=1e-12)


def test_h_rejects_beta_zero():
    with pytest.raises(ParameterError):
        A.h_eval(0.5, bp(0.3, 0.0))


# ---- maximiser

@pytest.mark.parametrize("alpha", [0.1, 0.2, 0.25])
def test_t_max_is_one_up_to_critical(alpha):
    assert A.t_max(bp(alpha))[0] == 1.0


@pytest.mark.parametrize("alpha", [0.49, 0.36, 0.3])
def test_t_max_half(alpha):
    t0, h0 = A.t_max(bp(alpha))
    assert t0 == pytest.approx(1 / math.sqrt(alpha) - 1, abs=1e-12)
    assert h0 == pytest.approx(2 / (math.sqrt(alpha) + alpha), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 0.5), st.floats(0.0, 1.0))
def test_t_max_is_grid_maximum(b, u):
    ac = A.alpha_c(b)
    a = ac + u * (0.99 - ac)
    p = bp(a, b)
    t0, h0 = A.t_max(p)
    grid = np.linspace(0, 1, 2001)
    assert h0 >= max(A.h_eval(t, p) for t in grid) - 1e-12
    assert (t0 < 1) == (A.classify(p) is A.Regime.SUPERCRITICAL)


# ---- p0 and E W

def test_p0_values():
    assert A.p_zero(bp(0.0)) == 1.0
    assert A.p_zero(bp(0.2)) == pytest.approx(2 * math.sqrt(0.75) - 1, abs=1e-14)
    assert A.p_zero(bp(0.2)) == pytest.approx(0.7320508, abs=5e-8)
    a = 0.49
    assert A.p_zero(bp(a)) == pytest.approx(math.sqrt(2 / (math.sqrt(a) + a)) - 1, abs=1e-12)
    assert A.p_zero(bp(0.25)) == pytest.approx(2 * math.sqrt(2 / 3) - 1, abs=1e-14)


@pytest.mark.parametrize("b", [0.1, 0.3, 0.5])
def test_p0_branches_meet_at_alpha_c(b):
    ac = A.alpha_c(b)
    bb = b * (1 - b)
    eqn1 = (2 * bb - 1 + math.sqrt(1 - 4 * bb * ac / (1 - ac))) / (2 * bb)
    # the supercritical branch evaluated at t0 = 1
    eqn2 = math.sqrt(A.h_eval(1.0, bp(ac, b))) - (b * b + (1 - b) ** 2) / (2 * bb)
    assert eqn1 == pytest.approx(eqn2, abs=1e-10)
    below = A.p_zero(bp(ac - 1e-9, b))
    above = A.p_zero(bp(ac + 1e-9, b))
    assert below == pytest.approx(above, abs=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.01, 0.5))
def test_p0_in_unit_interval(a, b):
    assert 0.0 <= A.p_zero(bp(a, b)) <= 1.0


def test_expected_w_values():
    assert A.expected_w(bp(0.2)) == pytest.approx(0.4, abs=1e-14)
    assert A.expected_w(bp(0.25)) == pytest.approx(1.0, abs=1e-14)
    assert A.expected_w_critical(0.5) == pytest.approx(1.0, abs=1e-15)
    assert A.expected_w(bp(0.3)) == math.inf
    assert A.expected_w(bp(0.0)) == 0.0


@pytest.mark.parametrize("b", [0.1, 0.3, 0.5])
def test_expected_w_continuous_into_critical(b):
    ac = A.alpha_c(b)
    assert A.expected_w(bp(ac - 1e-10, b)) == pytest.approx(A.expected_w_critical(b), abs=1e-4)


def test_expected_w_half_remark():
    # beta = 1/2 closed form: E W = 2 (1 - 2a - sqrt(1 - 4a(5/4 - a)))
    for a in (0.05, 0.1, 0.2, 0.24):
        assert A.expected_w(bp(a)) == pytest.approx(2 * (1 - 2 * a - math.sqrt(1 - 4 * a * (1.25 - a))), rel=1e-12)


# ---- tails

def test_tail_critical_half():
    t = A.tail_asymptote(bp(0.25))
    assert t.exponent == 1.5
    assert t.constant == pytest.approx(math.sqrt(3 / (8 * math.pi)), rel=1e-7)
    assert t.constant == pytest.approx(0.3454941, abs=5e-8)


def test_tail_supercritical_half():
    a = 0.49
    t = A.tail_asymptote(bp(a))
    h0 = 2 / (math.sqrt(a) + a)
    h1 = (1 - a - a) / (4 * (1 - a) / 16)
    assert h1 == pytest.approx(0.1568627, abs=5e-8)
    expected = math.sqrt((h0 - h1) * (1 - a) / math.pi)
    assert t.exponent == 0.5
    assert t.constant == pytest.approx(expected, rel=1e-12)
    # value quoted to seven places as 0.4973650; the closed form gives 0.49736531
    assert t.constant == pytest.approx(0.4973650, abs=1e-6)


def test_tail_subcritical():
    assert A.tail_asymptote(bp(0.2)).all_moments_finite


# ---- pgf

@pytest.mark.parametrize("a, b", [(0.2, 0.5), (0.25, 0.5), (0.49, 0.5), (0.1, 0.2), (0.35, 0.3)])
def test_pgf_endpoints_and_shape(a, b):
    p = bp(a, b)
    assert A.pgf_eval(1.0, p) == pytest.approx(1.0, abs=1e-12)
    assert A.pgf_eval(0.0, p) == pytest.approx(A.p_zero(p), abs=1e-10)
    ts = np.linspace(0, 1, 401)
    f = np.array([A.pgf_eval(t, p) for t in ts])
    assert np.all(np.diff(f) >= -1e-12)
    assert np.all(np.diff(f, 2) >= -1e-9)


def test_pgf_domain():
    with pytest.raises(ParameterError):
        A.pgf_eval(1.1, bp(0.2))


@pytest.mark.parametrize("a, b", [(0.3, 0.5), (0.49, 0.5), (0.35, 0.3), (0.45, 0.1)])
def test_pgf_branches_meet_at_t0(a, b):
    p = bp(a, b)
    t0, _ = A.t_max(p)
    eps = 1e-9
    # f' is finite at t0, so the jump across 2 eps is O(eps)
    assert abs(A.pgf_eval(t0 - eps, p) - A.pgf_eval(t0 + eps, p)) <= 1e-7
    assert A.g_eval(t0, p) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 0.99), st.floats(0.01, 0.5))
def test_g_nonnegative(a, b):
    p = bp(a, b)
    p0 = A.p_zero(p)
    g = np.array([A.g_eval(t, p, p0) for t in np.linspace(0, 1, 10_001)])
    assert g.min() >= -1e-12


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 0.99), st.floats(0.01, 0.5), st.floats(0, 1))
def test_g_equals_quadratic_discriminant(a, b, t):
    p = bp(a, b)
    p0 = A.p_zero(p)
    qa, qb, qc = A.pgf_quadratic(t, p, p0)
    disc = qb * qb - 4 * qa * qc
    assert disc == pytest.approx(A.g_eval(t, p, p0), abs=1e-10)


def test_pgf_slope_at_one_is_mean():
    p = bp(0.2)
    h = 1e-7
    fd = (A.pgf_eval(1.0, p) - A.pgf_eval(1.0 - h, p)) / h
    assert fd == pytest.approx(0.4, abs=1e-4)


@pytest.mark.parametrize("a, b", [(0.1, 0.5), (0.2, 0.3), (0.3, 0.1)])
def test_pgf_slope_matches_expected_w(a, b):
    p = bp(a, b)
    h = 1e-7
    fd = (A.pgf_eval(1.0, p) - A.pgf_eval(1.0 - h, p)) / h
    assert fd == pytest.approx(A.expected_w(p), rel=1e-4)


# ---- beta = 0

def test_beta_zero_geometric():
    law = A.w_law_beta0(1 / 3)
    assert law.p0 == pytest.approx(0.5)
    assert law.mean == pytest.approx(1.0)
    assert A.w_law_beta0(0.0).p0 == 1.0 and A.w_law_beta0(0.0).mean == 0.0
    assert A.w_law_beta0(0.5).infinite
    s = A.solve(bp(0.2, 0.0))
    assert s.expected_w == pytest.approx(0.2 / 0.6)
    assert s.alpha_c == 0.5


def test_beta_zero_infinite():
    s = A.solve(bp(0.7, 0.0))
    assert s.p0 == 0.0 and s.expected_w == math.inf


# ---- E Y and tree sizes

def test_expected_y():
    assert A.expected_y(bp(0.25)) == pytest.approx(0.0, abs=1e-12)
    assert A.expected_y(bp(0.2)) == pytest.approx(0.0, abs=1e-12)
    a = 0.49
    closed = (1 + math.sqrt(a)) * (2 * math.sqrt(a) - 1) ** 2 / (2 * math.sqrt(a))
    assert A.expected_y(bp(a)) == pytest.approx(closed, abs=1e-12)
    assert A.expected_y(bp(a)) == pytest.approx(0.1942857, abs=5e-8)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 0.99), st.floats(0.01, 0.5))
def test_expected_y_sign(a, b):
    p = bp(a, b)
    y = A.expected_y(p)
    if A.classify(p) is A.Regime.SUPERCRITICAL:
        assert y > -1e-12
    else:
        assert y == pytest.approx(0.0, abs=1e-9)


def test_nt_asymptote():
    v = A.nt_pmf_asymptote(100, 0.5)
    assert v == pytest.approx(100**-1.5 / (2 * math.sqrt(math.pi / 4)))
    assert v == pytest.approx(0.0005642, abs=5e-8)
    assert A.nt_pmf_asymptote(400, 0.5) == pytest.approx(v / 8)
    ratio = A.nt_pmf_asymptote(100, 0.25) / v
    assert ratio == pytest.approx(math.sqrt(0.25 / 0.1875))


def test_nt_exact_pmf():
    assert A.nt_pmf_exact(1, 0.5) == pytest.approx(0.25)
    # P(N = 2) = P(Z_root = 1) P(Z = 0)
    assert A.nt_pmf_exact(2, 0.5) == pytest.approx(0.5 * 0.25)
    total = sum(A.nt_pmf_exact(n, 0.5) for n in range(1, 20_001))
    # P(N > n) ~ n^(-1/2) / sqrt(pi b b') with b b' = 1/4
    assert 1 - total == pytest.approx(2 / math.sqrt(math.pi * 20_000), rel=0.01)
    assert A.nt_pmf_exact(1000, 0.5) == pytest.approx(A.nt_pmf_asymptote(1000, 0.5), rel=0.01)


# ---- whole solution

def test_solve_records():
    s = A.solve(bp(0.25))
    assert s.regime is A.Regime.CRITICAL
    assert s.expected_w == pytest.approx(1.0)
    assert s.t0 == 1.0
    s = A.solve(bp(0.49))
    assert s.t0 < 1 and s.expected_w == math.inf
    s = A.solve(bp(1.0))
    assert s.p0 == 0.0 and s.tail.exponent == 0.5
