import math

import numpy as np
import pytest
from scipy.stats import ks_2samp

from treerunoff import analytics as A
from treerunoff.core import BinaryParams, ParameterError, RngStream
from treerunoff.montecarlo import (
    estimate,
    extrapolated_mean,
    fit_tail,
    fixed_point_step,
    hitting_times,
    nt_hitting_time,
    pmf_fixed_point,
    pmf_iterates,
    run_replicates,
    summarize_contrib,
    survival_km,
    tree_sizes,
)
from treerunoff.trees import SampleCaps

SMALL = SampleCaps(10**5, 10**4)


# ---- tail fitting

@pytest.mark.parametrize("a", [0.5, 1.5])
def test_fit_recovers_pareto_exponent(a):
    x = np.random.default_rng(1).pareto(a, 10**6) + 1.0
    fit = fit_tail(x)
    assert abs(fit.exponent - a) <= 0.05
    assert fit.constant == pytest.approx(1.0, rel=0.1)
    assert fit.n_points == 10**4
    assert abs(fit.hill_exponent - a) <= 0.05


def test_fit_window_minimum():
    x = np.random.default_rng(2).pareto(1.0, 20_000) + 1.0
    assert fit_tail(x).n_points == 500
    assert fit_tail(x[:400]) is None
    assert fit_tail(np.zeros(10**5)) is None


def test_km_without_censoring_is_empirical():
    w = np.random.default_rng(3).integers(0, 20, 5000)
    vals, surv, events = survival_km(w)
    emp = np.array([np.mean(w >= v) for v in vals])
    np.testing.assert_allclose(surv, emp, atol=1e-12)
    assert events.sum() == w.size


def test_km_censoring_raises_survival():
    rng = np.random.default_rng(4)
    w = rng.integers(0, 50, 5000)
    cens = rng.random(5000) < 0.1
    vals, s_km, _ = survival_km(w, cens)
    emp = np.array([np.mean(w >= v) for v in vals])
    assert np.all(s_km >= emp - 1e-12)
    assert s_km[0] == 1.0


def test_km_unbiased_under_independent_censoring():
    rng = np.random.default_rng(5)
    w = rng.geometric(0.1, 200_000)
    c = rng.geometric(0.05, 200_000)
    obs, cens = np.minimum(w, c), c < w
    vals, s, _ = survival_km(obs, cens)
    i = np.searchsorted(vals, 20)
    assert s[i] == pytest.approx(0.9**19, rel=0.03)


# ---- replicate engine

def test_replicates_independent_of_threads():
    p = BinaryParams(0.3, 0.5)
    a = run_replicates(p, 2000, seed=7, caps=SMALL, threads=1)
    b = run_replicates(p, 2000, seed=7, caps=SMALL, threads=4)
    for k in ("n_nodes", "height", "w0", "y_root", "truncated"):
        assert np.array_equal(getattr(a, k), getattr(b, k))


def test_replicate_prefix_stable():
    p = BinaryParams(0.2, 0.5)
    a = run_replicates(p, 500, seed=1, caps=SMALL)
    b = run_replicates(p, 1000, seed=1, caps=SMALL)
    assert np.array_equal(a.w0, b.w0[:500])


def test_estimate_subcritical():
    p = BinaryParams(0.2, 0.5)
    r = estimate(p, 20_000, caps=SampleCaps(10**6, 10**5), seed=3)
    assert abs(r.p0.z) < 4
    assert abs(r.mean_w.z) < 4
    assert r.mean_w_note is None
    assert r.truncated_fraction < 1e-2
    assert r.exact.p0 == pytest.approx(0.7320508, abs=1e-7)


def test_estimate_flags_regimes():
    r = estimate(BinaryParams(0.25, 0.5), 2000, caps=SMALL, seed=1)
    assert "infinite variance" in r.mean_w_note
    r = estimate(BinaryParams(0.4, 0.5), 2000, caps=SMALL, seed=1)
    assert r.mean_w is None and "infinite" in r.mean_w_note
    with pytest.raises(ParameterError):
        estimate(BinaryParams(0.2, 0.5), 999)


def test_estimate_tail_note_when_window_too_small():
    r = estimate(BinaryParams(0.1, 0.5), 1000, caps=SMALL, seed=2)
    assert (r.tail is None) == (r.tail_note is not None)


# ---- pmf oracle

def test_pmf_subcritical_matches_closed_form():
    w = pmf_fixed_point(BinaryParams(0.2, 0.5), 2000, 500)
    assert w.p0 == pytest.approx(A.p_zero(BinaryParams(0.2, 0.5)), abs=1e-6)
    assert w.mean == pytest.approx(0.4, abs=1e-3)
    assert w.deficit < 1e-12


def test_pmf_beta_zero_is_geometric():
    w = pmf_fixed_point(BinaryParams(1 / 3, 0.0), 400, 3000)
    law = A.w_law_beta0(1 / 3)
    k = np.arange(50)
    np.testing.assert_allclose(w.probs[:50], law.pmf(k), atol=1e-10)


def test_pmf_step_conserves_mass():
    p = BinaryParams(0.3, 0.4)
    probs = np.zeros(101)
    probs[0] = 1.0
    deficit = 0.0
    for _ in range(300):
        probs, deficit = fixed_point_step(probs, deficit, p)
        assert probs.min() >= 0
        assert probs.sum() + deficit == pytest.approx(1.0, abs=1e-12)


def test_pmf_iterates_increase_stochastically():
    p = BinaryParams(0.25, 0.5)
    its = list(pmf_iterates(p, 300, [10, 40, 160]))
    for lo, hi in zip(its, its[1:]):
        assert np.all(hi.survival() >= lo.survival() - 1e-12)


def test_pmf_supercritical_p0():
    p = BinaryParams(0.49, 0.5)
    w = pmf_fixed_point(p, 2000, 3000)
    assert w.p0 == pytest.approx(A.p_zero(p), abs=2e-3)


def test_pmf_validation():
    with pytest.raises(ParameterError):
        pmf_fixed_point(BinaryParams(0.2, 0.5), 5, 10)
    with pytest.raises(ParameterError):
        pmf_fixed_point(BinaryParams(0.2, 0.5), 100, 0)


def test_extrapolation_subcritical_is_exact():
    e = extrapolated_mean(BinaryParams(0.2, 0.5), 2000, 800)
    assert e.limit == pytest.approx(0.4, abs=1e-3)


# ---- total progeny

def test_hitting_time_small_cases():
    # a single step to -1 happens with probability P(Z = 0)
    ones = np.mean([nt_hitting_time(0.5, RngStream(0, r)).n == 1 for r in range(20_000)])
    assert abs(ones - 0.25) < 0.015
    h = nt_hitting_time(0.5, RngStream(0, 1), cap=1)
    assert h.n in (1, 2) and (h.n == 2) == h.censored
    with pytest.raises(ParameterError):
        nt_hitting_time(0.0, RngStream(0))


def test_hitting_time_and_tree_size_agree():
    a = hitting_times(0.5, 20_000, seed=1, cap=10**4)
    b = tree_sizes(0.5, 20_000, seed=2, cap=10**4)
    assert ks_2samp(a, b).pvalue > 0.001
    assert a.max() <= 10**4 + 1 and b.max() <= 10**4 + 1


def test_tree_size_pmf_small_values():
    sizes = tree_sizes(0.5, 50_000, seed=3, cap=10**4)
    for n in (1, 2, 3):
        p = A.nt_pmf_exact(n, 0.5)
        assert abs(np.mean(sizes == n) - p) < 4 * math.sqrt(p * (1 - p) / sizes.size)


# ---- contributing height

def test_contrib_summary_conditions_on_height():
    t = run_replicates(BinaryParams(0.49, 0.5), 3000, seed=4, caps=SMALL, track_contrib=True)
    s = summarize_contrib(t, BinaryParams(0.49, 0.5), min_height=20)
    assert s.conditioned == int(np.sum(t.height >= 20))
    assert 0 <= s.mean_fraction <= 1
    assert np.all(t.contrib_height <= t.height)
