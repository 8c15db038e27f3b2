"""Monte Carlo checks of the closed forms, plus two sampling-free oracles.

Replicate r always draws from ``RngStream(seed, r)``, so results do not
depend on how replicates are split across worker threads.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.signal import fftconvolve

from . import _kernels
from .analytics import ExactSolution, Regime, solve
from .core import BinaryParams, ParameterError, RngStream, binary_as_xlaw, validate_binary
from .runoff import xlaw_tables
from .trees import SampleCaps, as_generator, bgw_size, offspring_thresholds

MIN_REPLICATES = 1000
TAIL_QUANTILE = 0.01
TAIL_MIN_POINTS = 500


def resolve_threads(threads: int) -> int:
    if threads < 0:
        raise ParameterError("threads", "must be >= 0 (0 = one per CPU)")
    return threads or os.cpu_count() or 1


def _chunks(start: int, stop: int, parts: int) -> list[tuple[int, int]]:
    edges = np.linspace(start, stop, parts + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _parallel(fn, start: int, stop: int, threads: int) -> None:
    threads = resolve_threads(threads)
    spans = _chunks(start, stop, threads)
    if len(spans) <= 1:
        for a, b in spans:
            fn(a, b)
        return
    with ThreadPoolExecutor(max_workers=len(spans)) as pool:
        for fut in [pool.submit(fn, a, b) for a, b in spans]:
            fut.result()


@dataclass(frozen=True, eq=False)
class ReplicateTable:
    """Per-replicate summaries of labeled BGW trees."""

    n_nodes: np.ndarray
    height: np.ndarray
    w0: np.ndarray
    contrib_height: np.ndarray
    y_root: np.ndarray
    truncated: np.ndarray

    def __len__(self) -> int:
        return int(self.w0.size)


def run_replicates(
    p: BinaryParams,
    replicates: int,
    seed: int,
    caps: SampleCaps = SampleCaps(),
    track_contrib: bool = False,
    threads: int = 1,
) -> ReplicateTable:
    return _run_span(validate_binary(p), 0, int(replicates), seed, caps, threads, track_contrib)


class TailFit(NamedTuple):
    exponent: float
    constant: float
    x_min: float
    n_points: int
    hill_exponent: float


def survival_km(samples, censored=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Kaplan-Meier estimate of P(W >= x) at each distinct sample value.

    ``censored`` marks right-censored entries: a truncated tree only gives
    a lower bound on its runoff.  With no censoring this is the plain
    empirical survival #{W >= x} / n.  Returns (values, survival, events).
    """
    w = np.asarray(samples)
    cens = np.zeros(w.size, bool) if censored is None else np.asarray(censored, bool)
    vals, inv = np.unique(w, return_inverse=True)
    events = np.bincount(inv, weights=~cens, minlength=vals.size)
    leaving = np.bincount(inv, minlength=vals.size)
    at_risk = w.size - np.concatenate(([0], np.cumsum(leaving)[:-1]))
    # S(v) = prod over u < v of (1 - d_u / r_u)
    after = np.cumprod(1.0 - events / at_risk)
    surv = np.concatenate(([1.0], after[:-1]))
    return vals, surv, events


def fit_tail(
    samples,
    censored=None,
    quantile: float = TAIL_QUANTILE,
    min_points: int = TAIL_MIN_POINTS,
) -> TailFit | None:
    """Fit P(W >= x) ~ C x^-a over the largest ``quantile`` of the sample.

    The window is the top max(ceil(quantile n), min_points) order
    statistics.  Least squares of log S(x) on log x runs over the distinct
    uncensored values in the window, each weighted by its multiplicity, so
    every order statistic counts once.  S is the Kaplan-Meier survival,
    which is the empirical survival when nothing is censored.  Hill's
    estimator on the same window is reported alongside.  Returns None when
    the window is too small or has fewer than three distinct positive values.
    """
    w = np.asarray(samples, dtype=float)
    n = w.size
    k = max(int(math.ceil(quantile * n)), min_points)
    if k >= n:
        return None
    top = np.sort(w)[::-1]
    threshold = top[k]
    vals, surv, events = survival_km(w, censored)
    keep = (vals > threshold) & (events > 0) & (vals > 0)
    if keep.sum() < 3:
        return None
    xs, sx, wt = vals[keep], surv[keep], events[keep]
    slope, intercept = np.polyfit(np.log(xs), np.log(sx), 1, w=np.sqrt(wt))
    hill = math.nan
    if threshold > 0:
        gamma = float(np.mean(np.log(top[:k] / threshold)))
        hill = 1.0 / gamma if gamma > 0 else math.nan
    return TailFit(-float(slope), float(math.exp(intercept)), float(xs[0]), int(wt.sum()), hill)


@dataclass(frozen=True)
class Estimate:
    value: float
    stderr: float
    exact: float | None = None

    @property
    def z(self) -> float | None:
        if self.exact is None or not math.isfinite(self.exact) or self.stderr == 0:
            return None
        return (self.value - self.exact) / self.stderr


@dataclass(frozen=True)
class McReport:
    alpha: float
    beta: float
    seed: int
    replicates: int
    truncated_fraction: float
    exact: ExactSolution
    p0: Estimate
    mean_w: Estimate | None
    mean_w_note: str | None
    mean_y: Estimate
    tail: TailFit | None
    tail_note: str | None
    notes: list[str] = field(default_factory=list)


def estimate(
    p: BinaryParams,
    replicates: int,
    caps: SampleCaps = SampleCaps(),
    seed: int = 0,
    threads: int = 1,
    table: ReplicateTable | None = None,
) -> McReport:
    """Sample ``replicates`` labeled trees and compare with the closed forms.

    The sample mean of W is reported only when E W is finite.  At the
    critical point it is flagged: W then has infinite variance, so the
    standard error understates the real uncertainty.
    """
    p = validate_binary(p)
    if replicates < MIN_REPLICATES:
        raise ParameterError("replicates", f"need at least {MIN_REPLICATES}")
    if table is None:
        table = run_replicates(p, replicates, seed, caps, threads=threads)
    exact = solve(p)
    n = len(table)
    w = table.w0
    zero = float(np.mean(w == 0))
    p0 = Estimate(zero, math.sqrt(zero * (1 - zero) / n), exact.p0)
    mean_w, note = None, None
    if exact.regime is not Regime.SUPERCRITICAL and math.isfinite(exact.expected_w):
        mean_w = Estimate(float(w.mean()), float(w.std(ddof=1) / math.sqrt(n)), exact.expected_w)
        if exact.regime is Regime.CRITICAL:
            note = "slow convergence: W has infinite variance at the critical point"
    else:
        note = "E W is infinite in this regime; sample mean not reported"
    y = table.y_root
    mean_y = Estimate(float(y.mean()), float(y.std(ddof=1) / math.sqrt(n)), None)
    tail = fit_tail(w, censored=table.truncated)
    tail_note = None if tail else "too few replicates in the upper tail for a fit"
    notes = []
    trunc = float(np.mean(table.truncated))
    if trunc > 0:
        notes.append(f"{trunc:.3%} of trees hit a cap; their W is an underestimate")
    return McReport(p.alpha, p.beta, seed, n, trunc, exact, p0, mean_w, note, mean_y, tail, tail_note, notes)


@dataclass(frozen=True, eq=False)
class WPmf:
    """Law of W on {0, ..., n_max}; ``deficit`` is the mass above n_max."""

    probs: np.ndarray
    deficit: float
    iterations: int

    @property
    def p0(self) -> float:
        return float(self.probs[0])

    @property
    def mean(self) -> float:
        """Mean over the retained support (the deficit is left out)."""
        return float(np.arange(self.probs.size) @ self.probs)

    @property
    def mean_capped(self) -> float:
        """E min(W, n_max + 1), placing the deficit just above the support."""
        return self.mean + self.deficit * self.probs.size

    def survival(self) -> np.ndarray:
        """P(W > k) for k = 0..n_max, counting the deficit as above n_max."""
        return 1.0 - np.cumsum(self.probs)


def fixed_point_step(probs: np.ndarray, deficit: float, p: BinaryParams) -> tuple[np.ndarray, float]:
    """One application of W -> max(0, I_L W_L + I_R W_R + X).

    I_L ~ Bernoulli(1 - beta) and I_R ~ Bernoulli(beta) independent, so the
    number of attached children has the critical offspring law.  Mass in the
    deficit (W > n_max) stays there.
    """
    a, b = p.alpha, p.beta
    n1 = probs.size
    left = (1 - b) * probs
    left[0] += b
    right = b * probs
    right[0] += 1 - b
    s = np.clip(fftconvolve(left, right)[: n1 + 1], 0.0, None) if n1 > 64 else np.convolve(left, right)[: n1 + 1]
    new = np.zeros(n1)
    # X = +1 shifts up, X = -1 shifts down and clamps at zero
    new[1:] += a * s[: n1 - 1]
    new[0] += (1 - a) * (s[0] + s[1])
    new[1 : n1 - 1] += (1 - a) * s[2:n1]
    # everything not on {0..n_max} is above it: overflow from the shift, and
    # every configuration with an attached child already in the deficit
    return new, max(0.0, 1.0 - float(new.sum()))


def pmf_iterates(p: BinaryParams, n_max: int, checkpoints):
    """Yield the iterate after each of the increasing iteration counts in
    ``checkpoints``, starting from the point mass at 0 (iterate 1)."""
    p = validate_binary(p)
    if n_max < 10:
        raise ParameterError("n_max", "need n_max >= 10")
    checkpoints = sorted(int(c) for c in checkpoints)
    if not checkpoints or checkpoints[0] < 1:
        raise ParameterError("iters", "need at least one iteration")
    probs = np.zeros(n_max + 1)
    probs[0] = 1.0
    deficit = 0.0
    k = 1
    for c in checkpoints:
        while k < c:
            probs, deficit = fixed_point_step(probs, deficit, p)
            k += 1
        yield WPmf(probs.copy(), deficit, k)


def pmf_fixed_point(p: BinaryParams, n_max: int = 2000, iters: int = 500) -> WPmf:
    """Law of the runoff of the tree cut at height ``iters`` - 1, truncated to
    {0, ..., n_max}.  Iterates increase stochastically to the law of W."""
    return next(pmf_iterates(p, n_max, [iters]))


class MeanExtrapolation(NamedTuple):
    limit: float
    ratio: float
    means: tuple[float, float, float]
    iterations: tuple[int, int, int]


def extrapolated_mean(p: BinaryParams, n_max: int, iters: int) -> MeanExtrapolation:
    """Limit of E min(W_k, n_max + 1) from iterates k = iters/4, iters/2, iters.

    Near the critical point the iterates approach the fixed point
    algebraically, so the raw mean after any affordable number of
    iterations is biased low.  When the differences between successive
    doublings shrink geometrically (ratio r < 1), Aitken's delta-squared
    step estimates the limit.
    """
    ks = (max(1, iters // 4), max(2, iters // 2), iters)
    means = tuple(w.mean_capped for w in pmf_iterates(p, n_max, ks))
    d1, d2 = means[1] - means[0], means[2] - means[1]
    if d1 <= 0 or d2 <= 0 or d2 >= d1:
        return MeanExtrapolation(means[2], math.nan, means, ks)
    r = d2 / d1
    return MeanExtrapolation(means[2] + d2 * r / (1 - r), r, means, ks)


class HittingTime(NamedTuple):
    n: int
    censored: bool


def nt_hitting_time(beta: float, rng, cap: int = 10**7) -> HittingTime:
    """First time the walk with steps (offspring - 1) reaches -1.

    This has the law of the total size of a BGW tree.  A walk still above -1
    after ``cap`` steps is returned as ``(cap + 1, censored=True)``.
    """
    beta = float(beta)
    if not (0.0 < beta <= 0.5):
        raise ParameterError("beta", "need beta in (0, 1/2]")
    if cap < 1:
        raise ParameterError("cap", "need cap >= 1")
    p0, p1 = offspring_thresholds(beta)
    n, censored = _kernels.hitting_time(as_generator(rng), p0, p1, cap)
    return HittingTime(cap + 1 if censored else int(n), bool(censored))


def hitting_times(beta: float, count: int, seed: int, cap: int = 10**7, threads: int = 1) -> np.ndarray:
    """``count`` hitting times, censored values reported as cap + 1."""
    out = np.empty(count, dtype=np.int64)

    def work(a, b):
        for r in range(a, b):
            out[r] = nt_hitting_time(beta, RngStream(seed, r), cap).n

    _parallel(work, 0, count, threads)
    return out


def tree_sizes(beta: float, count: int, seed: int, cap: int = 10**7, threads: int = 1) -> np.ndarray:
    """Sizes of ``count`` unlabeled BGW trees; trees larger than ``cap``
    are reported as cap + 1."""
    caps = SampleCaps(cap, cap + 1)
    out = np.empty(count, dtype=np.int64)

    def work(a, b):
        for r in range(a, b):
            n, _, truncated = bgw_size(beta, RngStream(seed, r), caps)
            out[r] = cap + 1 if truncated else n

    _parallel(work, 0, count, threads)
    return out


@dataclass(frozen=True)
class ContribSummary:
    alpha: float
    beta: float
    min_height: int
    attempts: int
    conditioned: int
    mean_contrib_height: float
    stderr_contrib_height: float
    mean_fraction: float
    frac_at_least_090: float
    count_at_least_090: int
    sufficient: bool


def summarize_contrib(table: ReplicateTable, p: BinaryParams, min_height: int, target: int | None = None) -> ContribSummary:
    keep = table.height >= min_height
    ch = table.contrib_height[keep].astype(float)
    frac = ch / np.maximum(1, table.height[keep])
    k = int(keep.sum())
    nan = math.nan
    return ContribSummary(
        p.alpha, p.beta, min_height, len(table), k,
        float(ch.mean()) if k else nan,
        float(ch.std(ddof=1) / math.sqrt(k)) if k > 1 else nan,
        float(frac.mean()) if k else nan,
        float(np.mean(frac >= 0.9)) if k else nan,
        int(np.sum(frac >= 0.9)),
        k >= (target or 1),
    )


def contrib_experiment(
    p: BinaryParams,
    replicates: int,
    caps: SampleCaps = SampleCaps(),
    seed: int = 0,
    min_height: int = 50,
    max_attempts: int | None = None,
    threads: int = 1,
) -> ContribSummary:
    """Contributing height among trees of height >= ``min_height``.

    Keeps sampling (in batches, streams continuing from the last replicate
    index) until ``replicates`` trees satisfy the height condition or
    ``max_attempts`` trees have been drawn; ``sufficient`` is False in the
    second case.
    """
    p = validate_binary(p)
    if min_height < 10:
        raise ParameterError("min_height", "need min_height >= 10")
    max_attempts = max_attempts or 1000 * replicates
    tables: list[ReplicateTable] = []
    drawn = 0
    hits = 0
    while hits < replicates and drawn < max_attempts:
        # P(height >= h) is about 2 / (2 b (1 - b) h) for a critical tree
        rate = 1.0 / (p.beta * (1 - p.beta) * min_height)
        batch = int(min(max_attempts - drawn, max(1000, 1.2 * (replicates - hits) / min(rate, 1.0))))
        t = _run_span(p, drawn, drawn + batch, seed, caps, threads)
        tables.append(t)
        drawn += batch
        hits += int(np.sum(t.height >= min_height))
    table = _concat(tables)
    return summarize_contrib(table, p, min_height, replicates)


def _run_span(p, start, stop, seed, caps, threads, track_contrib=True) -> ReplicateTable:
    p0, p1 = offspring_thresholds(p.beta)
    values, cdf = xlaw_tables(binary_as_xlaw(p))
    n = stop - start
    cols = [np.empty(n, np.int64) for _ in range(5)] + [np.empty(n, bool)]

    def work(a, b):
        for r in range(a, b):
            res = _kernels.bgw_replicate(RngStream(seed, r).generator(), p0, p1, values, cdf,
                                         caps.max_nodes, caps.max_height, track_contrib)
            for col, v in zip(cols, res):
                col[r - start] = v

    _parallel(work, start, stop, threads)
    return ReplicateTable(*cols)


def _concat(tables: list[ReplicateTable]) -> ReplicateTable:
    names = ("n_nodes", "height", "w0", "contrib_height", "y_root", "truncated")
    return ReplicateTable(*(np.concatenate([getattr(t, k) for t in tables]) for k in names))


def contrib_table(p: BinaryParams, replicates: int, seed: int = 0, caps: SampleCaps = SampleCaps(), threads: int = 1) -> ReplicateTable:
    """Raw per-tree contribution data, for summarising at several heights."""
    return _run_span(validate_binary(p), 0, replicates, seed, caps, threads)
