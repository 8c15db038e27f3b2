"""Runoff on a fixed tree: the leaves-up recursion, its max-sum dual, and
which nodes actually feed the root."""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .core import XLaw
from .trees import SampleCaps, Tree, as_generator, offspring_thresholds

ORACLE_MAX_SUBTREES = 2**20
_INT64_SAFE = 2**62


@dataclass(frozen=True, eq=False)
class LabeledTree:
    tree: Tree
    x: np.ndarray
    w: np.ndarray

    @property
    def w0(self) -> int:
        return int(self.w[0])


def _as_labels(t: Tree, x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (t.n_nodes,):
        raise ValueError(f"need one label per node ({t.n_nodes}), got shape {x.shape}")
    if x.size and not np.issubdtype(x.dtype, np.integer):
        if not np.all(np.isfinite(x)) or np.any(x != np.round(x)):
            raise ValueError("labels must be finite integers")
    x = x.astype(np.int64)
    if x.min() < -1:
        raise ValueError("labels must be >= -1")
    if int(x.max()) * t.n_nodes >= _INT64_SAFE:
        raise OverflowError("runoff could overflow 64-bit integers")
    return x


def compute_runoff(t: Tree, x) -> LabeledTree:
    """W_i = max(0, X_i + sum of W over the children of i), at every node."""
    x = _as_labels(t, x)
    w = _kernels.runoff_pass(t.n_children, x)
    return LabeledTree(t, x, w)


def maxsum_oracle(t: Tree, x) -> int:
    """Root runoff as the largest label sum over rooted subtrees.

    Enumerates every connected subtree containing the root, plus the empty
    subtree (sum 0).  The subtrees at node i are i joined with, per child,
    either nothing or one subtree of that child, so their count is
    prod(1 + count(child)); trees with more than ``ORACLE_MAX_SUBTREES`` are
    refused.
    """
    x = _as_labels(t, x)
    n = t.n_nodes
    counts = np.ones(n, dtype=object)
    for i in range(n - 1, -1, -1):
        for c in t.children(i):
            counts[i] *= 1 + counts[c]
    if counts[0] > ORACLE_MAX_SUBTREES:
        raise ValueError(f"{counts[0]} rooted subtrees exceeds the oracle cap {ORACLE_MAX_SUBTREES}")
    sums: list[np.ndarray] = [None] * n
    for i in range(n - 1, -1, -1):
        acc = np.array([x[i]], dtype=np.int64)
        for c in t.children(i):
            options = np.concatenate(([0], sums[c]))
            acc = (acc[:, None] + options[None, :]).ravel()
        sums[i] = acc
    return max(0, int(sums[0].max()))


def truncated_runoff(t: Tree, x, n: int) -> int:
    """Root runoff of the tree cut after generation ``n``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    x = _as_labels(t, x)
    # breadth-first order lists generations in sequence, so the cut tree is a prefix
    k = int(np.searchsorted(t.generation, n, side="right"))
    nch = t.n_children[:k].copy()
    nch[t.generation[:k] == n] = 0
    return int(_kernels.runoff_pass(nch, x[:k])[0])


class Contribution(NamedTuple):
    flags: np.ndarray
    contributing_height: int
    height_fraction: float


def contributing_set(lt: LabeledTree) -> Contribution:
    """Nodes with positive runoff along their whole path to the root.

    ``contributing_height`` is the deepest generation holding such a node (0
    if none); the fraction divides by the tree height (at least 1).
    """
    flags, gen = _kernels.contrib_pass(lt.tree.n_children, lt.w)
    ch = int(gen[flags].max()) if flags.any() else 0
    return Contribution(flags, ch, ch / max(1, lt.tree.height))


def net_contribution_y(lt: LabeledTree, node: int = 0) -> int:
    """Y = W(node) - inflow; for X in {-1, 1} this is 1, 0 or -1."""
    inflow = sum(int(lt.w[c]) for c in lt.tree.children(node))
    return int(lt.w[node]) - inflow


def xlaw_tables(x: XLaw) -> tuple[np.ndarray, np.ndarray]:
    """Support values and cumulative probabilities for inverse-cdf draws."""
    cdf = np.cumsum(x.pmf)
    cdf[-1] = 1.0
    return x.support, cdf


def sample_labeled_bgw(beta: float, x: XLaw, rng, caps: SampleCaps = SampleCaps()) -> LabeledTree:
    """BGW tree with i.i.d. labels from ``x``, runoff already computed.

    Uses the same draw sequence as the Monte Carlo loop, so a replicate's
    summary can be reproduced node by node from its ``RngStream``.
    """
    p0, p1 = offspring_thresholds(beta)
    values, cdf = xlaw_tables(x)
    nch, labels, _, truncated = _kernels.grow_bgw(
        as_generator(rng), p0, p1, values, cdf, caps.max_nodes, caps.max_height
    )
    return compute_runoff(Tree(nch, bool(truncated)), labels)
