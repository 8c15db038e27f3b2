"""Drainage-tree samplers: critical BGW trees and exact diamond-lattice trees."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import _kernels
from .core import BinaryParams, ParameterError, RngStream


@dataclass(frozen=True)
class SampleCaps:
    """Size limits for one sampled tree.

    Critical trees are a.s. finite but have infinite mean size, so every
    sampler needs a stopping rule.  A tree hitting either cap is cut at its
    last complete generation and flagged ``truncated``.
    """

    max_nodes: int = 10**7
    max_height: int = 10**6

    def __post_init__(self):
        for name in ("max_nodes", "max_height"):
            if int(getattr(self, name)) < 1:
                raise ParameterError(name, "must be >= 1")


@dataclass(frozen=True, eq=False)
class Tree:
    """Rooted tree in breadth-first layout.

    ``n_children[i]`` is the number of children of node i; node 0 is the
    root, and the children of node i are the contiguous index block
    ``child_start[i] : child_start[i] + n_children[i]``.  Edges point towards
    the root (runoff flows child -> parent).
    """

    n_children: np.ndarray
    truncated: bool = False

    def __post_init__(self):
        nch = np.asarray(self.n_children, dtype=np.int32)
        if nch.ndim != 1 or nch.size == 0:
            raise ValueError("n_children must be a non-empty 1-D array")
        if nch.min() < 0 or nch.max() > 2:
            raise ValueError("child counts must lie in {0, 1, 2}")
        if int(nch.sum()) != nch.size - 1:
            raise ValueError("child counts do not describe a tree (sum != n_nodes - 1)")
        # breadth-first layout: every node appears after its parent
        if np.any(np.cumsum(nch)[:-1] < np.arange(1, nch.size)):
            raise ValueError("child counts are not in breadth-first layout")
        nch.setflags(write=False)
        object.__setattr__(self, "n_children", nch)

    @classmethod
    def from_parents(cls, parents, truncated: bool = False) -> "Tree":
        """Build from a parent array already in breadth-first order
        (``parents[0] == -1`` and ``parents[1:]`` nondecreasing, each < its index)."""
        parents = np.asarray(parents, dtype=np.int64)
        if parents.size == 0 or parents[0] != -1:
            raise ValueError("parents[0] must be -1 (the root)")
        rest = parents[1:]
        if rest.size and (np.any(np.diff(rest) < 0) or np.any(rest >= np.arange(1, parents.size)) or rest.min() < 0):
            raise ValueError("parent array is not in breadth-first order")
        nch = np.bincount(rest, minlength=parents.size)
        return cls(nch, truncated)

    @property
    def n_nodes(self) -> int:
        return int(self.n_children.size)

    @cached_property
    def child_start(self) -> np.ndarray:
        return 1 + np.concatenate(([0], np.cumsum(self.n_children)[:-1]))

    @cached_property
    def parent(self) -> np.ndarray:
        p = np.repeat(np.arange(self.n_nodes), self.n_children)
        return np.concatenate(([-1], p))

    @cached_property
    def generation(self) -> np.ndarray:
        return _kernels.generations(self.n_children)

    @property
    def height(self) -> int:
        return int(self.generation[-1])

    def children(self, i: int) -> range:
        s = int(self.child_start[i])
        return range(s, s + int(self.n_children[i]))


class TreeStats(NamedTuple):
    n_nodes: int
    height: int
    width_profile: np.ndarray


def tree_stats(t: Tree) -> TreeStats:
    widths = np.bincount(t.generation)
    return TreeStats(t.n_nodes, t.height, widths)


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def offspring_thresholds(beta: float) -> tuple[float, float]:
    """Cumulative offspring probabilities (P(Z=0), P(Z<=1)) for inverse-cdf draws."""
    pz = BinaryParams(0.0, beta).offspring_pmf
    return float(pz[0]), float(pz[0] + pz[1])


_NO_LABELS = (np.zeros(0, dtype=np.int64), np.zeros(0))


def sample_bgw(p: BinaryParams | float, rng, caps: SampleCaps = SampleCaps()) -> Tree:
    """Critical BGW tree with offspring law {bb', b^2 + b'^2, bb'} on {0, 1, 2}.

    ``p`` may be a ``BinaryParams`` (only beta is used) or beta itself.  At
    beta = 0 the tree is an infinite path and always comes back truncated.
    """
    beta = p.beta if isinstance(p, BinaryParams) else float(p)
    p0, p1 = offspring_thresholds(beta)
    nch, _, _, truncated = _kernels.grow_bgw(
        as_generator(rng), p0, p1, *_NO_LABELS, caps.max_nodes, caps.max_height
    )
    return Tree(nch, bool(truncated))


def sample_diamond_tree(beta: float, rng, caps: SampleCaps = SampleCaps()) -> Tree:
    """Exact drainage tree of a bottom cell on the diamond lattice.

    Offspring counts within a generation are dependent here, unlike the BGW
    approximation, but the generation widths follow Z' = Z + D - 1 with D
    distributed as the BGW offspring law.
    """
    beta = float(beta)
    if not (0.0 < beta < 1.0):
        raise ParameterError("beta", f"diamond-lattice sampler needs beta in (0, 1), got {beta!r}")
    nch, _, truncated = _kernels.grow_diamond(as_generator(rng), beta, caps.max_nodes, caps.max_height)
    return Tree(nch, bool(truncated))


def bgw_size(beta: float, rng, caps: SampleCaps = SampleCaps()) -> tuple[int, int, bool]:
    """(n_nodes, height, truncated) of one BGW tree, skipping ``Tree`` checks.

    Draws exactly the same tree as ``sample_bgw`` with the same stream.
    """
    p0, p1 = offspring_thresholds(beta)
    nch, _, height, truncated = _kernels.grow_bgw(
        as_generator(rng), p0, p1, *_NO_LABELS, caps.max_nodes, caps.max_height
    )
    return int(nch.size), int(height), bool(truncated)
