"""Parameter types shared by every sampler and solver.

``BinaryParams`` holds the two-point model (X = +1 w.p. alpha, -1 otherwise;
left drainage probability beta).  ``XLaw`` is a general left-continuous
integer law on {-1, 0, 1, ..., K}.  ``RngStream`` names one reproducible
random stream as a (master_seed, stream_index) pair.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

PMF_TOL = 1e-12
_U64 = 2**64


class ParameterError(ValueError):
    """Invalid user-supplied parameter; ``field`` names the offending input."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _check_probability(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise ParameterError(name, f"must lie in [0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class BinaryParams:
    alpha: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", _check_probability("alpha", self.alpha))
        object.__setattr__(self, "beta", _check_probability("beta", self.beta))

    @property
    def alpha_bar(self) -> float:
        return 1.0 - self.alpha

    @property
    def beta_bar(self) -> float:
        return 1.0 - self.beta

    @property
    def beta_zero(self) -> bool:
        """True when the drainage tree degenerates to a single infinite path."""
        return self.beta == 0.0

    @property
    def offspring_pmf(self) -> np.ndarray:
        """P(Z = 0), P(Z = 1), P(Z = 2) for the drainage-tree offspring count."""
        bb = self.beta * self.beta_bar
        return np.array([bb, self.beta**2 + self.beta_bar**2, bb])


def validate_binary(p: BinaryParams) -> BinaryParams:
    """Return ``p`` with beta folded onto [0, 1/2].

    beta and 1 - beta give mirror-image trees, and every closed form is stated
    for beta <= 1/2.  Use ``p.beta_zero`` to pick between the geometric
    (beta = 0) solution and the quadratic-pgf machinery.
    """
    p = BinaryParams(p.alpha, p.beta)  # re-runs range checks on dict-built input
    if p.beta > 0.5:
        return BinaryParams(p.alpha, 1.0 - p.beta)
    return p


@dataclass(frozen=True)
class XLaw:
    """Finite law of X on {-1, 0, 1, ..., K}.

    ``probs`` maps value -> probability.  Zero-probability entries are dropped;
    the total must be within ``PMF_TOL`` of one (no silent renormalisation).
    """

    probs: Mapping[int, float]
    _coeffs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        clean: dict[int, float] = {}
        for k, v in dict(self.probs).items():
            key = int(k)
            if key != float(k):
                raise ParameterError("x_pmf", f"support value {k!r} is not an integer")
            if key < -1:
                raise ParameterError("x_pmf", f"support value {key} < -1 breaks left continuity")
            v = float(v)
            if not (v >= 0.0) or math.isinf(v):
                raise ParameterError("x_pmf", f"P(X={key}) = {v!r} is not a probability")
            if v > 0.0:
                clean[key] = clean.get(key, 0.0) + v
        if not clean:
            raise ParameterError("x_pmf", "empty support")
        total = math.fsum(clean.values())
        if abs(total - 1.0) > PMF_TOL:
            raise ParameterError("x_pmf", f"probabilities sum to {total!r}, not 1")
        ordered = dict(sorted(clean.items()))
        object.__setattr__(self, "probs", ordered)
        # coefficient k of eta(t) = E t^(X+1) is P(X = k - 1)
        coeffs = np.zeros(max(ordered) + 2)
        for k, v in ordered.items():
            coeffs[k + 1] = v
        object.__setattr__(self, "_coeffs", coeffs)

    @classmethod
    def binary(cls, alpha: float) -> "XLaw":
        return binary_as_xlaw(BinaryParams(alpha, 0.5))

    @classmethod
    def from_json(cls, text: str | Mapping) -> "XLaw":
        data = json.loads(text) if isinstance(text, str) else text
        return cls({int(k): float(v) for k, v in data.items()})

    def to_json_dict(self) -> dict[str, float]:
        return {str(k): v for k, v in self.probs.items()}

    @property
    def support(self) -> np.ndarray:
        return np.array(list(self.probs), dtype=np.int64)

    @property
    def pmf(self) -> np.ndarray:
        return np.array(list(self.probs.values()))

    @property
    def eta_coeffs(self) -> np.ndarray:
        """Ascending polynomial coefficients of eta(t) = E t^(X+1)."""
        return self._coeffs.copy()

    @property
    def mean(self) -> float:
        return math.fsum(k * v for k, v in self.probs.items())

    @property
    def var(self) -> float:
        m = self.mean
        return math.fsum((k - m) ** 2 * v for k, v in self.probs.items())

    @property
    def alpha(self) -> float:
        """P(X >= 0)."""
        return math.fsum(v for k, v in self.probs.items() if k >= 0)

    @property
    def max_value(self) -> int:
        return max(self.probs)

    def eta(self, t: float) -> float:
        return xlaw_eta(self, t)


def binary_as_xlaw(p: BinaryParams) -> XLaw:
    return XLaw({1: p.alpha, -1: 1.0 - p.alpha})


def xlaw_eta(x: XLaw, t: float) -> float:
    """eta(t) = E t^(X+1) by Horner's rule, for t in [0, 1]."""
    t = float(t)
    if not (0.0 <= t <= 1.0):
        raise ParameterError("t", f"eta is evaluated on [0, 1], got {t!r}")
    acc = 0.0
    for c in x._coeffs[::-1]:
        acc = acc * t + c
    return acc


@dataclass(frozen=True)
class RngStream:
    """One reproducible stream: Philox keyed by (master_seed, stream_index).

    Philox is counter-based, so distinct keys give independent streams without
    any shared generator state.  Monte Carlo replicate r uses stream_index r.
    """

    master_seed: int
    stream_index: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_index"):
            v = getattr(self, name)
            if not (0 <= int(v) < _U64):
                raise ParameterError(name, f"must be a 64-bit unsigned integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=[self.master_seed, self.stream_index]))

    def substream(self, index: int) -> "RngStream":
        return RngStream(self.master_seed, index)


class ResourceError(RuntimeError):
    """A computation would exceed available memory or a configured cap."""
