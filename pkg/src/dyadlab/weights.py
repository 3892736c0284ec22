"""Weights on the dyadic grid and their characteristics.

A weight is a step function with strictly positive leaf values.  The
module computes, by exact enumeration of all 2^(D+1)-1 intervals,

  * the Muckenhoupt quantity  sup_I (m_I w)(m_I w^{-1/(p-1)})^{p-1},
  * the reverse Hoelder quantity  sup_I (m_I w^p)^{1/p} / m_I w,
  * the C_s quantity  sup_I (m_I w^s)(m_I w)^{-s},
  * the dyadic doubling constant  sup_I w(parent(I)) / w(I),

plus the dyadic BMO norm of a step function, the dyadic weighted
maximal function, and seeded generators for test weight families
(multiplicative cascades and power weights |x - x0|^a).

The supremum scans are exact, never sampled; each report carries the
witness interval attaining the value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    DyadicGrid,
    IntervalId,
    StepFunction,
    _heap_levels,
    haar_coefficient_heap,
    heap_integrals,
)

__all__ = [
    "Weight",
    "CharacteristicReport",
    "WeightFamilySpec",
    "SpecParseError",
    "ap_characteristic",
    "rh_characteristic",
    "cs_characteristic",
    "doubling_constant",
    "bmo_norm",
    "weighted_maximal",
    "generate",
]


class SpecParseError(ValueError):
    """A weight/operator spec string failed to parse or validate."""


class Weight:
    """Strictly positive step function with a cached integral tree."""

    __slots__ = ("fn", "integrals")

    def __init__(self, fn: StepFunction):
        if np.any(fn.leaf_values <= 0.0):
            raise ValueError("weight leaf values must be strictly positive")
        ints = heap_integrals(fn.grid.depth, fn.leaf_values)
        ints.setflags(write=False)
        object.__setattr__(self, "fn", fn)
        object.__setattr__(self, "integrals", ints)

    def __setattr__(self, name, value):
        raise AttributeError("Weight is immutable")

    @property
    def grid(self) -> DyadicGrid:
        return self.fn.grid

    @property
    def leaf_values(self) -> np.ndarray:
        return self.fn.leaf_values

    @property
    def means(self) -> np.ndarray:
        scale = np.ldexp(1.0, _heap_levels(self.grid.depth))
        return self.integrals * scale

    @classmethod
    def constant(cls, grid: DyadicGrid, value: float = 1.0) -> "Weight":
        return cls(StepFunction.constant(grid, value))

    @classmethod
    def from_leaves(cls, depth: int, leaves) -> "Weight":
        return cls(StepFunction(DyadicGrid(depth), leaves))

    def power(self, s: float) -> "Weight":
        """Pointwise w^s, exact on leaves."""
        return Weight(StepFunction(self.grid, np.power(self.leaf_values, s)))

    def reciprocal(self) -> "Weight":
        return Weight(StepFunction(self.grid, 1.0 / self.leaf_values))

    def measure(self, iv: IntervalId) -> float:
        """w(I) = int_I w."""
        return float(self.integrals[self.grid.position(iv)])

    def mean(self, iv: IntervalId) -> float:
        return self.measure(iv) * 2.0**iv.level

    def __repr__(self) -> str:
        return f"Weight(depth={self.grid.depth})"


@dataclass(frozen=True)
class CharacteristicReport:
    """Supremum value and an interval attaining it."""

    value: float
    witness: IntervalId


def _report(grid: DyadicGrid, values: np.ndarray, offset: int = 1) -> CharacteristicReport:
    """Max and witness over heap values (`values` starts at heap slot `offset`)."""
    k = int(np.argmax(values))
    return CharacteristicReport(float(values[k]), grid.interval_at(k + offset))


def ap_characteristic(w: Weight, p: float) -> CharacteristicReport:
    """sup_I (m_I w)(m_I w^{-1/(p-1)})^{p-1} over every interval of the grid."""
    if p <= 1.0:
        raise ValueError("Muckenhoupt characteristic requires p > 1")
    mw = w.means[1:]
    ms = w.power(-1.0 / (p - 1.0)).means[1:]
    return _report(w.grid, mw * ms ** (p - 1.0))


def rh_characteristic(w: Weight, p: float) -> CharacteristicReport:
    """sup_I (m_I w^p)^{1/p} / m_I w."""
    if p <= 1.0:
        raise ValueError("reverse Hoelder characteristic requires p > 1")
    mw = w.means[1:]
    mp = w.power(p).means[1:]
    return _report(w.grid, mp ** (1.0 / p) / mw)


def cs_characteristic(w: Weight, s: float) -> CharacteristicReport:
    """sup_I (m_I w^s)(m_I w)^{-s}; equals 1 for 0 <= s <= 1 (attained at leaves).

    For s > 1 it is the s-th power of the reverse Hoelder quantity; for
    s < 0 it equals the Muckenhoupt quantity at 1 - 1/s raised to -s.
    """
    if s == 0.0:
        return CharacteristicReport(1.0, IntervalId(0, 0))
    mw = w.means[1:]
    ms = w.power(s).means[1:]
    return _report(w.grid, ms / mw**s)


def doubling_constant(w: Weight) -> CharacteristicReport:
    """sup over non-root I of w(parent(I))/w(I); always >= 2."""
    if w.grid.depth < 1:
        raise ValueError("doubling constant needs depth >= 1")
    ints = w.integrals
    pos = np.arange(2, w.grid.heap_size)
    return _report(w.grid, ints[pos >> 1] / ints[pos], offset=2)


def internal_subtree_sums(depth: int, internal_values: np.ndarray) -> np.ndarray:
    """slot p -> sum of `internal_values` over all internal nodes inside p's interval.

    Input and output are heap arrays of length 2^D (slot 0 unused).
    """
    out = internal_values.copy()
    for level in range(depth - 2, -1, -1):
        lo, hi = 1 << level, 1 << (level + 1)
        out[lo:hi] += out[2 * lo : 2 * hi : 2] + out[2 * lo + 1 : 2 * hi : 2]
    return out


def bmo_norm(b: StepFunction) -> float:
    """Dyadic BMO norm: sup_J ( |J|^{-1} sum_{I in D(J)} <b,h_I>^2 )^{1/2}.

    One bottom-up pass over subtree sums of squared Haar coefficients;
    leaf-constant b has no coefficients below the leaves, so the finite
    sum equals the full one.
    """
    depth = b.grid.depth
    sq = haar_coefficient_heap(depth, b.leaf_values) ** 2
    sums = internal_subtree_sums(depth, sq)
    scale = np.ldexp(1.0, _heap_levels(depth)[: 1 << depth])
    return float(np.sqrt(np.max(sums[1:] * scale[1:])))


def weighted_maximal(f: StepFunction, v: Weight) -> StepFunction:
    """Dyadic weighted maximal function (M_v f)(x) = max_{I contains x} m_I^v |f|.

    Top-down in O(2^D); the supremum runs over dyadic intervals only.
    """
    depth = f.grid.depth
    num = heap_integrals(depth, np.abs(f.leaf_values) * v.leaf_values)
    best = np.zeros_like(num)
    best[1:] = num[1:] / v.integrals[1:]
    for level in range(1, depth + 1):
        lo, hi = 1 << level, 1 << (level + 1)
        np.maximum(best[lo:hi], np.repeat(best[lo >> 1 : hi >> 1], 2), out=best[lo:hi])
    return StepFunction(f.grid, best[1 << depth :])


@dataclass(frozen=True)
class WeightFamilySpec:
    """Parsed description of a generated weight.

    String grammar (used by the CLI):
        cascade:depth=10,delta=0.6,seed=7
        power:depth=10,a=0.8,x0=0.5
        file:PATH
    """

    kind: str
    params: dict = field(default_factory=dict)

    @classmethod
    def from_string(cls, text: str, default_depth: int | None = None) -> "WeightFamilySpec":
        head, _, rest = text.strip().partition(":")
        kind = head.strip()
        if kind == "file":
            if not rest:
                raise SpecParseError("file spec needs a path: 'file:PATH'")
            return cls("file", {"path": rest})
        if kind not in ("cascade", "power"):
            raise SpecParseError(f"unknown weight family {kind!r}")
        params: dict = {}
        if rest:
            for item in rest.split(","):
                key, eq, val = item.partition("=")
                if not eq:
                    raise SpecParseError(f"malformed parameter {item!r} in weight spec")
                params[key.strip()] = val.strip()
        out: dict = {}
        try:
            if kind == "cascade":
                out["depth"] = int(params.pop("depth", default_depth or 0))
                out["delta"] = float(params.pop("delta"))
                out["seed"] = int(params.pop("seed", 0))
            else:
                out["depth"] = int(params.pop("depth", default_depth or 0))
                out["a"] = float(params.pop("a"))
                out["x0"] = float(params.pop("x0", 0.5))
        except KeyError as exc:
            raise SpecParseError(f"weight spec {text!r} missing parameter {exc}") from None
        except ValueError as exc:
            raise SpecParseError(f"weight spec {text!r}: {exc}") from None
        if params:
            raise SpecParseError(f"weight spec {text!r} has unknown parameters {sorted(params)}")
        if out["depth"] < 1:
            raise SpecParseError(f"weight spec {text!r} needs a depth >= 1")
        return cls(kind, out)

    def to_string(self) -> str:
        if self.kind == "file":
            return f"file:{self.params['path']}"
        items = ",".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        return f"{self.kind}:{items}"


def _cascade_weight(depth: int, delta: float, seed: int) -> Weight:
    """Multiplicative cascade: m_{I-} = m_I (1 - x_I), m_{I+} = m_I (1 + x_I),
    x_I uniform on [-delta, delta], root average 1."""
    if not 0.0 <= delta < 1.0:
        raise ValueError("cascade delta must lie in [0, 1) to keep the weight positive")
    rng = np.random.default_rng(seed)
    means = np.ones(1)
    for _ in range(depth):
        x = rng.uniform(-delta, delta, means.size)
        nxt = np.empty(2 * means.size)
        nxt[0::2] = means * (1.0 - x)
        nxt[1::2] = means * (1.0 + x)
        means = nxt
    return Weight(StepFunction(DyadicGrid(depth), means))


def _power_weight(depth: int, a: float, x0: float) -> Weight:
    """Exact cell averages of |x - x0|^a on each leaf."""
    if a <= -1.0:
        raise ValueError("power exponent must exceed -1 for integrability")
    if not 0.0 <= x0 <= 1.0:
        raise ValueError("power center must lie in [0, 1]")
    n = 1 << depth
    h = 1.0 / n
    left = np.arange(n) * h
    right = left + h

    def antiderivative_mass(lo, hi):
        # integral of |x - x0|^a over [lo, hi] when x0 is not interior
        return (np.abs(hi - x0) ** (a + 1.0) - np.abs(lo - x0) ** (a + 1.0)) / (a + 1.0)

    below = right <= x0
    above = left >= x0
    vals = np.where(
        below,
        (np.abs(left - x0) ** (a + 1.0) - np.abs(right - x0) ** (a + 1.0)) / (a + 1.0),
        np.where(
            above,
            antiderivative_mass(left, right),
            (np.abs(right - x0) ** (a + 1.0) + np.abs(left - x0) ** (a + 1.0)) / (a + 1.0),
        ),
    )
    return Weight(StepFunction(DyadicGrid(depth), vals / h))


def generate(spec: WeightFamilySpec) -> Weight:
    """Build the weight a WeightFamilySpec describes (deterministic given the seed)."""
    if spec.kind == "cascade":
        return _cascade_weight(spec.params["depth"], spec.params["delta"], spec.params["seed"])
    if spec.kind == "power":
        return _power_weight(spec.params["depth"], spec.params["a"], spec.params["x0"])
    if spec.kind == "file":
        fn = StepFunction.load(spec.params["path"])
        return Weight(fn)
    raise SpecParseError(f"unknown weight family {spec.kind!r}")
