"""Finite dyadic grids on [0,1), step functions, and Haar systems.

Everything in the package lives on the dyadic tree of a fixed depth D:
intervals are addressed by (level, index) with the interval
[index*2^-level, (index+1)*2^-level), leaves sit at level D, and a
step function is a vector of 2^D leaf values.  Tree reductions use a
heap layout: the node (level, index) occupies slot 2^level + index of a
flat array, so the children of slot p are slots 2p (left half) and
2p + 1 (right half).

The Haar function of an internal interval I is

    h_I = |I|^(-1/2) * (chi_{I+} - chi_{I-}),

positive on the right half I+.  For a positive weight v the weighted
Haar function is the unique (up to sign) function supported on I,
constant on each half, positive on I+, with v-mean zero and unit
L^2(v) norm:

    h_I^v = v(I)^(-1/2) * ( sqrt(v(I-)/v(I+)) chi_{I+}
                          - sqrt(v(I+)/v(I-)) chi_{I-} ).

It reduces to h_I when v == 1.  `decompose_haar` expresses h_I in the
two-element basis {h_I^v, chi_I/sqrt(|I|)} by solving the 2x2 system
given by matching values on the two halves.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "IntervalId",
    "DyadicGrid",
    "StepFunction",
    "HaarSpectrum",
    "WeightedHaarDecomposition",
    "haar_transform",
    "inverse_haar_transform",
    "weighted_haar",
    "decompose_haar",
    "average",
    "weighted_average",
]


@dataclass(frozen=True, order=True)
class IntervalId:
    """Address of the dyadic interval [index*2^-level, (index+1)*2^-level)."""

    level: int
    index: int

    def __post_init__(self):
        if self.level < 0:
            raise ValueError(f"negative level {self.level}")
        if not 0 <= self.index < (1 << self.level):
            raise ValueError(f"index {self.index} out of range at level {self.level}")

    @property
    def length(self) -> float:
        return 2.0 ** -self.level

    @property
    def left(self) -> float:
        return self.index * 2.0 ** -self.level

    @property
    def right(self) -> float:
        return (self.index + 1) * 2.0 ** -self.level

    def parent(self) -> "IntervalId":
        if self.level == 0:
            raise ValueError("root interval has no parent")
        return IntervalId(self.level - 1, self.index >> 1)

    def ancestor(self, generations: int) -> "IntervalId":
        """The interval `generations` levels up (0 returns self)."""
        if generations < 0 or generations > self.level:
            raise ValueError(f"no ancestor {generations} generations above level {self.level}")
        return IntervalId(self.level - generations, self.index >> generations)

    def children(self) -> tuple["IntervalId", "IntervalId"]:
        """(left half I-, right half I+)."""
        return (
            IntervalId(self.level + 1, 2 * self.index),
            IntervalId(self.level + 1, 2 * self.index + 1),
        )

    def contains(self, other: "IntervalId") -> bool:
        return other.level >= self.level and (other.index >> (other.level - self.level)) == self.index


class DyadicGrid:
    """The dyadic tree of depth D >= 1 on [0,1): 2^D leaves, 2^D - 1 internal nodes."""

    def __init__(self, depth: int):
        if depth < 1:
            raise ValueError("grid depth must be at least 1")
        self.depth = int(depth)

    @property
    def leaf_count(self) -> int:
        return 1 << self.depth

    @property
    def heap_size(self) -> int:
        return 1 << (self.depth + 1)

    def __eq__(self, other) -> bool:
        return isinstance(other, DyadicGrid) and other.depth == self.depth

    def __hash__(self) -> int:
        return hash(("DyadicGrid", self.depth))

    def __repr__(self) -> str:
        return f"DyadicGrid(depth={self.depth})"

    def position(self, iv: IntervalId) -> int:
        """Heap slot of an interval."""
        if iv.level > self.depth:
            raise ValueError(f"level {iv.level} exceeds grid depth {self.depth}")
        return (1 << iv.level) + iv.index

    def interval_at(self, position: int) -> IntervalId:
        if not 1 <= position < self.heap_size:
            raise ValueError(f"heap position {position} out of range")
        level = position.bit_length() - 1
        return IntervalId(level, position - (1 << level))

    def intervals(self, min_level: int = 0, max_level: int | None = None):
        """Yield intervals level by level, left to right."""
        top = self.depth if max_level is None else max_level
        for level in range(min_level, top + 1):
            for index in range(1 << level):
                yield IntervalId(level, index)

    def internal_intervals(self):
        return self.intervals(0, self.depth - 1)

    def leaf_slice(self, iv: IntervalId) -> slice:
        """Range of leaf indices covered by an interval."""
        span = 1 << (self.depth - iv.level)
        return slice(iv.index * span, (iv.index + 1) * span)


@lru_cache(maxsize=None)
def _heap_levels(depth: int) -> np.ndarray:
    """level of each heap slot 0..2^(D+1)-1 (slot 0 set to 0, unused)."""
    size = 1 << (depth + 1)
    pos = np.arange(size)
    pos[0] = 1
    return np.floor(np.log2(pos)).astype(np.int64)


@lru_cache(maxsize=None)
def _heap_lengths(depth: int) -> np.ndarray:
    """|I| of each heap slot."""
    return np.ldexp(1.0, -_heap_levels(depth))


def heap_integrals(depth: int, leaves: np.ndarray) -> np.ndarray:
    """Bottom-up tree of integrals: slot p holds the integral of f over its interval.

    `leaves` may be (2^D,) or (2^D, K); the heap keeps the trailing axis.
    """
    half = 1 << depth
    out = np.zeros((2 * half,) + leaves.shape[1:], dtype=np.float64)
    out[half:] = leaves * np.ldexp(1.0, -depth)
    for level in range(depth - 1, -1, -1):
        lo, hi = 1 << level, 1 << (level + 1)
        out[lo:hi] = out[2 * lo : 2 * hi : 2] + out[2 * lo + 1 : 2 * hi : 2]
    return out


def heap_means(depth: int, leaves: np.ndarray) -> np.ndarray:
    """Tree of integral averages m_I f (exact leaf arithmetic means)."""
    ints = heap_integrals(depth, leaves)
    scale = np.ldexp(1.0, _heap_levels(depth))
    if ints.ndim == 2:
        scale = scale[:, None]
    return ints * scale


def heap_mins(depth: int, leaves: np.ndarray) -> np.ndarray:
    """Tree of minima: slot p holds min of f over its interval."""
    half = 1 << depth
    out = np.empty((2 * half,) + leaves.shape[1:], dtype=np.float64)
    out[0] = 0.0
    out[half:] = leaves
    for level in range(depth - 1, -1, -1):
        lo, hi = 1 << level, 1 << (level + 1)
        out[lo:hi] = np.minimum(out[2 * lo : 2 * hi : 2], out[2 * lo + 1 : 2 * hi : 2])
    return out


def _leaf_array(f) -> np.ndarray:
    """Leaf values of a StepFunction or of a wrapper exposing `.fn` (e.g. Weight)."""
    if hasattr(f, "leaf_values"):
        return f.leaf_values
    return f.fn.leaf_values


def _grid_of(f) -> DyadicGrid:
    if hasattr(f, "grid"):
        return f.grid
    return f.fn.grid


class StepFunction:
    """Real function on [0,1) constant on each leaf of a dyadic grid.

    Immutable after construction; the leaf array is copied and marked
    read-only so values can be shared freely across threads.
    """

    __slots__ = ("grid", "leaf_values")

    def __init__(self, grid: DyadicGrid, leaf_values):
        values = np.asarray(leaf_values, dtype=np.float64).copy()
        if values.shape != (grid.leaf_count,):
            raise ValueError(f"expected {grid.leaf_count} leaf values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("leaf values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "leaf_values", values)

    def __setattr__(self, name, value):
        raise AttributeError("StepFunction is immutable")

    @classmethod
    def constant(cls, grid: DyadicGrid, value: float) -> "StepFunction":
        return cls(grid, np.full(grid.leaf_count, float(value)))

    def integral(self) -> float:
        return float(np.sum(self.leaf_values)) * 2.0 ** -self.grid.depth

    def lp_norm(self, p: float, weight=None) -> float:
        """||f||_{L^p(w dx)} by exact leafwise integration."""
        density = np.abs(self.leaf_values) ** p
        if weight is not None:
            density = density * _leaf_array(weight)
        return float(np.sum(density) * 2.0 ** -self.grid.depth) ** (1.0 / p)

    def __add__(self, other):
        return StepFunction(self.grid, self.leaf_values + _leaf_array(other))

    def __sub__(self, other):
        return StepFunction(self.grid, self.leaf_values - _leaf_array(other))

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return StepFunction(self.grid, self.leaf_values * other)
        return StepFunction(self.grid, self.leaf_values * _leaf_array(other))

    __rmul__ = __mul__

    def abs(self) -> "StepFunction":
        return StepFunction(self.grid, np.abs(self.leaf_values))

    def __repr__(self) -> str:
        return f"StepFunction(depth={self.grid.depth})"

    def to_json(self) -> dict:
        return {"depth": self.grid.depth, "leaves": [float(x) for x in self.leaf_values]}

    @classmethod
    def from_json(cls, doc: dict) -> "StepFunction":
        return cls(DyadicGrid(int(doc["depth"])), np.asarray(doc["leaves"], dtype=np.float64))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "StepFunction":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


class HaarSpectrum:
    """Global mean plus one Haar coefficient <f, h_I> per internal node.

    Coefficients are stored heap-style in a flat array of length 2^D
    (slot 0 unused, slots 1 .. 2^D - 1 are the internal nodes).
    """

    __slots__ = ("grid", "mean", "coeffs")

    def __init__(self, grid: DyadicGrid, mean: float, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=np.float64).copy()
        if coeffs.shape != (grid.leaf_count,):
            raise ValueError("coefficient array must have one slot per heap position below the leaves")
        coeffs.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "mean", float(mean))
        object.__setattr__(self, "coeffs", coeffs)

    def __setattr__(self, name, value):
        raise AttributeError("HaarSpectrum is immutable")

    def coefficient(self, iv: IntervalId) -> float:
        if iv.level >= self.grid.depth:
            raise ValueError("leaf intervals carry no Haar coefficient")
        return float(self.coeffs[self.grid.position(iv)])

    def items(self):
        for iv in self.grid.internal_intervals():
            yield iv, float(self.coeffs[self.grid.position(iv)])


def haar_coefficient_heap(depth: int, leaves: np.ndarray) -> np.ndarray:
    """Haar coefficients of all internal nodes, heap layout, in O(2^D).

    coeff(I) = |I|^(-1/2) (int_{I+} f - int_{I-} f); works on (2^D,) or (2^D, K).
    """
    ints = heap_integrals(depth, leaves)
    half = 1 << depth
    out = np.zeros((half,) + leaves.shape[1:], dtype=np.float64)
    for level in range(depth):
        lo, hi = 1 << level, 1 << (level + 1)
        diff = ints[2 * lo + 1 : 2 * hi : 2] - ints[2 * lo : 2 * hi : 2]
        out[lo:hi] = diff * 2.0 ** (level / 2.0)
    return out


def haar_synthesis_leaves(depth: int, mean, coeffs: np.ndarray) -> np.ndarray:
    """Leaf values of mean + sum_I coeffs(I) h_I, top-down in O(2^D)."""
    trailing = coeffs.shape[1:]
    vals = np.full((1,) + trailing, mean, dtype=np.float64)
    for level in range(depth):
        lo, hi = 1 << level, 1 << (level + 1)
        step = coeffs[lo:hi] * 2.0 ** (level / 2.0)
        nxt = np.empty(((hi - lo) * 2,) + trailing, dtype=np.float64)
        nxt[0::2] = vals - step
        nxt[1::2] = vals + step
        vals = nxt
    return vals


def haar_transform(f: StepFunction) -> HaarSpectrum:
    """Expand f over the Haar system: mean plus <f, h_I> for every internal I.

    Satisfies Parseval on the grid, ||f||_2^2 = mean^2 + sum coeffs^2, and is
    inverted exactly (up to roundoff) by `inverse_haar_transform`.
    """
    depth = f.grid.depth
    coeffs = haar_coefficient_heap(depth, f.leaf_values)
    mean = float(np.sum(f.leaf_values)) * 2.0 ** -depth
    return HaarSpectrum(f.grid, mean, coeffs)


def inverse_haar_transform(s: HaarSpectrum) -> StepFunction:
    return StepFunction(s.grid, haar_synthesis_leaves(s.grid.depth, s.mean, s.coeffs))


@dataclass(frozen=True)
class WeightedHaarDecomposition:
    """Coefficients (alpha, beta) with h_I = alpha h_I^v + beta chi_I/sqrt(|I|)."""

    alpha: float
    beta: float


def _weighted_haar_values(v, iv: IntervalId) -> tuple[float, float]:
    """(value on I+, value on I-) of h_I^v."""
    grid = _grid_of(v)
    if iv.level >= grid.depth:
        raise ValueError("interval has no children")
    ints = weight_integral_heap(v)
    p = grid.position(iv)
    mass_left, mass_right, mass = ints[2 * p], ints[2 * p + 1], ints[p]
    root = np.sqrt(mass)
    return float(np.sqrt(mass_left / mass_right) / root), float(-np.sqrt(mass_right / mass_left) / root)


def weight_integral_heap(v) -> np.ndarray:
    """Integral heap of a weight-like object, using its cache when it has one."""
    if hasattr(v, "integrals"):
        return v.integrals
    return heap_integrals(_grid_of(v).depth, _leaf_array(v))


def weighted_haar(v, iv: IntervalId) -> StepFunction:
    """The L^2(v)-normalized, v-mean-zero Haar function of an internal interval.

    Positive on the right half I+; equals h_I when v == 1.
    """
    grid = _grid_of(v)
    plus, minus = _weighted_haar_values(v, iv)
    leaves = np.zeros(grid.leaf_count)
    left, right = iv.children()
    leaves[grid.leaf_slice(left)] = minus
    leaves[grid.leaf_slice(right)] = plus
    return StepFunction(grid, leaves)


def decompose_haar(v, iv: IntervalId) -> WeightedHaarDecomposition:
    """Solve h_I = alpha h_I^v + beta chi_I/sqrt(|I|) on the two halves of I.

    The pair obeys |alpha| <= sqrt(m_I v) and |beta| <= |Delta_I v| / m_I v.
    """
    plus, minus = _weighted_haar_values(v, iv)
    hl = 2.0 ** (iv.level / 2.0)  # |I|^(-1/2)
    alpha = 2.0 * hl / (plus - minus)
    beta = -alpha * (plus + minus) / (2.0 * hl)
    return WeightedHaarDecomposition(alpha=float(alpha), beta=float(beta))


def average(f: StepFunction, iv: IntervalId) -> float:
    """m_I f, the integral average of f over I."""
    ints = heap_integrals(f.grid.depth, f.leaf_values)
    return float(ints[f.grid.position(iv)]) * 2.0**iv.level


def weighted_average(f: StepFunction, v, iv: IntervalId) -> float:
    """m_I^v f = (int_I f v) / v(I)."""
    grid = _grid_of(v)
    num = heap_integrals(grid.depth, f.leaf_values * _leaf_array(v))
    den = weight_integral_heap(v)
    p = grid.position(iv)
    return float(num[p] / den[p])
