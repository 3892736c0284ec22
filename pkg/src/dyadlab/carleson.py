"""Carleson sequences on the dyadic tree and their intensities.

A nonnegative sequence {lambda_I} indexed by the internal nodes is
v-Carleson with intensity B when

    sum_{I in D(J)} lambda_I  <=  B * v(J)          for every J,

and the intensity is the optimal such B.  On the finite grid the
optimum is the exact supremum of subtree-sum / v-mass quotients, found
by one bottom-up pass; reports carry the witness interval.

Sequence families built from a weight w (with reciprocal u = w^{-1},
averages m_I, jumps Delta_I g = m_{I+}g - m_{I-}g):

    oscillation_sequence(w, s):
        (m_I w * m_I u)^s |I| ( (Delta_I w / m_I w)^2 + (Delta_I u / m_I u)^2 )
    reciprocal_jump_sequence(w):
        |I| (m_I w)^2 (Delta_I u)^2
    weighted_coefficient_sequence(b, w, s):
        <b,h_I>^2 (m_I w * m_I u)^s

`oscillation_intensity_constant(s)` is the pinned constant for which
the oscillation sequence is Carleson with intensity at most
constant * A2(w)^s: 72/(s - 2 s^2) for s < 1/2, and 576 once s >= 1/4.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import DyadicGrid, IntervalId, StepFunction, heap_mins
from .weights import Weight, internal_subtree_sums
from .core import _heap_levels, haar_coefficient_heap

__all__ = [
    "IndexedSequence",
    "IntensityReport",
    "intensity",
    "combine",
    "oscillation_sequence",
    "oscillation_intensity_constant",
    "reciprocal_jump_sequence",
    "weighted_coefficient_sequence",
    "transfer_to_weighted",
    "weighted_carleson_pairing",
]


class IndexedSequence:
    """Nonnegative values on internal nodes (levels 0..D-1), heap layout.

    Absent entries are zero; the value array has length 2^D with slot 0
    unused.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: DyadicGrid, values):
        vals = np.asarray(values, dtype=np.float64).copy()
        if vals.shape != (grid.leaf_count,):
            raise ValueError(f"expected heap array of length {grid.leaf_count}")
        if not np.all(np.isfinite(vals[1:])):
            raise ValueError("sequence values must be finite")
        if np.any(vals[1:] < 0.0):
            raise ValueError("sequence values must be nonnegative")
        vals[0] = 0.0
        vals.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", vals)

    def __setattr__(self, name, value):
        raise AttributeError("IndexedSequence is immutable")

    @classmethod
    def zeros(cls, grid: DyadicGrid) -> "IndexedSequence":
        return cls(grid, np.zeros(grid.leaf_count))

    @classmethod
    def from_entries(cls, grid: DyadicGrid, entries: dict[IntervalId, float]) -> "IndexedSequence":
        vals = np.zeros(grid.leaf_count)
        for iv, value in entries.items():
            if iv.level >= grid.depth:
                raise ValueError(f"{iv} is a leaf; sequences live on internal nodes")
            vals[grid.position(iv)] = value
        return cls(grid, vals)

    def value(self, iv: IntervalId) -> float:
        if iv.level >= self.grid.depth:
            return 0.0
        return float(self.values[self.grid.position(iv)])

    def __mul__(self, c: float) -> "IndexedSequence":
        return IndexedSequence(self.grid, self.values * c)

    __rmul__ = __mul__

    def to_json(self) -> dict:
        entries = []
        for iv in self.grid.internal_intervals():
            v = self.values[self.grid.position(iv)]
            if v != 0.0:
                entries.append({"level": iv.level, "index": iv.index, "value": float(v)})
        return {"depth": self.grid.depth, "entries": entries}

    @classmethod
    def from_json(cls, doc: dict) -> "IndexedSequence":
        grid = DyadicGrid(int(doc["depth"]))
        return cls.from_entries(
            grid,
            {IntervalId(int(e["level"]), int(e["index"])): float(e["value"]) for e in doc["entries"]},
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)


@dataclass(frozen=True)
class IntensityReport:
    intensity: float
    witness: IntervalId


def intensity(seq: IndexedSequence, v: Weight | None = None) -> IntensityReport:
    """Exact optimal Carleson constant of {lambda_I} against v (Lebesgue if None)."""
    grid = seq.grid
    sums = internal_subtree_sums(grid.depth, seq.values)
    if v is None:
        masses = np.ldexp(1.0, -_heap_levels(grid.depth)[: grid.leaf_count])
    else:
        if v.grid != grid:
            raise ValueError("weight and sequence live on different grids")
        masses = v.integrals[: grid.leaf_count]
    quot = sums[1:] / masses[1:]
    k = int(np.argmax(quot))
    return IntensityReport(float(quot[k]), grid.interval_at(k + 1))


def combine(a: IndexedSequence, b: IndexedSequence, mode: str, c: float = 1.0, d: float = 1.0) -> IndexedSequence:
    """Pointwise combination preserving the Carleson property.

    mode "linear":         c*lambda + d*gamma       (intensity <= cA + dB)
    mode "geometric-mean": sqrt(lambda*gamma)        (intensity <= sqrt(AB))
    mode "square-sum":     (c*sqrt(lambda) + d*sqrt(gamma))^2
                                                     (intensity <= 2c^2 A + 2d^2 B)
    """
    if a.grid != b.grid:
        raise ValueError("sequences live on different grids")
    if mode == "linear":
        vals = c * a.values + d * b.values
    elif mode == "geometric-mean":
        vals = np.sqrt(a.values * b.values)
    elif mode == "square-sum":
        vals = (c * np.sqrt(a.values) + d * np.sqrt(b.values)) ** 2
    else:
        raise ValueError(f"unknown combination mode {mode!r}")
    return IndexedSequence(a.grid, vals)


def _internal_jump_data(w: Weight):
    """(means, jumps) of w over internal nodes, heap arrays of length 2^D."""
    means = w.means
    half = w.grid.leaf_count
    jumps = np.zeros(half)
    jumps[1:] = means[3 : 2 * half : 2] - means[2 : 2 * half : 2]
    return means[:half], jumps


def oscillation_sequence(w: Weight, s: float) -> IndexedSequence:
    """(m_I w m_I w^{-1})^s |I| ((Delta_I w / m_I w)^2 + (Delta_I w^{-1} / m_I w^{-1})^2)."""
    if s <= 0.0:
        raise ValueError("oscillation sequence needs a positive exponent")
    grid = w.grid
    mw, dw = _internal_jump_data(w)
    mu, du = _internal_jump_data(w.reciprocal())
    lengths = np.ldexp(1.0, -_heap_levels(grid.depth)[: grid.leaf_count])
    vals = np.zeros(grid.leaf_count)
    bracket = (dw[1:] / mw[1:]) ** 2 + (du[1:] / mu[1:]) ** 2
    vals[1:] = (mw[1:] * mu[1:]) ** s * lengths[1:] * bracket
    return IndexedSequence(grid, vals)


def oscillation_intensity_constant(s: float) -> float:
    """Pinned intensity constant for oscillation_sequence(w, s) against A2(w)^s."""
    if s <= 0.0:
        raise ValueError("exponent must be positive")
    best = np.inf
    if s < 0.5:
        best = 72.0 / (s - 2.0 * s * s)
    if s >= 0.25:
        best = min(best, 576.0)
    return float(best)


def reciprocal_jump_sequence(w: Weight) -> IndexedSequence:
    """|I| (m_I w)^2 (Delta_I w^{-1})^2; Carleson with intensity <= 288 A2(w)^2."""
    grid = w.grid
    mw, _ = _internal_jump_data(w)
    _, du = _internal_jump_data(w.reciprocal())
    lengths = np.ldexp(1.0, -_heap_levels(grid.depth)[: grid.leaf_count])
    vals = np.zeros(grid.leaf_count)
    vals[1:] = lengths[1:] * mw[1:] ** 2 * du[1:] ** 2
    return IndexedSequence(grid, vals)


def weighted_coefficient_sequence(b: StepFunction, w: Weight, s: float) -> IndexedSequence:
    """<b,h_I>^2 (m_I w m_I w^{-1})^s; intensity <= bmo_norm(b)^2 A2(w)^s."""
    if b.grid != w.grid:
        raise ValueError("b and w live on different grids")
    grid = w.grid
    coeffs = haar_coefficient_heap(grid.depth, b.leaf_values)
    mw, _ = _internal_jump_data(w)
    mu, _ = _internal_jump_data(w.reciprocal())
    vals = np.zeros(grid.leaf_count)
    vals[1:] = coeffs[1:] ** 2 * (mw[1:] * mu[1:]) ** s
    return IndexedSequence(grid, vals)


def transfer_to_weighted(seq: IndexedSequence, v: Weight) -> IndexedSequence:
    """{lambda_I / m_I(v^{-1})}: plain Carleson intensity B becomes v-Carleson <= 4B."""
    if v.grid != seq.grid:
        raise ValueError("weight and sequence live on different grids")
    recip_means = v.reciprocal().means[: seq.grid.leaf_count]
    vals = seq.values.copy()
    vals[1:] = vals[1:] / recip_means[1:]
    return IndexedSequence(seq.grid, vals)


def weighted_carleson_pairing(seq: IndexedSequence, F: StepFunction, v: Weight) -> float:
    """sum_L lambda_L * inf_L F for nonnegative F, via tree min-propagation.

    The value never exceeds intensity(seq, v) * int F v; both sides are
    evaluated and a violation (beyond roundoff) raises, as a tripwire
    for inconsistent inputs.
    """
    if np.any(F.leaf_values < 0.0):
        raise ValueError("pairing requires a nonnegative function")
    if F.grid != seq.grid or v.grid != seq.grid:
        raise ValueError("mismatched grids")
    mins = heap_mins(seq.grid.depth, F.leaf_values)
    lhs = float(np.sum(seq.values[1:] * mins[1 : seq.grid.leaf_count]))
    bound = intensity(seq, v)
    rhs = bound.intensity * float(np.sum(F.leaf_values * v.leaf_values)) * 2.0 ** -seq.grid.depth
    if lhs > rhs * (1.0 + 1e-9) + 1e-12:
        raise AssertionError(
            f"Carleson pairing exceeded its intensity bound: {lhs} > {rhs} (witness {bound.witness})"
        )
    return lhs
