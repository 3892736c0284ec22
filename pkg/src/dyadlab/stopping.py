"""Stopping-time partitions driven by weight oscillation, and sequence lifting.

Given weights (u, v), a root interval L, a generation bound m and a
threshold order q, `build_stopping` emits the maximal subintervals K of
L selected top-down by

    (i)  |Delta_K u|/m_K u + |Delta_K v|/m_K v >= 1/q,   or
    (ii) |K| = 2^-m |L|,

recursing into the children otherwise.  Criterion (i) is tested first,
and L itself may be the whole family.  The members partition L, are at
most m generations deep, and their weight averages stay within a factor
e of the averages on L whenever q >= m + 2.

`lift_sequence` aggregates a Carleson sequence over each family,
nu_L = sum_{K in family(L)} nu_K; for families at most m generations
deep the lift multiplies the intensity by at most m + 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .carleson import IndexedSequence, intensity
from .core import DyadicGrid, IntervalId
from .weights import Weight

__all__ = ["StoppingFamily", "build_stopping", "lift_sequence"]


@dataclass(frozen=True)
class StoppingFamily:
    """A stopping partition of `root`, members tagged by the criterion that fired."""

    root: IntervalId
    m: int
    threshold_order: int
    members: tuple[IntervalId, ...]
    criteria: tuple[int, ...]

    def members_by_criterion(self, which: int) -> tuple[IntervalId, ...]:
        return tuple(k for k, c in zip(self.members, self.criteria) if c == which)

    def to_json(self) -> dict:
        return {
            "root": {"level": self.root.level, "index": self.root.index},
            "m": self.m,
            "threshold_order": self.threshold_order,
            "members": [
                {"level": k.level, "index": k.index, "criterion": c}
                for k, c in zip(self.members, self.criteria)
            ],
        }


def build_stopping(u: Weight, v: Weight, L: IntervalId, m: int, order: int) -> StoppingFamily:
    """Top-down stopping family under L; see the module docstring for the criteria."""
    grid = u.grid
    if v.grid != grid:
        raise ValueError("u and v live on different grids")
    if m < 0:
        raise ValueError("generation bound m must be nonnegative")
    if L.level + m > grid.depth:
        raise ValueError(f"stopping depth {m} below level {L.level} exceeds grid depth {grid.depth}")
    if order < 1:
        raise ValueError("threshold order must be at least 1")
    mu = u.means
    mv = v.means
    threshold = 1.0 / order
    bottom = L.level + m
    members: list[IntervalId] = []
    criteria: list[int] = []
    stack = [grid.position(L)]
    while stack:
        p = stack.pop()
        level = p.bit_length() - 1
        oscillates = False
        if level < grid.depth:
            osc = abs(mu[2 * p + 1] - mu[2 * p]) / mu[p] + abs(mv[2 * p + 1] - mv[2 * p]) / mv[p]
            oscillates = osc >= threshold
        if oscillates:
            members.append(grid.interval_at(p))
            criteria.append(1)
        elif level == bottom:
            members.append(grid.interval_at(p))
            criteria.append(2)
        else:
            stack.append(2 * p + 1)
            stack.append(2 * p)
    return StoppingFamily(
        root=L,
        m=m,
        threshold_order=order,
        members=tuple(members),
        criteria=tuple(criteria),
    )


def lift_sequence(
    seq: IndexedSequence,
    builder: Callable[[IntervalId], StoppingFamily],
    w: Weight,
    m: int,
) -> IndexedSequence:
    """Aggregate seq over builder(L) for every L with level(L) + m <= depth.

    Entries for deeper L are zero; leaf members contribute zero.  The
    result is checked against the (m+1)-fold intensity bound as a
    tripwire (the bound requires the builder to produce partitions at
    most m generations deep).
    """
    grid = seq.grid
    if w.grid != grid:
        raise ValueError("weight and sequence live on different grids")
    if m < 0:
        raise ValueError("generation bound m must be nonnegative")
    vals = np.zeros(grid.leaf_count)
    top = grid.depth - m
    for level in range(min(top, grid.depth - 1) + 1):
        for index in range(1 << level):
            L = IntervalId(level, index)
            family = builder(L)
            vals[grid.position(L)] = sum(seq.value(k) for k in family.members)
    lifted = IndexedSequence(grid, vals)
    base = intensity(seq, w).intensity
    got = intensity(lifted, w).intensity
    if got > (m + 1) * base * (1.0 + 1e-9) + 1e-12:
        raise AssertionError(
            f"lifted intensity {got} exceeds ({m}+1) * {base}; builder is not an m-stopping partition"
        )
    return lifted
