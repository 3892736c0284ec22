"""The three dyadic operator families of complexity (m, n), matrix-free.

For each interval L (levels 0 .. D - max(m,n) - 1 on a depth-D grid),
input intervals I run over the n-th generation below L and output
intervals J over the m-th generation, with coefficients bounded by
sqrt(|I| |J|)/|L|:

    paraproduct:        sum c^L_{I,J} (m_I f) <b, h_I> h_J
    Haar shift:         sum c^L_{I,J} <f, h_I> h_J
    t-Haar multiplier:  sum c^L_{I,J} (w(x)/m_L w)^t <f, h_I> h_J

All three are linear in f and evaluated exactly by per-level tensor
contractions against precomputed Haar data; adjoints are taken w.r.t.
the unweighted L^2 pairing.  Operator norms on L^2(w) are estimated by
power iteration on A*A with A = M_{w^{1/2}} T M_{w^{-1/2}}, which only
produces certified lower bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (
    DyadicGrid,
    IntervalId,
    StepFunction,
    haar_coefficient_heap,
    haar_synthesis_leaves,
    heap_integrals,
    heap_means,
)
from .weights import SpecParseError, Weight

__all__ = [
    "CoefficientFamily",
    "OperatorSpec",
    "NormEstimate",
    "apply",
    "apply_adjoint",
    "apply_leaves",
    "apply_adjoint_leaves",
    "weighted_norm",
    "generation_coefficient_sum",
    "generation_jump_sum",
    "generation_bmo_sum",
]

PARAPRODUCT = "paraproduct"
HAAR_SHIFT = "haar-shift"
T_HAAR_MULTIPLIER = "t-haar-multiplier"


class CoefficientFamily:
    """Produces the coefficients c^L_{I,J}, all bounded by sqrt(|I||J|)/|L|.

    kinds: "maximal" (every coefficient at the bound, positive sign),
    "random-signs" (maximal magnitude, deterministic per-triple sign
    drawn from a seed), "custom" (a callable (L, I, J) -> float,
    validated against the size bound).
    """

    def __init__(self, kind: str, seed: int | None = None, func: Callable | None = None):
        if kind not in ("maximal", "random-signs", "custom"):
            raise ValueError(f"unknown coefficient family {kind!r}")
        if kind == "random-signs" and seed is None:
            raise ValueError("random-signs family needs a seed")
        if kind == "custom" and func is None:
            raise ValueError("custom family needs a coefficient function")
        self.kind = kind
        self.seed = seed
        self.func = func

    @classmethod
    def maximal(cls) -> "CoefficientFamily":
        return cls("maximal")

    @classmethod
    def random_signs(cls, seed: int) -> "CoefficientFamily":
        return cls("random-signs", seed=int(seed))

    @classmethod
    def custom(cls, func: Callable) -> "CoefficientFamily":
        return cls("custom", func=func)

    @classmethod
    def from_string(cls, text: str) -> "CoefficientFamily":
        head, _, rest = text.strip().partition(":")
        if head == "maximal" and not rest:
            return cls.maximal()
        if head in ("signs", "random-signs"):
            key, eq, val = rest.partition("=")
            if key.strip() != "seed" or not eq:
                raise SpecParseError(f"sign family spec {text!r} must look like 'signs:seed=N'")
            try:
                return cls.random_signs(int(val))
            except ValueError:
                raise SpecParseError(f"bad seed in {text!r}") from None
        raise SpecParseError(f"unknown coefficient family {text!r}")

    def to_string(self) -> str:
        if self.kind == "maximal":
            return "maximal"
        if self.kind == "random-signs":
            return f"signs:seed={self.seed}"
        return "custom"


@dataclass
class OperatorSpec:
    """One operator: family, complexity (m, n), coefficients, and its data (b, t, w)."""

    family: str
    m: int
    n: int
    coeffs: CoefficientFamily
    b: StepFunction | None = None
    t: float = 0.0
    w: Weight | None = None
    _compiled: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.family not in (PARAPRODUCT, HAAR_SHIFT, T_HAAR_MULTIPLIER):
            raise ValueError(f"unknown operator family {self.family!r}")
        if self.m < 0 or self.n < 0:
            raise ValueError("complexity (m, n) must be nonnegative")
        if self.family == PARAPRODUCT and self.b is None:
            raise ValueError("paraproduct needs the function b")
        if self.family == T_HAAR_MULTIPLIER and self.w is None:
            raise ValueError("t-Haar multiplier needs its weight")

    @classmethod
    def paraproduct(cls, b: StepFunction, m: int, n: int, coeffs: CoefficientFamily | None = None):
        return cls(PARAPRODUCT, m, n, coeffs or CoefficientFamily.maximal(), b=b)

    @classmethod
    def haar_shift(cls, m: int, n: int, coeffs: CoefficientFamily | None = None):
        return cls(HAAR_SHIFT, m, n, coeffs or CoefficientFamily.maximal())

    @classmethod
    def t_haar_multiplier(cls, t: float, w: Weight, m: int, n: int, coeffs: CoefficientFamily | None = None):
        return cls(T_HAAR_MULTIPLIER, m, n, coeffs or CoefficientFamily.maximal(), t=float(t), w=w)

    @classmethod
    def from_string(cls, text: str, *, b: StepFunction | None = None, w: Weight | None = None):
        """Parse 'para:m=1,n=2,coeffs=maximal' / 'shift:m=0,n=1,coeffs=signs:seed=3'
        / 'tmult:t=0.5,m=1,n=1,coeffs=maximal'; b and w are supplied by the caller."""
        head, _, rest = text.strip().partition(":")
        params: dict[str, str] = {}
        if rest:
            for item in rest.split(","):
                key, eq, val = item.partition("=")
                if not eq:
                    raise SpecParseError(f"malformed parameter {item!r} in operator spec")
                params[key.strip()] = val.strip()
        try:
            m = int(params.pop("m", 0))
            n = int(params.pop("n", 0))
            coeffs = CoefficientFamily.from_string(params.pop("coeffs", "maximal"))
            if head == "para":
                if b is None:
                    raise SpecParseError("paraproduct spec needs b (give a --b spec)")
                op = cls.paraproduct(b, m, n, coeffs)
            elif head == "shift":
                op = cls.haar_shift(m, n, coeffs)
            elif head == "tmult":
                t = float(params.pop("t"))
                if w is None:
                    raise SpecParseError("t-Haar multiplier spec needs a symbol weight")
                op = cls.t_haar_multiplier(t, w, m, n, coeffs)
            else:
                raise SpecParseError(f"unknown operator family {head!r}")
        except KeyError as exc:
            raise SpecParseError(f"operator spec {text!r} missing parameter {exc}") from None
        except ValueError as exc:
            raise SpecParseError(f"operator spec {text!r}: {exc}") from None
        if params:
            raise SpecParseError(f"operator spec {text!r} has unknown parameters {sorted(params)}")
        return op

    def describe(self) -> str:
        head = {PARAPRODUCT: "para", HAAR_SHIFT: "shift", T_HAAR_MULTIPLIER: "tmult"}[self.family]
        bits = []
        if self.family == T_HAAR_MULTIPLIER:
            bits.append(f"t={self.t}")
        bits += [f"m={self.m}", f"n={self.n}", f"coeffs={self.coeffs.to_string()}"]
        return head + ":" + ",".join(bits)


class _Compiled:
    """Per-depth precomputation: coefficient tensors, symbol arrays, b data."""

    def __init__(self, spec: OperatorSpec, depth: int):
        self.depth = depth
        self.max_level = depth - max(spec.m, spec.n) - 1
        if self.max_level < 0:
            raise ValueError(f"complexity ({spec.m}, {spec.n}) too large for depth {depth}")
        m, n = spec.m, spec.n
        bound = 2.0 ** (-(m + n) / 2.0)
        rng = None
        if spec.coeffs.kind == "random-signs":
            rng = np.random.default_rng(spec.coeffs.seed)
        self.tensors: list[np.ndarray] = []
        for level in range(self.max_level + 1):
            shape = (1 << level, 1 << m, 1 << n)
            if spec.coeffs.kind == "maximal":
                tensor = np.full(shape, bound)
            elif spec.coeffs.kind == "random-signs":
                tensor = bound * (2.0 * rng.integers(0, 2, size=shape) - 1.0)
            else:
                tensor = np.empty(shape)
                for li in range(shape[0]):
                    L = IntervalId(level, li)
                    for j in range(shape[1]):
                        J = IntervalId(level + m, (li << m) + j)
                        for i in range(shape[2]):
                            I = IntervalId(level + n, (li << n) + i)
                            c = float(spec.coeffs.func(L, I, J))
                            if abs(c) > bound * (1.0 + 1e-12):
                                raise ValueError(
                                    f"coefficient {c} at ({L}, {I}, {J}) exceeds sqrt(|I||J|)/|L| = {bound}"
                                )
                            tensor[li, j, i] = c
            tensor.setflags(write=False)
            self.tensors.append(tensor)
        self.b_coeffs = None
        if spec.family == PARAPRODUCT:
            if spec.b.grid.depth != depth:
                raise ValueError("b lives on a different grid")
            self.b_coeffs = haar_coefficient_heap(depth, spec.b.leaf_values)
        self.symbols: list[np.ndarray] | None = None
        if spec.family == T_HAAR_MULTIPLIER:
            if spec.w.grid.depth != depth:
                raise ValueError("multiplier weight lives on a different grid")
            wl = spec.w.leaf_values
            means = spec.w.means
            self.symbols = []
            for level in range(self.max_level + 1):
                span = 1 << (depth - level)
                block_means = np.repeat(means[1 << level : 1 << (level + 1)], span)
                sym = (wl / block_means) ** spec.t
                sym.setflags(write=False)
                self.symbols.append(sym)


def _compiled(spec: OperatorSpec, depth: int) -> _Compiled:
    comp = spec._compiled.get(depth)
    if comp is None:
        comp = _Compiled(spec, depth)
        spec._compiled[depth] = comp
    return comp


def _level_slice(level: int) -> slice:
    return slice(1 << level, 1 << (level + 1))


def _single_level_synthesis(depth: int, level: int, coeffs: np.ndarray) -> np.ndarray:
    """Leaves of sum_J coeffs[J] h_J for J running over one level."""
    span = 1 << (depth - level)
    rep = np.repeat(coeffs * 2.0 ** (level / 2.0), span, axis=0)
    pattern = np.tile(np.r_[np.full(span // 2, -1.0), np.ones(span // 2)], 1 << level)
    return rep * pattern[:, None]


def _single_level_analysis(depth: int, level: int, leaves: np.ndarray) -> np.ndarray:
    """Haar coefficients <q, h_J> of one level, for leaf matrix q."""
    half = 1 << (depth - level - 1)
    blocks = leaves.reshape(1 << level, 2, half, -1).sum(axis=2) * 2.0**-depth
    return (blocks[:, 1] - blocks[:, 0]) * 2.0 ** (level / 2.0)


def apply_leaves(op: OperatorSpec, depth: int, x: np.ndarray) -> np.ndarray:
    """Apply the operator to leaf values; x is (2^D,) or (2^D, K) for a batch."""
    comp = _compiled(op, depth)
    single = x.ndim == 1
    X = x[:, None] if single else x
    K = X.shape[1]
    m, n = op.m, op.n
    if op.family == T_HAAR_MULTIPLIER:
        in_coeffs = haar_coefficient_heap(depth, X)
        out = np.zeros_like(X, dtype=np.float64)
        for level, tensor in enumerate(comp.tensors):
            a = in_coeffs[_level_slice(level + n)]
            if not a.any():  # zero coefficients contribute exactly nothing
                continue
            a = a.reshape(1 << level, 1 << n, K)
            d = np.einsum("lji,lik->ljk", tensor, a).reshape(1 << (level + m), K)
            out += _single_level_synthesis(depth, level + m, d) * comp.symbols[level][:, None]
    else:
        if op.family == PARAPRODUCT:
            means = heap_means(depth, X)
        else:
            in_coeffs = haar_coefficient_heap(depth, X)
        out_coeffs = np.zeros((1 << depth, K))
        for level, tensor in enumerate(comp.tensors):
            sl = _level_slice(level + n)
            if op.family == PARAPRODUCT:
                a = means[sl] * comp.b_coeffs[sl][:, None]
            else:
                a = in_coeffs[sl]
            if not a.any():
                continue
            a = a.reshape(1 << level, 1 << n, K)
            d = np.einsum("lji,lik->ljk", tensor, a).reshape(1 << (level + m), K)
            out_coeffs[_level_slice(level + m)] += d
        out = haar_synthesis_leaves(depth, 0.0, out_coeffs)
    return out[:, 0] if single else out


def apply_adjoint_leaves(op: OperatorSpec, depth: int, y: np.ndarray) -> np.ndarray:
    """Adjoint w.r.t. the unweighted L^2 pairing, on leaf values."""
    comp = _compiled(op, depth)
    single = y.ndim == 1
    Y = y[:, None] if single else y
    K = Y.shape[1]
    m, n = op.m, op.n
    if op.family == PARAPRODUCT:
        g_coeffs = haar_coefficient_heap(depth, Y)
        out = np.zeros_like(Y, dtype=np.float64)
        for level, tensor in enumerate(comp.tensors):
            e = g_coeffs[_level_slice(level + m)].reshape(1 << level, 1 << m, K)
            a = np.einsum("lji,ljk->lik", tensor, e).reshape(1 << (level + n), K)
            scale = comp.b_coeffs[_level_slice(level + n)][:, None] * 2.0 ** (level + n)
            out += np.repeat(a * scale, 1 << (depth - level - n), axis=0)
    elif op.family == HAAR_SHIFT:
        g_coeffs = haar_coefficient_heap(depth, Y)
        out_coeffs = np.zeros((1 << depth, K))
        for level, tensor in enumerate(comp.tensors):
            e = g_coeffs[_level_slice(level + m)].reshape(1 << level, 1 << m, K)
            a = np.einsum("lji,ljk->lik", tensor, e).reshape(1 << (level + n), K)
            out_coeffs[_level_slice(level + n)] += a
        out = haar_synthesis_leaves(depth, 0.0, out_coeffs)
    else:
        out_coeffs = np.zeros((1 << depth, K))
        for level, tensor in enumerate(comp.tensors):
            q = Y * comp.symbols[level][:, None]
            e = _single_level_analysis(depth, level + m, q).reshape(1 << level, 1 << m, K)
            a = np.einsum("lji,ljk->lik", tensor, e).reshape(1 << (level + n), K)
            out_coeffs[_level_slice(level + n)] += a
        out = haar_synthesis_leaves(depth, 0.0, out_coeffs)
    return out[:, 0] if single else out


def _check_grid(op: OperatorSpec, grid: DyadicGrid) -> None:
    if op.family == PARAPRODUCT and op.b.grid != grid:
        raise ValueError("operator data and input live on different grids")
    if op.family == T_HAAR_MULTIPLIER and op.w.grid != grid:
        raise ValueError("operator data and input live on different grids")


def apply(op: OperatorSpec, f: StepFunction) -> StepFunction:
    """Evaluate the truncated double sum exactly; linear in f."""
    _check_grid(op, f.grid)
    return StepFunction(f.grid, apply_leaves(op, f.grid.depth, f.leaf_values))


def apply_adjoint(op: OperatorSpec, g: StepFunction) -> StepFunction:
    """The transpose: <apply(op, f), g> = <f, apply_adjoint(op, g)> for all f, g."""
    _check_grid(op, g.grid)
    return StepFunction(g.grid, apply_adjoint_leaves(op, g.grid.depth, g.leaf_values))


@dataclass(frozen=True)
class NormEstimate:
    """Power-iteration output; `value` is a lower bound on the true norm."""

    value: float
    iterations: int
    residual: float
    converged: bool


def weighted_norm(
    op: OperatorSpec,
    w: Weight,
    tol: float = 1e-8,
    max_iter: int = 500,
    seed: int = 0,
) -> NormEstimate:
    """Estimate ||op||_{L^2(w) -> L^2(w)} as the top singular value of
    M_{w^{1/2}} op M_{w^{-1/2}}, by power iteration on A*A.

    Starts from a seeded random vector with entries in (-1, 1); if the
    relative change still exceeds tol halfway through the budget the
    start vector is redrawn once.  Pass w == 1 for the plain L^2 norm.
    """
    if tol <= 0.0:
        raise ValueError("tolerance must be positive")
    depth = w.grid.depth
    _check_grid(op, w.grid)
    sqw = np.sqrt(w.leaf_values)
    inv_sqw = 1.0 / sqw
    rng = np.random.default_rng(seed)
    v = rng.uniform(-1.0, 1.0, size=1 << depth)
    v /= np.linalg.norm(v)
    best = 0.0
    sigma_prev = np.inf
    residual = np.inf
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        u = sqw * apply_leaves(op, depth, inv_sqw * v)
        sigma = float(np.linalg.norm(u))
        best = max(best, sigma)
        z = inv_sqw * apply_adjoint_leaves(op, depth, sqw * u)
        nz = float(np.linalg.norm(z))
        if nz == 0.0:
            residual = 0.0
            converged = True
            break
        v = z / nz
        residual = abs(sigma - sigma_prev) / sigma if sigma > 0.0 else 0.0
        if residual < tol:
            converged = True
            break
        if iterations == max_iter // 2:
            v = rng.uniform(-1.0, 1.0, size=1 << depth)
            v /= np.linalg.norm(v)
            sigma_prev = np.inf
        else:
            sigma_prev = sigma
    return NormEstimate(value=best, iterations=iterations, residual=float(residual), converged=converged)


def _generation_positions(grid: DyadicGrid, L: IntervalId, generations: int) -> slice:
    """Heap slots of the intervals `generations` levels below L."""
    level = L.level + generations
    start = (1 << level) + (L.index << generations)
    return slice(start, start + (1 << generations))


def generation_coefficient_sum(v: Weight, phi: StepFunction, L: IntervalId, m: int) -> float:
    """sum over J one m-generation below L of |<phi, h_J^v>_v| sqrt(m_J v) sqrt(|J|/|L|).

    Bounded by (sum_J <phi,h_J^v>_v^2)^{1/2} (m_L v)^{1/2} via Cauchy-Schwarz.
    """
    grid = v.grid
    level = L.level + m
    if level >= grid.depth:
        raise ValueError("generation reaches the leaves; no Haar functions there")
    sl = _generation_positions(grid, L, m)
    phiv = heap_integrals(grid.depth, phi.leaf_values * v.leaf_values)
    vi = v.integrals
    left_mass = vi[2 * sl.start : 2 * sl.stop : 2]
    right_mass = vi[2 * sl.start + 1 : 2 * sl.stop : 2]
    pair = (
        np.sqrt(left_mass / right_mass) * phiv[2 * sl.start + 1 : 2 * sl.stop : 2]
        - np.sqrt(right_mass / left_mass) * phiv[2 * sl.start : 2 * sl.stop : 2]
    ) / np.sqrt(vi[sl])
    mjv = vi[sl] * 2.0**level
    return float(np.sum(np.abs(pair) * np.sqrt(mjv)) * 2.0 ** (-m / 2.0))


def generation_jump_sum(v: Weight, phi: StepFunction, L: IntervalId, m: int) -> float:
    """sum over J of (|Delta_J v| / m_J v) m_J(|phi| v) |J| / sqrt(|L|)."""
    grid = v.grid
    level = L.level + m
    if level >= grid.depth:
        raise ValueError("generation reaches the leaves; jumps undefined there")
    sl = _generation_positions(grid, L, m)
    means = v.means
    jumps = means[2 * sl.start + 1 : 2 * sl.stop : 2] - means[2 * sl.start : 2 * sl.stop : 2]
    phiv = heap_integrals(grid.depth, np.abs(phi.leaf_values) * v.leaf_values)
    mj_phiv = phiv[sl] * 2.0**level
    geom = 2.0**-level * 2.0 ** (L.level / 2.0)
    return float(np.sum(np.abs(jumps) / means[sl] * mj_phiv) * geom)


def generation_bmo_sum(b: StepFunction, w: Weight, phi: StepFunction, L: IntervalId, n: int) -> float:
    """sum over I one n-generation below L of |<b,h_I>| m_I(|phi| w) sqrt(|I|/|L|)."""
    grid = w.grid
    level = L.level + n
    if level >= grid.depth:
        raise ValueError("generation reaches the leaves; no coefficients there")
    sl = _generation_positions(grid, L, n)
    coeffs = haar_coefficient_heap(grid.depth, b.leaf_values)
    phiw = heap_integrals(grid.depth, np.abs(phi.leaf_values) * w.leaf_values)
    mi_phiw = phiw[sl] * 2.0**level
    return float(np.sum(np.abs(coeffs[sl]) * mi_phiw) * 2.0 ** (-n / 2.0))
