"""Shared independent oracles for the test suite.

Everything here is deliberately written from the definitions with plain
loops and dense linear algebra, independent of the tree-based paths in
the package.
"""

import numpy as np

import dyadlab as dl
from dyadlab.operators import PARAPRODUCT, _compiled


def cascade(depth, delta, seed):
    return dl.generate(dl.WeightFamilySpec.from_string(f"cascade:depth={depth},delta={delta},seed={seed}"))


def haar_leaves(grid, iv):
    out = np.zeros(grid.leaf_count)
    left, right = iv.children()
    out[grid.leaf_slice(left)] = -(2.0 ** (iv.level / 2.0))
    out[grid.leaf_slice(right)] = 2.0 ** (iv.level / 2.0)
    return out


def coefficient_lookup(op, grid):
    """The operator's coefficient tensor entries as a (L, I, J) map."""
    comp = _compiled(op, grid.depth)
    table = {}
    for level, tensor in enumerate(comp.tensors):
        for li in range(tensor.shape[0]):
            for j in range(tensor.shape[1]):
                for i in range(tensor.shape[2]):
                    L = dl.IntervalId(level, li)
                    J = dl.IntervalId(level + op.m, (li << op.m) + j)
                    I = dl.IntervalId(level + op.n, (li << op.n) + i)
                    table[(L, I, J)] = tensor[li, j, i]
    return table


def reference_matrix(op, grid):
    """Dense oracle assembled term by term from the definitions."""
    N = grid.leaf_count
    M = np.zeros((N, N))
    table = coefficient_lookup(op, grid)
    if op.family == PARAPRODUCT:
        spectrum = dl.haar_transform(op.b)
    for (L, I, J), c in table.items():
        hJ = haar_leaves(grid, J)
        if op.family == "paraproduct":
            row = np.zeros(N)
            row[grid.leaf_slice(I)] = 2.0**I.level / N  # m_I f as a functional on leaves
            M += c * spectrum.coefficient(I) * np.outer(hJ, row)
        elif op.family == "haar-shift":
            M += c * np.outer(hJ, haar_leaves(grid, I) / N)
        else:
            sym = (op.w.leaf_values / op.w.mean(L)) ** op.t
            cut = np.zeros(N)
            cut[grid.leaf_slice(L)] = 1.0
            M += c * np.outer(sym * cut * hJ, haar_leaves(grid, I) / N)
    return M


def operator_zoo(depth, seed):
    """A representative operator of each family and coefficient kind."""
    grid = dl.DyadicGrid(depth)
    rng = np.random.default_rng(seed)
    b = dl.StepFunction(grid, rng.normal(size=grid.leaf_count))
    w = cascade(depth, 0.7, seed)
    signs = dl.CoefficientFamily.random_signs(seed + 1)
    return [
        dl.OperatorSpec.paraproduct(b, 0, 0),
        dl.OperatorSpec.paraproduct(b, 2, 1, signs),
        dl.OperatorSpec.haar_shift(1, 1),
        dl.OperatorSpec.haar_shift(0, 2, signs),
        dl.OperatorSpec.t_haar_multiplier(1.0, w, 0, 0),
        dl.OperatorSpec.t_haar_multiplier(-0.5, w, 1, 2, signs),
    ]
