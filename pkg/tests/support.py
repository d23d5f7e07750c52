"""Shared generators for the test-suite."""

import random

from chainsaw.linalg import Mat
from chainsaw.quiver import (CHAINSAW, DENTED, FIXED, RIFT, DimVector, QuiverModule,
                             QuiverShape, random_module)


def random_dims(shape, rng, lo=0, hi=3):
    vs = shape.vertices()
    d = {v: rng.randint(lo, hi) for v in vs}
    if shape.kind == DENTED:
        d[shape.N] = d[0]
    if shape.kind == RIFT:
        for r in range(shape.k):
            d[(shape.N, r)] = d[(0, r)]
    return DimVector(shape, d)


def random_case(kind, seed, N_max=3, k_max=3, lo=0, hi=3, stable=False):
    """(shape, module) drawn deterministically from `seed`."""
    rng = random.Random(seed)
    N = rng.randint(1, N_max)
    k = rng.randint(1, k_max) if kind in (FIXED, RIFT) else 1
    shape = QuiverShape(kind, N, k)
    dims = random_dims(shape, rng, lo, hi)
    return random_module(shape, dims, seed, stable=stable)


def direct_sum_zero(m, extra):
    """m plus a zero module of dimension `extra` (vertex -> int); relations are preserved."""
    sh = m.shape
    dims = {v: m.dims[v] + extra.get(v, 0) for v in sh.vertices()}
    arrows = {}
    for a in sh.arrows():
        x = m.arrows[a.name][a.index]
        r = extra.get(a.target, 0) if a.target is not None else 0
        c = extra.get(a.source, 0) if a.source is not None else 0
        rows = [list(x.row(i)) + [0] * c for i in range(x.rows)]
        rows += [[0] * (x.cols + c) for _ in range(r)]
        arrows.setdefault(a.name, {})[a.index] = Mat(x.rows + r, x.cols + c,
                                                     [v for row in rows for v in row])
    return QuiverModule(sh, dims, arrows)


def plain_shapes():
    return [QuiverShape(CHAINSAW, N) for N in (1, 2, 3)]
