import itertools

import pytest

from support import random_case

from chainsaw import equivariant as E
from chainsaw import quiver as Q
from chainsaw.linalg import Mat, inverse, make_rng


@pytest.mark.parametrize("seed", range(6))
def test_full_power_is_identity(seed):
    m = random_case(Q.CHAINSAW if seed % 2 else Q.DENTED, seed)
    k = 1 + seed % 3
    assert E.gamma_act(m, k, k * m.shape.N) == m


@pytest.mark.parametrize("seed", range(6))
def test_action_preserves_dented_relations(seed):
    m = random_case(Q.DENTED, 40 + seed)
    assert Q.satisfies_relations(E.gamma_act(m, 2))


def test_generic_module_is_not_fixed():
    m = random_case(Q.CHAINSAW, 3, lo=1)
    assert E.find_fixing_gauge(m, 2) is None


@pytest.mark.parametrize("kind", [Q.FIXED, Q.RIFT])
@pytest.mark.parametrize("seed", range(6))
def test_canonical_gauge_fixes_assembled_module(kind, seed):
    gm = random_case(kind, 70 + seed, lo=0, hi=2)
    m = E.assemble(gm)
    g = E.canonical_gauge(gm)
    assert E.check_fixing_gauge(m, g, gm.shape.k)


@pytest.mark.parametrize("seed", range(6))
def test_eigendecompose_inverts_assemble(seed):
    gm = random_case(Q.FIXED, 90 + seed, lo=0, hi=2)
    k = gm.shape.k
    m = E.assemble(gm)
    h = Q.random_gauge(m.dims, make_rng(seed))
    g = E.canonical_gauge(gm)
    g = {v: h[v] @ g[v] @ inverse(h[v]) for v in g}
    m2 = Q.gauge_act(h, m)
    got, grading = E.eigendecompose(m2, g, k)
    assert got.dims == gm.dims
    assert Q.satisfies_relations(got)
    assert E.assemble(got, grading) == m2


def test_found_gauge_on_stable_fixed_module():
    sh = Q.QuiverShape(Q.FIXED, 2, 2)
    dims = {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1}
    gm = Q.random_module(sh, dims, 0, stable=True)
    m = E.assemble(gm)
    g = E.find_fixing_gauge(m, 2)
    assert g is not None
    got, _ = E.eigendecompose(m, g, 2)
    assert got.dims == gm.dims


def test_non_diagonalizable_gauge():
    sh = Q.QuiverShape(Q.CHAINSAW, 1)
    m = Q.zero_module(sh, Q.DimVector(sh, [2]))
    g = {0: Mat.from_rows([[1, 1], [0, 1]])}
    with pytest.raises(E.NonDiagonalizable):
        E.eigendecompose(m, g, 2)


def test_framing_exponents():
    sh = Q.QuiverShape(Q.CHAINSAW, 3)
    assert E.framing_exponents(sh, 2) == {0: 0, 1: 5, 2: 4}
    assert E.framing_exponents(sh, 2, twist=False) == {0: 0, 1: 0, 2: 0}


def test_dim_tilde_and_chain():
    d = Q.DimVector(Q.QuiverShape(Q.CHAINSAW, 2), [3, 1])
    dt = E.dim_tilde_of(d, 3)
    assert dt[(0, 0)] == 3 and dt[(1, 0)] == 1
    assert all(dt[(l, r)] == 3 for l in range(2) for r in (1, 2))
    assert E.chain_sequence(dt) == [3, 3, 3, 3, 3]
    assert E.nonempty_chain_check(dt)


def test_nonempty_chain_rejects_increase():
    sh = Q.QuiverShape(Q.FIXED, 2, 2)
    dt = Q.DimVector(sh, {(0, 0): 1, (1, 0): 0, (0, 1): 2, (1, 1): 0})
    assert not E.nonempty_chain_check(dt)


def test_admissible_check():
    sh = Q.QuiverShape(Q.RIFT, 2, 2)
    good = Q.DimVector(sh, {(0, 0): 1, (1, 0): 3, (2, 0): 1, (0, 1): 2, (1, 1): 2, (2, 1): 2})
    assert E.admissible_check(good)
    bad = Q.DimVector(sh, {(0, 0): 1, (1, 0): 3, (2, 0): 1, (0, 1): 2, (1, 1): 1, (2, 1): 2})
    assert not E.admissible_check(bad)


def test_hermite_normal_form():
    assert E.hermite_normal_form([[2, 4], [1, 3]]) == [[1, 1], [0, 2]]
    assert E.hermite_normal_form([[2, 4], [1, 2]]) == [[1, 2]]


def test_defect_lattice_membership():
    N, k = 2, 2
    sh = Q.QuiverShape(Q.FIXED, N, k)
    for vals in itertools.product(range(3), repeat=len(sh.vertices())):
        dt = Q.DimVector(sh, list(vals))
        in_lattice = any(E.dim_tilde_of(Q.DimVector(Q.QuiverShape(Q.CHAINSAW, N), list(d)), k) == dt
                         for d in itertools.product(range(3), repeat=N))
        if in_lattice:
            assert E.defect_class(dt).is_zero()
    lone = Q.DimVector(sh, {(0, 0): 1, (1, 0): 0, (0, 1): 0, (1, 1): 0})
    assert not E.defect_class(lone).is_zero()


def test_graded_shape_round_trip():
    for kind in (Q.CHAINSAW, Q.DENTED):
        sh = Q.QuiverShape(kind, 2)
        assert E.plain_shape(E.graded_shape(sh, 3)) == sh
    with pytest.raises(Q.QuiverDataError):
        E.graded_shape(Q.QuiverShape(Q.RIFT, 2, 2), 2)
