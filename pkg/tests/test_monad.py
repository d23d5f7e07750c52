import pytest

from support import random_case

from chainsaw import monad as M
from chainsaw import quiver as Q
from chainsaw.linalg import Mat, make_rng, random_matrix


def _poly(mat, *syms):
    return M.Poly.term(mat, *syms)


def test_poly_products_commute():
    one = Mat.identity(1)
    x, y = _poly(one, "x"), _poly(one, "y")
    s = x + y
    sq = s @ s
    assert sq == _poly(one, ("x", 2)) + _poly(one.scale(2), "x", "y") + _poly(one, ("y", 2))
    assert (x @ y - y @ x).is_zero()


def test_poly_shape_checks():
    with pytest.raises(ValueError):
        _poly(Mat(1, 2), "x") + _poly(Mat(2, 1), "x")
    with pytest.raises(ValueError):
        _poly(Mat(1, 2), "x") @ _poly(Mat(1, 2), "x")


def test_polymat_degree_audit():
    a = M.Summand("A", 1, (0,))
    b = M.Summand("B", 1, (1,))
    good = M.PolyMat([b], [a], {(0, 0): _poly(Mat.identity(1), "t")})
    assert good.grading_violations({"t": (1,)}) == []
    bad = M.PolyMat([b], [a], {(0, 0): _poly(Mat.identity(1), "t", "t")})
    assert bad.grading_violations({"t": (1,)})
    mon = M.Monad(bad, M.PolyMat([b], [b]), {"t": (1,)}, "toy")
    with pytest.raises(M.GradingError):
        mon.audit()


@pytest.mark.parametrize("seed", range(5))
def test_adhm_audit_and_residual(seed):
    rng = make_rng(seed)
    d, n = 1 + seed % 3, 1 + seed % 2
    a, b = random_matrix(rng, d, d), random_matrix(rng, d, d)
    p, q = random_matrix(rng, d, n), random_matrix(rng, n, d)
    mon = M.build_adhm_monad(a, b, p, q)
    assert mon.audit()
    dc = M.verify_complex(mon.C, mon.D, mon.symbol_degrees)
    assert (dc - M.adhm_expected(a, b, p, q)).is_zero()


def test_adhm_shape_errors():
    with pytest.raises(ValueError):
        M.build_adhm_monad(Mat(2, 2), Mat(3, 3), Mat(2, 1), Mat(1, 2))


@pytest.mark.parametrize("seed", range(6))
def test_stack_and_weighted_audit(seed):
    m = random_case(Q.CHAINSAW, 300 + seed, lo=1)
    for build in (M.build_stack_monad, M.build_weighted_monad):
        mon = build(m)
        assert mon.audit()
        assert M.verify_complex(mon.C, mon.D, mon.symbol_degrees).is_zero()


@pytest.mark.parametrize("seed", range(6))
def test_literal_weighted_signs(seed):
    """With the literal p-sign, D.C = 2 z0 p_{l+1} q_l on the relation locus."""
    m = random_case(Q.CHAINSAW, 400 + seed, lo=1)
    mon = M.build_weighted_monad(m, literal_signs=True)
    dc = M.verify_complex(mon.C, mon.D, mon.symbol_degrees)
    N = m.shape.N
    pq = [m.arrows["p"][(l + 1) % N] @ m.arrows["q"][l] for l in range(N)]
    assert dc.is_zero() == all(x.is_zero() for x in pq)
    expected = M.weighted_expected(m)
    for rel in m.shape.relations():
        l = rel.index
        x = pq[l].scale(2)
        if l == 0:
            expected.add(0, N - 1, _poly(x, ("z0", 2)))
        else:
            expected.add(l, l - 1, _poly(x, "z0"))
    assert (dc - expected).is_zero()


def test_monad_dump_mentions_blocks():
    m = random_case(Q.CHAINSAW, 1, lo=1)
    text = M.build_stack_monad(m).dump()
    assert text.startswith("# stack monad")
    assert "## C" in text and "## D" in text


@pytest.mark.parametrize("seed", range(6))
def test_blowup_consistent_holds(seed):
    m = random_case(Q.DENTED, 500 + seed, lo=0, hi=2)
    data = M.build_blowup_data(m, "consistent")
    res = M.verify_blowup_identities(data)
    assert res.all_zero()
    assert res.middle.is_zero()


def test_literal_blowup_signs_fail():
    """The literal sign pattern does not give a complex; recorded as a known discrepancy."""
    failures = 0
    for seed in range(6):
        m = random_case(Q.DENTED, 600 + seed, lo=1, hi=2)
        res = M.verify_blowup_identities(M.build_blowup_data(m, "literal"))
        failures += not res.all_zero()
    assert failures == 6


def test_blowup_detects_broken_relation():
    sh = Q.QuiverShape(Q.DENTED, 2)
    m = Q.random_module(sh, [1, 2, 1], 3)
    rng = make_rng(0)
    bad = m.with_arrows(B={0: m.arrows["B"][0] + random_matrix(rng, 2, 1, 3)})
    assert not Q.satisfies_relations(bad)
    res = M.verify_blowup_identities(M.build_blowup_data(bad, "consistent"))
    assert not res.all_zero()


def test_blowup_unknown_convention():
    m = random_case(Q.DENTED, 0)
    with pytest.raises(ValueError):
        M.build_blowup_data(m, "mirror")


def test_section_basis():
    assert M.section_basis(0, 2) == [(0, 0)]
    assert sorted(M.section_basis(5, 2)) == [(0, 5), (1, 3), (2, 1)]
    assert M.section_basis(-1, 2) == []


def test_wrong_shape_rejected():
    with pytest.raises(Q.QuiverDataError):
        M.build_stack_monad(random_case(Q.DENTED, 0))
