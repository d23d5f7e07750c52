import pytest

from support import random_case

from chainsaw import maps
from chainsaw import quiver as Q
from chainsaw.linalg import Mat, make_rng


@pytest.mark.parametrize("seed", range(6))
def test_rotate_shifts_dimensions(seed):
    m = random_case(Q.CHAINSAW, seed, N_max=4)
    r = maps.rotate(m)
    assert r.dims == maps.rotate_dims(m.dims)
    assert Q.satisfies_relations(r)


def test_rotate_wrong_shape():
    with pytest.raises(Q.QuiverDataError):
        maps.rotate(random_case(Q.DENTED, 0))


@pytest.mark.parametrize("seed", range(6))
def test_dented_rift_identification(seed):
    m = random_case(Q.DENTED, seed)
    r = maps.dented_to_rift(m)
    assert r.shape.kind == Q.RIFT
    assert r.shape.k == 1
    assert maps.rift_to_dented(r) == m


@pytest.mark.parametrize("seed", range(6))
def test_psi_k_at_k1_is_blowdown(seed):
    m = random_case(Q.DENTED, 100 + seed)
    via_rift = maps.fixed_to_chainsaw(maps.psi_k(maps.dented_to_rift(m)))
    assert via_rift == maps.blowdown_pi(m)


@pytest.mark.parametrize("seed", range(6))
def test_direct_image_at_k1(seed):
    m = random_case(Q.FIXED, 200 + seed, k_max=1)
    if m.shape.N >= 2:
        assert maps.psi_direct_image(m) == maps.fixed_to_chainsaw(m)
    else:
        # N = 1: B_0 becomes the full cycle, which is the single B arrow
        assert maps.psi_direct_image(m).arrows["B"][0] == m.arrows["B"][(0, 0)]


def test_pi_k_is_composite():
    m = random_case(Q.RIFT, 17)
    assert maps.pi_k(m) == maps.psi_direct_image(maps.psi_k(m))


def test_blowdown_dimensions():
    sh = Q.QuiverShape(Q.DENTED, 3)
    m = Q.random_module(sh, [2, 1, 3, 2], 0)
    out = maps.blowdown_pi(m)
    assert out.dims.as_list() == [2, 1, 3]


def test_open_piece_rejects_singular_chain():
    rng = make_rng(1)
    n = maps.random_nakajima((1, 1), 2, 2, rng)
    rift = maps.phi_inverse_generator(n)
    broken = rift.with_arrows(B={(0, 0): Mat(1, 1)})
    with pytest.raises(maps.NotOnOpenPiece):
        maps.phi_open(broken)


def test_open_piece_rejects_nonconstant_columns():
    sh = Q.QuiverShape(Q.RIFT, 2, 1)
    m = Q.random_module(sh, {(0, 0): 1, (1, 0): 2, (2, 0): 1}, 0)
    with pytest.raises(Q.QuiverDataError):
        maps.phi_open(m)


def test_random_nakajima_relations_and_errors():
    rng = make_rng(2)
    n = maps.random_nakajima((2, 1, 1), 2, 3, rng)
    assert all(r.is_zero() for r in n.moment_residuals())
    with pytest.raises(maps.InfeasibleDims):
        maps.random_nakajima((1, 1), 2, 3, rng)


def test_open_piece_residuals_vanish_everywhere():
    # recorded convention: A''_{r+1}B''_r - B''_{r-1}A''_r + [r = 0] p''q'' = 0 at every r
    seen = 0
    for seed in range(40):
        m = random_case(Q.RIFT, 7000 + seed, lo=0, hi=2)
        try:
            n = maps.phi_open(m)
        except (maps.NotOnOpenPiece, Q.QuiverDataError):
            continue
        seen += 1
        assert all(r.is_zero() for r in n.moment_residuals())
    assert seen >= 10


@pytest.mark.parametrize("k", [1, 2, pytest.param(3, marks=pytest.mark.xfail(
    strict=True, reason="B_0 e and q_0 e keep a zeta_k^-2 factor that no gauge removes when k >= 3"))])
@pytest.mark.parametrize("seed", range(4))
def test_blowdown_commutes_with_cyclic_action(k, seed):
    from chainsaw import equivariant as E
    m = random_case(Q.DENTED, 8000 + seed, lo=1, hi=2)
    N = m.shape.N
    before = maps.blowdown_pi(E.gamma_act(m, k))
    after = E.gamma_act(maps.blowdown_pi(m), k)
    assert E.gauge_equivalent(before, after, N, k) is not None
