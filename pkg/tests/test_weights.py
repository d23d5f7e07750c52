import itertools
from collections import Counter
from fractions import Fraction

import pytest

from chainsaw import weights as W


def _det(rows):
    a = [[Fraction(x) for x in r] for r in rows]
    n, det = len(a), Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if a[i][c]), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for i in range(c + 1, n):
            f = a[i][c] / a[c][c]
            a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return det


@pytest.mark.parametrize("kind,rank,det", [("A", 1, 2), ("A", 4, 5), ("D", 4, 4), ("D", 5, 4),
                                           ("E", 6, 3), ("E", 7, 2), ("E", 8, 1)])
def test_cartan_determinants(kind, rank, det):
    assert _det(W.cartan_matrix(kind, rank)) == det


def test_unknown_root_system():
    with pytest.raises(W.WeightError):
        W.cartan_matrix("G", 2)


def test_affine_cartan():
    assert W.affine_cartan(1) == ((0,),)
    assert W.affine_cartan(2) == ((2, -2), (-2, 2))
    c3 = W.affine_cartan(3)
    assert c3 == ((2, -1, -1), (-1, 2, -1), (-1, -1, 2))
    assert all(sum(r) == 0 for r in W.affine_cartan(5))


@pytest.mark.parametrize("kind,rank", [("A", 2), ("A", 3), ("D", 4)])
def test_dominant_representative(kind, rank):
    rs = W.root_system(kind, rank)
    for k in (1, 2):
        box = range(-3, 4) if rank < 4 else range(-2, 3)
        for lam in itertools.product(box, repeat=rank):
            rep = W.dominant_representative(lam, k, rs)
            assert W.is_level_dominant(rep, k, rs)
            assert W.dominant_representative(rep, k, rs) == rep


def test_orbit_dimensions():
    a1 = W.root_system("A", 1)
    assert W.orbit_dim((1,), a1) == 2
    assert W.orbit_dim((1, 1), W.root_system("A", 2)) == 4
    with pytest.raises(W.WeightError):
        W.orbit_dim((-1,), a1)
    assert W.conv_dim((1,), (1,), (0,), a1) == 2


def test_nakajima_weight_and_dominance():
    assert W.nakajima_weight((2, 1, 1), 2, 3) == (0, 1, 1)
    assert W.nakajima_dominance((2, 1, 1), 2, 3)
    assert not W.nakajima_dominance((0, 2), 1, 2)
    with pytest.raises(W.WeightError):
        W.nakajima_dominance((-1, 0), 1, 2)
    with pytest.raises(W.WeightError):
        W.nakajima_inequalities((1, 1), 1, 3)


def _partitions(n):
    # p(n) by the standard recurrence, independent of the character code
    p = [1] + [0] * n
    for part in range(1, n + 1):
        for m in range(part, n + 1):
            p[m] += p[m - part]
    return p


def test_basic_module_of_affine_sl2():
    p = _partitions(8)
    for n in range(9):
        assert W.multiplicity_at((1, 0), (n, n)) == p[n]


def test_truncation_is_falsy():
    lam = W.AffineWeight(1, (0,))
    nu = W.AffineWeight(1, (0,), Fraction(-9))
    got = W.weight_multiplicity(lam, nu, depth_cap=6)
    assert isinstance(got, W.Truncated)
    assert not got
    assert "truncated" in str(got)


def test_weight_outside_root_lattice():
    lam = W.AffineWeight(1, (0,))
    assert W.weight_multiplicity(lam, W.AffineWeight(1, (1,))) == 0


@pytest.mark.parametrize("k,N", [(2, 2), (3, 2), (2, 3), (3, 3), (4, 2), (2, 4)])
def test_level_rank_transpose_matches_brute_force(k, N):
    table = W.transpose_oracle(k, N)
    images = set()
    for b in itertools.product(range(N + 1), repeat=k):
        if sum(b) != N:
            continue
        P = W.conjugate_partition(W.partition_encoding(list(b[1:])), N)
        if sum(P) % k:
            with pytest.raises(W.WeightError):
                W.level_rank_transpose(b, N)
            continue
        labels, j = W.level_rank_transpose(b, N)
        assert sum(j) == 0 and sum(labels) == k
        res = Counter(x % k for x in P)
        assert table[tuple(res[r] for r in range(k))] == [labels]
        assert labels not in images
        images.add(labels)


def test_conjugate_partition():
    assert tuple(W.conjugate_partition([3, 1])) == (2, 1, 1)
    assert tuple(W.conjugate_partition([2, 2], 3)) == (2, 2, 0)


@pytest.mark.parametrize("N,k", [(1, 2), (2, 1), (2, 2), (2, 3), (3, 2), (3, 3)])
def test_natural_alpha_bounds(N, k):
    for v in itertools.product(range(3), repeat=k):
        if not W.nakajima_dominance(v, N, k):
            continue
        lma = W.lambda_mu_alpha(v, N, k)
        assert lma.integral
        assert all(0 <= x <= v[0] for x in lma.alpha)
        if k == 1:
            assert lma.alpha == (v[0],) * N


def test_goodness_sides_agree():
    for N, k in ((2, 2), (2, 3), (3, 2)):
        for v in itertools.product(range(3), repeat=k):
            if W.nakajima_dominance(v, N, k):
                assert W.is_good(v, N, k) == W.is_good_sl_k_side(v, N, k), (v, N, k)


def test_rank_one_goodness_disagrees():
    # rank one: every dominant v gives a nonzero sl(k) multiplicity, but L(lambda) for sl(1) is trivial
    assert W.is_good_sl_k_side((1, 1), 1, 2)
    assert not W.is_good((1, 1), 1, 2)


def test_prediction_table():
    lma = W.lambda_mu_alpha((1, 1), 2, 2)
    t = W.mult_predictions(lma.lam, lma.alpha)
    assert {b: m for b, m in t.entries.items()} == {(0, 0): 1, (0, 1): 0, (1, 0): 1, (1, 1): 1}
    assert "beta" in t.to_text()
    assert t.to_json()["entries"][0] == {"beta": [0, 0], "m": 1}


def test_bad_inputs():
    with pytest.raises(W.WeightError):
        W.lambda_mu_alpha((0, 2), 1, 2)
    with pytest.raises(W.WeightError):
        W.mult_predictions(W.AffineWeight(1, (2,)), (1, 1))
    with pytest.raises(W.WeightError):
        W.mult_predictions(W.AffineWeight(1, (0,)), (Fraction(1, 2), 0))
    with pytest.raises(W.WeightError):
        W.level_rank_transpose((1, 2), 2)


def test_energy_forms():
    lam = (1, 1)
    assert W.finite_norm(lam, "killing") == W.finite_norm(lam, "basic") * 2 * 3
