from fractions import Fraction
from math import gcd

import pytest

from chainsaw.cyclotomic import CyclotomicField, Cyclo, cyclotomic_poly, rationalize
from chainsaw.linalg import Mat, inverse


def _mobius(n):
    out, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            out = -out
        p += 1
    return -out if n > 1 else out


def test_known_polynomials():
    assert list(cyclotomic_poly(1)) == [-1, 1]
    assert list(cyclotomic_poly(4)) == [1, 0, 1]
    assert list(cyclotomic_poly(6)) == [1, -1, 1]
    assert list(cyclotomic_poly(12)) == [1, 0, -1, 0, 1]


@pytest.mark.parametrize("n", range(1, 19))
def test_zeta_has_exact_order(n):
    F = CyclotomicField(n)
    z = F.zeta()
    assert z ** n == F.elem([1])
    for d in range(1, n):
        assert z ** d != F.elem([1])


@pytest.mark.parametrize("n", range(1, 19))
def test_primitive_root_sum_is_mobius(n):
    F = CyclotomicField(n)
    total = F.elem([0])
    for j in range(n):
        if gcd(j, n) == 1:
            total = total + F.zeta(j)
    assert total.is_rational()
    assert total.to_fraction() == _mobius(n)


def test_field_inverse():
    F = CyclotomicField(9)
    x = F.elem([1, 2, 0, -1])
    assert x * x.inverse() == F.elem([1])
    with pytest.raises(ZeroDivisionError):
        F.elem([0]).inverse()


def test_root_of_divisor_order():
    F = CyclotomicField(12)
    assert F.root(4) ** 4 == F.elem([1])
    assert F.root(4) ** 2 == F.elem([-1])
    with pytest.raises(ValueError):
        F.root(5)


def test_mixing_fields_rejected():
    with pytest.raises(ValueError):
        CyclotomicField(3).zeta() + CyclotomicField(4).zeta()


def test_matrices_over_the_field():
    F = CyclotomicField(6)
    z = F.zeta()
    m = Mat.from_rows([[z, 1], [0, z]])
    mi = inverse(m)
    assert m @ mi == Mat.identity(2)
    # z + z^-1 = 1 for a primitive sixth root
    assert (z + z.inverse()).to_fraction() == 1


def test_rationalize():
    F = CyclotomicField(5)
    z = F.zeta()
    m = Mat.from_rows([[z ** 5, Fraction(1, 2)]])
    assert rationalize(m) == Mat.from_rows([[1, Fraction(1, 2)]])
    with pytest.raises(ValueError):
        rationalize(Mat.from_rows([[z]]))


def test_cyclo_equals_rational():
    F = CyclotomicField(7)
    assert Cyclo(F, [3]) == 3
    assert hash(Cyclo(F, [3])) == hash(Fraction(3))
