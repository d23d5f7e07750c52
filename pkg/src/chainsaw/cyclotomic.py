"""Exact arithmetic in the cyclotomic field Q(ζ_n)."""

from fractions import Fraction
from functools import lru_cache


def _poly_divmod(a, b):
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and any(a):
        c = a[-1] / b[-1]
        s = len(a) - len(b)
        q[s] = c
        for i, x in enumerate(b):
            a[s + i] -= c * x
        a.pop()
        while a and a[-1] == 0:
            a.pop()
    return q, a


def _trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


@lru_cache(maxsize=None)
def cyclotomic_poly(n):
    """Coefficients (low degree first) of the n-th cyclotomic polynomial."""
    num = [Fraction(-1)] + [Fraction(0)] * (n - 1) + [Fraction(1)]
    for d in range(1, n):
        if n % d == 0:
            num, rem = _poly_divmod(num, cyclotomic_poly(d))
            assert not rem
    return tuple(Fraction(x) for x in _trim(num))


class CyclotomicField:
    def __init__(self, n):
        if n < 1:
            raise ValueError("order must be positive")
        self.n = n
        self.modulus = cyclotomic_poly(n)
        self.degree = len(self.modulus) - 1
        d = self.degree
        # x^j mod Phi_n for d <= j < 2d, used to reduce products
        self._red = []
        for j in range(d, 2 * d):
            _, r = _poly_divmod([Fraction(0)] * j + [Fraction(1)], self.modulus)
            self._red.append(tuple(r) + (Fraction(0),) * (d - len(r)))

    def __eq__(self, other):
        return isinstance(other, CyclotomicField) and other.n == self.n

    def __hash__(self):
        return hash(("Q(zeta)", self.n))

    def __repr__(self):
        return f"Q(zeta_{self.n})"

    def elem(self, coeffs):
        return Cyclo(self, coeffs)

    def zeta(self, power=1):
        """ζ_n ** power, reduced."""
        power %= self.n
        return Cyclo(self, [0] * power + [1])

    def root(self, order, power=1):
        """A primitive `order`-th root of unity raised to `power`; `order` must divide n."""
        if self.n % order:
            raise ValueError(f"{order} does not divide {self.n}")
        return self.zeta(power * (self.n // order))


class Cyclo:
    """Element of Q(ζ_n) stored as a reduced polynomial in ζ."""

    __slots__ = ("field", "c")

    def __init__(self, field, coeffs):
        self.field = field
        c = _trim(Fraction(x) for x in coeffs)
        if len(c) > field.degree:
            _, c = _poly_divmod(c, field.modulus)
        c = c + [Fraction(0)] * (field.degree - len(c))
        self.c = tuple(c)

    @classmethod
    def _raw(cls, field, coeffs):
        # coeffs: already reduced Fractions of length field.degree
        obj = cls.__new__(cls)
        obj.field = field
        obj.c = coeffs
        return obj

    def _lift(self, x):
        if isinstance(x, Cyclo):
            if x.field != self.field:
                raise ValueError("mixing different cyclotomic fields")
            return x
        if isinstance(x, (int, Fraction)):
            return Cyclo(self.field, [x])
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Cyclo._raw(self.field, tuple(a + b for a, b in zip(self.c, o.c)))

    __radd__ = __add__

    def __neg__(self):
        return Cyclo._raw(self.field, tuple(-a for a in self.c))

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Cyclo._raw(self.field, tuple(a - b for a, b in zip(self.c, o.c)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return Cyclo._raw(self.field, tuple(a * other for a in self.c))
        o = self._lift(other)
        if o is None:
            return NotImplemented
        d = self.field.degree
        prod = [0] * (2 * d)
        for i, a in enumerate(self.c):
            if a:
                for j, b in enumerate(o.c):
                    if b:
                        prod[i + j] += a * b
        low = prod[:d]
        for j, red in enumerate(self.field._red):
            x = prod[d + j]
            if x:
                for t, y in enumerate(red):
                    if y:
                        low[t] += x * y
        return Cyclo._raw(self.field, tuple(Fraction(x) for x in low))

    __rmul__ = __mul__

    def inverse(self):
        if not self:
            raise ZeroDivisionError("inverse of zero in cyclotomic field")
        # extended Euclid on (self, modulus)
        r0, r1 = list(self.field.modulus), _trim(self.c)
        s0, s1 = [], [Fraction(1)]
        while r1:
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, _trim(r)
            qs = _poly_mul(q, s1)
            s0, s1 = s1, _poly_sub(s0, qs)
        # r0 is a nonzero constant
        inv = 1 / r0[0]
        return Cyclo(self.field, [x * inv for x in s0])

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n):
        if n < 0:
            return self.inverse() ** (-n)
        out = Cyclo(self.field, [1])
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __bool__(self):
        return any(self.c)

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.c == o.c

    def __hash__(self):
        if self.is_rational():
            return hash(self.c[0] if self.c else Fraction(0))
        return hash(self.c)

    def is_rational(self):
        return all(x == 0 for x in self.c[1:])

    def to_fraction(self):
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.c[0] if self.c else Fraction(0)

    def __repr__(self):
        terms = []
        for i, a in enumerate(self.c):
            if a:
                terms.append(f"{a}" if i == 0 else f"{a}*z^{i}")
        return f"({' + '.join(terms) or '0'})"


def _poly_mul(a, b):
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_sub(a, b):
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return _trim([x - y for x, y in zip(a, b)])


def rationalize(m):
    """Convert a Mat with cyclotomic entries back to rationals, or raise ValueError."""
    from .linalg import Mat
    out = []
    for x in m.entries():
        out.append(x.to_fraction() if isinstance(x, Cyclo) else x)
    return Mat(m.rows, m.cols, out)
