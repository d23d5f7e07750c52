"""Exact rational matrices.

Everything here works over Fraction; nothing ever rounds.
"""

import random
from fractions import Fraction
from math import lcm
from typing import NamedTuple, Optional


def to_fraction(x):
    """Coerce numbers and "p/q" strings to Fraction; other field elements pass through."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        raise TypeError("floats are not accepted; use exact rationals")
    return x


def is_rational_entries(entries):
    return all(isinstance(x, Fraction) for x in entries)


def fraction_str(x):
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class Mat:
    """Immutable dense matrix over the rationals.

    0×n and n×0 matrices are allowed and behave as maps to/from the zero space.
    """

    __slots__ = ("rows", "cols", "_e", "_hash")

    def __init__(self, rows, cols, entries=None):
        if rows < 0 or cols < 0:
            raise ValueError("negative matrix size")
        self.rows = rows
        self.cols = cols
        if entries is None:
            entries = (Fraction(0),) * (rows * cols)
        else:
            entries = tuple(to_fraction(x) for x in entries)
            if len(entries) != rows * cols:
                raise ValueError(f"expected {rows*cols} entries, got {len(entries)}")
        self._e = entries
        self._hash = None

    @classmethod
    def from_rows(cls, rows, cols=None):
        rows = [list(r) for r in rows]
        if not rows:
            return cls(0, cols or 0)
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise ValueError("ragged rows")
        return cls(len(rows), n, [x for r in rows for x in r])

    @classmethod
    def zeros(cls, rows, cols):
        return cls(rows, cols)

    @classmethod
    def identity(cls, n):
        e = [0] * (n * n)
        for i in range(n):
            e[i * n + i] = 1
        return cls(n, n, e)

    @classmethod
    def diag(cls, values):
        values = list(values)
        n = len(values)
        e = [0] * (n * n)
        for i, v in enumerate(values):
            e[i * n + i] = v
        return cls(n, n, e)

    @classmethod
    def scalar(cls, n, c):
        return cls.diag([c] * n)

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self._e[i * self.cols + j]

    def row(self, i):
        return list(self._e[i * self.cols:(i + 1) * self.cols])

    def col(self, j):
        return [self._e[i * self.cols + j] for i in range(self.rows)]

    def tolist(self):
        return [self.row(i) for i in range(self.rows)]

    def entries(self):
        return self._e

    def is_zero(self):
        return all(x == 0 for x in self._e)

    def is_square(self):
        return self.rows == self.cols

    def __eq__(self, other):
        if not isinstance(other, Mat):
            return NotImplemented
        return self.shape == other.shape and self._e == other._e

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, self._e))
        return self._hash

    def __repr__(self):
        body = "; ".join(" ".join(fraction_str(x) for x in self.row(i)) for i in range(self.rows))
        return f"Mat({self.rows}x{self.cols}: [{body}])"

    def _check_same(self, other):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other):
        self._check_same(other)
        return Mat(self.rows, self.cols, [a + b for a, b in zip(self._e, other._e)])

    def __sub__(self, other):
        self._check_same(other)
        return Mat(self.rows, self.cols, [a - b for a, b in zip(self._e, other._e)])

    def __neg__(self):
        return Mat(self.rows, self.cols, [-a for a in self._e])

    def scale(self, c):
        c = to_fraction(c)
        return Mat(self.rows, self.cols, [c * a for a in self._e])

    def __rmul__(self, c):
        if isinstance(c, (int, Fraction)):
            return self.scale(c)
        return NotImplemented

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        n, m, p = self.rows, self.cols, other.cols
        a, b = self._e, other._e
        out = []
        for i in range(n):
            ai = a[i * m:(i + 1) * m]
            for j in range(p):
                s = 0
                for t in range(m):
                    x = ai[t]
                    if x:
                        y = b[t * p + j]
                        if y:
                            s += x * y
                out.append(s)
        return Mat(n, p, out)

    def __mul__(self, other):
        if isinstance(other, Mat):
            return self @ other
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def transpose(self):
        return Mat(self.cols, self.rows, [self[i, j] for j in range(self.cols) for i in range(self.rows)])

    T = property(transpose)

    def hstack(self, *others):
        mats = (self,) + others
        if any(m.rows != self.rows for m in mats):
            raise ValueError("hstack row mismatch")
        rows = [sum((m.row(i) for m in mats), []) for i in range(self.rows)]
        return Mat(self.rows, sum(m.cols for m in mats), [x for r in rows for x in r])

    def vstack(self, *others):
        mats = (self,) + others
        if any(m.cols != self.cols for m in mats):
            raise ValueError("vstack column mismatch")
        return Mat(sum(m.rows for m in mats), self.cols, [x for m in mats for x in m._e])

    def submatrix(self, rows, cols):
        rows, cols = list(rows), list(cols)
        return Mat(len(rows), len(cols), [self[i, j] for i in rows for j in cols])

    def rank(self):
        return rank(self)

    def inverse(self):
        return inverse(self)

    def trace(self):
        if not self.is_square():
            raise ValueError("trace of non-square matrix")
        return sum((self[i, i] for i in range(self.rows)), Fraction(0))

    def pow(self, n):
        out = Mat.identity(self.rows)
        for _ in range(n):
            out = out @ self
        return out


def block_diag(blocks):
    blocks = list(blocks)
    r = sum(b.rows for b in blocks)
    c = sum(b.cols for b in blocks)
    e = [[0] * c for _ in range(r)]
    i0 = j0 = 0
    for b in blocks:
        for i in range(b.rows):
            for j in range(b.cols):
                e[i0 + i][j0 + j] = b[i, j]
        i0 += b.rows
        j0 += b.cols
    return Mat(r, c, [x for row in e for x in row])


def block_matrix(grid, row_sizes, col_sizes):
    """Assemble a matrix from a dict {(i, j): Mat}; missing blocks are zero."""
    r, c = sum(row_sizes), sum(col_sizes)
    ro = [sum(row_sizes[:i]) for i in range(len(row_sizes))]
    co = [sum(col_sizes[:j]) for j in range(len(col_sizes))]
    e = [[0] * c for _ in range(r)]
    for (i, j), b in grid.items():
        if b.shape != (row_sizes[i], col_sizes[j]):
            raise ValueError(f"block ({i},{j}) has shape {b.shape}")
        for a in range(b.rows):
            for t in range(b.cols):
                e[ro[i] + a][co[j] + t] = b[a, t]
    return Mat(r, c, [x for row in e for x in row])


def _integer_rows(m):
    out = []
    for i in range(m.rows):
        row = m.row(i)
        d = lcm(*(x.denominator for x in row)) if row else 1
        out.append([int(x * d) for x in row])
    return out


def rank(m: Mat) -> int:
    """Rank via fraction-free (Bareiss) elimination on an integer copy."""
    if not is_rational_entries(m.entries()):
        return len(rref(m)[1])
    a = _integer_rows(m)
    nr, nc = m.rows, m.cols
    r = 0
    prev = 1
    for c in range(nc):
        piv = next((i for i in range(r, nr) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        for i in range(r + 1, nr):
            for j in range(c + 1, nc):
                a[i][j] = (a[r][c] * a[i][j] - a[i][c] * a[r][j]) // prev
            a[i][c] = 0
        prev = a[r][c]
        r += 1
        if r == nr:
            break
    return r


def rref(m: Mat):
    """Reduced row echelon form; returns (rows as lists, pivot columns)."""
    a = [m.row(i) for i in range(m.rows)]
    pivots = []
    r = 0
    for c in range(m.cols):
        piv = next((i for i in range(r, m.rows) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = 1 / a[r][c]
        rr = [x * inv if x else x for x in a[r]]
        a[r] = rr
        # rows are typically sparse: only touch the pivot row's support
        support = [j for j in range(c, m.cols) if rr[j]]
        for i in range(m.rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                ri = list(a[i])
                for j in support:
                    ri[j] = ri[j] - f * rr[j]
                a[i] = ri
        pivots.append(c)
        r += 1
        if r == m.rows:
            break
    return a, pivots


def kernel(a: Mat) -> Mat:
    """Basis of the right kernel, as the columns of an (a.cols × dim) matrix."""
    red, pivots = rref(a)
    free = [j for j in range(a.cols) if j not in set(pivots)]
    cols = []
    for f in free:
        v = [Fraction(0)] * a.cols
        v[f] = Fraction(1)
        for i, p in enumerate(pivots):
            v[p] = -red[i][f]
        cols.append(v)
    return Mat(a.cols, len(cols), [cols[j][i] for i in range(a.cols) for j in range(len(cols))])


class Solution(NamedTuple):
    x: Mat
    kernel: Mat


def solve_linear(a: Mat, b: Mat) -> Optional[Solution]:
    """Solve a·x = b. Returns a particular solution and a kernel basis of a, or None."""
    if a.rows != b.rows:
        raise ValueError(f"dimension mismatch: a has {a.rows} rows, b has {b.rows}")
    aug = a.hstack(b)
    red, pivots = rref(aug)
    if any(p >= a.cols for p in pivots):
        return None
    x = [[Fraction(0)] * b.cols for _ in range(a.cols)]
    for i, p in enumerate(pivots):
        for j in range(b.cols):
            x[p][j] = red[i][a.cols + j]
    return Solution(Mat(a.cols, b.cols, [v for r in x for v in r]), kernel(a))


def inverse(m: Mat) -> Mat:
    if not m.is_square():
        raise ValueError("inverse of non-square matrix")
    sol = solve_linear(m, Mat.identity(m.rows))
    if sol is None or sol.kernel.cols:
        raise ZeroDivisionError("singular matrix")
    return sol.x


def is_invertible(m: Mat) -> bool:
    return m.is_square() and rank(m) == m.rows


def column_space(m: Mat) -> Mat:
    """Basis (as columns) of the image of m."""
    red, pivots = rref(m)
    return m.submatrix(range(m.rows), pivots)


def sylvester_system(p: Mat, q: Mat):
    """Matrix of X ↦ p·X − X·q acting on row-major vec(X)."""
    n, m = p.rows, q.rows
    e = [[Fraction(0)] * (n * m) for _ in range(n * m)]
    for i in range(n):
        for j in range(m):
            row = e[i * m + j]
            for t in range(n):
                if p[i, t]:
                    row[t * m + j] += p[i, t]
            for t in range(m):
                if q[t, j]:
                    row[i * m + t] -= q[t, j]
    return Mat(n * m, n * m, [x for r in e for x in r])


def sylvester_solve(p: Mat, q: Mat, r: Mat) -> Optional[Mat]:
    """Some X with p·X − X·q = r, or None when no such X exists."""
    if not p.is_square() or not q.is_square():
        raise ValueError("p and q must be square")
    if r.shape != (p.rows, q.rows):
        raise ValueError(f"r has shape {r.shape}, expected {(p.rows, q.rows)}")
    n, m = p.rows, q.rows
    sol = solve_linear(sylvester_system(p, q), Mat(n * m, 1, r.entries()))
    if sol is None:
        return None
    return Mat(n, m, sol.x.entries())


def make_rng(seed):
    return random.Random(seed)


def random_matrix(rng, rows, cols, bound=10):
    return Mat(rows, cols, [rng.randint(-bound, bound) for _ in range(rows * cols)])


def random_invertible(rng, n, bound=10, tries=64):
    for _ in range(tries):
        g = random_matrix(rng, n, n, bound)
        if rank(g) == n:
            return g
    return Mat.identity(n)
