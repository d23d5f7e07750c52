"""Weight combinatorics for finite simply-laced and affine type A.

Finite coweights are stored by their coordinates in the simple coroot basis
(Fractions allowed, so fundamental coweights are representable).  Since the
systems are simply laced, roots and coroots share coordinates and the pairing
<lambda, alpha_j> is c^T C e_j.

Affine sl(N) weights at level k are (level, finite Dynkin labels, energy) with
energy the coefficient of delta.  A weight nu of L(lambda) is addressed by the
root coordinates c = (c_0, c_1, ..., c_{N-1}) of lambda - nu; c_0 counts delta's
and is called the depth.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .linalg import Mat, solve_linear


class WeightError(ValueError):
    """Invalid weight data (level mismatch, non-dominant input, violated bound)."""


# ---------------------------------------------------------------- finite root systems

def _chain_cartan(n, edges):
    c = [[0] * n for _ in range(n)]
    for i in range(n):
        c[i][i] = 2
    for i, j in edges:
        c[i][j] = c[j][i] = -1
    return tuple(tuple(r) for r in c)


def cartan_matrix(kind, rank):
    kind = kind.upper()
    if kind == "A" and rank >= 1:
        return _chain_cartan(rank, [(i, i + 1) for i in range(rank - 1)])
    if kind == "D" and rank >= 4:
        return _chain_cartan(rank, [(i, i + 1) for i in range(rank - 2)] + [(rank - 3, rank - 1)])
    if kind == "E" and rank in (6, 7, 8):
        # Bourbaki: 1-3-4-5-..., with 2 attached to 4 (zero-based below)
        edges = [(0, 2), (1, 3), (2, 3)] + [(i, i + 1) for i in range(3, rank - 1)]
        return _chain_cartan(rank, edges)
    raise WeightError(f"unsupported root system {kind}{rank}")


@dataclass(frozen=True)
class RootSystemDesc:
    kind: str
    rank: int
    cartan: tuple
    positive_roots: tuple      # root coordinates, sorted by height
    highest_root: tuple
    coxeter_number: int

    def pairing(self, coweight, root):
        """<coweight, root> for a coweight in coroot coordinates and a root in root coordinates."""
        n = self.rank
        cr = [sum(self.cartan[i][j] * root[j] for j in range(n)) for i in range(n)]
        return sum((Fraction(coweight[i]) * cr[i] for i in range(n) if cr[i]), Fraction(0))

    def label(self, coweight, j):
        return sum((Fraction(coweight[i]) * self.cartan[i][j] for i in range(self.rank)
                    if self.cartan[i][j]), Fraction(0))

    def dynkin(self, coweight):
        n = self.rank
        return tuple(sum((Fraction(coweight[i]) * self.cartan[i][j] for i in range(n)
                          if self.cartan[i][j]), Fraction(0)) for j in range(n))

    def from_dynkin(self, labels):
        c = Mat(self.rank, self.rank, [x for r in self.cartan for x in r])
        sol = solve_linear(c, Mat(self.rank, 1, list(labels)))
        return tuple(sol.x.col(0))

    def reflect(self, coweight, i):
        c = list(map(Fraction, coweight))
        c[i] -= self.label(coweight, i)
        return tuple(c)

    def is_dominant(self, coweight):
        return all(x >= 0 for x in self.dynkin(coweight))

    def rho_pairing(self, coweight):
        """<coweight, 2 rho>, summing the pairing over all positive roots."""
        return sum(self.pairing(coweight, r) for r in self.positive_roots)


def _unit(n, j):
    return tuple(1 if i == j else 0 for i in range(n))


def root_system(kind="A", rank=1):
    cart = cartan_matrix(kind, rank)
    simple = [_unit(rank, i) for i in range(rank)]
    roots = set(simple)
    frontier = list(simple)
    while frontier:
        nxt = []
        for r in frontier:
            for i in range(rank):
                # simply laced: r + alpha_i is a root iff (r, alpha_i) = -1
                ip = sum(r[a] * cart[a][i] for a in range(rank))
                if ip == -1:
                    s = tuple(r[a] + (a == i) for a in range(rank))
                    if s not in roots:
                        roots.add(s)
                        nxt.append(s)
        frontier = nxt
    pos = tuple(sorted(roots, key=lambda r: (sum(r), r)))
    theta = pos[-1]
    return RootSystemDesc(kind.upper(), rank, cart, pos, theta, sum(theta) + 1)


def is_level_dominant(coweight, k, rs):
    return rs.is_dominant(coweight) and rs.pairing(coweight, rs.highest_root) <= k


def dominant_representative(coweight, k, rs, max_steps=100000):
    """The W_aff,k = W x kQ^vee orbit representative in the level-k dominant alcove."""
    if k < 1:
        raise WeightError("level must be positive")
    lam = tuple(map(Fraction, coweight))
    theta = rs.highest_root
    for _ in range(max_steps):
        labels = rs.dynkin(lam)
        neg = [i for i, x in enumerate(labels) if x < 0]
        if neg:
            lam = rs.reflect(lam, neg[0])
            continue
        excess = rs.pairing(lam, theta) - k
        if excess > 0:
            # affine reflection in the wall <., theta> = k
            lam = tuple(c - excess * t for c, t in zip(lam, theta))
            continue
        return lam
    raise RuntimeError("dominant folding did not terminate")


def affine_orbit_bfs(coweight, k, rs, radius, traverse=None):
    """Orbit points in the box |coordinate| <= radius, found by breadth-first search.

    The search may pass through points of the larger box of size `traverse`
    (default 3 * radius + 2k) so that orbit pieces joined only outside the
    counting box are still found.
    """
    if traverse is None:
        traverse = 3 * radius + 2 * k
    theta = rs.highest_root
    start = tuple(map(Fraction, coweight))
    seen = {start}
    todo = [start]

    def moves(lam):
        for i in range(rs.rank):
            yield rs.reflect(lam, i)
        excess = rs.pairing(lam, theta) - k
        yield tuple(c - excess * t for c, t in zip(lam, theta))

    while todo:
        lam = todo.pop()
        for mu in moves(lam):
            if mu not in seen and all(abs(x) <= traverse for x in mu):
                seen.add(mu)
                todo.append(mu)
    return {x for x in seen if all(abs(c) <= radius for c in x)}


def orbit_dim(coweight, rs):
    if not rs.is_dominant(coweight):
        raise WeightError("orbit_dim needs a dominant coweight")
    return int(rs.rho_pairing(coweight))


def conv_dim(l1, l2, l3, rs):
    """<l1 + l2 + l3, rho>; integral whenever the sum lies in the coroot lattice."""
    total = tuple(Fraction(a) + b + c for a, b, c in zip(l1, l2, l3))
    val = rs.rho_pairing(total) / 2
    if all(x.denominator == 1 for x in total) and val.denominator != 1:
        raise ArithmeticError(f"non-integral convolution dimension {val}")
    return val


# ---------------------------------------------------------------- affine Cartan and Nakajima criterion

def affine_cartan(n):
    """Cartan matrix of the cyclic affine diagram on n nodes.

    n = 2 gives the double bond [[2, -2], [-2, 2]]; n = 1 is the degenerate
    Jordan-quiver convention [[0]] (w - Cv = w).
    """
    if n < 1:
        raise WeightError("need at least one node")
    if n == 1:
        return ((0,),)
    c = [[0] * n for _ in range(n)]
    for i in range(n):
        c[i][i] += 2
        c[i][(i + 1) % n] -= 1
        c[i][(i - 1) % n] -= 1
    return tuple(tuple(r) for r in c)


def nakajima_inequalities(v, N, k):
    """The explicit list: v_{i-1} + v_{i+1} >= 2 v_i for 0 < i < k, and v_{k-1} + v_1 + N >= 2 v_0."""
    v = list(v)
    if len(v) != k:
        raise WeightError(f"v must have {k} entries")
    ok = all(v[(i - 1) % k] + v[(i + 1) % k] >= 2 * v[i] for i in range(1, k))
    return ok and v[(k - 1) % k] + v[1 % k] + N >= 2 * v[0]


def nakajima_weight(v, N, k):
    """w - Cv for w = (N, 0, ..., 0), as affine sl(k) Dynkin labels."""
    c = affine_cartan(k)
    return tuple((N if i == 0 else 0) - sum(c[i][j] * v[j] for j in range(k)) for i in range(k))


def nakajima_dominance(v, N, k):
    if any(x < 0 for x in v):
        raise WeightError("v must be nonnegative")
    lit = nakajima_inequalities(v, N, k)
    via_cartan = all(x >= 0 for x in nakajima_weight(v, N, k))
    if lit != via_cartan:
        raise RuntimeError(f"Nakajima criterion formulations disagree at v={v}, N={N}, k={k}")
    return lit


# ---------------------------------------------------------------- affine sl(N) weights

@dataclass(frozen=True)
class AffineWeight:
    level: int
    finite: tuple          # Dynkin labels a_1..a_{N-1}
    energy: Fraction = Fraction(0)

    @property
    def N(self):
        return len(self.finite) + 1

    def labels(self):
        """All N Dynkin labels, a_0 first."""
        return (self.level - sum(self.finite),) + tuple(self.finite)

    def is_dominant(self):
        return all(x >= 0 for x in self.labels())

    def to_json(self):
        return {"level": self.level, "finite": list(self.finite), "energy": str(self.energy)}


@dataclass(frozen=True)
class Truncated:
    depth: int
    cap: int

    def __bool__(self):
        return False

    def __str__(self):
        return f"truncated(depth {self.depth} > {self.cap})"


def _sl_inverse_cartan(N):
    """Inverse Cartan matrix of sl(N): min(i,j)(N-max(i,j))/N, 1-based."""
    return [[Fraction(min(i, j) * (N - max(i, j)), N) for j in range(1, N)] for i in range(1, N)]


def finite_root_coords(labels):
    """Root coordinates of the sl(N) weight with the given Dynkin labels."""
    N = len(labels) + 1
    inv = _sl_inverse_cartan(N)
    return tuple(sum(inv[i][j] * labels[j] for j in range(N - 1)) for i in range(N - 1))


def finite_norm(labels, form="basic"):
    """(lambda, lambda) for an sl(N) weight; 'killing' scales the basic form by 2N."""
    N = len(labels) + 1
    inv = _sl_inverse_cartan(N)
    val = sum(labels[i] * inv[i][j] * labels[j] for i in range(N - 1) for j in range(N - 1))
    return val * (2 * N if form == "killing" else 1)


def depth_vector(lam, nu):
    """Root coordinates of lam - nu, or None when it is not an integral root combination."""
    if lam.level != nu.level or lam.N != nu.N:
        raise WeightError("weights have different level or rank")
    d = Fraction(lam.energy) - Fraction(nu.energy)
    diff = tuple(a - b for a, b in zip(lam.finite, nu.finite))
    r = finite_root_coords(diff)
    c = (d,) + tuple(x + d for x in r)
    if any(Fraction(x).denominator != 1 for x in c):
        return None
    return tuple(int(x) for x in c)


class _Freudenthal:
    """Freudenthal recursion for L(lambda) over affine sl(N), memoized on c."""

    def __init__(self, labels):
        self.labels = tuple(labels)
        self.N = len(labels)
        self.C = affine_cartan(self.N)
        self.cache = {}

    def _ip(self, x, y):
        C = self.C
        return sum(x[i] * C[i][j] * y[j] for i in range(self.N) for j in range(self.N))

    def _roots_in_box(self, c):
        out = []
        for g in itertools.product(*[range(x + 1) for x in c]):
            if not any(g):
                continue
            n2 = self._ip(g, g)
            if n2 == 2:
                out.append((g, 1))
            elif len(set(g)) == 1 and self.N > 1:
                out.append((g, self.N - 1))
        return out

    def mult(self, c):
        c = tuple(c)
        if any(x < 0 for x in c):
            return 0
        if not any(c):
            return 1
        if c in self.cache:
            return self.cache[c]
        lhs = 2 * sum(ci * (a + 1) for ci, a in zip(c, self.labels)) - self._ip(c, c)
        if lhs <= 0:
            self.cache[c] = 0
            return 0
        total = 0
        for g, mg in self._roots_in_box(c):
            lam_g = sum(gi * a for gi, a in zip(g, self.labels))
            j = 1
            while True:
                rest = tuple(x - j * y for x, y in zip(c, g))
                if any(x < 0 for x in rest):
                    break
                m = self.mult(rest)
                if m:
                    total += mg * (lam_g - self._ip(rest, g)) * m
                j += 1
        val = Fraction(2 * total, lhs)
        if val.denominator != 1 or val < 0:
            raise ArithmeticError(f"non-integral multiplicity {val} at {c}")
        self.cache[c] = int(val)
        return int(val)


@lru_cache(maxsize=64)
def _freudenthal(labels):
    return _Freudenthal(labels)


def multiplicity_at(labels, c):
    """Multiplicity of lambda - sum c_i alpha_i in L(lambda), lambda given by all Dynkin labels."""
    return _freudenthal(tuple(labels)).mult(tuple(c))


def weight_multiplicity(lam, nu, depth_cap=6):
    if not lam.is_dominant():
        raise WeightError("highest weight must be dominant")
    c = depth_vector(lam, nu)
    if c is None or any(x < 0 for x in c):
        return 0
    if c[0] > depth_cap:
        return Truncated(c[0], depth_cap)
    return multiplicity_at(lam.labels(), c)


# ---------------------------------------------------------------- independent oracle: Weyl-Kac + Kostant

def _eps_coords(labels):
    """Finite sl(N) weight in epsilon coordinates with zero sum."""
    N = len(labels) + 1
    x = [Fraction(0)] * N
    for i, a in enumerate(labels, start=1):
        for t in range(N):
            x[t] += a * ((1 if t < i else 0) - Fraction(i, N))
    return x


def _perm_sign(p):
    sign, seen = 1, [False] * len(p)
    for i in range(len(p)):
        if not seen[i]:
            j, ln = i, 0
            while not seen[j]:
                seen[j] = True
                j = p[j]
                ln += 1
            sign *= (-1) ** (ln - 1)
    return sign


def _kostant(N, box):
    """Kostant partition function (imaginary roots with multiplicity N-1) on the box [0, box]."""
    C = affine_cartan(N)
    dims = [x + 1 for x in box]
    table = {g: 0 for g in itertools.product(*[range(d) for d in dims])}
    table[tuple([0] * N)] = 1
    order = sorted(table, key=sum)
    for g in itertools.product(*[range(d) for d in dims]):
        if not any(g):
            continue
        n2 = sum(g[i] * C[i][j] * g[j] for i in range(N) for j in range(N))
        if n2 == 2:
            mult = 1
        elif len(set(g)) == 1 and N > 1:
            mult = N - 1
        else:
            continue
        for _ in range(mult):
            for x in order:
                y = tuple(a - b for a, b in zip(x, g))
                if all(t >= 0 for t in y):
                    table[x] += table[y]
    return table


def oracle_multiplicity(labels, c):
    """m(lambda - sum c_i alpha_i) from the Weyl-Kac character formula, truncated at depth c_0."""
    N = len(labels)
    c = tuple(c)
    if N == 1:
        return 1 if not any(c) else 0
    k = sum(labels)
    K = k + N
    fin = list(labels[1:])
    x = [a + b for a, b in zip(_eps_coords(fin), _eps_coords([1] * (N - 1)))]
    norm = math.sqrt(float(sum(t * t for t in x)))
    bound = int((norm + math.sqrt(norm ** 2 + 2 * K * c[0])) / K) + 1
    kost = _kostant(N, c)
    total = 0
    for beta in itertools.product(range(-bound, bound + 1), repeat=N - 1):
        beta = list(beta) + [-sum(beta)]
        if abs(beta[-1]) > bound:
            continue
        b2 = sum(t * t for t in beta)
        for p in itertools.permutations(range(N)):
            y = [x[p[i]] for i in range(N)]
            e = sum(a * b for a, b in zip(y, beta)) + Fraction(K * b2, 2)
            if e > c[0]:
                continue
            dfin = [x[i] - y[i] - K * beta[i] for i in range(N)]
            r = list(itertools.accumulate(dfin))[:-1]
            cw = [e] + [ri + e for ri in r]
            rest = tuple(ci - w for ci, w in zip(c, cw))
            if any(Fraction(t).denominator != 1 or t < 0 for t in rest):
                continue
            total += _perm_sign(p) * kost[tuple(int(t) for t in rest)]
    return total


# ---------------------------------------------------------------- level-rank transpose

def partition_encoding(labels):
    """Rows a_i + ... + a_{n} of the finite Dynkin labels (a_1..a_n), a partition."""
    return tuple(sum(labels[i:]) for i in range(len(labels)))


def conjugate_partition(p, length=None):
    rows = [x for x in p if x > 0]
    width = max(rows) if rows else 0
    conj = [sum(1 for x in rows if x >= j) for j in range(1, width + 1)]
    if length is not None:
        if len(conj) > length:
            raise WeightError("conjugate partition does not fit")
        conj += [0] * (length - len(conj))
    return tuple(conj)


def level_rank_transpose(b, N):
    """Level-N affine sl(k) labels b_0..b_{k-1} to level-k affine sl(N) labels a_0..a_{N-1}.

    The sl(k) weight is encoded by the partition of its finite labels (k-1 rows,
    at most N columns); conjugation yields N residues mod k, which are lifted to
    the unique determinant-one coweight j_1 >= ... >= j_N with j_1 - j_N <= k.
    Returns (labels, j).
    """
    k = len(b)
    if sum(b) != N or any(x < 0 for x in b):
        raise WeightError(f"{b} is not a dominant level-{N} weight")
    P = conjugate_partition(partition_encoding(list(b[1:])), N)
    S = sum(P)
    if S % k:
        raise WeightError(f"residue sum {S} is not divisible by {k}")
    m = S // k
    j = sorted([x - k for x in P[:m]] + list(P[m:]), reverse=True)
    labels = (k - (j[0] - j[-1]),) + tuple(j[i] - j[i + 1] for i in range(N - 1))
    return labels, tuple(j)


def transpose_oracle(k, N):
    """Brute-force table: residue multiplicities -> all alcove coweights of SL(N) at level k."""
    table = {}
    for j in itertools.product(range(-k, k + 1), repeat=N):
        if sum(j) or list(j) != sorted(j, reverse=True) or j[0] - j[-1] > k:
            continue
        res = [0] * k
        for x in j:
            res[x % k] += 1
        labels = (k - (j[0] - j[-1]),) + tuple(j[i] - j[i + 1] for i in range(N - 1))
        table.setdefault(tuple(res), []).append(labels)
    return table


@dataclass(frozen=True)
class LambdaMuAlpha:
    lam: AffineWeight
    mu: AffineWeight
    alpha: tuple           # (alpha_1, ..., alpha_{N-1}, alpha_N) with alpha_N the alpha_0 coefficient
    integral: bool
    instanton_number: Fraction

    def depth_vector(self):
        """alpha in the (c_0, c_1, ..., c_{N-1}) order used by the multiplicity routines."""
        return (self.alpha[-1],) + tuple(self.alpha[:-1])

    def to_json(self):
        return {"lambda": self.lam.to_json(), "mu": self.mu.to_json(),
                "alpha": [str(x) for x in self.alpha], "integral": self.integral,
                "a": str(self.instanton_number)}


def _energy_to_alpha(fin_labels, n):
    r = finite_root_coords(fin_labels)
    return tuple(x + n for x in r) + (n,)


def natural_instanton_number(v, N, k, form="basic"):
    """The a for which 2|alpha| equals dim M(v, w) = 2 N v_0 - v^T C v."""
    if not nakajima_dominance(v, N, k):
        raise WeightError(f"v = {tuple(v)} is not dominant")
    C = affine_cartan(k)
    vcv = sum(v[i] * C[i][j] * v[j] for i in range(k) for j in range(k))
    labels, _ = level_rank_transpose(nakajima_weight(v, N, k), N)
    fin = labels[1:]
    n = Fraction(N * v[0] * 2 - vcv, 2) - sum(finite_root_coords(fin))
    n /= N
    return k * n + finite_norm(fin, form) / 2


def lambda_mu_alpha(v, N, k, a=None, form="basic"):
    """lambda = (k, t(w - Cv), (a + |mu|^2/2 - |lambda|^2/2)/k), mu = (k, 0, 0), alpha = lambda - mu.

    With a = None the natural instanton number is used.  Raises WeightError when
    alpha leaves the box 0 <= alpha <= (v_0, ..., v_0).
    """
    v = tuple(v)
    if not nakajima_dominance(v, N, k):
        raise WeightError(f"v = {v} is not dominant")
    if a is None:
        a = natural_instanton_number(v, N, k, form)
    a = Fraction(a)
    labels, _ = level_rank_transpose(nakajima_weight(v, N, k), N)
    fin = labels[1:]
    n = (a - finite_norm(fin, form) / 2) / k
    lam = AffineWeight(k, tuple(fin), n)
    mu = AffineWeight(k, tuple([0] * (N - 1)), Fraction(0))
    alpha = _energy_to_alpha(fin, n)
    if any(x < 0 or x > v[0] for x in alpha):
        raise WeightError(f"alpha = {[str(x) for x in alpha]} violates 0 <= alpha <= v_0 = {v[0]}")
    integral = all(Fraction(x).denominator == 1 for x in alpha)
    return LambdaMuAlpha(lam, mu, alpha, integral, a)


def is_good(v, N, k, depth_cap=12):
    """Dominance of w - Cv together with a nonzero multiplicity of mu in L(lambda)."""
    if not nakajima_dominance(v, N, k):
        return False
    lma = lambda_mu_alpha(v, N, k)
    if not lma.integral:
        return False
    m = weight_multiplicity(lma.lam, lma.mu, depth_cap)
    if isinstance(m, Truncated):
        raise WeightError(f"goodness undecided: {m}")
    return m > 0


def is_good_sl_k_side(v, N, k, depth_cap=12):
    """Dominance together with a nonzero multiplicity of w - Cv in the level-N vacuum module of affine sl(k)."""
    if not nakajima_dominance(v, N, k):
        return False
    if v[0] > depth_cap:
        raise WeightError("goodness undecided: depth beyond cap")
    return multiplicity_at((N,) + (0,) * (k - 1), tuple(v)) > 0


# ---------------------------------------------------------------- multiplicity tables

@dataclass
class MultTable:
    alpha: tuple
    depth_cap: int
    entries: dict = field(default_factory=dict)      # beta -> int or Truncated

    def to_json(self):
        return {"alpha": [str(x) for x in self.alpha], "depth_cap": self.depth_cap,
                "entries": [{"beta": list(b), "m": (m if isinstance(m, int) else str(m))}
                            for b, m in sorted(self.entries.items())]}

    def to_text(self):
        rows = [("beta", "m")] + [(" ".join(str(x) for x in b), str(m))
                                  for b, m in sorted(self.entries.items())]
        w = max(len(r[0]) for r in rows)
        return "\n".join(f"{a.ljust(w)}  {b}" for a, b in rows)


def mult_predictions(lam, alpha, depth_cap=6):
    """m_beta = multiplicity of lambda - alpha + beta in L(lambda), for 0 <= beta <= alpha."""
    if not lam.is_dominant():
        raise WeightError("highest weight must be dominant")
    alpha = tuple(Fraction(x) for x in alpha)
    if any(x.denominator != 1 or x < 0 for x in alpha):
        raise WeightError("alpha must be a nonnegative integral vector")
    alpha = tuple(int(x) for x in alpha)
    labels = lam.labels()
    table = MultTable(alpha, depth_cap)
    for beta in itertools.product(*[range(x + 1) for x in alpha]):
        diff = tuple(a - b for a, b in zip(alpha, beta))
        c = (diff[-1],) + diff[:-1]
        table.entries[beta] = Truncated(c[0], depth_cap) if c[0] > depth_cap else multiplicity_at(labels, c)
    return table
