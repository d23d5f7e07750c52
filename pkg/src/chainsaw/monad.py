"""Symbolic monads: polynomial block matrices over commuting section symbols.

Geometric sections (z, t, x, y, xi_l, z0, z1, z2, y1, y2) are free commuting
indeterminates; no relations among them are imposed.  Matrix coefficients are
exact rational Mats.  Ext^1 classes on the one-dimensional stack are modelled by
DualGradedElement: a functional on the sections of O(m), stored on the monomial
basis y1^a y2^b with aN + b = m.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

from .linalg import Mat, solve_linear
from .quiver import CHAINSAW, DENTED, QuiverDataError, relation_residual


class GradingError(ValueError):
    """A block's symbol degree disagrees with its summands' degree difference."""


# ---------------------------------------------------------------- polynomials

def _mono(*syms):
    """Monomial from symbol names, e.g. _mono("t", "x") or _mono(("y2", 3))."""
    exps = {}
    for s in syms:
        name, e = (s, 1) if isinstance(s, str) else s
        if e:
            exps[name] = exps.get(name, 0) + e
    return tuple(sorted(exps.items()))


def _mono_mul(a, b):
    exps = dict(a)
    for name, e in b:
        exps[name] = exps.get(name, 0) + e
    return tuple(sorted(exps.items()))


def _mono_str(m):
    return "*".join(n if e == 1 else f"{n}^{e}" for n, e in m) or "1"


class Poly:
    """A polynomial in commuting symbols whose coefficients are rows x cols Mats."""

    __slots__ = ("rows", "cols", "terms")

    def __init__(self, rows, cols, terms=None):
        self.rows, self.cols = rows, cols
        self.terms = {}
        for mono, c in (terms or {}).items():
            if c.shape != (rows, cols):
                raise ValueError(f"coefficient shape {c.shape} != {(rows, cols)}")
            if not c.is_zero():
                self.terms[mono] = c

    @classmethod
    def term(cls, mat, *syms):
        return cls(mat.rows, mat.cols, {_mono(*syms): mat})

    @classmethod
    def zero(cls, rows, cols):
        return cls(rows, cols)

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in polynomial sum")
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms[m] + c if m in terms else c
        return Poly(self.rows, self.cols, terms)

    def __neg__(self):
        return Poly(self.rows, self.cols, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError("shape mismatch in polynomial product")
        terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                c = c1 @ c2
                terms[m] = terms[m] + c if m in terms else c
        return Poly(self.rows, other.cols, terms)

    def scale(self, c):
        return Poly(self.rows, self.cols, {m: x.scale(c) for m, x in self.terms.items()})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return (isinstance(other, Poly) and (self.rows, self.cols) == (other.rows, other.cols)
                and self.terms == other.terms)

    def degree_set(self, symbol_degrees, width):
        out = set()
        for mono in self.terms:
            d = [0] * width
            for name, e in mono:
                for i, x in enumerate(symbol_degrees[name]):
                    d[i] += x * e
            out.add(tuple(d))
        return out

    def to_text(self):
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms):
            c = self.terms[mono]
            rows = "; ".join(" ".join(str(x) for x in c.row(i)) for i in range(c.rows))
            parts.append(f"{_mono_str(mono)}*[{rows}]")
        return " + ".join(parts)

    def __repr__(self):
        return f"Poly({self.to_text()})"


class Summand(NamedTuple):
    label: str
    dim: int
    degree: tuple


class PolyMat:
    """Block matrix of Polys; blocks[(i, j)] maps sources[j] to targets[i]."""

    def __init__(self, targets, sources, blocks=None):
        self.targets = list(targets)
        self.sources = list(sources)
        self.blocks = {}
        for (i, j), p in (blocks or {}).items():
            self.add(i, j, p)

    def add(self, i, j, p):
        t, s = self.targets[i], self.sources[j]
        if (p.rows, p.cols) != (t.dim, s.dim):
            raise ValueError(f"block {t.label} <- {s.label} has shape {(p.rows, p.cols)}")
        if (i, j) in self.blocks:
            p = self.blocks[(i, j)] + p
        if p.is_zero():
            self.blocks.pop((i, j), None)
        else:
            self.blocks[(i, j)] = p

    def block(self, i, j):
        return self.blocks.get((i, j), Poly.zero(self.targets[i].dim, self.sources[j].dim))

    def __matmul__(self, other):
        if [s.label for s in self.sources] != [t.label for t in other.targets]:
            raise GradingError("composing block matrices over different middle terms")
        out = PolyMat(self.targets, other.sources)
        for (i, k), p in self.blocks.items():
            for (k2, j), q in other.blocks.items():
                if k == k2:
                    out.add(i, j, p @ q)
        return out

    def __sub__(self, other):
        out = PolyMat(self.targets, self.sources, self.blocks)
        for (i, j), p in other.blocks.items():
            out.add(i, j, -p)
        return out

    def is_zero(self):
        return not self.blocks

    def nonzero_blocks(self):
        return sorted(self.blocks)

    def grading_violations(self, symbol_degrees):
        """Blocks whose monomials do not all have degree target - source."""
        bad = []
        for (i, j), p in self.blocks.items():
            t, s = self.targets[i], self.sources[j]
            want = tuple(a - b for a, b in zip(t.degree, s.degree))
            got = p.degree_set(symbol_degrees, len(want))
            if got != {want}:
                bad.append((t.label, s.label, want, sorted(got)))
        return bad

    def to_text(self):
        lines = []
        for i, j in sorted(self.blocks):
            lines.append(f"{self.targets[i].label} <- {self.sources[j].label}: "
                         f"{self.blocks[(i, j)].to_text()}")
        return "\n".join(lines) if lines else "0"


@dataclass
class Monad:
    C: PolyMat
    D: PolyMat
    symbol_degrees: dict
    kind: str

    def audit(self):
        bad = self.C.grading_violations(self.symbol_degrees) + self.D.grading_violations(self.symbol_degrees)
        if bad:
            raise GradingError(f"grading audit failed: {bad}")
        return True

    def dump(self):
        return f"# {self.kind} monad\n## C\n{self.C.to_text()}\n## D\n{self.D.to_text()}\n"


def verify_complex(C, D, symbol_degrees=None):
    """D.C expanded and collected; the zero matrix certifies the complex property."""
    if symbol_degrees is not None:
        bad = C.grading_violations(symbol_degrees) + D.grading_violations(symbol_degrees)
        if bad:
            raise GradingError(f"grading audit failed: {bad}")
    return D @ C


def _I(n):
    return Mat.identity(n)


# ---------------------------------------------------------------- classical ADHM

ADHM_DEGREES = {"z": (1, 0), "t": (1, 0), "x": (0, 1), "y": (0, 1)}


def build_adhm_monad(a, b, p, q):
    """C = (tA - z, xB - y, txq) and D = (-xB + y, tA - z, p)."""
    d = a.rows
    if a.shape != (d, d) or b.shape != (d, d) or p.rows != d or q.cols != d or p.cols != q.rows:
        raise ValueError("ADHM data has inconsistent shapes")
    n = p.cols
    src = [Summand("V(-1,-1)", d, (-1, -1))]
    mid = [Summand("V(0,-1)", d, (0, -1)), Summand("V(-1,0)", d, (-1, 0)), Summand("W", n, (0, 0))]
    tgt = [Summand("V", d, (0, 0))]
    C = PolyMat(mid, src, {
        (0, 0): Poly.term(a, "t") - Poly.term(_I(d), "z"),
        (1, 0): Poly.term(b, "x") - Poly.term(_I(d), "y"),
        (2, 0): Poly.term(q, "t", "x"),
    })
    D = PolyMat(tgt, mid, {
        (0, 0): -Poly.term(b, "x") + Poly.term(_I(d), "y"),
        (0, 1): Poly.term(a, "t") - Poly.term(_I(d), "z"),
        (0, 2): Poly.term(p),
    })
    return Monad(C, D, ADHM_DEGREES, "adhm")


def adhm_expected(a, b, p, q):
    """t x (AB - BA + pq) as a 1x1 block matrix on V(-1,-1) -> V."""
    d = a.rows
    pm = PolyMat([Summand("V", d, (0, 0))], [Summand("V(-1,-1)", d, (-1, -1))])
    pm.add(0, 0, Poly.term(a @ b - b @ a + p @ q, "t", "x"))
    return pm


# ---------------------------------------------------------------- stack monad

def stack_degrees(N):
    out = {"z": (1, 0), "t": (1, 0), "x": (0, N)}
    for l in range(1, N + 1):
        out[f"xi{l}"] = (0, 1)
    return out


def _require(m, kind):
    if m.shape.kind != kind:
        raise QuiverDataError(f"expected a {kind} module, got {m.shape.kind}")


def build_stack_monad(m):
    """Monad on the stack with summands V_l R_l, V_{l+1} R_l (-1,0), W_l R_l."""
    _require(m, CHAINSAW)
    N = m.shape.N
    d = lambda l: m.dims[l % N]
    A = lambda l: m.arrows["A"][l % N]
    B = lambda l: m.arrows["B"][l % N]
    p = lambda l: m.arrows["p"][l % N]
    q = lambda l: m.arrows["q"][l % N]

    src = [Summand(f"V{l}R{l}(-1,0)", d(l), (-1, -l)) for l in range(1, N + 1)]
    m1 = [Summand(f"V{l}R{l}", d(l), (0, -l)) for l in range(1, N + 1)]
    m2 = [Summand(f"V{l + 1}R{l}(-1,0)", d(l + 1), (-1, -l)) for l in range(N)]
    m3 = [Summand(f"W{l}R{l}", 1, (0, -l)) for l in range(N)]
    tgt = [Summand(f"V{l + 1}R{l}", d(l + 1), (0, -l)) for l in range(N)]
    mid = m1 + m2 + m3
    S = lambda l: l - 1                 # l = 1..N
    M1 = lambda l: l - 1                # l = 1..N
    M2 = lambda l: N + l                # l = 0..N-1
    M3 = lambda l: 2 * N + l            # l = 0..N-1
    T = lambda l: l                     # l = 0..N-1

    C = PolyMat(mid, src)
    D = PolyMat(tgt, mid)
    for l in range(1, N + 1):
        C.add(M1(l), S(l), Poly.term(A(l), "t") - Poly.term(_I(d(l)), "z"))
        C.add(M2(l - 1), S(l), -Poly.term(_I(d(l)), f"xi{l}"))
        D.add(T(l - 1), M1(l), Poly.term(_I(d(l)), f"xi{l}"))
    C.add(M2(0), S(N), Poly.term(B(0), "x"))
    C.add(M3(0), S(N), Poly.term(q(0), "t", "x"))
    D.add(T(0), M1(N), -Poly.term(B(0), "x"))
    for l in range(1, N):
        C.add(M2(l), S(l), Poly.term(B(l)))
        C.add(M3(l), S(l), Poly.term(q(l), "t"))
        D.add(T(l), M1(l), -Poly.term(B(l)))
    for l in range(N):
        # the loop acting on V_{l+1}
        D.add(T(l), M2(l), Poly.term(A(l + 1), "t") - Poly.term(_I(d(l + 1)), "z"))
        D.add(T(l), M3(l), Poly.term(p(l + 1)))
    return Monad(C, D, stack_degrees(N), "stack")


def stack_expected(m):
    """t R_l on V_l R_l(-1,0) -> V_{l+1} R_l for 0 < l < N, and t x R_0 on the wrap block."""
    mon = build_stack_monad(m)
    N = m.shape.N
    out = PolyMat(mon.D.targets, mon.C.sources)
    for rel in m.shape.relations():
        l = rel.index
        r = relation_residual(m, rel)
        if l == 0:
            out.add(0, N - 1, Poly.term(r, "t", "x"))
        else:
            out.add(l, l - 1, Poly.term(r, "t"))
    return out


# ---------------------------------------------------------------- weighted projective monad

def weighted_degrees(N):
    return {"z0": (N,), "z1": (N,), "z2": (1,)}


def build_weighted_monad(m, literal_signs=False):
    """Monad on the weighted projective plane with summands V_l(-l), V_l(1-l), V_l(N-l), W_l(-l).

    With literal_signs D.C equals -z0 (A_{l+1}B_l - B_lA_l - p_{l+1}q_l); the
    default uses -z0 p_{l+1} so that D.C vanishes exactly on the chainsaw relations.
    """
    _require(m, CHAINSAW)
    N = m.shape.N
    d = lambda l: m.dims[l % N]
    A = lambda l: m.arrows["A"][l % N]
    B = lambda l: m.arrows["B"][l % N]
    p = lambda l: m.arrows["p"][l % N]
    q = lambda l: m.arrows["q"][l % N]
    sign_p = 1 if literal_signs else -1

    src = [Summand(f"V{l}({-l})", d(l), (-l,)) for l in range(1, N + 1)]
    P = [Summand(f"V{l}({1 - l})", d(l), (1 - l,)) for l in range(1, N + 1)]
    Q = [Summand(f"V{l}({N - l})", d(l), (N - l,)) for l in range(1, N + 1)]
    Wm = [Summand(f"W{l}({-l})", 1, (-l,)) for l in range(N)]
    tgt = [Summand(f"V{l}({N + 1 - l})", d(l), (N + 1 - l,)) for l in range(1, N + 1)]
    mid = P + Q + Wm
    iS = lambda l: l - 1
    iP = lambda l: l - 1
    iQ = lambda l: N + l - 1
    iW = lambda l: 2 * N + l
    iT = lambda l: l - 1

    C = PolyMat(mid, src)
    D = PolyMat(tgt, mid)
    for l in range(1, N + 1):
        I = _I(d(l))
        loop = Poly.term(I, "z1") - Poly.term(A(l), "z0")
        C.add(iP(l), iS(l), -Poly.term(I, "z2"))
        C.add(iQ(l), iS(l), loop)
        D.add(iT(l), iP(l), loop)
        D.add(iT(l), iQ(l), Poly.term(I, "z2"))
    C.add(iP(1), iS(N), Poly.term(B(0), "z0"))
    C.add(iW(0), iS(N), Poly.term(q(0), "z0"))
    D.add(iT(1), iQ(N), -Poly.term(B(0), "z0"))
    for l in range(1, N):
        C.add(iP(l + 1), iS(l), Poly.term(B(l)))
        C.add(iW(l), iS(l), Poly.term(q(l)))
        D.add(iT(l + 1), iQ(l), -Poly.term(B(l)))
    for l in range(N):
        D.add(iT(l + 1), iW(l), Poly.term(p(l + 1), "z0").scale(sign_p))
    return Monad(C, D, weighted_degrees(N), "weighted")


def weighted_expected(m):
    """-z0 R_l on V_l(-l) -> V_{l+1}(N-l) for 0 < l < N and -z0^2 R_0 on V_N(-N) -> V_1(N)."""
    mon = build_weighted_monad(m)
    N = m.shape.N
    out = PolyMat(mon.D.targets, mon.C.sources)
    for rel in m.shape.relations():
        l = rel.index
        r = relation_residual(m, rel)
        if l == 0:
            out.add(0, N - 1, -Poly.term(r, ("z0", 2)))
        else:
            out.add(l, l - 1, -Poly.term(r, "z0"))
    return out


# ---------------------------------------------------------------- blowup: dual graded model

def section_basis(m, N):
    """Monomials y1^a y2^b with aN + b = m (empty for m < 0)."""
    if m < 0:
        return []
    return [(a, m - a * N) for a in range(m // N + 1)]


@dataclass
class DualGradedElement:
    """An element of Gamma(O(m))^* tensor Hom, by its values on the monomial basis."""
    N: int
    m: int
    rows: int
    cols: int
    coeffs: dict = field(default_factory=dict)   # (a, b) -> Mat

    def __post_init__(self):
        basis = set(section_basis(self.m, self.N))
        clean = {}
        for key, c in self.coeffs.items():
            if key not in basis:
                raise GradingError(f"monomial {key} is not of degree {self.m}")
            if c.shape != (self.rows, self.cols):
                raise ValueError("coefficient shape mismatch")
            if not c.is_zero():
                clean[key] = c
        self.coeffs = clean

    def is_zero(self):
        return not self.coeffs

    def __add__(self, other):
        if (self.m, self.rows, self.cols) != (other.m, other.rows, other.cols):
            raise GradingError("adding dual elements of different degree or shape")
        c = dict(self.coeffs)
        for k, v in other.coeffs.items():
            c[k] = c[k] + v if k in c else v
        return DualGradedElement(self.N, self.m, self.rows, self.cols, c)

    def __neg__(self):
        return DualGradedElement(self.N, self.m, self.rows, self.cols,
                                 {k: -v for k, v in self.coeffs.items()})

    def after(self, f):
        """phi o f for a polynomial map f in y1, y2: (phi o f)(s) = phi(f s)."""
        return self._compose(f, pre=True)

    def before(self, g):
        """g o phi: (g o phi)(s) = phi(g s), coefficients post-multiplied by g."""
        return self._compose(g, pre=False)

    def _compose(self, poly, pre):
        out = None
        for mono, mat in poly.terms.items():
            ex = dict(mono)
            if set(ex) - {"y1", "y2"}:
                raise GradingError(f"unexpected symbol in {mono}")
            i, j = ex.get("y1", 0), ex.get("y2", 0)
            c = i * self.N + j
            rows, cols = (self.rows, mat.cols) if pre else (mat.rows, self.cols)
            res = {}
            for a, b in section_basis(self.m - c, self.N):
                v = self.coeffs.get((a + i, b + j))
                if v is not None:
                    res[(a, b)] = v @ mat if pre else mat @ v
            part = DualGradedElement(self.N, self.m - c, rows, cols, res) if self.m - c >= 0 else None
            if part is None:
                continue
            out = part if out is None else out + part
        return out

    def to_text(self):
        if not self.coeffs:
            return "0"
        parts = []
        for (a, b) in sorted(self.coeffs):
            c = self.coeffs[(a, b)]
            rows = "; ".join(" ".join(str(x) for x in c.row(i)) for i in range(c.rows))
            parts.append(f"({_mono_str(_mono(('y1', a), ('y2', b)))})^*[{rows}]")
        return " + ".join(parts)


class ExtMat:
    """Block matrix of DualGradedElements; blocks[(i, j)] goes sources[j] -> targets[i]."""

    def __init__(self, N, targets, sources, blocks=None):
        self.N = N
        self.targets = list(targets)
        self.sources = list(sources)
        self.blocks = {}
        for key, v in (blocks or {}).items():
            self.add(*key, v)

    def add(self, i, j, v):
        if v is None:
            return
        if (v.rows, v.cols) != (self.targets[i].dim, self.sources[j].dim):
            raise ValueError("block shape mismatch")
        if (i, j) in self.blocks:
            v = self.blocks[(i, j)] + v
        if v.is_zero():
            self.blocks.pop((i, j), None)
        else:
            self.blocks[(i, j)] = v

    def after(self, pm):
        """self o pm for a PolyMat pm whose targets are self's sources."""
        out = ExtMat(self.N, self.targets, pm.sources)
        for (i, k), phi in self.blocks.items():
            for (k2, j), f in pm.blocks.items():
                if k == k2:
                    out.add(i, j, phi.after(f))
        return out

    def before(self, pm):
        """pm o self for a PolyMat pm whose sources are self's targets."""
        out = ExtMat(self.N, pm.targets, self.sources)
        for (k, j), phi in self.blocks.items():
            for (i, k2), g in pm.blocks.items():
                if k == k2:
                    out.add(i, j, phi.before(g))
        return out

    def __sub__(self, other):
        out = ExtMat(self.N, self.targets, self.sources, self.blocks)
        for (i, j), v in other.blocks.items():
            out.add(i, j, -v)
        return out

    def is_zero(self):
        return not self.blocks

    def flatten(self):
        """Sparse coordinate dict (block, monomial, row, col) -> value."""
        out = {}
        for (i, j), v in self.blocks.items():
            for mono, c in v.coeffs.items():
                for r in range(c.rows):
                    for s in range(c.cols):
                        if c[r, s]:
                            out[(i, j, mono, r, s)] = c[r, s]
        return out

    def to_text(self):
        lines = []
        for i, j in sorted(self.blocks):
            lines.append(f"{self.targets[i].label} <- {self.sources[j].label}: "
                         f"{self.blocks[(i, j)].to_text()}")
        return "\n".join(lines) if lines else "0"


# Sign conventions for the blowup data.  "literal" takes every sign as +1 with no y1 term;
# "consistent" negates the y2 entries and the y1 entry of gamma, negates y2.delta in
# gamma', and completes kappa''_2 on V_0 by its y1-dual component e.delta.
BLOWUP_CONVENTIONS = {
    "literal": {"g_y2": 1, "g_y1": 1, "g_delta": 1, "gp_y2": 1, "gp_y1B0": 1,
              "gp_y2delta": 1, "k2_y1": 0},
    "consistent": {"g_y2": -1, "g_y1": -1, "g_delta": 1, "gp_y2": -1, "gp_y1B0": 1,
                   "gp_y2delta": -1, "k2_y1": 1},
}

def blowup_degrees(N):
    return {"y1": (N,), "y2": (1,)}


@dataclass
class BlowupData:
    N: int
    gamma: PolyMat
    gamma_prime: PolyMat
    kappa1: ExtMat
    kappa2: ExtMat
    beta: PolyMat
    gamma_twisted: PolyMat
    convention: str

    def audit(self):
        degs = blowup_degrees(self.N)
        bad = []
        for pm in (self.gamma, self.gamma_prime, self.beta, self.gamma_twisted):
            bad += pm.grading_violations(degs)
        if bad:
            raise GradingError(f"grading audit failed: {bad}")
        return True

    def dump(self):
        return "\n".join([
            f"# blowup data ({self.convention}), N = {self.N}",
            "## gamma", self.gamma.to_text(),
            "## gamma'", self.gamma_prime.to_text(),
            "## beta", self.beta.to_text(),
            "## kappa''_1", self.kappa1.to_text(),
            "## kappa''_2", self.kappa2.to_text(), ""])


def _chain(m, l, upto):
    """B_{upto-1} ... B_l : V_l -> V_upto (identity when upto == l)."""
    x = Mat.identity(m.dims[l])
    for i in range(l, upto):
        x = m.arrows["B"][i] @ x
    return x


def build_blowup_data(m, convention="consistent"):
    """gamma, gamma', kappa''_1, kappa''_2 and beta for a dented chainsaw module."""
    _require(m, DENTED)
    if convention not in BLOWUP_CONVENTIONS:
        raise ValueError(f"unknown sign convention {convention!r}")
    sg = BLOWUP_CONVENTIONS[convention]
    N = m.shape.N
    d = m.dims
    B = m.arrows["B"]
    e, delta = m.arrows["e"][0], m.arrows["delta"][0]
    A = lambda l: m.arrows["A"][l]
    I = lambda l: Mat.identity(d[l])

    # gamma: V_0(-N) + sum_{l<N} V_l(-l-1) -> sum_{l<=N} V_l(-l)
    g_src = [Summand(f"V0({-N})", d[0], (-N,))] + \
            [Summand(f"V{l}({-l - 1})", d[l], (-l - 1,)) for l in range(N)]
    g_tgt = [Summand(f"V{l}({-l})", d[l], (-l,)) for l in range(N + 1)]
    gamma = PolyMat(g_tgt, g_src)
    for l in range(N):
        gamma.add(l, 1 + l, Poly.term(I(l), "y2").scale(sg["g_y2"]))
        gamma.add(l + 1, 1 + l, Poly.term(B[l]))
    gamma.add(0, 0, Poly.term(I(0), "y1").scale(sg["g_y1"]))
    gamma.add(N, 0, Poly.term(delta).scale(sg["g_delta"]))
    # the same map twisted by O(N), which is what the kappas compose with
    gamma_tw = PolyMat([Summand(f"V{l}({N - l})", d[l], (N - l,)) for l in range(N + 1)],
                       [Summand("V0(0)", d[0], (0,))] +
                       [Summand(f"V{l}({N - l - 1})", d[l], (N - l - 1,)) for l in range(N)],
                       gamma.blocks)

    # gamma': V_0(-N-1) + sum_{0<l<N} V_l(-l-1) -> sum_{0<l<=N} V_l(-l)
    gp_src = [Summand(f"V0({-N - 1})", d[0], (-N - 1,))] + \
             [Summand(f"V{l}({-l - 1})", d[l], (-l - 1,)) for l in range(1, N)]
    gp_tgt = [Summand(f"V{l}({-l})", d[l], (-l,)) for l in range(1, N + 1)]
    gp = PolyMat(gp_tgt, gp_src)
    T = lambda l: l - 1            # gamma' target index of V_l(-l)
    U = lambda l: l                # gamma' source index of V_l(-l-1), 0 < l < N
    for l in range(1, N):
        gp.add(T(l), U(l), Poly.term(I(l), "y2").scale(sg["gp_y2"]))
        gp.add(T(l + 1), U(l), Poly.term(B[l]))
    gp.add(T(1), 0, Poly.term(B[0], "y1").scale(sg["gp_y1B0"]))
    gp.add(T(N), 0, Poly.term(delta, "y2").scale(sg["gp_y2delta"]))

    # beta: G_inf = sum_l W_l(-l-1) -> sum_{0<l<=N} V_l(-l)
    w_src = [Summand(f"W{l}({-l - 1})", 1, (-l - 1,)) for l in range(N)]
    beta = PolyMat(gp_tgt, w_src)
    for l in range(N):
        beta.add(T(l + 1), l, Poly.term(m.arrows["p"][l + 1]))

    # kappa''_1: sum_{l<=N} V_l(N-l) -> G_inf, (y2^m)^* q_{l+m} B_{l+m-1}...B_l
    k_src = gamma_tw.targets
    k1 = ExtMat(N, w_src, k_src)
    for l in range(N + 1):
        for j in range(l, N):
            mdeg = j - l
            k1.add(j, l, DualGradedElement(N, mdeg, 1, d[l],
                                           {(0, mdeg): m.arrows["q"][j] @ _chain(m, l, j)}))

    # kappa''_2: sum_{l<=N} V_l(N-l) -> V_0(-N-1) + sum_{0<i<N} V_i(-i-1)
    k2 = ExtMat(N, gp_src, k_src)
    for l in range(N + 1):
        coeffs = {(0, N - l): e @ _chain(m, l, N)}
        if l == 0 and sg["k2_y1"]:
            coeffs[(1, 0)] = (e @ delta).scale(sg["k2_y1"])
        k2.add(0, l, DualGradedElement(N, N - l, d[0], d[l], coeffs))
        for i in range(max(l, 1), N):
            mdeg = i - l
            k2.add(U(i), l, DualGradedElement(N, mdeg, d[i], d[l],
                                              {(0, mdeg): A(i) @ _chain(m, l, i)}))
    data = BlowupData(N, gamma, gp, k1, k2, beta, gamma_tw, convention)
    data.audit()
    return data


@dataclass
class BlowupResiduals:
    kappa1_gamma: ExtMat
    kappa2_gamma: ExtMat
    middle: ExtMat          # gamma' o kappa''_2 - beta o kappa''_1
    middle_in_ambiguity: bool

    def all_zero(self):
        return self.kappa1_gamma.is_zero() and self.kappa2_gamma.is_zero() and self.middle_in_ambiguity

    def summary(self):
        return {"kappa1_gamma": "zero" if self.kappa1_gamma.is_zero() else "nonzero",
                "kappa2_gamma": "zero" if self.kappa2_gamma.is_zero() else "nonzero",
                "beta_kappa1_vs_gamma_prime_kappa2":
                    "zero" if self.middle.is_zero() else
                    ("in ambiguity" if self.middle_in_ambiguity else "nonzero")}


def _ambiguity_span(data):
    """gamma' o X o kappa''_1 for X running over a basis of Hom(G_inf, source of gamma')."""
    N = data.N
    out = []
    w_src = data.beta.sources
    gp_src = data.gamma_prime.sources
    for j, ws in enumerate(w_src):
        for i, vs in enumerate(gp_src):
            c = vs.degree[0] - ws.degree[0]
            for a, b in section_basis(c, N):
                for r in range(vs.dim):
                    unit = Mat(vs.dim, 1, [1 if t == r else 0 for t in range(vs.dim)])
                    X = PolyMat(gp_src, w_src)
                    X.add(i, j, Poly.term(unit, ("y1", a), ("y2", b)))
                    out.append(data.kappa1.before(X).before(data.gamma_prime))
    return out


def _in_span(target, span):
    tv = target.flatten()
    if not tv:
        return True
    vecs = [s.flatten() for s in span]
    keys = sorted(set(tv).union(*[set(v) for v in vecs]), key=repr)
    if not vecs:
        return False
    a = Mat(len(keys), len(vecs), [v.get(k, 0) for k in keys for v in vecs])
    b = Mat(len(keys), 1, [tv.get(k, 0) for k in keys])
    return solve_linear(a, b) is not None


def verify_blowup_identities(data):
    """kappa''_1 o gamma, kappa''_2 o gamma, and beta o kappa''_1 against gamma' o kappa''_2."""
    r1 = data.kappa1.after(data.gamma_twisted)
    r2 = data.kappa2.after(data.gamma_twisted)
    mid = data.kappa2.before(data.gamma_prime) - data.kappa1.before(data.beta)
    ok = mid.is_zero() or _in_span(mid, _ambiguity_span(data))
    return BlowupResiduals(r1, r2, mid, ok)
