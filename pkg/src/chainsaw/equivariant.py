"""Cyclic group actions on chainsaw and dented data, fixed points and their gradings."""

from dataclasses import dataclass
from fractions import Fraction

from .cyclotomic import CyclotomicField, Cyclo
from .linalg import Mat, inverse, is_invertible, kernel, make_rng, solve_linear
from .quiver import (CHAINSAW, DENTED, FIXED, RIFT, DimVector, QuiverDataError,
                     QuiverModule, QuiverShape, gauge_act, index_str)


class NonDiagonalizable(ValueError):
    """The gauge element is not semisimple with the eigenvalues a grading requires."""


class BlockLeak(ValueError):
    """An arrow has a nonzero block that the graded quiver does not allow."""


def _require_plain(m):
    if m.shape.kind not in (CHAINSAW, DENTED):
        raise QuiverDataError(f"expected a Chainsaw or DentedChainsaw module, got {m.shape.kind}")


def field_for(N, k):
    return CyclotomicField(k * N)


# ---------------------------------------------------------------- the action

def gamma_act(m, k, power=1):
    """Act by the generator of the cyclic group of order kN raised to `power`.

    B and p are scaled by zeta_{kN}; on dented data e and delta pick up
    zeta_k^{-2} and zeta_k^{2}.  Entries of the result live in Q(zeta_{kN}).
    """
    _require_plain(m)
    F = field_for(m.shape.N, k)
    z = F.zeta(power)
    arrows = {n: dict(d) for n, d in m.arrows.items()}
    for name in ("B", "p"):
        arrows[name] = {i: x.scale(z) for i, x in m.arrows[name].items()}
    for name, d in (("A", m.arrows["A"]), ("q", m.arrows["q"])):
        arrows[name] = {i: x.scale(F.zeta(0)) for i, x in d.items()}
    if m.shape.kind == DENTED:
        arrows["e"] = {0: m.arrows["e"][0].scale(F.root(k, -2 * power))}
        arrows["delta"] = {0: m.arrows["delta"][0].scale(F.root(k, 2 * power))}
    return QuiverModule(m.shape, m.dims, arrows)


def framing_exponents(shape, k, twist=True):
    """Exponent a_l with the framing line W_l acted on by zeta_{kN}^{a_l}.

    The graded quivers only arise when W_l carries the character zeta_{kN}^{-l};
    with ``twist=False`` every framing line is acted on trivially.
    """
    N = shape.N
    return {l: (-l if twist else 0) % (k * N) for l in range(N)}


def eigen_exponent(kind, N, k, l, r):
    """Exponent of the g-eigenvalue on the graded piece V_l^r (powers of zeta_{kN})."""
    if kind in (CHAINSAW, FIXED):
        if l % N == 0:
            return (-(r + 1) * N) % (k * N)
        return (-r * N - l) % (k * N)
    return (r * N - l) % (k * N)


def _p_source_line(shape, l):
    # p_l starts at W_{l-1}
    return (l - 1) % shape.N


def framed_gauge_act(g, h, m):
    """g on internal vertices, scalar h[l] on the framing line W_l."""
    arrows = {n: {} for n in m.shape.arrow_names()}
    ginv = {v: inverse(x) for v, x in g.items()}
    for a in m.shape.arrows():
        x = m.arrows[a.name][a.index]
        if a.name == "p":
            x = (g[a.target] @ x).scale(1 / h[_p_source_line(m.shape, a.index)])
        elif a.name == "q":
            x = (x @ ginv[a.source]).scale(h[a.index])
        else:
            x = g[a.target] @ x @ ginv[a.source]
        arrows[a.name][a.index] = x
    return QuiverModule(m.shape, m.dims, arrows)


def _unknown_layout(m):
    offsets, n = {}, 0
    for v in m.shape.vertices():
        offsets[v] = n
        n += m.dims[v] ** 2
    return offsets, n


def _intertwiner_system(src, m, h, F):
    """Linear equations for g with framed_gauge_act(g, h, src) = m.

    Written as g_t X' = X g_s for internal arrows, g_t p'_l = h p_l and
    h q'_l = q_l g_s for the legs, where X' is an arrow of src and X the same
    arrow of m.  Unknowns: row-major entries of every g_v.
    """
    sh = m.shape
    mm = src
    offsets, n = _unknown_layout(m)
    dims = m.dims
    zero = F.elem([0])
    rows, rhs = [], []

    def blank():
        return [zero] * n

    for a in sh.arrows():
        x = m.arrows[a.name][a.index]
        xp = mm.arrows[a.name][a.index]
        if a.name == "p":
            t = a.target
            dt = dims[t]
            hv = h[_p_source_line(sh, a.index)]
            for i in range(dt):
                row = blank()
                for c in range(dt):
                    row[offsets[t] + i * dt + c] = xp[c, 0]
                rows.append(row)
                rhs.append(hv * x[i, 0])
        elif a.name == "q":
            s = a.source
            ds = dims[s]
            hv = h[a.index]
            for j in range(ds):
                row = blank()
                for c in range(ds):
                    row[offsets[s] + c * ds + j] = x[0, c]
                rows.append(row)
                rhs.append(hv * xp[0, j])
        else:
            s, t = a.source, a.target
            ds, dt = dims[s], dims[t]
            for i in range(dt):
                for j in range(ds):
                    row = blank()
                    for c in range(dt):
                        row[offsets[t] + i * dt + c] += xp[c, j]
                    for c in range(ds):
                        row[offsets[s] + c * ds + j] -= x[i, c]
                    rows.append(row)
                    rhs.append(zero)
    a = Mat(len(rows), n, [v for r in rows for v in r])
    b = Mat(len(rows), 1, rhs)
    return a, b, offsets


def _unpack(m, vec, offsets):
    g = {}
    for v in m.shape.vertices():
        d = m.dims[v]
        o = offsets[v]
        g[v] = Mat(d, d, vec[o:o + d * d])
    return g


def _find_intertwiner(src, m, h, F, seed, trials):
    a, b, offsets = _intertwiner_system(src, m, h, F)
    sol = solve_linear(a, b)
    if sol is None:
        return None
    x, ker = sol
    rng = make_rng(seed)
    base = list(x.entries())
    candidates = [base]
    if ker.cols:
        for _ in range(trials):
            coeffs = [rng.randint(-10, 10) for _ in range(ker.cols)]
            candidates.append([base[i] + sum(ker[i, j] * coeffs[j] for j in range(ker.cols))
                               for i in range(len(base))])
    for vec in candidates:
        g = _unpack(m, vec, offsets)
        if all(is_invertible(gv) for gv in g.values()):
            return g
    return None


def find_fixing_gauge(m, k, seed=0, framing_twist=True, trials=8):
    """A gauge element g with framed_gauge_act(g, h, gamma_act(m, k)) = m, or None.

    The solutions form an affine space; we try its particular solution and then
    `trials` random points for an invertible one.  None means no invertible
    element was found, which is conclusive only when the space is a single point.
    """
    _require_plain(m)
    F = field_for(m.shape.N, k)
    h = {l: F.zeta(e) for l, e in framing_exponents(m.shape, k, framing_twist).items()}
    return _find_intertwiner(gamma_act(m, k, 1), m, h, F, seed, trials)


def gauge_equivalent(x, y, N, k, seed=0, trials=8):
    """An invertible g with gauge_act(g, x) = y (framing untouched), or None.

    Entries may lie in Q(zeta_{kN}).  As with find_fixing_gauge, None is
    conclusive only when the solution space of the linear system is a point.
    """
    if x.shape != y.shape or x.dims != y.dims:
        return None
    F = field_for(N, k)
    h = {l: F.zeta(0) for l in range(x.shape.N)}
    return _find_intertwiner(x, y, h, F, seed, trials)


def check_fixing_gauge(m, g, k, framing_twist=True):
    """Exact check of framed_gauge_act(g, h, gamma_act(m, k)) == m."""
    F = field_for(m.shape.N, k)
    h = {l: F.zeta(e) for l, e in framing_exponents(m.shape, k, framing_twist).items()}
    try:
        out = framed_gauge_act(g, h, gamma_act(m, k, 1))
    except ZeroDivisionError:
        return False
    return out == m


# ---------------------------------------------------------------- gradings

def graded_shape(shape, k):
    _require_plain_shape(shape)
    return QuiverShape(FIXED if shape.kind == CHAINSAW else RIFT, shape.N, k)


def plain_shape(shape):
    if shape.kind == FIXED:
        return QuiverShape(CHAINSAW, shape.N)
    if shape.kind == RIFT:
        return QuiverShape(DENTED, shape.N)
    raise QuiverDataError(f"{shape.kind} is not a graded shape")


def _require_plain_shape(shape):
    if shape.kind not in (CHAINSAW, DENTED):
        raise QuiverDataError(f"expected a Chainsaw or DentedChainsaw shape, got {shape.kind}")


@dataclass(frozen=True)
class CyclicGrading:
    """Per-vertex basis change whose column blocks are the pieces V_l^r, r = 0..k-1."""
    k: int
    bases: dict     # plain vertex -> invertible Mat
    sizes: dict     # plain vertex -> tuple of block sizes

    def to_json(self):
        return {"k": self.k,
                "bases": {index_str(v): [[str(x) for x in b.row(i)] for i in range(b.rows)]
                          for v, b in self.bases.items()},
                "sizes": {index_str(v): list(s) for v, s in self.sizes.items()}}


def _offsets(sizes):
    out, o = [], 0
    for s in sizes:
        out.append(o)
        o += s
    return out


def _block(x, roff, rsz, coff, csz):
    return x.submatrix(range(roff, roff + rsz), range(coff, coff + csz))


def _rationalize(x, what):
    out = []
    for v in x.entries():
        if isinstance(v, Cyclo):
            if not v.is_rational():
                raise NonDiagonalizable(f"{what} is not defined over the rationals")
            v = v.to_fraction()
        out.append(v)
    return Mat(x.rows, x.cols, out)


def eigendecompose(m, g, k):
    """Split a fixed module along the eigenspaces of g into a ChainsawFixed or Rift module.

    Returns (graded module, CyclicGrading).  Raises NonDiagonalizable if some g_v
    is not diagonalizable with the expected eigenvalues (or has irrational
    eigenspaces) and BlockLeak if an arrow has a forbidden nonzero block.
    """
    _require_plain(m)
    sh = m.shape
    gsh = graded_shape(sh, k)
    F = field_for(sh.N, k)
    bases, sizes = {}, {}
    for l in sh.vertices():
        d = m.dims[l]
        gl = g[l]
        if gl.shape != (d, d):
            raise QuiverDataError(f"gauge block at {l} has shape {gl.shape}")
        power = gl.pow(k) if d else gl
        if d and any(power[i, j] != (power[0, 0] if i == j else 0) for i in range(d) for j in range(d)):
            raise NonDiagonalizable(f"g^k is not scalar at vertex {l}")
        cols, sz = [], []
        for r in range(k):
            c = F.zeta(eigen_exponent(sh.kind, sh.N, k, l, r))
            shifted = gl - Mat.scalar(d, c) if d else gl
            basis = _rationalize(kernel(shifted), f"eigenspace ({l},{r})") if d else Mat(0, 0)
            cols.append(basis)
            sz.append(basis.cols)
        if sum(sz) != d:
            raise NonDiagonalizable(f"eigenspaces at vertex {l} span {sum(sz)} of {d} dimensions")
        bases[l] = cols[0].hstack(*cols[1:]) if d else Mat(0, 0)
        sizes[l] = tuple(sz)
    grading = CyclicGrading(k, bases, sizes)

    gdims = DimVector(gsh, {(l, r): sizes[l][r] for l in sh.vertices() for r in range(k)})
    binv = {l: inverse(b) for l, b in bases.items()}
    allowed = {}
    for a in gsh.arrows():
        allowed.setdefault(a.name, {})[(_plain(a.source), a.index)] = a
    out = {n: {} for n in gsh.arrow_names()}
    for a in sh.arrows():
        x = m.arrows[a.name][a.index]
        if a.target is not None:
            x = binv[a.target] @ x
        if a.source is not None:
            x = x @ bases[a.source]
        t_off = _offsets(sizes[a.target]) if a.target is not None else [0]
        s_off = _offsets(sizes[a.source]) if a.source is not None else [0]
        t_sz = sizes[a.target] if a.target is not None else (1,)
        s_sz = sizes[a.source] if a.source is not None else (1,)
        kept = {}
        for gi in gsh.arrows():
            if gi.name != a.name or not _restricts(a, gi, gsh):
                continue
            rs = gi.source[1] if gi.source is not None else 0
            rt = gi.target[1] if gi.target is not None else 0
            kept[(rt, rs)] = gi
        for rt in range(len(t_sz)):
            for rs in range(len(s_sz)):
                blk = _block(x, t_off[rt], t_sz[rt], s_off[rs], s_sz[rs])
                if (rt, rs) in kept:
                    out[a.name][kept[(rt, rs)].index] = blk
                elif not blk.is_zero():
                    raise BlockLeak(f"arrow {a.name}[{index_str(a.index)}] has a nonzero block "
                                    f"from piece {rs} to piece {rt}")
    return QuiverModule(gsh, gdims, out), grading


def _plain(v):
    return None if v is None else v[0]


def _restricts(a, gi, gsh):
    """Does the graded arrow gi sit inside the plain arrow a?"""
    if gi.name in ("e", "delta"):
        return True
    if gi.name in ("p", "q"):
        return gi.index == a.index
    return gi.index[0] == a.index


def assemble(gm, grading=None):
    """Forget the grading: direct-sum a ChainsawFixed/Rift module into a Chainsaw/DentedChainsaw one.

    With a grading, the result is expressed in the original basis, i.e. this
    inverts eigendecompose exactly.
    """
    gsh = gm.shape
    sh = plain_shape(gsh)
    k = gsh.k
    sizes = {l: tuple(gm.dims[(l, r)] for r in range(k)) for l in sh.vertices()}
    dims = DimVector(sh, {l: sum(sizes[l]) for l in sh.vertices()})
    out = {n: {} for n in sh.arrow_names()}
    for a in sh.arrows():
        rows = dims[a.target] if a.target is not None else 1
        cols = dims[a.source] if a.source is not None else 1
        grid = [[Fraction(0)] * cols for _ in range(rows)]
        for gi in gsh.arrows():
            if gi.name != a.name or not _restricts(a, gi, gsh):
                continue
            rt = gi.target[1] if gi.target is not None else None
            rs = gi.source[1] if gi.source is not None else None
            to = _offsets(sizes[a.target])[rt] if rt is not None else 0
            so = _offsets(sizes[a.source])[rs] if rs is not None else 0
            blk = gm.arrows[gi.name][gi.index]
            for i in range(blk.rows):
                for j in range(blk.cols):
                    grid[to + i][so + j] = blk[i, j]
        out[a.name][a.index] = Mat(rows, cols, [v for r in grid for v in r])
    m = QuiverModule(sh, dims, out)
    if grading is not None:
        m = gauge_act(grading.bases, m)
    return m


def canonical_gauge(gm):
    """Diagonal fixing gauge of assemble(gm) in the assembled basis."""
    gsh = gm.shape
    sh = plain_shape(gsh)
    k = gsh.k
    F = field_for(sh.N, k)
    g = {}
    for l in sh.vertices():
        vals = []
        for r in range(k):
            vals += [F.zeta(eigen_exponent(sh.kind, sh.N, k, l, r))] * gm.dims[(l, r)]
        g[l] = Mat.diag(vals) if vals else Mat(0, 0)
    return g


# ---------------------------------------------------------------- dimension vectors

def dim_tilde_of(d, k):
    """d^0_l = d_l and d^r_l = d_N for r != 0; vertex 0 of a chainsaw plays V_N."""
    if d.shape.kind != CHAINSAW:
        raise QuiverDataError("dim_tilde_of expects a chainsaw dimension vector")
    N = d.shape.N
    sh = QuiverShape(FIXED, N, k)
    out = {}
    for l in range(N):
        for r in range(k):
            out[(l, r)] = d[l] if r == 0 else d[0]
    return DimVector(sh, out)


def chain_sequence(dt):
    """d_N^0, d_1^1, ..., d_N^1, d_1^2, ..., d_N^{k-1} in the order of the nonemptiness chain."""
    sh = dt.shape
    N, k = sh.N, sh.k
    seq = [dt[(0, 0)]]
    for r in range(1, k):
        for l in range(1, N + 1):
            seq.append(dt[(l % N, r)])
    return seq


def nonempty_chain_check(dt):
    if dt.shape.kind != FIXED:
        raise QuiverDataError("nonempty_chain_check expects a ChainsawFixed dimension vector")
    seq = chain_sequence(dt)
    return all(a >= b for a, b in zip(seq, seq[1:]))


def admissible_check(dh):
    """d_0^r = d_N^r for every r, and for r != 0 the column (d_l^r)_l is constant."""
    if dh.shape.kind != RIFT:
        raise QuiverDataError("admissible_check expects a Rift dimension vector")
    N, k = dh.shape.N, dh.shape.k
    for r in range(k):
        if dh[(0, r)] != dh[(N, r)]:
            return False
        if r and len({dh[(l, r)] for l in range(N + 1)}) != 1:
            return False
    return True


# ---------------------------------------------------------------- defect classes

def hermite_normal_form(rows):
    """Row-style Hermite normal form of an integer matrix given as a list of rows.

    Nonzero rows come first, pivots are positive and move strictly right, and
    entries above a pivot are reduced into [0, pivot).
    """
    a = [list(map(int, r)) for r in rows]
    if not a:
        return []
    ncols = len(a[0])
    r = 0
    for c in range(ncols):
        # gcd-reduce column c among rows r..
        while True:
            nz = [i for i in range(r, len(a)) if a[i][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(a[i][c]))
            a[r], a[piv] = a[piv], a[r]
            done = True
            for i in range(r + 1, len(a)):
                if a[i][c]:
                    f = a[i][c] // a[r][c]
                    a[i] = [x - f * y for x, y in zip(a[i], a[r])]
                    if a[i][c]:
                        done = False
            if done:
                break
        if r < len(a) and a[r][c] != 0:
            if a[r][c] < 0:
                a[r] = [-x for x in a[r]]
            for i in range(r):
                f = a[i][c] // a[r][c]
                if f:
                    a[i] = [x - f * y for x, y in zip(a[i], a[r])]
            r += 1
            if r == len(a):
                break
    return [row for row in a if any(row)]


def _reduce(vec, hnf):
    v = list(vec)
    for row in hnf:
        c = next(j for j, x in enumerate(row) if x)
        f = v[c] // row[c]
        if f:
            v = [x - f * y for x, y in zip(v, row)]
    return v


@dataclass(frozen=True)
class DefectClass:
    N: int
    k: int
    representative: tuple

    def is_zero(self):
        return not any(self.representative)

    def to_json(self):
        return {"N": self.N, "k": self.k, "representative": list(self.representative)}


def defect_lattice(N, k):
    """HNF of the span of dim_tilde_of(unit vectors), flattened in vertex order."""
    csh = QuiverShape(CHAINSAW, N)
    vs = QuiverShape(FIXED, N, k).vertices()
    gens = []
    for j in range(N):
        dt = dim_tilde_of(DimVector(csh, [1 if i == j else 0 for i in range(N)]), k)
        gens.append([dt[v] for v in vs])
    return hermite_normal_form(gens)


def defect_class(dt):
    if dt.shape.kind != FIXED:
        raise QuiverDataError("defect_class expects a ChainsawFixed dimension vector")
    N, k = dt.shape.N, dt.shape.k
    vec = [dt[v] for v in dt.shape.vertices()]
    return DefectClass(N, k, tuple(_reduce(vec, defect_lattice(N, k))))
