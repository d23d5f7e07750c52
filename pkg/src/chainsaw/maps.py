"""Maps between the quiver shapes, and the open-piece isomorphism to cyclic Nakajima data."""

from dataclasses import dataclass

from .linalg import Mat, inverse, is_invertible, kernel, make_rng, random_matrix
from .quiver import (
    CHAINSAW, DENTED, FIXED, RIFT, DimVector, QuiverDataError, QuiverModule, QuiverShape,
)


class NotOnOpenPiece(ValueError):
    """A row composition B_{N-1}...B_0 is not invertible."""


class InfeasibleDims(ValueError):
    pass


def _require(m, kind):
    if m.shape.kind != kind:
        raise QuiverDataError(f"expected a {kind} module, got {m.shape.kind}")


# ---------------------------------------------------------------- rotation

def rotate(m):
    """Shift all chainsaw data by one step: V'_l = V_{l+1}, so d'_l = d_{l+1}."""
    _require(m, CHAINSAW)
    N = m.shape.N
    dims = DimVector(m.shape, [m.dims[(l + 1) % N] for l in range(N)])
    arrows = {name: {l: m.arrows[name][(l + 1) % N] for l in range(N)}
              for name in ("A", "B", "p", "q")}
    return QuiverModule(m.shape, dims, arrows)


def rotate_dims(dims):
    N = dims.shape.N
    return DimVector(dims.shape, [dims[(l + 1) % N] for l in range(N)])


# ---------------------------------------------------------------- direct image

def _chain_path(m, start, end, full_cycle=False):
    """Composite of the B arrows walking from vertex `start` to vertex `end`."""
    sh = m.shape
    out = Mat.identity(m.dims[start])
    v = start
    steps = 0
    while v != end or (full_cycle and steps == 0):
        out = m.arrows["B"][v] @ out
        v = sh.b_target(v)
        steps += 1
        if steps > len(sh.vertices()):
            raise QuiverDataError(f"no B-path from {start} to {end}")
    return out


def psi_direct_image(m):
    """Graded Q^k data to chainsaw data: keep row 0 (and V_N^{-1}), compose the rest."""
    _require(m, FIXED)
    N, k = m.shape.N, m.shape.k
    last = (0, k - 1)              # V_N^{-1}
    keep = {l: (l, 0) for l in range(1, N)}
    keep[0] = last
    shape = QuiverShape(CHAINSAW, N)
    dims = DimVector(shape, [m.dims[keep[l]] for l in range(N)])
    A = {l: m.arrows["A"][keep[l]] for l in range(N)}
    B = {}
    for l in range(1, N - 1):
        B[l] = m.arrows["B"][(l, 0)]
    if N >= 2:
        B[N - 1] = _chain_path(m, (N - 1, 0), last)
        B[0] = m.arrows["B"][last]
    else:
        B[0] = _chain_path(m, last, last, full_cycle=True)
    p = {l: m.arrows["p"][l] for l in range(1, N)}
    p[0] = _chain_path(m, (0, 0), last) @ m.arrows["p"][0]
    q = {l: m.arrows["q"][l] for l in range(N)}
    return QuiverModule(shape, dims, {"A": A, "B": B, "p": p, "q": q})


# ---------------------------------------------------------------- blowdown

def blowdown_pi(m):
    """Dented data to chainsaw data: A'_0 = delta e, B'_0 = B_0 e, q'_0 = q_0 e."""
    _require(m, DENTED)
    N = m.shape.N
    e, delta = m.arrows["e"][0], m.arrows["delta"][0]
    shape = QuiverShape(CHAINSAW, N)
    # chainsaw vertex 0 is V_N; vertices 1..N-1 are kept
    dims = DimVector(shape, [m.dims[N]] + [m.dims[l] for l in range(1, N)])
    A = {0: delta @ e}
    A.update({l: m.arrows["A"][l] for l in range(1, N)})
    B = {0: m.arrows["B"][0] @ e}
    B.update({l: m.arrows["B"][l] for l in range(1, N)})
    p = {0: m.arrows["p"][N]}
    p.update({l: m.arrows["p"][l] for l in range(1, N)})
    q = {0: m.arrows["q"][0] @ e}
    q.update({l: m.arrows["q"][l] for l in range(1, N)})
    return QuiverModule(shape, dims, {"A": A, "B": B, "p": p, "q": q})


# ---------------------------------------------------------------- Psi^k and Pi^k

def psi_k(m):
    """Rift data to Q^k data by erasing the V_0 column: 'B_N = B_0 e, 'A_N = delta e, 'q_0 = q_0 e."""
    _require(m, RIFT)
    N, k = m.shape.N, m.shape.k
    shape = QuiverShape(FIXED, N, k)

    def src(v):   # Q^k vertex -> rift vertex
        l, r = v
        return (N, r) if l == 0 else (l, r)

    dims = DimVector(shape, {v: m.dims[src(v)] for v in shape.vertices()})
    A, B = {}, {}
    for r in range(k):
        A[(0, r)] = m.arrows["delta"][(r + 1) % k] @ m.arrows["e"][r]
        B[(0, r)] = m.arrows["B"][(0, (r + 1) % k)] @ m.arrows["e"][r]
        for l in range(1, N):
            A[(l, r)] = m.arrows["A"][(l, r)]
            B[(l, r)] = m.arrows["B"][(l, r)]
    p = {0: m.arrows["p"][N]}
    p.update({l: m.arrows["p"][l] for l in range(1, N)})
    q = {0: m.arrows["q"][0] @ m.arrows["e"][k - 1]}
    q.update({l: m.arrows["q"][l] for l in range(1, N)})
    return QuiverModule(shape, dims, {"A": A, "B": B, "p": p, "q": q})


def pi_k(m):
    """The composite psi_direct_image . psi_k."""
    return psi_direct_image(psi_k(m))


# ---------------------------------------------------------------- k = 1 identifications

def rift_to_dented(m):
    _require(m, RIFT)
    if m.shape.k != 1:
        raise QuiverDataError("only k = 1 rift data is dented data")
    N = m.shape.N
    shape = QuiverShape(DENTED, N)
    dims = DimVector(shape, [m.dims[(l, 0)] for l in range(N + 1)])
    arrows = {"A": {l: m.arrows["A"][(l, 0)] for l in range(1, N)},
              "B": {l: m.arrows["B"][(l, 0)] for l in range(N)},
              "e": {0: m.arrows["e"][0]}, "delta": {0: m.arrows["delta"][0]},
              "p": dict(m.arrows["p"]), "q": dict(m.arrows["q"])}
    return QuiverModule(shape, dims, arrows)


def dented_to_rift(m):
    _require(m, DENTED)
    N = m.shape.N
    shape = QuiverShape(RIFT, N, 1)
    dims = DimVector(shape, {(l, 0): m.dims[l] for l in range(N + 1)})
    arrows = {"A": {(l, 0): m.arrows["A"][l] for l in range(1, N)},
              "B": {(l, 0): m.arrows["B"][l] for l in range(N)},
              "e": {0: m.arrows["e"][0]}, "delta": {0: m.arrows["delta"][0]},
              "p": dict(m.arrows["p"]), "q": dict(m.arrows["q"])}
    return QuiverModule(shape, dims, arrows)


def fixed_to_chainsaw(m):
    _require(m, FIXED)
    if m.shape.k != 1:
        raise QuiverDataError("only k = 1 graded data is chainsaw data")
    N = m.shape.N
    shape = QuiverShape(CHAINSAW, N)
    dims = DimVector(shape, [m.dims[(l, 0)] for l in range(N)])
    arrows = {"A": {l: m.arrows["A"][(l, 0)] for l in range(N)},
              "B": {l: m.arrows["B"][(l, 0)] for l in range(N)},
              "p": dict(m.arrows["p"]), "q": dict(m.arrows["q"])}
    return QuiverModule(shape, dims, arrows)


# ---------------------------------------------------------------- cyclic Nakajima data

@dataclass(frozen=True)
class NakajimaCyclicModule:
    """Cyclic quiver data: B_r: V_r -> V_{r+1}, A_r: V_r -> V_{r-1}, framing of rank N at vertex 0.

    p has one column per framing line W_0..W_{N-1}; q has one row per line.
    """
    k: int
    N: int
    v: tuple
    B: tuple
    A: tuple
    p: Mat
    q: Mat

    def __post_init__(self):
        k, v = self.k, self.v
        if len(v) != k or len(self.A) != k or len(self.B) != k:
            raise QuiverDataError("cyclic data must have k vertices")
        for r in range(k):
            if self.B[r].shape != (v[(r + 1) % k], v[r]):
                raise QuiverDataError(f"B''_{r} has shape {self.B[r].shape}")
            if self.A[r].shape != (v[(r - 1) % k], v[r]):
                raise QuiverDataError(f"A''_{r} has shape {self.A[r].shape}")
        if self.p.shape != (v[0], self.N) or self.q.shape != (self.N, v[0]):
            raise QuiverDataError("framing maps have the wrong shape")

    @property
    def w(self):
        return (self.N,) + (0,) * (self.k - 1)

    def bracket(self, r):
        """A''_{r+1} B''_r - B''_{r-1} A''_r on V''_r (no framing term)."""
        k = self.k
        return self.A[(r + 1) % k] @ self.B[r] - self.B[(r - 1) % k] @ self.A[r]

    def moment_residual(self, r):
        """Residual of the relation A''_{r+1}B''_r - B''_{r-1}A''_r + [r = 0] p''q'' = 0."""
        res = self.bracket(r)
        if r == 0:
            res = res + self.p @ self.q
        return res

    def moment_residuals(self):
        return [self.moment_residual(r) for r in range(self.k)]


def random_nakajima(v, N, k, rng, bound=10):
    """Random cyclic data satisfying the moment-map relations.

    B'' and p'' are random; (A'', q'') is a random point of the linear solution space.
    """
    v = tuple(int(x) for x in v)
    if len(v) != k or any(x < 0 for x in v):
        raise InfeasibleDims(f"bad dimension vector {v} for k = {k}")
    B = tuple(random_matrix(rng, v[(r + 1) % k], v[r], bound) for r in range(k))
    p = random_matrix(rng, v[0], N, bound)
    # unknowns: A''_r (v_{r-1} x v_r) for each r, then q'' (N x v_0)
    blocks, n = [], 0
    for r in range(k):
        blocks.append((r, n, v[(r - 1) % k], v[r]))
        n += v[(r - 1) % k] * v[r]
    qoff = n
    n += N * v[0]
    rows = []
    for r in range(k):
        # (A_{r+1} B_r)[i, j] - (B_{r-1} A_r)[i, j] + [r=0] (p q)[i, j]
        ap, bp = (r + 1) % k, (r - 1) % k
        _, oa1, ra1, ca1 = blocks[ap]
        _, oa0, ra0, ca0 = blocks[r]
        for i in range(v[r]):
            for j in range(v[r]):
                row = [0] * n
                for t in range(ca1):           # A_{r+1}[i, t] * B_r[t, j]
                    row[oa1 + i * ca1 + t] += B[r][t, j]
                for t in range(ra0):           # B_{r-1}[i, t] * A_r[t, j]
                    row[oa0 + t * ca0 + j] -= B[bp][i, t]
                if r == 0:
                    for t in range(N):         # p[i, t] * q[t, j]
                        row[qoff + t * v[0] + j] += p[i, t]
                rows.append(row)
    ker = kernel(Mat(len(rows), n, [x for row in rows for x in row]))
    coeffs = [rng.randint(-bound, bound) for _ in range(ker.cols)]
    vec = [sum(ker[i, j] * coeffs[j] for j in range(ker.cols)) for i in range(n)]
    A = tuple(Mat(ra, ca, vec[o:o + ra * ca]) for (_, o, ra, ca) in blocks)
    q = Mat(N, v[0], vec[qoff:qoff + N * v[0]])
    return NakajimaCyclicModule(k, N, v, B, A, p, q)


def _row_chain(m, r, upto):
    """B_{upto-1} ... B_0 on row r (identity when upto = 0)."""
    out = Mat.identity(m.dims[(0, r)])
    for l in range(upto):
        out = m.arrows["B"][(l, r)] @ out
    return out


def phi_open(m):
    """Rift data with constant columns and invertible rows to cyclic Nakajima data."""
    _require(m, RIFT)
    N, k = m.shape.N, m.shape.k
    v = []
    for r in range(k):
        col = {m.dims[(l, r)] for l in range(N + 1)}
        if len(col) != 1:
            raise QuiverDataError(f"column {r} is not constant: {sorted(col)}")
        v.append(col.pop())
    chains = [_row_chain(m, r, N) for r in range(k)]
    for r, c in enumerate(chains):
        if not is_invertible(c):
            raise NotOnOpenPiece(f"B_{N-1}...B_0 is singular on row {r}")
    inv = [inverse(c) for c in chains]
    B = tuple(m.arrows["e"][r] @ chains[r] for r in range(k))
    A = tuple(inv[(r - 1) % k] @ m.arrows["delta"][r] for r in range(k))
    pcols, qrows = [], []
    for l in range(1, N + 1):
        pcols.append(inverse(_row_chain(m, 0, l)) @ m.arrows["p"][l])
    for l in range(N):
        qrows.append(m.arrows["q"][l] @ _row_chain(m, 0, l))
    p = pcols[0].hstack(*pcols[1:]) if pcols else Mat(v[0], 0)
    q = qrows[0].vstack(*qrows[1:]) if qrows else Mat(0, v[0])
    return NakajimaCyclicModule(k, N, tuple(v), B, A, p, q)


def phi_inverse_generator(n):
    """Rift data with every B_l = identity whose open-piece image is exactly `n`."""
    N, k, v = n.N, n.k, n.v
    shape = QuiverShape(RIFT, N, k)
    dims = DimVector(shape, {(l, r): v[r] for l in range(N + 1) for r in range(k)})
    p = {l: Mat(v[0], 1, n.p.col(l - 1)) for l in range(1, N + 1)}
    q = {l: Mat(1, v[0], n.q.row(l)) for l in range(N)}
    B = {(l, r): Mat.identity(v[r]) for l in range(N) for r in range(k)}
    e = {r: n.B[r] for r in range(k)}
    delta = {r: n.A[r] for r in range(k)}
    A = {}
    for r in range(k):
        cur = e[(r - 1) % k] @ delta[r]
        if r == 0:
            cur = cur - p[1] @ q[0]
        for l in range(1, N):
            A[(l, r)] = cur
            if r == 0 and l + 1 <= N - 1:
                cur = cur - p[l + 1] @ q[l]
    return QuiverModule(shape, dims, {"A": A, "B": B, "e": e, "delta": delta, "p": p, "q": q})
