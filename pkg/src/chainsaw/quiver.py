"""Quiver shapes, their modules, relation residuals, random generation and gauge action.

Four shapes are supported:

* ``Chainsaw``: vertices ``l`` in Z/N (stored 0..N-1, vertex 0 doubling as V_N),
  loops A_l, edges B_l: V_l -> V_{l+1}, framing legs p_l: W_{l-1} -> V_l and
  q_l: V_l -> W_l.
* ``ChainsawFixed``: vertices ``(l, r)`` with l in Z/N, r in Z/k.  B_0 (the edge
  leaving V_0 = V_N) shifts the row, V_l^r -> V_1^{r+1}; the framing lives in row 0
  except q_0, which leaves V_0^{-1}.
* ``DentedChainsaw``: vertices 0..N with d_0 = d_N; no loops at 0 and N, instead
  e: V_N -> V_0 and delta: V_0 -> V_N.
* ``Rift``: vertices ``(l, r)`` with l in 0..N, r in Z/k;
  e_r: V_N^r -> V_0^{r+1}, delta_r: V_0^r -> V_N^{r-1}; framing in row 0.

All framing lines are one-dimensional and identified with a single line W.
"""

import json
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .linalg import (
    Mat, fraction_str, inverse, is_invertible, kernel, make_rng, random_invertible,
    random_matrix, sylvester_solve, sylvester_system,
)

CHAINSAW = "Chainsaw"
FIXED = "ChainsawFixed"
DENTED = "DentedChainsaw"
RIFT = "Rift"
KINDS = (CHAINSAW, FIXED, DENTED, RIFT)

RETRY_BUDGET = 32


class QuiverDataError(ValueError):
    """Malformed module data or document."""


class GenerationFailed(RuntimeError):
    def __init__(self, shape, dims, seed, reason=""):
        self.shape, self.dims, self.seed = shape, dims, seed
        super().__init__(f"could not generate {shape.kind} module with dims {dims.as_dict()} "
                         f"from seed {seed}" + (f": {reason}" if reason else ""))


class Arrow(NamedTuple):
    name: str
    index: object
    source: object   # vertex key, or None for the framing line
    target: object


class Relation(NamedTuple):
    index: object     # index of the B arrow the relation is attached to
    source: object
    target: object
    p_index: Optional[int]
    q_index: Optional[int]


@dataclass(frozen=True)
class QuiverShape:
    kind: str
    N: int
    k: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise QuiverDataError(f"unknown quiver kind {self.kind!r}")
        if self.N < 1 or self.k < 1:
            raise QuiverDataError("N and k must be positive")
        if self.kind in (CHAINSAW, DENTED) and self.k != 1:
            raise QuiverDataError(f"{self.kind} requires k = 1")

    @property
    def graded(self):
        return self.kind in (FIXED, RIFT)

    @property
    def dented(self):
        return self.kind in (DENTED, RIFT)

    def vertices(self):
        N, k = self.N, self.k
        if self.kind == CHAINSAW:
            return list(range(N))
        if self.kind == DENTED:
            return list(range(N + 1))
        if self.kind == FIXED:
            return [(l, r) for l in range(N) for r in range(k)]
        return [(l, r) for l in range(N + 1) for r in range(k)]

    def p_target(self, l):
        return (l, 0) if self.graded else l

    def q_source(self, l):
        if self.kind == FIXED and l == 0:
            return (0, self.k - 1)
        return (l, 0) if self.graded else l

    def p_indices(self):
        return list(range(1, self.N + 1)) if self.dented else list(range(self.N))

    def q_indices(self):
        return list(range(self.N))

    def b_target(self, idx):
        N, k = self.N, self.k
        if self.kind == CHAINSAW:
            return (idx + 1) % N
        if self.kind == DENTED:
            return idx + 1
        l, r = idx
        if self.kind == FIXED:
            return ((l + 1) % N, (r + 1) % k if l == 0 else r)
        return (l + 1, r)

    def b_indices(self):
        N, k = self.N, self.k
        if self.kind == CHAINSAW:
            return list(range(N))
        if self.kind == DENTED:
            return list(range(N))
        return [(l, r) for l in range(N) for r in range(k)]

    def a_indices(self):
        N, k = self.N, self.k
        if self.kind == CHAINSAW:
            return list(range(N))
        if self.kind == DENTED:
            return list(range(1, N))
        if self.kind == FIXED:
            return [(l, r) for l in range(N) for r in range(k)]
        return [(l, r) for l in range(1, N) for r in range(k)]

    def arrows(self):
        out = [Arrow("A", i, i, i) for i in self.a_indices()]
        out += [Arrow("B", i, i, self.b_target(i)) for i in self.b_indices()]
        if self.kind == DENTED:
            out.append(Arrow("e", 0, self.N, 0))
            out.append(Arrow("delta", 0, 0, self.N))
        elif self.kind == RIFT:
            k = self.k
            out += [Arrow("e", r, (self.N, r), (0, (r + 1) % k)) for r in range(k)]
            out += [Arrow("delta", r, (0, r), (self.N, (r - 1) % k)) for r in range(k)]
        out += [Arrow("p", l, None, self.p_target(l)) for l in self.p_indices()]
        out += [Arrow("q", l, self.q_source(l), None) for l in self.q_indices()]
        return out

    def arrow_names(self):
        return ("A", "B", "e", "delta", "p", "q") if self.dented else ("A", "B", "p", "q")

    def relations(self):
        """Relation instances in canonical order (by target, wrap-around relations last)."""
        N, k = self.N, self.k
        if self.kind in (CHAINSAW, FIXED):
            ls = list(range(1, N)) + [0]
        else:
            ls = list(range(N))
        out = []
        for l in ls:
            for r in (range(k) if self.graded else [None]):
                idx = l if r is None else (l, r)
                s, t = idx, self.b_target(idx)
                pl = l + 1 if self.dented else (l + 1) % N
                framed = self.p_target(pl) == t and self.q_source(l) == s
                out.append(Relation(idx, s, t, pl if framed else None, l if framed else None))
        return out

    def to_json(self):
        return {"kind": self.kind, "N": self.N, "k": self.k}


def index_str(idx):
    if isinstance(idx, tuple):
        return ",".join(str(i) for i in idx)
    return str(idx)


def parse_index(s, graded):
    try:
        parts = [int(x) for x in str(s).split(",")]
    except ValueError:
        raise QuiverDataError(f"bad index {s!r}")
    if graded:
        if len(parts) != 2:
            raise QuiverDataError(f"expected an index 'l,r', got {s!r}")
        return tuple(parts)
    if len(parts) != 1:
        raise QuiverDataError(f"expected an index 'l', got {s!r}")
    return parts[0]


class DimVector:
    """Dimensions of the internal vertices of a shape; framing lines are always 1-dimensional."""

    def __init__(self, shape, dims):
        self.shape = shape
        vs = shape.vertices()
        if not isinstance(dims, dict):
            dims = dict(zip(vs, dims))
        missing = [v for v in vs if v not in dims]
        if missing:
            raise QuiverDataError(f"missing dimensions for vertices {missing}")
        extra = [v for v in dims if v not in set(vs)]
        if extra:
            raise QuiverDataError(f"unknown vertices {extra}")
        self._d = {v: int(dims[v]) for v in vs}
        if any(x < 0 for x in self._d.values()):
            raise QuiverDataError("dimensions must be nonnegative")
        if shape.kind == DENTED and self._d[0] != self._d[shape.N]:
            raise QuiverDataError("dented chainsaw requires d_0 = d_N")

    def __getitem__(self, v):
        if v is None:
            return 1
        return self._d[v]

    def as_dict(self):
        return dict(self._d)

    def as_list(self):
        return [self._d[v] for v in self.shape.vertices()]

    def total(self):
        return sum(self._d.values())

    def __eq__(self, other):
        return isinstance(other, DimVector) and self.shape == other.shape and self._d == other._d

    def __hash__(self):
        return hash((self.shape, tuple(sorted(self._d.items()))))

    def __repr__(self):
        return f"DimVector({self.shape.kind}, {self.as_list()})"

    def to_json(self):
        return {index_str(v): n for v, n in self._d.items()}


def dims_of(shape, values):
    return DimVector(shape, values)


class QuiverModule:
    """A representation of one of the four shapes with rational (or cyclotomic) matrices."""

    def __init__(self, shape, dims, arrows, check=True):
        if not isinstance(dims, DimVector):
            dims = DimVector(shape, dims)
        self.shape = shape
        self.dims = dims
        self.arrows = {name: dict(arrows.get(name, {})) for name in shape.arrow_names()}
        if check:
            self._validate()

    def _validate(self):
        seen = set()
        for a in self.shape.arrows():
            m = self.arrows[a.name].get(a.index)
            if m is None:
                raise QuiverDataError(f"missing arrow {a.name}[{index_str(a.index)}]")
            want = (self.dims[a.target], self.dims[a.source])
            if m.shape != want:
                raise QuiverDataError(
                    f"arrow {a.name}[{index_str(a.index)}] has shape {m.shape}, expected {want}")
            seen.add((a.name, a.index))
        for name, d in self.arrows.items():
            for idx in d:
                if (name, idx) not in seen:
                    raise QuiverDataError(f"unexpected arrow {name}[{index_str(idx)}]")

    def __getitem__(self, key):
        name, idx = key
        return self.arrows[name][idx]

    def with_arrows(self, **updates):
        arrows = {n: dict(d) for n, d in self.arrows.items()}
        for name, d in updates.items():
            arrows[name].update(d)
        return QuiverModule(self.shape, self.dims, arrows)

    def loop(self, v):
        """The endomorphism of V_v entering the relations: A_v, or the e/delta composite."""
        sh = self.shape
        if sh.kind == DENTED:
            if v == 0:
                return self.arrows["e"][0] @ self.arrows["delta"][0]
            if v == sh.N:
                return self.arrows["delta"][0] @ self.arrows["e"][0]
        if sh.kind == RIFT:
            l, r = v
            k = sh.k
            if l == 0:
                return self.arrows["e"][(r - 1) % k] @ self.arrows["delta"][r]
            if l == sh.N:
                return self.arrows["delta"][(r + 1) % k] @ self.arrows["e"][r]
        return self.arrows["A"][v]

    def __eq__(self, other):
        return (isinstance(other, QuiverModule) and self.shape == other.shape
                and self.dims == other.dims and self.arrows == other.arrows)

    def __repr__(self):
        return f"QuiverModule({self.shape.kind}, N={self.shape.N}, k={self.shape.k}, dims={self.dims.as_list()})"

    def is_rational(self):
        from fractions import Fraction
        return all(isinstance(x, Fraction) for d in self.arrows.values()
                   for m in d.values() for x in m.entries())


def relation_residual(m, rel):
    t, s = rel.target, rel.source
    b = m.arrows["B"][rel.index]
    res = m.loop(t) @ b - b @ m.loop(s)
    if rel.p_index is not None:
        res = res + m.arrows["p"][rel.p_index] @ m.arrows["q"][rel.q_index]
    return res


def relation_residuals(m):
    """One residual matrix per relation, in the shape's canonical order."""
    return [relation_residual(m, rel) for rel in m.shape.relations()]


def satisfies_relations(m):
    return all(r.is_zero() for r in relation_residuals(m))


def zero_module(shape, dims):
    if not isinstance(dims, DimVector):
        dims = DimVector(shape, dims)
    arrows = {n: {} for n in shape.arrow_names()}
    for a in shape.arrows():
        arrows[a.name][a.index] = Mat(dims[a.target], dims[a.source])
    return QuiverModule(shape, dims, arrows)


# ---------------------------------------------------------------- gauge

def identity_gauge(dims):
    return {v: Mat.identity(dims[v]) for v in dims.shape.vertices()}


def gauge_inverse(g):
    return {v: inverse(x) for v, x in g.items()}


def gauge_act(g, m):
    """Transform every arrow M: V_s -> V_t into g_t · M · g_s^{-1}; framing lines stay fixed."""
    for v, x in g.items():
        if x.shape != (m.dims[v], m.dims[v]):
            raise QuiverDataError(f"gauge block at {v} has shape {x.shape}")
    try:
        ginv = {v: inverse(x) for v, x in g.items()}
    except ZeroDivisionError:
        raise QuiverDataError("gauge element has a singular block")
    arrows = {n: {} for n in m.shape.arrow_names()}
    for a in m.shape.arrows():
        x = m.arrows[a.name][a.index]
        if a.target is not None:
            x = g[a.target] @ x
        if a.source is not None:
            x = x @ ginv[a.source]
        arrows[a.name][a.index] = x
    return QuiverModule(m.shape, m.dims, arrows)


def random_gauge(dims, rng, bound=10):
    return {v: random_invertible(rng, dims[v], bound) for v in dims.shape.vertices()}


# ---------------------------------------------------------------- generation

def solve_edges_and_q(shape, dims, fixed, rng, bound=10):
    """Given loops (or e, delta), A and p, pick a random (B, q) making every relation hold.

    The relations are linear in (B, q) once the rest is fixed; we return a random
    integer combination of a kernel basis of that linear system.
    """
    probe = {n: dict(fixed.get(n, {})) for n in shape.arrow_names()}
    for i in shape.b_indices():
        probe["B"][i] = Mat(dims[shape.b_target(i)], dims[i])
    for l in shape.q_indices():
        probe["q"][l] = Mat(1, dims[shape.q_source(l)])
    mod = QuiverModule(shape, dims, probe)

    cols = []  # (name, index, rows, cols)
    for i in shape.b_indices():
        cols.append(("B", i, dims[shape.b_target(i)], dims[i]))
    for l in shape.q_indices():
        cols.append(("q", l, 1, dims[shape.q_source(l)]))
    offsets, n = {}, 0
    for name, idx, r, c in cols:
        offsets[(name, idx)] = n
        n += r * c

    rows = []
    for rel in shape.relations():
        lt, ls = mod.loop(rel.target), mod.loop(rel.source)
        dt, ds = lt.rows, ls.rows
        sys = sylvester_system(lt, ls)
        ob = offsets[("B", rel.index)]
        oq = offsets[("q", rel.q_index)] if rel.p_index is not None else None
        p = mod.arrows["p"][rel.p_index] if rel.p_index is not None else None
        for i in range(dt):
            for j in range(ds):
                row = [0] * n
                for c in range(dt * ds):
                    row[ob + c] = sys[i * ds + j, c]
                if p is not None:
                    row[oq + j] += p[i, 0]
                rows.append(row)
    system = Mat(len(rows), n, [x for r in rows for x in r])
    ker = kernel(system)
    coeffs = [rng.randint(-bound, bound) for _ in range(ker.cols)]
    vec = [sum(ker[i, j] * coeffs[j] for j in range(ker.cols)) for i in range(n)]
    out = {"B": {}, "q": {}}
    for name, idx, r, c in cols:
        o = offsets[(name, idx)]
        out[name][idx] = Mat(r, c, vec[o:o + r * c])
    return out


def _random_plain(shape, dims, rng, bound):
    """Chainsaw and dented modules: random loops/e/delta/p/q, B from Sylvester equations."""
    arrows = {n: {} for n in shape.arrow_names()}
    for i in shape.a_indices():
        arrows["A"][i] = random_matrix(rng, dims[i], dims[i], bound)
    if shape.kind == DENTED:
        N = shape.N
        arrows["e"][0] = random_matrix(rng, dims[0], dims[N], bound)
        arrows["delta"][0] = random_matrix(rng, dims[N], dims[0], bound)
    for l in shape.p_indices():
        arrows["p"][l] = random_matrix(rng, dims[shape.p_target(l)], 1, bound)
    for l in shape.q_indices():
        arrows["q"][l] = random_matrix(rng, 1, dims[shape.q_source(l)], bound)
    for i in shape.b_indices():
        arrows["B"][i] = Mat(dims[shape.b_target(i)], dims[i])
    probe = QuiverModule(shape, dims, arrows)
    ok = True
    for rel in shape.relations():
        rhs = -(arrows["p"][rel.p_index] @ arrows["q"][rel.q_index])
        x = sylvester_solve(probe.loop(rel.target), probe.loop(rel.source), rhs)
        if x is None:
            ok = False
            break
        arrows["B"][rel.index] = x
    if not ok:
        # non-generic spectra (always the case for N = 1): solve for (B, q) jointly
        fixed = {n: d for n, d in arrows.items() if n not in ("B", "q")}
        arrows.update(solve_edges_and_q(shape, dims, fixed, rng, bound))
    return QuiverModule(shape, dims, arrows)


def _segments(shape):
    """Vertices linked by unframed relations (and e/delta pairs) share loop spectra."""
    parent = {v: v for v in shape.vertices()}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    def union(a, b):
        parent[find(a)] = find(b)

    for rel in shape.relations():
        if rel.p_index is None:
            union(rel.source, rel.target)
    if shape.kind == RIFT:
        for r in range(shape.k):
            union((shape.N, r), (0, (r + 1) % shape.k))
    groups = {}
    for v in shape.vertices():
        groups.setdefault(find(v), []).append(v)
    return list(groups.values())


def _truncation(rows, cols):
    return Mat(rows, cols, [1 if i == j else 0 for i in range(rows) for j in range(cols)])


def _random_graded_model(shape, dims, rng, bound):
    """Graded modules built in an eigenbasis: loops are nested diagonal matrices whose
    spectra agree along unframed relations, so homogeneous Sylvester systems have room."""
    arrows = {n: {} for n in shape.arrow_names()}
    spectrum = {}
    start = 1
    for seg in _segments(shape):
        size = max(dims[v] for v in seg)
        vals = list(range(start, start + size))
        rng.shuffle(vals)
        start += size + 1
        for v in seg:
            spectrum[v] = vals
    for i in shape.a_indices():
        arrows["A"][i] = Mat.diag(spectrum[i][:dims[i]])
    if shape.kind == RIFT:
        N, k = shape.N, shape.k
        for r in range(k):
            a, b = dims[(0, (r + 1) % k)], dims[(N, r)]
            arrows["e"][r] = _truncation(a, b)
            arrows["delta"][(r + 1) % k] = _truncation(b, a) @ Mat.diag(spectrum[(0, (r + 1) % k)][:a])
    for l in shape.p_indices():
        arrows["p"][l] = random_matrix(rng, dims[shape.p_target(l)], 1, bound)
    fixed = {n: d for n, d in arrows.items() if n not in ("B", "q")}
    arrows.update(solve_edges_and_q(shape, dims, fixed, rng, bound))
    model = QuiverModule(shape, dims, arrows)
    return gauge_act(random_gauge(dims, rng, bound), model)


def _constant_columns(shape, dims):
    cols = []
    for r in range(shape.k):
        vals = {dims[(l, r)] for l in range(shape.N + 1)}
        if len(vals) != 1:
            return None
        cols.append(vals.pop())
    return cols


def _generate_once(shape, dims, rng, bound):
    if shape.kind in (CHAINSAW, DENTED):
        return _random_plain(shape, dims, rng, bound)
    if shape.kind == RIFT:
        v = _constant_columns(shape, dims)
        if v is not None:
            from .maps import phi_inverse_generator, random_nakajima
            nak = random_nakajima(v, shape.N, shape.k, rng, bound)
            m = phi_inverse_generator(nak)
            return gauge_act(random_gauge(dims, rng, bound), m)
    return _random_graded_model(shape, dims, rng, bound)


def random_module(shape, dims, seed, stable=False, bound=10):
    """A random relation-satisfying module, deterministic in `seed`.

    With ``stable=True`` the module must also be stable (generation stability for
    Chainsaw/ChainsawFixed, certified zeta-minus stability for dented shapes);
    GenerationFailed is raised when the retry budget runs out.
    """
    if not isinstance(dims, DimVector):
        dims = DimVector(shape, dims)
    rng = make_rng(seed)
    reason = ""
    for _ in range(RETRY_BUDGET):
        m = _generate_once(shape, dims, rng, bound)
        if not satisfies_relations(m):
            reason = "relations not satisfied"
            continue
        if stable and not _is_stable(m):
            reason = "no stable module found"
            continue
        return m
    raise GenerationFailed(shape, dims, seed, reason)


def _is_stable(m):
    from . import stability
    if m.shape.kind in (CHAINSAW, FIXED):
        return stability.is_gen_stable(m)
    param = stability.make_zeta(m.dims, "minus")
    return stability.check_slope_stability(m, param).kind == "Stable"


# ---------------------------------------------------------------- serialization

def _mat_json(x):
    return [[fraction_str(v) for v in x.row(i)] for i in range(x.rows)]


def module_to_json(m):
    if not m.is_rational():
        raise QuiverDataError("only rational modules can be serialized")
    arrows = {}
    for name in m.shape.arrow_names():
        d = m.arrows[name]
        if name in ("e", "delta") and m.shape.kind == DENTED:
            arrows[name] = _mat_json(d[0])
        else:
            arrows[name] = {index_str(i): _mat_json(x) for i, x in sorted(d.items())}
    return {"shape": m.shape.to_json(), "dims": m.dims.to_json(), "arrows": arrows}


def serialize(m, extra=None):
    doc = module_to_json(m)
    if extra:
        doc.update(extra)
    return (json.dumps(doc, indent=1, sort_keys=False) + "\n").encode()


def _parse_mat(obj, rows, cols, where):
    if not isinstance(obj, list):
        raise QuiverDataError(f"{where}: expected a list of rows")
    if len(obj) != rows:
        raise QuiverDataError(f"{where}: expected {rows} rows, got {len(obj)}")
    entries = []
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != cols:
            raise QuiverDataError(f"{where}[{i}]: expected a row of length {cols}")
        for j, x in enumerate(row):
            if not isinstance(x, (str, int)) or isinstance(x, bool):
                raise QuiverDataError(f"{where}[{i}][{j}]: expected a rational string")
            try:
                entries.append(Mat(1, 1, [x])[0, 0])
            except (ValueError, ZeroDivisionError):
                raise QuiverDataError(f"{where}[{i}][{j}]: bad rational {x!r}")
    return Mat(rows, cols, entries)


def module_from_json(doc):
    if not isinstance(doc, dict):
        raise QuiverDataError("document root must be an object")
    try:
        sh = doc["shape"]
        shape = QuiverShape(sh["kind"], int(sh["N"]), int(sh.get("k", 1)))
    except (KeyError, TypeError, ValueError) as exc:
        raise QuiverDataError(f"shape: malformed ({exc})")
    raw_dims = doc.get("dims")
    if not isinstance(raw_dims, dict):
        raise QuiverDataError("dims: expected an object")
    dims = DimVector(shape, {parse_index(k, shape.graded): v for k, v in raw_dims.items()})
    raw = doc.get("arrows")
    if not isinstance(raw, dict):
        raise QuiverDataError("arrows: expected an object")
    arrows = {n: {} for n in shape.arrow_names()}
    for a in shape.arrows():
        where = f"arrows.{a.name}"
        section = raw.get(a.name)
        if section is None:
            raise QuiverDataError(f"{where}: missing")
        if a.name in ("e", "delta") and shape.kind == DENTED:
            obj = section
        else:
            where += f".{index_str(a.index)}"
            if not isinstance(section, dict) or index_str(a.index) not in section:
                raise QuiverDataError(f"{where}: missing")
            obj = section[index_str(a.index)]
        arrows[a.name][a.index] = _parse_mat(obj, dims[a.target], dims[a.source], where)
    return QuiverModule(shape, dims, arrows)


def deserialize(data):
    if isinstance(data, bytes):
        try:
            data = data.decode()
        except UnicodeDecodeError as exc:
            raise QuiverDataError(f"byte {exc.start}: not valid UTF-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise QuiverDataError(f"line {exc.lineno} column {exc.colno}: {exc.msg}")
    return module_from_json(doc)
