"""Generation stability and slope stability for quiver modules."""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .linalg import Mat, column_space, kernel, make_rng, random_matrix, rank
from .quiver import CHAINSAW, DENTED, FIXED, RIFT, DimVector, QuiverDataError, index_str, parse_index


# ---------------------------------------------------------------- subspace helpers

def _span(vectors, n):
    """Column basis of the span of the given column vectors in Q^n."""
    if not vectors:
        return Mat(n, 0)
    return column_space(vectors[0].hstack(*vectors[1:]))


def _cols(m):
    return [Mat(m.rows, 1, m.col(j)) for j in range(m.cols)]


def _internal_arrows(m):
    return [a for a in m.shape.arrows() if a.source is not None and a.target is not None]


def closure(m, seeds, framing=False):
    """Smallest submodule containing the seed vectors, and the framing line if asked.

    `seeds` maps vertices to lists of column vectors.  A nonzero q-image forces the
    framing line in, which in turn forces all p-images in.  Returns
    (dict vertex -> column basis, framing flag).
    """
    vs = m.shape.vertices()
    basis = {v: _span(list(seeds.get(v, [])), m.dims[v]) for v in vs}
    arrows = _internal_arrows(m)
    qs = [a for a in m.shape.arrows() if a.name == "q"]
    ps = [a for a in m.shape.arrows() if a.name == "p"]
    while True:
        changed = False
        if not framing:
            for a in qs:
                if not (m.arrows["q"][a.index] @ basis[a.source]).is_zero():
                    framing = True
                    break
        new = {v: _cols(basis[v]) for v in vs}
        if framing:
            for a in ps:
                new[a.target].append(m.arrows["p"][a.index])
        for a in arrows:
            img = m.arrows[a.name][a.index] @ basis[a.source]
            new[a.target].extend(_cols(img))
        for v in vs:
            b = _span(new[v], m.dims[v])
            if b.cols != basis[v].cols:
                changed = True
            basis[v] = b
        if not changed:
            return basis, framing


def is_gen_stable(m):
    """True iff the arrow-closure of the p-images is the whole space (Chainsaw / ChainsawFixed)."""
    if m.shape.kind not in (CHAINSAW, FIXED):
        raise QuiverDataError("generation stability applies to chainsaw-type modules")
    basis, _ = _p_closure(m)
    return all(basis[v].cols == m.dims[v] for v in m.shape.vertices())


def _p_closure(m):
    vs = m.shape.vertices()
    seeds = {v: [] for v in vs}
    for a in m.shape.arrows():
        if a.name == "p":
            seeds[a.target].append(m.arrows["p"][a.index])
    # close under the internal arrows only: q-images are irrelevant here
    basis = {v: _span(seeds[v], m.dims[v]) for v in vs}
    arrows = _internal_arrows(m)
    while True:
        changed = False
        new = {v: _cols(basis[v]) for v in vs}
        for a in arrows:
            new[a.target].extend(_cols(m.arrows[a.name][a.index] @ basis[a.source]))
        for v in vs:
            b = _span(new[v], m.dims[v])
            if b.cols != basis[v].cols:
                changed = True
            basis[v] = b
        if not changed:
            return basis, True


def largest_submodule_in_ker_q(m):
    """Largest arrow-stable graded subspace on which every q vanishes."""
    vs = m.shape.vertices()
    basis = {v: Mat.identity(m.dims[v]) for v in vs}
    for a in m.shape.arrows():
        if a.name == "q":
            basis[a.source] = kernel(m.arrows["q"][a.index] @ basis[a.source])
    arrows = _internal_arrows(m)
    while True:
        changed = False
        for a in arrows:
            s, t = a.source, a.target
            # keep x in T_s with M x in T_t
            ann = kernel(basis[t].transpose()).transpose()
            cond = ann @ m.arrows[a.name][a.index] @ basis[s]
            if cond.is_zero():
                continue
            c = kernel(cond)
            basis[s] = basis[s] @ c
            changed = True
        if not changed:
            return basis


# ---------------------------------------------------------------- slope data

@dataclass(frozen=True)
class StabilityParam:
    zeta: dict
    zeta_inf: Fraction
    flavor: str = "custom"
    epsilon: Optional[Fraction] = None

    def to_json(self):
        out = {"zeta": {index_str(v): _fs(x) for v, x in self.zeta.items()},
               "zeta_inf": _fs(self.zeta_inf), "flavor": self.flavor}
        if self.epsilon is not None:
            out["epsilon"] = _fs(self.epsilon)
        return out


def _fs(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def default_epsilon(dims):
    return Fraction(1, 1 + dims.total() ** 2)


def make_zeta(dims, flavor="bullet", epsilon=None):
    """zeta_0 = 1, zeta_N = -1, zeta_l = 0 otherwise (per column for Rift); minus shifts by -epsilon."""
    sh = dims.shape
    if sh.kind not in (DENTED, RIFT):
        raise QuiverDataError("slope parameters are defined for dented and rift dimension vectors")
    if flavor not in ("bullet", "minus"):
        raise ValueError(f"unknown flavor {flavor!r}")
    zeta = {}
    for v in sh.vertices():
        l = v if sh.kind == DENTED else v[0]
        zeta[v] = Fraction(1) if l == 0 else Fraction(-1) if l == sh.N else Fraction(0)
    eps = None
    if flavor == "minus":
        eps = Fraction(epsilon) if epsilon is not None else default_epsilon(dims)
        if eps <= 0:
            raise ValueError("epsilon must be positive")
        zeta = {v: z - eps for v, z in zeta.items()}
    zinf = -sum(zeta[v] * dims[v] for v in sh.vertices())
    return StabilityParam(zeta, zinf, flavor, eps)


def slope(sub_dims, framing, param):
    """<(zeta, zeta_inf), (d', framing)> / (sum d' + framing)."""
    sub = sub_dims.as_dict() if isinstance(sub_dims, DimVector) else dict(sub_dims)
    total = sum(sub.values()) + int(framing)
    if total == 0:
        raise ZeroDivisionError("slope of the zero submodule")
    num = sum(param.zeta[v] * n for v, n in sub.items()) + param.zeta_inf * int(framing)
    return Fraction(num, 1) / total


# ---------------------------------------------------------------- verdicts

@dataclass
class StabilityVerdict:
    kind: str                           # "Stable", "Unstable" or "Unknown"
    witness: Optional[dict] = None      # vertex -> dimension of the destabilizing submodule
    witness_framing: Optional[bool] = None
    seeds: list = field(default_factory=list)   # [(vertex, vector entries)]
    seed_framing: bool = False
    witness_slope: Optional[Fraction] = None
    reason: str = ""

    def to_json(self):
        out = {"verdict": self.kind}
        if self.kind == "Unstable":
            out["witness"] = {"dims": {index_str(v): n for v, n in self.witness.items()},
                              "framing": int(self.witness_framing),
                              "slope": _fs(self.witness_slope)}
            out["seeds"] = {"vectors": [[index_str(v), [_fs(x) for x in vec]] for v, vec in self.seeds],
                            "framing": int(self.seed_framing)}
        if self.reason:
            out["reason"] = self.reason
        return out

    @classmethod
    def from_json(cls, doc, graded=False):
        """Inverse of to_json (for the fields needed to re-validate a witness)."""
        kind = doc["verdict"]
        if kind != "Unstable":
            return cls(kind, reason=doc.get("reason", ""))
        w = doc["witness"]
        seeds = [(parse_index(v, graded), [Fraction(x) for x in vec])
                 for v, vec in doc["seeds"]["vectors"]]
        return cls(kind, witness={parse_index(v, graded): n for v, n in w["dims"].items()},
                   witness_framing=bool(w["framing"]), seeds=seeds,
                   seed_framing=bool(doc["seeds"]["framing"]),
                   witness_slope=Fraction(w["slope"]), reason=doc.get("reason", ""))


def _destabilizes(num_slope, mode):
    # the whole module always has slope 0
    return num_slope >= 0 if mode == "stable" else num_slope > 0


def _box_max(coeffs, lo, hi, const, exclude):
    """Max of const + sum c_v x_v over lo <= x <= hi, skipping the corner `exclude`."""
    best = const
    corner = {}
    for v, c in coeffs.items():
        x = hi[v] if c > 0 else lo[v]
        corner[v] = x
        best += c * x
    free = [abs(c) for v, c in coeffs.items() if hi[v] > lo[v]]
    if all(lo[v] == hi[v] for v in coeffs):
        if exclude is not None and all(lo[v] == exclude[v] for v in coeffs):
            return None
        return best
    if exclude is not None:
        ex_val = const + sum(c * exclude[v] for v, c in coeffs.items())
        if ex_val == best:
            return best - min(free)
    return best


def _certify(m, param, mode):
    """Sound 'no destabilizer' proof from dimension bounds alone, or False."""
    vs = m.shape.vertices()
    K = largest_submodule_in_ker_q(m)
    P, _ = _p_closure(m)
    coeffs = dict(param.zeta)
    zero = {v: 0 for v in vs}
    full = {v: m.dims[v] for v in vs}
    # submodules without the framing line sit inside K
    hi = {v: K[v].cols for v in vs}
    top = _box_max(coeffs, zero, hi, Fraction(0), zero)
    if top is not None and _destabilizes(top, mode):
        return False
    # submodules with the framing line contain the p-closure
    lo = {v: P[v].cols for v in vs}
    top = _box_max(coeffs, lo, full, param.zeta_inf, full)
    if top is not None and _destabilizes(top, mode):
        return False
    return True


def _candidate_seeds(m, rng, word_length, random_vectors, max_words):
    vs = m.shape.vertices()
    dims = m.dims
    seeds = []
    for v in vs:
        for i in range(dims[v]):
            seeds.append({v: [Mat(dims[v], 1, [1 if j == i else 0 for j in range(dims[v])])]})
    arrows = _internal_arrows(m)
    out_of = {v: [a for a in arrows if a.source == v] for v in vs}
    seen = set()
    count = 0
    for start in vs:
        if dims[start] == 0:
            continue
        frontier = [(start, Mat.identity(dims[start]))]
        for _ in range(word_length):
            nxt = []
            for v, w in frontier:
                for a in out_of[v]:
                    comp = m.arrows[a.name][a.index] @ w
                    key = (start, a.target, comp)
                    if key in seen:
                        continue
                    seen.add(key)
                    count += 1
                    img = column_space(comp)
                    if img.cols:
                        seeds.append({a.target: _cols(img)})
                    ker = kernel(comp)
                    if 0 < ker.cols < dims[start]:
                        seeds.append({start: _cols(ker)})
                    nxt.append((a.target, comp))
                    if count >= max_words:
                        break
                if count >= max_words:
                    break
            frontier = nxt
            if not frontier or count >= max_words:
                break
        if count >= max_words:
            break
    for v in vs:
        for _ in range(random_vectors if dims[v] else 0):
            seeds.append({v: [random_matrix(rng, dims[v], 1)]})
    return seeds


def _sub_slope(basis, framing, param):
    num = sum(param.zeta[v] * b.cols for v, b in basis.items()) + (param.zeta_inf if framing else 0)
    tot = sum(b.cols for b in basis.values()) + int(framing)
    return Fraction(num) / tot if tot else None


def _is_whole(m, basis, framing):
    return framing and all(basis[v].cols == m.dims[v] for v in m.shape.vertices())


def check_slope_stability(m, param, mode="stable", budget=None, seed=0):
    """Sound semi-decision of (semi)stability for dented and rift modules.

    Returns Stable only with a dimension-bound proof, Unstable with a re-checkable
    witness (seed vectors whose closure destabilizes), and Unknown otherwise.
    """
    if m.shape.kind not in (DENTED, RIFT):
        raise QuiverDataError("slope stability applies to dented and rift modules")
    if mode not in ("stable", "semistable"):
        raise ValueError(f"unknown mode {mode!r}")
    if m.dims.total() == 0:
        return StabilityVerdict("Stable", reason="zero-dimensional module")
    if _certify(m, param, mode):
        return StabilityVerdict("Stable", reason="dimension bounds exclude destabilizers")
    budget = budget or {}
    L = budget.get("word_length", 2 * m.dims.total())
    R = budget.get("random_vectors", 64)
    W = budget.get("max_words", 400)
    rng = make_rng(seed)
    candidates = []
    for s in _candidate_seeds(m, rng, L, R, W):
        candidates.append((s, False))
        candidates.append((s, True))
    # the p-generated submodule: empty seed set, framing on
    candidates.append(({}, True))
    seen = set()
    for seeds, fr in candidates:
        basis, framing = closure(m, seeds, fr)
        key = (tuple(basis[v].cols for v in m.shape.vertices()), framing)
        tot = sum(key[0]) + int(framing)
        if tot == 0 or _is_whole(m, basis, framing):
            continue
        if key in seen:
            continue
        seen.add(key)
        s = _sub_slope(basis, framing, param)
        if _destabilizes(s, mode):
            flat = [(v, list(vec.entries())) for v, vecs in seeds.items() for vec in vecs]
            return StabilityVerdict("Unstable", witness={v: basis[v].cols for v in basis},
                                    witness_framing=framing, seeds=flat, seed_framing=fr,
                                    witness_slope=s)
    if all(m.dims[v] <= 1 for v in m.shape.vertices()):
        return _exhaustive_small(m, param, mode)
    return StabilityVerdict("Unknown", reason="no destabilizer found and no proof of stability")


def _exhaustive_small(m, param, mode):
    """Exact decision when every d_v <= 1: each graded subspace is 0 or the whole of V_v."""
    vs = [v for v in m.shape.vertices() if m.dims[v]]
    for mask in itertools.product((0, 1), repeat=len(vs)):
        basis = {v: Mat(m.dims[v], 0) for v in m.shape.vertices()}
        for v, on in zip(vs, mask):
            if on:
                basis[v] = Mat.identity(1)
        for framing in (False, True):
            if not any(mask) and not framing:
                continue
            if _is_whole(m, basis, framing) or not is_submodule(m, basis, framing):
                continue
            s = _sub_slope(basis, framing, param)
            if _destabilizes(s, mode):
                seeds = [(v, [1]) for v, on in zip(vs, mask) if on]
                return StabilityVerdict("Unstable", witness={v: basis[v].cols for v in basis},
                                        witness_framing=framing, seeds=seeds,
                                        seed_framing=framing, witness_slope=s)
    return StabilityVerdict("Stable", reason="exhaustive over all graded subspaces")


def revalidate_witness(m, param, verdict, mode="stable"):
    """Recompute the closure of a verdict's seed set and confirm it destabilizes."""
    if verdict.kind != "Unstable":
        return False
    seeds = {}
    for v, vec in verdict.seeds:
        seeds.setdefault(v, []).append(Mat(len(vec), 1, vec))
    basis, framing = closure(m, seeds, verdict.seed_framing)
    if {v: basis[v].cols for v in basis} != verdict.witness or framing != verdict.witness_framing:
        return False
    if _is_whole(m, basis, framing):
        return False
    if not is_submodule(m, basis, framing):
        return False
    return _destabilizes(_sub_slope(basis, framing, param), mode)


def is_submodule(m, basis, framing):
    """Check arrow-closedness of a graded subspace, with or without the framing line."""
    for a in m.shape.arrows():
        x = m.arrows[a.name][a.index]
        if a.name == "p":
            if framing:
                tgt = basis[a.target]
                if rank(tgt.hstack(x)) != tgt.cols:
                    return False
        elif a.name == "q":
            if not framing and not (x @ basis[a.source]).is_zero():
                return False
        else:
            tgt = basis[a.target]
            if rank(tgt.hstack(x @ basis[a.source])) != tgt.cols:
                return False
    return True
