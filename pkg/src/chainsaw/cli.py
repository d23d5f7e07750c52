"""Command-line entry point: ``chainsaw <command> ...``.

Exit codes: 0 success, 2 usage error, 3 data error, 4 computation error.
Errors are reported on stderr as a one-line JSON object.  Every run emits a
manifest: next to the output file as ``<out>.manifest.json`` when ``--out`` is
given, otherwise as a JSON line on stderr.
"""

import argparse
import hashlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import __version__
from . import equivariant, maps, monad, stability, weights
from .quiver import (
    CHAINSAW, DENTED, FIXED, RIFT, GenerationFailed, QuiverDataError, QuiverShape,
    deserialize, index_str, random_module, relation_residuals, serialize,
)

SHAPES = {"chainsaw": CHAINSAW, "fixed": FIXED, "dented": DENTED, "rift": RIFT}

MAPS = {
    "rotate": maps.rotate,
    "psi_direct_image": maps.psi_direct_image,
    "blowdown_pi": maps.blowdown_pi,
    "psi_k": maps.psi_k,
    "pi_k": maps.pi_k,
    "rift_to_dented": maps.rift_to_dented,
    "dented_to_rift": maps.dented_to_rift,
    "fixed_to_chainsaw": maps.fixed_to_chainsaw,
    "assemble": lambda m: equivariant.assemble(m),
}

DATA_ERRORS = (QuiverDataError, weights.WeightError, monad.GradingError, OSError, UnicodeError)
COMPUTE_ERRORS = (GenerationFailed, maps.NotOnOpenPiece, maps.InfeasibleDims,
                  equivariant.NonDiagonalizable, equivariant.BlockLeak, ArithmeticError)


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- helpers

def _ints(s, what):
    try:
        return [int(x) for x in s.split(",")] if s.strip() else []
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated integers, got {s!r}")


def _read(path):
    if path == "-":
        return sys.stdin.buffer.read()
    with open(path, "rb") as fh:
        return fh.read()


def _digest(data):
    return hashlib.sha256(data).hexdigest()


def _dumps(doc):
    return (json.dumps(doc, indent=1, sort_keys=True) + "\n").encode()


class Run:
    """Collects the manifest of one invocation."""

    def __init__(self, args):
        self.args = args
        self.inputs = {}

    def read(self, path):
        data = _read(path)
        self.inputs[path] = _digest(data)
        return data

    def emit(self, data, operation):
        out = getattr(self.args, "out", None)
        if out:
            with open(out, "wb") as fh:
                fh.write(data)
        else:
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
        manifest = {
            "command": self.args.command,
            "operation": operation,
            "parameters": {k: v for k, v in sorted(vars(self.args).items())
                           if k not in ("command", "func", "out")},
            "seed": getattr(self.args, "seed", None),
            "version": __version__,
            "inputs": self.inputs,
            "output": _digest(data),
        }
        if out:
            with open(out + ".manifest.json", "wb") as fh:
                fh.write(_dumps(manifest))
        else:
            sys.stderr.write(json.dumps(manifest, sort_keys=True) + "\n")


def _shape(args):
    kind = SHAPES[args.shape]
    if args.N < 1:
        raise UsageError("--N must be positive")
    if args.k < 1:
        raise UsageError("--k must be positive")
    return QuiverShape(kind, args.N, args.k)


def _text_or_json(args, doc, lines):
    if getattr(args, "json", False):
        return _dumps(doc)
    return ("\n".join(lines) + "\n").encode()


# ---------------------------------------------------------------- commands

def cmd_gen(args, run):
    shape = _shape(args)
    dims = _ints(args.dims, "--dims")
    vs = shape.vertices()
    if len(dims) != len(vs):
        raise UsageError(f"--dims needs {len(vs)} entries for vertices {[index_str(v) for v in vs]}")
    m = random_module(shape, dims, args.seed, stable=args.stable, bound=args.bound)
    run.emit(serialize(m), "quiver.random_module")


def _check_one(data):
    m = deserialize(data)
    res = relation_residuals(m)
    bad = [index_str(rel.index) for rel, r in zip(m.shape.relations(), res) if not r.is_zero()]
    if m.shape.kind in (CHAINSAW, FIXED):
        gen = stability.is_gen_stable(m)
    else:
        gen = None
    return {"shape": m.shape.to_json(), "dims": m.dims.to_json(),
            "residuals": "all zero" if not bad else {"nonzero": bad},
            "gen_stable": gen}


def _check_lines(doc):
    res = doc["residuals"]
    rline = "residuals: all zero" if res == "all zero" else \
        "residuals: nonzero at " + ", ".join(f"B[{i}]" for i in res["nonzero"])
    g = doc["gen_stable"]
    gline = "gen-stable: " + ("n/a" if g is None else str(g).lower())
    return [rline, gline]


def _pool_map(fn, items, jobs):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(x) for x in items]


def cmd_check(args, run):
    datas = [run.read(p) for p in args.inputs]
    docs = _pool_map(_check_one, datas, args.jobs)
    lines = []
    for path, doc in zip(args.inputs, docs):
        if len(docs) > 1:
            lines.append(f"# {path}")
        lines += _check_lines(doc)
    out = {"operation": "quiver.relation_residuals+stability.is_gen_stable",
           "results": [dict(d, input=p) for p, d in zip(args.inputs, docs)]}
    run.emit(_text_or_json(args, out, lines), out["operation"])


def cmd_map(args, run):
    m = deserialize(run.read(args.input))
    fn = MAPS[args.name]
    for _ in range(args.times):
        m = fn(m)
    run.emit(serialize(m), f"maps.{args.name}" if args.name != "assemble" else "equivariant.assemble")


def cmd_fixed(args, run):
    m = deserialize(run.read(args.input))
    g = equivariant.find_fixing_gauge(m, args.k, seed=args.seed,
                                      framing_twist=not args.untwisted)
    doc = {"operation": "equivariant.find_fixing_gauge+eigendecompose", "k": args.k,
           "fixed": g is not None}
    if g is not None:
        gm, grading = equivariant.eigendecompose(m, g, args.k)
        doc["graded_shape"] = gm.shape.to_json()
        doc["graded_dims"] = gm.dims.to_json()
        doc["grading"] = grading.to_json()
        if gm.shape.kind == FIXED:
            doc["defect_class"] = equivariant.defect_class(gm.dims).to_json()
            doc["nonempty_chain"] = equivariant.nonempty_chain_check(gm.dims)
        else:
            doc["admissible"] = equivariant.admissible_check(gm.dims)
        if args.graded_out:
            with open(args.graded_out, "wb") as fh:
                fh.write(serialize(gm))
    lines = [f"fixed: {str(doc['fixed']).lower()}"]
    if g is not None:
        lines.append("graded dims: " + json.dumps(doc["graded_dims"], sort_keys=True))
        if "defect_class" in doc:
            lines.append("defect class: " + " ".join(map(str, doc["defect_class"]["representative"])))
    run.emit(_text_or_json(args, doc, lines), doc["operation"])


def _stability_one(item):
    data, flavor, mode, epsilon, seed = item
    m = deserialize(data)
    param = stability.make_zeta(m.dims, flavor, epsilon)
    verdict = stability.check_slope_stability(m, param, mode=mode, seed=seed)
    doc = {"param": param.to_json(), "mode": mode}
    doc.update(verdict.to_json())
    if verdict.kind == "Unstable":
        doc["witness_revalidates"] = stability.revalidate_witness(m, param, verdict, mode)
    return doc


def cmd_stability(args, run):
    eps = Fraction(args.epsilon) if args.epsilon else None
    items = [(run.read(p), args.flavor, args.mode, eps, args.seed) for p in args.inputs]
    docs = _pool_map(_stability_one, items, args.jobs)
    lines = []
    for path, doc in zip(args.inputs, docs):
        line = f"{path}: {doc['verdict']}"
        if doc["verdict"] == "Unstable":
            line += " witness " + json.dumps(doc["witness"]["dims"], sort_keys=True)
        lines.append(line)
    out = {"operation": "stability.check_slope_stability",
           "results": [dict(d, input=p) for p, d in zip(args.inputs, docs)]}
    run.emit(_text_or_json(args, out, lines), out["operation"])


def cmd_monad(args, run):
    m = deserialize(run.read(args.input))
    if args.builder == "blowup":
        data = monad.build_blowup_data(m, "literal" if args.literal_signs else "consistent")
        res = monad.verify_blowup_identities(data)
        doc = {"operation": "monad.verify_blowup_identities", "identities": res.summary(),
               "all_hold": res.all_zero()}
        lines = [f"{k}: {v}" for k, v in res.summary().items()]
        if not res.kappa1_gamma.is_zero():
            lines += ["## kappa''_1 o gamma", res.kappa1_gamma.to_text()]
        if not res.kappa2_gamma.is_zero():
            lines += ["## kappa''_2 o gamma", res.kappa2_gamma.to_text()]
        if not res.middle.is_zero():
            lines += ["## gamma' o kappa''_2 - beta o kappa''_1", res.middle.to_text()]
        dump = data.dump()
    else:
        if args.builder == "adhm":
            if m.shape.kind != CHAINSAW or m.shape.N != 1:
                raise QuiverDataError("the adhm builder takes a chainsaw module with N = 1")
            a = m.arrows
            mon = monad.build_adhm_monad(a["A"][0], a["B"][0], a["p"][0], a["q"][0])
        elif args.builder == "stack":
            mon = monad.build_stack_monad(m)
        else:
            mon = monad.build_weighted_monad(m, literal_signs=args.literal_signs)
        mon.audit()
        r = monad.verify_complex(mon.C, mon.D, mon.symbol_degrees)
        doc = {"operation": f"monad.build_{args.builder}_monad+verify_complex",
               "complex": r.is_zero(),
               "nonzero_blocks": [[r.targets[i].label, r.sources[j].label]
                                  for i, j in r.nonzero_blocks()]}
        lines = ["D.C: zero" if r.is_zero() else "D.C: nonzero", r.to_text() if not r.is_zero() else ""]
        lines = [x for x in lines if x]
        dump = mon.dump()
    if args.dump:
        lines.append(dump)
        doc["dump"] = dump
    run.emit(_text_or_json(args, doc, lines), doc["operation"])


def cmd_nakajima(args, run):
    v = _ints(args.v, "--v")
    if len(v) != args.k:
        raise UsageError(f"--v needs {args.k} entries")
    dom = weights.nakajima_dominance(v, args.N, args.k)
    doc = {"operation": "weights.nakajima_dominance", "v": v, "N": args.N, "k": args.k,
           "w_minus_Cv": list(weights.nakajima_weight(v, args.N, args.k)), "dominant": dom}
    if dom:
        doc["good"] = weights.is_good(v, args.N, args.k, depth_cap=args.depth)
    lines = [f"w - Cv: {' '.join(map(str, doc['w_minus_Cv']))}",
             f"dominant: {str(dom).lower()}"]
    if dom:
        lines.append(f"good: {str(doc['good']).lower()}")
    run.emit(_text_or_json(args, doc, lines), doc["operation"])


def _parse_weight(s, what):
    """LEVEL:a1,...,a_{N-1}:ENERGY"""
    parts = s.split(":")
    if len(parts) != 3:
        raise UsageError(f"{what}: expected LEVEL:LABELS:ENERGY, got {s!r}")
    try:
        level = int(parts[0])
        fin = tuple(int(x) for x in parts[1].split(",")) if parts[1] else ()
        energy = Fraction(parts[2])
    except ValueError:
        raise UsageError(f"{what}: malformed weight {s!r}")
    return weights.AffineWeight(level, fin, energy)


def cmd_mult(args, run):
    lam = _parse_weight(args.lam, "--lambda")
    nu = _parse_weight(args.nu, "--nu")
    m = weights.weight_multiplicity(lam, nu, args.depth)
    val = m if isinstance(m, int) else str(m)
    doc = {"operation": "weights.weight_multiplicity", "lambda": lam.to_json(),
           "nu": nu.to_json(), "depth_cap": args.depth, "multiplicity": val}
    run.emit(_text_or_json(args, doc, [f"multiplicity: {val}"]), doc["operation"])


def cmd_predict(args, run):
    v = _ints(args.v, "--v")
    if len(v) != args.k:
        raise UsageError(f"--v needs {args.k} entries")
    a = Fraction(args.a) if args.a is not None else None
    lma = weights.lambda_mu_alpha(v, args.N, args.k, a)
    if not lma.integral:
        raise weights.WeightError(f"alpha = {[str(x) for x in lma.alpha]} is not integral")
    table = weights.mult_predictions(lma.lam, lma.alpha, args.depth)
    doc = {"operation": "weights.mult_predictions", "v": v, "N": args.N, "k": args.k}
    doc.update(lma.to_json())
    doc["table"] = table.to_json()
    lines = [f"lambda: {json.dumps(lma.lam.to_json(), sort_keys=True)}",
             f"alpha: {' '.join(str(x) for x in lma.alpha)}", table.to_text()]
    run.emit(_text_or_json(args, doc, lines), doc["operation"])


# ---------------------------------------------------------------- parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(json.dumps({"error": "UsageError", "message": message}) + "\n")
        sys.exit(2)


def build_parser():
    p = _Parser(prog="chainsaw", description="Exact computations with chainsaw quiver data.")
    p.add_argument("--version", action="version", version=f"chainsaw {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--out", help="write the result here (manifest goes to OUT.manifest.json)")
        return sp

    g = add("gen", cmd_gen, "generate a random relation-satisfying module")
    g.add_argument("--shape", choices=sorted(SHAPES), required=True)
    g.add_argument("--N", type=int, required=True)
    g.add_argument("--k", type=int, default=1)
    g.add_argument("--dims", required=True, help="comma-separated, in vertex order")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--stable", action="store_true")
    g.add_argument("--bound", type=int, default=10)

    c = add("check", cmd_check, "relation residuals and generation stability")
    c.add_argument("inputs", nargs="+")
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--json", action="store_true")

    mp = add("map", cmd_map, "apply a map between shapes")
    mp.add_argument("name", choices=sorted(MAPS))
    mp.add_argument("input")
    mp.add_argument("--times", type=int, default=1)

    f = add("fixed", cmd_fixed, "decide cyclic fixedness and split into graded data")
    f.add_argument("input")
    f.add_argument("--k", type=int, required=True)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--untwisted", action="store_true", help="act trivially on the framing lines")
    f.add_argument("--graded-out")
    f.add_argument("--json", action="store_true")

    s = add("stability", cmd_stability, "slope stability verdicts")
    s.add_argument("inputs", nargs="+")
    s.add_argument("--flavor", choices=["bullet", "minus"], default="minus")
    s.add_argument("--mode", choices=["stable", "semistable"], default="stable")
    s.add_argument("--epsilon")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--json", action="store_true")

    mo = add("monad", cmd_monad, "build a monad and verify its identities")
    mo.add_argument("builder", choices=["adhm", "stack", "weighted", "blowup"])
    mo.add_argument("input")
    mo.add_argument("--literal-signs", action="store_true")
    mo.add_argument("--dump", action="store_true")
    mo.add_argument("--json", action="store_true")

    n = add("nakajima", cmd_nakajima, "Nakajima dominance and goodness")
    n.add_argument("--v", required=True)
    n.add_argument("--N", type=int, required=True)
    n.add_argument("--k", type=int, required=True)
    n.add_argument("--depth", type=int, default=12)
    n.add_argument("--json", action="store_true")

    mu = add("mult", cmd_mult, "weight multiplicity in an integrable module")
    mu.add_argument("--lambda", dest="lam", required=True, help="LEVEL:LABELS:ENERGY")
    mu.add_argument("--nu", required=True)
    mu.add_argument("--depth", type=int, default=6)
    mu.add_argument("--json", action="store_true")

    pr = add("predict", cmd_predict, "multiplicity table m_beta for 0 <= beta <= alpha")
    pr.add_argument("--v", required=True)
    pr.add_argument("--N", type=int, required=True)
    pr.add_argument("--k", type=int, required=True)
    pr.add_argument("--a", default=None, help="instanton number (default: matched to dim M(v,w))")
    pr.add_argument("--depth", type=int, default=6)
    pr.add_argument("--json", action="store_true")
    return p


def _fail(code, exc):
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    run = Run(args)
    try:
        args.func(args, run)
    except UsageError as exc:
        return _fail(2, exc)
    except DATA_ERRORS as exc:
        return _fail(3, exc)
    except COMPUTE_ERRORS as exc:
        return _fail(4, exc)
    except ValueError as exc:
        return _fail(3, exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
