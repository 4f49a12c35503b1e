"""Command-line interface. Every command emits a schema-versioned report.

Exit codes: 0 success, 1 a check failed, 2 invalid input, 3 internal error.
Reports are deterministic; timings appear only with --timings.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from itertools import product

from . import __version__
from .algebra import (
    FlavorMismatch, is_e2_equivalence_morphism, to_split_filtered, verify_algebra, verify_morphism,
)
from .barcobar import LaurentCarrier, dual_numbers_koszul, stabilization_table
from .complexes import NonFreeInput, TorsionHomology, ce_resolution, check_bicomplex, check_contraction, totalize
from .fixture_files import FixtureError
from .graded import WindowEscape
from .linalg import MatrixE
from .obstruction import NonlinearTerm, Obstructed, forced_values, search_e2_equivalence, small_fractions
from .registry import BUILTINS, get_fixture
from .rings import RingError, parse_ring
from .spectral import FilteredMap, is_e2_equivalence, page
from .transfer import minimal_model

REPORT_SCHEMA = "dhtransfer.report/1"
USER_ERRORS = (FixtureError, RingError, FlavorMismatch, LaurentCarrier, NonFreeInput, TorsionHomology,
               WindowEscape, NonlinearTerm, ValueError)


class UsageError(Exception):
    pass


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DHTRANSFER_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# argument helpers

def _kv_int(text: str) -> tuple[str, int]:
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected NAME=INT, got {text!r}")
    k, v = text.split("=", 1)
    try:
        return k.strip(), int(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer in {text!r}") from None


def _window_arg(text: str) -> tuple[str, tuple[int, int]]:
    try:
        k, rng = text.split("=", 1)
        lo, hi = rng.split(":", 1)
        lo, hi = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NAME=LO:HI, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range in {text!r}")
    return k.strip(), (lo, hi)


def _params(args) -> dict:
    out = dict(args.param or [])
    if getattr(args, "p", None) is not None:
        out["p"] = args.p
    return out


def _windows(args, default: dict | None = None) -> dict:
    out = dict(default or {})
    out.update(dict(args.window or []))
    return out


def _fixture(args, name: str | None = None, **kw):
    return get_fixture(name or args.fixture, _params(args), _windows(args, kw.get("windows")),
                       kw.get("ring", args.ring))


# ---------------------------------------------------------------------------
# formatting

def _residual_json(rep, module, limit=20, input_module=None):
    js = rep.to_json(module, limit, input_module)
    for item, res in zip(js["residuals"], rep.residuals[:limit]):
        labs = sorted(res.value)
        if labs and module is not None:
            item["cell"] = list(module.bidegree(labs[0]))
    return js


def _matrix_json(M: MatrixE) -> list:
    return M.fmt()


# ---------------------------------------------------------------------------
# commands

def cmd_verify(args) -> tuple[int, dict]:
    fx = _fixture(args)
    jobs = []
    for name, A in sorted(fx.algebras.items()):
        jobs.append((f"algebra {name}", lambda A=A: verify_algebra(A, args.rmax, args.imax), A.carrier, None))
    for name, f in sorted(fx.morphisms.items()):
        jobs.append((f"morphism {name}", lambda f=f: verify_morphism(f, args.rmax, args.imax), f.target.carrier,
                     f.source.carrier))
    for name, (inp, c) in sorted(fx.tilde.items()):
        jobs.append((f"bicomplex {name}", lambda inp=inp: check_bicomplex(inp.bicomplex), inp.bicomplex.carrier,
                     None))
        jobs.append((f"contraction {name}", lambda c=c: check_contraction(c), c.big.carrier, c.small))
    for name, C in sorted(fx.complexes.items()):
        jobs.append((f"complex {name}", lambda C=C: check_bicomplex(C), C.carrier, None))
    with ThreadPoolExecutor(_threads()) as pool:
        reps = list(pool.map(lambda j: j[1](), jobs))
    checks = []
    for (label, _, module, src), rep in zip(jobs, reps):
        js = _residual_json(rep, module, args.diff_limit, src)
        js["check"] = label
        checks.append(js)
    ok = all(c["status"] == "pass" for c in checks)
    return (0 if ok else 1), {
        "fixture": fx.name, "ring": str(fx.spec), "parameters": fx.parameters, "window": fx.window.to_json(),
        "bounds": {"r_max": args.rmax, "i_max": args.imax}, "checks": checks,
        "status": "pass" if ok else "fail",
    }


def _tables(M, f, arity_max: int, i_max: int):
    """Nonzero entries of d_i, m_{i,r} (r <= arity_max) and f_{i,r} on the window basis."""
    S = M.carrier
    T = f.target.carrier
    basis = S.basis()
    entries = {}
    for i in range(1, i_max + 1):
        op = M.d.get(i)
        if op is not None:
            entries[("d", i, 1)] = {(x,): op.on_basis((x,)) for x in basis}
    for (i, r), op in sorted(M.ops.items()):
        if r <= arity_max:
            entries[("m", i, r)] = {X: op.on_basis(X) for X in product(basis, repeat=r)}
    for (i, r), op in sorted(f.components.items()):
        if r <= arity_max:
            entries[("f", i, r)] = {X: op.on_basis(X) for X in product(basis, repeat=r)}
    out = []
    for key in sorted(entries):
        mod = T if key[0] == "f" else S
        for X in sorted(entries[key], key=lambda X: [basis.index(x) for x in X]):
            v = entries[key][X]
            if v:
                out.append({"op": f"{key[0]}_{key[1]},{key[2]}" if key[0] != "d" else f"d_{key[1]}",
                            "inputs": [S.fmt(x) for x in X], "value": mod.fmt_vec(v)})
    return entries, out


def compare_tables(entries: dict, expected: dict, S, T, base=None, arity_max: int = 2) -> list[dict]:
    """Entry-by-entry differences between computed tables and expected rules.

    Keys present on either side are compared on every basis tuple; a missing
    computed operation counts as zero. m_{0,2} falls back to the product of
    `base` when the expected tables do not list it.
    """
    basis = S.basis()
    pos = {x: k for k, x in enumerate(basis)}
    keys = sorted(set(entries) | {k for k in expected if k[2] <= arity_max})
    diffs = []
    for key in keys:
        kind, i, r = key
        if r > arity_max:
            continue
        rule = expected.get(key)
        if rule is None and (kind, i, r) == ("m", 0, 2) and base is not None and (0, 2) in base.ops:
            rule = base.ops[(0, 2)].on_basis
        got = entries.get(key, {})
        mod = T if kind == "f" else S
        for X in sorted(product(basis, repeat=r), key=lambda X: [pos[x] for x in X]):
            v = got.get(X, {})
            want = rule(X) if rule is not None else {}
            if want != v:
                diffs.append({"op": f"{kind}_{i},{r}" if kind != "d" else f"d_{i}",
                              "inputs": [S.fmt(x) for x in X], "expected": mod.fmt_vec(want),
                              "computed": mod.fmt_vec(v)})
    return diffs


def cmd_transfer(args) -> tuple[int, dict]:
    fx = _fixture(args)
    if not fx.tilde:
        raise UsageError(f"fixture {fx.name!r} has no bicomplex algebra to transfer from")
    name = args.tilde or sorted(fx.tilde)[0]
    if name not in fx.tilde:
        raise UsageError(f"no bicomplex algebra {name!r}; available: {sorted(fx.tilde)}")
    inp, c = fx.tilde[name]
    M, f, res = minimal_model(inp, c, args.rmax, args.imax)
    entries, table = _tables(M, f, args.tables, args.imax)
    report = {"fixture": fx.name, "ring": str(fx.spec), "parameters": fx.parameters, "window": fx.window.to_json(),
              "bounds": {"r_max": args.rmax, "i_max": args.imax, "table_arity": args.tables},
              "tables": table}
    code = 0
    S, T = M.carrier, f.target.carrier
    variant = args.expect
    if variant is None and fx.expected:
        variant = sorted(fx.expected)[0] if "literal" not in fx.expected else "literal"
    if variant and variant != "none":
        if variant not in fx.expected:
            raise UsageError(f"no expected tables {variant!r}; available: {sorted(fx.expected)}")
        base = fx.algebras.get(fx.minimal) if fx.minimal else None
        diffs = compare_tables(entries, fx.expected[variant], S, T, base)
        report["expected"] = {"variant": variant, "status": "match" if not diffs else "differ",
                              "differences": len(diffs), "first": diffs[:args.diff_limit]}
        if diffs:
            code = 1
    if args.verify:
        checks = []
        for label, rep, mod in (("minimal model", verify_algebra(M, args.rmax, args.imax), S),
                                ("iota_infinity", verify_morphism(res.inclusion, args.rmax, args.imax),
                                 c.big.carrier),
                                ("f", verify_morphism(f, args.rmax, args.imax), T)):
            js = _residual_json(rep, mod, args.diff_limit, S)
            js["check"] = label
            checks.append(js)
            if not rep.ok:
                code = 1
        report["checks"] = checks
    report["status"] = "pass" if code == 0 else "fail"
    return code, report


def cmd_spectral(args) -> tuple[int, dict]:
    code = 0
    out = []
    for name in args.fixtures:
        fx = _fixture(args, name)
        item = {"fixture": fx.name, "ring": str(fx.spec), "parameters": fx.parameters, "pages": [],
                "certificates": []}
        views = [(f"complex {n}", totalize(C)) for n, C in sorted(fx.complexes.items())]
        names = [args.algebra] if args.algebra else sorted(fx.algebras)
        for n in names:
            if n not in fx.algebras:
                raise UsageError(f"no algebra {n!r} in {fx.name}")
            views.append((f"algebra {n}", to_split_filtered(fx.algebras[n], args.imax)))
        for label, X in views:
            E = page(X, args.page)
            js = E.to_json()
            js["object"] = label
            js["homology"] = [{"n": n, **X.homology(n).presentation.to_json(),
                               "describe": X.homology(n).presentation.describe()}
                              for n in X.degree_range() if n not in X.invalid]
            item["pages"].append(js)
        for n, f in sorted(fx.morphisms.items()):
            cert = is_e2_equivalence_morphism(f, args.imax) if args.page == 2 else None
            if cert is None:
                from .algebra import underlying_filtered_map
                from .spectral import is_er_equivalence
                cert = is_er_equivalence(underlying_filtered_map(f, args.imax), args.page)
            js = cert.to_json()
            js["morphism"] = n
            item["certificates"].append(js)
            if not cert.ok:
                code = 1
        out.append(item)
    return code, {"page": args.page, "results": out, "status": "pass" if code == 0 else "fail"}


def _fmt_scalar(R, v):
    return R.fmt(v)


def cmd_obstruct(args) -> tuple[int, dict]:
    tgt = get_fixture(args.target, _params(args), None, None)
    T = tgt.algebras[tgt.minimal or sorted(tgt.algebras)[0]]
    windows = _windows(args, {"n": (-2, 2)})
    src = get_fixture(args.source, _params(args), windows, args.ring or str(T.spec))
    M = src.algebras[src.minimal or sorted(src.algebras)[0]]
    R = M.R
    res = search_e2_equivalence(M, T, args.rmax, args.imax)
    S = M.carrier
    report = {"source": src.name, "target": tgt.name, "ring": str(M.spec), "parameters": _params(args),
              "window": src.window.to_json(), "bounds": {"r_max": args.rmax, "i_max": args.imax},
              "levels": res.state.levels}
    modulus = M.spec.modulus if M.spec.kind in ("GF", "ZN") else 0

    def unknown_json(u, v=None):
        item = {"i": u.i, "r": u.r, "inputs": [S.fmt(x) for x in u.inputs], "output": T.carrier.fmt(u.output)}
        if v is not None:
            item["value"] = R.fmt(v)
            if modulus:
                item["small_fractions"] = [str(q) for q in small_fractions(v, modulus)]
        return item

    report["forced"] = [unknown_json(u, v) for u, v in forced_values(res.state, R)]
    if isinstance(res, Obstructed):
        ob = res.obstruction
        report["result"] = "Obstructed"
        report["obstruction"] = {
            "i": ob.i, "r": ob.r, "level": ob.level, "inputs": [S.fmt(x) for x in ob.inputs],
            "output": T.carrier.fmt(ob.output), "cell": list(ob.cell), "constant": R.fmt(ob.constant),
            "unconditional": ob.unconditional, "assumptions": [unknown_json(u) for u in ob.assumptions],
            "matrix": _matrix_json(ob.matrix), "rhs": [R.fmt(x) for x in ob.rhs],
            "unknowns": [unknown_json(u) for u in ob.unknowns],
            "witness": {"row": ob.witness.coordinate, "value": R.fmt(ob.witness.value)},
            "reproduces": ob.reproduce(),
            "instances": [{"inputs": [S.fmt(x) for x in X], "output": T.carrier.fmt(o), "constant": R.fmt(c)}
                          for X, o, c in ob.instances[:args.diff_limit]],
        }
        report["status"] = "obstructed"
    else:
        report["result"] = "Solved"
        report["bounds_exhausted"] = res.bounds_exhausted
        comps = []
        for (i, r), op in sorted(res.morphism.components.items()):
            for X in product(S.basis(), repeat=r):
                v = op.on_basis(X)
                if v:
                    comps.append({"i": i, "r": r, "inputs": [S.fmt(x) for x in X], "value": T.carrier.fmt_vec(v)})
        report["components"] = comps
        report["status"] = "solved"
    return 0, report


def cmd_strictify(args) -> tuple[int, dict]:
    fx = _fixture(args)
    desc = fx.descriptor
    if (desc is not None and desc.laurent) or any(not A.carrier.is_bounded() for A in fx.algebras.values()):
        raise LaurentCarrier(f"fixture {fx.name!r} has Laurent (unbounded) carriers; strictify needs finite bases")
    name = args.morphism or sorted(fx.morphisms)[0] if fx.morphisms else None
    if name is None or name not in fx.morphisms:
        raise UsageError(f"no morphism {args.morphism!r} in {fx.name}")
    f = fx.morphisms[name]
    if f.source.flavor != "Assoc":
        from .algebra import ASSOC, DerivedHomotopyAlgebra, DerivedInftyMorphism
        src = DerivedHomotopyAlgebra(ASSOC, f.source.carrier, f.source.d, f.source.ops, f.source.name)
        tgt = DerivedHomotopyAlgebra(ASSOC, f.target.carrier, f.target.d, f.target.ops, f.target.name)
        f = DerivedInftyMorphism(src, tgt, f.components, f.name)
    st = stabilization_table(f, args.weight, args.degmax)
    table = [{"n": n, "by_W": [{"W": W, **h} for W, h in sorted(row.items())],
              "target": st["target"].get(n), "stable_from": st["stable_from"].get(n),
              "matches_target": row[max(row)] == st["target"].get(n)}
             for n, row in sorted(st["table"].items()) if n <= args.degmax]
    per_w = [{"W": W, "cells": {str(k): v for k, v in r.report.sizes.items()},
              "theta_chain_failures": len(r.report.chain_map_failures),
              "theta_multiplicative_failures": len(r.report.multiplicative_failures)}
             for W, r in sorted(st["results"].items())]
    ok = all(row["matches_target"] and row["stable_from"] is not None for row in table) and \
        all(w["theta_chain_failures"] == 0 and w["theta_multiplicative_failures"] == 0 for w in per_w)
    return (0 if ok else 1), {
        "fixture": fx.name, "morphism": name, "view": "Assoc", "ring": str(fx.spec),
        "bounds": {"W_max": args.weight, "deg_max": args.degmax}, "stabilization": table, "theta": per_w,
        "status": "pass" if ok else "fail",
    }


def _cell_maps(B, op, module_to, p_shift):
    M = B.carrier
    R = M.R
    out = []
    cells = M.cells()
    for (p, q), labs in sorted(cells.items()):
        tgt_cell = (p + p_shift[0], q + p_shift[1])
        tlabs = module_to.cells().get(tgt_cell, [])
        if not labs or not tlabs:
            continue
        rows = [[R.fmt(op.on_basis((l,)).get(t, R.zero)) for l in labs] for t in tlabs]
        if all(x == "0" for row in rows for x in row):
            continue
        out.append({"from": [p, q], "to": list(tgt_cell), "columns": [M.fmt(l) for l in labs],
                    "rows": [module_to.fmt(t) for t in tlabs], "matrix": rows})
    return out


def cmd_ce_resolve(args) -> tuple[int, dict]:
    fx = _fixture(args)
    if not fx.complexes:
        raise UsageError(f"fixture {fx.name!r} has no one-column complex")
    name = args.complex or sorted(fx.complexes)[0]
    C = fx.complexes[name]
    ce = ce_resolution(C)
    B = ce.resolution
    M = B.carrier
    X, Y = totalize(C), totalize(B)
    cert = is_e2_equivalence(FilteredMap(Y, X, ce.augmentation, "augmentation"))
    checks = check_bicomplex(B)
    ok = cert.ok and checks.ok
    return (0 if ok else 1), {
        "fixture": fx.name, "complex": name, "ring": str(fx.spec), "parameters": fx.parameters,
        "generators": [{"name": M.fmt(l), "bidegree": list(M.bidegree(l))} for l in M.basis()],
        "pieces": [{"kind": k, "degree": q, "divisor": e} for k, q, e in ce.pieces],
        "d_v": _cell_maps(B, B.d_v, M, (0, -1)), "d_h": _cell_maps(B, B.d_h, M, (-1, 0)),
        "augmentation": _cell_maps(B, ce.augmentation, C.carrier, (0, 0)),
        "bicomplex_check": checks.to_json(M), "e2_certificate": cert.to_json(),
        "status": "pass" if ok else "fail",
    }


def cmd_koszul(args) -> tuple[int, dict]:
    spec = parse_ring(args.ring or "ZZ")
    res = dual_numbers_koszul(range(1, args.weight + 1), spec)
    rows = [{"weight": w, **v} for w, v in sorted(res.items())]
    ok = all(r["acyclic"] and r["d_squared_zero"] for r in rows)
    return (0 if ok else 1), {"ring": str(spec), "weights": [1, args.weight], "results": rows,
                              "status": "pass" if ok else "fail"}


def cmd_fixtures(args) -> tuple[int, dict]:
    return 0, {"fixtures": [d.to_json() for _, d in sorted(BUILTINS.items())], "status": "pass"}


def cmd_property(args) -> tuple[int, dict]:
    from . import properties
    fn = properties.CHECKS[args.check]
    res = fn(count=args.count, seed=args.seed)
    ok = all(item["ok"] for item in res)
    return (0 if ok else 1), {"check": args.check, "count": len(res), "seed": args.seed,
                              "passed": sum(1 for x in res if x["ok"]), "failures": [x for x in res if not x["ok"]][:5],
                              "status": "pass" if ok else "fail"}


# ---------------------------------------------------------------------------
# parser and driver

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", choices=("json", "text"), default="json")
    common.add_argument("--timings", action="store_true", help="include wall-clock timings (not deterministic)")
    common.add_argument("--param", type=_kv_int, action="append", metavar="NAME=INT")
    common.add_argument("--p", type=int, help="shortcut for --param p=P")
    common.add_argument("--window", type=_window_arg, action="append", metavar="NAME=LO:HI",
                        help="parameter range of a Laurent family (default n=-4:4)")
    common.add_argument("--ring", help="ground ring override for built-ins (ZZ, QQ, GF(p), ZZ/n, QQ[t])")
    common.add_argument("--diff-limit", type=int, default=20)

    ap = _Parser(prog="dhtransfer", description="Derived homotopy algebras: transfer, verification, obstructions.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("verify", parents=[common], help="check structure equations of a fixture")
    s.add_argument("fixture")
    s.add_argument("--rmax", type=int, default=4)
    s.add_argument("--imax", type=int, default=3)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("transfer", parents=[common], help="minimal model by homotopy transfer")
    s.add_argument("fixture")
    s.add_argument("--tilde")
    s.add_argument("--rmax", type=int, default=4)
    s.add_argument("--imax", type=int, default=3)
    s.add_argument("--tables", type=int, default=2, help="largest arity shown in the tables")
    s.add_argument("--expect", help="expected table variant, or none")
    s.add_argument("--verify", action=argparse.BooleanOptionalAction, default=True)
    s.set_defaults(func=cmd_transfer)

    s = sub.add_parser("spectral", parents=[common], help="pages of the horizontal-filtration spectral sequence")
    s.add_argument("fixtures", nargs="+")
    s.add_argument("--page", type=int, default=2)
    s.add_argument("--algebra")
    s.add_argument("--imax", type=int, default=None)
    s.set_defaults(func=cmd_spectral)

    s = sub.add_parser("obstruct", parents=[common], help="search for an E^2-equivalence level by level")
    s.add_argument("source")
    s.add_argument("target")
    s.add_argument("--rmax", type=int, default=3)
    s.add_argument("--imax", type=int, default=2)
    s.set_defaults(func=cmd_obstruct)

    s = sub.add_parser("strictify", parents=[common], help="weight-truncated good cobar stabilization table")
    s.add_argument("fixture")
    s.add_argument("--morphism")
    s.add_argument("--weight", type=int, default=8)
    s.add_argument("--degmax", type=int, default=5)
    s.set_defaults(func=cmd_strictify)

    s = sub.add_parser("ce-resolve", parents=[common], help="two-column Cartan-Eilenberg resolution")
    s.add_argument("fixture")
    s.add_argument("--complex")
    s.set_defaults(func=cmd_ce_resolve)

    s = sub.add_parser("koszul-dual-numbers", parents=[common], help="acyclicity of the dual-numbers Koszul complex")
    s.add_argument("--weight", type=int, default=8)
    s.set_defaults(func=cmd_koszul)

    s = sub.add_parser("fixtures", parents=[common], help="list built-in fixtures")
    s.set_defaults(func=cmd_fixtures)

    s = sub.add_parser("property", parents=[common], help="randomized property checks")
    s.add_argument("check", choices=("transfer-oracle", "snf-oracle", "spectral-comparison"))
    s.add_argument("--count", type=int, default=None)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_property)
    return ap


def _echo(args) -> dict:
    skip = {"func", "output", "timings"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip or v is None:
            continue
        out[k] = [list(x) if isinstance(x, tuple) else x for x in v] if isinstance(v, list) else v
    return out


def _text(obj, indent=0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, list) and v and all(not isinstance(x, (dict, list)) for x in v):
                lines.append(f"{pad}{k}: [{', '.join(map(str, v))}]")
            elif isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines += _text(v, indent + 1)
            else:
                lines.append(f"{pad}{k}: {json.dumps(v) if not isinstance(v, str) else v}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, dict):
                inner = _text(v, indent + 1)
                lines.append(f"{pad}- " + inner[0].lstrip() if inner else f"{pad}- {{}}")
                lines += inner[1:]
            elif isinstance(v, list) and all(not isinstance(x, (dict, list)) for x in v):
                lines.append(f"{pad}- [{', '.join(map(str, v))}]")
            else:
                lines.append(f"{pad}- {v}")
    else:
        lines.append(f"{pad}{obj}")
    return lines


def render(report: dict, mode: str) -> str:
    if mode == "text":
        return "\n".join(_text(report)) + "\n"
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    mode = "text" if "--output=text" in argv or ("--output" in argv and argv[argv.index("--output") + 1:][:1] == ["text"]) else "json"
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        report = {"schema": REPORT_SCHEMA, "command": None, **_error("usage", e, None), "exit_code": 2}
        sys.stdout.write(render(report, "json"))
        return 2
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    t0 = time.perf_counter()
    try:
        code, body = args.func(args)
    except UsageError as e:
        code, body = 2, _error("usage", e, args)
    except USER_ERRORS as e:
        code, body = 2, _error(type(e).__name__, e, args)
    except Exception as e:  # noqa: BLE001 - reported as an internal error
        code, body = 3, _error("internal", e, args)
    report = {"schema": REPORT_SCHEMA, "command": args.command, "arguments": _echo(args), **body, "exit_code": code}
    if args.timings:
        report["timings"] = {"seconds": round(time.perf_counter() - t0, 3)}
    sys.stdout.write(render(report, "json" if code >= 2 else mode))
    return code


def _error(kind: str, e: Exception, args) -> dict:
    msg = e.args[0] if isinstance(e, KeyError) and e.args else str(e)
    return {"status": "error", "error": {"kind": kind, "type": type(e).__name__, "message": str(msg)}}


if __name__ == "__main__":
    sys.exit(main())
