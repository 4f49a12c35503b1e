"""Declarative fixture files (JSON, no executable code).

A file describes algebras, morphisms, one-column complexes and bicomplex
algebras through parametric families and rule tables. Expressions in
bidegrees, guards, output labels and coefficients go through a small AST
evaluator that only knows integer arithmetic, comparisons, boolean
connectives and the ring variable. See docs/fixture-schema.md.
"""

from __future__ import annotations

import ast
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .algebra import FLAVORS, DerivedHomotopyAlgebra, DerivedInftyMorphism
from .complexes import Bicomplex, build_contraction, one_column_complex
from .graded import BigradedModule, DegreeWindow, Family, MultiOp
from .rings import RingError, RingSpec, parse_ring, ring
from .transfer import StrictAlgebraInput

SCHEMA = "dhtransfer.fixture/1"


class FixtureError(Exception):
    pass


# ---------------------------------------------------------------------------
# expressions

_INT_BIN = {
    ast.Add: lambda a, b: a + b,
    ast.Sub: lambda a, b: a - b,
    ast.Mult: lambda a, b: a * b,
    ast.FloorDiv: lambda a, b: a // b,
    ast.Mod: lambda a, b: a % b,
    ast.Pow: lambda a, b: a ** b,
}
_CMP = {
    ast.Eq: lambda a, b: a == b,
    ast.NotEq: lambda a, b: a != b,
    ast.Lt: lambda a, b: a < b,
    ast.LtE: lambda a, b: a <= b,
    ast.Gt: lambda a, b: a > b,
    ast.GtE: lambda a, b: a >= b,
}
_FUNCS = {"abs": abs, "min": min, "max": max}


def _parse(text) -> ast.AST:
    if isinstance(text, (int, bool)):
        return ast.Constant(int(text))
    try:
        return ast.parse(str(text), mode="eval").body
    except SyntaxError as e:
        raise FixtureError(f"cannot parse expression {text!r}: {e.msg}") from None


def eval_int(text, env: dict) -> int:
    """Integer or boolean expression over bound names."""
    return _eval_int(_parse(text), env, text)


def _eval_int(node, env, src):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, bool)):
        return node.value
    if isinstance(node, ast.Name):
        if node.id not in env:
            raise FixtureError(f"unknown name {node.id!r} in {src!r}")
        return env[node.id]
    if isinstance(node, ast.UnaryOp):
        v = _eval_int(node.operand, env, src)
        if isinstance(node.op, ast.USub):
            return -v
        if isinstance(node.op, ast.UAdd):
            return v
        if isinstance(node.op, ast.Not):
            return not v
    if isinstance(node, ast.BinOp) and type(node.op) in _INT_BIN:
        a, b = _eval_int(node.left, env, src), _eval_int(node.right, env, src)
        if isinstance(node.op, ast.Pow) and b < 0:
            raise FixtureError(f"negative integer power in {src!r}")
        if isinstance(node.op, (ast.FloorDiv, ast.Mod)) and b == 0:
            raise FixtureError(f"division by zero in {src!r}")
        return _INT_BIN[type(node.op)](a, b)
    if isinstance(node, ast.BoolOp):
        vals = (_eval_int(v, env, src) for v in node.values)
        return all(vals) if isinstance(node.op, ast.And) else any(vals)
    if isinstance(node, ast.Compare):
        left = _eval_int(node.left, env, src)
        for op, right in zip(node.ops, node.comparators):
            if type(op) not in _CMP:
                break
            r = _eval_int(right, env, src)
            if not _CMP[type(op)](left, r):
                return False
            left = r
        else:
            return True
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS and not node.keywords:
        return _FUNCS[node.func.id](*(_eval_int(a, env, src) for a in node.args))
    raise FixtureError(f"unsupported construct in {src!r}")


def eval_scalar(text, env: dict, spec: RingSpec):
    """Ring-valued expression: integers, bound names, the ring variable, + - * / and powers."""
    R = ring(spec)
    if isinstance(text, int):
        return R.from_int(text)
    return _eval_ring(_parse(text), env, spec, R, text)


def _eval_ring(node, env, spec, R, src):
    if isinstance(node, ast.Constant) and isinstance(node.value, int):
        return R.from_int(node.value)
    if isinstance(node, ast.Name):
        if node.id in env:
            return R.from_int(env[node.id])
        if spec.kind == "QQt" and node.id == spec.variable:
            return R.parse(node.id)
        raise FixtureError(f"unknown name {node.id!r} in {src!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_ring(node.operand, env, spec, R, src)
        return R.neg(v) if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            e = _eval_int(node.right, env, src)
            base = _eval_ring(node.left, env, spec, R, src)
            if e < 0:
                if not R.is_unit(base):
                    raise FixtureError(f"negative power of a non-unit in {src!r}")
                base, e = R.inv(base), -e
            return R.pow(base, e)
        a = _eval_ring(node.left, env, spec, R, src)
        b = _eval_ring(node.right, env, spec, R, src)
        if isinstance(node.op, ast.Add):
            return R.add(a, b)
        if isinstance(node.op, ast.Sub):
            return R.sub(a, b)
        if isinstance(node.op, ast.Mult):
            return R.mul(a, b)
        if isinstance(node.op, ast.Div):
            if not R.is_unit(b):
                raise FixtureError(f"division by a non-unit in {src!r}")
            return R.mul(a, R.inv(b))
    raise FixtureError(f"unsupported construct in {src!r}")


_LABEL = re.compile(r"^\s*([A-Za-z_][\w']*)\s*(?:\((.*)\))?\s*$")


def _split_args(text: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch == "," and depth == 0:
            out.append(cur)
            cur = ""
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    if cur.strip():
        out.append(cur)
    return [a.strip() for a in out]


def parse_label(text: str) -> tuple[str, list[str]]:
    m = _LABEL.match(text)
    if not m:
        raise FixtureError(f"bad label {text!r}")
    return m.group(1), _split_args(m.group(2) or "")


# ---------------------------------------------------------------------------
# loading

@dataclass
class LoadedFixture:
    name: str
    spec: RingSpec
    flavor: str
    parameters: dict
    window: DegreeWindow
    algebras: dict = field(default_factory=dict)
    morphisms: dict = field(default_factory=dict)
    complexes: dict = field(default_factory=dict)
    tilde: dict = field(default_factory=dict)  # name -> (StrictAlgebraInput, Contraction)
    notes: str = ""
    expected: dict = field(default_factory=dict)  # variant -> {(kind, i, r): rule}
    minimal: str | None = None  # algebra used as a source by default
    descriptor: object = None


def _window(raw: dict, params: dict, overrides: dict | None) -> DegreeWindow:
    ranges = {k: (eval_int(v[0], params), eval_int(v[1], params)) for k, v in (raw.get("params") or {}).items()}
    ranges.update(overrides or {})
    p = raw.get("p", [0, 1])
    q = raw.get("q")
    return DegreeWindow((int(p[0]), int(p[1])), tuple(q) if q else None,
                        tuple((n, lo, hi) for n, (lo, hi) in sorted(ranges.items())))


def _module(raw: dict, spec, window: DegreeWindow, params: dict, name: str) -> BigradedModule:
    fams = []
    for f in raw.get("families", []):
        names = tuple(f.get("params", []))
        env = {k: v for k, v in params.items() if k not in names}

        def aff(expr, names=names, env=env):
            return _affine_with(expr, names, env)

        guards = tuple((names.index(g[0]), int(g[1]), int(g[2])) for g in f.get("guards", []))
        bounds = ()
        if "bounds" in f:
            bounds = tuple(tuple(f["bounds"].get(n, [None, None])) for n in names)
        fams.append(Family(f["symbol"], names, aff(f.get("p", 0)), aff(f.get("q", 0)), guards, bounds,
                           f.get("display")))
    for sym, (p, q) in (raw.get("generators") or {}).items():
        fams.append(Family(sym, (), (int(p),), (int(q),)))
    if not any(f.params for f in fams):
        ps = [f.p[0] for f in fams] or [0]
        window = DegreeWindow((min(ps), max(ps)))
    return BigradedModule(spec, tuple(fams), window, name)


def _affine_with(expr, names, env):
    zero = {**env, **{n: 0 for n in names}}
    c0 = eval_int(expr, zero)
    coeffs = [c0]
    for n in names:
        coeffs.append(eval_int(expr, {**zero, n: 1}) - c0)
    probe = {**env, **{n: 3 + 2 * k for k, n in enumerate(names)}}
    if eval_int(expr, probe) != c0 + sum(c * probe[n] for c, n in zip(coeffs[1:], names)):
        raise FixtureError(f"bidegree {expr!r} is not affine in {names}")
    return tuple(coeffs)


def _check_symbols(name: str, labels: list, module: BigradedModule | None, role: str):
    if module is None:
        return
    for sym, args in labels:
        try:
            fam = module.family(sym)
        except KeyError:
            raise FixtureError(f"{name}: {role} symbol {sym!r} is not a basis family of {module.name}") from None
        if len(args) != len(fam.params):
            raise FixtureError(f"{name}: {sym!r} takes {len(fam.params)} parameter(s), got {len(args)}")


def rule_op(name: str, arity: int, shift, spec: RingSpec, rules: list, params: dict,
            codomain: BigradedModule | None = None, domain: BigradedModule | None = None) -> MultiOp:
    """Operation from ordered rules; every matching rule contributes (sums)."""
    R = ring(spec)
    compiled = []
    for rule in rules:
        pats = [parse_label(s) for s in rule["match"]]
        if len(pats) != arity:
            raise FixtureError(f"{name}: rule {rule['match']} has the wrong arity")
        image = rule.get("image", {})
        outs = [(parse_label(k), v) for k, v in image.items()]
        _check_symbols(name, pats, domain, "input")
        _check_symbols(name, [o for o, _ in outs], codomain, "output")
        compiled.append((pats, rule.get("when"), outs))

    def apply(labs):
        acc: dict = {}
        for pats, when, outs in compiled:
            env = dict(params)
            ok = True
            for (sym, args), (lsym, lpar) in zip(pats, labs):
                if sym != lsym or len(args) != len(lpar):
                    ok = False
                    break
                for a, v in zip(args, lpar):
                    if a.isidentifier() and a not in params:
                        if a in env and env[a] != v:
                            ok = False
                            break
                        env[a] = v
                    elif eval_int(a, env) != v:
                        ok = False
                        break
                if not ok:
                    break
            if not ok or (when is not None and not eval_int(when, env)):
                continue
            for (osym, oargs), coef in outs:
                lab = (osym, tuple(eval_int(a, env) for a in oargs))
                c = eval_scalar(coef, env, spec)
                v = R.add(acc.get(lab, R.zero), c)
                if R.is_zero(v):
                    acc.pop(lab, None)
                else:
                    acc[lab] = v
        return acc

    return MultiOp(name, arity, shift, apply if compiled else None, spec, codomain)


def _op_shift(kind: str, i: int, r: int) -> tuple[int, int]:
    if kind == "morphism":
        return (-i, r - 1 + i)
    if r == 1:
        return (-i, i - 1)
    return (-i, r - 2 + i)


def _algebra(raw: dict, name: str, spec, flavor, window, params) -> DerivedHomotopyAlgebra:
    if "p" in raw:
        window = replace(window, p_range=(int(raw["p"][0]), int(raw["p"][1])))
    module = _module(raw, spec, window, params, name)
    d, ops = {}, {}
    for o in raw.get("operations", []):
        i, r = int(o["i"]), int(o["r"])
        label = o.get("name") or (f"d_{i}" if r == 1 else f"m_{i},{r}")
        op = rule_op(label, r, _op_shift("algebra", i, r), spec, o.get("rules", []), params, module, module)
        if r == 1:
            d[i] = op
        else:
            ops[(i, r)] = op
    return DerivedHomotopyAlgebra(raw.get("flavor", flavor), module, d, ops, raw.get("title", name))


def _lookup(table: dict, key: str, what: str):
    if key not in table:
        raise FixtureError(f"unknown {what} {key!r}; known: {sorted(table)}")
    return table[key]


def load_fixture(source: str | Path | dict, parameters: dict | None = None,
                 windows: dict | None = None) -> LoadedFixture:
    """Load a fixture file (path or parsed JSON) with parameter and window overrides."""
    if isinstance(source, dict):
        raw = source
    else:
        try:
            raw = json.loads(Path(source).read_text())
        except json.JSONDecodeError as e:
            raise FixtureError(f"{source}: invalid JSON ({e.msg} at line {e.lineno})") from None
    if raw.get("schema") != SCHEMA:
        raise FixtureError(f"unsupported fixture schema {raw.get('schema')!r}; expected {SCHEMA!r}")
    params = {k: int(v) for k, v in (raw.get("parameters") or {}).items()}
    for k, v in (parameters or {}).items():
        if k not in params:
            raise FixtureError(f"fixture has no parameter {k!r}; known: {sorted(params)}")
        params[k] = int(v)
    try:
        ring_text = str(raw.get("ring", "ZZ")).format(**params)
    except (KeyError, IndexError, ValueError) as e:
        raise FixtureError(f"bad ring placeholder in {raw.get('ring')!r}: {e}") from None
    try:
        spec = parse_ring(ring_text)
    except RingError as e:
        raise FixtureError(f"ring {ring_text!r}: {e}") from None
    flavor = raw.get("flavor", "Assoc")
    if flavor not in FLAVORS:
        raise FixtureError(f"unknown flavor {flavor!r}")
    window = _window(raw.get("window") or {}, params, windows)
    out = LoadedFixture(raw.get("name", "fixture"), spec, flavor, params, window, notes=raw.get("notes", ""))
    for name, a in (raw.get("algebras") or {}).items():
        out.algebras[name] = _algebra(a, name, spec, flavor, window, params)
    for m in raw.get("morphisms") or []:
        src, tgt = _lookup(out.algebras, m["source"], "algebra"), _lookup(out.algebras, m["target"], "algebra")
        comps = {}
        for c in m.get("components", []):
            i, r = int(c["i"]), int(c["r"])
            comps[(i, r)] = rule_op(f"{m['name']}_{i},{r}", r, _op_shift("morphism", i, r), spec,
                                    c.get("rules", []), params, tgt.carrier, src.carrier)
        out.morphisms[m["name"]] = DerivedInftyMorphism(src, tgt, comps, m["name"])
    for name, c in (raw.get("complexes") or {}).items():
        diff = {s: {t: eval_scalar(v, params, spec) for t, v in img.items()} for s, img in c["differential"].items()}
        out.complexes[name] = one_column_complex(spec, {k: int(v) for k, v in c["generators"].items()}, diff, name)
    for name, t in (raw.get("tilde") or {}).items():
        A = _lookup(out.algebras, t["algebra"], "algebra")
        d_v, d_h = A.d.get(0), A.d.get(1)
        if d_v is None or d_h is None:
            raise FixtureError(f"tilde {name}: algebra needs d_0 (vertical) and d_1 (horizontal)")
        B = Bicomplex(A.carrier, d_h, d_v, name)
        target = _lookup(out.algebras, t["target"], "algebra") if t.get("target") else None
        comparison = None
        if target is not None and t.get("comparison"):
            comparison = rule_op("phi", 1, (0, 0), spec, t["comparison"], params, target.carrier, A.carrier)
        if (0, 2) not in A.ops:
            raise FixtureError(f"tilde {name}: algebra needs m_0,2")
        inp = StrictAlgebraInput(A.flavor, B, A.ops[(0, 2)], target, comparison, name)
        out.tilde[name] = (inp, build_contraction(B))
    for variant, entries in (raw.get("expected") or {}).items():
        table = {}
        for e in entries:
            kind, i, r = e["kind"], int(e["i"]), int(e["r"])
            op = rule_op(f"{kind}_{i},{r}", r, _op_shift("morphism" if kind == "f" else "algebra", i, r), spec,
                         e.get("rules", []), params)
            table[(kind, i, r)] = op.on_basis
        out.expected[variant] = table
    out.minimal = raw.get("minimal")
    return out

