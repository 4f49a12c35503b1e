"""Fixture registry: compiled-in fixtures and fixture files behind one interface."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .algebra import ASSOC, COMM, LIE, DerivedHomotopyAlgebra, verify_algebra, verify_morphism
from .complexes import check_bicomplex, check_contraction, one_column_complex
from .fixture_files import FixtureError, LoadedFixture, load_fixture
from .fixtures import ds_homology_target, ds_window, dugger_shipley, qt_example
from .graded import BigradedModule, DegreeWindow
from .rings import Integers, PrimeField, RingSpec, isprime, parse_ring, ring

REGISTRATION_BOUNDS = (3, 2)  # (r_max, i_max) checked whenever a built-in is loaded


@dataclass
class FixtureDescriptor:
    name: str
    ring: str
    carriers: tuple
    tables: tuple
    provenance: str
    parameters: dict = field(default_factory=dict)
    laurent: bool = False
    loader: Callable[..., LoadedFixture] | None = None
    verifiers: tuple = ("algebras", "morphisms")  # checked at registration

    def to_json(self):
        return {"name": self.name, "ring": self.ring, "carriers": list(self.carriers), "tables": list(self.tables),
                "provenance": self.provenance, "parameters": dict(self.parameters), "laurent": self.laurent}


# ---------------------------------------------------------------------------
# expected transfer tables

def _ds_expected(p: int, spec: RingSpec, variant: str) -> dict:
    """Expected transfer output for DS.

    "literal": d_1(c x^n) = -p x^n, m_{1,2}(c x^a, x^b) = x^{a+b+1} and
    m_{1,2}(c x^a, c x^b) = c x^{a+b+1} for a odd, f_{0,1} = inclusion,
    f_{1,1}(c x^n) = e x^n.
    "consistent": the right-slot table with the signs forced by the
    equations, i.e. the literal right-slot data after c -> -c.
    """
    R = ring(spec)
    one, neg = R.one, R.from_int(-1)
    s = one if variant == "literal" else neg
    slot = "left" if variant == "literal" else "right"

    def d1(labs):
        sym, n = labs[0]
        c = R.from_int(-p)
        return {("x", n): c} if sym == "cx" and not R.is_zero(c) else {}

    def m12(labs):
        (s1, (a,)), (s2, (b,)) = labs
        if not a & 1:
            return {}
        if s1 == s2 == "cx":
            return {("cx", (a + b + 1,)): s}
        if slot == "left" and (s1, s2) == ("cx", "x"):
            return {("x", (a + b + 1,)): s}
        if slot == "right" and (s1, s2) == ("x", "cx"):
            return {("x", (a + b + 1,)): s}
        return {}

    def f01(labs):
        sym, n = labs[0]
        return {("x", n): one} if sym == "x" else {}

    def f11(labs):
        sym, n = labs[0]
        return {("ex", n): s} if sym == "cx" else {}

    return {("d", 1, 1): d1, ("m", 1, 2): m12, ("f", 0, 1): f01, ("f", 1, 1): f11}


def _qt_expected(flavor: str) -> dict:
    """Expected transfer output for the Q[t] examples (signs forced by the equations)."""
    from .fixtures import M_GENS, _deg, graded_commutative_table, graded_skew_table
    ex = qt_example(flavor)
    R = ex.minimal.R
    t = R.parse("t")
    complete = graded_skew_table if flavor == LIE else graded_commutative_table
    tab = complete(_deg(M_GENS), {("x", "c_y"): {"z": -1}, ("c_x", "c_y"): {"c_z": -1}})

    def lab(s):
        return (s, ())

    def d1(labs):
        sym = labs[0][0]
        return {lab(sym[2:]): R.neg(t)} if sym.startswith("c_") else {}

    def m12(labs):
        return {lab(k): R.from_int(c) for k, c in tab.get(tuple(l[0] for l in labs), {}).items()}

    f01_t = {"x": {"x": 1}, "y": {"y": 1}, "z": {"xy_t": 1}}
    f11_t = {"c_x": {"x_t": -1}, "c_y": {"y_t": -1}, "c_z": {"x_ty_t": -1}}

    def table(tb):
        def rule(labs):
            return {lab(k): R.from_int(c) for k, c in tb.get(labs[0][0], {}).items()}
        return rule

    return {("d", 1, 1): d1, ("m", 1, 2): m12, ("f", 0, 1): table(f01_t), ("f", 1, 1): table(f11_t)}


# ---------------------------------------------------------------------------
# built-in loaders

def _laurent_window(windows: dict | None, default=(-4, 4)) -> tuple[int, int]:
    return tuple((windows or {}).get("n", default))


def _load_ds(params: dict, windows: dict | None, spec: RingSpec | None, literal: bool = False) -> LoadedFixture:
    p = int(params.get("p", 3))
    if p < 0:
        raise FixtureError("p must be nonnegative")
    spec = spec or Integers()
    lo, hi = _laurent_window(windows)
    k_hi = (windows or {}).get("k", (0, 4))[1]
    w = ds_window(lo, hi, k_hi)
    ds = dugger_shipley(p, spec=spec, window=w)
    out = LoadedFixture("dugger-shipley-literal" if literal else "dugger-shipley", spec, ASSOC, {"p": p}, w)
    out.algebras = {"M": ds.minimal, "A": ds.target}
    out.morphisms = {"f": ds.literal_morphism if literal else ds.morphism}
    out.tilde = {"A~": (ds.tilde, ds.contraction)}
    out.expected = {v: _ds_expected(p, spec, v) for v in ("literal", "consistent")}
    out.minimal = "M"
    return out


def _load_qt(flavor: str) -> Callable:
    def load(params, windows, spec):
        if spec is not None and spec != qt_example(flavor).spec:
            raise FixtureError("the Q[t] examples only exist over QQ[t]")
        ex = qt_example(flavor)
        name = "commutative" if flavor == COMM else "lie"
        out = LoadedFixture(name, ex.spec, flavor, {}, ex.minimal.carrier.window)
        out.algebras = {"M": ex.minimal, "A": ex.target, "A~": ex.tilde.as_algebra()}
        out.morphisms = {"f": ex.morphism}
        out.tilde = {"A~": (ex.tilde, ex.contraction)}
        out.expected = {"consistent": _qt_expected(flavor)}
        out.minimal = "M"
        return out
    return load


def _load_zero(params, windows, spec):
    spec = spec or Integers()
    mod = BigradedModule(spec, (), DegreeWindow((0, 0)), "0")
    out = LoadedFixture("zero", spec, ASSOC, {}, mod.window)
    out.algebras = {"0": DerivedHomotopyAlgebra(ASSOC, mod, {}, {}, "zero algebra")}
    out.minimal = "0"
    return out


def _load_h(params, windows, spec):
    p = int(params.get("p", 3))
    if not isprime(p):
        raise FixtureError(f"H(A) is taken over F_p and needs p prime, got p = {p}")
    H = ds_homology_target(p)
    out = LoadedFixture("H(A)", PrimeField(p), ASSOC, {"p": p}, H.carrier.window)
    out.algebras = {"H": H}
    out.minimal = "H"
    return out


def _load_zpz(params, windows, spec):
    p = int(params.get("p", 3))
    spec = spec or Integers()
    C = one_column_complex(spec, {"a": 1, "b": 0}, {"a": {"b": p}}, f"Z --{p}--> Z")
    out = LoadedFixture("z-p-z", spec, ASSOC, {"p": p}, C.carrier.window)
    out.complexes = {"C": C}
    return out


BUILTINS: dict[str, FixtureDescriptor] = {}


def register(desc: FixtureDescriptor):
    BUILTINS[desc.name] = desc
    return desc


register(FixtureDescriptor(
    "dugger-shipley", "ZZ (any ring via --ring)", ("M(A)", "A", "A~"),
    ("d_1", "m_0,2", "m_1,2", "f_0,1", "f_1,1", "d_v", "d_h", "mu", "iota", "g", "h"),
    "Dugger-Shipley algebra Z<e, x^{+-1}>/(e^2, ex + xe - x^2), d(e) = p: minimal model, strict target, "
    "auxiliary bicomplex algebra and contraction; the morphism is the sign-consistent one",
    {"p": 3}, True, lambda pr, w, s: _load_ds(pr, w, s), ("algebras", "morphisms", "tilde")))
register(FixtureDescriptor(
    "dugger-shipley-literal", "ZZ", ("M(A)", "A"), ("f_0,1", "f_1,1"),
    "the sign-naive DS morphism f_{0,1} = inclusion, f_{1,1}(c x^n) = e x^n; "
    "its (1,1) morphism equation fails", {"p": 3}, True, lambda pr, w, s: _load_ds(pr, w, s, literal=True),
    ("algebras",)))
register(FixtureDescriptor(
    "commutative", "QQ[t]", ("M(A)", "A", "A~"), ("d_1", "m_1,2", "f_0,1", "f_1,1", "d_v", "d_h", "mu"),
    "commutative minimal model over Q[t] with three Q[t]/(t) classes", {}, False, _load_qt(COMM),
    ("algebras", "morphisms", "tilde")))
register(FixtureDescriptor(
    "lie", "QQ[t]", ("M(A)", "A", "A~"), ("d_1", "l_1,2", "f_0,1", "f_1,1", "d_v", "d_h", "bracket"),
    "Lie version of the commutative example (same minimal model)", {}, False, _load_qt(LIE),
    ("algebras", "morphisms", "tilde")))
register(FixtureDescriptor("zero", "ZZ", ("0",), (), "the zero algebra", {}, False, _load_zero))
register(FixtureDescriptor(
    "H(A)", "GF(p)", ("H(A)",), ("m_0,2",), "F_p[x^{+-1}] with its product and nothing else",
    {"p": 3}, True, _load_h))
register(FixtureDescriptor(
    "z-p-z", "ZZ", ("C",), ("d",), "the complex Z --p--> Z in degrees 1 and 0", {"p": 3}, False, _load_zpz,
    ()))


def registration_check(fx: LoadedFixture, verifiers: tuple, bounds=REGISTRATION_BOUNDS) -> list[str]:
    """Names of the declared checks that fail on a loaded fixture."""
    r_max, i_max = bounds
    bad = []
    if "algebras" in verifiers:
        for n, A in sorted(fx.algebras.items()):
            if not verify_algebra(A, r_max, i_max).ok:
                bad.append(f"algebra {n}")
    if "morphisms" in verifiers:
        for n, f in sorted(fx.morphisms.items()):
            if not verify_morphism(f, r_max, i_max).ok:
                bad.append(f"morphism {n}")
    if "tilde" in verifiers:
        for n, (inp, c) in sorted(fx.tilde.items()):
            if not check_bicomplex(inp.bicomplex).ok or not check_contraction(c).ok:
                bad.append(f"bicomplex/contraction {n}")
    return bad


_CACHE: dict = {}


def get_fixture(name: str, params: dict | None = None, windows: dict | None = None,
                ring_text: str | None = None) -> LoadedFixture:
    """Load a built-in by name or a fixture file by path."""
    params = dict(params or {})
    spec = parse_ring(ring_text) if ring_text else None
    if name in BUILTINS:
        desc = BUILTINS[name]
        unknown = set(params) - set(desc.parameters)
        if unknown:
            raise FixtureError(f"fixture {name!r} has no parameter(s) {sorted(unknown)}")
        key = (name, tuple(sorted(params.items())), tuple(sorted((windows or {}).items())), str(spec))
        hit = _CACHE.get(key)
        if hit is not None:
            return hit
        fx = desc.loader({**desc.parameters, **params}, windows, spec)
        bad = registration_check(fx, desc.verifiers)
        if bad:
            raise FixtureError(f"built-in fixture {name!r} failed its registration checks: {bad}")
        fx.descriptor = desc
        _CACHE[key] = fx
        return fx
    path = Path(name)
    if not path.exists():
        raise FixtureError(f"unknown fixture {name!r}; built-ins: {sorted(BUILTINS)}")
    if spec is not None:
        raise FixtureError("--ring applies to built-in fixtures only")
    fx = load_fixture(path, params, windows)
    fx.descriptor = None
    return fx
