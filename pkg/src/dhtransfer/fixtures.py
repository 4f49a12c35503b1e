"""Built-in fixtures: the Dugger-Shipley algebra, the commutative and Lie examples."""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import ASSOC, COMM, LIE, DerivedHomotopyAlgebra, DerivedInftyMorphism
from .complexes import Bicomplex
from .graded import BigradedModule, DegreeWindow, Family, MultiOp, explicit
from .rings import Integers, PrimeField, RingSpec, ring
from .transfer import Contraction, StrictAlgebraInput


def _s(e: int) -> int:
    return -1 if e & 1 else 1


# ---------------------------------------------------------------------------
# Dugger-Shipley: A = Z<e, x^{+-1}>/(e^2, ex + xe - x^2), d(e) = p.
# Auxiliary algebra: basis a^eps b^k c^delta x^n.

DS_TILDE_SYMBOLS = {(0, 0): "bx", (0, 1): "bcx", (1, 0): "abx", (1, 1): "abcx"}
DS_TILDE_PARSE = {v: k for k, v in DS_TILDE_SYMBOLS.items()}


def ds_window(n_lo=-4, n_hi=4, k_hi=4) -> DegreeWindow:
    return DegreeWindow((0, 1), None, (("k", 0, k_hi), ("n", n_lo, n_hi)))


def ds_minimal_module(spec: RingSpec, window: DegreeWindow | None = None) -> BigradedModule:
    fams = (
        Family("x", ("n",), (0,), (0, 1), display="x^{n}"),
        Family("cx", ("n",), (1,), (0, 1), display="c*x^{n}"),
    )
    return BigradedModule(spec, fams, window or ds_window(), "M(A)")


def ds_tilde_module(spec: RingSpec, window: DegreeWindow | None = None) -> BigradedModule:
    kb = ((0, None), (None, None))
    fams = (
        Family("bx", ("k", "n"), (0,), (0, 0, 1), bounds=kb, display="b^{k}*x^{n}"),
        Family("bcx", ("k", "n"), (1,), (0, 0, 1), bounds=kb, display="b^{k}*c*x^{n}"),
        Family("abx", ("k", "n"), (0,), (1, 0, 1), bounds=kb, display="a*b^{k}*x^{n}"),
        Family("abcx", ("k", "n"), (1,), (1, 0, 1), bounds=kb, display="a*b^{k}*c*x^{n}"),
    )
    return BigradedModule(spec, fams, window or ds_window(), "A~")


def ds_target_module(spec: RingSpec, window: DegreeWindow | None = None) -> BigradedModule:
    fams = (
        Family("x", ("n",), (0,), (0, 1), display="x^{n}"),
        Family("ex", ("n",), (0,), (1, 1), display="e*x^{n}"),
    )
    w = window or ds_window()
    return BigradedModule(spec, fams, DegreeWindow((0, 0), None, w.params), "A")


def _ds_tilde_mul(u, v):
    """Product of normal monomials (eps, k, delta, n); returns [(coef, monomial)]."""
    e1, k1, d1, n1 = u
    e2, k2, d2, n2 = v
    k = k1 + k2
    if d1 and d2:
        return []
    d = d1 + d2
    out = []
    if e2:
        # x^n1 a = (-1)^n1 a x^n1 + [n1 odd] x^(n1+1)
        if not e1:
            out.append((_s(n1 + d1 + n1 * d2), (1, k, d, n1 + n2)))
        if n1 & 1:
            out.append((_s((n1 + 1) * d2), (e1, k, d, n1 + n2 + 1)))
    else:
        out.append((_s(n1 * d2), (e1, k, d, n1 + n2)))
    return out


def _tilde_label(mono):
    e, k, d, n = mono
    return (DS_TILDE_SYMBOLS[(e, d)], (k, n))


def _tilde_mono(lab):
    e, d = DS_TILDE_PARSE[lab[0]]
    k, n = lab[1]
    return (e, k, d, n)


def _minimal_label(mono):
    e, k, d, n = mono
    assert e == 0 and k == 0
    return ("cx" if d else "x", (n,))


def _minimal_mono(lab):
    return (0, 0, 1 if lab[0] == "cx" else 0, lab[1][0])


@dataclass
class DuggerShipley:
    p: int
    spec: RingSpec
    minimal: DerivedHomotopyAlgebra
    morphism: DerivedInftyMorphism  # verified f: M(A) ~> A
    literal_morphism: DerivedInftyMorphism  # f_{0,1} = inclusion, f_{1,1}(c x^n) = e x^n
    target: DerivedHomotopyAlgebra  # A as a one-column dga
    tilde: StrictAlgebraInput
    contraction: Contraction


def ds_m12_rule(R, table: str = "right", sign: int = 1):
    """m_{1,2} on M(A).

    "right": c in the second slot, m(x^i, c x^j) = x^(i+j+1) for i odd.
    "left": c in the first slot, m(c x^i, x^j) = x^(i+j+1) for i odd.
    In both, m(c x^i, c x^j) = c x^(i+j+1) for i odd.
    """
    s = R.from_int(sign)

    def rule(labs):
        (s1, (i,)), (s2, (j,)) = labs
        if not i & 1:
            return {}
        if s1 == "cx" and s2 == "cx":
            return {("cx", (i + j + 1,)): s}
        if table == "right" and s1 == "x" and s2 == "cx":
            return {("x", (i + j + 1,)): s}
        if table == "left" and s1 == "cx" and s2 == "x":
            return {("x", (i + j + 1,)): s}
        return {}

    return rule


def dugger_shipley(p: int = 3, spec: RingSpec | None = None, window: DegreeWindow | None = None,
                   m12: str = "right", m12_sign: int = 1) -> DuggerShipley:
    """The DS fixture over `spec` (default the integers).

    The built-in morphism is f_{0,1}(x^n) = (-1)^n x^n, f_{1,1}(c x^n) =
    (-1)^(n+1) e x^n, which satisfies the morphism equations for the
    tabulated m_{1,2}; flipping m12_sign flips the sign of m_{1,2} and the
    morphism becomes f_{0,1} = inclusion, f_{1,1}(c x^n) = -e x^n.
    """
    spec = spec or Integers()
    R = ring(spec)
    P = R.from_int(p)
    negP = R.neg(P)
    w = window or ds_window()
    M = ds_minimal_module(spec, w)
    T = ds_tilde_module(spec, w)
    A = ds_target_module(spec, w)

    def mul_rule(to_mono, to_label):
        def rule(labs):
            out = {}
            for c, mono in _ds_tilde_mul(to_mono(labs[0]), to_mono(labs[1])):
                lab = to_label(mono)
                v = R.add(out.get(lab, R.zero), R.from_int(c))
                if R.is_zero(v):
                    out.pop(lab, None)
                else:
                    out[lab] = v
            return out
        return rule

    # minimal model
    m02 = MultiOp("m_0,2", 2, (0, 0), mul_rule(_minimal_mono, _minimal_label), spec)
    m12 = MultiOp("m_1,2", 2, (-1, 1), ds_m12_rule(R, m12, m12_sign), spec)
    d1 = MultiOp("d_1", 1, (-1, 0), lambda labs: {("x", labs[0][1]): negP} if labs[0][0] == "cx" else {}, spec)
    minimal = DerivedHomotopyAlgebra(ASSOC, M, {1: d1}, {(0, 2): m02, (1, 2): m12}, f"DS M(A) p={p}")

    # target A, basis e^eps x^n (a single column)
    def a_mono(lab):
        return (1 if lab[0] == "ex" else 0, 0, 0, lab[1][0])

    def a_label(mono):
        e, k, d, n = mono
        return ("ex" if e else "x", (n,))

    a_mul = MultiOp("mu_A", 2, (0, 0), mul_rule(a_mono, a_label), spec)
    a_d = MultiOp("d_A", 1, (0, -1), lambda labs: {("x", labs[0][1]): P} if labs[0][0] == "ex" and not R.is_zero(P) else {}, spec)
    target = DerivedHomotopyAlgebra(ASSOC, A, {0: a_d}, {(0, 2): a_mul}, f"DS A p={p}")

    def f01_rule(tw):
        def rule(labs):
            sym, (n,) = labs[0]
            return {labs[0]: R.from_int(tw(n))} if sym == "x" else {}
        return rule

    def f11_rule(tw):
        def rule(labs):
            sym, (n,) = labs[0]
            return {("ex", (n,)): R.from_int(tw(n))} if sym == "cx" else {}
        return rule

    if m12_sign == 1:
        tw0, tw1 = (lambda n: _s(n)), (lambda n: -_s(n))
    else:
        tw0, tw1 = (lambda n: 1), (lambda n: -1)
    morphism = DerivedInftyMorphism(minimal, target, {
        (0, 1): MultiOp("f_0,1", 1, (0, 0), f01_rule(tw0), spec),
        (1, 1): MultiOp("f_1,1", 1, (-1, 1), f11_rule(tw1), spec),
    }, "f")
    literal = DerivedInftyMorphism(minimal, target, {
        (0, 1): MultiOp("f_0,1", 1, (0, 0), f01_rule(lambda n: 1), spec),
        (1, 1): MultiOp("f_1,1", 1, (-1, 1), f11_rule(lambda n: 1), spec),
    }, "f_literal")

    # auxiliary algebra
    t_mul = MultiOp("mu", 2, (0, 0), mul_rule(_tilde_mono, _tilde_label), spec)

    def dv_rule(labs):
        e, k, d, n = _tilde_mono(labs[0])
        return {_tilde_label((0, k + 1, d, n)): R.one} if e else {}

    def dh_rule(labs):
        e, k, d, n = _tilde_mono(labs[0])
        if not d:
            return {}
        sg = R.from_int(_s(e))
        out = {_tilde_label((e, k + 1, 0, n)): sg}
        if not R.is_zero(P):
            out[_tilde_label((e, k, 0, n))] = R.mul(sg, negP)
        return out

    d_v = MultiOp("d_v", 1, (0, -1), dv_rule, spec, codomain=T)
    d_h = MultiOp("d_h", 1, (-1, 0), dh_rule, spec, codomain=T)
    B = Bicomplex(T, d_h, d_v, "A~")

    def phi_rule(labs):
        e, k, d, n = _tilde_mono(labs[0])
        if d:
            return {}
        c = R.pow(P, k)
        return {} if R.is_zero(c) else {("ex" if e else "x", (n,)): c}

    phi = MultiOp("phi", 1, (0, 0), phi_rule, spec)
    tilde = StrictAlgebraInput(ASSOC, B, t_mul, target, phi, f"DS A~ p={p}")

    iota = MultiOp("iota", 1, (0, 0), lambda labs: {_tilde_label(_minimal_mono(labs[0])): R.one}, spec)

    def g_rule(labs):
        e, k, d, n = _tilde_mono(labs[0])
        return {_minimal_label((0, 0, d, n)): R.one} if e == 0 and k == 0 else {}

    def h_rule(labs):
        e, k, d, n = _tilde_mono(labs[0])
        if e or k == 0:
            return {}
        return {_tilde_label((1, k - 1, d, n)): R.from_int(-1)}

    g = MultiOp("g", 1, (0, 0), g_rule, spec)
    h = MultiOp("h", 1, (0, 1), h_rule, spec)
    contraction = Contraction(B, M, iota, g, h)
    return DuggerShipley(p, spec, minimal, morphism, literal, target, tilde, contraction)


# ---------------------------------------------------------------------------
# Finite-basis helpers

def finite_module(spec: RingSpec, gens: dict, name: str) -> BigradedModule:
    """Module with explicit generators {symbol: (p, q)}."""
    fams = tuple(explicit(s, p, q, s) for s, (p, q) in gens.items())
    ps = [p for p, _ in gens.values()] or [0]
    return BigradedModule(spec, fams, DegreeWindow((min(ps), max(ps))), name)


def _lab(s: str):
    return (s, ())


def finite_op(name: str, arity: int, shift, spec: RingSpec, table: dict, codomain=None) -> MultiOp:
    """Operation from {(sym, ...): {sym: coefficient}} with coefficients coerced into the ring."""
    R = ring(spec)
    full = {}
    for ins, outs in table.items():
        if isinstance(ins, str):
            ins = (ins,)
        v = {}
        for o, c in outs.items():
            c = R.coerce(c) if not isinstance(c, str) else R.parse(c)
            if not R.is_zero(c):
                v[_lab(o)] = c
        if v:
            full[tuple(_lab(s) for s in ins)] = v
    from .graded import table_op
    return table_op(name, arity, shift, spec, full, codomain)


def graded_commutative_table(degrees: dict, products: dict) -> dict:
    """Complete {(a, b): {ab: c}} by graded commutativity b a = (-1)^{|a||b|} a b."""
    out = dict(products)
    for (a, b), v in products.items():
        s = _s(degrees[a] * degrees[b])
        out.setdefault((b, a), {k: s * c for k, c in v.items()})
    return out


def graded_skew_table(degrees: dict, products: dict) -> dict:
    """Complete {(a, b): ...} by [b, a] = -(-1)^{|a||b|} [a, b]."""
    out = dict(products)
    for (a, b), v in products.items():
        s = -_s(degrees[a] * degrees[b])
        out.setdefault((b, a), {k: s * c for k, c in v.items()})
    return out


# ---------------------------------------------------------------------------
# Commutative and Lie examples over Q[t]

@dataclass
class QtExample:
    flavor: str
    spec: RingSpec
    minimal: DerivedHomotopyAlgebra
    morphism: DerivedInftyMorphism
    target: DerivedHomotopyAlgebra
    tilde: StrictAlgebraInput
    contraction: Contraction


M_GENS = {"x": (0, 2), "y": (0, 2), "z": (0, 5), "c_x": (1, 2), "c_y": (1, 2), "c_z": (1, 5)}
A_GENS = {"x": (0, 2), "y": (0, 2), "x_t": (0, 3), "y_t": (0, 3), "xy_t": (0, 5), "x_ty_t": (0, 6)}
T_GENS = {"u_x": (0, 2), "b_x": (0, 2), "u_y": (0, 2), "b_y": (0, 2), "a_x": (0, 3), "a_y": (0, 3),
          "c_x": (1, 2), "c_y": (1, 2), "u_xa_y": (0, 5), "b_xa_y": (0, 5), "c_xa_y": (1, 5), "a_xa_y": (0, 6)}


def _deg(gens):
    return {s: p + q for s, (p, q) in gens.items()}


def qt_example(flavor: str = COMM) -> QtExample:
    """The commutative (or Lie) example: minimal model, target, auxiliary algebra, contraction."""
    from .rings import RationalPolynomials
    spec = RationalPolynomials("t")
    R = ring(spec)
    t = R.parse("t")
    mt = R.neg(t)
    skew = flavor == LIE
    complete = graded_skew_table if skew else graded_commutative_table
    # minimal model: d_1(c_*) = -t *, m_{1,2} (or l_{1,2}) from two entries
    M = finite_module(spec, M_GENS, "M(A)")
    dM = {1: finite_op("d_1", 1, (-1, 0), spec, {"c_x": {"x": mt}, "c_y": {"y": mt}, "c_z": {"z": mt}})}
    m12 = complete(_deg(M_GENS), {("x", "c_y"): {"z": 1}, ("c_x", "c_y"): {"c_z": 1}})
    ops = {(1, 2): finite_op("m_1,2", 2, (-1, 1), spec, m12)}
    minimal = DerivedHomotopyAlgebra(flavor, M, dM, ops, f"{flavor} example M(A)")
    # target A
    A = finite_module(spec, A_GENS, "A")
    muA = complete(_deg(A_GENS), {("x", "y_t"): {"xy_t": 1}, ("x_t", "y_t"): {"x_ty_t": 1}})
    dA = finite_op("d", 1, (0, -1), spec, {"x_t": {"x": t}, "y_t": {"y": t}, "x_ty_t": {"xy_t": t}})
    target = DerivedHomotopyAlgebra(flavor, A, {0: dA}, {(0, 2): finite_op("mu_A", 2, (0, 0), spec, muA)},
                                    f"{flavor} example A")
    # auxiliary algebra: three shifted copies of the CE resolution of (t)
    T = finite_module(spec, T_GENS, "A~")
    muT = complete(_deg(T_GENS), {("u_x", "a_y"): {"u_xa_y": 1}, ("b_x", "a_y"): {"b_xa_y": 1},
                                  ("c_x", "a_y"): {"c_xa_y": 1}, ("a_x", "a_y"): {"a_xa_y": 1}})
    d_v = finite_op("d_v", 1, (0, -1), spec, {"a_x": {"b_x": 1}, "a_y": {"b_y": 1}, "a_xa_y": {"b_xa_y": 1}}, T)
    d_h = finite_op("d_h", 1, (-1, 0), spec, {"c_x": {"b_x": 1, "u_x": mt}, "c_y": {"b_y": 1, "u_y": mt},
                                               "c_xa_y": {"b_xa_y": 1, "u_xa_y": mt}}, T)
    B = Bicomplex(T, d_h, d_v, "A~")
    phi = finite_op("phi", 1, (0, 0), spec, {"u_x": {"x": 1}, "b_x": {"x": t}, "a_x": {"x_t": 1},
                                             "u_y": {"y": 1}, "b_y": {"y": t}, "a_y": {"y_t": 1},
                                             "u_xa_y": {"xy_t": 1}, "b_xa_y": {"xy_t": t}, "a_xa_y": {"x_ty_t": 1}})
    tilde = StrictAlgebraInput(flavor, B, finite_op("mu", 2, (0, 0), spec, muT, T), target, phi,
                               f"{flavor} example A~")
    iota_t = {"x": {"u_x": 1}, "y": {"u_y": 1}, "z": {"u_xa_y": 1}, "c_x": {"c_x": 1}, "c_y": {"c_y": 1},
              "c_z": {"c_xa_y": 1}}
    g_t = {v_: {k: 1} for k, d in iota_t.items() for v_ in d}
    # sign: iota g - id = d_v h + h d_v
    h_t = {"b_x": {"a_x": -1}, "b_y": {"a_y": -1}, "b_xa_y": {"a_xa_y": -1}}
    contraction = Contraction(B, M, finite_op("iota", 1, (0, 0), spec, iota_t),
                              finite_op("g", 1, (0, 0), spec, g_t), finite_op("h", 1, (0, 1), spec, h_t))
    # morphism f: M ~> A
    f01 = finite_op("f_0,1", 1, (0, 0), spec, {"x": {"x": 1}, "y": {"y": 1}, "z": {"xy_t": -1}})
    f11 = finite_op("f_1,1", 1, (-1, 1), spec, {"c_x": {"x_t": -1}, "c_y": {"y_t": -1}, "c_z": {"x_ty_t": 1}})
    morphism = DerivedInftyMorphism(minimal, target, {(0, 1): f01, (1, 1): f11}, "f")
    return QtExample(flavor, spec, minimal, morphism, target, tilde, contraction)


def ds_homology_target(p: int, n_lo: int = -16, n_hi: int = 16) -> DerivedHomotopyAlgebra:
    """H(A) = F_p[x^{+-1}] as a minimal algebra with only m_{0,2}."""
    spec = PrimeField(p)
    R = ring(spec)
    H = BigradedModule(spec, (Family("x", ("n",), (0,), (0, 1), display="x^{n}"),),
                       DegreeWindow((0, 0), None, (("n", n_lo, n_hi),)), "H(A)")
    mu = MultiOp("m_0,2", 2, (0, 0), lambda labs: {("x", (labs[0][1][0] + labs[1][1][0],)): R.one}, spec)
    return DerivedHomotopyAlgebra(ASSOC, H, {}, {(0, 2): mu}, f"H(DS A) over F_{p}")
