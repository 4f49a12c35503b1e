"""Random generators and randomized property checks.

- random_two_column_algebra: strict bicomplex algebras over Q, built as
  A_0 [c]/(c^2) with d_h(c) a central cycle of A_0, then presented in a
  random basis of each cell.
- random_e2_iso: filtered maps X -> X + Z with Z E^2-acyclic, conjugated by
  a random filtration-preserving automorphism.
- snf_oracle: Smith normal forms checked against sympy determinants and gcds.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

import sympy

from .algebra import ASSOC, COMM, DerivedHomotopyAlgebra, underlying_filtered_map, verify_algebra, verify_morphism
from .complexes import Bicomplex, build_contraction, check_bicomplex, filtered_view
from .graded import BigradedModule, DegreeWindow, MultiOp, add_into, explicit, table_op
from .linalg import MatrixE, determinant, inverse, smith_normal_form
from .rings import Integers, RationalPolynomials, Rationals, ring
from .spectral import FilteredMap, comparison_check, is_er_equivalence
from .transfer import StrictAlgebraInput, transfer_minimal

MATS = ("e11", "e12", "e22")
_MATMUL = {("e11", "e11"): "e11", ("e11", "e12"): "e12", ("e12", "e22"): "e12", ("e22", "e22"): "e22"}


def _s(e: int) -> int:
    return -1 if e & 1 else 1


# ---------------------------------------------------------------------------
# random strict two-column algebras

@dataclass
class RandomAlgebra:
    flavor: str
    algebra: DerivedHomotopyAlgebra  # strict: d_0 = d_v, d_1 = d_h, m_{0,2}
    bicomplex: Bicomplex
    product: MultiOp
    description: dict


def _structured(rng: random.Random):
    """Monomials x^i y^e M c^s of A_0[c]/(c^2), A_0 = Q[x]/(x^N) (x) Lambda(y) (x) (T_2 or Q)."""
    N = rng.randint(2, 4)
    k = rng.randint(1, N - 1) if rng.random() < 0.7 else None  # d_v(y) = x^k
    ydeg = 2 * (k or rng.randint(1, 2)) + 1
    mats = MATS if rng.random() < 0.5 else (None,)
    j = rng.randint(0, N - 1)
    lam = rng.choice([1, -1, 2, -2, 3, Fraction(1, 2)]) if rng.random() < 0.8 else 0
    qc = 2 * j  # c has bidegree (1, 2j) and odd total degree
    mons = [(i, e, m, s) for i in range(N) for e in (0, 1) for m in mats for s in (0, 1)]

    def deg(mono):
        i, e, m, s = mono
        return 2 * i + e * ydeg + s * (1 + qc)

    def bideg(mono):
        return (mono[3], deg(mono) - mono[3])

    def mul(u, v):
        i, e, m, s = u
        j2, f, m2, t = v
        if s and t or e and f or i + j2 >= N:
            return None
        if m is None:
            mm = None
        else:
            mm = _MATMUL.get((m, m2))
            if mm is None:
                return None
        sign = _s(s * (1 + qc) * f * ydeg)
        return sign, (i + j2, e + f, mm, s + t)

    def dv(u):
        i, e, m, s = u
        if not e or k is None or i + k >= N:
            return []
        return [(1, (i + k, 0, m, s))]

    def dh(u):
        i, e, m, s = u
        if not s or lam == 0 or i + j >= N:
            return []
        sign = _s(2 * i + e * ydeg)
        # a c -> (-1)^{|a|} a z with z = lam x^j (x) identity
        return [(sign * lam, (i + j, e, m, 0))]

    desc = {"N": N, "k": k, "deg_y": ydeg, "matrices": mats != (None,), "z": f"{lam}*x^{j}"}
    return mons, deg, bideg, mul, dv, dh, desc


def random_two_column_algebra(rng: random.Random, flavor: str | None = None) -> RandomAlgebra:
    spec = Rationals()
    R = ring(spec)
    mons, deg, bideg, mul, dv, dh, desc = _structured(rng)
    if flavor is None:
        flavor = COMM if not desc["matrices"] and rng.random() < 0.5 else ASSOC
    if flavor == COMM and desc["matrices"]:
        raise ValueError("the matrix factor is not commutative")
    cells: dict = {}
    for m in mons:
        cells.setdefault(bideg(m), []).append(m)
    # random invertible change of basis per cell: new_k = sum_j P[j][k] old_j
    fams = []
    old_to_new: dict = {}  # old mono -> {new label: coef}
    new_to_old: dict = {}
    for (p, q), olds in sorted(cells.items()):
        n = len(olds)
        while True:
            P = [[Fraction(rng.randint(-2, 2)) for _ in range(n)] for _ in range(n)]
            Pm = MatrixE.from_rows(spec, P)
            if not R.is_zero(determinant(Pm)):
                break
        Pi = inverse(Pm)
        labs = [(f"v{p}_{q}_{k}", ()) for k in range(n)]
        for k, lab in enumerate(labs):
            fams.append(explicit(lab[0], p, q))
            new_to_old[lab] = {olds[j]: P[j][k] for j in range(n) if P[j][k]}
        for j, o in enumerate(olds):
            old_to_new[o] = {labs[k]: Pi.data[k][j] for k in range(n) if Pi.data[k][j]}
    mod = BigradedModule(spec, tuple(fams), DegreeWindow((0, 1)), "random")

    def lift(terms):
        acc: dict = {}
        for c, o in terms:
            add_into(R, acc, old_to_new[o], R.coerce(c))
        return acc

    def unary(fn):
        def rule(labs):
            acc: dict = {}
            for o, c in new_to_old[labs[0]].items():
                add_into(R, acc, lift(fn(o)), c)
            return acc
        return rule

    def binary(labs):
        acc: dict = {}
        for (o1, c1), (o2, c2) in product(new_to_old[labs[0]].items(), new_to_old[labs[1]].items()):
            res = mul(o1, o2)
            if res is not None:
                add_into(R, acc, lift([(res[0], res[1])]), R.mul(c1, c2))
        return acc

    d_v = MultiOp("d_v", 1, (0, -1), unary(dv), spec, mod)
    d_h = MultiOp("d_h", 1, (-1, 0), unary(dh), spec, mod)
    mu = MultiOp("mu", 2, (0, 0), binary, spec, mod)
    B = Bicomplex(mod, d_h, d_v, "random")
    A = DerivedHomotopyAlgebra(flavor, mod, {0: d_v, 1: d_h}, {(0, 2): mu}, "random")
    desc = {**desc, "flavor": flavor, "max_cell_rank": max(len(v) for v in cells.values())}
    return RandomAlgebra(flavor, A, B, mu, desc)


def transfer_oracle_case(rng: random.Random, r_max: int = 3, i_max: int = 2) -> dict:
    ra = random_two_column_algebra(rng)
    out = {"description": ra.description}
    strict = check_bicomplex(ra.bicomplex).ok and verify_algebra(ra.algebra, 3, 1).ok
    c = build_contraction(ra.bicomplex)
    res = transfer_minimal(StrictAlgebraInput(ra.flavor, ra.bicomplex, ra.product, name="random"), c, r_max, i_max)
    alg = verify_algebra(res.minimal, r_max, i_max)
    mor = verify_morphism(res.inclusion, r_max, i_max)
    e1 = is_er_equivalence(underlying_filtered_map(res.inclusion, i_max), 1)
    higher = sum(1 for (i, r), op in res.minimal.ops.items() if (i, r) != (0, 2)
                 for X in product(res.minimal.carrier.basis(), repeat=r) if op.on_basis(X))
    out.update({"strict_input": strict, "minimal_ok": alg.ok, "iota_ok": mor.ok, "e1_iso": e1.ok,
                "minimal_rank": len(res.minimal.carrier.basis()), "higher_entries": higher})
    out["ok"] = strict and alg.ok and mor.ok and e1.ok
    return out


def check_transfer_oracle(count: int | None = None, seed: int = 0) -> list[dict]:
    rng = random.Random(seed)
    return [transfer_oracle_case(rng) for _ in range(count or 50)]


# ---------------------------------------------------------------------------
# random filtered maps that are E^2-isomorphisms by construction

def _elementary(rng, spec, cols: int, prefix: str, allow_torsion: bool):
    """Generators and differential of a sum of elementary filtered pieces."""
    R = ring(spec)
    gens: dict = {}
    diff: dict = {}
    count = rng.randint(1, 4)
    for k in range(count):
        kind = rng.choice(["free", "vertical", "horizontal", "long"] if cols > 2 else ["free", "vertical", "horizontal"])
        p = rng.randint(0, cols - 1)
        q = rng.randint(-1, 2)
        a, b = f"{prefix}{k}a", f"{prefix}{k}b"
        e = rng.choice([1, -1] + ([2, 3] if allow_torsion else []))
        if kind == "free":
            gens[a] = (p, q)
        elif kind == "vertical":
            gens[a], gens[b] = (p, q + 1), (p, q)
            diff[a] = {b: e}
        elif kind == "horizontal":
            p = max(p, 1)
            gens[a], gens[b] = (p, q), (p - 1, q)
            diff[a] = {b: e}
        else:
            p = max(p, 2)
            gens[a], gens[b] = (p, q), (p - 2, q + 1)
            diff[a] = {b: e}
    return gens, {s: {t: R.from_int(c) for t, c in v.items()} for s, v in diff.items()}


def _filtered_auto(rng, spec, gens: dict):
    """Random unimodular map preserving total degree and the filtration; returns (g, g^-1) as dict tables."""
    R = ring(spec)
    by_deg: dict = {}
    for s, (p, q) in sorted(gens.items()):
        by_deg.setdefault(p + q, []).append(s)
    g: dict = {s: {} for s in gens}
    gi: dict = {s: {} for s in gens}
    for n, syms in by_deg.items():
        syms = sorted(syms, key=lambda s: (gens[s][0], s))
        m = len(syms)
        # unipotent, upper triangular in the filtration order: column j may hit rows with p <= p_j
        L = [[R.one if i == j else R.zero for j in range(m)] for i in range(m)]
        for i in range(m):
            for j in range(m):
                if i < j and gens[syms[i]][0] <= gens[syms[j]][0]:
                    L[i][j] = R.from_int(rng.randint(-2, 2))
        sign = [rng.choice([1, -1]) for _ in range(m)]
        Lm = MatrixE.from_rows(spec, [[R.mul(L[i][j], R.from_int(sign[j])) for j in range(m)] for i in range(m)])
        Li = inverse(Lm)
        for j, s in enumerate(syms):
            g[s] = {(syms[i], ()): Lm.data[i][j] for i in range(m) if not R.is_zero(Lm.data[i][j])}
            gi[s] = {(syms[i], ()): Li.data[i][j] for i in range(m) if not R.is_zero(Li.data[i][j])}
    return g, gi


def random_e2_iso(rng: random.Random, spec=None, cols: int = 3):
    """(FilteredMap f: X -> Y, description); f is an E^2-isomorphism by construction."""
    spec = spec or Integers()
    R = ring(spec)
    gx, dx = _elementary(rng, spec, cols, "x", allow_torsion=True)
    # Z: E^2-acyclic pieces only (unit vertical or horizontal pairs)
    gz, dz = {}, {}
    for k in range(rng.randint(1, 3)):
        kind = rng.choice(["vertical", "horizontal"])
        p = rng.randint(1 if kind == "horizontal" else 0, cols - 1)
        q = rng.randint(-1, 2)
        a, b = f"z{k}a", f"z{k}b"
        gz[a], gz[b] = ((p, q + 1), (p, q)) if kind == "vertical" else ((p, q), (p - 1, q))
        dz[a] = {b: R.from_int(rng.choice([1, -1]))}
    gy = {**gx, **gz}
    dy = {**dx, **dz}
    g, gi = _filtered_auto(rng, spec, gy)
    hx, hxi = _filtered_auto(rng, spec, gx)

    def module(gens, name):
        return BigradedModule(spec, tuple(explicit(s, p, q) for s, (p, q) in sorted(gens.items())),
                              DegreeWindow((0, cols - 1)), name)

    def conj(gens, diff, a, ai, name):
        # D' = a D a^-1 on basis symbols
        def apply(table, v):
            acc: dict = {}
            for lab, c in v.items():
                add_into(R, acc, table.get(lab[0], {}), c)
            return acc

        def dtab(v):
            acc: dict = {}
            for lab, c in v.items():
                add_into(R, acc, {(t, ()): x for t, x in diff.get(lab[0], {}).items()}, c)
            return acc

        tab = {}
        for s in gens:
            v = apply(a, dtab(apply(ai, {(s, ()): R.one})))
            if v:
                tab[((s, ()),)] = v
        mod = module(gens, name)
        return mod, table_op("D", 1, (0, 0), spec, tab, mod)

    MX, DX = conj(gx, dx, hx, hxi, "X")
    MY, DY = conj(gy, dy, g, gi, "Y")
    X = filtered_view(MX, {0: DX}, "X")
    Y = filtered_view(MY, {0: DY}, "Y")

    def fn(v):
        # f = g o incl o hx^-1
        acc: dict = {}
        for lab, c in v.items():
            for lab2, c2 in hxi[lab[0]].items():
                add_into(R, acc, g[lab2[0]], R.mul(c, c2))
        return acc

    return FilteredMap(X, Y, fn, "f"), {"x_generators": len(gx), "z_generators": len(gz)}


def check_spectral_comparison(count: int | None = None, seed: int = 0) -> list[dict]:
    rng = random.Random(seed)
    out = []
    for _ in range(count or 20):
        f, desc = random_e2_iso(rng)
        chain = f.check().ok
        cmp = comparison_check(f, 2)
        out.append({**desc, "chain_map": chain, "e2_iso": cmp["page_iso"], "quasi_iso": cmp["quasi_iso"],
                    "ok": chain and cmp["page_iso"] and cmp["quasi_iso"]})
    return out


# ---------------------------------------------------------------------------
# SNF against an independent oracle

def random_matrix(rng: random.Random, spec, max_dim: int = 5) -> MatrixE:
    R = ring(spec)
    m, n = rng.randint(1, max_dim), rng.randint(1, max_dim)
    if spec.kind == "QQt":
        def entry():
            if rng.random() < 0.3:
                return R.zero
            return R._trim(tuple(Fraction(rng.randint(-2, 2)) for _ in range(rng.randint(1, 3))))
    else:
        def entry():
            return R.from_int(rng.randint(-6, 6) if rng.random() < 0.8 else 0)
    rows = [[entry() for _ in range(n)] for _ in range(m)]
    if rng.random() < 0.3 and m > 1:
        # force rank deficiency sometimes
        rows[-1] = [R.add(a, b) for a, b in zip(rows[0], rows[-2 if m > 2 else 0])]
    return MatrixE.from_rows(spec, rows, n)


def _to_sympy(R, spec, v, t):
    if spec.kind == "QQt":
        return sum((sympy.Rational(c.numerator, c.denominator) * t ** k for k, c in enumerate(v)), sympy.Integer(0))
    v = Fraction(v)
    return sympy.Rational(v.numerator, v.denominator)


def _sympy_gcd(vals, spec, t):
    g = sympy.Integer(0)
    for v in vals:
        g = sympy.gcd(g, v) if spec.kind != "QQt" else sympy.gcd(sympy.Poly(g, t), sympy.Poly(v, t)).as_expr()
    return g


def _associate(a, b, spec, t) -> bool:
    """a and b differ by a unit."""
    a, b = sympy.expand(a), sympy.expand(b)
    if spec.kind == "QQt":
        if a == 0 or b == 0:
            return a == 0 and b == 0
        q, r = sympy.div(sympy.Poly(a, t), sympy.Poly(b, t))
        return r.is_zero and q.degree() == 0
    return abs(a) == abs(b)


def snf_case(M: MatrixE) -> dict:
    spec = M.spec
    R = ring(spec)
    t = sympy.Symbol(getattr(spec, "variable", "t"))
    S = smith_normal_form(M)
    prod_ok = (S.U @ M @ S.V).data == S.D.data
    inv_ok = (S.U @ S.Uinv).data == MatrixE.identity(spec, M.rows).data and \
        (S.V @ S.Vinv).data == MatrixE.identity(spec, M.cols).data

    def sdet(A):
        return sympy.Matrix(A.rows, A.cols, [_to_sympy(R, spec, x, t) for r in A.data for x in r]).det()

    unit_ok = all(R.is_unit(_from_sympy(R, spec, sympy.expand(sdet(X)), t)) for X in (S.U, S.V))
    diag = S.diagonal
    off = all(R.is_zero(S.D.data[i][j]) for i in range(M.rows) for j in range(M.cols) if i != j or i >= S.rank)
    chain = all(not R.is_zero(d) for d in diag) and all(R.divides(diag[k], diag[k + 1]) for k in range(len(diag) - 1))
    # determinantal divisors by brute-force minors
    ent = [[_to_sympy(R, spec, x, t) for x in r] for r in M.data]
    minors_ok = True
    prodd = sympy.Integer(1)
    for k in range(1, min(M.rows, M.cols) + 1):
        mins = []
        for rows in combinations(range(M.rows), k):
            for cols in combinations(range(M.cols), k):
                mins.append(sympy.expand(sympy.Matrix([[ent[i][j] for j in cols] for i in rows]).det()))
        g = _sympy_gcd(mins, spec, t)
        if k <= len(diag):
            prodd = sympy.expand(prodd * _to_sympy(R, spec, diag[k - 1], t))
            minors_ok &= _associate(g, prodd, spec, t)
        else:
            minors_ok &= sympy.expand(g) == 0
    ok = prod_ok and inv_ok and unit_ok and off and chain and minors_ok
    return {"ring": str(spec), "shape": [M.rows, M.cols], "UMV=D": prod_ok, "inverses": inv_ok, "unit_det": unit_ok,
            "diagonal": off, "divisibility": chain, "minors": minors_ok, "ok": ok}


def _from_sympy(R, spec, e, t):
    if spec.kind == "QQt":
        p = sympy.Poly(e, t)
        coeffs = list(reversed(p.all_coeffs()))
        return R._trim(tuple(Fraction(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1])) for c in coeffs))
    return R.from_int(int(e))


def check_snf_oracle(count: int | None = None, seed: int = 0) -> list[dict]:
    rng = random.Random(seed)
    out = []
    specs = [Integers(), RationalPolynomials("t")]
    for k in range(count or 200):
        out.append(snf_case(random_matrix(rng, specs[k % 2])))
    return out


CHECKS = {
    "transfer-oracle": check_transfer_oracle,
    "snf-oracle": check_snf_oracle,
    "spectral-comparison": check_spectral_comparison,
}
