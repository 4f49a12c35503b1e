"""Level-by-level search for an E^2-equivalence from a minimal model.

Unknowns are the table entries f_{j,s}(X) in the target basis, created on
demand. The equation at (i, r) has level w = i + r - 1 and is affine in
the unknowns of level w - 1 once lower levels are substituted, provided
source and target have d_0 = 0. Each level is one linear system over the
ground ring; equations are appended in order of increasing i and the first
one that makes the system unsolvable is reported.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iproduct
from typing import Any, Callable

from .algebra import (
    LIE, DerivedHomotopyAlgebra, DerivedInftyMorphism, FlavorMismatch, OpFamily, _split_by_i, morphism_sides,
)
from .graded import Label, MultiOp, Vec, add_into
from .linalg import MatrixE, NoSolution, kernel_basis, solve_linear
from .rings import ring


class NonlinearTerm(Exception):
    pass


@dataclass(frozen=True)
class Aff:
    """c + sum_k v[k] u_k with base-ring coefficients."""

    c: Any
    v: tuple = ()  # sorted ((var, coef), ...)
    bad: bool = False  # contains a product of two unknowns


class AffineForms:
    """Ring-like wrapper: affine forms in the unknowns, products at most linear."""

    def __init__(self, base):
        self.base = base
        self.zero = Aff(base.zero)
        self.one = Aff(base.one)

    def lift(self, x) -> Aff:
        return x if isinstance(x, Aff) else Aff(self.base.coerce(x))

    def from_int(self, n: int) -> Aff:
        return Aff(self.base.from_int(n))

    def is_zero(self, x) -> bool:
        x = self.lift(x)
        return not x.v and not x.bad and self.base.is_zero(x.c)

    def neg(self, x) -> Aff:
        x = self.lift(x)
        B = self.base
        return Aff(B.neg(x.c), tuple((k, B.neg(a)) for k, a in x.v), x.bad)

    def add(self, x, y) -> Aff:
        x, y = self.lift(x), self.lift(y)
        B = self.base
        v = dict(x.v)
        for k, a in y.v:
            s = B.add(v[k], a) if k in v else a
            if B.is_zero(s):
                v.pop(k, None)
            else:
                v[k] = s
        return Aff(B.add(x.c, y.c), tuple(sorted(v.items())), x.bad or y.bad)

    def _scale(self, c, x: Aff) -> Aff:
        B = self.base
        if B.is_zero(c) and not x.bad:
            return self.zero
        return Aff(B.mul(c, x.c), tuple((k, B.mul(c, a)) for k, a in x.v), x.bad)

    def mul(self, x, y) -> Aff:
        x, y = self.lift(x), self.lift(y)
        if x.v and y.v:
            # only legal in output components of a higher level; checked on use
            return Aff(self.base.zero, (), True)
        return self._scale(x.c, y) if not x.v else self._scale(y.c, x)


@dataclass(frozen=True)
class Unknown:
    i: int
    r: int
    inputs: tuple
    output: Label

    @property
    def level(self) -> int:
        return self.i + self.r - 1


@dataclass
class Obstruction:
    i: int
    r: int
    level: int
    inputs: tuple  # basis tuple of the failing equation
    output: Label  # target basis element of the failing coordinate
    cell: tuple  # bidegree of that coordinate
    matrix: MatrixE
    rhs: list
    unknowns: list
    witness: NoSolution
    constant: Any  # value of the failing equation with unknowns set to zero
    assumptions: list  # free lower-level choices the failing rows depend on
    instances: list = field(default_factory=list)  # (inputs, output, constant) rows of the block with no unknowns

    @property
    def unconditional(self) -> bool:
        return not self.assumptions

    def reproduce(self) -> bool:
        return isinstance(solve_linear(self.matrix, self.rhs), NoSolution)


@dataclass
class SolverState:
    values: dict = field(default_factory=dict)  # Unknown -> base scalar
    forced: dict = field(default_factory=dict)  # Unknown -> bool
    levels: list = field(default_factory=list)  # per-level summaries


@dataclass
class Solved:
    morphism: DerivedInftyMorphism
    state: SolverState
    bounds_exhausted: bool = True  # solvable up to the bounds; not a proof of formality


@dataclass
class Obstructed:
    obstruction: Obstruction
    state: SolverState


def identity_normalization(source: DerivedHomotopyAlgebra, target: DerivedHomotopyAlgebra) -> MultiOp:
    """f_{0,1} sending a basis element to the target basis element with the same label and bidegree."""
    S, T = source.carrier, target.carrier
    R = source.R

    def rule(labs):
        lab = labs[0]
        if T.has(lab) and T.bidegree(lab) == S.bidegree(lab):
            return {lab: R.one}
        return {}

    return MultiOp("f_0,1", 1, (0, 0), rule, source.carrier.spec)


def _table_op(name, r, shift, spec, table: dict) -> MultiOp:
    def rule(labs):
        return dict(table.get(labs, {}))

    return MultiOp(name, r, shift, rule, spec)


def search_e2_equivalence(M: DerivedHomotopyAlgebra, B: DerivedHomotopyAlgebra, r_max: int = 3, i_max: int = 2,
                          basis=None, normalization: MultiOp | None = None,
                          progress: Callable[[str], None] | None = None) -> Solved | Obstructed:
    if M.flavor != B.flavor:
        raise FlavorMismatch(f"{M.flavor} source and {B.flavor} target")
    if M.carrier.spec != B.carrier.spec:
        raise FlavorMismatch("source and target have different ground rings")
    for A, role in ((M, "source"), (B, "target")):
        if A.d.get(0) is not None and not A.d[0].is_zero:
            raise ValueError(f"the {role} must be minimal (d_0 = 0)")
    spec = M.carrier.spec
    R = ring(spec)
    AR = AffineForms(R)
    S, T = M.carrier, B.carrier
    basis = list(basis) if basis is not None else S.basis()
    f01 = normalization or identity_normalization(M, B)
    tcells = T.cells()
    src: OpFamily = M.family
    tgt = copy.copy(B.family)
    tgt.R = AR
    tgt._total = {}
    eq_flavor = LIE if M.flavor == LIE else "Assoc"
    state = SolverState()

    def target_cell(p, q):
        return tcells.get((p, q), [])

    def f_total_factory(level: int, registry: dict, touched: set):
        def f_total(t, labs):
            acc: Vec = {}
            p_in = sum(S.bidegree(x)[0] for x in labs)
            q_in = sum(S.bidegree(x)[1] for x in labs)
            for j in range(0, i_max + level + 1):
                lv = j + t - 1
                if lv > level:
                    break
                if lv == 0:
                    add_into(AR, acc, f01.on_basis(labs))
                    continue
                cell = (p_in - j, q_in + t - 1 + j)
                outs = target_cell(*cell)
                if not outs:
                    continue
                for out in outs:
                    u = Unknown(j, t, labs, out)
                    if lv == level:
                        k = registry.setdefault(u, len(registry))
                        acc[out] = AR.add(acc.get(out, AR.zero), Aff(R.zero, ((k, R.one),)))
                    else:
                        val = state.values.get(u)
                        if val is None:
                            # never constrained below: a free choice, fixed to zero
                            state.values[u] = val = R.zero
                            state.forced[u] = False
                        if not state.forced.get(u, False):
                            touched.add(u)
                        if not R.is_zero(val):
                            acc[out] = AR.add(acc.get(out, AR.zero), Aff(val))
            return {k: v for k, v in acc.items() if not AR.is_zero(v)}

        return f_total

    def tuples(r):
        return iproduct(basis, repeat=r)

    max_level = i_max + r_max - 1
    for w in range(1, max_level + 1):
        registry: dict = {}
        rows: list = []  # (i, r, X, out, Aff, touched)
        blocks: list = []  # (i, r, start, end)
        for i in range(0, min(i_max, w) + 1):
            r = w + 1 - i
            if r < 1 or r > r_max:
                continue
            start = len(rows)
            for X in tuples(r):
                touched: set = set()
                ftot = f_total_factory(w - 1, registry, touched)
                degs = [S.degree(x) for x in X]
                fm, mf = morphism_sides(ftot, src, tgt, eq_flavor, X, degs, AR)
                add_into(AR, fm, mf, AR.from_int(-1))
                if not fm:
                    continue
                p_in = sum(S.bidegree(x)[0] for x in X)
                comp = _split_by_i(T, fm, p_in).get(i)
                if not comp:
                    continue
                for out, val in sorted(comp.items()):
                    if val.bad:
                        raise NonlinearTerm(f"equation ({i},{r}) at {X} is not affine in the level-{w - 1} unknowns")
                    rows.append((i, r, X, out, val, frozenset(touched)))
            blocks.append((i, r, start, len(rows)))
        n = len(registry)
        unknowns = sorted(registry, key=registry.get)

        def system(idx):
            trip = []
            rhs = []
            for k, row in enumerate(idx):
                val = rows[row][4]
                for var, a in val.v:
                    trip.append((k, var, a))
                rhs.append(R.neg(val.c))
            return MatrixE.from_triplets(spec, len(idx), n, trip), rhs

        if R.is_field:
            res = _eliminate(R, [row[4] for row in rows], n)
        else:
            res = _snf_solve(R, system, len(rows), n)
        if isinstance(res, _Failure):
            cert = sorted(res.rows)
            Mm, bm = system(cert)
            wit = NoSolution(cert.index(res.row), R.zero, res.value) if R.is_field else solve_linear(Mm, bm)
            i, r, X, out, val, _ = rows[res.row]
            assumptions = sorted({u for k in cert for u in rows[k][5]}, key=repr)
            ob = Obstruction(i, r, w, X, out, T.bidegree(out), Mm, bm, unknowns, wit, val.c, assumptions)
            ob.instances = [(row[2], row[3], row[4].c) for row in rows if (row[0], row[1]) == (i, r)
                            and not row[4].v and not R.is_zero(row[4].c)]
            state.levels.append({"level": w, "equations": len(rows), "unknowns": n, "status": "obstructed"})
            return Obstructed(ob, state)
        sol, free = res
        for k, u in enumerate(unknowns):
            state.values[u] = sol[k]
            state.forced[u] = k not in free
        state.levels.append({"level": w, "equations": len(rows), "unknowns": n, "status": "solved",
                             "forced": sum(1 for k in range(n) if k not in free)})
        if progress:
            progress(f"level {w}: {len(rows)} equations, {n} unknowns solved")
    comps: dict = {(0, 1): f01}
    tables: dict = {}
    for u, val in state.values.items():
        if R.is_zero(val):
            continue
        tables.setdefault((u.i, u.r), {}).setdefault(u.inputs, {})[u.output] = val
    for (i, r), tab in tables.items():
        comps[(i, r)] = _table_op(f"f_{i},{r}", r, (-i, r - 1 + i), spec, tab)
    f = DerivedInftyMorphism(M, B, comps, "f")
    return Solved(f, state, True)


@dataclass
class _Failure:
    row: int  # first row whose addition makes the system unsolvable
    rows: frozenset  # rows combined into the contradiction
    value: Any


def _eliminate(R, forms: list, n: int):
    """Incremental sparse elimination over a field, rows in order.

    Returns (solution with free unknowns zero, free columns) or _Failure.
    """
    piv: dict = {}  # column -> (row dict with min column = pivot, rhs, source rows)
    for k, form in enumerate(forms):
        row = dict(form.v)
        rhs = R.neg(form.c)
        used = {k}
        while row:
            col = min(row)
            if col not in piv:
                break
            prow, prhs, pused = piv[col]
            a = row[col]
            for c2, x in prow.items():
                v = R.sub(row.get(c2, R.zero), R.mul(a, x))
                if R.is_zero(v):
                    row.pop(c2, None)
                else:
                    row[c2] = v
            rhs = R.sub(rhs, R.mul(a, prhs))
            used |= pused
        if not row:
            if not R.is_zero(rhs):
                return _Failure(k, frozenset(used), rhs)
            continue
        col = min(row)
        inv = R.inv(row[col])
        piv[col] = ({c2: R.mul(inv, x) for c2, x in row.items()}, R.mul(inv, rhs), frozenset(used))
    # back substitution to reduced form, pivots from the right
    red: dict = {}
    for col in sorted(piv, reverse=True):
        prow, prhs, _ = piv[col]
        row = dict(prow)
        for c2 in [c for c in row if c != col and c in red]:
            if c2 not in row:
                continue
            a = row[c2]
            rrow, rrhs = red[c2]
            for c3, x in rrow.items():
                v = R.sub(row.get(c3, R.zero), R.mul(a, x))
                if R.is_zero(v):
                    row.pop(c3, None)
                else:
                    row[c3] = v
            prhs = R.sub(prhs, R.mul(a, rrhs))
        red[col] = (row, prhs)
    sol = [R.zero] * n
    free = set(range(n)) - set(red)
    for col, (row, rhs) in red.items():
        sol[col] = rhs
        if any(c != col for c in row):
            free.add(col)
    return sol, free


def _snf_solve(R, system, m: int, n: int):
    idx = list(range(m))
    Mx, b = system(idx)
    sol = solve_linear(Mx, b) if m else [R.zero] * n
    if isinstance(sol, NoSolution):
        lo, hi = 0, m
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if isinstance(solve_linear(*system(idx[:mid])), NoSolution):
                hi = mid
            else:
                lo = mid
        return _Failure(hi - 1, frozenset(range(hi)), sol.value)
    kernel = kernel_basis(Mx) if m else [[R.one if a == c else R.zero for a in range(n)] for c in range(n)]
    free = {k for vec in kernel for k, x in enumerate(vec) if not R.is_zero(x)}
    return sol, free


def forced_values(state: SolverState, R, nonzero_only: bool = True) -> list[tuple[Unknown, Any]]:
    out = [(u, v) for u, v in state.values.items()
           if state.forced.get(u) and not (nonzero_only and R.is_zero(v))]
    return sorted(out, key=lambda p: (p[0].level, p[0].i, p[0].r, repr(p[0].inputs), repr(p[0].output)))


def small_fractions(value: int, modulus: int, bound: int = 2) -> list[Fraction]:
    """Fractions a/b with |a|, b <= bound and b invertible that equal value mod modulus."""
    out = set()
    for b in range(1, bound + 1):
        if b % modulus == 0:
            continue
        a = (value * b) % modulus
        for a2 in (a, a - modulus):
            if abs(a2) <= bound:
                out.add(Fraction(a2, b))
    return sorted(out, key=lambda f: (f.denominator, abs(f.numerator), f.numerator))
