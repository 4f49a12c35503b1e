"""Derived homotopy algebras and derived infinity-morphisms.

Flavors: Assoc, Comm, Lie, Unit. Operations are stored per (i, r); the
twisted differentials d_i are the arity-one operations. Verifiers evaluate
the flavor equations on basis tuples and report exact residuals, split by
the horizontal index i (read off from the output bidegree).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterable, Sequence

from .graded import BigradedModule, Label, MultiOp, Vec, add_into
from .reports import Report, Residual
from .rings import ring
from .signs import koszul_sign, multi_shuffles, permutation_sign, shuffles

ASSOC, COMM, LIE, UNIT = "Assoc", "Comm", "Lie", "Unit"
FLAVORS = (ASSOC, COMM, LIE, UNIT)


class FlavorMismatch(Exception):
    pass


def _sgn(e: int) -> int:
    return -1 if e & 1 else 1


def rearrangement_sign(order: Sequence[int], degrees: Sequence[int]) -> int:
    """Koszul sign of listing inputs in `order` (position a holds input order[a])."""
    pos = [0] * len(order)
    for a, s in enumerate(order):
        pos[s] = a
    return koszul_sign(pos, degrees)


def compositions(r: int, s: int) -> list[tuple[int, ...]]:
    if s == 1:
        return [(r,)]
    out = []
    for first in range(1, r - s + 2):
        for rest in compositions(r - first, s - 1):
            out.append((first,) + rest)
    return out


class OpFamily:
    """A family of operations indexed by (i, r), with memoized totals."""

    def __init__(self, spec, ops: dict[tuple[int, int], MultiOp] | None = None):
        self.spec = spec
        self.R = ring(spec)
        self.ops = {k: v for k, v in (ops or {}).items() if not v.is_zero}
        self._total: dict = {}
        self._arities = {r for (_, r) in self.ops}

    def get(self, i: int, r: int) -> MultiOp | None:
        return self.ops.get((i, r))

    def has_arity(self, r: int) -> bool:
        return r in self._arities

    def indices(self, r: int) -> list[int]:
        return sorted(i for (i, rr) in self.ops if rr == r)

    def total(self, r: int, labels: tuple, i_max: int | None = None) -> Vec:
        key = (r, labels, i_max)
        hit = self._total.get(key)
        if hit is not None:
            return hit
        acc: Vec = {}
        for i in self.indices(r):
            if i_max is not None and i > i_max:
                continue
            add_into(self.R, acc, self.ops[(i, r)].on_basis(labels))
        self._total[key] = acc
        return acc

    def total_vec(self, r: int, args: Sequence[Vec], i_max=None) -> Vec:
        if not self.has_arity(r) or any(not a for a in args):
            return {}
        R = self.R
        acc: Vec = {}
        for combo in product(*(a.items() for a in args)):
            labs = tuple(l for l, _ in combo)
            out = self.total(r, labs, i_max)
            if not out:
                continue
            c = combo[0][1]
            for _, x in combo[1:]:
                c = R.mul(c, x)
            add_into(R, acc, out, c)
        return acc


@dataclass
class DerivedHomotopyAlgebra:
    flavor: str
    carrier: BigradedModule
    d: dict  # i -> MultiOp (arity 1, shift (-i, i-1))
    ops: dict  # (i, r) -> MultiOp, r >= 2, shift (-i, r-2+i)
    name: str = ""

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise FlavorMismatch(f"unknown flavor {self.flavor}")
        if self.flavor == UNIT and any(not o.is_zero for o in self.ops.values()):
            raise FlavorMismatch("Unit flavor carries no operations of arity >= 2")
        allops = {(i, 1): op for i, op in self.d.items()}
        allops.update(self.ops)
        self.family = OpFamily(self.carrier.spec, allops)

    @property
    def spec(self):
        return self.carrier.spec

    @property
    def R(self):
        return ring(self.carrier.spec)

    def op(self, i: int, r: int) -> MultiOp | None:
        return self.family.get(i, r)

    def is_minimal(self) -> bool:
        return self.family.get(0, 1) is None

    def degree(self, lab: Label) -> int:
        return self.carrier.degree(lab)


@dataclass
class DerivedInftyMorphism:
    source: DerivedHomotopyAlgebra
    target: DerivedHomotopyAlgebra
    components: dict  # (i, r) -> MultiOp, shift (-i, r-1+i)
    name: str = ""

    def __post_init__(self):
        if self.source.flavor != self.target.flavor:
            raise FlavorMismatch("source and target flavors differ")
        self.family = OpFamily(self.source.spec, self.components)

    @property
    def flavor(self):
        return self.source.flavor

    def component(self, i: int, r: int) -> MultiOp | None:
        return self.family.get(i, r)


def _split_by_i(module: BigradedModule, vec: Vec, p_in: int, shift_q=None) -> dict[int, Vec]:
    out: dict[int, Vec] = {}
    for lab, c in vec.items():
        i = p_in - module.bidegree(lab)[0]
        out.setdefault(i, {})[lab] = c
    return out


def _tuples(basis: Sequence[Label], r: int) -> Iterable[tuple]:
    return product(basis, repeat=r)


# ---- algebra equations ----

def assoc_residual(A: DerivedHomotopyAlgebra, X: tuple, i_max: int | None = None) -> Vec:
    """Derived A-infinity equation summed over i, with m_{k,1} = d_k."""
    F = A.family
    R = A.R
    degs = [A.degree(x) for x in X]
    r = len(X)
    acc: Vec = {}
    for s in range(1, r + 1):
        t = r + 1 - s
        if not (F.has_arity(s) and F.has_arity(t)):
            continue
        for l in range(1, s + 1):
            e = (s - l) * (t - 1) + s - 1 + t * sum(degs[: l - 1])
            inner = F.total(t, X[l - 1 : l - 1 + t], i_max)
            for lab, c in inner.items():
                out = F.total(s, X[: l - 1] + (lab,) + X[l - 1 + t :], i_max)
                if out:
                    add_into(R, acc, out, c if not e & 1 else R.neg(c))
    return acc


def lie_residual(A: DerivedHomotopyAlgebra, X: tuple, i_max: int | None = None) -> Vec:
    """Generalized Jacobi identity summed over i."""
    F = A.family
    R = A.R
    degs = [A.degree(x) for x in X]
    r = len(X)
    acc: Vec = {}
    # d o l_r
    if F.has_arity(1) and F.has_arity(r):
        for lab, c in F.total(r, X, i_max).items():
            add_into(R, acc, F.total(1, (lab,), i_max), c)
    # l_r o d (includes d o d when r = 1)
    if F.has_arity(1) and F.has_arity(r) and r > 1:
        for s in range(r):
            e = r - 1 + sum(degs[:s])
            for lab, c in F.total(1, (X[s],), i_max).items():
                out = F.total(r, X[:s] + (lab,) + X[s + 1 :], i_max)
                add_into(R, acc, out, c if not e & 1 else R.neg(c))
    for s in range(2, r):
        t = r + 1 - s
        if not (F.has_arity(s) and F.has_arity(t)):
            continue
        for sig in shuffles(t, s - 1):
            order = sig
            sign = _sgn((s - 1) * t) * rearrangement_sign(order, degs) * permutation_sign(order)
            inner = F.total(t, tuple(X[k] for k in order[:t]), i_max)
            rest = tuple(X[k] for k in order[t:])
            for lab, c in inner.items():
                out = F.total(s, (lab,) + rest, i_max)
                add_into(R, acc, out, c if sign > 0 else R.neg(c))
    return acc


def skew_residual(op_total: Callable[[tuple], Vec], R, degs_of, X: tuple) -> Vec:
    """g(x) - (-1)^alpha sign(sigma) g(x_sigma) summed over adjacent transpositions."""
    acc: Vec = {}
    base = op_total(X)
    degs = [degs_of(x) for x in X]
    for k in range(len(X) - 1):
        Y = X[:k] + (X[k + 1], X[k]) + X[k + 2 :]
        sign = -_sgn(degs[k] * degs[k + 1])
        other = op_total(Y)
        diff = dict(base)
        add_into(R, diff, other, R.from_int(-sign))
        add_into(R, acc, diff)
    return acc


def shuffle_residuals(op_total: Callable[[tuple], Vec], R, degs_of, X: tuple) -> list[tuple[int, Vec]]:
    """For each 1 <= s < r, the signed sum over (s, r-s)-shuffles (Koszul times permutation sign)."""
    out = []
    r = len(X)
    degs = [degs_of(x) for x in X]
    for s in range(1, r):
        acc: Vec = {}
        for sig in shuffles(s, r - s):
            sign = koszul_sign(sig, degs) * permutation_sign(sig)
            args = [None] * r
            for k, pos in enumerate(sig):
                args[pos] = X[k]
            add_into(R, acc, op_total(tuple(args)), R.from_int(sign))
        if acc:
            out.append((s, acc))
    return out


def verify_algebra(A: DerivedHomotopyAlgebra, r_max: int = 4, i_max: int = 3,
                   basis: Sequence[Label] | None = None) -> Report:
    """Check the flavor equations on all basis tuples of arity <= r_max."""
    rep = Report(f"verify_algebra[{A.flavor}] {A.name}")
    basis = list(basis) if basis is not None else A.carrier.basis()
    F = A.family
    for r in range(1, r_max + 1):
        if A.flavor == UNIT and r > 1:
            break
        pairs = [(s, r + 1 - s) for s in range(1, r + 1) if F.has_arity(s) and F.has_arity(r + 1 - s)]
        if not pairs:
            rep.notes.append(f"r={r}: every term involves a zero operation")
            continue
        fn = lie_residual if A.flavor == LIE else assoc_residual
        for X in _tuples(basis, r):
            rep.checked += 1
            res = fn(A, X, i_max)
            if res:
                p_in = sum(A.carrier.bidegree(x)[0] for x in X)
                for i, v in sorted(_split_by_i(A.carrier, res, p_in).items()):
                    if i <= i_max:
                        rep.residuals.append(Residual("structure", i, r, X, v))
    if A.flavor == COMM:
        rep.merge(verify_shuffle_vanishing_algebra(A, r_max, basis))
    if A.flavor == LIE:
        rep.merge(verify_skew_symmetry_algebra(A, r_max, basis))
    return rep


def _ops_by_arity(fam: OpFamily, r_min: int, r_max: int):
    for (i, r), op in sorted(fam.ops.items()):
        if r_min <= r <= r_max:
            yield i, r, op


def verify_shuffle_vanishing_algebra(A: DerivedHomotopyAlgebra, r_max: int = 4, basis=None) -> Report:
    rep = Report(f"shuffle_vanishing {A.name}")
    basis = list(basis) if basis is not None else A.carrier.basis()
    for i, r, op in _ops_by_arity(A.family, 2, r_max):
        for X in _tuples(basis, r):
            rep.checked += 1
            for s, v in shuffle_residuals(op.on_basis, A.R, A.degree, X):
                rep.residuals.append(Residual(f"shuffle({s},{r - s})", i, r, X, v))
    return rep


def verify_skew_symmetry_algebra(A: DerivedHomotopyAlgebra, r_max: int = 4, basis=None) -> Report:
    rep = Report(f"skew_symmetry {A.name}")
    basis = list(basis) if basis is not None else A.carrier.basis()
    for i, r, op in _ops_by_arity(A.family, 2, r_max):
        for X in _tuples(basis, r):
            rep.checked += 1
            v = skew_residual(op.on_basis, A.R, A.degree, X)
            if v:
                rep.residuals.append(Residual("skew", i, r, X, v))
    return rep


def verify_shuffle_vanishing(obj, r_max: int = 4, basis=None) -> Report:
    if isinstance(obj, DerivedHomotopyAlgebra):
        return verify_shuffle_vanishing_algebra(obj, r_max, basis)
    rep = Report(f"shuffle_vanishing {obj.name}")
    src = obj.source
    basis = list(basis) if basis is not None else src.carrier.basis()
    for i, r, op in _ops_by_arity(obj.family, 2, r_max):
        for X in _tuples(basis, r):
            rep.checked += 1
            for s, v in shuffle_residuals(op.on_basis, src.R, src.degree, X):
                rep.residuals.append(Residual(f"shuffle({s},{r - s})", i, r, X, v))
    return rep


# ---- morphism equations ----

def morphism_sides(f_total, src: OpFamily, tgt: OpFamily, flavor: str, X: tuple, degs: Sequence[int],
                   R, skip_unknown: bool = False, i_max=None) -> tuple[Vec, Vec]:
    """Return (f o m side, m o f side) of the infinity-morphism equation at X.

    `f_total(t, labels)` evaluates sum_k f_{k,t}. With skip_unknown, the
    terms f_1(m_r), f_r(.. d ..) and d(f_r) are omitted.
    """
    r = len(X)
    fm: Vec = {}
    mf: Vec = {}
    # f o m
    if flavor == LIE:
        # t = 1: f_r(.., d x_s, ..)
        if not skip_unknown and src.has_arity(1):
            for s in range(r):
                e = r - 1 + sum(degs[:s])
                for lab, c in src.total(1, (X[s],), i_max).items():
                    add_into(R, fm, f_total(r, X[:s] + (lab,) + X[s + 1 :]), c if not e & 1 else R.neg(c))
        for s in range(1, r):
            t = r + 1 - s
            if not src.has_arity(t):
                continue
            if skip_unknown and s == 1:
                continue
            for sig in shuffles(t, s - 1) if s > 1 else [tuple(range(r))]:
                sign = _sgn((s - 1) * t) * rearrangement_sign(sig, degs) * permutation_sign(sig)
                inner = src.total(t, tuple(X[k] for k in sig[:t]), i_max)
                rest = tuple(X[k] for k in sig[t:])
                for lab, c in inner.items():
                    add_into(R, fm, f_total(s, (lab,) + rest), c if sign > 0 else R.neg(c))
    else:
        for s in range(1, r + 1):
            t = r + 1 - s
            if not src.has_arity(t):
                continue
            if skip_unknown and (s == 1 or t == 1):
                continue
            for l in range(1, s + 1):
                e = s - 1 + (s - l) * (t - 1) + t * sum(degs[: l - 1])
                inner = src.total(t, X[l - 1 : l - 1 + t], i_max)
                for lab, c in inner.items():
                    out = f_total(s, X[: l - 1] + (lab,) + X[l - 1 + t :])
                    if out:
                        add_into(R, fm, out, c if not e & 1 else R.neg(c))
    # m o f
    for s in range(1, r + 1):
        if not tgt.has_arity(s):
            continue
        if skip_unknown and s == 1:
            continue
        if flavor == LIE and s > 1:
            for ts in compositions(r, s):
                if any(ts[k] > ts[k + 1] for k in range(s - 1)):
                    continue
                for tau in multi_shuffles(*ts):
                    lam = 0
                    before = 0
                    pos = 0
                    for u, tu in enumerate(ts):
                        lam += (tu - 1) * before
                        before += sum(degs[tau[k]] for k in range(pos, pos + tu))
                        pos += tu
                    e = s * (s - 1) // 2 + sum(ts[l] * (s - 1 - l) for l in range(s - 1)) + lam
                    sign = _sgn(e) * rearrangement_sign(tau, degs) * permutation_sign(tau)
                    args = []
                    pos = 0
                    for tu in ts:
                        args.append(f_total(tu, tuple(X[k] for k in tau[pos : pos + tu])))
                        pos += tu
                    add_into(R, mf, tgt.total_vec(s, args, i_max), R.from_int(sign))
            continue
        for ts in compositions(r, s):
            e = 0
            pos = 0
            for l, tl in enumerate(ts):
                e += (tl + 1) * (s - 1 - l) + (tl - 1) * sum(degs[:pos])
                pos += tl
            args = []
            pos = 0
            for tl in ts:
                args.append(f_total(tl, X[pos : pos + tl]))
                pos += tl
            out = tgt.total_vec(s, args, i_max)
            if out:
                add_into(R, mf, out, R.one if not e & 1 else R.from_int(-1))
    return fm, mf


def verify_morphism(f: DerivedInftyMorphism, r_max: int = 4, i_max: int = 3,
                    basis: Sequence[Label] | None = None) -> Report:
    src, tgt = f.source, f.target
    rep = Report(f"verify_morphism[{f.flavor}] {f.name}")
    basis = list(basis) if basis is not None else src.carrier.basis()
    R = src.R
    Ff = f.family
    ftot = lambda t, labs: Ff.total(t, labs, i_max)
    for r in range(1, r_max + 1):
        if f.flavor == UNIT and r > 1:
            break
        for X in _tuples(basis, r):
            rep.checked += 1
            degs = [src.degree(x) for x in X]
            fm, mf = morphism_sides(ftot, src.family, tgt.family, f.flavor, X, degs, R, i_max=i_max)
            add_into(R, fm, mf, R.from_int(-1))
            if fm:
                p_in = sum(src.carrier.bidegree(x)[0] for x in X)
                for i, v in sorted(_split_by_i(tgt.carrier, fm, p_in).items()):
                    if i <= i_max:
                        rep.residuals.append(Residual("morphism", i, r, X, v))
    if f.flavor == COMM:
        rep.merge(verify_shuffle_vanishing(f, r_max, basis))
    if f.flavor == LIE:
        for i, r, op in _ops_by_arity(Ff, 2, r_max):
            for X in _tuples(basis, r):
                v = skew_residual(op.on_basis, R, src.degree, X)
                if v:
                    rep.residuals.append(Residual("skew", i, r, X, v))
    return rep


# ---- construction helpers ----

def split_components(name: str, total: Callable[[tuple], Vec], module_in: BigradedModule,
                     module_out: BigradedModule, arity: int, i_range: Iterable[int], q_offset: int,
                     spec) -> dict:
    """Split a memoized total operation into per-i components.

    The component i collects output labels whose horizontal degree is the
    input horizontal degree minus i. Shift is (-i, q_offset + i).
    """
    out = {}
    for i in i_range:
        def rule(labs, i=i):
            p_in = sum(module_in.bidegree(l)[0] for l in labs)
            return {lab: c for lab, c in total(labs).items() if module_out.bidegree(lab)[0] == p_in - i}
        out[(i, arity)] = MultiOp(f"{name}_{i},{arity}", arity, (-i, q_offset + i), rule, spec)
    return out


def compose(g: DerivedInftyMorphism, f: DerivedInftyMorphism, r_max: int = 4, i_max: int = 3,
            name: str = "") -> DerivedInftyMorphism:
    """Composite g o f, evaluated lazily per basis tuple."""
    if f.target.flavor != g.source.flavor:
        raise FlavorMismatch("cannot compose morphisms of different flavors")
    flavor = f.flavor
    src = f.source
    R = src.R
    Ff, Fg = f.family, g.family
    ftot = lambda t, labs: Ff.total(t, labs, i_max)
    memo: dict = {}

    def total(labs: tuple) -> Vec:
        hit = memo.get(labs)
        if hit is not None:
            return hit
        r = len(labs)
        degs = [src.degree(x) for x in labs]
        acc: Vec = {}
        for s in range(1, r + 1):
            if not Fg.has_arity(s):
                continue
            if flavor == LIE:
                for ts in compositions(r, s):
                    if any(ts[k] > ts[k + 1] for k in range(s - 1)):
                        continue
                    for tau in multi_shuffles(*ts):
                        lam = 0
                        before = 0
                        pos = 0
                        for u, tu in enumerate(ts):
                            lam += (tu - 1) * before
                            before += sum(degs[tau[k]] for k in range(pos, pos + tu))
                            pos += tu
                        e = s * (s - 1) // 2 + sum(ts[l] * (s - 1 - l) for l in range(s - 1)) + lam
                        sign = _sgn(e) * rearrangement_sign(tau, degs) * permutation_sign(tau)
                        args = []
                        pos = 0
                        for tu in ts:
                            args.append(ftot(tu, tuple(labs[k] for k in tau[pos : pos + tu])))
                            pos += tu
                        add_into(R, acc, Fg.total_vec(s, args, i_max), R.from_int(sign))
                continue
            for ts in compositions(r, s):
                e = 0
                pos = 0
                for l, tl in enumerate(ts):
                    e += (tl + 1) * (s - 1 - l) + (tl - 1) * sum(degs[:pos])
                    pos += tl
                args = []
                pos = 0
                for tl in ts:
                    args.append(ftot(tl, labs[pos : pos + tl]))
                    pos += tl
                add_into(R, acc, Fg.total_vec(s, args, i_max), R.one if not e & 1 else R.from_int(-1))
        memo[labs] = acc
        return acc

    comps = {}
    r_top = 1 if flavor == UNIT else r_max
    for r in range(1, r_top + 1):
        comps.update(split_components("gf", total, src.carrier, g.target.carrier, r, range(i_max + 1), r - 1, src.spec))
    return DerivedInftyMorphism(src, g.target, comps, name or f"{g.name}*{f.name}")


def identity_morphism(A: DerivedHomotopyAlgebra) -> DerivedInftyMorphism:
    op = MultiOp("id", 1, (0, 0), lambda labs: {labs[0]: A.R.one}, A.spec)
    return DerivedInftyMorphism(A, A, {(0, 1): op}, "id")


def strict_morphism(A: DerivedHomotopyAlgebra, B: DerivedHomotopyAlgebra, phi: MultiOp,
                    name: str = "") -> DerivedInftyMorphism:
    return DerivedInftyMorphism(A, B, {(0, 1): phi}, name or phi.name)


def postcompose_strict(phi: MultiOp, f: DerivedInftyMorphism, B: DerivedHomotopyAlgebra,
                       name: str = "") -> DerivedInftyMorphism:
    """phi o f for a strict map phi: target(f) -> B."""
    comps = {}
    for (i, r), op in f.family.ops.items():
        def rule(labs, op=op):
            return phi(op.on_basis(labs))
        comps[(i, r)] = MultiOp(f"{name or 'phi'}_{i},{r}", r, op.shift, rule, f.source.spec)
    return DerivedInftyMorphism(f.source, B, comps, name or f"{phi.name}*{f.name}")


# ---- split filtered realization ----

def to_split_filtered(A: DerivedHomotopyAlgebra, i_max: int | None = None):
    """Totalized carrier with F_m = sum_{p <= m} and total differential sum_i d_i."""
    from .complexes import totalize
    return totalize(A, i_max)


def underlying_filtered_map(f: DerivedInftyMorphism, i_max: int | None = None):
    """The filtration-preserving chain map sum_i f_{i,1} between totalizations."""
    from .spectral import FilteredMap
    S = to_split_filtered(f.source, i_max)
    T = to_split_filtered(f.target, i_max)
    R = f.source.R
    comps = [op for (i, r), op in sorted(f.family.ops.items()) if r == 1 and (i_max is None or i <= i_max)]

    def fn(v: Vec) -> Vec:
        acc: Vec = {}
        for op in comps:
            add_into(R, acc, op(v))
        return acc

    return FilteredMap(S, T, fn, f.name)


def is_e2_equivalence_morphism(f: DerivedInftyMorphism, i_max: int | None = None):
    """Certificate that sum_i f_{i,1} induces an isomorphism on E^2."""
    from .spectral import is_e2_equivalence
    return is_e2_equivalence(underlying_filtered_map(f, i_max))
