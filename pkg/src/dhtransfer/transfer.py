"""Homotopy transfer onto vertical homology.

The perturbation lemma handles the differential part. Higher operations
are obtained arity by arity: the infinity-morphism equation for the
inclusion reads  D f_r - f_r D = iota' m_r - Phi_r  where Phi_r only
involves lower arities, and the solution is m_r = g' Phi_r,
f_r = h' Phi_r. Expanding h' and g' recovers the usual signed sums over
planar trees with h on internal edges and unary d_h vertices; evaluation
here is memoized per input tuple instead of per tree.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .algebra import (
    ASSOC, COMM, LIE, UNIT, DerivedHomotopyAlgebra, DerivedInftyMorphism, FlavorMismatch, OpFamily,
    morphism_sides, postcompose_strict, split_components,
)
from .complexes import Bicomplex
from .graded import BigradedModule, MultiOp, Vec, add_into
from .rings import ring


class NonNilpotentPerturbation(Exception):
    pass


@dataclass
class Contraction:
    """(iota, g, h) with g iota = id, iota g - id = d_v h + h d_v, and side conditions."""

    big: Bicomplex
    small: BigradedModule
    iota: MultiOp
    g: MultiOp
    h: MultiOp


@dataclass
class StrictAlgebraInput:
    flavor: str
    bicomplex: Bicomplex
    product: MultiOp  # shift (0, 0)
    target: DerivedHomotopyAlgebra | None = None
    comparison: MultiOp | None = None  # strict map to target
    name: str = ""

    def as_algebra(self) -> DerivedHomotopyAlgebra:
        B = self.bicomplex
        return DerivedHomotopyAlgebra(
            self.flavor if self.flavor != UNIT else UNIT, B.carrier,
            {0: B.d_v, 1: B.d_h}, {(0, 2): self.product} if self.flavor != UNIT else {}, self.name,
        )


@dataclass
class PerturbedContraction:
    base: Contraction
    iota: Callable[[Vec], Vec]
    g: Callable[[Vec], Vec]
    h: Callable[[Vec], Vec]
    d_small: Callable[[Vec], Vec]
    differentials: dict  # i -> MultiOp on the small carrier


def _memo_linear(R, fn_basis):
    memo: dict = {}

    def on_basis(lab):
        hit = memo.get(lab)
        if hit is None:
            hit = memo[lab] = fn_basis(lab)
        return hit

    def apply(v: Vec) -> Vec:
        acc: Vec = {}
        for lab, c in v.items():
            add_into(R, acc, on_basis(lab), c)
        return acc

    return apply, on_basis


def perturb_contraction(c: Contraction, max_steps: int = 64) -> PerturbedContraction:
    """Basic perturbation lemma with perturbation d_h.

    A = sum_n (d_h h)^n d_h, iota' = iota + h A iota, g' = g + g A h,
    h' = h + h A h, and the small differential is g A iota.
    """
    B = c.big
    R = ring(B.carrier.spec)
    dh, h, g, iota = B.d_h, c.h, c.g, c.iota

    def series_basis(lab):
        acc: Vec = {}
        z = dh({lab: R.one})
        steps = 0
        while z:
            add_into(R, acc, z)
            z = dh(h(z))
            steps += 1
            if steps > max_steps:
                raise NonNilpotentPerturbation(f"perturbation series does not terminate at {lab!r}")
        return acc

    Aop, _ = _memo_linear(R, series_basis)

    def iota_b(lab):
        y = iota({lab: R.one})
        out = dict(y)
        add_into(R, out, h(Aop(y)))
        return out

    def g_b(lab):
        out = dict(g({lab: R.one}))
        add_into(R, out, g(Aop(h({lab: R.one}))))
        return out

    def h_b(lab):
        y = h({lab: R.one})
        out = dict(y)
        add_into(R, out, h(Aop(y)))
        return out

    def d_b(lab):
        return g(Aop(iota({lab: R.one})))

    iota_p, iota_on = _memo_linear(R, iota_b)
    g_p, _ = _memo_linear(R, g_b)
    h_p, _ = _memo_linear(R, h_b)
    d_p, d_on = _memo_linear(R, d_b)
    S = c.small
    diffs = split_components("d'", lambda labs: d_on(labs[0]), S, S, 1, range(1, max_steps), -1, S.spec)
    diffs = {i: op for (i, _), op in diffs.items()}
    return PerturbedContraction(c, iota_p, g_p, h_p, d_p, diffs)


class _LazyFamily(OpFamily):
    """Operation family whose totals come from a function (all i at once)."""

    def __init__(self, spec, total_fn, r_max):
        super().__init__(spec, {})
        self._fn = total_fn
        self.r_max = r_max

    def has_arity(self, r):
        return 1 <= r <= self.r_max

    def total(self, r, labels, i_max=None):
        return self._fn(labels)


@dataclass
class TransferResult:
    minimal: DerivedHomotopyAlgebra
    inclusion: DerivedInftyMorphism  # iota_infinity: minimal ~> big
    perturbed: PerturbedContraction
    m_total: Callable
    f_total: Callable


def transfer_minimal(inp: StrictAlgebraInput, c: Contraction, r_max: int = 4, i_max: int = 3,
                     name: str = "") -> TransferResult:
    flavor = inp.flavor
    spec = c.small.spec
    R = ring(spec)
    if flavor in (COMM, LIE) and not R.contains_rationals:
        raise FlavorMismatch(f"{flavor} transfer needs Q inside the ground ring; {spec} does not contain it")
    pc = perturb_contraction(c)
    S = c.small
    big = inp.as_algebra()
    tgt = big.family
    m_memo: dict = {}
    f_memo: dict = {}
    phi_memo: dict = {}

    def m_total(labs):
        if len(labs) == 1:
            return pc.d_small({labs[0]: R.one})
        hit = m_memo.get(labs)
        if hit is None:
            hit = m_memo[labs] = pc.g(phi(labs))
        return hit

    def f_total(labs):
        if len(labs) == 1:
            return pc.iota({labs[0]: R.one})
        hit = f_memo.get(labs)
        if hit is None:
            hit = f_memo[labs] = pc.h(phi(labs))
        return hit

    srcfam = _LazyFamily(spec, m_total, r_max)
    eq_flavor = LIE if flavor == LIE else ASSOC

    def phi(labs):
        hit = phi_memo.get(labs)
        if hit is not None:
            return hit
        degs = [S.degree(x) for x in labs]
        fm, mf = morphism_sides(lambda t, ls: f_total(ls), srcfam, tgt, eq_flavor, labs, degs, R,
                                skip_unknown=True)
        add_into(R, mf, fm, R.from_int(-1))
        phi_memo[labs] = mf
        return mf

    ops = {}
    comps = {}
    for r in range(2, r_max + 1):
        ops.update(split_components("m", m_total, S, S, r, range(i_max + 1), r - 2, spec))
    for r in range(1, r_max + 1):
        comps.update(split_components("iota", f_total, S, c.big.carrier, r, range(i_max + 1), r - 1, spec))
    d = {i: op for i, op in pc.differentials.items() if i <= i_max}
    M = DerivedHomotopyAlgebra(flavor, S, d, ops, name or f"H({inp.name})")
    iota_inf = DerivedInftyMorphism(M, big, comps, "iota_inf")
    return TransferResult(M, iota_inf, pc, m_total, f_total)


def minimal_model(inp: StrictAlgebraInput, c: Contraction, r_max: int = 4, i_max: int = 3):
    """Transfer, then post-compose the inclusion with the strict comparison map."""
    res = transfer_minimal(inp, c, r_max, i_max)
    if inp.comparison is None or inp.target is None:
        return res.minimal, res.inclusion, res
    f = postcompose_strict(inp.comparison, res.inclusion, inp.target, "f")
    return res.minimal, f, res
