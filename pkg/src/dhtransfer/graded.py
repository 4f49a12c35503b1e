"""Bigraded free modules with labeled bases, windows and multilinear operations.

Basis labels are tuples (symbol, params). Elements are sparse dicts
label -> ring value, never containing zero coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import product
from typing import Callable, Iterable, Sequence

from .rings import Ring, RingSpec, ring

Label = tuple  # (symbol, (params...))
Vec = dict


class WindowEscape(Exception):
    def __init__(self, label, reason=""):
        self.label = label
        super().__init__(f"window escape at {label!r} {reason}".strip())


@dataclass(frozen=True)
class Family:
    """A parametric family of basis elements with affine bidegree.

    p and q are (const, coeff_1, ..., coeff_k) for params (n_1, ..., n_k).
    guards are (param index, modulus, residue); bounds are hard (lo, hi)
    limits with None meaning unbounded.
    """

    symbol: str
    params: tuple = ()
    p: tuple = (0,)
    q: tuple = (0,)
    guards: tuple = ()
    bounds: tuple = ()
    display: str | None = None

    def bidegree(self, params: Sequence[int]) -> tuple[int, int]:
        p = self.p[0] + sum(c * n for c, n in zip(self.p[1:], params))
        q = self.q[0] + sum(c * n for c, n in zip(self.q[1:], params))
        return p, q

    def admits(self, params: Sequence[int]) -> bool:
        if len(params) != len(self.params):
            return False
        for idx, mod, res in self.guards:
            if params[idx] % mod != res % mod:
                return False
        for (lo, hi), n in zip(self.bounds or [(None, None)] * len(params), params):
            if lo is not None and n < lo:
                return False
            if hi is not None and n > hi:
                return False
        return True

    def fmt(self, params: Sequence[int]) -> str:
        if self.display is None:
            if not params:
                return self.symbol
            return f"{self.symbol}[{','.join(map(str, params))}]"
        out = self.display
        for name, n in zip(self.params, params):
            out = out.replace("{" + name + "}", str(n))
        return out


def explicit(symbol: str, p: int, q: int, display: str | None = None) -> Family:
    return Family(symbol, (), (p,), (q,), (), (), display)


@dataclass(frozen=True)
class DegreeWindow:
    p_range: tuple = (0, 0)
    q_range: tuple | None = None
    params: tuple = ()  # ((name, lo, hi), ...)
    margins: tuple = ()  # ((operation family, margin), ...)

    def param_range(self, name: str):
        for n, lo, hi in self.params:
            if n == name:
                return lo, hi
        return None

    def contains(self, p: int, q: int) -> bool:
        if not (self.p_range[0] <= p <= self.p_range[1]):
            return False
        if self.q_range is not None and not (self.q_range[0] <= q <= self.q_range[1]):
            return False
        return True

    def with_params(self, **ranges) -> "DegreeWindow":
        d = {n: (lo, hi) for n, lo, hi in self.params}
        d.update(ranges)
        return replace(self, params=tuple((n, lo, hi) for n, (lo, hi) in sorted(d.items())))

    def margin(self, name: str) -> int:
        return dict(self.margins).get(name, 0)

    def to_json(self):
        return {
            "p": list(self.p_range),
            "q": list(self.q_range) if self.q_range else None,
            "params": {n: [lo, hi] for n, lo, hi in self.params},
        }


@dataclass(frozen=True)
class BigradedModule:
    spec: RingSpec
    families: tuple
    window: DegreeWindow = DegreeWindow()
    name: str = ""

    def __post_init__(self):
        syms = [f.symbol for f in self.families]
        if len(set(syms)) != len(syms):
            raise ValueError("duplicate family symbols")
        object.__setattr__(self, "_fam", {f.symbol: f for f in self.families})

    @property
    def R(self) -> Ring:
        return ring(self.spec)

    def family(self, symbol: str) -> Family:
        return self._fam[symbol]

    def has(self, label: Label) -> bool:
        f = self._fam.get(label[0])
        return f is not None and f.admits(label[1])

    def check(self, label: Label):
        if not self.has(label):
            raise WindowEscape(label, f"is not a basis element of {self.name or 'module'}")

    def bidegree(self, label: Label) -> tuple[int, int]:
        return self._fam[label[0]].bidegree(label[1])

    def degree(self, label: Label) -> int:
        p, q = self.bidegree(label)
        return p + q

    def in_window(self, label: Label) -> bool:
        if not self.has(label):
            return False
        f = self._fam[label[0]]
        for name, n in zip(f.params, label[1]):
            r = self.window.param_range(name)
            if r is not None and not (r[0] <= n <= r[1]):
                return False
        return self.window.contains(*self.bidegree(label))

    def basis(self) -> list[Label]:
        out = []
        for f in self.families:
            ranges = []
            for k, name in enumerate(f.params):
                r = self.window.param_range(name)
                if r is None and f.bounds and f.bounds[k] != (None, None):
                    lo, hi = f.bounds[k]
                    if lo is not None and hi is not None:
                        r = (lo, hi)
                if r is None:
                    raise ValueError(f"parameter {name!r} of {f.symbol!r} is unbounded in the window")
                ranges.append(range(r[0], r[1] + 1))
            for params in product(*ranges):
                if f.admits(params) and self.window.contains(*f.bidegree(params)):
                    out.append((f.symbol, tuple(params)))
        out.sort()
        return out

    def cells(self) -> dict[tuple[int, int], list[Label]]:
        out: dict = {}
        for lab in self.basis():
            out.setdefault(self.bidegree(lab), []).append(lab)
        return dict(sorted(out.items()))

    def cell(self, p: int, q: int) -> list[Label]:
        return self.cells().get((p, q), [])

    def with_window(self, window: DegreeWindow) -> "BigradedModule":
        return replace(self, window=window)

    def fmt(self, label: Label) -> str:
        return self._fam[label[0]].fmt(label[1])

    def fmt_vec(self, v: Vec) -> str:
        if not v:
            return "0"
        R = self.R
        terms = []
        for lab in sorted(v):
            c = v[lab]
            cs = R.fmt(c)
            if cs == "1":
                terms.append(self.fmt(lab))
            elif cs == "-1":
                terms.append("-" + self.fmt(lab))
            else:
                if " " in cs:
                    cs = f"({cs})"
                terms.append(f"{cs}*{self.fmt(lab)}")
        return " + ".join(terms).replace("+ -", "- ")

    def is_bounded(self) -> bool:
        return all(not any(f.p[1:]) and not any(f.q[1:]) for f in self.families)


# ---- sparse vectors ----

def add_into(R: Ring, acc: Vec, v: Vec, c=None) -> Vec:
    for lab, x in v.items():
        if c is not None:
            x = R.mul(c, x)
        y = acc.get(lab)
        s = x if y is None else R.add(y, x)
        if R.is_zero(s):
            acc.pop(lab, None)
        else:
            acc[lab] = s
    return acc


def add_term(R: Ring, acc: Vec, lab: Label, x) -> Vec:
    y = acc.get(lab)
    s = x if y is None else R.add(y, x)
    if R.is_zero(s):
        acc.pop(lab, None)
    else:
        acc[lab] = s
    return acc


def scaled(R: Ring, v: Vec, c) -> Vec:
    if R.is_zero(c):
        return {}
    return {lab: R.mul(c, x) for lab, x in v.items()}


def vsum(R: Ring, vs: Iterable[Vec]) -> Vec:
    acc: Vec = {}
    for v in vs:
        add_into(R, acc, v)
    return acc


def basis_vec(R: Ring, lab: Label, c=None) -> Vec:
    return {lab: R.one if c is None else c}


# ---- multilinear operations ----

Rule = Callable[[tuple], Vec]


class MultiOp:
    """A multilinear operation given by its values on basis tuples.

    `rule` maps a tuple of labels to a sparse vector. Results are memoized.
    If `codomain` is set, every output label is checked against it.
    """

    def __init__(self, name: str, arity: int, shift: tuple[int, int], rule: Rule | None,
                 spec: RingSpec, codomain: BigradedModule | None = None, memo: bool = True):
        self.name = name
        self.arity = arity
        self.shift = tuple(shift)
        self.rule = rule
        self.spec = spec
        self.R = ring(spec)
        self.codomain = codomain
        self._memo: dict | None = {} if memo else None

    @property
    def is_zero(self) -> bool:
        return self.rule is None

    def on_basis(self, labels: tuple) -> Vec:
        if self.rule is None:
            return {}
        if self._memo is not None:
            hit = self._memo.get(labels)
            if hit is not None:
                return hit
        out = self.rule(labels)
        if self.codomain is not None:
            for lab in out:
                self.codomain.check(lab)
        if self._memo is not None:
            self._memo[labels] = out
        return out

    def __call__(self, *args: Vec) -> Vec:
        if len(args) != self.arity:
            raise ValueError(f"{self.name} expects {self.arity} arguments")
        if self.rule is None or any(not a for a in args):
            return {}
        R = self.R
        acc: Vec = {}
        if self.arity == 1:
            for lab, c in args[0].items():
                add_into(R, acc, self.on_basis((lab,)), c)
            return acc
        for combo in product(*(a.items() for a in args)):
            labs = tuple(l for l, _ in combo)
            out = self.on_basis(labs)
            if not out:
                continue
            c = combo[0][1]
            for _, x in combo[1:]:
                c = R.mul(c, x)
            add_into(R, acc, out, c)
        return acc

    def __repr__(self):
        return f"MultiOp({self.name}, arity={self.arity}, shift={self.shift})"


def zero_op(name: str, arity: int, shift, spec: RingSpec) -> MultiOp:
    return MultiOp(name, arity, shift, None, spec)


def table_op(name: str, arity: int, shift, spec: RingSpec, table: dict, codomain=None) -> MultiOp:
    """Operation from a finite table; absent basis tuples map to zero."""
    table = {k: v for k, v in table.items() if v}
    if not table:
        return zero_op(name, arity, shift, spec)
    return MultiOp(name, arity, shift, lambda labs: table.get(labs, {}), spec, codomain)


def shift_violations(op: MultiOp, module_in: BigradedModule, module_out: BigradedModule,
                     tuples: Iterable[tuple]) -> list:
    """Tuples whose outputs do not sit in the cell dictated by the shift."""
    bad = []
    for labs in tuples:
        p = sum(module_in.bidegree(l)[0] for l in labs) + op.shift[0]
        q = sum(module_in.bidegree(l)[1] for l in labs) + op.shift[1]
        for lab in op.on_basis(labs):
            if module_out.bidegree(lab) != (p, q):
                bad.append((labs, lab))
    return bad
