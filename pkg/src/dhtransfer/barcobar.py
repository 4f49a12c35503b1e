"""Bar and good cobar constructions for derived A-infinity algebras, and strictification.

Bar words are delta^i [x_1|...|x_r]. Internally they are elements of the
tensor coalgebra on the suspension sA with a degree-0 delta, so the bar
differential is D = sum_k delta^{-k} D_k where D_k is the classical bar
coderivation built from m_{k,t} (m_{k,1} = d_k) through
b = -s m (s^{-1})^{tensor t}, so that d_{sA} = -s d s^{-1}.

Cobar letters are eps^e s^{-1}(delta^i w) with e in {0, 1}. On a letter,
d = -s^{-1} D - (deconcatenation, delta powers split as j + k = i)
    - eps s^{-1}(delta^{i-1} w),
extended as an odd derivation; eps is the odd derivation adding e = 1.
With these signs an algebra map out of the cobar is the same as a solution
of d_A a + a D + a * a = 0, which matches the infinity-morphism equation.
Truncation is by weight: i + r - 1 per letter plus (letters - 1) per
monomial. Neither d nor eps increases it.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct
from typing import Iterable

from .algebra import ASSOC, DerivedHomotopyAlgebra, DerivedInftyMorphism, FlavorMismatch
from .graded import Label, Vec, add_into
from .linalg import MatrixE, homology_at
from .rings import ring


class LaurentCarrier(Exception):
    """Strictification needs a finite basis."""


def _sg(e: int) -> int:
    return -1 if e & 1 else 1


@dataclass(frozen=True, order=True)
class BarWord:
    i: int
    word: tuple  # labels

    @property
    def weight(self) -> int:
        return self.i + len(self.word) - 1


def _component(A: DerivedHomotopyAlgebra, k: int, t: int):
    if t == 1:
        return A.d.get(k)
    return A.ops.get((k, t))


def _suspension_exponent(degs) -> int:
    """Sign exponent of (s^{-1})^{tensor t} on s x_1 ... s x_t."""
    t = len(degs)
    return sum((t - 1 - j) * (d + 1) for j, d in enumerate(degs))


class BarCoalgebra:
    def __init__(self, A: DerivedHomotopyAlgebra, W: int):
        if A.flavor not in (ASSOC, "Comm"):
            raise FlavorMismatch("the bar construction is implemented for the associative flavor")
        self.A = A
        self.W = W
        self.R = A.R
        self.module = A.carrier
        self._comps = {}
        for (k, t) in list(A.ops) + [(k, 1) for k in A.d]:
            op = _component(A, k, t)
            if op is not None and not op.is_zero:
                self._comps.setdefault(k, []).append((t, op))
        self._memo: dict = {}

    # degrees
    def sdeg(self, lab: Label) -> int:
        return self.module.degree(lab) + 1

    def degree(self, bw: BarWord) -> int:
        return sum(self.module.degree(x) for x in bw.word) + len(bw.word) - 1

    def bidegree(self, bw: BarWord) -> tuple[int, int]:
        ps = sum(self.module.bidegree(x)[0] for x in bw.word)
        qs = sum(self.module.bidegree(x)[1] for x in bw.word)
        return -bw.i + ps, bw.i + len(bw.word) - 1 + qs

    def b_op(self, op, labs) -> Vec:
        """-s m (s^{-1})^{tensor t} on a basis tuple; returns the output letters."""
        out = op.on_basis(labs)
        e = _suspension_exponent([self.module.degree(x) for x in labs]) + 1
        if not out or not e & 1:
            return out
        return {k: self.R.neg(v) for k, v in out.items()}

    def differential_basis(self, bw: BarWord) -> dict:
        hit = self._memo.get(bw)
        if hit is not None:
            return hit
        R = self.R
        acc: dict = {}
        w = bw.word
        r = len(w)
        for k, ops in self._comps.items():
            if k > bw.i:
                continue
            for t, op in ops:
                if t > r:
                    continue
                pre = 0
                for l in range(0, r - t + 1):
                    out = self.b_op(op, w[l : l + t])
                    sign = _sg(pre)
                    for lab, c in out.items():
                        nw = BarWord(bw.i - k, w[:l] + (lab,) + w[l + t :])
                        add_into(R, acc, {nw: c}, R.from_int(sign))
                    pre += self.sdeg(w[l])
        self._memo[bw] = acc
        return acc

    def differential(self, v: dict) -> dict:
        acc: dict = {}
        for bw, c in v.items():
            add_into(self.R, acc, self.differential_basis(bw), c)
        return acc

    def words(self, basis: Iterable[Label] | None = None, W: int | None = None) -> list[BarWord]:
        W = self.W if W is None else W
        basis = list(basis) if basis is not None else self.module.basis()
        out = []
        for r in range(1, W + 2):
            for w in iproduct(basis, repeat=r):
                for i in range(0, W - r + 2):
                    out.append(BarWord(i, w))
        return out


def bar(A: DerivedHomotopyAlgebra, W: int) -> BarCoalgebra:
    return BarCoalgebra(A, W)


def check_bar_square(Bc: BarCoalgebra, words: Iterable[BarWord]) -> list:
    """Words on which D^2 is nonzero, with the value."""
    bad = []
    for bw in words:
        v = Bc.differential(Bc.differential_basis(bw))
        if v:
            bad.append((bw, v))
    return bad


class BarMorphism:
    """Coalgebra map B(f): split into consecutive blocks, apply f blockwise, distribute delta powers."""

    def __init__(self, f: DerivedInftyMorphism, source: BarCoalgebra, target: BarCoalgebra):
        self.f = f
        self.source = source
        self.target = target
        self.R = source.R
        self._memo: dict = {}

    def F(self, k: int, labs: tuple) -> Vec:
        op = self.f.components.get((k, len(labs)))
        if op is None or op.is_zero:
            return {}
        out = op.on_basis(labs)
        e = _suspension_exponent([self.source.module.degree(x) for x in labs])
        if not out or not e & 1:
            return out
        return {x: self.R.neg(v) for x, v in out.items()}

    def apply_basis(self, bw: BarWord) -> dict:
        hit = self._memo.get(bw)
        if hit is not None:
            return hit
        R = self.R
        acc: dict = {}
        w = bw.word
        ks = sorted({k for (k, _) in self.f.components})

        def rec(pos, budget, letters, coef):
            if pos == len(w):
                for lets in iproduct(*[list(x.items()) for x in letters]):
                    c = coef
                    for _, v in lets:
                        c = R.mul(c, v)
                    nw = BarWord(budget, tuple(l for l, _ in lets))
                    add_into(R, acc, {nw: c})
                return
            for t in range(1, len(w) - pos + 1):
                for k in ks:
                    if k > budget:
                        continue
                    out = self.F(k, w[pos : pos + t])
                    if out:
                        rec(pos + t, budget - k, letters + [out], coef)

        rec(0, bw.i, [], R.one)
        self._memo[bw] = acc
        return acc

    def apply(self, v: dict) -> dict:
        acc: dict = {}
        for bw, c in v.items():
            add_into(self.R, acc, self.apply_basis(bw), c)
        return acc


def bar_morphism(f: DerivedInftyMorphism, W: int) -> BarMorphism:
    return BarMorphism(f, BarCoalgebra(f.source, W), BarCoalgebra(f.target, W))


def check_bar_morphism(Bf: BarMorphism, words: Iterable[BarWord]) -> list:
    bad = []
    R = Bf.R
    for bw in words:
        lhs = Bf.target.differential(Bf.apply_basis(bw))
        add_into(R, lhs, Bf.apply(Bf.source.differential_basis(bw)), R.from_int(-1))
        if lhs:
            bad.append((bw, lhs))
    return bad


# ---------------------------------------------------------------------------
# Good cobar

@dataclass(frozen=True, order=True)
class Letter:
    e: int  # 0 or 1: power of eps
    bw: BarWord


class Cobar:
    """Free algebra on eps^e s^{-1} B with the cobar differential and eps."""

    def __init__(self, Bc: BarCoalgebra):
        self.B = Bc
        self.R = Bc.R
        self._dl: dict = {}

    def letter_degree(self, g: Letter) -> int:
        return self.B.degree(g.bw) - g.e

    def letter_bidegree(self, g: Letter) -> tuple[int, int]:
        p, q = self.B.bidegree(g.bw)
        return p - g.e, q

    def letter_weight(self, g: Letter) -> int:
        return g.bw.weight

    def degree(self, mono: tuple) -> int:
        return sum(self.letter_degree(g) for g in mono)

    def hdeg(self, mono: tuple) -> int:
        return sum(self.letter_bidegree(g)[0] for g in mono)

    def weight(self, mono: tuple) -> int:
        return sum(self.letter_weight(g) for g in mono) + len(mono) - 1

    def _cdeg(self, bw: BarWord) -> int:
        return sum(self.B.sdeg(x) for x in bw.word)

    def d_letter(self, g: Letter) -> dict:
        hit = self._dl.get(g)
        if hit is not None:
            return hit
        R = self.R
        acc: dict = {}
        if g.e == 0:
            bw = g.bw
            for bw2, c in self.B.differential_basis(bw).items():
                add_into(R, acc, {(Letter(0, bw2),): R.neg(c)})
            w = bw.word
            pre = 0
            for l in range(1, len(w)):
                pre += self.B.sdeg(w[l - 1])
                for j in range(0, bw.i + 1):
                    m = (Letter(0, BarWord(j, w[:l])), Letter(0, BarWord(bw.i - j, w[l:])))
                    add_into(R, acc, {m: R.from_int(-_sg(pre))})
            if bw.i >= 1:
                add_into(R, acc, {(Letter(1, BarWord(bw.i - 1, bw.word)),): R.from_int(-1)})
        else:
            inner = self.d_letter(Letter(0, g.bw))
            acc = {}
            add_into(R, acc, self.eps(inner), R.from_int(-1))
        self._dl[g] = acc
        return acc

    def _derivation(self, v: dict, on_letter) -> dict:
        R = self.R
        acc: dict = {}
        for mono, c in v.items():
            pre = 0
            for k, g in enumerate(mono):
                for m2, c2 in on_letter(g).items():
                    nm = mono[:k] + m2 + mono[k + 1 :]
                    add_into(R, acc, {nm: R.mul(c, c2)}, R.from_int(_sg(pre)))
                pre += self.letter_degree(g)
        return acc

    def eps(self, v: dict) -> dict:
        one = self.R.one
        return self._derivation(v, lambda g: {} if g.e else {(Letter(1, g.bw),): one})

    def d(self, v: dict) -> dict:
        return self._derivation(v, self.d_letter)

    def total(self, v: dict) -> dict:
        out = self.d(v)
        add_into(self.R, out, self.eps(v))
        return out

    def is_good(self, mono: tuple) -> bool:
        """Every contiguous sub-monomial has horizontal degree >= 0."""
        ps = [self.letter_bidegree(g)[0] for g in mono]
        for a in range(len(ps)):
            s = 0
            for b in range(a, len(ps)):
                s += ps[b]
                if s < 0:
                    return False
        return True


def good_cobar(Bc: BarCoalgebra) -> Cobar:
    return Cobar(Bc)


@dataclass
class CobarCells:
    """Good monomials of weight <= W, grouped by total degree."""

    cobar: Cobar
    W: int
    degrees: dict  # n -> sorted list of monomials
    n_max: int

    def index(self, n):
        return {m: k for k, m in enumerate(self.degrees.get(n, []))}


def _letters(C: Cobar, basis, W: int, deg_max: int) -> list[Letter]:
    M = C.B.module
    degs = {x: M.degree(x) for x in basis}
    dmin = min(degs.values()) if degs else 0
    out = []

    def rec(word, dsum):
        r = len(word)
        if r:
            for i in range(0, W - (r - 1) + 1):
                for e in (0, 1):
                    g = Letter(e, BarWord(i, tuple(word)))
                    if C.letter_degree(g) <= deg_max:
                        out.append(g)
        if r >= W + 1:
            return
        for x in basis:
            nd = dsum + degs[x] + 1
            # with nonnegative degrees, longer words only get larger degree
            if dmin >= 0 and nd - 2 > deg_max:
                continue
            rec(word + [x], nd)

    rec([], 0)
    return sorted(set(out))


def cobar_cells(C: Cobar, W: int, n_max: int, basis=None, fast: bool = True) -> CobarCells:
    """Enumerate good monomials of weight <= W and total degree <= n_max."""
    basis = list(basis) if basis is not None else C.B.module.basis()
    letters = [g for g in _letters(C, basis, W, n_max + 1) if C.letter_bidegree(g)[0] >= 0 or not fast]
    ldeg = {g: C.letter_degree(g) for g in letters}
    lw = {g: C.letter_weight(g) for g in letters}
    dmin = min(ldeg.values()) if ldeg else 1
    degrees: dict = {}

    def rec(mono, deg, wt):
        if mono:
            good = C.is_good(mono)
            if good or not fast:
                degrees.setdefault(deg, []).append(mono)
            if not good and fast:
                return
        for g in letters:
            nw = wt + lw[g] + (1 if mono else 0)
            if nw > W:
                continue
            nd = deg + ldeg[g]
            if dmin >= 1 and nd > n_max + 1:
                continue
            if len(mono) + 1 > W + 1:
                continue
            rec(mono + (g,), nd, nw)

    rec((), 0, 0)
    for n in degrees:
        degrees[n] = sorted(degrees[n])
    return CobarCells(C, W, degrees, n_max)


def negative_ideal_cells(C: Cobar, W: int, n_max: int, basis=None) -> dict:
    """Span closure: per degree, the monomials in the ideal generated by negative horizontal degree.

    Seeds are all monomials of negative horizontal degree; the span is closed
    under multiplication by letters on both sides and under eps, within the
    truncation. Returns n -> set of monomials spanning the ideal cell
    (eps images are sums; the closure is kept as a row-echelon span).
    """
    basis = list(basis) if basis is not None else C.B.module.basis()
    full = cobar_cells(C, W, n_max, basis, fast=False)
    allm = {m for ms in full.degrees.values() for m in ms}
    R = C.R
    span: dict = {}  # pivot monomial -> vector

    def reduce(v):
        v = dict(v)
        while v:
            piv = max(v)
            if piv not in span:
                return v
            c = v[piv]
            add_into(R, v, span[piv], R.neg(c))
        return v

    def insert(v):
        v = reduce({m: c for m, c in v.items() if m in allm})
        if not v:
            return False
        piv = max(v)
        c = v[piv]
        if not R.is_unit(c):
            raise ValueError("non-unit pivot in ideal closure")
        span[piv] = {m: R.mul(R.inv(c), x) for m, x in v.items()}
        return True

    queue = [{m: R.one} for m in sorted(allm) if C.hdeg(m) < 0]
    letters = sorted({g for m in allm for g in m})
    while queue:
        v = queue.pop()
        if not insert(v):
            continue
        queue.append(C.eps(v))
        for g in letters:
            queue.append({(g,) + m: c for m, c in v.items()})
            queue.append({m + (g,): c for m, c in v.items()})
    out: dict = {}
    for n, ms in full.degrees.items():
        out[n] = {m for m in ms if not reduce({m: R.one})}
    return out


# ---------------------------------------------------------------------------
# Strictification

@dataclass
class StrictifyReport:
    W: int
    n_max: int
    homology: dict  # n -> presentation json
    target_homology: dict
    chain_map_failures: list
    multiplicative_failures: list
    sizes: dict

    def matches(self, n) -> bool:
        return self.homology.get(n) == self.target_homology.get(n)


def _theta(S, v: dict) -> Vec:
    A = S.target
    R = A.R
    mu = A.ops.get((0, 2))
    acc: Vec = {}
    for mono, c in v.items():
        cur = S.theta_letter(mono[0])
        for g in mono[1:]:
            if not cur:
                break
            cur = mu(cur, S.theta_letter(g)) if mu is not None else {}
        add_into(R, acc, cur, c)
    return acc


def _homology_presentations(C: Cobar, cells: CobarCells, n_max: int) -> dict:
    spec = C.B.module.spec
    R = C.R
    mats = {}

    def matrix(n):
        if n in mats:
            return mats[n]
        src = cells.degrees.get(n, [])
        tgt = cells.index(n - 1)
        trip = []
        for j, m in enumerate(src):
            for m2, c in C.total({m: R.one}).items():
                k = tgt.get(m2)
                if k is not None:
                    trip.append((k, j, c))
                elif C.is_good(m2):
                    raise RuntimeError(f"differential leaves the truncation at {m2}")
        mats[n] = MatrixE.from_triplets(spec, len(tgt), len(src), trip)
        return mats[n]

    out = {}
    lo = min(cells.degrees) if cells.degrees else 0
    for n in range(min(lo, 0), n_max + 1):
        hd = homology_at(matrix(n + 1), matrix(n), len(cells.degrees.get(n, [])))
        out[n] = hd.presentation.to_json()
    return out


def target_homology(A: DerivedHomotopyAlgebra, n_max: int) -> dict:
    from .algebra import to_split_filtered
    X = to_split_filtered(A, 0)
    out = {}
    for n in range(min(X.degree_range()[0], 0), n_max + 1):
        out[n] = X.homology(n).presentation.to_json()
    return out


class StrictifyResult:
    def __init__(self, M, f, W, n_max, C, cells, report):
        self.source = M
        self.morphism = f
        self.target = f.target
        self.W = W
        self.cobar = C
        self.cells = cells
        self.report = report

    def theta_letter(self, g: Letter) -> Vec:
        if g.e:
            d1 = self.target.d.get(1)
            base = self.theta_letter(Letter(0, g.bw))
            return d1(base) if (d1 is not None and base) else {}
        bw = g.bw
        op = self.morphism.components.get((bw.i, len(bw.word)))
        if op is None:
            return {}
        out = op.on_basis(bw.word)
        # s^{-1} F s: the suspension sign of the cogenerator projection
        e = _suspension_exponent([self.source.carrier.degree(x) for x in bw.word])
        return out if not e & 1 else {k: self.target.R.neg(v) for k, v in out.items()}

    def theta(self, v: dict) -> Vec:
        return _theta(self, v)


def strictify(f: DerivedInftyMorphism, W: int, n_max: int = 5, basis=None) -> StrictifyResult:
    """Good cobar of the bar construction of M, truncated at weight W, with theta to the target."""
    M, A = f.source, f.target
    if M.flavor not in (ASSOC, "Comm"):
        raise FlavorMismatch("strictification is implemented for the associative flavor")
    if not M.carrier.is_bounded():
        raise LaurentCarrier(f"{M.carrier.name} has parametric (Laurent) families; strictify needs a finite basis")
    Bc = BarCoalgebra(M, W)
    C = Cobar(Bc)
    cells = cobar_cells(C, W, n_max + 1, basis)
    H = _homology_presentations(C, cells, n_max)
    res = StrictifyResult(M, f, W, n_max, C, cells, None)
    R = A.R
    chain_fail = []
    dA = [op for k, op in A.d.items() if k in (0, 1) and op is not None]
    if any(k > 1 for k in A.d) or any(k != (0, 2) for k in A.ops):
        raise FlavorMismatch("theta needs a strict target (d_0, d_1 and m_{0,2} only)")
    for n, ms in sorted(cells.degrees.items()):
        for m in ms:
            lhs = res.theta(_project_good(C, C.total({m: R.one})))
            th = res.theta({m: R.one})
            for op in dA:
                if th:
                    add_into(R, lhs, op(th), R.from_int(-1))
            if lhs:
                chain_fail.append((m, lhs))
    mult_fail = []
    small = [m for n in sorted(cells.degrees) for m in cells.degrees[n] if len(m) == 1][:12]
    mu = A.ops.get((0, 2))
    for a in small:
        for b in small:
            ab = a + b
            if C.weight(ab) > W:
                continue
            lhs = res.theta({ab: R.one})
            ta, tb = res.theta({a: R.one}), res.theta({b: R.one})
            rhs = mu(ta, tb) if (mu is not None and ta and tb) else {}
            add_into(R, lhs, rhs, R.from_int(-1))
            if lhs:
                mult_fail.append((ab, lhs))
    sizes = {n: len(ms) for n, ms in sorted(cells.degrees.items()) if n <= n_max + 1}
    res.report = StrictifyReport(W, n_max, H, target_homology(A, n_max), chain_fail, mult_fail, sizes)
    return res


def _project_good(C: Cobar, v: dict) -> dict:
    return {m: c for m, c in v.items() if C.is_good(m)}


def stabilization_table(f: DerivedInftyMorphism, W_max: int = 8, n_max: int = 5, basis=None) -> dict:
    """(n, W) -> homology presentation of tot of the truncated good cobar, plus stabilization data."""
    rows = {}
    target = None
    results = {}
    for W in range(0, W_max + 1):
        res = strictify(f, W, n_max, basis)
        results[W] = res
        target = res.report.target_homology
        for n, h in res.report.homology.items():
            rows.setdefault(n, {})[W] = h
    stable_from = {}
    for n, byW in rows.items():
        ws = sorted(byW)
        s = None
        for W in ws:
            if all(byW[W2] == byW[W] for W2 in ws if W2 >= W):
                s = W
                break
        stable_from[n] = s
    return {"table": rows, "target": target, "stable_from": stable_from, "results": results}


# ---------------------------------------------------------------------------
# Dual numbers Koszul complex

def dual_numbers_koszul(weights: Iterable[int], spec=None, kappa: int = 1) -> dict:
    """Homology of the Koszul complex D (x)_kappa D^dual of the dual numbers, weight by weight.

    D = k[eps]/(eps^2) with eps of weight 1; D^dual has basis delta^r of weight r
    with deconcatenation coproduct; kappa(delta) = kappa * eps and kappa vanishes
    on other delta^r. The differential d(a (x) delta^r) = sum a*kappa(delta^i) (x) delta^(r-i)
    is assembled from the product table of D, so d(1 (x) delta^r) = eps (x) delta^(r-1).
    Returns weight -> {H0, H-1, acyclic, d_squared_zero}.
    """
    from .rings import Integers
    spec = spec or Integers()
    R = ring(spec)
    product = {("1", "1"): "1", ("1", "eps"): "eps", ("eps", "1"): "eps"}  # eps * eps = 0
    wt = {"1": 0, "eps": 1}

    def kap(i):
        return {"eps": R.from_int(kappa)} if i == 1 else {}

    def d(a, r):
        out: dict = {}
        for i in range(r + 1):  # delta^r -> delta^i (x) delta^(r-i)
            for b, c in kap(i).items():
                ab = product.get((a, b))
                if ab is not None:
                    key = (ab, r - i)
                    out[key] = R.add(out.get(key, R.zero), c)
        return {k: v for k, v in out.items() if not R.is_zero(v)}

    out = {}
    for w in weights:
        # homological degree of a (x) delta^r is -wt(a); total weight wt(a) + r = w
        cells = {n: [(a, w - wt[a]) for a in ("1", "eps") if -wt[a] == n and w - wt[a] >= 0] for n in (0, -1)}

        def mat(n):
            src, tgt = cells.get(n, []), cells.get(n - 1, [])
            idx = {x: k for k, x in enumerate(tgt)}
            trip = [(idx[y], j, c) for j, x in enumerate(src) for y, c in d(*x).items()]
            return MatrixE.from_triplets(spec, len(tgt), len(src), trip)

        sq = True
        for x in cells[0] + cells[-1]:
            dd: dict = {}
            for y, c in d(*x).items():
                for z, c2 in d(*y).items():
                    dd[z] = R.add(dd.get(z, R.zero), R.mul(c, c2))
            sq = sq and all(R.is_zero(v) for v in dd.values())
        h0 = homology_at(MatrixE.zeros(spec, len(cells[0]), 0), mat(0), len(cells[0])).presentation
        h1 = homology_at(mat(0), MatrixE.zeros(spec, 0, len(cells[-1])), len(cells[-1])).presentation
        out[w] = {"H0": h0.to_json(), "H-1": h1.to_json(), "acyclic": h0.is_zero() and h1.is_zero(),
                  "d_squared_zero": sq}
    return out
