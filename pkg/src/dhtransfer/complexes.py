"""Bicomplexes, twisted complexes, vertical homology and contractions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable

from .graded import BigradedModule, DegreeWindow, Label, MultiOp, Vec, add_into, explicit, scaled
from .linalg import (
    HomologyData, MatrixE, homology_at, inverse, smith_normal_form,
)
from .reports import Report, Residual
from .rings import ring

if TYPE_CHECKING:
    from .transfer import Contraction


class TorsionHomology(Exception):
    def __init__(self, cell, factors=()):
        self.cell = cell
        super().__init__(f"vertical homology at {cell} has torsion {list(factors)}")


class NonFreeInput(Exception):
    pass


@dataclass
class Bicomplex:
    carrier: BigradedModule
    d_h: MultiOp  # shift (-1, 0)
    d_v: MultiOp  # shift (0, -1)
    name: str = ""

    def as_twisted(self) -> "TwistedComplex":
        return TwistedComplex(self.carrier, {0: self.d_v, 1: self.d_h}, self.name)


@dataclass
class TwistedComplex:
    carrier: BigradedModule
    d: dict  # i -> MultiOp of shift (-i, i-1)
    name: str = ""


@dataclass
class TwistedMorphism:
    source: TwistedComplex
    target: TwistedComplex
    components: dict  # i -> MultiOp of shift (-i, i)
    name: str = ""

    def compose_after(self, f: "TwistedMorphism") -> "TwistedMorphism":
        """self o f with (gf)_i = sum_{j+k=i} g_j f_k."""
        R = ring(f.source.carrier.spec)
        comps = {}
        for j, gj in self.components.items():
            for k, fk in f.components.items():
                comps.setdefault(j + k, []).append((gj, fk))
        ops = {}
        for i, pairs in comps.items():
            def rule(labs, pairs=pairs):
                acc: Vec = {}
                for gj, fk in pairs:
                    add_into(R, acc, gj(fk.on_basis(labs)))
                return acc
            ops[i] = MultiOp(f"gf_{i}", 1, (-i, i), rule, f.source.carrier.spec)
        return TwistedMorphism(f.source, self.target, ops, f"{self.name}*{f.name}")


def _apply(op: MultiOp | None, v: Vec) -> Vec:
    return op(v) if op is not None and v else {}


def check_bicomplex(B: Bicomplex, basis=None) -> Report:
    """d_h^2 = 0, d_v^2 = 0 and d_h d_v + d_v d_h = 0 on every basis element."""
    R = B.carrier.R
    rep = Report(f"check_bicomplex {B.name}")
    for lab in basis if basis is not None else B.carrier.basis():
        rep.checked += 1
        x = {lab: R.one}
        h, v = B.d_h(x), B.d_v(x)
        for eq, val in (("d_h^2", B.d_h(h)), ("d_v^2", B.d_v(v)),
                        ("d_h d_v + d_v d_h", add_into(R, dict(B.d_h(v)), B.d_v(h)))):
            if val:
                rep.residuals.append(Residual(eq, 0, 1, (lab,), val))
    return rep


def check_twisted(T: TwistedComplex, i_max: int = 3, basis=None) -> Report:
    """sum_{j+k=i} d_j d_k = 0 for i <= i_max."""
    R = T.carrier.R
    rep = Report(f"check_twisted {T.name}")
    for lab in basis if basis is not None else T.carrier.basis():
        rep.checked += 1
        x = {lab: R.one}
        for i in range(i_max + 1):
            acc: Vec = {}
            for j in range(i + 1):
                add_into(R, acc, _apply(T.d.get(j), _apply(T.d.get(i - j), x)))
            if acc:
                rep.residuals.append(Residual("twisted", i, 1, (lab,), acc))
    return rep


def check_twisted_morphism(f: TwistedMorphism, i_max: int = 3, basis=None) -> Report:
    """sum_{j+k=i} f_j d_k = sum_{j+k=i} d_j f_k for i <= i_max."""
    R = f.source.carrier.R
    rep = Report(f"check_twisted_morphism {f.name}")
    for lab in basis if basis is not None else f.source.carrier.basis():
        rep.checked += 1
        x = {lab: R.one}
        for i in range(i_max + 1):
            acc: Vec = {}
            for j in range(i + 1):
                add_into(R, acc, _apply(f.components.get(j), _apply(f.source.d.get(i - j), x)))
                add_into(R, acc, _apply(f.target.d.get(j), _apply(f.components.get(i - j), x)), R.from_int(-1))
            if acc:
                rep.residuals.append(Residual("twisted_morphism", i, 1, (lab,), acc))
    return rep


# ---- totalization ----

@dataclass
class FilteredComplexView:
    """A complex with a finite basis per total degree and the filtration by p.

    Labels whose differential leaves the window basis are excluded and
    listed in `truncated`; the remaining degrees form the validity region.
    """

    spec: object
    degrees: dict  # n -> ordered labels
    filtration: Callable[[Label], int]
    diff: Callable[[Vec], Vec]
    fmt: Callable[[Label], str] = repr
    truncated: tuple = ()
    name: str = ""
    invalid: frozenset = frozenset()  # total degrees affected by truncation
    _mats: dict = field(default_factory=dict, repr=False)

    @property
    def R(self):
        return ring(self.spec)

    def labels(self, n: int) -> list:
        return self.degrees.get(n, [])

    def index(self, n: int) -> dict:
        return {lab: k for k, lab in enumerate(self.labels(n))}

    def to_column(self, n: int, v: Vec) -> list:
        idx = self.index(n)
        col = [self.R.zero] * len(idx)
        for lab, c in v.items():
            if lab not in idx:
                raise KeyError(f"{lab!r} is not in degree {n} of {self.name}")
            col[idx[lab]] = c
        return col

    def to_vec(self, n: int, col) -> Vec:
        R = self.R
        return {lab: c for lab, c in zip(self.labels(n), col) if not R.is_zero(c)}

    def matrix(self, n: int) -> MatrixE:
        """Differential C_n -> C_{n-1} in the window bases."""
        hit = self._mats.get(n)
        if hit is not None:
            return hit
        src, tgt = self.labels(n), self.index(n - 1)
        trip = []
        for j, lab in enumerate(src):
            for out, c in self.diff({lab: self.R.one}).items():
                trip.append((tgt[out], j, c))
        M = MatrixE.from_triplets(self.spec, len(tgt), len(src), trip)
        self._mats[n] = M
        return M

    def degree_range(self) -> range:
        ns = [n for n, labs in self.degrees.items() if labs]
        return range(min(ns), max(ns) + 1) if ns else range(0)

    def filtration_values(self) -> list[int]:
        return sorted({self.filtration(l) for labs in self.degrees.values() for l in labs})

    def homology(self, n: int) -> HomologyData:
        return homology_at(self.matrix(n + 1), self.matrix(n), len(self.labels(n)))

    def check(self) -> Report:
        """d^2 = 0 and d(F_m) inside F_m."""
        R = self.R
        rep = Report(f"filtered_complex {self.name}")
        for n in self.degree_range():
            for lab in self.labels(n):
                rep.checked += 1
                y = self.diff({lab: R.one})
                yy = self.diff(y)
                if yy:
                    rep.residuals.append(Residual("d^2", 0, 1, (lab,), yy))
                bad = {l: c for l, c in y.items() if self.filtration(l) > self.filtration(lab)}
                if bad:
                    rep.residuals.append(Residual("filtration", 0, 1, (lab,), bad))
        return rep


def filtered_view(module: BigradedModule, diff_ops: dict, name: str = "",
                  filtration: Callable[[Label], int] | None = None) -> FilteredComplexView:
    """Totalize a module with differentials {i: op}; the total differential is their sum."""
    R = module.R
    ops = [op for _, op in sorted(diff_ops.items()) if op is not None and not op.is_zero]
    inside = set(module.basis())

    def raw(v: Vec) -> Vec:
        acc: Vec = {}
        for op in ops:
            add_into(R, acc, op(v))
        return acc

    images = {lab: raw({lab: R.one}) for lab in inside}
    kept = set(inside)
    while True:
        drop = {lab for lab in kept if any(l not in kept for l in images[lab])}
        if not drop:
            break
        kept -= drop
    keep = sorted(kept)
    cut = sorted(inside - kept)

    def diff(v: Vec) -> Vec:
        return {l: c for l, c in raw(v).items() if l in kept}

    filt = filtration or (lambda lab: module.bidegree(lab)[0])
    degrees: dict = {}
    for lab in keep:
        degrees.setdefault(module.degree(lab), []).append(lab)
    for n in degrees:
        degrees[n].sort(key=lambda l: (filt(l), l))
    bad = frozenset(n for lab in cut for n in (module.degree(lab), module.degree(lab) - 1))
    return FilteredComplexView(module.spec, dict(sorted(degrees.items())), filt, diff, module.fmt,
                               tuple(cut), name or module.name, bad)


def totalize(X, i_max: int | None = None) -> FilteredComplexView:
    """Total complex with filtration by horizontal degree.

    Accepts a Bicomplex (d_h + d_v) or anything with `carrier` and a
    differential family `d` (twisted complexes, derived homotopy algebras).
    """
    if isinstance(X, Bicomplex):
        return filtered_view(X.carrier, {0: X.d_v, 1: X.d_h}, X.name)
    ops = {i: op for i, op in X.d.items() if i_max is None or i <= i_max}
    return filtered_view(X.carrier, ops, X.name)


# ---- vertical homology and contractions ----

def _cell_matrix(module: BigradedModule, op: MultiOp, src: list, tgt: list) -> MatrixE:
    idx = {lab: k for k, lab in enumerate(tgt)}
    trip = []
    for j, lab in enumerate(src):
        for out, c in op.on_basis((lab,)).items():
            if out not in idx:
                from .graded import WindowEscape
                raise WindowEscape(out, "while assembling a vertical differential")
            trip.append((idx[out], j, c))
    return MatrixE.from_triplets(module.spec, len(tgt), len(src), trip)


def _columns(B: Bicomplex):
    """Window cells of each column, excluding labels whose d_v leaves the window."""
    M = B.carrier
    inside = set(M.basis())
    kept = set(inside)
    while True:
        drop = {lab for lab in kept if any(l not in kept for l in B.d_v.on_basis((lab,)))}
        if not drop:
            break
        kept -= drop
    cells: dict = {}
    for lab in sorted(kept):
        p, q = M.bidegree(lab)
        cells.setdefault(p, {}).setdefault(q, []).append(lab)
    return cells, sorted(inside - kept)


@dataclass
class VerticalHomology:
    bicomplex: Bicomplex
    cells: dict  # (p, q) -> (labels, HomologyData)
    truncated: tuple = ()

    def presentation(self, p: int, q: int):
        from .linalg import FGModulePresentation
        hit = self.cells.get((p, q))
        return hit[1].presentation if hit else FGModulePresentation(self.bicomplex.carrier.spec, 0)

    def representatives(self, p: int, q: int) -> list[Vec]:
        hit = self.cells.get((p, q))
        if not hit:
            return []
        labs, hd = hit
        R = self.bicomplex.carrier.R
        out = []
        for col in hd.cycle_lift.columns() + hd.torsion_lift.columns():
            out.append({l: c for l, c in zip(labs, col) if not R.is_zero(c)})
        return out


def vertical_homology(B: Bicomplex) -> VerticalHomology:
    M = B.carrier
    cols, cut = _columns(B)
    out = {}
    for p, qs in sorted(cols.items()):
        for q, labs in sorted(qs.items()):
            below = qs.get(q - 1, [])
            above = qs.get(q + 1, [])
            d_out = _cell_matrix(M, B.d_v, labs, below)
            d_in = _cell_matrix(M, B.d_v, above, labs)
            out[(p, q)] = (labs, homology_at(d_in, d_out, len(labs)))
    return VerticalHomology(B, out, tuple(cut))


def _cell_decomposition(spec, D_out: MatrixE, D_in: MatrixE, dim: int, cell, allow_torsion=False):
    """Split C = B + Z' + S for C_in --D_in--> C --D_out--> C_out.

    Returns (S columns, Z basis adapted to im D_in, elementary divisors e_k,
    preimages s'_k in C_in with D_in s'_k = e_k z_k).
    """
    R = ring(spec)
    So = smith_normal_form(D_out)
    r = So.rank
    S_cols = [So.V.column(j) for j in range(r)]
    K = [So.V.column(j) for j in range(r, dim)]
    z = len(K)
    Si = smith_normal_form(D_in)
    r_in = Si.rank
    pre = [Si.V.column(j) for j in range(r_in)]  # complement of ker D_in
    if not z:
        return S_cols, [], [], []
    Kmat = MatrixE.from_columns(spec, dim, K)
    Bmat = D_in @ MatrixE.from_columns(spec, D_in.cols, pre) if r_in else MatrixE.zeros(spec, dim, 0)
    Y = MatrixE(spec, z, dim, tuple(So.Vinv.data[r:])) @ Bmat if r_in else MatrixE.zeros(spec, z, 0)
    Sy = smith_normal_form(Y) if r_in else None
    if Sy is None:
        return S_cols, K, [], []
    e = Sy.diagonal
    if not allow_torsion:
        bad = [d for d in e if not R.is_unit(d)]
        if bad:
            raise TorsionHomology(cell, [R.fmt(d) for d in bad])
    Z = Kmat @ Sy.Uinv
    pre_m = MatrixE.from_columns(spec, D_in.cols, pre) @ Sy.V
    return S_cols, Z.columns(), e, pre_m.columns()


def build_contraction(B: Bicomplex, small_name: str = "H_v") -> "Contraction":
    """Contraction (iota, g, h) of B onto its vertical homology.

    Per cell C_q = B_q + H_q + S_q with d_v: S_q -> B_{q-1} bijective,
    h(d_v s) = -s, h = 0 on H and S. Side conditions hold by construction.
    """
    from .transfer import Contraction

    M = B.carrier
    spec = M.spec
    R = M.R
    cols, cut = _columns(B)
    fams = []
    iota_t: dict = {}
    g_t: dict = {}
    h_t: dict = {}
    for p, qs in sorted(cols.items()):
        dec = {}
        for q, labs in sorted(qs.items()):
            below, above = qs.get(q - 1, []), qs.get(q + 1, [])
            D_out = _cell_matrix(M, B.d_v, labs, below)
            D_in = _cell_matrix(M, B.d_v, above, labs)
            dec[q] = _cell_decomposition(spec, D_out, D_in, len(labs), (p, q))
        for q, labs in sorted(qs.items()):
            S_cols, Z, e, _ = dec[q]
            nb = len(e)
            H = Z[nb:]
            # boundary basis b_k = e_k z_k = d_v s'_k
            Bcols = []
            if nb:
                Bcols = [[R.mul(c, e[k]) for c in Z[k]] for k in range(nb)]
            Pcols = Bcols + H + S_cols
            if len(Pcols) != len(labs):
                raise TorsionHomology((p, q), ["rank mismatch"])
            P = MatrixE.from_columns(spec, len(labs), Pcols) if labs else MatrixE.zeros(spec, 0, 0)
            Pinv = inverse(P) if labs else P
            small_labs = []
            for k, col in enumerate(H):
                sym = f"H{p}_{q}_{k}"
                disp = " + ".join(M.fmt(l) for l, c in zip(labs, col) if not R.is_zero(c))
                fams.append(explicit(sym, p, q, f"[{disp}]"))
                s_lab = (sym, ())
                small_labs.append(s_lab)
                iota_t[(s_lab,)] = {l: c for l, c in zip(labs, col) if not R.is_zero(c)}
            for j, lab in enumerate(labs):
                coords = [Pinv.data[i][j] for i in range(len(labs))]
                g_t[(lab,)] = {small_labs[k]: coords[nb + k] for k in range(len(H)) if not R.is_zero(coords[nb + k])}
                hv: Vec = {}
                if nb:
                    up_labs = qs.get(q + 1, [])
                    s_pre = dec_pre(dec, q)
                    for k in range(nb):
                        ck = coords[k]
                        if R.is_zero(ck):
                            continue
                        # D_in s'_k = e_k z_k = b_k
                        for l, c in zip(up_labs, s_pre[k]):
                            if not R.is_zero(c):
                                add_into(R, hv, {l: R.neg(R.mul(ck, c))})
                h_t[(lab,)] = hv
    small = BigradedModule(spec, tuple(fams), DegreeWindow((min(cols, default=0), max(cols, default=0))), small_name)
    from .graded import table_op
    iota = table_op("iota", 1, (0, 0), spec, iota_t)
    g = table_op("g", 1, (0, 0), spec, g_t)
    h = table_op("h", 1, (0, 1), spec, h_t)
    c = Contraction(B, small, iota, g, h)
    c.truncated = tuple(cut)
    return c


def dec_pre(dec: dict, q: int) -> list:
    """Preimages s'_k in degree q+1 of the boundary basis of degree q."""
    return dec[q][3]


def check_contraction(c, basis=None) -> Report:
    """g iota = id, iota g - id = d_v h + h d_v, h iota = 0, g h = 0, h h = 0."""
    B = c.big
    R = B.carrier.R
    rep = Report("check_contraction")
    for lab in c.small.basis():
        rep.checked += 1
        x = {lab: R.one}
        y = c.g(c.iota(x))
        add_into(R, y, x, R.from_int(-1))
        if y:
            rep.residuals.append(Residual("g iota - id", 0, 1, (lab,), y))
        hi = c.h(c.iota(x))
        if hi:
            rep.residuals.append(Residual("h iota", 0, 1, (lab,), hi))
    for lab in basis if basis is not None else [l for l in B.carrier.basis() if l not in getattr(c, "truncated", ())]:
        rep.checked += 1
        x = {lab: R.one}
        lhs = c.iota(c.g(x))
        add_into(R, lhs, x, R.from_int(-1))
        add_into(R, lhs, B.d_v(c.h(x)), R.from_int(-1))
        add_into(R, lhs, c.h(B.d_v(x)), R.from_int(-1))
        if lhs:
            rep.residuals.append(Residual("iota g - id - d_v h - h d_v", 0, 1, (lab,), lhs))
        for eq, val in (("g h", c.g(c.h(x))), ("h h", c.h(c.h(x)))):
            if val:
                rep.residuals.append(Residual(eq, 0, 1, (lab,), val))
    return rep


# ---- Cartan-Eilenberg resolutions over PIDs ----

@dataclass
class CEResolution:
    source: Bicomplex  # one-column complex C
    resolution: Bicomplex  # columns p = 0, 1
    augmentation: MultiOp  # resolution -> C, shift (0, 0)
    pieces: list  # (kind, degree, divisor)


def ce_resolution(C: Bicomplex) -> CEResolution:
    """Two-column Cartan-Eilenberg resolution of a one-column complex over a PID.

    C splits into elementary pieces: free cycles, and pairs s -> e z. A free
    cycle resolves to itself. A pair with e a unit is already acyclic and is
    kept. A pair with e a non-unit resolves as
        column 0:  a -> b  (degrees q+1, q) and u in degree q,
        column 1:  c in degree q with d_h(c) = b - e u,
    with augmentation a -> s, u -> z, b -> e z, c -> 0.
    """
    M = C.carrier
    spec = M.spec
    R = ring(spec)
    if not R.euclidean:
        from .rings import UnsupportedRing
        raise UnsupportedRing(f"{spec} is not a supported PID")
    if not C.d_h.is_zero:
        raise NonFreeInput("input must be a one-column complex (d_h = 0)")
    cols, cut = _columns(C)
    if cut:
        raise NonFreeInput(f"differential leaves the window at {cut[:3]}")
    if set(cols) - {0}:
        raise NonFreeInput("input must be concentrated in horizontal degree 0")
    qs = cols.get(0, {})
    fams = []
    dv_t: dict = {}
    dh_t: dict = {}
    aug_t: dict = {}
    pieces = []

    def vec(labs, col):
        return {l: c for l, c in zip(labs, col) if not R.is_zero(c)}

    for q in sorted(qs):
        labs = qs[q]
        below, above = qs.get(q - 1, []), qs.get(q + 1, [])
        D_out = _cell_matrix(M, C.d_v, labs, below)
        D_in = _cell_matrix(M, C.d_v, above, labs)
        _, Z, e, pre = _cell_decomposition(spec, D_out, D_in, len(labs), (0, q), allow_torsion=True)
        for k, zcol in enumerate(Z):
            z = vec(labs, zcol)
            if k >= len(e):
                sym = f"u{q}_{k}"
                fams.append(explicit(sym, 0, q, sym))
                aug_t[((sym, ()),)] = z
                pieces.append(("free", q, None))
                continue
            s = vec(above, pre[k])
            ek = e[k]
            tag = f"{q}_{k}"
            if R.is_unit(ek):
                fams += [explicit(f"s{tag}", 0, q + 1), explicit(f"w{tag}", 0, q)]
                dv_t[((f"s{tag}", ()),)] = {(f"w{tag}", ()): R.one}
                aug_t[((f"s{tag}", ()),)] = s
                aug_t[((f"w{tag}", ()),)] = scaled(R, z, ek)
                pieces.append(("acyclic", q, R.fmt(ek)))
                continue
            a, u, b, c = (f"a{tag}", ()), (f"u{tag}", ()), (f"b{tag}", ()), (f"c{tag}", ())
            fams += [explicit(a[0], 0, q + 1), explicit(u[0], 0, q), explicit(b[0], 0, q), explicit(c[0], 1, q)]
            dv_t[(a,)] = {b: R.one}
            dh_t[(c,)] = {b: R.one, u: R.neg(ek)}
            aug_t[(a,)] = s
            aug_t[(u,)] = z
            aug_t[(b,)] = scaled(R, z, ek)
            pieces.append(("torsion", q, R.fmt(ek)))
    from .graded import table_op
    mod = BigradedModule(spec, tuple(fams), DegreeWindow((0, 1)), f"CE({C.name})")
    res = Bicomplex(mod, table_op("d_h", 1, (-1, 0), spec, dh_t), table_op("d_v", 1, (0, -1), spec, dv_t),
                    f"CE({C.name})")
    aug = table_op("epsilon", 1, (0, 0), spec, aug_t)
    return CEResolution(C, res, aug, pieces)


def one_column_complex(spec, generators: dict, differential: dict, name: str = "C") -> Bicomplex:
    """One-column complex from {name: degree} and {name: {name: coefficient}}."""
    from .graded import table_op
    R = ring(spec)
    fams = tuple(explicit(g, 0, q, g) for g, q in sorted(generators.items(), key=lambda kv: (kv[1], kv[0])))
    mod = BigradedModule(spec, fams, DegreeWindow((0, 0)), name)
    table = {}
    for src, img in differential.items():
        v = {(t, ()): R.coerce(c) for t, c in img.items() if not R.is_zero(R.coerce(c))}
        for t in v:
            if generators[t[0]] != generators[src] - 1:
                raise NonFreeInput(f"d({src}) has a term {t[0]} of the wrong degree")
        table[((src, ()),)] = v
    from .graded import zero_op
    return Bicomplex(mod, zero_op("d_h", 1, (-1, 0), spec), table_op("d_v", 1, (0, -1), spec, table, mod), name)
