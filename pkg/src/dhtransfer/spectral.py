"""Spectral sequences of filtered complexes, page maps and E^r-equivalences.

E^r_{p} in total degree n is computed as the subquotient
    Z = F_p C_n  intersected with  d^{-1} F_{p-r} C_{n-1}
    B = (F_{p-1} C_n  intersected with  d^{-1} F_{p-r}) + (d F_{p+r-1} C_{n+1}  intersected with  F_p)
with exact kernels and Smith normal forms. Each cell keeps representing
cycles so that induced maps can be evaluated on representatives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .complexes import FilteredComplexView
from .graded import Vec, add_into
from .linalg import FGModulePresentation, MatrixE, is_surjective, smith_normal_form
from .reports import Report, Residual
from .rings import ring


@dataclass
class PageCell:
    p: int
    n: int
    r: int
    presentation: FGModulePresentation
    local: list  # indices in C_n with filtration <= p
    z_rank: int  # rank of the SNF defining Z (kernel starts after it)
    Vinv: MatrixE  # local coordinates -> kernel coordinates (rows z_rank..)
    U: MatrixE  # kernel coordinates -> quotient coordinates
    diag: list  # relation per quotient coordinate (zero for free ones)
    gens: list  # quotient coordinates that survive
    reps: list  # representing cycles (columns in C_n) for gens

    @property
    def q(self) -> int:
        return self.n - self.p

    def coords(self, R, col: list) -> list:
        """Coordinates of a cycle in Z on the surviving generators, reduced."""
        loc = [col[i] for i in self.local]
        y = self.Vinv.apply(loc)[self.z_rank:]
        u = self.U.apply(y) if y else []
        out = []
        for k in self.gens:
            d = self.diag[k]
            out.append(u[k] if R.is_zero(d) else R.divmod(u[k], d)[1])
        return out

    def torsion(self) -> list:
        return [self.diag[k] for k in self.gens]


def _restrict(M: MatrixE, rows, cols) -> MatrixE:
    return M.submatrix(rows, cols)


def page_cell(X: FilteredComplexView, r: int, p: int, n: int) -> PageCell:
    spec = X.spec
    R = ring(spec)
    filt = X.filtration
    Cn, Cm, Cp = X.labels(n), X.labels(n - 1), X.labels(n + 1)
    d_out, d_in = X.matrix(n), X.matrix(n + 1)
    local = [k for k, l in enumerate(Cn) if filt(l) <= p]
    far_rows = [k for k, l in enumerate(Cm) if filt(l) > p - r]
    A = _restrict(d_out, far_rows, local)
    SA = smith_normal_form(A)
    zr = SA.rank
    zdim = len(local) - zr
    Zcols_local = [SA.V.column(j) for j in range(zr, len(local))]

    def embed(loc_col, idx):
        col = [R.zero] * len(Cn)
        for k, c in zip(idx, loc_col):
            col[k] = c
        return col

    gens_cols = []
    # F_{p-1} part of Z
    lower = [k for k, l in enumerate(Cn) if filt(l) <= p - 1]
    if lower:
        A1 = _restrict(d_out, far_rows, lower)
        S1 = smith_normal_form(A1)
        for j in range(S1.rank, len(lower)):
            gens_cols.append(embed(S1.V.column(j), lower))
    # d(F_{p+r-1}) intersected with F_p
    up = [k for k, l in enumerate(Cp) if filt(l) <= p + r - 1]
    high_rows = [k for k, l in enumerate(Cn) if filt(l) > p]
    if up:
        A2 = _restrict(d_in, high_rows, up)
        S2 = smith_normal_form(A2)
        sub = d_in.submatrix(list(range(len(Cn))), up)
        for j in range(S2.rank, len(up)):
            gens_cols.append(sub.apply(S2.V.column(j)))
    # coordinates of the generators in the kernel basis
    Y = []
    for col in gens_cols:
        loc = [col[i] for i in local]
        Y.append(SA.Vinv.apply(loc)[zr:])
    G = MatrixE.from_columns(spec, zdim, Y) if Y else MatrixE.zeros(spec, zdim, 0)
    SG = smith_normal_form(G)
    diag = [SG.D.data[k][k] if k < SG.rank else R.zero for k in range(zdim)]
    gens = [k for k in range(zdim) if not R.is_unit(diag[k])]
    Zmat = MatrixE.from_columns(spec, len(local), Zcols_local) if zdim else MatrixE.zeros(spec, len(local), 0)
    reps = []
    for k in gens:
        loc = Zmat.apply(SG.Uinv.column(k))
        reps.append(embed(loc, local))
    pres = FGModulePresentation(spec, sum(1 for k in gens if R.is_zero(diag[k])),
                                tuple(diag[k] for k in gens if not R.is_zero(diag[k])))
    Vz = MatrixE(spec, len(local), len(local), SA.Vinv.data) if local else MatrixE.zeros(spec, 0, 0)
    return PageCell(p, n, r, pres, local, zr, Vz, SG.U, diag, gens, reps)


@dataclass
class SpectralPage:
    r: int
    view: FilteredComplexView
    cells: dict  # (p, q) -> PageCell
    valid: set  # (p, q) cells inside the validity region

    def presentation(self, p: int, q: int) -> FGModulePresentation:
        c = self.cells.get((p, q))
        return c.presentation if c else FGModulePresentation(self.view.spec, 0)

    def nonzero(self) -> dict:
        return {k: c.presentation for k, c in sorted(self.cells.items()) if not c.presentation.is_zero()}

    def to_json(self):
        out = []
        for (p, q), c in sorted(self.cells.items()):
            if (p, q) not in self.valid:
                continue
            out.append({"p": p, "q": q, **c.presentation.to_json(), "describe": c.presentation.describe()})
        return {"r": self.r, "name": self.view.name, "cells": out}


def page(X: FilteredComplexView, r: int) -> SpectralPage:
    cells = {}
    bad = set(X.invalid)
    for n in X.degree_range():
        ps = sorted({X.filtration(l) for l in X.labels(n)})
        for p in ps:
            c = page_cell(X, r, p, n)
            cells[(p, n - p)] = c
    valid = {k for k in cells if (k[0] + k[1]) not in bad}
    return SpectralPage(r, X, cells, valid)


def page_differential(E: SpectralPage, p: int, q: int) -> MatrixE:
    """d_r: E^r_{p,q} -> E^r_{p-r,q+r-1} on the chosen generators."""
    X = E.view
    R = X.R
    src = E.cells.get((p, q))
    n = p + q
    tgt = E.cells.get((p - E.r, q + E.r - 1)) or page_cell(X, E.r, p - E.r, n - 1)
    cols = []
    for z in (src.reps if src else []):
        dz = X.matrix(n).apply(z)
        cols.append(tgt.coords(R, dz))
    return MatrixE.from_columns(X.spec, len(tgt.gens), cols) if cols else MatrixE.zeros(X.spec, len(tgt.gens), 0)


# ---- maps ----

@dataclass
class FilteredMap:
    """A filtration-preserving chain map between two filtered complexes."""

    source: FilteredComplexView
    target: FilteredComplexView
    fn: Callable[[Vec], Vec]
    name: str = ""

    def apply_column(self, n: int, col) -> list:
        v = self.source.to_vec(n, col)
        return self.target.to_column(n, self.fn(v))

    def check(self) -> Report:
        S, T = self.source, self.target
        R = S.R
        rep = Report(f"filtered_map {self.name}")
        for n in S.degree_range():
            for lab in S.labels(n):
                rep.checked += 1
                x = {lab: R.one}
                fx = self.fn(x)
                lhs = T.diff(fx)
                add_into(R, lhs, self.fn(S.diff(x)), R.from_int(-1))
                if lhs:
                    rep.residuals.append(Residual("chain map", 0, 1, (lab,), lhs))
                bad = {l: c for l, c in fx.items() if T.filtration(l) > S.filtration(lab)}
                if bad:
                    rep.residuals.append(Residual("filtration", 0, 1, (lab,), bad))
        return rep


@dataclass
class PageMap:
    r: int
    source: SpectralPage
    target: SpectralPage
    matrices: dict  # (p, q) -> MatrixE (target gens x source gens)

    def cell_is_iso(self, p: int, q: int) -> bool:
        s = self.source.cells.get((p, q))
        t = self.target.cells.get((p, q))
        ps = s.presentation if s else FGModulePresentation(self.source.view.spec, 0)
        pt = t.presentation if t else FGModulePresentation(self.source.view.spec, 0)
        if ps != pt:
            return False
        if pt.is_zero():
            return True
        M = self.matrices[(p, q)]
        R = ring(self.source.view.spec)
        # append the relations of the target so surjectivity is tested modulo them
        rels = [(row, d) for row, d in enumerate(t.torsion()) if not R.is_zero(d)]
        extra = [[R.zero] * len(rels) for _ in range(M.rows)]
        for j, (row, d) in enumerate(rels):
            extra[row][j] = d
        rows = [list(M.data[i]) + extra[i] for i in range(M.rows)]
        return is_surjective(MatrixE.from_rows(M.spec, rows, M.cols + len(rels)))


def page_map(f: FilteredMap, r: int, E_src: SpectralPage | None = None, E_tgt: SpectralPage | None = None) -> PageMap:
    E_src = E_src or page(f.source, r)
    E_tgt = E_tgt or page(f.target, r)
    R = f.source.R
    mats = {}
    keys = sorted(set(E_src.cells) | set(E_tgt.cells))
    for key in keys:
        p, q = key
        n = p + q
        s = E_src.cells.get(key)
        t = E_tgt.cells.get(key)
        if t is None and f.target.labels(n):
            t = page_cell(f.target, r, p, n)
            E_tgt.cells[key] = t
        ng = len(t.gens) if t else 0
        cols = []
        for z in (s.reps if s else []):
            img = f.apply_column(n, z)
            cols.append(t.coords(R, img) if t else [])
        mats[key] = MatrixE.from_columns(f.source.spec, ng, cols) if cols else MatrixE.zeros(f.source.spec, ng, 0)
    return PageMap(r, E_src, E_tgt, mats)


@dataclass
class Certificate:
    ok: bool
    r: int
    cells: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_json(self):
        return {"ok": self.ok, "page": self.r, "cells": self.cells, "failures": self.failures, "notes": self.notes}


def is_er_equivalence(f: FilteredMap, r: int = 2) -> Certificate:
    """Whether f induces an isomorphism on E^r in every valid cell."""
    P = page_map(f, r)
    bad = set(f.source.invalid) | set(f.target.invalid)
    valid = {k for k in P.matrices if k[0] + k[1] not in bad}
    cert = Certificate(True, r)
    mapcheck = f.check()
    if not mapcheck.ok:
        cert.ok = False
        cert.notes.append(f"not a filtered chain map: {len(mapcheck.residuals)} residuals")
    for key in sorted(P.matrices):
        if key not in valid:
            continue
        p, q = key
        ps = P.source.presentation(p, q)
        pt = P.target.presentation(p, q)
        if ps.is_zero() and pt.is_zero():
            continue
        iso = P.cell_is_iso(p, q)
        entry = {"p": p, "q": q, "source": ps.describe(), "target": pt.describe(), "iso": iso}
        cert.cells.append(entry)
        if not iso:
            cert.ok = False
            cert.failures.append(entry)
    return cert


def is_e2_equivalence(f: FilteredMap) -> Certificate:
    return is_er_equivalence(f, 2)


def unfiltered(X: FilteredComplexView) -> FilteredComplexView:
    """The same complex with the trivial filtration (E^1 = homology)."""
    return FilteredComplexView(X.spec, X.degrees, lambda lab: 0, X.diff, X.fmt, X.truncated, X.name, X.invalid)


def homology_map_is_iso(f: FilteredMap, degrees=None) -> dict:
    g = FilteredMap(unfiltered(f.source), unfiltered(f.target), f.fn, f.name)
    P = page_map(g, 1)
    out = {}
    for (p, q) in sorted(P.matrices):
        n = p + q
        if degrees is not None and n not in degrees:
            continue
        out[n] = P.cell_is_iso(p, q)
    if degrees is not None:
        for n in degrees:
            out.setdefault(n, True)
    return out


def comparison_check(f: FilteredMap, r: int = 2, degrees=None) -> dict:
    """(page-r iso?, totalized map a quasi-isomorphism on the degree range?)."""
    cert = is_er_equivalence(f, r)
    hom = homology_map_is_iso(f, degrees)
    return {"page_iso": cert.ok, "quasi_iso": all(hom.values()), "degrees": hom, "certificate": cert}
