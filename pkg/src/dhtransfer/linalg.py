"""Dense exact matrices, Smith normal form and the linear algebra built on it."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .rings import Ring, RingSpec, UnsupportedRing, ring


class ComposabilityError(Exception):
    pass


@dataclass(frozen=True)
class MatrixE:
    spec: RingSpec
    rows: int
    cols: int
    data: tuple  # tuple of row tuples

    @property
    def R(self) -> Ring:
        return ring(self.spec)

    @staticmethod
    def from_rows(spec: RingSpec, rows: Sequence[Sequence[Any]], ncols: int | None = None) -> "MatrixE":
        R = ring(spec)
        data = tuple(tuple(R.coerce(v) for v in row) for row in rows)
        nc = len(data[0]) if data else (ncols or 0)
        if any(len(r) != nc for r in data):
            raise ValueError("ragged matrix")
        return MatrixE(spec, len(data), nc, data)

    @staticmethod
    def zeros(spec: RingSpec, m: int, n: int) -> "MatrixE":
        z = ring(spec).zero
        return MatrixE(spec, m, n, tuple(tuple(z for _ in range(n)) for _ in range(m)))

    @staticmethod
    def identity(spec: RingSpec, n: int) -> "MatrixE":
        R = ring(spec)
        return MatrixE(
            spec, n, n, tuple(tuple(R.one if i == j else R.zero for j in range(n)) for i in range(n))
        )

    @staticmethod
    def from_triplets(spec: RingSpec, m: int, n: int, triplets: Iterable[tuple[int, int, Any]]) -> "MatrixE":
        R = ring(spec)
        rows = [[R.zero] * n for _ in range(m)]
        for i, j, v in triplets:
            rows[i][j] = R.add(rows[i][j], R.coerce(v))
        return MatrixE(spec, m, n, tuple(tuple(r) for r in rows))

    @staticmethod
    def from_columns(spec: RingSpec, m: int, cols: Sequence[Sequence[Any]]) -> "MatrixE":
        R = ring(spec)
        rows = [[R.zero] * len(cols) for _ in range(m)]
        for j, col in enumerate(cols):
            for i in range(m):
                rows[i][j] = col[i]
        return MatrixE(spec, m, len(cols), tuple(tuple(r) for r in rows))

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def column(self, j) -> list:
        return [self.data[i][j] for i in range(self.rows)]

    def columns(self) -> list[list]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "MatrixE":
        return MatrixE(self.spec, self.cols, self.rows, tuple(zip(*self.data)) if self.rows else tuple(() for _ in range(self.cols)))

    def __matmul__(self, other: "MatrixE") -> "MatrixE":
        if self.cols != other.rows:
            raise ComposabilityError(f"shape mismatch {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        R = self.R
        out = []
        ocols = list(zip(*other.data)) if other.rows else [() for _ in range(other.cols)]
        for row in self.data:
            nz = [(k, v) for k, v in enumerate(row) if not R.is_zero(v)]
            new = []
            for col in ocols:
                acc = R.zero
                for k, v in nz:
                    w = col[k]
                    if not R.is_zero(w):
                        acc = R.add(acc, R.mul(v, w))
                new.append(acc)
            out.append(tuple(new))
        return MatrixE(self.spec, self.rows, other.cols, tuple(out))

    def apply(self, vec: Sequence) -> list:
        R = self.R
        out = []
        for row in self.data:
            acc = R.zero
            for v, w in zip(row, vec):
                if not R.is_zero(v) and not R.is_zero(w):
                    acc = R.add(acc, R.mul(v, w))
            out.append(acc)
        return out

    def __add__(self, other):
        R = self.R
        return MatrixE(
            self.spec, self.rows, self.cols,
            tuple(tuple(R.add(a, b) for a, b in zip(r1, r2)) for r1, r2 in zip(self.data, other.data)),
        )

    def __sub__(self, other):
        R = self.R
        return MatrixE(
            self.spec, self.rows, self.cols,
            tuple(tuple(R.sub(a, b) for a, b in zip(r1, r2)) for r1, r2 in zip(self.data, other.data)),
        )

    def scale(self, c) -> "MatrixE":
        R = self.R
        return MatrixE(self.spec, self.rows, self.cols, tuple(tuple(R.mul(c, a) for a in r) for r in self.data))

    def is_zero(self) -> bool:
        R = self.R
        return all(R.is_zero(v) for r in self.data for v in r)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "MatrixE":
        return MatrixE(self.spec, len(rows), len(cols), tuple(tuple(self.data[i][j] for j in cols) for i in rows))

    def to_lists(self) -> list[list]:
        return [list(r) for r in self.data]

    def fmt(self) -> list[list[str]]:
        R = self.R
        return [[R.fmt(v) for v in r] for r in self.data]


def determinant(M: MatrixE):
    """Bareiss fraction-free elimination; exact over integral domains."""
    if M.rows != M.cols:
        raise ValueError("determinant of a non-square matrix")
    R = M.R
    n = M.rows
    if n == 0:
        return R.one
    a = [list(r) for r in M.data]
    sign = R.one
    prev = R.one
    for k in range(n - 1):
        if R.is_zero(a[k][k]):
            for i in range(k + 1, n):
                if not R.is_zero(a[i][k]):
                    a[k], a[i] = a[i], a[k]
                    sign = R.neg(sign)
                    break
            else:
                return R.zero
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = R.sub(R.mul(a[i][j], a[k][k]), R.mul(a[i][k], a[k][j]))
                a[i][j] = R.exact_div(num, prev)
        prev = a[k][k]
    return R.mul(sign, a[n - 1][n - 1])


@dataclass(frozen=True)
class SNF:
    U: MatrixE
    D: MatrixE
    V: MatrixE
    Uinv: MatrixE
    Vinv: MatrixE
    rank: int

    @property
    def diagonal(self) -> list:
        return [self.D.data[i][i] for i in range(self.rank)]


def _require_euclidean(spec: RingSpec) -> Ring:
    R = ring(spec)
    if not R.euclidean:
        raise UnsupportedRing(f"{spec} has no Smith normal form path")
    return R


def smith_normal_form(M: MatrixE) -> SNF:
    """U*M*V = D with D diagonal, d_1 | d_2 | ..., U and V invertible.

    Also returns U^-1 and V^-1, maintained alongside.
    """
    R = _require_euclidean(M.spec)
    m, n = M.rows, M.cols
    A = [list(r) for r in M.data]
    U = [[R.one if i == j else R.zero for j in range(m)] for i in range(m)]
    Ui = [[R.one if i == j else R.zero for j in range(m)] for i in range(m)]
    V = [[R.one if i == j else R.zero for j in range(n)] for i in range(n)]
    Vi = [[R.one if i == j else R.zero for j in range(n)] for i in range(n)]

    # row op: row_i += c*row_j (on A and U); inverse: Ui col_j -= c*col_i
    def row_add(i, j, c):
        A[i] = [R.add(x, R.mul(c, y)) for x, y in zip(A[i], A[j])]
        U[i] = [R.add(x, R.mul(c, y)) for x, y in zip(U[i], U[j])]
        for r in Ui:
            r[j] = R.sub(r[j], R.mul(c, r[i]))

    def row_swap(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]
        for r in Ui:
            r[i], r[j] = r[j], r[i]

    def row_scale(i, u):
        A[i] = [R.mul(u, x) for x in A[i]]
        U[i] = [R.mul(u, x) for x in U[i]]
        ui = R.inv(u)
        for r in Ui:
            r[i] = R.mul(r[i], ui)

    # col op: col_i += c*col_j (on A and V); inverse: Vi row_j -= c*row_i
    def col_add(i, j, c):
        for r in A:
            r[i] = R.add(r[i], R.mul(c, r[j]))
        for r in V:
            r[i] = R.add(r[i], R.mul(c, r[j]))
        Vi[j] = [R.sub(x, R.mul(c, y)) for x, y in zip(Vi[j], Vi[i])]

    def col_swap(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]
        Vi[i], Vi[j] = Vi[j], Vi[i]

    rank = 0
    for s in range(min(m, n)):
        while True:
            best = None
            for i in range(s, m):
                row = A[i]
                for j in range(s, n):
                    v = row[j]
                    if not R.is_zero(v):
                        sz = R.size(v)
                        if best is None or sz < best[0]:
                            best = (sz, i, j)
                            if sz == 0:
                                break
                if best is not None and best[0] == 0:
                    break
            if best is None:
                break
            _, pi, pj = best
            if pi != s:
                row_swap(s, pi)
            if pj != s:
                col_swap(s, pj)
            piv = A[s][s]
            clean = True
            for i in range(s + 1, m):
                if not R.is_zero(A[i][s]):
                    q, r = R.divmod(A[i][s], piv)
                    row_add(i, s, R.neg(q))
                    if not R.is_zero(r):
                        clean = False
            for j in range(s + 1, n):
                if not R.is_zero(A[s][j]):
                    q, r = R.divmod(A[s][j], piv)
                    col_add(j, s, R.neg(q))
                    if not R.is_zero(r):
                        clean = False
            if not clean:
                continue
            bad = None
            for i in range(s + 1, m):
                for j in range(s + 1, n):
                    if not R.is_zero(A[i][j]) and not R.divides(piv, A[i][j]):
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            row_add(s, bad, R.one)
        if best is None:
            break
        u = R.unit_normal(A[s][s])
        if u != R.one:
            row_scale(s, u)
        rank += 1

    spec = M.spec
    wrap = lambda rows, a, b: MatrixE(spec, a, b, tuple(tuple(r) for r in rows))
    return SNF(wrap(U, m, m), wrap(A, m, n), wrap(V, n, n), wrap(Ui, m, m), wrap(Vi, n, n), rank)


@dataclass(frozen=True)
class FGModulePresentation:
    spec: RingSpec
    rank: int
    factors: tuple = ()

    def is_zero(self) -> bool:
        return self.rank == 0 and not self.factors

    def is_free(self) -> bool:
        return not self.factors

    def describe(self) -> str:
        R = ring(self.spec)
        parts = []
        if self.rank:
            parts.append(f"{self.spec}^{self.rank}" if self.rank > 1 else str(self.spec))
        parts += [f"{self.spec}/({R.fmt(d)})" for d in self.factors]
        return " + ".join(parts) if parts else "0"

    def to_json(self):
        R = ring(self.spec)
        return {"rank": self.rank, "torsion": [R.fmt(d) for d in self.factors]}


def kernel_basis(M: MatrixE) -> list[list]:
    S = smith_normal_form(M)
    return [S.V.column(j) for j in range(S.rank, M.cols)]


def image_basis(M: MatrixE) -> list[list]:
    S = smith_normal_form(M)
    R = M.R
    out = []
    for k in range(S.rank):
        d = S.D.data[k][k]
        out.append([R.mul(x, d) for x in S.Uinv.column(k)])
    return out


def cokernel(M: MatrixE) -> FGModulePresentation:
    S = smith_normal_form(M)
    R = M.R
    factors = tuple(d for d in S.diagonal if not R.is_unit(d))
    return FGModulePresentation(M.spec, M.rows - S.rank, factors)


@dataclass(frozen=True)
class NoSolution:
    coordinate: int
    divisor: Any
    value: Any

    def describe(self, spec: RingSpec) -> str:
        R = ring(spec)
        if R.is_zero(self.divisor):
            return f"coordinate {self.coordinate}: 0 does not divide {R.fmt(self.value)}"
        return f"coordinate {self.coordinate}: {R.fmt(self.divisor)} does not divide {R.fmt(self.value)}"


def solve_linear(M: MatrixE, b: Sequence) -> list | NoSolution:
    """Solve M x = b over the ring; NoSolution carries a divisibility witness."""
    R = _require_euclidean(M.spec)
    if len(b) != M.rows:
        raise ComposabilityError("right-hand side length mismatch")
    S = smith_normal_form(M)
    c = S.U.apply([R.coerce(v) for v in b])
    y = [R.zero] * M.cols
    for k in range(len(c)):
        d = S.D.data[k][k] if k < min(M.rows, M.cols) else R.zero
        if k < S.rank:
            if not R.divides(d, c[k]):
                return NoSolution(k, d, c[k])
            y[k] = R.exact_div(c[k], d)
        elif not R.is_zero(c[k]):
            return NoSolution(k, R.zero, c[k])
    return S.V.apply(y)


@dataclass(frozen=True)
class HomologyData:
    presentation: FGModulePresentation
    cycle_lift: MatrixE  # columns: representing cycles of the free summand
    projection: MatrixE  # retraction with projection @ cycle_lift = id
    torsion_lift: MatrixE  # columns: cycles generating the torsion summands


def homology_at(d_in: MatrixE, d_out: MatrixE, n: int | None = None) -> HomologyData:
    """Homology of C_{k+1} --d_in--> C_k --d_out--> C_{k-1} at C_k.

    `n` gives the rank of C_k when both maps are empty.
    """
    spec = d_in.spec
    R = _require_euclidean(spec)
    dim = d_in.rows if d_in.rows or n is None else n
    if d_out.cols != dim or d_in.rows != dim:
        raise ComposabilityError("d_in and d_out are not composable")
    if not (d_out @ d_in).is_zero():
        raise ComposabilityError("d_out * d_in != 0")
    So = smith_normal_form(d_out)
    r_out = So.rank
    K = [So.V.column(j) for j in range(r_out, dim)]  # cycle basis
    z = len(K)
    # coordinates of im(d_in) in the cycle basis: rows r_out.. of V^-1 * d_in
    Vi_rows = So.Vinv.data[r_out:]
    Wz = MatrixE(spec, z, dim, tuple(Vi_rows))
    X = Wz @ d_in
    Sx = smith_normal_form(X)
    r_in = Sx.rank
    Kmat = MatrixE.from_columns(spec, dim, K) if z else MatrixE.zeros(spec, dim, 0)
    gens = Kmat @ Sx.Uinv if z else Kmat  # columns generate cycles adapted to im(d_in)
    factors, tors_cols = [], []
    for k in range(r_in):
        d = Sx.D.data[k][k]
        if not R.is_unit(d):
            factors.append(d)
            tors_cols.append(gens.column(k))
    free_idx = list(range(r_in, z))
    lift = MatrixE.from_columns(spec, dim, [gens.column(k) for k in free_idx]) if free_idx else MatrixE.zeros(spec, dim, 0)
    if free_idx:
        P = Sx.U @ Wz
        proj = P.submatrix(free_idx, list(range(dim)))
    else:
        proj = MatrixE.zeros(spec, 0, dim)
    tl = MatrixE.from_columns(spec, dim, tors_cols) if tors_cols else MatrixE.zeros(spec, dim, 0)
    pres = FGModulePresentation(spec, len(free_idx), tuple(factors))
    return HomologyData(pres, lift, proj, tl)


class NotInvertible(Exception):
    pass


def inverse(M: MatrixE) -> MatrixE:
    """Inverse over the ring; raises NotInvertible unless all invariant factors are units."""
    R = _require_euclidean(M.spec)
    if M.rows != M.cols:
        raise NotInvertible("matrix is not square")
    S = smith_normal_form(M)
    if S.rank != M.rows or not all(R.is_unit(d) for d in S.diagonal):
        raise NotInvertible("matrix is not invertible over the ring")
    Dinv = MatrixE.from_triplets(M.spec, M.rows, M.rows, [(k, k, R.inv(d)) for k, d in enumerate(S.diagonal)])
    return S.V @ Dinv @ S.U


def is_surjective(M: MatrixE) -> bool:
    """Whether M: R^cols -> R^rows is onto."""
    if M.rows == 0:
        return True
    R = _require_euclidean(M.spec)
    S = smith_normal_form(M)
    return S.rank == M.rows and all(R.is_unit(d) for d in S.diagonal)
