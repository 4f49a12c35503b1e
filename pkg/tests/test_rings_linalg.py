import itertools
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from dhtransfer.linalg import (ComposabilityError, MatrixE, NoSolution, cokernel, homology_at, image_basis,
                               kernel_basis, smith_normal_form, solve_linear)
from dhtransfer.properties import random_matrix, snf_case
from dhtransfer.signs import koszul_sign, multi_shuffles, shuffles
from dhtransfer.rings import (Integers, IntegersMod, NotDivisible, PrimeField, RationalPolynomials, Rationals,
                              RingError, parse_ring, ring)

ZZ, QQ, QT = Integers(), Rationals(), RationalPolynomials("t")


# ---------------------------------------------------------------- rings

def test_ring_spec_validation():
    with pytest.raises(RingError):
        IntegersMod(1)
    with pytest.raises(RingError):
        PrimeField(4)
    assert parse_ring("GF(5)") == PrimeField(5)
    assert parse_ring("QQ[t]") == QT
    assert parse_ring("ZZ/6") == IntegersMod(6)


def _elements(spec):
    R = ring(spec)
    if spec.kind == "QQt":
        coeff = st.fractions(min_value=-3, max_value=3, max_denominator=3)
        return st.lists(coeff, max_size=3).map(R._trim)
    if spec.kind == "QQ":
        return st.fractions(min_value=-20, max_value=20, max_denominator=7)
    return st.integers(-50, 50).map(R.from_int)


RING_SPECS = [ZZ, QQ, PrimeField(7), IntegersMod(6), QT]


@pytest.mark.parametrize("spec", RING_SPECS, ids=str)
def test_ring_axioms(spec):
    R = ring(spec)
    el = _elements(spec)

    @settings(max_examples=60, deadline=None)
    @given(el, el, el)
    def check(a, b, c):
        assert R.add(a, b) == R.add(b, a)
        assert R.mul(a, b) == R.mul(b, a)
        assert R.mul(a, R.add(b, c)) == R.add(R.mul(a, b), R.mul(a, c))
        assert R.mul(R.mul(a, b), c) == R.mul(a, R.mul(b, c))
        assert R.is_zero(R.add(a, R.neg(a)))
        assert R.mul(a, R.one) == a
        if R.euclidean and not R.is_zero(b):
            assert R.exact_div(R.mul(a, b), b) == a

    check()


def test_exact_division_errors():
    R = ring(ZZ)
    assert R.exact_div(6, 3) == 2
    with pytest.raises(NotDivisible):
        R.exact_div(1, 2)
    P = ring(QT)
    t = P.parse("t")
    assert P.exact_div(P.mul(t, t), t) == t
    assert not P.divides(t, P.one)


# ---------------------------------------------------------------- Smith normal form

def test_snf_identity():
    I = MatrixE.identity(ZZ, 2)
    S = smith_normal_form(I)
    assert S.D.data == I.data
    assert S.U.data == I.data and S.V.data == I.data


@pytest.mark.parametrize("p", [2, 3, 7])
def test_snf_one_by_one(p):
    assert smith_normal_form(MatrixE.from_rows(ZZ, [[p]])).D.data == ((p,),)


def test_snf_random_4x4_minors():
    rng = random.Random(4)
    for _ in range(10):
        M = MatrixE.from_rows(ZZ, [[rng.randint(-9, 9) for _ in range(4)] for _ in range(4)])
        assert snf_case(M)["ok"]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([ZZ, QT]))
def test_snf_property(seed, spec):
    M = random_matrix(random.Random(seed), spec, max_dim=4)
    case = snf_case(M)
    assert case["ok"], case


def test_snf_matches_sympy_invariant_factors():
    from sympy.matrices.normalforms import smith_normal_form as sympy_snf
    rng = random.Random(11)
    for _ in range(20):
        rows = [[rng.randint(-6, 6) for _ in range(3)] for _ in range(3)]
        ours = [abs(d) for d in smith_normal_form(MatrixE.from_rows(ZZ, rows)).diagonal]
        D = sympy_snf(sympy.Matrix(rows), domain=sympy.ZZ)
        theirs = [abs(int(D[i, i])) for i in range(3) if D[i, i] != 0]
        assert ours == theirs


# ---------------------------------------------------------------- solving

def test_solve_examples():
    assert solve_linear(MatrixE.from_rows(ZZ, [[2]]), [4]) == [2]
    bad = solve_linear(MatrixE.from_rows(ZZ, [[2]]), [1])
    assert isinstance(bad, NoSolution)
    assert (bad.divisor, bad.value) == (2, 1)


def test_solve_random_qt_by_substitution():
    rng = random.Random(5)
    R = ring(QT)
    for _ in range(10):
        M = MatrixE.from_rows(QT, [[R._trim((Fraction(rng.randint(-2, 2)), Fraction(rng.randint(-2, 2))))
                                    for _ in range(4)] for _ in range(3)])
        x0 = [R._trim((Fraction(rng.randint(-2, 2)),)) for _ in range(4)]
        b = M.apply(x0)
        x = solve_linear(M, b)
        assert not isinstance(x, NoSolution)
        assert M.apply(x) == b


# ---------------------------------------------------------------- kernel, image, cokernel

def test_zero_matrix_kernel_image_cokernel():
    Z = MatrixE.zeros(ZZ, 2, 2)
    assert len(kernel_basis(Z)) == 2
    assert image_basis(Z) == []
    c = cokernel(Z)
    assert (c.rank, c.factors) == (2, ())


@pytest.mark.parametrize("p", [2, 3, 5])
def test_cokernel_torsion(p):
    c = cokernel(MatrixE.from_rows(ZZ, [[p, 0], [0, 1]]))
    assert (c.rank, c.factors) == (0, (p,))
    assert c.describe() == f"ZZ/({p})"


def test_rank_nullity_random():
    rng = random.Random(7)
    for _ in range(30):
        M = MatrixE.from_rows(ZZ, [[rng.randint(-3, 3) for _ in range(3)] for _ in range(3)])
        K, I = kernel_basis(M), image_basis(M)
        assert len(K) + len(I) == 3
        assert len(I) == sympy.Matrix(M.data).rank()
        for v in K:
            assert all(x == 0 for x in M.apply(v))


# ---------------------------------------------------------------- homology

@pytest.mark.parametrize("p", [2, 3, 5])
def test_homology_z_p_z(p):
    d = MatrixE.from_rows(ZZ, [[p]])
    z = MatrixE.zeros(ZZ, 1, 0)
    target = homology_at(d, MatrixE.zeros(ZZ, 0, 1)).presentation
    assert (target.rank, target.factors) == (0, (p,))
    source = homology_at(z, d).presentation
    assert source.is_zero()


def test_homology_zero_differentials():
    n = 3
    h = homology_at(MatrixE.zeros(ZZ, n, 0), MatrixE.zeros(ZZ, 0, n), n)
    assert (h.presentation.rank, h.presentation.factors) == (n, ())
    assert h.cycle_lift.data == MatrixE.identity(ZZ, n).data


def test_homology_rejects_noncomplex():
    one = MatrixE.from_rows(ZZ, [[1]])
    with pytest.raises(ComposabilityError):
        homology_at(one, one)


def test_homology_random_q_complex_ranks():
    rng = random.Random(3)
    for _ in range(20):
        a, b, c = rng.randint(1, 4), rng.randint(1, 4), rng.randint(1, 4)
        d_out = sympy.Matrix(c, b, lambda i, j: rng.randint(-2, 2))
        # d_in: columns in the kernel of d_out
        ker = d_out.nullspace()
        cols = [sum((rng.randint(-2, 2) * v for v in ker), sympy.zeros(b, 1)) for _ in range(a)]
        d_in = sympy.Matrix.hstack(*cols) if cols else sympy.zeros(b, 0)
        to = lambda S: MatrixE.from_rows(QQ, [[Fraction(int(x.p), int(x.q)) for x in S.row(i)] for i in range(S.rows)], S.cols)
        h = homology_at(to(d_in), to(d_out)).presentation
        assert h.factors == ()
        assert h.rank == b - d_out.rank() - d_in.rank()


# ---------------------------------------------------------------- signs

def _adjacent_sign(sigma, degrees):
    """Oracle: bubble-sort the items into place, one adjacent swap at a time."""
    pos = list(sigma)
    degs = list(degrees)
    sign = 1
    changed = True
    while changed:
        changed = False
        for k in range(len(pos) - 1):
            if pos[k] > pos[k + 1]:
                sign *= (-1) ** (degs[k] * degs[k + 1])
                pos[k], pos[k + 1] = pos[k + 1], pos[k]
                degs[k], degs[k + 1] = degs[k + 1], degs[k]
                changed = True
    return sign


def test_koszul_sign_examples():
    assert koszul_sign((0, 1, 2), (1, 5, 3)) == 1
    assert koszul_sign((1, 0), (1, 1)) == -1
    assert koszul_sign((1, 2, 0), (1, 2, 1)) == _adjacent_sign((1, 2, 0), (1, 2, 1))


@settings(max_examples=100, deadline=None)
@given(st.permutations(range(5)), st.lists(st.integers(-3, 3), min_size=5, max_size=5))
def test_koszul_sign_oracle(sigma, degrees):
    assert koszul_sign(tuple(sigma), degrees) == _adjacent_sign(sigma, degrees)


def test_shuffle_counts():
    assert sorted(shuffles(1, 1)) == [(0, 1), (1, 0)]
    assert len(shuffles(2, 1)) == 3
    s22 = shuffles(2, 2)
    assert len(s22) == 6
    brute = [s for s in itertools.permutations(range(4)) if s[0] < s[1] and s[2] < s[3]]
    assert sorted(s22) == sorted(brute)


def test_multi_shuffles():
    assert multi_shuffles(1, 1) == [(0, 1)]
    assert len(multi_shuffles(2, 1)) == 3
    assert len(multi_shuffles(1, 1, 1)) == 1
