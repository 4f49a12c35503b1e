from fractions import Fraction

import pytest

from dhtransfer.algebra import FlavorMismatch, verify_morphism
from dhtransfer.obstruction import (AffineForms, Aff, Obstructed, Solved, forced_values,
                                    search_e2_equivalence, small_fractions)
from dhtransfer.registry import get_fixture
from dhtransfer.rings import PrimeField, ring


def _pair(p, window=(-2, 2)):
    T = get_fixture("H(A)", {"p": p})
    S = get_fixture("dugger-shipley", {"p": p}, {"n": window}, f"GF({p})")
    return S.algebras[S.minimal], T.algebras[T.minimal]


def _search(p, window=(-2, 2), r_max=3, i_max=2):
    M, B = _pair(p, window)
    return search_e2_equivalence(M, B, r_max, i_max), M, B


def test_p2_obstructed_at_level_two():
    res, M, B = _search(2)
    assert isinstance(res, Obstructed)
    ob = res.obstruction
    assert (ob.i, ob.r) == (1, 2)
    assert ob.unconditional
    assert ob.reproduce()
    assert not ring(M.spec).is_zero(ob.constant)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_odd_p_forces_half_then_obstructed(p):
    res, M, B = _search(p)
    R = ring(M.spec)
    forced = [(u, v) for u, v in forced_values(res.state, R) if (u.i, u.r) == (1, 1)]
    assert forced
    for u, v in forced:
        sym, (n,) = u.inputs[0]
        assert sym == "cx"
        assert u.output == ("x", (n + 1,))
        assert Fraction(1, 2) in small_fractions(v, p)
        assert R.mul(v, 2) == 1
    assert isinstance(res, Obstructed)
    ob = res.obstruction
    assert (ob.i, ob.r) == (2, 2)
    assert ob.unconditional and ob.reproduce()


@pytest.mark.parametrize("window", [(-2, 2), (-3, 3)])
def test_obstruction_is_window_stable(window):
    res, _, _ = _search(3, window)
    assert isinstance(res, Obstructed)
    assert (res.obstruction.i, res.obstruction.r) == (2, 2)


def test_identity_search_solves():
    _, B = _pair(3)
    res = search_e2_equivalence(B, B, 3, 2)
    assert isinstance(res, Solved)
    assert verify_morphism(res.morphism, 3, 2).ok


def test_low_bounds_do_not_reach_the_obstruction():
    res, _, _ = _search(3, r_max=2, i_max=1)
    assert isinstance(res, Solved)
    assert res.bounds_exhausted


def test_flavor_and_ring_mismatch():
    M, B = _pair(3)
    fx5 = get_fixture("H(A)", {"p": 5})
    Bq = fx5.algebras[fx5.minimal]
    with pytest.raises(FlavorMismatch):
        search_e2_equivalence(M, Bq)
    with pytest.raises(ValueError):
        search_e2_equivalence(_with_d0(M), B)


def _with_d0(M):
    from dhtransfer.algebra import DerivedHomotopyAlgebra
    from dhtransfer.graded import MultiOp
    d0 = MultiOp("d_0", 1, (0, -1), lambda labs: {labs[0]: 1}, M.spec)
    return DerivedHomotopyAlgebra(M.flavor, M.carrier, {**M.d, 0: d0}, M.ops, "non-minimal")


def test_small_fractions():
    assert small_fractions(2, 3) == [Fraction(-1), Fraction(2), Fraction(1, 2)]
    assert Fraction(1, 2) in small_fractions(3, 5)
    assert small_fractions(0, 7) == [Fraction(0)]


def test_affine_forms_arithmetic():
    A = AffineForms(ring(PrimeField(5)))
    u = Aff(0, (("u", 1),))
    two_u = A.add(u, u)
    assert two_u.v == (("u", 2),)
    assert A.is_zero(A.add(u, A.neg(u)))
    assert A.mul(3, u).v == (("u", 3),)
    assert A.mul(u, u).bad
