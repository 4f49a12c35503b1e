import pytest

from dhtransfer.algebra import LIE, FlavorMismatch
from dhtransfer.barcobar import (LaurentCarrier, bar, bar_morphism, check_bar_morphism, check_bar_square,
                                 cobar_cells, dual_numbers_koszul, good_cobar, negative_ideal_cells,
                                 stabilization_table, strictify)
from dhtransfer.rings import Integers, Rationals

from conftest import ds, qt

QT_CLASSES = {2: {"rank": 0, "torsion": ["t", "t"]}, 5: {"rank": 0, "torsion": ["t"]}}


def _small_ds_basis(fx, n=(-1, 1)):
    return [b for b in fx.minimal.carrier.basis() if n[0] <= b[1][0] <= n[1]]


# ---------------------------------------------------------------- bar construction

def test_bar_differential_squares_to_zero_ds():
    fx = ds(3)
    B = bar(fx.minimal, 2)
    words = B.words(_small_ds_basis(fx), 2)
    assert words
    assert check_bar_square(B, words) == []


def test_bar_differential_squares_to_zero_qt():
    ex = qt("Comm")
    for A in (ex.minimal, ex.target):
        B = bar(A, 2)
        assert check_bar_square(B, B.words()) == []


def test_bar_morphism_is_chain_map():
    ex = qt("Comm")
    Bf = bar_morphism(ex.morphism, 2)
    assert check_bar_morphism(Bf, Bf.source.words()) == []
    fx = ds(3)
    Bf = bar_morphism(fx.morphism, 2)
    assert check_bar_morphism(Bf, Bf.source.words(_small_ds_basis(fx), 2)) == []


def test_literal_ds_morphism_is_not_a_bar_chain_map():
    fx = ds(3)
    Bf = bar_morphism(fx.literal_morphism, 2)
    assert check_bar_morphism(Bf, Bf.source.words(_small_ds_basis(fx), 2))


def test_bar_rejects_lie():
    with pytest.raises(FlavorMismatch):
        bar(qt(LIE).minimal, 1)


# ---------------------------------------------------------------- good cobar

@pytest.mark.parametrize("W", [1, 2])
def test_good_cells_match_ideal_complement(W):
    C = good_cobar(bar(qt("Comm").minimal, W))
    ideal = negative_ideal_cells(C, W, 4)
    full = cobar_cells(C, W, 4, fast=False)
    fast = cobar_cells(C, W, 4)
    for n, ms in full.degrees.items():
        assert set(ms) - ideal.get(n, set()) == set(fast.degrees.get(n, [])), n


def test_good_monomials_have_nonnegative_horizontal_degree():
    C = good_cobar(bar(qt("Comm").minimal, 2))
    for ms in cobar_cells(C, 2, 4).degrees.values():
        for m in ms:
            assert all(C.hdeg(m[a:b]) >= 0 for a in range(len(m)) for b in range(a + 1, len(m) + 1))


# ---------------------------------------------------------------- strictification

def test_strictify_commutative_example():
    st = stabilization_table(qt("Comm").morphism, 8, 5)
    target = st["target"]
    for n in range(0, 6):
        assert target[n] == QT_CLASSES.get(n, {"rank": 0, "torsion": []}), n
        assert st["table"][n][8] == target[n], n
        s = st["stable_from"][n]
        assert s is not None and s <= 8
        assert all(st["table"][n][W] == target[n] for W in range(s, 9))
    for res in st["results"].values():
        assert res.report.chain_map_failures == []
        assert res.report.multiplicative_failures == []


def test_strictify_rejects_laurent_carrier():
    with pytest.raises(LaurentCarrier):
        strictify(ds(3).morphism, 1)


# ---------------------------------------------------------------- Koszul complex

def test_dual_numbers_koszul_acyclic():
    res = dual_numbers_koszul(range(1, 9))
    for w in range(1, 9):
        assert res[w]["acyclic"], w
        assert res[w]["d_squared_zero"]


def test_dual_numbers_koszul_rational():
    res = dual_numbers_koszul(range(1, 5), Rationals())
    assert all(r["acyclic"] for r in res.values())


def test_koszul_scaled_twisting_is_not_acyclic_over_z():
    res = dual_numbers_koszul(range(1, 4), Integers(), kappa=2)
    for w in range(1, 4):
        assert not res[w]["acyclic"]
        assert res[w]["H-1"]["torsion"] == ["2"]
