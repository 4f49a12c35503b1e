import itertools
from pathlib import Path

import pytest

from dhtransfer.fixtures import dugger_shipley
from dhtransfer.fixture_files import FixtureError, eval_int, eval_scalar, load_fixture
from dhtransfer.graded import BigradedModule, DegreeWindow, Family, MultiOp, WindowEscape, explicit, shift_violations
from dhtransfer.rings import Integers, PrimeField, RationalPolynomials, ring

from conftest import ds

ROOT = Path(__file__).resolve().parents[1]
ZZ = Integers()


def x(n):
    return ("x", (n,))


def cx(n):
    return ("cx", (n,))


# ---------------------------------------------------------------- modules

def test_window_basis_is_finite_and_sorted():
    M = ds(3).minimal.carrier
    B = M.basis()
    assert B == sorted(B)
    assert len(B) == 18
    assert M.bidegree(cx(2)) == (1, 2)
    assert M.degree(cx(2)) == 3
    assert set(M.cells()) == {(p, q) for p in (0, 1) for q in range(-4, 5)}


def test_family_guards_and_bounds():
    f = Family("y", ("n",), (0,), (0, 2), guards=((0, 2, 1),), bounds=((0, None),))
    M = BigradedModule(ZZ, (f,), DegreeWindow((0, 0), None, (("n", -3, 5),)))
    assert [l[1][0] for l in M.basis()] == [1, 3, 5]
    assert not M.has(("y", (-1,)))
    with pytest.raises(WindowEscape):
        M.check(("y", (2,)))


def test_duplicate_symbols_rejected():
    with pytest.raises(ValueError):
        BigradedModule(ZZ, (explicit("a", 0, 0), explicit("a", 0, 1)))


# ---------------------------------------------------------------- operations

def test_eval_zero_argument():
    m12 = ds(3).minimal.ops[(1, 2)]
    assert m12({}, {x(1): 1}) == {}
    assert m12({x(1): 1}, {}) == {}


def test_ds_m12_table():
    m12 = ds(3).minimal.ops[(1, 2)]
    assert m12({x(1): 1}, {cx(2): 1}) == {x(4): 1}
    assert m12({cx(1): 1}, {cx(2): 1}) == {cx(4): 1}
    for i, j in itertools.product(range(-3, 4), repeat=2):
        assert m12({x(i): 1}, {x(j): 1}) == {}
        assert m12({x(2 * i): 1}, {cx(j): 1}) == {}


def test_ds_m12_left_slot_variant():
    m12 = dugger_shipley(3, m12="left").minimal.ops[(1, 2)]
    assert m12({cx(1): 1}, {x(2): 1}) == {x(4): 1}
    assert m12({x(1): 1}, {cx(2): 1}) == {}


def test_multilinear_extension():
    m12 = ds(3).minimal.ops[(1, 2)]
    v = m12({x(1): 2, x(3): 1}, {cx(0): 1, cx(1): -1})
    assert v == {x(2): 2, x(3): -2, x(4): 1, x(5): -1}


def test_shift_respected_by_ds_operations():
    A = ds(3).minimal
    M = A.carrier
    B = M.basis()
    assert shift_violations(A.ops[(1, 2)], M, M, itertools.product(B, repeat=2)) == []
    assert shift_violations(A.ops[(0, 2)], M, M, itertools.product(B, repeat=2)) == []
    assert shift_violations(A.d[1], M, M, [(b,) for b in B]) == []


def test_codomain_check():
    M = BigradedModule(ZZ, (explicit("a", 0, 0),))
    op = MultiOp("bad", 1, (0, 0), lambda labs: {("b", ()): 1}, ZZ, codomain=M)
    with pytest.raises(WindowEscape):
        op.on_basis((("a", ()),))


# ---------------------------------------------------------------- fixture expressions

def test_eval_int_whitelist():
    assert eval_int("(-1)**a + max(a, 3) % 2", {"a": 3}) == -1 + 1
    assert eval_int("a % 2 == 1 and b >= 0", {"a": 3, "b": 0}) is True
    for bad in ("__import__('os')", "a.real", "[a]", "a // 0", "2 ** -1", "lambda: 1"):
        with pytest.raises(FixtureError):
            eval_int(bad, {"a": 1})
    with pytest.raises(FixtureError):
        eval_int("z", {})


def test_eval_scalar_rings():
    Q = RationalPolynomials("t")
    R = ring(Q)
    assert eval_scalar("t**2 - p", {"p": 3}, Q) == R._trim((-3, 0, 1))
    assert eval_scalar("2/3", {}, Q) == R.coerce("2/3")
    assert eval_scalar("1/2", {}, PrimeField(5)) == 3
    with pytest.raises(FixtureError):
        eval_scalar("1/t", {}, Q)
    with pytest.raises(FixtureError):
        eval_scalar("1/2", {}, ZZ)
    with pytest.raises(FixtureError):
        eval_scalar("2**-1", {}, ZZ)


def _minimal_fixture(rules, extra=None):
    doc = {"schema": "dhtransfer.fixture/1", "name": "t", "ring": "ZZ",
           "window": {"p": [0, 0], "params": {"n": [0, 2]}},
           "algebras": {"A": {"families": [{"symbol": "x", "params": ["n"], "p": 0, "q": "n"}],
                              "operations": [{"i": 0, "r": 2, "rules": rules}]}}}
    doc.update(extra or {})
    return doc


def test_loader_builds_operations():
    fx = load_fixture(_minimal_fixture([{"match": ["x(a)", "x(b)"], "image": {"x(a+b)": 1}}]))
    A = fx.algebras["A"]
    assert A.ops[(0, 2)]({x(1): 1}, {x(1): 1}) == {x(2): 1}


@pytest.mark.parametrize("doc, needle", [
    ({"schema": "other"}, "schema"),
    (_minimal_fixture([{"match": ["y(a)", "x(b)"], "image": {}}]), "y"),
    (_minimal_fixture([{"match": ["x(a)"], "image": {}}]), "arity"),
    (_minimal_fixture([{"match": ["x(a)", "x(b)"], "image": {"x(a+b)": "q"}}]), "q"),
    (_minimal_fixture([], {"ring": "ZZ/1"}), "ZZ/1"),
    (_minimal_fixture([], {"morphisms": [{"name": "f", "source": "A", "target": "B"}]}), "'B'"),
])
def test_loader_errors(doc, needle):
    with pytest.raises(FixtureError) as e:
        fx = load_fixture(doc)
        A = fx.algebras["A"]
        A.ops[(0, 2)]({x(0): 1}, {x(1): 1})
    assert needle in str(e.value)


def test_ds_file_matches_builtin():
    fx = load_fixture(ROOT / "fixtures" / "dugger_shipley.json")
    built = ds(3)
    Mf, Mb = fx.algebras["M"], built.minimal
    B = Mb.carrier.basis()
    assert Mf.carrier.basis() == B
    for key in set(Mf.ops) | set(Mb.ops):
        for labs in itertools.product(B, repeat=2):
            a = Mf.ops[key].on_basis(labs) if key in Mf.ops else {}
            b = Mb.ops[key].on_basis(labs) if key in Mb.ops else {}
            assert a == b, (key, labs)
    for lab in B:
        assert Mf.d[1].on_basis((lab,)) == Mb.d[1].on_basis((lab,))
    ff, fb = fx.morphisms["f"], built.morphism
    for key in set(ff.components) | set(fb.components):
        for lab in B:
            assert ff.components[key].on_basis((lab,)) == fb.components[key].on_basis((lab,))
