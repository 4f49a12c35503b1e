import itertools
import random

import pytest

from dhtransfer.algebra import (ASSOC, COMM, UNIT, DerivedHomotopyAlgebra, DerivedInftyMorphism, FlavorMismatch,
                                compose, identity_morphism, is_e2_equivalence_morphism, postcompose_strict,
                                strict_morphism, to_split_filtered, verify_algebra, verify_morphism,
                                verify_shuffle_vanishing)
from dhtransfer.fixtures import ds_m12_rule, dugger_shipley, finite_module, finite_op
from dhtransfer.graded import MultiOp, table_op
from dhtransfer.rings import Integers, Rationals, ring
from dhtransfer.spectral import page

from conftest import ds, qt

ZZ, QQ = Integers(), Rationals()


def x(n):
    return ("x", (n,))


def cx(n):
    return ("cx", (n,))


def _lab(s):
    return (s, ())


def _with_ops(A, **changes):
    ops = dict(A.ops)
    d = dict(A.d)
    for key, op in changes.items():
        kind, i, r = key.split("_")
        if kind == "d":
            d[int(i)] = op
        else:
            ops[(int(i), int(r))] = op
    return DerivedHomotopyAlgebra(A.flavor, A.carrier, d, ops, A.name + " (mutated)")


# ---------------------------------------------------------------- algebras

def test_ds_minimal_model_verifies():
    rep = verify_algebra(ds(3).minimal, 4, 3)
    assert rep.ok and rep.checked > 0


@pytest.mark.parametrize("p", [0, 2, 5])
def test_ds_minimal_model_other_p(p):
    assert verify_algebra(ds(p).minimal, 3, 2).ok


def test_strict_dga_reduces_to_associativity_and_leibniz():
    A = ds(3).target
    assert verify_algebra(A, 3, 1).ok
    # break associativity: scale products landing on e x^n by 2
    mu = A.ops[(0, 2)]
    R = A.R
    bad = MultiOp("mu", 2, (0, 0), lambda labs: {l: R.mul(c, 2) if l[0] == "ex" else c
                                                 for l, c in mu.on_basis(labs).items()}, ZZ)
    rep = verify_algebra(_with_ops(A, m_0_2=bad), 3, 1)
    assert not rep.ok
    # break Leibniz only: d(e x^n) = (p + n) x^n
    d = MultiOp("d", 1, (0, -1), lambda labs: {("x", labs[0][1]): 3 + labs[0][1][0]}
                if labs[0][0] == "ex" and labs[0][1][0] != -3 else {}, ZZ)
    rep = verify_algebra(_with_ops(A, d_0_1=d), 2, 1)
    assert not rep.ok and {r.r for r in rep.residuals} == {2}


def test_ds_odd_sign_mutation_detected():
    fx = ds(3)
    R = fx.minimal.R
    base = ds_m12_rule(R, "right")

    def flipped(labs):
        out = base(labs)
        (s1, (i,)), (s2, (j,)) = labs
        if (s1, s2) == ("x", "cx") and j % 2:
            return {l: R.neg(c) for l, c in out.items()}
        return out

    M = _with_ops(fx.minimal, m_1_2=MultiOp("m_1,2", 2, (-1, 1), flipped, ZZ))
    rep = verify_algebra(M, 3, 2)
    assert not rep.ok
    first = min(rep.residuals, key=lambda r: (r.i + r.r, r.i))
    assert (first.i, first.r) in {(1, 3), (2, 2)}


def test_ds_left_slot_table_fails():
    M = dugger_shipley(3, m12="left").minimal
    rep = verify_algebra(M, 3, 2)
    assert not rep.ok
    first = rep.residuals[0]
    assert (first.i, first.r) == (1, 3)
    hit = [r for r in rep.residuals if r.inputs == (cx(-2), cx(-1), x(-2))]
    assert hit and hit[0].value == {cx(-4): -1}


def test_ds_negated_table_also_verifies():
    M = dugger_shipley(3, m12_sign=-1).minimal
    assert verify_algebra(M, 3, 2).ok


def test_minimality():
    assert ds(3).minimal.is_minimal()
    assert not ds(3).target.is_minimal()


# ---------------------------------------------------------------- shuffles

def test_commutative_forced_partner():
    M = qt(COMM).minimal
    m12 = M.ops[(1, 2)]
    assert m12.on_basis((_lab("x"), _lab("c_y"))) == {_lab("z"): ring(M.spec).one}
    # with Koszul sign times permutation sign, the partner is +z
    assert m12.on_basis((_lab("c_y"), _lab("x"))) == {_lab("z"): ring(M.spec).one}
    assert verify_shuffle_vanishing(M).ok
    wrong = finite_op("m_1,2", 2, (-1, 1), M.spec, {("x", "c_y"): {"z": 1}, ("c_y", "x"): {"z": -1}})
    assert not verify_shuffle_vanishing(_with_ops(M, m_1_2=wrong)).ok


def _even_module():
    return finite_module(QQ, {"a": (0, 0), "b": (0, 2), "ab": (0, 2)}, "E")


def test_symmetric_op_on_even_elements_passes_shuffles():
    E = _even_module()
    sym = finite_op("m", 2, (0, 0), QQ, {("a", "b"): {"ab": 1}, ("b", "a"): {"ab": 1}})
    A = DerivedHomotopyAlgebra(COMM, E, {}, {(0, 2): sym})
    assert verify_shuffle_vanishing(A).ok
    anti = finite_op("m", 2, (0, 0), QQ, {("a", "b"): {"ab": 1}, ("b", "a"): {"ab": -1}})
    rep = verify_shuffle_vanishing(DerivedHomotopyAlgebra(COMM, E, {}, {(0, 2): anti}))
    assert not rep.ok and rep.residuals[0].equation == "shuffle(1,1)"


@pytest.mark.parametrize("seed", range(10))
def test_random_graded_commutative_table_passes(seed):
    rng = random.Random(seed)
    gens = {f"g{k}": (0, rng.randint(0, 3)) for k in range(4)}
    E = finite_module(QQ, {**gens, "out": (0, 0)}, "E")
    table = {}
    names = sorted(gens)
    for a, b in itertools.combinations_with_replacement(names, 2):
        da, db = sum(gens[a]), sum(gens[b])
        c = rng.randint(-3, 3)
        if a == b and (da * db) % 2:
            c = 0
        table[(a, b)] = {"out": c}
        table[(b, a)] = {"out": c * (-1) ** (da * db)}
    op = finite_op("m", 2, (0, 0), QQ, table)
    assert verify_shuffle_vanishing(DerivedHomotopyAlgebra(COMM, E, {}, {(0, 2): op})).ok


def test_comm_and_lie_share_binary_tables():
    Mc, Ml = qt(COMM).minimal, qt("Lie").minimal
    assert Mc.carrier.basis() == Ml.carrier.basis()
    R = ring(Mc.spec)
    for a, b in itertools.product(Mc.carrier.basis(), repeat=2):
        mc = Mc.ops[(1, 2)].on_basis((a, b))
        ml = Ml.ops[(1, 2)].on_basis((a, b))
        da, db = Mc.degree(a), Mc.degree(b)
        # listed entries agree; reversed entries differ by the symmetric/skew completion
        mc_rev = Mc.ops[(1, 2)].on_basis((b, a))
        ml_rev = Ml.ops[(1, 2)].on_basis((b, a))
        s = (-1) ** (da * db)
        assert mc == {k: R.mul(R.from_int(s), v) for k, v in mc_rev.items()}
        assert ml == {k: R.mul(R.from_int(-s), v) for k, v in ml_rev.items()}
        assert set(mc) == set(ml)
    assert verify_algebra(Mc, 4, 3).ok and verify_algebra(Ml, 4, 3).ok


# ---------------------------------------------------------------- morphisms

def test_ds_morphism_verifies():
    assert verify_morphism(ds(3).morphism, 3, 2).ok


def test_identity_morphism_verifies():
    assert verify_morphism(identity_morphism(ds(3).minimal), 3, 2).ok


def test_zero_f11_fails_at_1_1():
    fx = ds(3)
    f = DerivedInftyMorphism(fx.minimal, fx.target, {(0, 1): fx.morphism.components[(0, 1)]}, "f")
    rep = verify_morphism(f, 2, 2)
    assert not rep.ok
    first = min(rep.residuals, key=lambda r: (r.r, r.i))
    assert (first.i, first.r) == (1, 1)
    assert first.value == {x(first.inputs[0][1][0]): -3}


def test_literal_morphism_fails_at_1_1():
    fx = ds(3)
    rep = verify_morphism(fx.literal_morphism, 3, 2)
    assert not rep.ok
    first = sorted(rep.residuals, key=lambda r: (r.r, r.i))[0]
    assert (first.i, first.r) == (1, 1)
    n = first.inputs[0][1][0]
    assert first.value == {x(n): -6}


def test_morphism_flavor_mismatch():
    with pytest.raises(FlavorMismatch):
        DerivedInftyMorphism(qt(COMM).minimal, qt("Lie").target, {})


# ---------------------------------------------------------------- composition

def _tables_equal(f, g, basis, r_max, i_max):
    for r in range(1, r_max + 1):
        for labs in itertools.product(basis, repeat=r):
            assert f.family.total(r, labs, i_max) == g.family.total(r, labs, i_max), labs


def test_compose_with_identity():
    f = qt(COMM).morphism
    g = compose(identity_morphism(f.target), f, 3, 2)
    _tables_equal(g, f, f.source.carrier.basis(), 3, 2)
    h = compose(f, identity_morphism(f.source), 3, 2)
    _tables_equal(h, f, f.source.carrier.basis(), 3, 2)


def _random_family(rng, spec, src, tgt, arities, i_max, name, flavor=ASSOC):
    S, T = src.carrier, tgt.carrier
    cells = T.cells()
    comps = {}
    for r in arities:
        for i in range(i_max + 1):
            table = {}
            for labs in itertools.product(S.basis(), repeat=r):
                p = sum(S.bidegree(l)[0] for l in labs) - i
                q = sum(S.bidegree(l)[1] for l in labs) + r - 1 + i
                outs = cells.get((p, q), [])
                v = {o: rng.randint(-2, 2) for o in outs if rng.random() < 0.6}
                v = {k: c for k, c in v.items() if c}
                if v:
                    table[labs] = v
            comps[(i, r)] = table_op(f"{name}_{i},{r}", r, (-i, r - 1 + i), spec, table)
    return DerivedInftyMorphism(src, tgt, comps, name)


def _small_algebra(flavor=ASSOC):
    mod = finite_module(ZZ, {"a": (0, 0), "b": (0, 1), "c": (1, 0), "e": (1, 1), "g": (2, 0)}, "S")
    return DerivedHomotopyAlgebra(flavor, mod, {}, {}, "S")


@pytest.mark.parametrize("seed", range(4))
def test_compose_is_associative(seed):
    rng = random.Random(seed)
    A = _small_algebra()
    f = _random_family(rng, ZZ, A, A, (1, 2), 1, "f")
    g = _random_family(rng, ZZ, A, A, (1, 2), 1, "g")
    h = _random_family(rng, ZZ, A, A, (1, 2), 1, "h")
    left = compose(h, compose(g, f, 3, 2), 3, 2)
    right = compose(compose(h, g, 3, 2), f, 3, 2)
    _tables_equal(left, right, A.carrier.basis(), 3, 2)


def test_unit_flavor_composition_formula():
    rng = random.Random(3)
    A = _small_algebra(UNIT)
    f = _random_family(rng, ZZ, A, A, (1,), 2, "f", UNIT)
    g = _random_family(rng, ZZ, A, A, (1,), 2, "g", UNIT)
    gf = compose(g, f, 1, 2)
    R = ring(ZZ)
    for lab in A.carrier.basis():
        v = {lab: 1}
        for i in range(3):
            expected = {}
            for j in range(i + 1):
                gj, fk = g.components[(j, 1)], f.components[(i - j, 1)]
                for l, c in gj(fk(v)).items():
                    expected[l] = R.add(expected.get(l, 0), c)
            expected = {l: c for l, c in expected.items() if c}
            assert gf.components[(i, 1)].on_basis((lab,)) == expected


@pytest.mark.parametrize("flavor", [COMM, "Lie"])
def test_compose_preserves_verification(flavor):
    ex = qt(flavor)
    iota = strict_morphism(ex.tilde.as_algebra(), ex.target, ex.tilde.comparison)
    assert verify_morphism(iota, 3, 2).ok
    from dhtransfer.transfer import transfer_minimal
    res = transfer_minimal(ex.tilde, ex.contraction, 3, 2)
    assert verify_morphism(res.inclusion, 3, 2).ok
    comp = compose(iota, res.inclusion, 3, 2)
    assert verify_morphism(comp, 3, 2).ok
    post = postcompose_strict(ex.tilde.comparison, res.inclusion, ex.target)
    _tables_equal(comp, post, ex.minimal.carrier.basis(), 3, 2)


# ---------------------------------------------------------------- filtered realization

def test_split_filtered_e1_is_carrier():
    A = qt(COMM).minimal
    X = to_split_filtered(A)
    assert X.check().ok
    E1 = page(X, 1)
    for (p, q), labs in A.carrier.cells().items():
        assert E1.presentation(p, q).rank == len(labs)


def test_e2_equivalence_morphisms():
    fx = ds(3)
    assert is_e2_equivalence_morphism(fx.morphism).ok
    assert is_e2_equivalence_morphism(identity_morphism(fx.minimal)).ok
    zero = DerivedInftyMorphism(fx.minimal, fx.target, {}, "0")
    assert not is_e2_equivalence_morphism(zero).ok
