import itertools
import random

import pytest

from forcingcomp.formula import DELTA0, FormulaError, Pi, Sigma, classify
from forcingcomp.forcingrel import (
    ForcingKind, certificate_for, compile_forcing, forces, forces_atomic, forces_semantic, tables_for,
)
from forcingcomp.hfmodel import HFOracle, evaluate, hs, install_poset, to_code
from forcingcomp.names import check_name, enumerate_names, make_name
from forcingcomp.oracle import DELTA0_LEVEL, Answer, RecordingOracle
from forcingcomp.posets import all_posets
from forcingcomp.syntax import parse_formula

from naive import generic_filters, value

V = install_poset((0, 1, 2), {(0, 0), (1, 1), (2, 2), (1, 0), (2, 0)})


def ref_forces(P, p, sigma, tau, kind):
    """p forces the atom iff it holds in every generic extension through p."""
    out = True
    for G in generic_filters(P.conditions, set(P.leq)):
        if p not in G:
            continue
        s, t = value(sigma, G, to_code), value(tau, G, to_code)
        out &= {"in": s in t, "sub": s <= t, "eq": s == t}[kind.value]
    return out


@pytest.mark.parametrize("P", all_posets(3), ids=str)
def test_atomic_forcing_against_semantics(P):
    h = install_poset(P.conditions, P.leq)
    names = enumerate_names(h, 1, 2) + enumerate_names(h, 2, 1)
    names = list(dict.fromkeys(names))
    for sigma, tau in itertools.product(names, repeat=2):
        for kind in ForcingKind:
            for p in P.conditions:
                assert forces_atomic(h, p, sigma, tau, kind) == ref_forces(P, p, sigma, tau, kind)


def test_atomic_forcing_is_downward_closed():
    T = tables_for(V)
    names = enumerate_names(V, 2, 2)[:60]
    for sigma, tau in itertools.product(names, repeat=2):
        m = T.mask(ForcingKind.EQUAL, sigma, tau)
        for p in V.conditions:
            if m >> V.poset.index[p] & 1:
                assert all(m >> V.poset.index[q] & 1 for q in V.conditions if V.poset.le(q, p))


def test_intern_rejects_non_names():
    with pytest.raises(ValueError):
        tables_for(V).intern(hs(3))


@pytest.mark.parametrize("text, sigma, pi", [
    ("(mem x y)", Sigma(1), Pi(1)),
    ("(bex z y (eq z x))", Sigma(1), Pi(1)),
    ("(ex z (mem z y))", Sigma(1), Sigma(1)),
    ("(all z (mem z y))", Pi(1), Pi(1)),
    ("(ex z (all u (mem u z)))", Sigma(2), Sigma(2)),
])
def test_compiled_complexity_contract(text, sigma, pi):
    c = compile_forcing(parse_formula(text))
    assert c.complexity == sigma
    assert c.pi_complexity == pi
    assert c.delta1 == (classify(c.source) == DELTA0)


def test_compile_rejects_constants():
    with pytest.raises(FormulaError):
        compile_forcing(parse_formula("(mem x #1)"))


SAMPLE = [
    "(mem x y)", "(eq x y)", "(subset x y)", "(not (mem x y))",
    "(bex z y (eq z x))", "(ball z y (mem z x))", "(or (mem x y) (mem y x))",
    "(and (not (eq x y)) (bex z x (mem z y)))", "(ball z x (bex u y (eq z u)))",
]


@pytest.mark.parametrize("text", SAMPLE)
def test_delta0_compiled_matches_semantic(text):
    phi = parse_formula(text)
    rng = random.Random(text)
    names = enumerate_names(V, 2, 2)
    rec = RecordingOracle(HFOracle(DELTA0_LEVEL, sig=V.sig()))
    for _ in range(40):
        env = {"x": rng.choice(names), "y": rng.choice(names)}
        for p in V.conditions:
            a = forces(V, p, phi, env, oracle=rec)
            assert a is not Answer.OUT_OF_BUDGET
            assert a is forces_semantic(V, p, phi, env)
    assert rec.count_above(DELTA0_LEVEL) == 0


def test_sigma1_forcing():
    phi = parse_formula("(ex z (mem z y))")
    sigma = make_name([(hs(0), 1)])          # {(0, a)}: nonempty exactly when a is in G
    got = [forces(V, p, phi, {"y": sigma}, budget=4) for p in (0, 1, 2)]
    want = [forces_semantic(V, p, phi, {"y": sigma}, budget=4) for p in (0, 1, 2)]
    assert want == [Answer.FALSE, Answer.TRUE, Answer.FALSE]
    # the compiled route searches for a witness; a true answer must agree
    assert got[1] is Answer.TRUE
    assert all(g is w or g is Answer.OUT_OF_BUDGET for g, w in zip(got, want))


def test_check_names_force_ground_truth():
    phi = parse_formula("(mem x y)")
    for a, b in itertools.product(range(8), repeat=2):
        env = {"x": check_name(a, V), "y": check_name(b, V)}
        truth = evaluate(parse_formula(f"(mem #{a} #{b})"))
        assert forces(V, 0, phi, env) is Answer.of(truth)


def test_certificate_is_a_valid_witness():
    from forcingcomp.formula import LevyAtom, Const
    names = [make_name([(hs(0), 1)]), check_name(1, V)]
    W = certificate_for(V, names)
    o = HFOracle(DELTA0_LEVEL, sig=V.sig())
    assert o.query(LevyAtom("forcecert", (Const(W), Const(V.notion)))) is Answer.TRUE


@pytest.mark.parametrize("h", [install_poset((0,), {(0, 0)}), V], ids=["trivial", "V"])
def test_certificate_atom_definition_matches_fast_path(h):
    from forcingcomp.formula import LevyAtom, Var, expand_levy_atoms
    from forcingcomp.hfmodel import HSet, ack_sorted, hs_pair, hs_unpair
    defn = expand_levy_atoms(LevyAtom("forcecert", (Var("W"), Var("pp"))))
    fast = LevyAtom("forcecert", (Var("W"), Var("pp")))
    W = certificate_for(h, [make_name([(hs(0), h.conditions[-1])]), check_name(1, h)])
    C, F = hs_unpair(W)
    variants = [W]
    for e in ack_sorted(F)[:4]:
        variants.append(hs_pair(C, HSet(F - {e})))      # drop one table entry
    for W2 in variants:
        env = {"W": W2, "pp": h.notion}
        assert evaluate(fast, env=env) == evaluate(defn, env=env)
    assert evaluate(fast, env={"W": W, "pp": h.notion}) is True
