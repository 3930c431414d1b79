import itertools

import pytest
from hypothesis import given, settings, strategies as st

from forcingcomp.extension import FiniteFilter, build_quotient, evaluate_recursive
from forcingcomp.functor import (
    IndexedHF, ListingGap, MockDefinability, MorphismError, canonical_listing, cohen_order_demo,
    dense_listing, expanded_hf, hf_definability, order_sensitivity_demo, phi_morphism, phi_object,
    pointwise_generic,
)
from forcingcomp.hfmodel import HSet, hs, install_poset, to_code
from forcingcomp.oracle import DELTA0_LEVEL, FinPerm, LevelViolation, RecordingOracle
from forcingcomp.posets import FinitePoset
from forcingcomp.syntax import parse_formula

from naive import generic_filters

V = install_poset((0, 1, 2), {(0, 0), (1, 1), (2, 2), (1, 0), (2, 0)})


@pytest.fixture(scope="module")
def ev():
    return expanded_hf(V)


@pytest.fixture(scope="module")
def obj(ev):
    return phi_object(ev)


def test_indexed_hf_is_a_bijection():
    o = IndexedHF([hs(1 << 20), hs(5)])
    seen = [o.decode(n) for n in range(300)]
    assert len(set(seen)) == 300
    assert all(o.encode(x) == n for n, x in enumerate(seen))
    # membership agrees with the sets the indices stand for
    for a, b in itertools.product(range(30), repeat=2):
        assert o.member(a, b) == (o.decode(a) in o.decode(b))


def test_indexed_hf_level():
    o = IndexedHF([hs(3)])
    with pytest.raises(LevelViolation):
        o.query(parse_formula("(ex x (mem x #1))"))


def test_constants_point_at_the_right_sets(ev):
    L = ev.base.decode(ev.p)
    assert len(L) == len(V.poset.leq)
    assert {to_code(d) for d in map(ev.base.decode, ev.d)} == {to_code(HSet(hs(c) for c in D))
                                                               for D in V.poset.dense_sets()}


def test_object_filter_is_generic(ev, obj):
    G = {to_code(ev.base.decode(q)) for q in obj.generic.filter()}
    assert frozenset(G) in generic_filters(V.conditions, set(V.poset.leq))
    assert G == {0, 1}      # least choice takes condition a


def test_fragment_matches_quotient(ev, obj):
    fr = obj.fragment
    G = FiniteFilter(V, {to_code(ev.base.decode(q)) for q in obj.generic.filter()})
    vals = [evaluate_recursive(G, fr.collapse(r)) for r in fr.reps]
    q = build_quotient(None, V, G, 2, 2)
    assert sorted(vals) == sorted(evaluate_recursive(G, r) for r in q.representatives)
    for (i, a), (j, b) in itertools.product(enumerate(fr.reps), repeat=2):
        assert fr.table[(a, b)] == (hs(vals[i]) in hs(vals[j]))


def test_greatest_choice_gives_the_other_generic():
    e = expanded_hf(V, "greatest")
    G = {to_code(e.base.decode(q)) for q in phi_object(e).generic.filter()}
    assert G == {0, 2}


def test_choice_table_validated():
    with pytest.raises(ValueError):
        expanded_hf(V, {frozenset({1, 2}): 0})


def test_object_uses_delta0_only():
    e = expanded_hf(V)
    rec = RecordingOracle(e.base)
    phi_object(type(e)(rec, e.p, e.c, e.d))
    assert rec.count_above(DELTA0_LEVEL) == 0 and rec.counts()["Delta0"] > 0


def test_identity_law(ev, obj):
    m = phi_morphism(ev, ev, FinPerm.identity(), objects=(obj, obj))
    assert all(m(r) == r for r in obj.fragment.reps)


@settings(max_examples=6, deadline=None)
@given(st.permutations(range(5)), st.permutations(range(5)))
def test_composition_and_invariance(ev, obj, img_f, img_g):
    f = FinPerm.from_pairs(zip(range(5), img_f))
    g = FinPerm.from_pairs(zip(range(5), img_g))
    ef, egf = ev.relabel(f), ev.relabel(f).relabel(g)
    of, ogf = phi_object(ef), phi_object(egf)
    assert of.generic.filter() == frozenset(f(q) for q in obj.generic.filter())
    mf = phi_morphism(ev, ef, f, objects=(obj, of))
    mg = phi_morphism(ef, egf, g, objects=(of, ogf))
    mgf = phi_morphism(ev, egf, g.compose(f), objects=(obj, ogf))
    assert all(mgf(r) == mg(mf(r)) for r in obj.fragment.reps)


def test_morphism_must_respect_constants(ev):
    f = FinPerm.from_pairs([(ev.p, ev.p + 1), (ev.p + 1, ev.p)])
    with pytest.raises(MorphismError):
        phi_morphism(ev, ev, f)


# ---- listings --------------------------------------------------------------

def test_canonical_listing_and_gaps():
    d = MockDefinability([5, None, 3, 5])
    assert canonical_listing(d) == [5, 3, 5]
    with pytest.raises(ListingGap):
        d(4)


def test_hf_definability():
    defs = [parse_formula("(atom empty x)"), parse_formula("(mem #0 x)"), parse_formula("(eq x #3)")]
    d = hf_definability(defs, 8)
    # "0 in x" holds of 1, 3, 5, 7: not a definition of one element
    assert canonical_listing(d) == [0, 3]


def test_pointwise_generic_follows_listing():
    P = V.poset
    dense = {"D": frozenset({1, 2}), "E": frozenset({0, 1, 2})}
    listing = ["E", 2, "D", 1]
    seq = pointwise_generic(listing, P, lambda m: dense.get(m) if isinstance(m, str) else None,
                            lambda m: m if isinstance(m, int) else None)
    assert seq == [0, 2, 2]
    assert dense_listing(listing, lambda m: isinstance(m, str)) == ["E", "D"]


# ---- order sensitivity -----------------------------------------------------

def test_order_demo_on_v():
    r = order_sensitivity_demo(V.poset, [0, 1, 2], [0, 2, 1])
    assert r.valid1 and r.valid2
    assert set(r.filter1) == {0, 1} and set(r.filter2) == {0, 2}
    assert r.difference == 1 and not r.agree


def test_order_demo_agrees_on_a_chain():
    chain = FinitePoset.from_pairs((0, 1, 2), [(1, 0), (2, 1)])
    r = order_sensitivity_demo(chain, [0, 1, 2], [2, 1, 0])
    assert r.agree and r.valid1 and r.valid2


def test_order_demo_rejects_bad_orders():
    with pytest.raises(ValueError):
        order_sensitivity_demo(V.poset, [0, 1], [0, 1, 2])


def test_cohen_order_demo():
    r = cohen_order_demo(["0", "1"], ["1", "0"])
    assert r.valid1 and r.valid2
    assert r.difference == "0"
    assert r.filter1[-1] != r.filter2[-1]
