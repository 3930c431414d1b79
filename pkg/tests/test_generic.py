import itertools

import pytest
from hypothesis import given, strategies as st

from forcingcomp.generic import (
    DenseClassWitness, DenseSet, DishonestWitness, Undecided, build_generic, build_generic_abstract,
    build_generic_class, cohen_code, cohen_decision_dense, cohen_length_dense, cohen_poset,
    cohen_string, decide_leq, decide_perp, decode_pairs,
)
from forcingcomp.hfmodel import HFOracle, install_poset
from forcingcomp.oracle import ATOMIC, DELTA0_LEVEL, OracleError, RecordingOracle
from forcingcomp.posets import FinitePoset, PosetError, all_posets, parse_poset
from forcingcomp.syntax import parse_formula

from naive import generic_filters, leq_closure


def test_poset_counts_up_to_isomorphism():
    # posets with a maximum on n points = posets on n-1 points: 1, 1, 2, 5
    assert [len(all_posets(k)) for k in range(1, 5)] == [1, 2, 4, 9]


def test_poset_validation():
    with pytest.raises(PosetError):
        FinitePoset((0, 1), frozenset({(0, 0), (1, 1)}))          # no maximum
    with pytest.raises(PosetError):
        FinitePoset((0, 1), frozenset({(0, 0), (1, 1), (0, 1), (1, 0)}))
    P = FinitePoset.from_pairs((0, 1, 2), [(2, 1), (1, 0)])
    assert P.le(2, 0) and P.top == 0


def test_parse_poset_file():
    pf = parse_poset("COND 0 top\nCOND 5 a  # comment\nLEQ a top\n")
    assert pf.poset.conditions == (0, 5)
    assert pf.resolve("a") == 5 and pf.label(0) == "top"
    with pytest.raises(PosetError):
        parse_poset("COND 0\nLEQ 0 9\n")
    with pytest.raises(PosetError):
        parse_poset("FROB 1\n")


@pytest.mark.parametrize("P", all_posets(4), ids=str)
def test_dense_sets_and_generics_against_reference(P):
    conds = P.conditions
    leq = leq_closure(conds, P.leq)
    assert leq == set(P.leq)
    ref_dense = [frozenset(D) for k in range(1, len(conds) + 1) for D in itertools.combinations(conds, k)
                 if all(any((d, p) in leq for d in D) for p in conds)]
    assert sorted(map(sorted, P.dense_sets())) == sorted(map(sorted, ref_dense))
    assert sorted(map(sorted, P.generic_filters())) == sorted(map(sorted, generic_filters(conds, leq)))


@pytest.mark.parametrize("P", all_posets(3), ids=str)
def test_atomic_decisions_match_order(P):
    h = install_poset(P.conditions, P.leq)
    o = HFOracle(ATOMIC)
    for p in P.conditions:
        for q in P.conditions:
            assert decide_leq(o, h.handle, p, q) == P.le(p, q)
            assert decide_perp(o, h.handle, p, q) == P.perp(p, q)


def test_decode_pairs_finds_the_relation():
    h = install_poset((0, 1, 2), {(0, 0), (1, 1), (2, 2), (1, 0), (2, 0)})
    found = set(itertools.islice(decode_pairs(HFOracle(ATOMIC), h.handle.leq, diagonal=h.handle.P), 5))
    assert found == {(0, 0), (1, 1), (2, 2), (1, 0), (2, 0)}


@pytest.mark.parametrize("P", all_posets(4), ids=str)
def test_build_generic_uses_atomic_queries_only(P):
    h = install_poset(P.conditions, P.leq)
    rec = RecordingOracle(HFOracle(ATOMIC))
    G = build_generic(rec, h.handle, scan_limit=h.handle.dense_family + 1)
    filt = frozenset(c for c in P.conditions if G.member(c))
    assert filt in generic_filters(P.conditions, set(P.leq))
    assert rec.count_above(ATOMIC) == 0
    # each step extends the previous one
    assert all(P.le(a, b) for a, b in zip(G.sequence[1:], G.sequence))


def test_build_generic_rejects_non_conditions():
    h = install_poset((0, 1), {(0, 0), (1, 1), (1, 0)})
    G = build_generic(HFOracle(ATOMIC), h.handle, scan_limit=h.handle.dense_family + 1)
    with pytest.raises(OracleError):
        G.member(7)


@given(st.text(alphabet="01", max_size=10))
def test_cohen_codes(s):
    assert cohen_string(cohen_code(s)) == s


def test_cohen_generic_meets_its_stream():
    stream = [cohen_length_dense(3), cohen_decision_dense("11"), cohen_length_dense(5)]
    G = build_generic_abstract(cohen_poset(lambda n: stream[n]), len(stream))
    last = G.sequence[-1]
    assert [cohen_string(p) for p in G.sequence] == ["", "000", "000", "00000"]
    assert all(D.member(p) for D, p in zip(stream, G.sequence[1:]))
    assert G.member(cohen_code("00")) and not G.member(cohen_code("1"))
    with pytest.raises(Undecided):
        build_generic_abstract(cohen_poset(lambda n: stream[n]), 1).member(cohen_code("0000"))
    assert last == cohen_code("00000")


def test_dishonest_witness_detected():
    liar = DenseSet(lambda p: True, lambda p: cohen_code("1"), "liar")
    P = cohen_poset(lambda n: [cohen_length_dense(2), liar][n])
    with pytest.raises(DishonestWitness):
        build_generic_abstract(P, 2)


def test_class_forcing_with_witnesses():
    # conditions: all sets; x <= y iff y is a subset of x; dense classes "contains k"
    o = RecordingOracle(HFOracle(DELTA0_LEVEL))
    leq = parse_formula("(subset y x)")
    classes = [DenseClassWitness(parse_formula(f"(mem #{k} x)"), lambda p, k=k: p | (1 << k), label=f"has {k}")
               for k in (0, 2)]
    G = build_generic_class(o, parse_formula("(eq x x)"), 0, classes, class_leq=leq,
                            class_perp=parse_formula("(and (eq x x) (not (eq x x)))"))
    assert G.sequence == [0, 1, 5]
    assert G.member(4) and G.member(0)
    assert o.count_above(DELTA0_LEVEL) == 0
    bad = [DenseClassWitness(parse_formula("(mem #3 x)"), lambda p: p, label="stuck")]
    with pytest.raises(DishonestWitness):
        build_generic_class(o, parse_formula("(eq x x)"), 0, bad, class_leq=leq)
