import pytest
from hypothesis import given, settings, strategies as st

from forcingcomp.formula import Const, Exists, Member, Var
from forcingcomp.hfmodel import (
    CodeOverflow, HFOracle, HSet, ack_cmp, ack_sorted, elements, encode_set, evaluate,
    format_set, hf_eval, hs, hs_pair, hs_unpair, kuratowski_pair, kuratowski_unpair,
    morse_pair, parse_set, powerset, set_rank, singleton, to_code, try_code, union,
    unordered_pair, von_neumann,
)
from forcingcomp.oracle import ATOMIC, Answer, FULL, LevelViolation
from forcingcomp.syntax import parse_formula

from naive import decode, encode, holds, kpair, to_package

codes = st.integers(min_value=0, max_value=4095)


@given(codes)
def test_decode_matches_reference(n):
    assert hs(n) == decode(n)
    assert to_code(hs(n)) == n
    assert sorted(elements(n)) == sorted(encode(e) for e in decode(n))


@given(codes, codes)
def test_membership_is_a_bit_test(a, b):
    assert (a in elements(b)) == (decode(a) in decode(b))


def test_small_codes_by_hand():
    # 0 = {}, 1 = {0}, 2 = {1}, 3 = {0, 1}, 11 = {0, 1, 3}
    assert format_set(0) == "{}"
    assert format_set(3) == "{{},{{}}}"
    assert von_neumann(0) == 0
    assert von_neumann(3) == 11
    assert [set_rank(von_neumann(k)) for k in range(5)] == [0, 1, 2, 3, 4]
    assert singleton(0) == 1
    assert unordered_pair(0, 1) == 3
    assert union(11) == 3
    assert powerset(1) == 3


@given(st.integers(0, 11), st.integers(0, 11))
def test_kuratowski_pair_reference(a, b):
    code = kuratowski_pair(a, b)
    assert decode(code) == kpair(decode(a), decode(b))
    assert kuratowski_unpair(code) == (a, b)
    assert hs_pair(a, b) == decode(code)
    assert hs_unpair(hs_pair(a, b)) == (hs(a), hs(b))


def test_unpair_rejects_non_pairs():
    assert kuratowski_unpair(0) is None
    assert kuratowski_unpair(5) is None     # {0, 2} = {{}, {{{}}}}
    assert hs_unpair(HSet()) is None


def test_morse_pair_tags_sides():
    m = decode(morse_pair(3, 1))
    zero, one = decode(0), decode(1)
    assert m == {kpair(zero, zero), kpair(zero, one), kpair(one, zero)}


@given(st.lists(codes, max_size=6))
def test_encode_set_is_sum_of_powers(xs):
    assert encode_set(xs) == sum(2 ** x for x in set(xs))


def test_ackermann_order():
    xs = [hs(n) for n in (9, 0, 5, 3)]
    assert [to_code(x) for x in ack_sorted(xs)] == [0, 3, 5, 9]
    assert ack_cmp(2, 7) < 0 and ack_cmp(7, 7) == 0


@given(codes)
def test_format_parse_roundtrip(n):
    assert parse_set(format_set(n)) == hs(n)


def test_parse_set_errors():
    with pytest.raises(ValueError):
        parse_set("{{}")
    with pytest.raises(ValueError):
        parse_set("x")


def test_code_bound(monkeypatch):
    monkeypatch.setenv("FORCINGCOMP_MAX_CODE_BITS", "64")
    with pytest.raises(CodeOverflow):
        encode_set([70])
    big = HSet([hs(70), hs(71)])   # a structural set survives without a code
    assert try_code(big) is None
    assert len(big) == 2


# ---- evaluation ------------------------------------------------------------

def _delta0(depth, nvars=0):
    """Random Delta0 sentences in the tuple syntax of the reference evaluator."""
    vars_ = [f"v{i}" for i in range(nvars)]
    term = st.one_of([st.tuples(st.just("c"), st.integers(0, 40))] + ([st.sampled_from(vars_)] if vars_ else []))
    atomic = st.tuples(st.sampled_from(["in", "eq"]), term, term)
    if depth == 0:
        return atomic
    sub = _delta0(depth - 1, nvars)
    inner = _delta0(depth - 1, nvars + 1)
    return st.one_of(
        atomic,
        st.tuples(st.just("not"), sub),
        st.tuples(st.sampled_from(["and", "or"]), sub, sub),
        st.tuples(st.sampled_from(["bex", "ball"]), st.just(f"v{nvars}"), term, inner),
    )


@settings(max_examples=300)
@given(_delta0(3))
def test_delta0_agrees_with_reference(f):
    assert evaluate(to_package(f)) == holds(f)


def test_unbounded_search_respects_budget():
    two = parse_formula("(ex x (and (mem #0 x) (mem #1 x)))")
    assert hf_eval(two, 0) is Answer.OUT_OF_BUDGET
    assert hf_eval(two, 4) is Answer.TRUE   # witness #3 = {0, 1}
    # guarded quantifiers are exact, whatever the budget
    assert hf_eval(parse_formula("(ex x (mem x #5))")) is Answer.TRUE
    assert hf_eval(parse_formula("(all x (mem x #5))")) is Answer.FALSE
    assert hf_eval(parse_formula("(all x (implies (mem x #5) (subset x #5)))")) is Answer.FALSE
    assert hf_eval(parse_formula("(all x (implies (mem x #3) (subset x #3)))")) is Answer.TRUE


def test_oracle_level_discipline():
    o = HFOracle(ATOMIC)
    assert o.query(Member(Const(0), Const(1))) is Answer.TRUE
    with pytest.raises(LevelViolation):
        o.query(Exists("x", Member(Var("x"), Const(1))))
    assert HFOracle(FULL).query(Exists("x", Member(Var("x"), Const(1)))) is Answer.TRUE
