import pytest
from hypothesis import given, strategies as st

from forcingcomp.formula import Const, Member, Var
from forcingcomp.hfmodel import HFOracle
from forcingcomp.oracle import (
    ATOMIC, DELTA0_LEVEL, FULL, Answer, FinPerm, LevelViolation, OracleError, RecordingOracle,
    level_of, permute, read_dump, relabel, restrict, sigma_level, write_dump,
)
from forcingcomp.syntax import parse_formula

from naive import decode


def test_levels_are_ordered():
    assert ATOMIC < DELTA0_LEVEL < sigma_level(1) < sigma_level(2) < FULL
    assert [str(l) for l in (ATOMIC, DELTA0_LEVEL, sigma_level(2), FULL)] == \
        ["Atomic", "Delta0", "Sigma(2)", "Full"]
    with pytest.raises(OracleError):
        sigma_level(0)


def test_level_of():
    assert level_of(parse_formula("(mem #1 #2)")) == ATOMIC
    assert level_of(parse_formula("(bex x #2 (mem x #2))")) == DELTA0_LEVEL
    assert level_of(parse_formula("(all x (mem x #2))")) == sigma_level(1)
    assert level_of(parse_formula("(ex x (all y (mem y x)))")) == sigma_level(2)


def test_answer_is_three_valued():
    with pytest.raises(TypeError):
        bool(Answer.TRUE)
    assert Answer.of(None) is Answer.OUT_OF_BUDGET
    assert str(Answer.OUT_OF_BUDGET) == "OutOfBudget"


def test_free_variables_rejected():
    with pytest.raises(OracleError):
        HFOracle().query(Member(Var("x"), Const(1)))


def test_recording_counts_per_level():
    rec = RecordingOracle(HFOracle(FULL))
    rec.query(parse_formula("(mem #0 #1)"))
    rec.query(parse_formula("(mem #1 #1)"))
    rec.query(parse_formula("(bex x #3 (mem x #1))"))
    assert rec.counts() == {"Atomic": 2, "Delta0": 1}
    assert rec.count_above(ATOMIC) == 1
    assert rec.atomic_transcript() == [(0, 1, True), (1, 1, False)]


def test_restrict_lowers_only():
    o = restrict(HFOracle(FULL), DELTA0_LEVEL)
    assert o.query(parse_formula("(bex x #3 (mem x #1))")) is Answer.TRUE
    with pytest.raises(LevelViolation):
        o.query(parse_formula("(ex x (mem x #1))"))
    with pytest.raises(LevelViolation):
        restrict(HFOracle(ATOMIC), FULL)


perms = st.permutations(range(6)).map(lambda img: FinPerm.from_pairs(zip(range(6), img)))


@given(perms, st.integers(0, 7), st.integers(0, 7))
def test_permuted_presentation_is_isomorphic(f, a, b):
    base = HFOracle(ATOMIC)
    p = permute(base, f)
    # f(n) now denotes what n denoted, so membership transports along f
    assert p.oracle.member(f(a), f(b)) == (decode(a) in decode(b))
    assert p.to_base(f(a)) == a


@given(perms, perms)
def test_finperm_group_laws(f, g):
    assert f.compose(f.inverse()) == FinPerm.identity()
    for n in range(8):
        assert f.compose(g)(n) == f(g(n))


def test_finperm_rejects_non_bijections():
    with pytest.raises(OracleError):
        FinPerm.from_pairs([(0, 1), (1, 1)])
    with pytest.raises(OracleError):
        FinPerm.from_pairs([(0, 1)])


def test_relabel_moves_bounds_too():
    s = relabel(parse_formula("(bex x #2 (mem x #0))"), FinPerm.from_pairs([(0, 2), (2, 0)]))
    assert s == parse_formula("(bex x #0 (mem x #2))")


def test_dump_roundtrip():
    rec = RecordingOracle(HFOracle(ATOMIC))
    for a in range(4):
        for b in range(4):
            rec.member(a, b)
    text = write_dump(rec.atomic_transcript())
    d = read_dump(text)
    assert all(d.member(a, b) == (decode(a) in decode(b)) for a in range(4) for b in range(4))
    assert d.query(parse_formula("(mem #9 #9)")) is Answer.OUT_OF_BUDGET
    with pytest.raises(OracleError):
        read_dump("MEM 1")
