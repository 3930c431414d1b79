import dataclasses

import pytest
from hypothesis import given, strategies as st

from forcingcomp.hfmodel import HFOracle, hs, install_poset, to_code
from forcingcomp.names import (
    check_name, enumerate_names, format_name, interpret_name, is_name, is_name_direct, make_name,
    name_rank, parse_name, parse_names_file, verify_certificate,
)
from forcingcomp.oracle import DELTA0_LEVEL, RecordingOracle
from forcingcomp.posets import all_posets

from naive import decode, kpair, value

V = install_poset((0, 1, 2), {(0, 0), (1, 1), (2, 2), (1, 0), (2, 0)})
TRIVIAL = install_poset((0,), {(0, 0)})


def ref_is_name(x: frozenset, conds) -> bool:
    cs = [decode(c) for c in conds]
    for e in x:
        hits = [t for t in _all_sub(e) for p in cs if e == kpair(t, p)]
        if not hits or not any(ref_is_name(t, conds) for t in hits):
            return False
    return True


def _all_sub(e):
    return {a for u in e for a in u}


@pytest.mark.parametrize("P", all_posets(3), ids=str)
def test_is_name_agrees_with_reference(P):
    h = install_poset(P.conditions, P.leq)
    o = RecordingOracle(HFOracle(DELTA0_LEVEL))
    for x in range(600):
        res = is_name(o, h.handle, x)
        assert bool(res) == is_name_direct(x, P.conditions) == ref_is_name(decode(x), P.conditions), x
        assert verify_certificate(o, h.handle, res.certificate)
    assert o.count_above(DELTA0_LEVEL) == 0


def test_tampered_certificates_fail():
    o = HFOracle(DELTA0_LEVEL)
    good = is_name(o, V.handle, 4)          # {(0, 0)} = {2} is a name
    assert good.is_name
    assert not verify_certificate(o, V.handle, dataclasses.replace(good.certificate, nodes=()))
    bad = is_name(o, V.handle, 3)           # {0, 1} is not
    assert not bad.is_name
    assert bad.certificate.polarity == "negative"
    assert not verify_certificate(o, V.handle, dataclasses.replace(bad.certificate, nodes=(2,)))


def test_enumeration_counts_by_hand():
    # trivial poset: {}, {(0,1)}, then names over those two at rank 2
    assert len(enumerate_names(TRIVIAL, 2, 2)) == 4
    # V poset: rank 1 gives 1 + 3 + 3 = 7 names; rank 2 gives all <=2-subsets of 21 pairs
    assert len(enumerate_names(V, 1, 2)) == 7
    assert len(enumerate_names(V, 2, 2)) == 1 + 21 + 210
    names = enumerate_names(V, 2, 2)
    assert all(is_name_direct(n, V.conditions) for n in names)
    assert all(name_rank(n) <= 2 for n in names)


@given(st.integers(0, 40))
def test_check_names_evaluate_to_their_set(x):
    ch = check_name(x, V)
    for G in ({0}, {0, 1}, {0, 2}):
        assert interpret_name(ch, frozenset(G)) == hs(x)
        assert value(ch, G, to_code) == decode(x)


def test_interpretation_against_reference():
    for sigma in enumerate_names(V, 2, 2):
        for G in ({0, 1}, {0, 2}):
            assert interpret_name(sigma, frozenset(G)) == value(sigma, G, to_code)


def test_name_syntax():
    sigma = parse_name("{(#0, 1), ({(#0, 0)}, 2)}")
    assert sigma == make_name([(0, 1), (make_name([(0, 0)]), 2)])
    assert format_name(sigma) == "{({}, 1), ({({}, 0)}, 2)}"
    assert parse_name(format_name(sigma)) == sigma
    assert parse_name("check(1)", top=0) == check_name(1, 0)
    labels = {"top": 0, "a": 1}
    names = parse_names_file("# comment\ns = {(check(0), a)}\n\nt = #0\n", labels.__getitem__)
    assert names == {"s": make_name([(check_name(0, 0), 1)]), "t": hs(0)}
    with pytest.raises(ValueError):
        parse_name("{(#0, 1)")
    with pytest.raises(ValueError):
        parse_names_file("no equals sign")
