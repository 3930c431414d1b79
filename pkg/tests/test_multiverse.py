import random

import pytest
from hypothesis import given, strategies as st

from forcingcomp.generic import (
    BudgetExhausted, DenseSet, DishonestWitness, cohen_code, cohen_decision_dense, cohen_length_dense,
)
from forcingcomp.hfmodel import HFOracle
from forcingcomp.multiverse import (
    AmalgamationSpec, MockGrounds, ProductDense, build_matrix, cantor_pair, cantor_unpair,
    catastrophic_real, check_matrix, decode_coded_generic, decode_z, downward_closure,
    enumerate_grounds, length_dense, split_dense, standard_stream, z_coded_generic,
)
from forcingcomp.oracle import ATOMIC, LevelViolation, sigma_level

from naive import decode

FAMILY = downward_closure([{0, 1}, {2}])


def all_one_rows(m, B):
    return [r for r in range(m.height) if all(m.columns[i][r] == "1" for i in B)]


def test_downward_closure():
    assert downward_closure([{0, 1}]) == {frozenset(), frozenset({0}), frozenset({1}), frozenset({0, 1})}


def test_spec_validation():
    with pytest.raises(ValueError):
        AmalgamationSpec((0, 1), [{0}], [], [0])            # missing singleton {1}
    with pytest.raises(ValueError):
        AmalgamationSpec((0, 1), [{0}, {1}, {0, 1, 5}], [], [0])


def test_matrix_by_hand():
    # no dense sets: each step is a 1-row then the z-row
    m = build_matrix(AmalgamationSpec((0,), [{0}], [], [1, 0, 1, 1]), 4)
    assert m.rows() == list("11101111")
    assert decode_z(m, {0}, 4) == [1, 0, 1, 1]   # no padding, so even a family column reads back


def test_shortest_extension_choice():
    D = length_dense({0}, 3)
    m = build_matrix(AmalgamationSpec((0, 1), [{0}, {1}], [D], [0]), 1)
    # column 0 is extended by the least string of length 3, column 1 padded with 0s
    assert m.columns[0] == "000" + "10"
    assert m.columns[1] == "000" + "10"
    assert m.log[0].coding_row == 3


def test_matrix_invariants_and_roundtrip():
    rng = random.Random(7)
    z = [rng.randrange(2) for _ in range(40)]
    spec = AmalgamationSpec((0, 1, 2), FAMILY, standard_stream(FAMILY), z)
    m = build_matrix(spec, 40)
    assert check_matrix(m, spec) == []
    coding = {r for rec in m.log for r in (rec.coding_row, rec.coding_row + 1)}
    for B in ({0, 2}, {1, 2}, {0, 1, 2}):
        assert set(all_one_rows(m, B)) <= coding
        assert decode_z(m, B, 40, spec) == z
    with pytest.raises(ValueError):
        decode_z(m, {0, 1}, 40, spec)


def test_amalgamable_columns_meet_their_dense_sets():
    spec = AmalgamationSpec((0, 1, 2), FAMILY, standard_stream(FAMILY), [0] * 24)
    m = build_matrix(spec, 24)
    for rec in m.log:
        D = spec.dense(rec.dense_index)
        assert D.member({i: m.columns[i][:h] for i, h in rec.met})
        # meeting is preserved by later extension of the columns
        assert D.member({i: m.columns[i] for i in D.A})


def test_check_matrix_detects_tampering():
    spec = AmalgamationSpec((0, 1, 2), FAMILY, standard_stream(FAMILY), [1] * 8)
    m = build_matrix(spec, 8)
    cols = dict(m.columns)
    r = m.log[2].coding_row
    cols[2] = cols[2][:r] + "0" + cols[2][r + 1:]
    broken = type(m)(m.I, cols, m.log)
    assert check_matrix(broken, spec)


def test_split_dense_members():
    D = split_dense({0, 1}, 2)
    w = D.witness({0: "1", 1: "1"})
    assert D.member(w)
    assert not D.member({0: "0101", 1: "0101"})


def test_dishonest_product_witness():
    liar = ProductDense(frozenset({0}), lambda q: False, lambda q: dict(q), "liar")
    with pytest.raises(DishonestWitness):
        build_matrix(AmalgamationSpec((0,), [{0}], [liar], [0]), 1)


def test_dense_set_outside_family_rejected():
    spec = AmalgamationSpec((0, 1), [{0}, {1}], [length_dense({0, 1}, 1)], [0])
    with pytest.raises(ValueError):
        build_matrix(spec, 1)


# ---- z-coded generic -------------------------------------------------------

def test_coded_generic_by_hand():
    G = z_coded_generic([], [1, 0, 1, 0], 3)
    assert G.branch == "1010"
    G2 = z_coded_generic([cohen_length_dense(3)], [0, 1], 1)
    # "0", then the shortest extension to length 3 ("000"), then bit 1
    assert G2.branch == "0001"
    assert G2.ext_lengths == [2]
    assert decode_coded_generic(G2.branch, G2.ext_lengths) == [0, 1]


@given(st.lists(st.integers(0, 1), min_size=9, max_size=9), st.lists(st.text("01", max_size=4), max_size=8))
def test_coded_generic_roundtrip(z, strings):
    stream = [cohen_decision_dense(s) for s in strings]
    G = z_coded_generic(stream, z, len(stream))
    assert decode_coded_generic(G.branch, G.ext_lengths) == z[:len(stream) + 1]
    for D, p in zip(stream, G.sequence[1:]):
        # p_{n+1} is the met condition plus one bit; its parent is in D
        assert D.member(p >> 1)


def test_coded_generic_membership():
    G = z_coded_generic([], [1, 1, 0], 2)
    assert G.member(cohen_code("11")) and not G.member(cohen_code("0"))


def test_coded_generic_search_cap():
    far = DenseSet(lambda p: p >= cohen_code("0" * 30), lambda p: cohen_code("0" * 30), "far")
    with pytest.raises(BudgetExhausted):
        z_coded_generic([far], [0, 0], 1)


# ---- catastrophic real and grounds ---------------------------------------

@given(st.integers(0, 10 ** 30))
def test_cantor_roundtrip(k):
    assert cantor_pair(*cantor_unpair(k)) == k


def test_cantor_small_values():
    assert [cantor_unpair(k) for k in range(6)] == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_catastrophic_real_codes_membership():
    r = catastrophic_real(HFOracle(ATOMIC))
    for k in range(200):
        a, b = cantor_unpair(k)
        assert r[k] == int(decode(a) in decode(b))
    # k = 2 is the pair (0, 1), the only membership among the first six
    assert r.prefix(6) == [0, 0, 1, 0, 0, 0]


def test_grounds_listing():
    o = MockGrounds({0: lambda x: True, 3: lambda x: x < 5})
    gs = enumerate_grounds(o, 0, 6)
    assert [(n, r) for n, r, _ in gs] == [(0, 0), (1, 3)]
    assert [gs[1][2](x) for x in (4, 5)] == [True, False]
    weak = MockGrounds({0: lambda x: True}, level=sigma_level(1))
    with pytest.raises(LevelViolation):
        enumerate_grounds(weak, 0, 2)
