import io
import os

import pytest

from forcingcomp.cli import run

DATA = os.path.join(os.path.dirname(__file__), os.pardir, "data")


def data(name):
    return os.path.join(DATA, name)


def call(*argv):
    out = io.StringIO()
    code = run(list(argv), out)
    return code, out.getvalue()


def block(text, kind):
    lines = text.splitlines()
    start = lines.index(f"--- BEGIN {kind} ---")
    end = lines.index("--- END ---", start)
    return lines[start + 1:end]


def test_hf_eval():
    code, out = call("hf-eval", "(subset #1 #3)")
    assert code == 0
    assert "answer: True" in block(out, "result")
    assert "Delta0: 1" in block(out, "queries")


def test_hf_eval_budget():
    code, out = call("hf-eval", "(ex x (and (mem #0 x) (mem #1 x)))")
    assert "answer: OutOfBudget" in block(out, "result")
    code, out = call("hf-eval", "--budget", "4", "(ex x (and (mem #0 x) (mem #1 x)))")
    assert "answer: True" in block(out, "result")


def test_generic_build_atomic_only():
    code, out = call("generic-build", "--model", "hf", "--poset", data("v.poset"))
    assert code == 0
    assert block(out, "filter")[0] == "{1p, a}"
    q = block(out, "queries")
    assert q[0] == "oracle level: Atomic"
    assert all(line.startswith(("oracle", "Atomic", "total")) for line in q)


def test_force_query_two_routes():
    code, out = call("force", "query", "--poset", data("v.poset"), "--p", "a",
                     "--phi", data("v.formula"), "--names", data("v.names"))
    assert code == 0
    res = block(out, "result")
    assert "compiled: True" in res and "semantic: True" in res and "agree: True" in res


def test_extend():
    code, out = call("extend", "--poset", data("v.poset"), "--filter", "b")
    assert code == 0
    assert block(out, "check") == ["quotient agrees with recursive evaluation: True"]
    assert "#4 -> outside bounds" in block(out, "embedding")


def test_matrix_build_and_decode(tmp_path):
    code, out = call("matrix", "build", "--I", "3", "--family", data("family.txt"),
                     "--z", data("z.hex"), "--steps", "64")
    assert code == 0
    assert block(out, "check") == ["invariants hold: True"]
    dump = tmp_path / "m.txt"
    dump.write_text(out)
    code, out2 = call("matrix", "decode", "--matrix", str(dump), "--A", "0,2", "--z", data("z.hex"))
    assert code == 0
    dec = block(out2, "decoded")
    assert "hex: b3a5c96e0f214d87" in dec and "matches z: True" in dec
    # {0, 1} may be amalgamated, so nothing can be decoded from it
    code, _ = call("matrix", "decode", "--matrix", str(dump), "--A", "0,1", "--family", data("family.txt"))
    assert code == 1


def test_functor_run():
    code, out = call("functor", "run", "--poset", data("v.poset"), "--check-laws", "--perms", "2")
    assert code == 0
    laws = block(out, "laws")
    assert "identity: True" in laws and "composition: 2/2" in laws


def test_demo_nonfunctorial():
    code, out = call("demo", "nonfunctorial", "--poset", data("v.poset"), "--orders", "ab", "ba")
    assert code == 0
    assert block(out, "demo")[-1] == "divergence: at condition a"
    code, out = call("demo", "nonfunctorial", "--cohen", "--orders", "0,1", "1,0")
    assert code == 0
    assert block(out, "demo")[-1] == "divergence: at condition 0"


def test_grounds_list():
    code, out = call("grounds-list", "--mock", "parity", "--probe", "4")
    assert code == 0
    assert block(out, "grounds")[-1] == "ground 1: parameter 1, members of 0..3: 1010"


@pytest.mark.parametrize("argv", [
    ["hf-eval", "(mem #1"],
    ["generic-build", "--poset", "no/such/file"],
    ["hf-eval", "--level", "weird", "(mem #0 #1)"],
    ["demo-nonfunctorial", "--poset", data("v.poset"), "--orders", "aa", "ba"],
    ["nonsense"],
])
def test_malformed_input_exits_2(argv):
    assert call(*argv)[0] == 2


def test_level_violation_exits_1():
    assert call("hf-eval", "--level", "atomic", "(ex x (mem x #1))")[0] == 1


def test_determinism():
    argv = ["functor-run", "--poset", data("v.poset"), "--check-laws", "--perms", "2"]
    outs = {call(*argv)[1] for _ in range(3)}
    assert len(outs) == 1
