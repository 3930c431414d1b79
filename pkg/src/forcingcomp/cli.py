"""Command line front end.

Every command prints framed blocks (``--- BEGIN <kind> ---`` ... ``--- END ---``)
and a ``queries`` block with the oracle level and query counts per level.
Exit status: 0 success, 1 contract violation, 2 malformed input.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from typing import Optional

from .extension import BoundOverflow, FiniteFilter, build_quotient, canonical_embedding, evaluate_recursive, filter_from
from .formula import FormulaError
from .forcingrel import forces, forces_semantic
from .functor import (
    MorphismError, cohen_order_demo, expanded_hf, order_sensitivity_demo, phi_morphism, phi_object,
)
from .generic import BudgetExhausted, DishonestWitness, Undecided, build_generic
from .hfmodel import CodeOverflow, HFOracle, hs, install_poset, to_code
from .multiverse import (
    AmalgamationSpec, Matrix, MockGrounds, StepRecord, build_matrix, check_matrix, decode_z,
    downward_closure, enumerate_grounds, standard_stream,
)
from .names import format_name, parse_names_file
from .oracle import ATOMIC, DELTA0_LEVEL, FULL, FinPerm, LevelViolation, OracleError, RecordingOracle, sigma_level
from .posets import PosetError, parse_poset
from .syntax import format_formula, parse_formula

__all__ = ["main", "run"]


class InputError(Exception):
    """Malformed input (exit 2)."""


class ContractViolation(Exception):
    """A checked property failed (exit 1)."""


# --------------------------------------------------------------------------
# output

class Report:
    def __init__(self, out):
        self.out = out

    def block(self, kind: str, lines) -> None:
        print(f"--- BEGIN {kind} ---", file=self.out)
        for line in lines:
            print(line, file=self.out)
        print("--- END ---", file=self.out)

    def queries(self, level, *recorders) -> None:
        counts = {}
        for r in recorders:
            for k, v in r.counts().items():
                counts[k] = counts.get(k, 0) + v
        lines = [f"oracle level: {level}"]
        lines += [f"{k}: {v}" for k, v in sorted(counts.items())] or ["none"]
        lines.append(f"total: {sum(counts.values())}")
        self.block("queries", lines)


# --------------------------------------------------------------------------
# input helpers

def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def _text_or_file(arg: str) -> str:
    return _read(arg) if os.path.isfile(arg) else arg


def _poset(path: str):
    try:
        pf = parse_poset(_read(path))
        h = install_poset(pf.poset.conditions, pf.poset.leq)
    except (PosetError, ValueError) as e:
        raise InputError(f"{path}: {e}") from None
    return pf, h


def _formula(arg: str):
    try:
        return parse_formula(_text_or_file(arg))
    except FormulaError as e:
        raise InputError(f"formula: {e}") from None


def _level(text: str):
    t = text.lower()
    if t == "atomic":
        return ATOMIC
    if t == "delta0":
        return DELTA0_LEVEL
    if t == "full":
        return FULL
    if t.startswith("sigma") and t[5:].isdigit():
        return sigma_level(int(t[5:]))
    raise InputError(f"unknown level {text!r} (atomic, delta0, sigmaN, full)")


def _int_list(text: str) -> list:
    try:
        return [int(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {text!r}") from None


def _hex_bits(text: str) -> list:
    digits = "".join(text.split())
    try:
        return [int(b) for ch in digits for b in format(int(ch, 16), "04b")]
    except ValueError:
        raise InputError("z file must contain hexadecimal digits") from None


def _family(path: str, I: list) -> frozenset:
    fam = [frozenset([i]) for i in I]
    for lineno, raw in enumerate(_read(path).splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            fam.append(frozenset(_int_list(line)))
    return downward_closure(fam)


def _generic_over(h, scan_limit=None):
    rec = RecordingOracle(HFOracle(ATOMIC))
    limit = h.handle.dense_family + 1 if scan_limit is None else scan_limit
    G = build_generic(rec, h.handle, scan_limit=limit)
    G.extend(limit)
    return G, rec


# --------------------------------------------------------------------------
# commands

def cmd_hf_eval(a, rep: Report) -> int:
    phi = _formula(a.formula)
    level = _level(a.level)
    rec = RecordingOracle(HFOracle(level))
    ans = rec.query(phi, a.budget)
    rep.block("result", [f"formula: {format_formula(phi)}", f"budget: {a.budget}", f"answer: {ans}"])
    rep.queries(level, rec)
    return 0


def cmd_generic_build(a, rep: Report) -> int:
    if a.model != "hf":
        raise InputError("only --model hf is available from the command line")
    pf, h = _poset(a.poset)
    G, rec = _generic_over(h, a.scan_limit)
    conds = h.conditions
    member = [c for c in conds if G.member(c)]
    dense = h.dense_sets()
    met = all(any(G.member(c) for c in D) for D in dense)
    rep.block("sequence", [f"p{i} = {pf.label(p)}" for i, p in enumerate(G.sequence)])
    rep.block("dense", [f"d{i} = #{d}" for i, d in enumerate(G.dense_sets)])
    rep.block("filter", ["{" + ", ".join(pf.label(c) for c in member) + "}",
                         f"meets all {len(dense)} dense sets: {met}"])
    rep.queries(ATOMIC, rec)
    if not met or rec.count_above(ATOMIC):
        raise ContractViolation("generic filter contract failed")
    return 0


def cmd_force_query(a, rep: Report) -> int:
    pf, h = _poset(a.poset)
    phi = _formula(a.phi)
    try:
        p = pf.resolve(a.p)
        names = parse_names_file(_read(a.names), pf.resolve, h.top)
    except (PosetError, ValueError) as e:
        raise InputError(str(e)) from None
    rec = RecordingOracle(HFOracle(FULL, sig=h.sig()))
    lines = [f"formula: {format_formula(phi)}", f"condition: {pf.label(p)}"]
    lines += [f"{v} = {format_name(names[v], pf.label)}" for v in sorted(names)]
    out = {}
    if a.route in ("compiled", "both"):
        out["compiled"] = forces(h, p, phi, names, a.budget, oracle=rec)
    if a.route in ("semantic", "both"):
        out["semantic"] = forces_semantic(h, p, phi, names, a.budget)
    lines += [f"{k}: {v}" for k, v in out.items()]
    decided = {str(v) for v in out.values() if str(v) != "OutOfBudget"}
    lines.append(f"agree: {len(decided) <= 1}")
    rep.block("result", lines)
    rep.queries(FULL, rec)
    if len(decided) > 1:
        raise ContractViolation("the two routes disagree")
    return 0


def cmd_extend(a, rep: Report) -> int:
    pf, h = _poset(a.poset)
    recs = []
    if a.filter == "auto":
        G0, r0 = _generic_over(h)
        recs.append(r0)
        G = FiniteFilter(h, [c for c in h.conditions if G0.member(c)])
    else:
        try:
            G = filter_from(h, [pf.resolve(t) for t in a.filter.split(",") if t])
        except (PosetError, ValueError) as e:
            raise InputError(str(e)) from None
    rec = RecordingOracle(HFOracle(DELTA0_LEVEL, sig=h.sig()))
    recs.append(rec)
    q = build_quotient(rec, h, G, a.rank, a.size)
    lines = [f"bounds: {q.bounds()}", "filter: {" + ", ".join(pf.label(c) for c in sorted(G.conds)) + "}"]
    bad = 0
    vals = []
    for i, r in enumerate(q.representatives):
        v = evaluate_recursive(G, r)
        vals.append(v)
        lines.append(f"{i}: {format_name(r, pf.label)}  value #{v}")
    rep.block("representatives", lines)
    rows = []
    for i in range(len(q)):
        row = "".join("1" if q.membership(i, j) else "0" for j in range(len(q)))
        rows.append(f"{i}: {row}")
        for j in range(len(q)):
            bad += q.membership(i, j) != (hs(vals[i]) in hs(vals[j]))
    rep.block("membership", rows)
    emb = []
    for x in range(a.embed):
        try:
            emb.append(f"#{x} -> {canonical_embedding(q, x)}")
        except BoundOverflow:
            emb.append(f"#{x} -> outside bounds")
    rep.block("embedding", emb)
    rep.block("check", [f"quotient agrees with recursive evaluation: {bad == 0}"])
    rep.queries(DELTA0_LEVEL, *recs)
    if bad:
        raise ContractViolation("quotient disagrees with recursive evaluation")
    return 0


def _matrix_lines(m: Matrix) -> list:
    return m.rows()


def _log_lines(m: Matrix) -> list:
    out = []
    for r in m.log:
        met = ",".join(f"{i}:{h}" for i, h in r.met) or "-"
        A = ",".join(map(str, sorted(r.A))) or "-"
        out.append(f"step {r.dense_index} A {A} start {r.start} met {met} coding {r.coding_row}")
    return out


def cmd_matrix_build(a, rep: Report) -> int:
    I = list(range(a.I))
    fam = _family(a.family, I)
    z = _hex_bits(_read(a.z))
    if len(z) < a.steps:
        raise InputError(f"z has {len(z)} bits, need {a.steps}")
    try:
        spec = AmalgamationSpec(tuple(I), fam, standard_stream(fam), z)
    except ValueError as e:
        raise InputError(str(e)) from None
    m = build_matrix(spec, a.steps)
    bad = check_matrix(m, spec)
    fam_lines = sorted(",".join(map(str, sorted(A))) or "-" for A in fam)
    rep.block("spec", [f"I: {a.I}", f"steps: {a.steps}", "family: " + " ".join(sorted(fam_lines, key=lambda s: (len(s), s)))])
    rep.block("matrix", _matrix_lines(m))
    rep.block("log", _log_lines(m))
    rep.block("check", [f"invariants hold: {not bad}"] + bad[:10])
    rep.queries("none")
    if bad:
        raise ContractViolation("matrix invariants failed")
    return 0


def _parse_matrix_dump(text: str) -> Matrix:
    blocks, cur, kind = {}, None, None
    for line in text.splitlines():
        if line.startswith("--- BEGIN "):
            kind, cur = line[10:-4], []
        elif line == "--- END ---" and kind is not None:
            blocks[kind] = cur
            kind = None
        elif kind is not None:
            cur.append(line)
    if "matrix" not in blocks or "log" not in blocks:
        raise InputError("matrix file needs 'matrix' and 'log' blocks")
    rows = blocks["matrix"]
    width = len(rows[0]) if rows else 0
    if any(len(r) != width or set(r) - {"0", "1"} for r in rows):
        raise InputError("matrix rows must be equal-length strings of 0 and 1")
    cols = {i: "".join(r[i] for r in rows) for i in range(width)}
    log = []
    for line in blocks["log"]:
        f = line.split()
        try:
            n, A, start, met, coding = int(f[1]), f[3], int(f[5]), f[7], int(f[9])
        except (IndexError, ValueError):
            raise InputError(f"bad log line {line!r}") from None
        A = frozenset() if A == "-" else frozenset(_int_list(A))
        met = () if met == "-" else tuple(tuple(map(int, x.split(":"))) for x in met.split(","))
        log.append(StepRecord(n, A, start, met, coding))
    return Matrix(tuple(range(width)), cols, tuple(log))


def cmd_matrix_decode(a, rep: Report) -> int:
    m = _parse_matrix_dump(_read(a.matrix))
    A = frozenset(_int_list(a.A))
    if a.family is not None and A in _family(a.family, list(m.I)):
        raise ContractViolation("A is in the family: coding rows cannot be isolated")
    n = len(m.log) if a.bits is None else a.bits
    try:
        bits = decode_z(m, A, n)
    except ValueError as e:
        raise ContractViolation(str(e)) from None
    s = "".join(map(str, bits))
    hexs = format(int(s, 2), f"0{(len(s) + 3) // 4}x") if len(s) % 4 == 0 and s else "-"
    lines = [f"A: {','.join(map(str, sorted(A)))}", f"bits: {s}", f"hex: {hexs}"]
    ok = True
    if a.z is not None:
        z = _hex_bits(_read(a.z))[:len(bits)]
        ok = z == bits
        lines.append(f"matches z: {ok}")
    rep.block("decoded", lines)
    rep.queries("none")
    if not ok:
        raise ContractViolation("decoded bits differ from z")
    return 0


def _choice(arg: str, pf):
    if arg in ("least", "greatest"):
        return arg
    table = {}
    for lineno, raw in enumerate(_read(arg).splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        lhs, sep, rhs = line.partition("->")
        if not sep:
            raise InputError(f"{arg} line {lineno}: expected 'a,b -> a'")
        try:
            key = frozenset(pf.resolve(t.strip()) for t in lhs.split(",") if t.strip())
            table[key] = pf.resolve(rhs.strip())
        except PosetError as e:
            raise InputError(f"{arg} line {lineno}: {e}") from None
    return table


def cmd_functor_run(a, rep: Report) -> int:
    pf, h = _poset(a.poset)
    try:
        e0 = expanded_hf(h, _choice(a.choice, pf))
    except ValueError as e:
        raise InputError(str(e)) from None
    rec = RecordingOracle(e0.base)
    e = type(e0)(rec, e0.p, e0.c, e0.d)
    ob = phi_object(e, bound=a.bound)
    base = e0.base
    lab = lambda n: pf.label(to_code(base.decode(n)))
    rep.block("generic", [f"p{i} = {lab(p)}" for i, p in enumerate(ob.generic.sequence)]
              + ["filter: {" + ", ".join(sorted((lab(q) for q in ob.generic.filter()), key=str)) + "}"])
    fr = ob.fragment
    lines = [f"bound: names with index < {a.bound}"]
    for r in fr.reps:
        lines.append(f"[{r}] {format_name(fr.collapse(r), pf.label)}")
    lines += ["membership:"] + ["".join("1" if fr.table[(x, y)] else "0" for y in fr.reps) for x in fr.reps]
    rep.block("fragment", lines)
    failures = 0
    if a.check_laws:
        rng = random.Random(a.seed)
        pts = list(range(a.support))

        def perm():
            img = pts[:]
            rng.shuffle(img)
            return FinPerm.from_pairs(zip(pts, img))

        objs = {(): ob}

        def obj_for(f):
            key = f.mapping
            if key not in objs:
                objs[key] = phi_object(e0.relabel(f), bound=a.bound)
            return objs[key]

        ident = phi_morphism(e0, e0, FinPerm.identity(), objects=(ob, ob))
        id_ok = all(ident(r) == r for r in fr.reps)
        comp_ok = inv_ok = 0
        for _ in range(a.perms):
            f, g = perm(), perm()
            ef, eg = e0.relabel(f), e0.relabel(f).relabel(g)
            of, og = obj_for(f), phi_object(eg, bound=a.bound)
            inv_ok += of.generic.filter() == frozenset(f(q) for q in ob.generic.filter())
            mf = phi_morphism(e0, ef, f, objects=(ob, of))
            mg = phi_morphism(ef, eg, g, objects=(of, og))
            mgf = phi_morphism(e0, eg, g.compose(f), objects=(ob, og))
            comp_ok += all(mgf(r) == mg(mf(r)) for r in fr.reps)
        failures = (not id_ok) + (a.perms - comp_ok) + (a.perms - inv_ok)
        rep.block("laws", [f"seed: {a.seed}", f"identity: {id_ok}",
                           f"composition: {comp_ok}/{a.perms}",
                           f"presentation invariance: {inv_ok}/{a.perms}"])
    rep.queries(DELTA0_LEVEL, rec)
    if failures:
        raise ContractViolation("functor laws failed")
    return 0


def _order(arg: str, pf) -> list:
    text = _text_or_file(arg).strip()
    # a separated list of labels, or one character per label
    toks = text.replace(",", " ").split() if any(c in text for c in ", \n") else list(text)
    try:
        listed = [pf.resolve(t) for t in toks]
    except PosetError as e:
        raise InputError(str(e)) from None
    if len(set(listed)) != len(listed):
        raise InputError(f"order {arg!r} repeats a condition")
    return listed + [c for c in pf.poset.conditions if c not in listed]


def cmd_demo_nonfunctorial(a, rep: Report) -> int:
    if a.cohen:
        l1 = [t for t in _text_or_file(a.orders[0]).replace(",", " ").split()]
        l2 = [t for t in _text_or_file(a.orders[1]).replace(",", " ").split()]
        if sorted(l1) != sorted(l2) or any(set(t) - {"0", "1"} for t in l1):
            raise InputError("Cohen orders must list the same binary strings")
        r = cohen_order_demo(l1, l2)
        show = lambda c: c or "<>"
    else:
        if a.poset is None:
            raise InputError("--poset is required unless --cohen is given")
        pf, h = _poset(a.poset)
        o1, o2 = _order(a.orders[0], pf), _order(a.orders[1], pf)
        r = order_sensitivity_demo(h.poset, o1, o2)
        show = pf.label
    lines = []
    for k, (seq, G, ok) in enumerate(((r.sequence1, r.filter1, r.valid1), (r.sequence2, r.filter2, r.valid2)), 1):
        lines.append(f"run {k} sequence: " + " ".join(show(c) for c in seq))
        lines.append(f"run {k} filter: {{" + ", ".join(show(c) for c in G) + "}")
        lines.append(f"run {k} generic: {ok}")
    lines.append("divergence: " + ("none (agreement)" if r.agree else f"at condition {show(r.difference)}"))
    rep.block("demo", lines)
    rep.queries("none")
    if not (r.valid1 and r.valid2):
        raise ContractViolation("a run failed the genericity check")
    return 0


_MOCKS = {
    "hf": ({0: lambda x: True}, "HF: every ground is HF itself"),
    "trivial": ({0: lambda x: True}, "one ground, the whole model"),
    "parity": ({0: lambda x: True, 1: lambda x: x % 2 == 0}, "two grounds told apart by parameter parity"),
}


def cmd_grounds_list(a, rep: Report) -> int:
    table, note = _MOCKS[a.mock]
    o = MockGrounds(table)
    lines = [f"mock: {a.mock} ({note})", f"hypotheses: {o.hypotheses}"]
    for n, r, member in enumerate_grounds(o, a.budget, a.params):
        bits = "".join("1" if member(x) else "0" for x in range(a.probe))
        lines.append(f"ground {n}: parameter {r}, members of 0..{a.probe - 1}: {bits}")
    rep.block("grounds", lines)
    rep.queries(o.level)
    return 0


# --------------------------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="forcingcomp", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hf-eval", help="evaluate a sentence in HF")
    p.add_argument("formula", help="formula text or a file containing it")
    p.add_argument("--budget", type=int, default=0)
    p.add_argument("--level", default="full")
    p.set_defaults(fn=cmd_hf_eval)

    p = sub.add_parser("generic-build", help="build a generic filter from the atomic diagram")
    p.add_argument("--model", default="hf")
    p.add_argument("--poset", required=True)
    p.add_argument("--scan-limit", type=int, default=None)
    p.set_defaults(fn=cmd_generic_build)

    p = sub.add_parser("force-query", help="decide p ⊩ phi(names)")
    p.add_argument("--poset", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--phi", required=True)
    p.add_argument("--names", required=True)
    p.add_argument("--budget", type=int, default=16)
    p.add_argument("--route", choices=("compiled", "semantic", "both"), default="both")
    p.set_defaults(fn=cmd_force_query)

    p = sub.add_parser("extend", help="bounded quotient presentation of M[G]")
    p.add_argument("--poset", required=True)
    p.add_argument("--rank", type=int, default=2)
    p.add_argument("--size", type=int, default=2)
    p.add_argument("--filter", default="auto")
    p.add_argument("--embed", type=int, default=8, help="embed HF codes below this")
    p.set_defaults(fn=cmd_extend)

    p = sub.add_parser("matrix-build", help="amalgamation matrix")
    p.add_argument("--I", type=int, required=True)
    p.add_argument("--family", required=True)
    p.add_argument("--z", required=True)
    p.add_argument("--steps", type=int, default=64)
    p.set_defaults(fn=cmd_matrix_build)

    p = sub.add_parser("matrix-decode", help="read z back from a matrix dump")
    p.add_argument("--matrix", required=True)
    p.add_argument("--A", required=True)
    p.add_argument("--family", default=None)
    p.add_argument("--bits", type=int, default=None)
    p.add_argument("--z", default=None, help="hex file to compare against")
    p.set_defaults(fn=cmd_matrix_decode)

    p = sub.add_parser("functor-run", help="the expanded-signature forcing functor")
    p.add_argument("--poset", required=True)
    p.add_argument("--choice", default="least")
    p.add_argument("--check-laws", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perms", type=int, default=20)
    p.add_argument("--support", type=int, default=6)
    p.add_argument("--bound", type=int, default=64)
    p.set_defaults(fn=cmd_functor_run)

    p = sub.add_parser("demo-nonfunctorial", help="order sensitivity of the plain construction")
    p.add_argument("--poset", default=None)
    p.add_argument("--orders", nargs=2, required=True)
    p.add_argument("--cohen", action="store_true")
    p.set_defaults(fn=cmd_demo_nonfunctorial)

    p = sub.add_parser("grounds-list", help="list grounds from a mock ground oracle")
    p.add_argument("--mock", choices=sorted(_MOCKS), default="hf")
    p.add_argument("--params", type=int, default=8)
    p.add_argument("--budget", type=int, default=0)
    p.add_argument("--probe", type=int, default=16)
    p.set_defaults(fn=cmd_grounds_list)
    return ap


_GROUPS = {"force", "matrix", "functor", "demo", "generic", "grounds", "hf"}


def _join_group(argv: list) -> list:
    """Accept ``force query`` as well as ``force-query``."""
    if len(argv) >= 2 and argv[0] in _GROUPS and not argv[1].startswith("-"):
        return [f"{argv[0]}-{argv[1]}"] + argv[2:]
    return argv


def run(argv: Optional[list] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    argv = _join_group(list(sys.argv[1:] if argv is None else argv))
    try:
        a = _parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    rep = Report(out)
    try:
        return a.fn(a, rep)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (FormulaError, PosetError, CodeOverflow) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ContractViolation, LevelViolation, DishonestWitness, MorphismError, BudgetExhausted,
            Undecided, OracleError) as e:
        print(f"contract violation: {e}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
