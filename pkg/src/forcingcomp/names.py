"""P-names: recognition by certificates, check names, bounded enumeration.

A name is a set of Kuratowski pairs (tau, p) with tau a name and p a
condition.  In HF mode names are plain ``HSet`` values; the recognizer
below works against any Delta0 oracle and only ever asks Delta0 questions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Union

from .catalog import atom
from .formula import (
    BoundedExists as BEx, BoundedForall as BAll, Const, Equal, Member, Not, Var, conj, disj,
)
from .hfmodel import HSet, InstalledPoset, ack_sorted, hs, hs_pair, hs_unpair, try_code
from .oracle import Answer, DiagramOracle, OracleError
from .posets import PosetHandle

__all__ = [
    "NameCertificate", "NameResult", "is_name", "verify_certificate", "oracle_members",
    "is_name_direct", "name_entries", "name_rank", "check_name", "enumerate_names",
    "format_name", "make_name", "interpret_name", "parse_name", "parse_names_file",
]

z, u, a, v, b = (Var(n) for n in "zuavb")


def _ask(o: DiagramOracle, phi) -> bool:
    ans = o.query(phi)
    if ans is Answer.OUT_OF_BUDGET:
        raise OracleError("Delta0 query ran out of budget")
    return ans is Answer.TRUE


def oracle_members(o: DiagramOracle, x) -> list:
    """Elements of x, found by atomic search and confirmed complete by a Delta0 query."""
    found = []
    n = 0
    changed = True
    while True:
        if changed:
            cover = disj(*[Equal(Var("y"), Const(m)) for m in found]) if found else Not(Equal(Var("y"), Var("y")))
            if _ask(o, BAll("y", Const(x), cover)):
                return found
            changed = False
        if _ask(o, Member(Const(n), Const(x))):
            found.append(n)
            changed = True
        n += 1


def _pair_shape(node, P, firsts=None):
    """Every element of node is a pair (a, b) with b in P (and a among ``firsts``)."""
    first_ok = disj(*[Equal(a, Const(t)) for t in firsts]) if firsts else None
    inner = conj(atom("pairof", "z", "a", "b"), Member(b, Const(P)))
    if first_ok is not None:
        inner = conj(inner, first_ok)
    return BAll("z", Const(node), BEx("u", z, BEx("a", u, BEx("v", z, BEx("b", v, inner)))))


def _child_of(child, node):
    return BEx("z", Const(node), BEx("v", z, BEx("b", v, atom("pairof", "z", Const(child), "b"))))


@dataclass(frozen=True)
class NameCertificate:
    """Positive: ``nodes`` is a finite set containing the root, every element of
    every node being a pair (node, condition).  Negative: ``nodes`` is a path
    from the root through first coordinates ending at a node with an element
    that is not such a pair."""
    polarity: str
    root: int
    nodes: tuple


@dataclass(frozen=True)
class NameResult:
    is_name: bool
    certificate: NameCertificate

    def __bool__(self):
        return self.is_name


def verify_certificate(o: DiagramOracle, h: Union[PosetHandle, int], cert: NameCertificate) -> bool:
    """Check a certificate with Delta0 queries only."""
    P = h.P if isinstance(h, PosetHandle) else h
    if cert.polarity == "positive":
        if cert.root not in cert.nodes:
            return False
        return all(_ask(o, _pair_shape(n, P, cert.nodes)) for n in cert.nodes) if cert.nodes else False
    path = cert.nodes
    if not path or path[0] != cert.root:
        return False
    for parent, child in zip(path, path[1:]):
        if not _ask(o, _child_of(child, parent)):
            return False
    return not _ask(o, _pair_shape(path[-1], P))


def is_name(delta0: DiagramOracle, h: Union[PosetHandle, int], x: int) -> NameResult:
    """Decide whether x is a P-name, returning a certificate either way.

    The tree below x is explored breadth first.  A node failing the pair
    shape yields a negative certificate (the path to it); if none fails,
    the explored node set is a positive certificate.  Over a well-founded
    model the exploration is finite.
    """
    P = h.P if isinstance(h, PosetHandle) else h
    parent = {x: None}
    order = [x]
    i = 0
    while i < len(order):
        n = order[i]
        i += 1
        if not _ask(delta0, _pair_shape(n, P)):
            path = [n]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            cert = NameCertificate("negative", x, tuple(reversed(path)))
            return NameResult(False, cert)
        for zz in oracle_members(delta0, n):
            for uu in oracle_members(delta0, zz):
                for aa in oracle_members(delta0, uu):
                    if aa not in parent and _ask(delta0, _child_of(aa, n)):
                        parent[aa] = n
                        order.append(aa)
    cert = NameCertificate("positive", x, tuple(sorted(order)))
    return NameResult(True, cert)


# --------------------------------------------------------------------------
# HF mode: names as structural sets

def name_entries(sigma) -> list:
    """The (tau, p) pairs of a name, conditions as int codes when they fit."""
    out = []
    for e in hs(sigma):
        pq = hs_unpair(e)
        if pq is None:
            raise ValueError("not a name: element is not an ordered pair")
        t, p = pq
        c = try_code(p)
        out.append((t, c if c is not None else p))
    return out


def is_name_direct(x, conditions) -> bool:
    """The recursive definition, evaluated by structural recursion."""
    conds = {hs(c) for c in conditions}
    return _is_name_rec(hs(x), frozenset(conds))


@lru_cache(maxsize=1 << 16)
def _is_name_rec(x: HSet, conds: frozenset) -> bool:
    for e in x:
        pq = hs_unpair(e)
        if pq is None or pq[1] not in conds or not _is_name_rec(pq[0], conds):
            return False
    return True


def name_rank(sigma) -> int:
    """Rank of a name: one more than the largest rank of its entries' names."""
    sigma = hs(sigma)
    return _name_rank(sigma)


@lru_cache(maxsize=1 << 16)
def _name_rank(sigma: HSet) -> int:
    ranks = [_name_rank(hs_unpair(e)[0]) for e in sigma]
    return 1 + max(ranks) if ranks else 0


def make_name(entries) -> HSet:
    return HSet(hs_pair(t, p) for t, p in entries)


def check_name(x, h: Union[InstalledPoset, int]) -> HSet:
    """x-check = {(y-check, 1) : y in x}."""
    top = h.top if isinstance(h, InstalledPoset) else h
    return _check(hs(x), hs(top))


@lru_cache(maxsize=1 << 14)
def _check(x: HSet, top: HSet) -> HSet:
    return HSet(hs_pair(_check(y, top), top) for y in x)


def enumerate_names(h: InstalledPoset, rank_bound: int, size_bound: int) -> list:
    """All names of rank <= rank_bound whose every node has <= size_bound entries,
    in Ackermann order."""
    conds = h.conditions
    level = [HSet()]
    seen = {HSet()}
    for _ in range(rank_bound):
        pairs = [hs_pair(t, c) for t in level for c in conds]
        nxt = []
        for k in range(size_bound + 1):
            for sub in combinations(pairs, k):
                n = HSet(sub)
                if n not in seen:
                    seen.add(n)
                    nxt.append(n)
        level = level + nxt
    return ack_sorted(level)


def format_name(sigma, cond_label=None) -> str:
    """``{ (tau, p), ... }`` with conditions printed by ``cond_label``."""
    lab = cond_label or str
    parts = []
    entries = name_entries(sigma)
    order = {id(t): i for i, t in enumerate(ack_sorted([t for t, _ in entries]))}
    for t, p in sorted(entries, key=lambda tp: (order[id(tp[0])], str(tp[1]))):
        parts.append(f"({format_name(t, lab)}, {lab(p)})")
    return "{" + ", ".join(parts) + "}" if parts else "{}"


def interpret_name(sigma, G) -> HSet:
    """sigma_G by recursion: the values of tau over entries (tau, p) with p in G.

    ``G`` is any container answering ``p in G`` for condition codes.
    """
    return _interp(hs(sigma), G if isinstance(G, frozenset) else _Member(G))


class _Member:
    def __init__(self, G):
        self.G = G
        self.memo = {}

    def __contains__(self, p):
        if p not in self.memo:
            self.memo[p] = p in self.G
        return self.memo[p]


def _interp(sigma: HSet, G, memo=None) -> HSet:
    memo = {} if memo is None else memo
    if sigma in memo:
        return memo[sigma]
    out = []
    for t, p in name_entries(sigma):
        if p in G:
            out.append(_interp(t, G, memo))
    memo[sigma] = HSet(out)
    return memo[sigma]


# --------------------------------------------------------------------------
# name files

_NAME_TOKEN = re.compile(r"\s*(check\(\s*\d+\s*\)|#\d+|[{}(),]|[^\s{}(),]+)")


def parse_name(text: str, resolve=int, top=0) -> HSet:
    """``{(tau, p), ...}`` with nested names, ``check(n)`` or ``#n`` (a raw code).

    ``resolve`` turns a condition token into its code; ``check(n)`` uses ``top``.
    """
    return _NameParser(text, resolve, top).parse()


def parse_names_file(text: str, resolve=int, top=0) -> dict:
    """Lines ``var = <name>``; blank lines and ``#`` comments (at line start) ignored."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("# "):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'var = name'")
        var, _, rhs = line.partition("=")
        var = var.strip()
        if not var.isidentifier():
            raise ValueError(f"line {lineno}: bad variable {var!r}")
        try:
            out[var] = _NameParser(rhs, resolve, top).parse()
        except ValueError as e:
            raise ValueError(f"line {lineno}: {e}") from None
    return out


class _NameParser:
    def __init__(self, text, resolve, top=0):
        self.toks = [t.replace(" ", "") for t in _NAME_TOKEN.findall(text.strip())]
        if "".join(self.toks) != re.sub(r"\s+", "", text.strip()):
            raise ValueError(f"cannot read name {text.strip()!r}")
        self.i = 0
        self.resolve = resolve
        self.top = top

    def parse(self) -> HSet:
        x = self.name()
        if self.i != len(self.toks):
            raise ValueError("trailing text after name")
        return x

    def eat(self, t):
        if self.i >= len(self.toks) or self.toks[self.i] != t:
            raise ValueError(f"expected {t!r}")
        self.i += 1

    def name(self) -> HSet:
        if self.i >= len(self.toks):
            raise ValueError("unexpected end of name")
        t = self.toks[self.i]
        if t.startswith("check("):
            self.i += 1
            return check_name(int(t[6:-1]), self.top)
        if t.startswith("#"):
            self.i += 1
            return hs(int(t[1:]))
        self.eat("{")
        entries = []
        if self.toks[self.i:self.i + 1] != ["}"]:
            while True:
                self.eat("(")
                tau = self.name()
                self.eat(",")
                if self.i >= len(self.toks):
                    raise ValueError("missing condition")
                p = self.resolve(self.toks[self.i])
                self.i += 1
                self.eat(")")
                entries.append((tau, p))
                if self.toks[self.i:self.i + 1] == [","]:
                    self.i += 1
                    continue
                break
        self.eat("}")
        return make_name(entries)
