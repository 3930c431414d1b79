"""The forcing extension M[G] as a quotient of the names by =_G.

Over HF with a finite poset the extension adds nothing new, so every
construction here can be compared, element by element, with the recursive
evaluation of names.  That comparison is the test oracle for the quotient.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .formula import Const, FormulaError, Not, Var, constants, map_terms
from .forcingrel import ForcingKind, compile_forcing, decide_delta1, tables_for
from .generic import GenericFilter
from .hfmodel import HFOracle, HSet, InstalledPoset, try_code
from .names import check_name, enumerate_names, interpret_name
from .oracle import DELTA0_LEVEL, Answer, DiagramOracle, LevelViolation, QueryLevel, level_of

__all__ = [
    "FiniteFilter", "filter_from", "eq_G", "in_G", "QuotientPresentation", "build_quotient",
    "diagram_query", "canonical_embedding", "evaluate_recursive", "BoundOverflow",
]


class BoundOverflow(LookupError):
    """A name's class has no representative within the enumeration bounds."""


class FiniteFilter(GenericFilter):
    """An explicitly listed filter on a finite poset."""

    mode = "finite"

    def __init__(self, h: InstalledPoset, conds):
        super().__init__()
        self.h = h.handle
        self.conds = frozenset(conds)
        self.sequence = sorted(self.conds, key=lambda p: len(h.poset.up(p)), reverse=True)[:1]

    def member(self, q) -> bool:
        return q in self.conds


def filter_from(h: InstalledPoset, conds) -> FiniteFilter:
    """The upward closure of the given conditions, checked to be a filter."""
    P = h.poset
    up = set()
    for c in conds:
        if c not in P.index:
            raise ValueError(f"{c!r} is not a condition")
        up |= P.up(c)
    if any(not (P.below[p] & P.below[q] & up) for p in up for q in up):
        raise ValueError("conditions are not pairwise compatible within the filter")
    return FiniteFilter(h, up)


def _g_mask(h: InstalledPoset, G) -> int:
    if isinstance(G, GenericFilter) and getattr(G, "h", h.handle) != h.handle:
        raise ValueError("filter was built over a different poset")
    member = G.member if isinstance(G, GenericFilter) else G.__contains__
    P = h.poset
    return sum(1 << P.index[p] for p in P.conditions if member(p))


def eq_G(h: InstalledPoset, G, sigma, tau) -> bool:
    """sigma =_G tau: some p in G forces sigma = tau."""
    return bool(tables_for(h).mask(ForcingKind.EQUAL, sigma, tau) & _g_mask(h, G))


def in_G(h: InstalledPoset, G, sigma, tau) -> bool:
    return bool(tables_for(h).mask(ForcingKind.MEMBER, sigma, tau) & _g_mask(h, G))


def evaluate_recursive(G, sigma):
    """sigma_G by direct recursion, as a code when it fits."""
    member = G.member if isinstance(G, GenericFilter) else G.__contains__
    v = interpret_name(sigma, _Container(member))
    c = try_code(v)
    return v if c is None else c


class _Container:
    def __init__(self, member):
        self.member = member

    def __contains__(self, p):
        return self.member(p)


@dataclass(frozen=True)
class QuotientPresentation:
    """Bounded fragment of M[G]: index i is the class of the i-th least representative."""
    representatives: tuple
    table: tuple                  # table[i][j] = (i ∈ j)
    generic: object
    handle: InstalledPoset
    source: DiagramOracle
    rank_bound: int
    size_bound: int
    g_mask: int = field(repr=False, default=0)

    def __len__(self):
        return len(self.representatives)

    def membership(self, i: int, j: int) -> bool:
        return self.table[i][j]

    def rep(self, i: int) -> HSet:
        return self.representatives[i]

    def index_of(self, sigma) -> int:
        T = tables_for(self.handle)
        sid = T.intern(sigma)
        for i, r in enumerate(self.representatives):
            if T.eq_mask(sid, T.intern(r)) & self.g_mask:
                return i
        raise BoundOverflow("no representative within the enumeration bounds")

    def bounds(self) -> str:
        return f"rank<={self.rank_bound} size<={self.size_bound}"


def build_quotient(delta0: Optional[DiagramOracle], h: InstalledPoset, G, rank_bound: int,
                   size_bound: int) -> QuotientPresentation:
    """Representatives are the least names (Ackermann order) of each =_G class."""
    if delta0 is None:
        delta0 = HFOracle(DELTA0_LEVEL, sig=h.sig())
    T = tables_for(h)
    gm = _g_mask(h, G)
    reps, ids = [], []
    for sigma in enumerate_names(h, rank_bound, size_bound):
        i = T.intern(sigma)
        if not any(T.eq_mask(i, j) & gm for j in ids):
            reps.append(sigma)
            ids.append(i)
    table = tuple(tuple(bool(T.in_mask(a, b) & gm) for b in ids) for a in ids)
    return QuotientPresentation(tuple(reps), table, G, h, delta0, rank_bound, size_bound, gm)


def canonical_embedding(q: QuotientPresentation, x) -> int:
    """Index of the class of the check name of x."""
    return q.index_of(check_name(x, q.handle))


def _conds_in_g(q: QuotientPresentation) -> list:
    P = q.handle.poset
    return [p for p in P.conditions if q.g_mask >> P.index[p] & 1]


def diagram_query(q: QuotientPresentation, s, level: QueryLevel = DELTA0_LEVEL, budget: int = 0,
                  oracle: Optional[DiagramOracle] = None) -> Answer:
    """Truth of s in the quotient, constants read as indices.

    s holds iff some p in G forces it of the representatives.  Delta0
    sentences go through the Delta1 decision and only ask Delta0 questions;
    higher levels ask the compiled forcing formula, and each p in G is also
    tried against the negation, so a decided answer either way is returned.
    """
    if level_of(s) > level:
        raise LevelViolation(f"{level_of(s)} sentence asked at level {level}")
    o = oracle or q.source
    idx = sorted({c.value for c in constants(s) if isinstance(c, Const)}, key=str)
    for i in idx:
        if not isinstance(i, int) or not 0 <= i < len(q):
            raise FormulaError(f"{i!r} is not an index of this presentation")
    names = {f"n{i}": q.rep(i) for i in idx}
    phi = map_terms(s, lambda t: Var(f"n{t.value}") if isinstance(t, Const) else t)
    conds = _conds_in_g(q)
    pos = compile_forcing(phi)
    neg = compile_forcing(Not(phi))
    unknown = False
    for p in conds:
        for comp, val in ((pos, Answer.TRUE), (neg, Answer.FALSE)):
            if pos.delta1:
                a = decide_delta1(o, q.handle, comp, p, names)
            else:
                a = o.query(comp.instantiate(p, names), budget)
            if a is Answer.TRUE:
                return val
            unknown |= a is Answer.OUT_OF_BUDGET
    return Answer.OUT_OF_BUDGET if unknown else Answer.FALSE

