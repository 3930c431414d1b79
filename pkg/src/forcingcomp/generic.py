"""Generic filters: from an atomic diagram, over an abstract poset, and for class forcing.

The model-driven construction only ever asks atomic membership questions.
It lists the dense family in order of domain index, takes the least-index
condition meeting each dense set below the previous one, and decides
membership of q by waiting for a condition below q or incompatible with it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from .formula import Const, Member, substitute
from .oracle import Answer, DiagramOracle, OracleError
from .posets import PosetHandle

__all__ = [
    "BudgetExhausted", "Undecided", "DishonestWitness", "AtomicView", "PairDecoder",
    "decode_pairs", "decide_leq", "decide_perp", "GenericFilter", "ModelGeneric",
    "build_generic", "DenseSet", "AbstractPoset", "AbstractGeneric", "build_generic_abstract",
    "cohen_poset", "cohen_string", "cohen_code", "cohen_length_dense", "cohen_decision_dense",
    "DenseClassWitness", "ClassGeneric", "build_generic_class",
]


class BudgetExhausted(OracleError):
    pass


class Undecided(LookupError):
    """The finite part of the construction does not settle this condition."""


class DishonestWitness(ValueError):
    pass


# --------------------------------------------------------------------------
# atomic decoding

class AtomicView:
    """Memoized atomic membership.  The memo only avoids repeat queries."""

    def __init__(self, oracle: DiagramOracle):
        self.oracle = oracle
        self._memo: dict = {}

    def mem(self, a: int, b: int) -> bool:
        key = (a, b)
        if key not in self._memo:
            ans = self.oracle.query(Member(Const(a), Const(b)))
            if ans is Answer.OUT_OF_BUDGET:
                raise BudgetExhausted(f"atomic query {a} in {b} ran out of budget")
            self._memo[key] = ans is Answer.TRUE
        return self._memo[key]


class PairDecoder:
    """Stage-wise search for the Kuratowski pairs inside a relation set.

    At stage s every index below s has been tested against the relation,
    against each element found so far, and against each element of those.
    A pair (p, q) with p != q is emitted once two distinct elements u, v
    of some member z are seen with p in both and q in one of them: for a
    Kuratowski pair that pins down both coordinates.  A diagonal pair
    {{p}} can never be confirmed from finitely many atomic facts, so
    diagonal pairs are supplied separately when the relation is known
    to be reflexive on a set (``diagonal``).

    The relation is expected to hold only Kuratowski pairs, as the sets of
    a poset handle do.  A member that visibly fails the pair shape stops
    contributing, but something emitted before the failure became visible
    is not retracted.
    """

    def __init__(self, view: AtomicView, relation: int, diagonal: Optional[int] = None):
        self.view = view
        self.relation = relation
        self.diagonal = diagonal
        self.stage = 0
        self.children: dict = {relation: []}   # watched index -> elements found so far
        self.depth: dict = {relation: 0}       # 0 relation, 1 candidate pair, 2 pair component set
        self.found: list = []
        self._found_set: set = set()

    def _emit(self, pq):
        if pq not in self._found_set:
            self._found_set.add(pq)
            self.found.append(pq)

    def _watch(self, c: int, d: int, upto: int, todo: list) -> None:
        if c in self.depth:
            if d < self.depth[c]:
                self.depth[c] = d
                if d < 2:
                    todo.extend((e, d + 1) for e in self.children[c])
            return
        mem = self.view.mem
        self.depth[c] = d
        self.children[c] = [i for i in range(upto + 1) if mem(i, c)]
        if d < 2:
            todo.extend((e, d + 1) for e in self.children[c])

    def advance(self) -> list:
        """Run one more stage; return the pairs newly emitted."""
        before = len(self.found)
        n = self.stage
        self.stage += 1
        mem = self.view.mem
        if self.diagonal is not None and mem(n, self.diagonal):
            self._emit((n, n))
        todo = []
        for c in list(self.children):
            if mem(n, c):
                self.children[c].append(n)
                if self.depth[c] < 2:
                    todo.append((n, self.depth[c] + 1))
        while todo:
            c, d = todo.pop()
            self._watch(c, d, n, todo)
        ch = self.children
        for z in ch[self.relation]:
            us = ch.get(z, [])
            if len(us) > 2 or (len(us) == 2 and min(len(ch.get(u, [])) for u in us) > 1):
                continue  # visibly not a Kuratowski pair
            for i, u in enumerate(us):
                for v in us[i + 1:]:
                    cu, cv = ch.get(u, []), ch.get(v, [])
                    for p in cu:
                        if p in cv:
                            for q in cu + cv:
                                if q != p:
                                    self._emit((p, q))
        return self.found[before:]


def decode_pairs(atomic: DiagramOracle, relation_set: int, *, diagonal: Optional[int] = None,
                 max_stage: Optional[int] = None) -> Iterator[tuple]:
    """Enumerate the pairs coded in ``relation_set`` by dovetailed atomic search."""
    dec = PairDecoder(AtomicView(atomic), relation_set, diagonal)
    while max_stage is None or dec.stage < max_stage:
        yield from dec.advance()


class _Decider:
    """Shared decoders for one poset handle; answers by racing a relation against its complement."""

    def __init__(self, view: AtomicView, h: PosetHandle):
        self.view = view
        self.h = h
        self.leq = PairDecoder(view, h.leq, diagonal=h.P)
        self.comp = PairDecoder(view, h.leq_complement)
        self.perp_dec = PairDecoder(view, h.perp)
        self.leq_memo: dict = {}
        self.perp_memo: dict = {}

    def check_cond(self, p):
        if not self.view.mem(p, self.h.P):
            raise OracleError(f"{p} is not a condition")

    def le(self, p: int, q: int) -> bool:
        key = (p, q)
        if key in self.leq_memo:
            return self.leq_memo[key]
        self.check_cond(p)
        self.check_cond(q)
        if p == q:
            out = True
        else:
            while True:
                if key in self.leq._found_set:
                    out = True
                    break
                if key in self.comp._found_set:
                    out = False
                    break
                self.leq.advance()
                self.comp.advance()
        self.leq_memo[key] = out
        return out

    def perp(self, p: int, q: int) -> bool:
        """Race the incompatibility set against a search for a common extension."""
        key = (p, q)
        if key in self.perp_memo:
            return self.perp_memo[key]
        self.check_cond(p)
        self.check_cond(q)
        r = 0
        while True:
            if key in self.perp_dec._found_set:
                out = True
                break
            if self.view.mem(r, self.h.P) and self.le(r, p) and self.le(r, q):
                out = False
                break
            self.perp_dec.advance()
            r += 1
        self.perp_memo[key] = out
        return out


def decide_leq(atomic: DiagramOracle, h: PosetHandle, p: int, q: int) -> bool:
    return _Decider(AtomicView(atomic), h).le(p, q)


def decide_perp(atomic: DiagramOracle, h: PosetHandle, p: int, q: int) -> bool:
    return _Decider(AtomicView(atomic), h).perp(p, q)


# --------------------------------------------------------------------------
# filters

class GenericFilter:
    """A descending sequence of conditions and the filter it generates."""

    mode = "abstract"

    def __init__(self):
        self.sequence: list = []
        self.dense_log: list = []  # the dense set each p_n (n >= 1) was chosen to meet

    def member(self, q) -> bool:
        raise NotImplementedError

    def __contains__(self, q) -> bool:
        return self.member(q)


class ModelGeneric(GenericFilter):
    """Theorem-4.1 style construction, extended lazily as questions need it."""

    mode = "model"

    def __init__(self, atomic: DiagramOracle, h: PosetHandle, scan_limit: Optional[int] = None):
        super().__init__()
        self.view = AtomicView(atomic)
        self.h = h
        self.dec = _Decider(self.view, h)
        self.scan_limit = scan_limit
        self._next_d = 0            # next index to test for membership in the dense family
        self.dense_sets: list = []  # indices of dense sets in the order met
        self._member_memo: dict = {}

    # the n-th dense set, scanning indices upward
    def _next_dense(self) -> Optional[int]:
        while self.scan_limit is None or self._next_d < self.scan_limit:
            d = self._next_d
            self._next_d += 1
            if self.view.mem(d, self.h.dense_family):
                return d
        return None

    def _least_below(self, D: int, p: Optional[int]) -> int:
        c = 0
        while True:
            if self.view.mem(c, D) and (p is None or self.dec.le(c, p)):
                return c
            c += 1

    def step(self) -> bool:
        """Meet the next dense set; False once the scan limit is reached."""
        D = self._next_dense()
        if D is None:
            return False
        prev = self.sequence[-1] if self.sequence else None
        self.sequence.append(self._least_below(D, prev))
        self.dense_sets.append(D)
        self.dense_log.append(D)
        return True

    def extend(self, n: int) -> None:
        while len(self.sequence) < n and self.step():
            pass

    def member(self, q: int) -> bool:
        if q in self._member_memo:
            return self._member_memo[q]
        self.dec.check_cond(q)
        i = 0
        while True:
            while i >= len(self.sequence):
                if not self.step():
                    raise Undecided(f"condition {q} not decided within the scan limit")
            p = self.sequence[i]
            if self.dec.le(p, q):
                out = True
                break
            if self.dec.perp(p, q):
                out = False
                break
            i += 1
        self._member_memo[q] = out
        return out


def build_generic(atomic: DiagramOracle, h: PosetHandle, *, scan_limit: Optional[int] = None) -> ModelGeneric:
    """Start the construction; the filter grows as ``member``/``extend`` ask.

    ``scan_limit`` caps the indices tried for the dense family (useful when the
    presentation is known to list it below some index, as Ackermann codes do).
    """
    G = ModelGeneric(atomic, h, scan_limit)
    G.extend(1)
    return G


# --------------------------------------------------------------------------
# abstract posets

@dataclass(frozen=True)
class DenseSet:
    member: Callable[[object], bool]
    witness: Callable[[object], object]
    label: str = ""


@dataclass(frozen=True)
class AbstractPoset:
    contains: Callable[[object], bool]
    leq: Callable[[object, object], bool]
    compatible: Callable[[object, object], bool]
    dense_stream: Callable[[int], DenseSet]
    top: object


class AbstractGeneric(GenericFilter):
    mode = "abstract"

    def __init__(self, P: AbstractPoset):
        super().__init__()
        self.P = P

    def member(self, q) -> bool:
        if not self.P.contains(q):
            raise ValueError(f"{q!r} is not a condition")
        for p in self.sequence:
            if self.P.leq(p, q):
                return True
            if not self.P.compatible(p, q):
                return False
        raise Undecided(f"{q!r} not decided by the first {len(self.sequence)} conditions")


def build_generic_abstract(P: AbstractPoset, n_dense: int) -> AbstractGeneric:
    G = AbstractGeneric(P)
    p = P.top
    G.sequence.append(p)
    for n in range(n_dense):
        D = P.dense_stream(n)
        w = D.witness(p)
        if not (P.contains(w) and P.leq(w, p) and D.member(w)):
            raise DishonestWitness(f"dense set {n} ({D.label}): witness {w!r} fails its contract at {p!r}")
        p = w
        G.sequence.append(p)
        G.dense_log.append(n)
    return G


# Cohen forcing: finite binary strings, coded as int('1' + s, 2); longer strings are stronger.

def cohen_code(s: str) -> int:
    return int("1" + s, 2)


def cohen_string(n: int) -> str:
    return bin(n)[3:]


def _cohen_le(p: int, q: int) -> bool:
    s, t = cohen_string(p), cohen_string(q)
    return s.startswith(t)


def _cohen_compat(p: int, q: int) -> bool:
    return _cohen_le(p, q) or _cohen_le(q, p)


def cohen_length_dense(n: int) -> DenseSet:
    return DenseSet(lambda p: len(cohen_string(p)) >= n,
                    lambda p: cohen_code(cohen_string(p).ljust(n, "0")),
                    f"length>={n}")


def cohen_decision_dense(s: str) -> DenseSet:
    """Conditions that extend s or are incompatible with it."""
    t = cohen_code(s)

    def member(p):
        return _cohen_le(p, t) or not _cohen_compat(p, t)

    def witness(p):
        return p if member(p) else t  # p compatible with s but shorter: s extends p

    return DenseSet(member, witness, f"decide {s or 'empty'}")


def cohen_poset(stream: Callable[[int], DenseSet]) -> AbstractPoset:
    return AbstractPoset(lambda p: isinstance(p, int) and p >= 1, _cohen_le, _cohen_compat, stream, 1)


# --------------------------------------------------------------------------
# class forcing with witnessed dense classes

@dataclass(frozen=True)
class DenseClassWitness:
    formula: object   # one free variable x; parameters as constants
    witness: Callable[[object], object]
    var: str = "x"
    label: str = ""


class ClassGeneric(GenericFilter):
    mode = "class"

    def __init__(self, oracle, class_leq, class_perp, var_pair):
        super().__init__()
        self.oracle = oracle
        self.class_leq = class_leq
        self.class_perp = class_perp
        self.var_pair = var_pair

    def _ask(self, phi, binds: dict) -> bool:
        for v, val in binds.items():
            phi = substitute(phi, v, Const(val))
        ans = self.oracle.query(phi)
        if ans is Answer.OUT_OF_BUDGET:
            raise BudgetExhausted("class query ran out of budget")
        return ans is Answer.TRUE

    def le(self, p, q) -> bool:
        x, y = self.var_pair
        return self._ask(self.class_leq, {x: p, y: q})

    def member(self, q) -> bool:
        x, y = self.var_pair
        for p in self.sequence:
            if self.le(p, q):
                return True
            if self.class_perp is not None and self._ask(self.class_perp, {x: p, y: q}):
                return False
        raise Undecided("condition not decided by the listed dense classes")


def build_generic_class(delta0: DiagramOracle, class_P, max_element, dense_classes,
                        *, class_leq, class_perp=None, var: str = "x",
                        var_pair: tuple = ("x", "y")) -> ClassGeneric:
    """Descending sequence through supplied definable dense classes.

    ``class_P`` has free variable ``var``; ``class_leq`` and ``class_perp``
    have the free variables ``var_pair`` (x below y, x incompatible with y).
    Each witness is checked with Delta0 queries before it is used.
    """
    G = ClassGeneric(delta0, class_leq, class_perp, var_pair)
    p = max_element
    if not G._ask(class_P, {var: p}):
        raise DishonestWitness("the maximum is not in the class")
    G.sequence.append(p)
    for n, W in enumerate(dense_classes):
        w = W.witness(p)
        if not G._ask(class_P, {var: w}):
            raise DishonestWitness(f"class {n} ({W.label}): witness is not a condition")
        if not G.le(w, p):
            raise DishonestWitness(f"class {n} ({W.label}): witness is not an extension")
        if not G._ask(W.formula, {W.var: w}):
            raise DishonestWitness(f"class {n} ({W.label}): witness is not in the class")
        p = w
        G.sequence.append(p)
        G.dense_log.append(n)
    return G
