"""The forcing functor in the expanded signature, pointwise-definable listings,
and the order sensitivity of the plain construction.

In the expanded signature a model comes with constants p (the forcing
notion, here its order relation), c (an internal choice function on the
nonempty subsets of P) and d_0, d_1, ... (the dense sets).  Every search
the construction makes is for a uniquely determined object, so isomorphic
inputs produce correspondingly isomorphic outputs.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .catalog import atom
from .formula import (
    BoundedForall as BAll, Const, Member, Var, conj, implies,
)
from .forcingrel import tables_for
from .generic import (
    GenericFilter, build_generic_abstract, cohen_decision_dense, cohen_poset, cohen_string,
)
from .hfmodel import HSet, InstalledPoset, ack_sorted, evaluate, hs, hs_pair, hs_unpair, to_code, try_code
from .names import check_name, enumerate_names, is_name, oracle_members
from .oracle import (
    DELTA0_LEVEL, Answer, DiagramOracle, FinPerm, OracleError, QueryLevel, permute,
)
from .formula import map_terms
from .posets import FinitePoset

__all__ = [
    "IndexedHF", "ExpandedPresentation", "expanded_hf", "ExpandedGeneric", "Fragment",
    "FunctorObject", "phi_object", "MorphismMap", "phi_morphism", "MorphismError",
    "canonical_listing", "ListingGap", "MockDefinability", "hf_definability", "dense_listing",
    "pointwise_generic", "OrderReport", "order_sensitivity_demo", "cohen_order_demo",
]


class MorphismError(ValueError):
    """A claimed isomorphism fails a spot check."""


class ListingGap(LookupError):
    """The definability oracle has no answer for a definition in range."""


# --------------------------------------------------------------------------
# HF presented on a chosen indexing

def _transitive_closure(seeds) -> set:
    out, todo = set(), [hs(s) for s in seeds]
    while todo:
        x = todo.pop()
        if x not in out:
            out.add(x)
            todo.extend(x)
    return out


class IndexedHF(DiagramOracle):
    """HF on domain N: indices 0..N-1 list a finite set T in Ackermann order,
    the remaining indices list HF minus T in Ackermann order.

    This gives small indices to large sets (orders, choice functions, names)
    whose Ackermann codes would be astronomically large.
    """

    def __init__(self, seeds, level: QueryLevel = DELTA0_LEVEL):
        self.table = tuple(ack_sorted(_transitive_closure(seeds)))
        self.index = {x: i for i, x in enumerate(self.table)}
        self.level = level
        self._small = sorted(c for c in map(try_code, self.table) if c is not None)

    def decode(self, n: int) -> HSet:
        if n < len(self.table):
            return self.table[n]
        c = n - len(self.table)
        for t in self._small:  # the (n - N)-th code not in T
            if t <= c:
                c += 1
            else:
                break
        return hs(c)

    def encode(self, x) -> int:
        x = hs(x)
        if x in self.index:
            return self.index[x]
        c = to_code(x)
        return len(self.table) + c - bisect_right(self._small, c)

    def _answer(self, s, budget):
        t = map_terms(s, lambda u: Const(self.decode(u.value)) if isinstance(u, Const) and isinstance(u.value, int) else u)
        return Answer.of(evaluate(t, budget))


@dataclass(frozen=True)
class ExpandedPresentation:
    base: DiagramOracle
    p: int          # the order relation of the forcing notion
    c: int          # choice function on nonempty subsets of P
    d: tuple        # the dense sets
    provenance: tuple = ()

    def relabel(self, f: FinPerm) -> "ExpandedPresentation":
        """The image presentation under f (f sends old indices to new)."""
        o = permute(self.base, f).oracle
        return ExpandedPresentation(o, f(self.p), f(self.c), tuple(f(x) for x in self.d),
                                    self.provenance + (("permuted", f.mapping),))


def expanded_hf(h: InstalledPoset, choice="least", *, name_rank: int = 2, name_size: int = 2,
                checks: int = 16) -> ExpandedPresentation:
    """The expanded presentation of HF with forcing notion h.

    ``choice`` is "least" (least code) or "greatest", or a dict frozenset -> element.
    """
    P = h.poset
    conds = P.conditions
    L = HSet(hs_pair(a, b) for a, b in P.leq)
    subsets = [frozenset(c for i, c in enumerate(conds) if m >> i & 1) for m in range(1, 1 << len(conds))]
    if choice == "least":
        pick = {x: min(x) for x in subsets}
    elif choice == "greatest":
        pick = {x: max(x) for x in subsets}
    else:
        pick = {frozenset(k): v for k, v in dict(choice).items()}
        if set(pick) != set(subsets) or any(pick[x] not in x for x in subsets):
            raise ValueError("choice must pick an element of every nonempty subset of P")
    c = HSet(hs_pair(_set_of(x), pick[x]) for x in subsets)
    dense = [_set_of(D) for D in sorted(P.dense_sets(), key=lambda D: to_code(_set_of(D)))]
    seeds = [L, c, _set_of(conds), *dense]
    seeds += enumerate_names(h, name_rank, name_size)
    seeds += [check_name(x, h) for x in range(checks)]
    base = IndexedHF(seeds)
    return ExpandedPresentation(base, base.encode(L), base.encode(c), tuple(base.encode(D) for D in dense))


def _set_of(xs) -> HSet:
    return HSet(hs(x) for x in xs)


# --------------------------------------------------------------------------
# the object map

def _ask(o: DiagramOracle, phi) -> bool:
    a = o.query(phi)
    if a is Answer.OUT_OF_BUDGET:
        raise OracleError("Delta0 query ran out of budget")
    return a is Answer.TRUE


def _least(o: DiagramOracle, make, limit: Optional[int] = None) -> int:
    n = 0
    while limit is None or n < limit:
        if _ask(o, make(Const(n))):
            return n
        n += 1
    raise OracleError("search limit reached")


q_, z_, u_ = Var("q"), Var("z"), Var("u")


def _field_forall(L, body):
    """∀q in the field of L: body(q)."""
    return BAll("z", L, BAll("u", z_, BAll("q", u_, implies(atom("inrel", L, q_, q_), body))))


class ExpandedGeneric(GenericFilter):
    mode = "expanded"

    def __init__(self, o: DiagramOracle, L: int, P: int):
        super().__init__()
        self.o, self.L, self.P = o, L, P
        self._memo: dict = {}

    def member(self, q) -> bool:
        if q not in self._memo:
            self._memo[q] = _ask(self.o, atom("inrel", Const(self.L), Const(self.sequence[-1]), Const(q)))
        return self._memo[q]

    def conditions(self) -> list:
        return oracle_members(self.o, self.P)

    def filter(self) -> frozenset:
        return frozenset(q for q in self.conditions() if self.member(q))


@dataclass
class Fragment:
    """Classes of names with index below ``bound``, each labelled by its least-index name."""
    o: DiagramOracle
    P: int
    G: frozenset
    bound: int
    reps: tuple = ()
    table: dict = field(default_factory=dict)
    poset: Optional[FinitePoset] = None     # the collapsed forcing notion
    gmask: int = 0
    _collapse: dict = field(default_factory=dict, repr=False)
    _is_name: dict = field(default_factory=dict, repr=False)

    def collapse(self, n: int) -> HSet:
        """The set n stands for, read off the Delta0 diagram."""
        if n not in self._collapse:
            self._collapse[n] = HSet(self.collapse(m) for m in oracle_members(self.o, n))
        return self._collapse[n]

    def is_name(self, n: int) -> bool:
        if n not in self._is_name:
            self._is_name[n] = bool(is_name(self.o, self.P, n))
        return self._is_name[n]

    def _poset(self, L: HSet) -> FinitePoset:
        pairs = [tuple(to_code(v) for v in hs_unpair(e)) for e in L]
        field_ = sorted({a for a, _ in pairs} | {b for _, b in pairs})
        return FinitePoset(tuple(field_), frozenset(pairs))

    def eq(self, a: int, b: int) -> bool:
        T = tables_for(self.poset)
        return bool(T.eq_mask(T.intern(self.collapse(a)), T.intern(self.collapse(b))) & self.gmask)

    def mem(self, a: int, b: int) -> bool:
        T = tables_for(self.poset)
        return bool(T.in_mask(T.intern(self.collapse(a)), T.intern(self.collapse(b))) & self.gmask)

    def label(self, sigma: int) -> int:
        """Least index of a name =_G to sigma."""
        if not self.is_name(sigma):
            raise ValueError(f"{sigma} is not a name")
        for m in range(sigma + 1):
            if self.is_name(m) and self.eq(m, sigma):
                return m
        raise AssertionError("unreachable: sigma is in its own class")


@dataclass(frozen=True)
class FunctorObject:
    generic: ExpandedGeneric
    fragment: Fragment


def phi_object(e: ExpandedPresentation, steps: Optional[int] = None, bound: int = 64) -> FunctorObject:
    """Build G from the expanded Delta0 diagram, then the bounded quotient fragment."""
    o = e.base
    L = Const(e.p)
    # P is the field of the order relation
    P = _least(o, lambda x: conj(BAll("q", x, atom("inrel", L, q_, q_)),
                                 _field_forall(L, Member(q_, x))))
    tops = [n for n in sorted(oracle_members(o, P))
            if _ask(o, _field_forall(L, atom("inrel", L, q_, Const(n))))]
    if not tops:
        raise ValueError("the forcing notion has no maximum element")
    top = tops[0]
    G = ExpandedGeneric(o, e.p, P)
    G.sequence.append(top)
    n_steps = len(e.d) if steps is None else steps
    for s in range(n_steps):
        d = Const(e.d[s % len(e.d)])
        ps = Const(G.sequence[-1])
        x = _least(o, lambda x: conj(BAll("q", x, conj(Member(q_, d), atom("inrel", L, q_, ps))),
                                     BAll("q", d, implies(atom("inrel", L, q_, ps), Member(q_, x)))))
        y = _least(o, lambda y: atom("inrel", Const(e.c), Const(x), y))
        if not _ask(o, Member(Const(y), Const(x))):
            raise ValueError("c does not choose an element of the set it is applied to")
        G.sequence.append(y)
        G.dense_log.append(e.d[s % len(e.d)])
    frag = Fragment(o, P, G.filter(), bound)
    frag.poset = frag._poset(frag.collapse(e.p))
    gconds = {to_code(frag.collapse(q)) for q in frag.G}
    frag.gmask = sum(1 << frag.poset.index[c] for c in frag.poset.conditions if c in gconds)
    reps = []
    for n in range(bound):
        if frag.is_name(n) and not any(frag.eq(r, n) for r in reps):
            reps.append(n)
    frag.reps = tuple(reps)
    frag.table = {(a, b): frag.mem(a, b) for a in reps for b in reps}
    return FunctorObject(G, frag)


# --------------------------------------------------------------------------
# the morphism map

@dataclass
class MorphismMap:
    source: FunctorObject
    target: FunctorObject
    f: FinPerm
    mapping: dict

    def __call__(self, label: int) -> int:
        if label not in self.mapping:
            self.mapping[label] = self.target.fragment.label(self.f(label))
        return self.mapping[label]


def phi_morphism(e: ExpandedPresentation, e2: ExpandedPresentation, f: FinPerm, bound: int = 64,
                 spot: int = 16, objects: Optional[tuple] = None) -> MorphismMap:
    """The induced isomorphism of extension fragments: [sigma]_G -> [f(sigma)]_G*."""
    if f(e.p) != e2.p or f(e.c) != e2.c or len(e.d) != len(e2.d) or \
            any(f(a) != b for a, b in zip(e.d, e2.d)):
        raise MorphismError("f does not respect the constants p, c, d")
    for a in range(spot):
        for b in range(spot):
            if e.base.member(a, b) != e2.base.member(f(a), f(b)):
                raise MorphismError(f"f does not preserve membership at ({a}, {b})")
    src, tgt = objects if objects is not None else (phi_object(e, bound=bound), phi_object(e2, bound=bound))
    m = MorphismMap(src, tgt, f, {})
    for r in src.fragment.reps:
        m(r)
    return m


# --------------------------------------------------------------------------
# pointwise definable models

class MockDefinability:
    """Definition k defines ``table[k]`` (None: defines nothing); beyond the table, a gap."""

    def __init__(self, table: Sequence):
        self.table = list(table)

    def __call__(self, k: int):
        if k >= len(self.table):
            raise ListingGap(f"no answer for definition {k}")
        return self.table[k]

    def __len__(self):
        return len(self.table)


def hf_definability(definitions: Sequence, bound: int, budget: int = 0):
    """Definition k (a formula in x) defines the unique code x < bound satisfying it, if any."""

    def defined(k: int):
        if k >= len(definitions):
            raise ListingGap(f"no definition {k}")
        hits = []
        for x in range(bound):
            v = evaluate(definitions[k], budget, env={"x": x})
            if v is None:
                raise ListingGap(f"definition {k} undecided at {x}")
            if v:
                hits.append(x)
                if len(hits) > 1:
                    return None
        return hits[0] if hits else None

    return _Sized(defined, len(definitions))


class _Sized:
    def __init__(self, fn, n):
        self.fn, self.n = fn, n

    def __call__(self, k):
        return self.fn(k)

    def __len__(self):
        return self.n


def canonical_listing(defin, n: Optional[int] = None) -> list:
    """m_0, m_1, ...: the elements defined by definitions 0, 1, ... (repeats kept)."""
    n = len(defin) if n is None else n
    out = []
    for k in range(n):
        v = defin(k)
        if v is not None:
            out.append(v)
    return out


def dense_listing(listing: Sequence, is_dense: Callable[[object], bool]) -> list:
    """The dense sets in listing order, each at its first occurrence."""
    seen, out = set(), []
    for m in listing:
        if m not in seen and is_dense(m):
            seen.add(m)
            out.append(m)
    return out


def pointwise_generic(listing: Sequence, P: FinitePoset, dense_of: Callable[[object], Optional[frozenset]],
                      cond_of: Callable[[object], object]) -> list:
    """Descending sequence meeting the listed dense sets in turn, choosing the
    first listed element below the previous condition."""
    seq = [P.top]
    dense = dense_listing(listing, lambda m: dense_of(m) is not None)
    for D in dense:
        Dc = dense_of(D)
        for m in listing:
            q = cond_of(m)
            if q is not None and q in Dc and P.le(q, seq[-1]):
                seq.append(q)
                break
        else:
            raise ValueError("listing does not name an extension into a dense set")
    return seq


# --------------------------------------------------------------------------
# order sensitivity

@dataclass(frozen=True)
class OrderReport:
    filter1: tuple
    filter2: tuple
    sequence1: tuple
    sequence2: tuple
    valid1: bool
    valid2: bool
    difference: Optional[object]   # first condition (in the first order) where the filters differ

    @property
    def agree(self) -> bool:
        return self.difference is None


def _run_in_order(P: FinitePoset, order: Sequence, dense: list) -> list:
    """The plain construction on a presentation enumerating conditions in ``order``:
    dense sets by first appearance of their least member, least element below the last."""
    pos = {c: i for i, c in enumerate(order)}
    Ds = sorted(dense, key=lambda D: sorted(pos[c] for c in D))
    seq = [min(P.conditions, key=lambda c: (not all(P.le(q, c) for q in P.conditions), pos[c]))]
    for D in Ds:
        seq.append(min((c for c in D if P.le(c, seq[-1])), key=pos.__getitem__))
    return seq


def order_sensitivity_demo(P: FinitePoset, order1: Sequence, order2: Sequence,
                           dense: Optional[list] = None) -> OrderReport:
    """Run the construction under two enumeration orders of the same poset."""
    for o in (order1, order2):
        if sorted(o, key=str) != sorted(P.conditions, key=str):
            raise ValueError("an order must list every condition exactly once")
    dense = list(P.dense_sets() if dense is None else dense)
    s1, s2 = _run_in_order(P, order1, dense), _run_in_order(P, order2, dense)
    G1, G2 = P.up(s1[-1]), P.up(s2[-1])
    valid = lambda G: all(G & set(D) for D in dense)
    diff = next((c for c in order1 if (c in G1) != (c in G2)), None)
    key = {c: i for i, c in enumerate(order1)}.__getitem__
    return OrderReport(tuple(sorted(G1, key=key)), tuple(sorted(G2, key=key)), tuple(s1), tuple(s2),
                       valid(G1), valid(G2), diff)


def cohen_order_demo(labels1: Sequence[str], labels2: Sequence[str]) -> OrderReport:
    """Cohen forcing, meeting the decision sets for the given strings in two orders.

    Conditions are compared as binary strings; the reported difference is the
    shortest string in one filter and not the other.
    """
    def run(labels):
        stream = [cohen_decision_dense(s) for s in labels]
        G = build_generic_abstract(cohen_poset(lambda n: stream[n]), len(stream))
        return [cohen_string(p) for p in G.sequence]

    s1, s2 = run(labels1), run(labels2)
    b1, b2 = s1[-1], s2[-1]
    # b meets the decision set for t: it extends t or is incompatible with it
    valid = lambda b: all(b.startswith(t) or not t.startswith(b) for t in labels1)
    diff = None
    for k in range(1, max(len(b1), len(b2)) + 1):
        for t in (b1[:k], b2[:k]):
            if len(t) == k and b1.startswith(t) != b2.startswith(t):
                diff = t
                break
        if diff is not None:
            break
    pref = lambda b: tuple(b[:k] for k in range(len(b) + 1))
    return OrderReport(pref(b1), pref(b2), tuple(s1), tuple(s2), valid(b1), valid(b2), diff)
