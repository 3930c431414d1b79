"""Finite partial orders with a maximum, as seen from outside a model."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

__all__ = ["PosetHandle", "FinitePoset", "PosetError", "all_posets", "PosetFile", "parse_poset"]


class PosetError(ValueError):
    pass


@dataclass(frozen=True)
class PosetHandle:
    """Domain indices of the sets a model uses to represent a forcing notion."""
    P: int
    leq: int
    leq_complement: int
    perp: int
    dense_family: int

    def relabel(self, f) -> "PosetHandle":
        return PosetHandle(f(self.P), f(self.leq), f(self.leq_complement), f(self.perp), f(self.dense_family))


@dataclass(frozen=True)
class FinitePoset:
    """Conditions are arbitrary hashable labels (usually ints); ``leq`` holds pairs (p, q) with p <= q."""
    conditions: tuple
    leq: frozenset

    def __post_init__(self):
        conds = tuple(self.conditions)
        object.__setattr__(self, "conditions", conds)
        object.__setattr__(self, "leq", frozenset(self.leq))
        cs = set(conds)
        if len(cs) != len(conds):
            raise PosetError("duplicate conditions")
        for p, q in self.leq:
            if p not in cs or q not in cs:
                raise PosetError(f"order pair ({p}, {q}) mentions a non-condition")
        for p in conds:
            if (p, p) not in self.leq:
                raise PosetError(f"not reflexive at {p}")
        for p, q in self.leq:
            if p != q and (q, p) in self.leq:
                raise PosetError(f"not antisymmetric at {p}, {q}")
            for r in conds:
                if (q, r) in self.leq and (p, r) not in self.leq:
                    raise PosetError(f"not transitive at {p} <= {q} <= {r}")
        if not any(all((q, p) in self.leq for q in conds) for p in conds):
            raise PosetError("no maximum element")

    @classmethod
    def from_pairs(cls, conditions, pairs) -> "FinitePoset":
        """Reflexive-transitive closure of the given pairs."""
        conds = tuple(conditions)
        rel = {(p, p) for p in conds} | set(pairs)
        changed = True
        while changed:
            changed = False
            for p, q in list(rel):
                for r, s in list(rel):
                    if q == r and (p, s) not in rel:
                        rel.add((p, s))
                        changed = True
        return cls(conds, frozenset(rel))

    @cached_property
    def top(self):
        for p in self.conditions:
            if all((q, p) in self.leq for q in self.conditions):
                return p

    @cached_property
    def index(self) -> dict:
        return {p: i for i, p in enumerate(self.conditions)}

    def le(self, p, q) -> bool:
        return (p, q) in self.leq

    @cached_property
    def below(self) -> dict:
        """p -> frozenset of conditions r <= p."""
        return {p: frozenset(r for r in self.conditions if (r, p) in self.leq) for p in self.conditions}

    @cached_property
    def below_mask(self) -> dict:
        return {p: sum(1 << self.index[r] for r in rs) for p, rs in self.below.items()}

    @cached_property
    def full_mask(self) -> int:
        return (1 << len(self.conditions)) - 1

    def compatible(self, p, q) -> bool:
        return bool(self.below[p] & self.below[q])

    def perp(self, p, q) -> bool:
        return not self.compatible(p, q)

    def is_dense(self, D) -> bool:
        D = set(D)
        return all(self.below[p] & D for p in self.conditions)

    def dense_below(self, D, p) -> bool:
        D = set(D)
        return all(self.below[q] & D for q in self.below[p])

    def dense_sets(self) -> list:
        """All dense subsets, each a frozenset."""
        out = []
        conds = self.conditions
        for k in range(len(conds) + 1):
            for sub in combinations(conds, k):
                if self.is_dense(sub):
                    out.append(frozenset(sub))
        return out

    def minimal(self) -> list:
        return [p for p in self.conditions if self.below[p] == {p}]

    def up(self, p) -> frozenset:
        return frozenset(q for q in self.conditions if (p, q) in self.leq)

    def generic_filters(self) -> list:
        """Filters meeting every dense set: up-closures of minimal elements."""
        return [self.up(m) for m in self.minimal()]

    def filters(self) -> list:
        """All filters, by brute force over subsets."""
        out = []
        conds = self.conditions
        for k in range(1, len(conds) + 1):
            for sub in combinations(conds, k):
                F = set(sub)
                if any(q not in F for p in F for q in self.up(p)):
                    continue
                if all(self.below[p] & self.below[q] & F for p in F for q in F):
                    out.append(frozenset(F))
        return out

    def relabel(self, f) -> "FinitePoset":
        return FinitePoset(tuple(f(p) for p in self.conditions),
                           frozenset((f(p), f(q)) for p, q in self.leq))

    # bitmask helpers for the forcing recursion
    def mask(self, conds) -> int:
        return sum(1 << self.index[c] for c in conds)

    def conds_of(self, mask: int) -> list:
        return [c for i, c in enumerate(self.conditions) if mask >> i & 1]

    @cached_property
    def _below_masks_by_index(self) -> list:
        return [self.below_mask[p] for p in self.conditions]

    def dense_below_mask(self, S: int) -> int:
        """Mask of conditions p below which S is dense."""
        bm = self._below_masks_by_index
        meets = 0
        for i, m in enumerate(bm):
            if m & S:
                meets |= 1 << i
        out = 0
        for i, m in enumerate(bm):
            if m & ~meets == 0:
                out |= 1 << i
        return out

    def all_below_mask(self, S: int) -> int:
        """Mask of conditions p with every q <= p in S."""
        out = 0
        for i, m in enumerate(self._below_masks_by_index):
            if m & ~S == 0:
                out |= 1 << i
        return out


def all_posets(max_size: int) -> list:
    """Every partial order with maximum on 1..max_size conditions, up to isomorphism.

    Conditions are labelled 0..n-1 with 0 the maximum.
    """
    from itertools import permutations, product

    seen = set()
    out = []
    for n in range(1, max_size + 1):
        rest = list(range(1, n))
        cand_pairs = [(p, q) for p in rest for q in rest if p != q]
        for bits in product((0, 1), repeat=len(cand_pairs)):
            rel = {(p, p) for p in range(n)} | {(p, 0) for p in range(n)}
            rel |= {pq for pq, b in zip(cand_pairs, bits) if b}
            try:
                P = FinitePoset(tuple(range(n)), frozenset(rel))
            except PosetError:
                continue
            canon = min(
                tuple(sorted((perm[p - 1] if p else 0, perm[q - 1] if q else 0) for p, q in rel))
                for perm in permutations(range(1, n))
            ) if n > 1 else ((0, 0),)
            if canon in seen:
                continue
            seen.add(canon)
            out.append(P)
    return out


@dataclass(frozen=True)
class PosetFile:
    """A poset read from text: ``COND <code> [label]`` and ``LEQ <p> <q>`` lines.

    ``LEQ`` pairs are closed under reflexivity and transitivity.  Conditions
    may be referred to by code or label.
    """
    poset: FinitePoset
    labels: dict          # code -> label

    def label(self, c) -> str:
        return self.labels.get(c, str(c))

    def resolve(self, token: str):
        for c, lab in self.labels.items():
            if lab == token:
                return c
        try:
            c = int(token)
        except ValueError:
            raise PosetError(f"unknown condition {token!r}") from None
        if c not in self.poset.index:
            raise PosetError(f"{c} is not a condition")
        return c


def parse_poset(text: str) -> PosetFile:
    conds, labels, pairs = [], {}, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kw = parts[0].upper()
        if kw == "COND" and len(parts) in (2, 3):
            try:
                c = int(parts[1])
            except ValueError:
                raise PosetError(f"line {lineno}: condition must be an HF code") from None
            if c < 0 or c in labels:
                raise PosetError(f"line {lineno}: bad or repeated condition {c}")
            conds.append(c)
            labels[c] = parts[2] if len(parts) == 3 else str(c)
        elif kw == "LEQ" and len(parts) == 3:
            pairs.append((lineno, parts[1], parts[2]))
        else:
            raise PosetError(f"line {lineno}: expected 'COND <code> [label]' or 'LEQ <p> <q>'")
    if not conds:
        raise PosetError("no conditions")
    by_label = {lab: c for c, lab in labels.items()}

    def look(lineno, tok):
        if tok in by_label:
            return by_label[tok]
        try:
            c = int(tok)
        except ValueError:
            raise PosetError(f"line {lineno}: unknown condition {tok!r}") from None
        if c not in labels:
            raise PosetError(f"line {lineno}: unknown condition {tok!r}")
        return c

    rel = [(look(n, a), look(n, b)) for n, a, b in pairs]
    return PosetFile(FinitePoset.from_pairs(sorted(conds), rel), labels)
