"""Constructions around the generic multiverse that an oracle can carry out.

* z-coded Cohen generics: meet each dense set with a shortest extension,
  then write the next bit of z, so z can be read back from the branch.
* The amalgamation matrix: Cohen reals c_i (i in I) such that exactly the
  families in A_family are mutually generic; outside A_family every all-1
  row is a coding row and z can be read off.
* The catastrophic real of a presentation, and the listing of grounds from
  an oracle for the ground-definability formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Callable, Iterator, Optional, Sequence

from .generic import (
    BudgetExhausted, DenseSet, DishonestWitness, GenericFilter, Undecided, cohen_code, cohen_string,
)
from .oracle import Answer, DiagramOracle, LevelViolation, QueryLevel, sigma_level

__all__ = [
    "ProductDense", "AmalgamationSpec", "StepRecord", "Matrix", "build_matrix", "decode_z",
    "check_matrix", "ZCodedGeneric", "z_coded_generic", "decode_coded_generic",
    "CatastrophicReal", "catastrophic_real", "cantor_pair", "cantor_unpair",
    "GroundOracle", "MockGrounds", "enumerate_grounds", "downward_closure",
    "length_dense", "split_dense", "standard_stream",
]

SEARCH_CAP = 1 << 20  # candidate extensions tried per dense set


def _strings(k: int) -> Iterator[str]:
    """All binary strings of length exactly k, lexicographically."""
    for bits in product("01", repeat=k):
        yield "".join(bits)


# --------------------------------------------------------------------------
# the amalgamation matrix

@dataclass(frozen=True)
class ProductDense:
    """A dense subset of the product of Add(omega, 1) over the columns in A.

    Conditions are dicts column -> binary string.  ``witness(p)`` returns some
    extension of p in the set; the construction only uses it to bound the
    search for a shortest one.
    """
    A: frozenset
    member: Callable[[dict], bool]
    witness: Callable[[dict], dict]
    label: str = ""


def downward_closure(family) -> frozenset:
    out = set()
    for A in family:
        A = tuple(sorted(A))
        for k in range(len(A) + 1):
            out.update(frozenset(c) for c in combinations(A, k))
    return frozenset(out)


@dataclass(frozen=True)
class AmalgamationSpec:
    I: tuple
    A_family: frozenset
    dense_stream: Sequence       # ProductDense items, or a callable n -> ProductDense
    z: Sequence                  # bits, or a callable n -> bit

    def __post_init__(self):
        object.__setattr__(self, "I", tuple(sorted(self.I)))
        fam = frozenset(frozenset(A) for A in self.A_family) | {frozenset()}
        object.__setattr__(self, "A_family", fam)
        if any(frozenset([i]) not in fam for i in self.I):
            raise ValueError("A_family must contain every singleton")
        if downward_closure(fam) != fam:
            raise ValueError("A_family must be closed under subsets")
        if any(not A <= set(self.I) for A in fam):
            raise ValueError("A_family mentions indices outside I")

    def dense(self, n: int) -> Optional[ProductDense]:
        if callable(self.dense_stream):
            return self.dense_stream(n)
        return self.dense_stream[n] if n < len(self.dense_stream) else None

    def bit(self, n: int) -> int:
        return int(self.z(n) if callable(self.z) else self.z[n])


@dataclass(frozen=True)
class StepRecord:
    dense_index: int
    A: frozenset
    start: int                 # common height before the step
    met: tuple                 # (column, length of that column once D is met)
    coding_row: int            # the all-1 row; the z row follows it


@dataclass(frozen=True)
class Matrix:
    I: tuple
    columns: dict
    log: tuple

    @property
    def height(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    def rows(self) -> list:
        return ["".join(self.columns[i][r] for i in self.I) for r in range(self.height)]

    def dump(self) -> str:
        return "\n".join(self.rows())


def _shortest_extension(D: ProductDense, p: dict, label) -> dict:
    w = D.witness(dict(p))
    cols = sorted(D.A)
    if set(w) != set(cols) or any(not w[i].startswith(p[i]) for i in cols) or not D.member(dict(w)):
        raise DishonestWitness(f"dense set {label}: witness {w!r} fails its contract at {p!r}")
    bound = max(len(w[i]) - len(p[i]) for i in cols) if cols else 0
    tried = 0
    for k in range(bound + 1):
        # max added length exactly k; ties broken by (length, string) per column
        cand = []
        for lens in product(range(k + 1), repeat=len(cols)):
            if k and max(lens) != k:
                continue
            for parts in product(*(_strings(n) for n in lens)):
                tried += 1
                if tried > SEARCH_CAP:
                    raise BudgetExhausted(f"dense set {label}: extension search too large")
                cand.append(tuple(zip(lens, parts)))
        for c in sorted(cand):
            q = {i: p[i] + s for i, (_, s) in zip(cols, c)}
            if D.member(dict(q)):
                return q
    raise DishonestWitness(f"dense set {label}: witness in D but no extension found")


def length_dense(A, n: int) -> ProductDense:
    """Every column in A has length at least n."""
    A = frozenset(A)
    return ProductDense(A, lambda q: all(len(q[i]) >= n for i in A),
                        lambda q: {i: q[i].ljust(n, "0") for i in A}, f"len>={n} on {sorted(A)}")


def split_dense(A, n: int) -> ProductDense:
    """Columns in A pairwise disagree somewhere at or beyond row n; a lone column has a 0 there."""
    A = frozenset(A)
    cols = sorted(A)

    def member(q):
        if len(cols) == 1:
            return "0" in q[cols[0]][n:]
        return all(any(a != b for a, b in zip(q[i][n:], q[j][n:])) for i, j in combinations(cols, 2))

    def witness(q):
        h = max([n] + [len(q[i]) for i in cols])
        out = {i: q[i].ljust(h, "0") for i in cols}
        # column k gets the k-bit binary expansion of its rank, so any two differ
        width = max(1, len(cols).bit_length())
        for k, i in enumerate(cols):
            out[i] += format(k, f"0{width}b")
        return out

    return ProductDense(A, member, witness, f"split>={n} on {cols}")


def standard_stream(A_family):
    """Cycle through the nonempty members of the family, alternating the two kinds above."""
    fam = sorted((A for A in A_family if A), key=lambda A: (len(A), sorted(A)))

    def stream(n: int) -> ProductDense:
        A = fam[(n // 2) % len(fam)]
        return length_dense(A, n // 2 + 1) if n % 2 == 0 else split_dense(A, n // 2)

    return stream


def build_matrix(spec: AmalgamationSpec, steps: int) -> Matrix:
    cols = {i: "" for i in spec.I}
    log = []
    for n in range(steps):
        D = spec.dense(n)
        start = len(next(iter(cols.values()))) if cols else 0
        A = frozenset() if D is None else D.A
        if D is not None:
            if D.A not in spec.A_family:
                raise ValueError(f"dense set {n} lives on {sorted(D.A)}, not in A_family")
            q = _shortest_extension(D, {i: cols[i] for i in D.A}, n)
            cols.update(q)
        met = tuple(sorted((i, len(cols[i])) for i in A))
        top = max([len(c) for c in cols.values()], default=0)
        for i in spec.I:
            cols[i] = cols[i].ljust(top, "1" if i in A else "0")
        b = str(spec.bit(n))
        for i in spec.I:
            cols[i] += "1" + b
        log.append(StepRecord(n, A, start, met, top))
    return Matrix(spec.I, dict(cols), tuple(log))


def decode_z(m: Matrix, A, prefix_len: int, spec: Optional[AmalgamationSpec] = None) -> list:
    """Read z back from the columns in A, for A outside the family.

    Scanning upward, the first all-1 row across A is a coding row and the
    next row carries the bit.  The log is used to confirm that each coding
    row found is where the construction put it.
    """
    A = frozenset(A)
    if spec is not None and A in spec.A_family:
        raise ValueError("A is in A_family: coding rows cannot be isolated")
    if not A or not A <= set(m.I):
        raise ValueError("A must be a nonempty set of column indices")
    out = []
    r = 0
    H = m.height
    for rec in m.log:
        if len(out) >= prefix_len:
            break
        while r < H and not all(m.columns[i][r] == "1" for i in A):
            r += 1
        if r + 1 >= H:
            break
        if r != rec.coding_row:
            raise ValueError(f"all-1 row {r} is not the logged coding row {rec.coding_row}: "
                             "is A in A_family?")
        out.append(int(m.columns[next(iter(A))][r + 1]))
        r += 2
    if len(out) < prefix_len:
        raise ValueError(f"matrix codes only {len(out)} bits")
    return out


def check_matrix(m: Matrix, spec: AmalgamationSpec) -> list:
    """Invariant violations (empty list when all hold)."""
    bad = []
    heights = {len(c) for c in m.columns.values()}
    if len(heights) > 1:
        bad.append("columns differ in height")
    coding = set()
    for rec in m.log:
        r = rec.coding_row
        coding |= {r, r + 1}
        if any(m.columns[i][r] != "1" for i in m.I):
            bad.append(f"step {rec.dense_index}: row {r} is not all 1")
        zb = str(spec.bit(rec.dense_index))
        if any(m.columns[i][r + 1] != zb for i in m.I):
            bad.append(f"step {rec.dense_index}: row {r + 1} does not carry z")
        D = spec.dense(rec.dense_index)
        if D is not None and not D.member({i: m.columns[i][:h] for i, h in rec.met}):
            bad.append(f"step {rec.dense_index}: columns {sorted(D.A)} do not meet {D.label or 'D'}")
    for k in range(1, len(m.I) + 1):
        for A in combinations(m.I, k):
            if frozenset(A) in spec.A_family:
                continue
            for r in range(m.height):
                if r not in coding and all(m.columns[i][r] == "1" for i in A):
                    bad.append(f"A={list(A)}: all-1 row {r} is not a coding row")
    return bad


# --------------------------------------------------------------------------
# z-coded Cohen generic

class ZCodedGeneric(GenericFilter):
    """A Cohen branch built from z; conditions are codes int('1' + s, 2)."""

    mode = "coded"

    def __init__(self, branch: str, ext_lengths: list, sequence: list):
        super().__init__()
        self.branch = branch
        self.ext_lengths = list(ext_lengths)
        self.sequence = sequence

    def member(self, q) -> bool:
        s = cohen_string(q)
        if len(s) > len(self.branch):
            raise Undecided(f"condition {s} longer than the built branch")
        return self.branch.startswith(s)


def _shortest_cohen(D: DenseSet, p: int, label) -> int:
    w = D.witness(p)
    s = cohen_string(p)
    if not (isinstance(w, int) and w >= 1 and cohen_string(w).startswith(s) and D.member(w)):
        raise DishonestWitness(f"dense set {label}: witness {w!r} fails its contract at {s!r}")
    for k in range(len(cohen_string(w)) - len(s) + 1):
        if 1 << k > SEARCH_CAP:
            raise BudgetExhausted(f"dense set {label}: extension search too large")
        for t in _strings(k):
            q = cohen_code(s + t)
            if D.member(q):
                return q
    raise DishonestWitness(f"dense set {label}: witness in D but no extension found")


def z_coded_generic(dense_stream, z, steps: int) -> ZCodedGeneric:
    """p_0 = <z(0)>; p_{n+1} = shortest extension of p_n into D_n, then z(n+1)."""
    get = dense_stream if callable(dense_stream) else (
        lambda n: dense_stream[n] if n < len(dense_stream) else None)
    bit = z if callable(z) else (lambda n: z[n])
    p = cohen_code(str(int(bit(0))))
    seq, lens = [p], []
    for n in range(steps):
        D = get(n)
        before = len(cohen_string(p))
        if D is not None:
            p = _shortest_cohen(D, p, n)
        lens.append(len(cohen_string(p)) - before)
        p = cohen_code(cohen_string(p) + str(int(bit(n + 1))))
        seq.append(p)
    G = ZCodedGeneric(cohen_string(p), lens, seq)
    G.dense_log = list(range(steps))
    return G


def decode_coded_generic(branch: str, ext_lengths: list) -> list:
    """z from the branch and the shortest-extension lengths."""
    out = [int(branch[0])]
    pos = 1
    for k in ext_lengths:
        pos += k
        if pos >= len(branch):
            break
        out.append(int(branch[pos]))
        pos += 1
    return out


# --------------------------------------------------------------------------
# catastrophic real

def cantor_pair(a: int, b: int) -> int:
    return (a + b) * (a + b + 1) // 2 + b


def cantor_unpair(k: int) -> tuple:
    w = (math.isqrt(8 * k + 1) - 1) // 2
    b = k - w * (w + 1) // 2
    return w - b, b


class CatastrophicReal:
    """Bit k is 1 iff a ∈ b in the presentation, where k = cantor_pair(a, b)."""

    def __init__(self, atomic: DiagramOracle):
        self.atomic = atomic
        self._memo: dict = {}

    def bit(self, a: int, b: int) -> int:
        key = (a, b)
        if key not in self._memo:
            self._memo[key] = int(self.atomic.member(a, b))
        return self._memo[key]

    def __getitem__(self, k: int) -> int:
        return self.bit(*cantor_unpair(k))

    def prefix(self, n: int) -> list:
        return [self[k] for k in range(n)]


def catastrophic_real(atomic: DiagramOracle) -> CatastrophicReal:
    return CatastrophicReal(atomic)


# --------------------------------------------------------------------------
# grounds

class GroundOracle:
    """Answers instances phi(x, r) of the ground-definability formula.

    phi is Pi2 and defines, as r varies, every ground of a model of ZFC.
    No genuine model has a computable Pi2 theory, so implementations are
    mocks that declare the grounds they stand for.
    """

    level: QueryLevel = sigma_level(2)
    hypotheses: str = "ZFC"

    def in_ground(self, x: int, r: int, budget: int = 0) -> Answer:
        raise NotImplementedError


class MockGrounds(GroundOracle):
    """``table`` maps a parameter r to a membership predicate; other r define the empty class."""

    def __init__(self, table: dict, level: QueryLevel = sigma_level(2)):
        self.table = dict(table)
        self.level = level

    def in_ground(self, x: int, r: int, budget: int = 0) -> Answer:
        pred = self.table.get(r)
        return Answer.of(bool(pred(x)) if pred is not None else False)


def enumerate_grounds(pi2: GroundOracle, budget: int, params: int) -> list:
    """The nonempty grounds among parameters r < params, as (n, r, member) triples.

    Nonemptiness is probed by asking phi(∅, r); ``member(x)`` asks phi(x, r).
    """
    if pi2.level < sigma_level(2):
        raise LevelViolation(f"ground definitions need a Sigma2-level oracle, got {pi2.level}")
    out = []
    for r in range(params):
        a = pi2.in_ground(0, r, budget)
        if a is Answer.OUT_OF_BUDGET:
            raise BudgetExhausted(f"could not decide whether parameter {r} defines a ground")
        if a is Answer.TRUE:
            out.append((len(out), r, _ground_member(pi2, r, budget)))
    return out


def _ground_member(o: GroundOracle, r: int, budget: int):
    def member(x: int) -> bool:
        a = o.in_ground(x, r, budget)
        if a is Answer.OUT_OF_BUDGET:
            raise BudgetExhausted(f"phi({x}, {r}) undecided within budget")
        return a is Answer.TRUE
    return member
