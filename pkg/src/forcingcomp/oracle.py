"""Diagram oracles: presentations of countable structures on the natural numbers.

An oracle answers closed sentences whose model constants are domain
elements.  Each oracle declares the level of the diagram it gives access
to; asking above that level is an error, not a wrong answer.
"""

from __future__ import annotations

import enum
import threading
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .formula import (
    Const, DELTA0, Equal, FormulaError, Member, classify, free_vars, map_terms,
)

__all__ = [
    "Answer", "QueryLevel", "ATOMIC", "DELTA0_LEVEL", "FULL", "sigma_level", "level_of",
    "LevelViolation", "OracleError", "DiagramOracle", "Presentation", "FinPerm",
    "permute", "restrict", "relabel", "RecordingOracle", "DumpOracle",
    "read_dump", "write_dump",
]


class OracleError(ValueError):
    pass


class LevelViolation(OracleError):
    """The sentence is above the oracle's level; the caller needs a stronger oracle."""


class Answer(enum.Enum):
    TRUE = "True"
    FALSE = "False"
    OUT_OF_BUDGET = "OutOfBudget"

    @classmethod
    def of(cls, value: Optional[bool]) -> "Answer":
        if value is None:
            return cls.OUT_OF_BUDGET
        return cls.TRUE if value else cls.FALSE

    def to_bool(self) -> Optional[bool]:
        return None if self is Answer.OUT_OF_BUDGET else self is Answer.TRUE

    def __bool__(self):
        raise TypeError("Answer is three-valued; compare with Answer.TRUE explicitly")

    def __str__(self):
        return self.value


@dataclass(frozen=True, order=True)
class QueryLevel:
    rank: int
    n: int = 0

    def __str__(self):
        if self.rank == 0:
            return "Atomic"
        if self.rank == 1:
            return "Delta0"
        if self.rank == 2:
            return f"Sigma({self.n})"
        return "Full"

    __repr__ = __str__


ATOMIC = QueryLevel(0)
DELTA0_LEVEL = QueryLevel(1)
FULL = QueryLevel(3)


def sigma_level(n: int) -> QueryLevel:
    if n < 1:
        raise OracleError("Sigma levels start at 1")
    return QueryLevel(2, n)


def _is_atomic_sentence(s) -> bool:
    return isinstance(s, (Member, Equal)) and isinstance(s.lhs, Const) and isinstance(s.rhs, Const)


def level_of(s) -> QueryLevel:
    """Least diagram level containing the sentence (Pi(n) is decided at Sigma(n))."""
    if _is_atomic_sentence(s):
        return ATOMIC
    c = classify(s)
    if c == DELTA0:
        return DELTA0_LEVEL
    return sigma_level(c.n)


# --------------------------------------------------------------------------
# oracles

class DiagramOracle:
    """Base class.  Subclasses implement ``_answer(sentence, budget)``."""

    level: QueryLevel = FULL

    def query(self, s, budget: int = 0) -> Answer:
        if free_vars(s):
            raise OracleError(f"sentence has free variables {sorted(free_vars(s))}")
        need = level_of(s)
        if need > self.level:
            raise LevelViolation(f"{need} sentence asked of a {self.level} oracle")
        return self._answer(s, budget)

    def _answer(self, s, budget: int) -> Answer:
        raise NotImplementedError

    def member(self, a: int, b: int) -> bool:
        ans = self.query(Member(Const(a), Const(b)))
        if ans is Answer.OUT_OF_BUDGET:
            raise OracleError("atomic query out of budget")
        return ans is Answer.TRUE


@dataclass(frozen=True)
class FinPerm:
    """A finitely supported bijection of the natural numbers."""
    mapping: tuple  # sorted (a, f(a)) pairs with a != f(a)

    @classmethod
    def from_pairs(cls, pairs: Iterable) -> "FinPerm":
        m = {}
        for a, b in pairs:
            if a in m and m[a] != b:
                raise OracleError(f"{a} mapped twice")
            m[a] = b
        if len(set(m.values())) != len(m):
            raise OracleError("permutation is not injective on its support")
        if set(m.values()) != set(m):
            raise OracleError("permutation does not map its support onto itself")
        return cls(tuple(sorted((a, b) for a, b in m.items() if a != b)))

    @classmethod
    def from_swaps(cls, swaps: Iterable) -> "FinPerm":
        """Product of transpositions, the first applied first."""
        f = cls(())
        for a, b in swaps:
            f = cls.from_pairs([(a, b), (b, a)]).compose(f) if a != b else f
        return f

    @classmethod
    def identity(cls) -> "FinPerm":
        return cls(())

    def __call__(self, n):
        return dict(self.mapping).get(n, n)

    @property
    def support(self) -> set:
        return {a for a, _ in self.mapping}

    def inverse(self) -> "FinPerm":
        return FinPerm(tuple(sorted((b, a) for a, b in self.mapping)))

    def compose(self, other: "FinPerm") -> "FinPerm":
        """self ∘ other: apply other first."""
        pts = self.support | other.support
        return FinPerm(tuple(sorted((a, self(other(a))) for a in pts if self(other(a)) != a)))


def relabel(s, f):
    """Replace every integer model constant n in s by f(n)."""
    def t(term):
        if isinstance(term, Const) and isinstance(term.value, int):
            return Const(f(term.value))
        return term

    try:
        return map_terms(s, t)
    except FormulaError as e:
        raise OracleError(str(e)) from None


@dataclass(frozen=True)
class Presentation:
    oracle: DiagramOracle
    provenance: tuple = ("base",)
    to_base: FinPerm = field(default_factory=FinPerm.identity)

    @property
    def level(self) -> QueryLevel:
        return self.oracle.level


class _PermutedOracle(DiagramOracle):
    def __init__(self, base: DiagramOracle, f: FinPerm):
        self.base = base
        self.f_inv = f.inverse()
        self.level = base.level

    def _answer(self, s, budget):
        return self.base.query(relabel(s, self.f_inv), budget)


def permute(pres: Presentation, f: FinPerm) -> Presentation:
    """Isomorphic presentation in which number f(n) denotes what n denoted before."""
    if not isinstance(f, FinPerm):
        f = FinPerm.from_pairs(f)
    if isinstance(pres, DiagramOracle):
        pres = Presentation(pres)
    return Presentation(_PermutedOracle(pres.oracle, f),
                        pres.provenance + (("permuted", f.mapping),),
                        pres.to_base.compose(f.inverse()))


class _RestrictedOracle(DiagramOracle):
    def __init__(self, base: DiagramOracle, level: QueryLevel):
        self.base = base
        self.level = level

    def _answer(self, s, budget):
        return self.base.query(s, budget)


def restrict(o: DiagramOracle, level: QueryLevel) -> DiagramOracle:
    if level > o.level:
        raise LevelViolation(f"cannot restrict a {o.level} oracle up to {level}")
    if isinstance(o, _RestrictedOracle):
        o = o.base
    return _RestrictedOracle(o, level)


class RecordingOracle(DiagramOracle):
    """Pass-through wrapper that logs the level of every query."""

    def __init__(self, base: DiagramOracle):
        self.base = base
        self.level = base.level
        self.log: list = []
        self._lock = threading.Lock()

    def _answer(self, s, budget):
        ans = self.base.query(s, budget)
        with self._lock:
            self.log.append((level_of(s), s, ans))
        return ans

    def counts(self) -> Counter:
        return Counter(str(level) for level, _, _ in self.log)

    def count_above(self, level: QueryLevel) -> int:
        return sum(1 for lv, _, _ in self.log if lv > level)

    def atomic_transcript(self) -> list:
        return [(s.lhs.value, s.rhs.value, ans is Answer.TRUE)
                for lv, s, ans in self.log if lv == ATOMIC and isinstance(s, Member)]


# --------------------------------------------------------------------------
# diagram dumps: finite fragments of an atomic diagram

class DumpOracle(DiagramOracle):
    """Atomic oracle backed by a recorded finite fragment of a diagram."""

    level = ATOMIC

    def __init__(self, facts: dict):
        self.facts = dict(facts)

    def _answer(self, s, budget):
        a, b = s.lhs.value, s.rhs.value
        if isinstance(s, Equal):
            return Answer.of(a == b)
        if (a, b) not in self.facts:
            return Answer.OUT_OF_BUDGET
        return Answer.of(self.facts[(a, b)])


def write_dump(transcript: Iterable) -> str:
    lines = []
    for a, b, val in transcript:
        lines.append(f"{'MEM' if val else 'NOTMEM'} {a} {b}")
    return "\n".join(lines) + ("\n" if lines else "")


def read_dump(text: str) -> DumpOracle:
    facts = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] not in ("MEM", "NOTMEM"):
            raise OracleError(f"line {lineno}: expected 'MEM a b' or 'NOTMEM a b'")
        try:
            a, b = int(parts[1]), int(parts[2])
        except ValueError:
            raise OracleError(f"line {lineno}: bad number") from None
        val = parts[0] == "MEM"
        if facts.get((a, b), val) != val:
            raise OracleError(f"line {lineno}: contradicts an earlier line")
        facts[(a, b)] = val
    return DumpOracle(facts)
