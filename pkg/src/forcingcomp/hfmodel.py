"""The hereditarily finite sets, Ackermann coded: m is a member of n iff bit m of n is set.

Two representations live side by side.  Small sets are plain ints; sets
whose code would be astronomically long (names of rank 2, forcing tables)
are ``HSet`` values, frozensets of ``HSet``.  Both denote the same
universe and convert into each other whenever the code fits under the
configured bound.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cmp_to_key, lru_cache
from itertools import combinations
from typing import Callable, Iterable, Optional

from .formula import (
    And, BoundedExists, BoundedForall, Const, Equal, Exists, Forall, LevyAtom, Member,
    Not, Or, SigConst, Var, constants, lookup_atom,
)
from .oracle import Answer, DiagramOracle, FULL, QueryLevel
from .posets import FinitePoset, PosetHandle

__all__ = [
    "CodeOverflow", "max_code_bits", "elements", "encode_set", "singleton", "unordered_pair",
    "union", "powerset", "kuratowski_pair", "kuratowski_unpair", "morse_pair", "von_neumann",
    "set_rank", "HSet", "hs", "to_code", "try_code", "ack_cmp", "ack_sorted", "hs_pair",
    "hs_unpair", "format_set", "parse_set", "evaluate", "hf_eval", "HFOracle",
    "register_witness_hint", "InstalledPoset", "install_poset",
]

DEFAULT_MAX_CODE_BITS = 1 << 16


class CodeOverflow(OverflowError):
    """A code would exceed the configured bit-length bound."""


def max_code_bits() -> int:
    raw = os.environ.get("FORCINGCOMP_MAX_CODE_BITS")
    return int(raw) if raw else DEFAULT_MAX_CODE_BITS


def _bit(m: int) -> int:
    if m + 1 > max_code_bits():
        raise CodeOverflow(f"code needs {m + 1} bits; bound is {max_code_bits()}")
    return 1 << m


# --------------------------------------------------------------------------
# integer codes

def elements(x: int) -> list:
    out, i = [], 0
    while x:
        low = x & -x
        i = low.bit_length() - 1
        out.append(i)
        x ^= low
    return out


def encode_set(xs: Iterable[int]) -> int:
    code = 0
    for x in xs:
        code |= _bit(x)
    return code


def singleton(x: int) -> int:
    return _bit(x)


def unordered_pair(x: int, y: int) -> int:
    return _bit(x) | _bit(y)


def union(x: int) -> int:
    out = 0
    for e in elements(x):
        out |= e
    return out


def powerset(x: int) -> int:
    els = elements(x)
    out = 0
    for k in range(len(els) + 1):
        for sub in combinations(els, k):
            out |= _bit(encode_set(sub))
    return out


def kuratowski_pair(x: int, y: int) -> int:
    return encode_set([singleton(x), unordered_pair(x, y)])


def kuratowski_unpair(p: int) -> Optional[tuple]:
    """(x, y) if p codes a Kuratowski pair, else None."""
    els = elements(p)
    if len(els) == 1:
        inner = elements(els[0])
        return (inner[0], inner[0]) if len(inner) == 1 else None
    if len(els) != 2:
        return None
    a, b = els
    if len(elements(a)) != 1:
        a, b = b, a
    if len(elements(a)) != 1:
        return None
    (x,) = elements(a)
    rest = elements(b)
    if len(rest) != 2 or x not in rest:
        return None
    y = rest[0] if rest[1] == x else rest[1]
    return (x, y)


def morse_pair(x: int, y: int) -> int:
    """({0} x X) u ({1} x Y) with Kuratowski pairs."""
    return encode_set([kuratowski_pair(0, e) for e in elements(x)]
                      + [kuratowski_pair(1, e) for e in elements(y)])


def von_neumann(n: int) -> int:
    code = 0
    for _ in range(n):
        code |= _bit(code)
    return code


def set_rank(x) -> int:
    if isinstance(x, HSet):
        return _hs_rank(x)
    return 0 if x == 0 else 1 + max(set_rank(e) for e in elements(x))


# --------------------------------------------------------------------------
# structural sets

class HSet(frozenset):
    """A hereditarily finite set as a frozenset of HSets."""

    def __repr__(self):
        return format_set(self)


EMPTY = HSet()


@lru_cache(maxsize=1 << 16)
def _from_code(n: int) -> HSet:
    return HSet(_from_code(e) for e in elements(n))


def hs(x) -> HSet:
    """Coerce an int code or HSet to an HSet."""
    if isinstance(x, HSet):
        return x
    if isinstance(x, int):
        if x < 0:
            raise ValueError("codes are natural numbers")
        return _from_code(x)
    if isinstance(x, frozenset):
        return HSet(hs(e) for e in x)
    raise TypeError(f"not a hereditarily finite set: {x!r}")


@lru_cache(maxsize=1 << 16)
def _to_code(x: HSet) -> int:
    code = 0
    for e in x:
        code |= _bit(_to_code(e))
    return code


def to_code(x) -> int:
    return x if isinstance(x, int) else _to_code(x)


def try_code(x) -> Optional[int]:
    try:
        return to_code(x)
    except CodeOverflow:
        return None


@lru_cache(maxsize=1 << 16)
def _hs_rank(x: HSet) -> int:
    return 0 if not x else 1 + max(_hs_rank(e) for e in x)


@lru_cache(maxsize=1 << 18)
def _ack_cmp(x: HSet, y: HSet) -> int:
    if x == y:
        return 0
    diff = x ^ y
    top = max(diff, key=cmp_to_key(_ack_cmp))
    return -1 if top in y else 1


def ack_cmp(x, y) -> int:
    """Compare by Ackermann code without computing the codes."""
    if isinstance(x, int) and isinstance(y, int):
        return (x > y) - (x < y)
    return _ack_cmp(hs(x), hs(y))


def ack_sorted(xs: Iterable) -> list:
    return sorted(xs, key=cmp_to_key(ack_cmp))


def hs_pair(a, b) -> HSet:
    a, b = hs(a), hs(b)
    return HSet([HSet([a]), HSet([a, b])])


def hs_unpair(z) -> Optional[tuple]:
    z = hs(z)
    if len(z) == 1:
        (w,) = z
        return (next(iter(w)),) * 2 if len(w) == 1 else None
    if len(z) != 2:
        return None
    u, v = z
    if len(u) != 1:
        u, v = v, u
    if len(u) != 1 or len(v) != 2:
        return None
    (a,) = u
    if a not in v:
        return None
    (b,) = v - {a}
    return (a, b)


def format_set(x) -> str:
    x = hs(x)
    return "{" + ",".join(format_set(e) for e in ack_sorted(x)) + "}"


def parse_set(text: str) -> HSet:
    s = "".join(text.split())
    pos = 0

    def read() -> HSet:
        nonlocal pos
        if pos >= len(s) or s[pos] != "{":
            raise ValueError(f"expected '{{' at offset {pos}")
        pos += 1
        items = []
        if pos < len(s) and s[pos] == "}":
            pos += 1
            return EMPTY
        while True:
            items.append(read())
            if pos >= len(s):
                raise ValueError("unterminated set")
            if s[pos] == ",":
                pos += 1
                continue
            if s[pos] == "}":
                pos += 1
                return HSet(items)
            raise ValueError(f"unexpected {s[pos]!r} at offset {pos}")

    out = read()
    if pos != len(s):
        raise ValueError("trailing input after set")
    return out


# --------------------------------------------------------------------------
# evaluation

# atom name -> (hint, unique).  A hint proposes a witness for an unbounded
# quantifier whose matrix contains the atom with the quantified variable as
# first argument.  ``unique`` declares that any two witnesses agree on every
# question the surrounding formula asks, which licenses deciding a universal
# by the single proposed witness.
_HINTS: dict = {}


def register_witness_hint(atom: str, hint: Callable, *, unique: bool = False) -> None:
    """``hint(args, siblings)``: ``args`` are the atom's other argument values,
    ``siblings`` lists ``(name, values)`` of further conjuncts mentioning the
    variable (the variable's own slot is None).  Returns an HSet or None."""
    _HINTS[atom] = (hint, unique)


def _conjuncts(phi) -> list:
    if isinstance(phi, And):
        return _conjuncts(phi.left) + _conjuncts(phi.right)
    return [phi]


class _Eval:
    def __init__(self, budget: int, sig: dict, pool: list):
        self.budget = budget
        self.sig = sig
        self.pool = pool

    def term(self, t, env):
        if isinstance(t, Var):
            try:
                return env[t.name]
            except KeyError:
                raise ValueError(f"free variable {t.name}") from None
        if isinstance(t, Const):
            return hs(t.value)
        if isinstance(t, SigConst):
            key = t.kind if t.index is None else (t.kind, t.index)
            if key not in self.sig:
                raise ValueError(f"no interpretation for {t}")
            return hs(self.sig[key])
        raise TypeError(f"not a term: {t!r}")

    def atom(self, phi, env) -> bool:
        d = lookup_atom(phi.atom)
        vals = [self.term(a, env) for a in phi.args]
        if d.fast is not None:
            return bool(d.fast(*vals))
        out = self.run(d.body, dict(zip(d.params, vals)))
        assert out is not None, "Delta0 evaluation is always decided"
        return out

    def run(self, phi, env) -> Optional[bool]:
        if isinstance(phi, Member):
            return self.term(phi.lhs, env) in self.term(phi.rhs, env)
        if isinstance(phi, Equal):
            return self.term(phi.lhs, env) == self.term(phi.rhs, env)
        if isinstance(phi, LevyAtom):
            return self.atom(phi, env)
        if isinstance(phi, Not):
            v = self.run(phi.body, env)
            return None if v is None else not v
        if isinstance(phi, And):
            a = self.run(phi.left, env)
            if a is False:
                return False
            b = self.run(phi.right, env)
            if b is False:
                return False
            return None if a is None or b is None else True
        if isinstance(phi, Or):
            a = self.run(phi.left, env)
            if a is True:
                return True
            b = self.run(phi.right, env)
            if b is True:
                return True
            return None if a is None or b is None else False
        if isinstance(phi, (BoundedExists, BoundedForall)):
            want = isinstance(phi, BoundedExists)
            unknown = False
            for e in self.term(phi.bound, env):
                v = self.run(phi.body, {**env, phi.var: e})
                if v is want:
                    return want
                unknown |= v is None
            return None if unknown else not want
        if isinstance(phi, (Exists, Forall)):
            return self.unbounded(phi, env)
        raise TypeError(f"not a formula: {phi!r}")

    # unbounded quantifiers ------------------------------------------------

    def _guard_range(self, var, f, env):
        """Exact candidates when f is ``var ∈ t`` or ``subset(var, t)``, t free of var."""
        if isinstance(f, Member) and f.lhs == Var(var) and f.rhs != Var(var):
            return list(self.term(f.rhs, env))
        if isinstance(f, LevyAtom) and f.atom == "subset" and f.args[0] == Var(var) \
                and f.args[1] != Var(var):
            return _subsets(self.term(f.args[1], env))
        return None

    def _hint(self, var, conjs, env):
        for c in conjs:
            if isinstance(c, LevyAtom) and c.atom in _HINTS and c.args and c.args[0] == Var(var):
                if any(a == Var(var) for a in c.args[1:]):
                    continue
                hint, unique = _HINTS[c.atom]
                args = [self.term(a, env) for a in c.args[1:]]
                sib = []
                for d in conjs:
                    if d is c or not isinstance(d, LevyAtom) or Var(var) not in d.args:
                        continue
                    sib.append((d.atom, [None if a == Var(var) else self.term(a, env) for a in d.args]))
                w = hint(args, sib)
                if w is not None:
                    return w, unique
        return None, False

    def unbounded(self, phi, env) -> Optional[bool]:
        want = isinstance(phi, Exists)
        var, body = phi.var, phi.body
        # ∃x (x ∈ t ∧ ψ), ∃x (x ⊆ t ∧ ψ) and their ∀ duals range over finitely many candidates
        if want:
            conjs = _conjuncts(body)
            for c in conjs:
                rng = self._guard_range(var, c, env)
                if rng is not None:
                    return self._over(rng, var, body, env, want, exact=True)
            w, _ = self._hint(var, conjs, env)
            if w is not None and self.run(body, {**env, var: w}) is True:
                return True
        elif isinstance(body, Or) and isinstance(body.left, Not):
            guard = body.left.body
            rng = None
            for c in _conjuncts(guard):
                rng = self._guard_range(var, c, env)
                if rng is not None:
                    break
            if rng is not None:
                return self._over(rng, var, body, env, want, exact=True)
            w, unique = self._hint(var, _conjuncts(guard), env)
            if w is not None:
                g = self.run(guard, {**env, var: w})
                if g is True and unique:
                    return self.run(body.right, {**env, var: w})
                if g is True and self.run(body.right, {**env, var: w}) is False:
                    return False
        found = self._over(self.pool, var, body, env, want, exact=False)
        if found is want:
            return want
        return self._over((hs(n) for n in range(self.budget)), var, body, env, want, exact=False)

    def _over(self, candidates, var, body, env, want, exact) -> Optional[bool]:
        unknown = False
        for x in candidates:
            v = self.run(body, {**env, var: x})
            if v is want:
                return want
            unknown |= v is None
        if exact and not unknown:
            return not want
        return None


def _subsets(t: HSet):
    els = list(t)
    for k in range(len(els) + 1):
        for sub in combinations(els, k):
            yield HSet(sub)


def _pool(phi, sig) -> list:
    vals = [hs(c.value) for c in constants(phi) if isinstance(c, Const)]
    vals += [hs(v) for v in sig.values()]
    seen, out = set(), []
    for v in vals:
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


def evaluate(phi, budget: int = 0, *, sig: Optional[dict] = None, env: Optional[dict] = None) -> Optional[bool]:
    """Three-valued truth in HF: True, False, or None when the budget ran out.

    Bounded quantifiers are exact.  An unbounded quantifier tries, in order:
    an exact range when guarded by ``∈`` or ``subset``, a registered witness hint, the
    constants of the sentence, and then every code below ``budget``.
    """
    sig = dict(sig or {})
    ev = _Eval(budget, sig, _pool(phi, sig))
    return ev.run(phi, {k: hs(v) for k, v in (env or {}).items()})


def hf_eval(s, budget: int = 0, *, sig: Optional[dict] = None) -> Answer:
    return Answer.of(evaluate(s, budget, sig=sig))


class HFOracle(DiagramOracle):
    """The diagram of HF at a chosen level; constants may be codes or HSets."""

    def __init__(self, level: QueryLevel = FULL, sig: Optional[dict] = None):
        self.level = level
        self.sig = dict(sig or {})

    def _answer(self, s, budget):
        return Answer.of(evaluate(s, budget, sig=self.sig))


# --------------------------------------------------------------------------
# finite posets inside HF

@dataclass(frozen=True)
class InstalledPoset:
    poset: FinitePoset
    handle: PosetHandle
    notion: HSet  # Kuratowski pair (P, <=_P), the value of the signature constant p

    @property
    def conditions(self) -> tuple:
        return self.poset.conditions

    @property
    def top(self) -> int:
        return self.poset.top

    def dense_sets(self) -> list:
        return [frozenset(elements(d)) for d in elements(self.handle.dense_family)]

    def sig(self) -> dict:
        return {"p": self.notion}


def install_poset(conditions: Iterable[int], leq: Iterable[tuple]) -> InstalledPoset:
    """Place a finite partial order with maximum into HF as sets of Kuratowski pairs.

    ``leq`` must already be the full order relation (reflexive and transitive).
    """
    conds = tuple(sorted(set(conditions)))
    if any(not isinstance(c, int) or c < 0 for c in conds):
        raise ValueError("conditions must be HF codes")
    P = FinitePoset(conds, frozenset(tuple(pq) for pq in leq))
    leq_code = encode_set(kuratowski_pair(p, q) for p, q in P.leq)
    comp = encode_set(kuratowski_pair(p, q) for p in conds for q in conds if (p, q) not in P.leq)
    perp = encode_set(kuratowski_pair(p, q) for p in conds for q in conds if P.perp(p, q))
    dense = encode_set(encode_set(D) for D in P.dense_sets())
    P_code = encode_set(conds)
    handle = PosetHandle(P_code, leq_code, comp, perp, dense)
    return InstalledPoset(P, handle, hs_pair(P_code, leq_code))
