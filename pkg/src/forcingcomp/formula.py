"""Formula ASTs over the membership, Lévy and expanded signatures.

Formulas are immutable dataclasses.  Bounded quantifiers range over the
members of a term; unbounded ones over the whole domain.  Complexity is
measured in the Lévy hierarchy, where bounded quantifiers are free.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Union

__all__ = [
    "map_terms",
    "Var", "Const", "SigConst", "Term",
    "Member", "Equal", "LevyAtom", "Not", "And", "Or",
    "BoundedExists", "BoundedForall", "Exists", "Forall", "Formula",
    "LevyClass", "DELTA0", "Sigma", "Pi",
    "classify", "levy_bounds", "normalize_collection", "is_prenex",
    "register_levy_atom", "expand_levy_atoms", "lookup_atom", "AtomDef",
    "substitute", "substitute_many", "free_vars", "all_vars", "constants",
    "alpha_normalize", "godel_code", "godel_decode",
    "conj", "disj", "implies", "iff", "FormulaError",
]


class FormulaError(ValueError):
    pass


# --------------------------------------------------------------------------
# terms

@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    """A domain element of a presentation (an int), or a structural HF set."""
    value: object

    def __str__(self):
        return f"#{self.value}"


@dataclass(frozen=True)
class SigConst:
    """One of the expanded-signature constants p, c, d(j)."""
    kind: str
    index: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("p", "c", "d"):
            raise FormulaError(f"unknown signature constant {self.kind!r}")
        if (self.kind == "d") != (self.index is not None):
            raise FormulaError("only d carries an index")

    def __str__(self):
        return f"@{self.kind}{'' if self.index is None else self.index}"


Term = Union[Var, Const, SigConst]


# --------------------------------------------------------------------------
# formulas

@dataclass(frozen=True)
class Member:
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Equal:
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class LevyAtom:
    atom: str
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class BoundedExists:
    var: str
    bound: Term
    body: "Formula"

    def __post_init__(self):
        if self.bound == Var(self.var):
            raise FormulaError(f"bound of {self.var} mentions {self.var}")


@dataclass(frozen=True)
class BoundedForall:
    var: str
    bound: Term
    body: "Formula"

    def __post_init__(self):
        if self.bound == Var(self.var):
            raise FormulaError(f"bound of {self.var} mentions {self.var}")


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = Union[Member, Equal, LevyAtom, Not, And, Or,
                BoundedExists, BoundedForall, Exists, Forall]

_ATOMIC = (Member, Equal, LevyAtom)
_BOUNDED = (BoundedExists, BoundedForall)
_UNBOUNDED = (Exists, Forall)


def conj(*fs: Formula) -> Formula:
    if not fs:
        raise FormulaError("empty conjunction")
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = And(f, out)
    return out


def disj(*fs: Formula) -> Formula:
    if not fs:
        raise FormulaError("empty disjunction")
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = Or(f, out)
    return out


def implies(a: Formula, b: Formula) -> Formula:
    return Or(Not(a), b)


def iff(a: Formula, b: Formula) -> Formula:
    return And(implies(a, b), implies(b, a))


# --------------------------------------------------------------------------
# Lévy classes

@dataclass(frozen=True)
class LevyClass:
    kind: str          # "D0", "S" or "P"
    n: int = 0

    def __post_init__(self):
        if self.kind == "D0":
            if self.n != 0:
                raise FormulaError("Delta0 has no level")
        elif self.kind in ("S", "P"):
            if self.n < 1:
                raise FormulaError("Sigma/Pi levels start at 1")
        else:
            raise FormulaError(f"bad Lévy class kind {self.kind!r}")

    def __str__(self):
        return "Delta0" if self.kind == "D0" else f"{'Sigma' if self.kind == 'S' else 'Pi'}({self.n})"

    __repr__ = __str__

    def dual(self) -> "LevyClass":
        if self.kind == "D0":
            return self
        return LevyClass("P" if self.kind == "S" else "S", self.n)

    def le(self, other: "LevyClass") -> bool:
        """Inclusion in the Lévy lattice."""
        if self.kind == "D0":
            return True
        if other.kind == "D0":
            return False
        if self.kind == other.kind:
            return self.n <= other.n
        return self.n < other.n

    def join(self, other: "LevyClass") -> "LevyClass":
        if self.le(other):
            return other
        if other.le(self):
            return self
        # Sigma(n) and Pi(n): both bounds are Delta(n+1); prefer the existential one
        return LevyClass("S", max(self.n, other.n) + 1)


DELTA0 = LevyClass("D0")


def Sigma(n: int) -> LevyClass:
    return LevyClass("S", n)


def Pi(n: int) -> LevyClass:
    return LevyClass("P", n)


# --------------------------------------------------------------------------
# atom registry

@dataclass(frozen=True)
class AtomDef:
    name: str
    params: tuple
    body: Formula
    fast: Optional[Callable] = None


class AtomRegistry:
    """Append-only table of Δ0 predicates of the Lévy signature."""

    def __init__(self):
        self._lock = threading.Lock()
        self._by_name: dict[str, AtomDef] = {}
        self._by_def: dict[tuple, str] = {}

    def register(self, phi: Formula, params: tuple, name: Optional[str] = None,
                 fast: Optional[Callable] = None) -> str:
        with self._lock:
            key = (phi, params)
            if key in self._by_def:
                return self._by_def[key]
            if name is None:
                name = f"R{len(self._by_name)}"
            if name in self._by_name:
                raise FormulaError(f"atom name {name!r} already registered with another definition")
            self._by_name[name] = AtomDef(name, params, phi, fast)
            self._by_def[key] = name
            return name

    def get(self, name: str) -> AtomDef:
        try:
            return self._by_name[name]
        except KeyError:
            raise FormulaError(f"unregistered atom {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def names(self) -> list[str]:
        return list(self._by_name)


REGISTRY = AtomRegistry()


def register_levy_atom(phi: Formula, arity: int, *, params: Optional[Iterable[str]] = None,
                       name: Optional[str] = None, fast: Optional[Callable] = None) -> str:
    """Register a Δ0 formula as a predicate of the Lévy signature.

    ``params`` fixes the argument order; by default the free variables sorted
    by name.  ``fast`` is an optional direct implementation
    ``fast(*values) -> bool`` over structural HF sets, used by evaluators; tests check it
    against the defining formula.
    """
    fv = free_vars(phi)
    params = tuple(sorted(fv)) if params is None else tuple(params)
    if len(params) != arity:
        raise FormulaError(f"arity mismatch: declared {arity}, got {len(params)} parameters")
    if set(params) != fv or len(set(params)) != len(params):
        raise FormulaError(f"parameters {params} do not match free variables {sorted(fv)}")
    if classify(phi) != DELTA0:
        raise FormulaError("only Delta0 formulas can be registered as Lévy atoms")
    return REGISTRY.register(alpha_normalize(phi), params, name, fast)


def lookup_atom(name: str) -> AtomDef:
    return REGISTRY.get(name)


# --------------------------------------------------------------------------
# variables and substitution

def _term_vars(t: Term) -> set:
    return {t.name} if isinstance(t, Var) else set()


def free_vars(phi: Formula) -> frozenset:
    if isinstance(phi, (Member, Equal)):
        return frozenset(_term_vars(phi.lhs) | _term_vars(phi.rhs))
    if isinstance(phi, LevyAtom):
        return frozenset().union(*(_term_vars(a) for a in phi.args)) if phi.args else frozenset()
    if isinstance(phi, Not):
        return free_vars(phi.body)
    if isinstance(phi, (And, Or)):
        return free_vars(phi.left) | free_vars(phi.right)
    if isinstance(phi, _BOUNDED):
        return (free_vars(phi.body) - {phi.var}) | _term_vars(phi.bound)
    if isinstance(phi, _UNBOUNDED):
        return free_vars(phi.body) - {phi.var}
    raise FormulaError(f"not a formula: {phi!r}")


def all_vars(phi: Formula) -> set:
    """Every variable name occurring in phi, free or bound."""
    out = set(free_vars(phi))
    for node in _walk(phi):
        if isinstance(node, _BOUNDED + _UNBOUNDED):
            out.add(node.var)
    return out


def constants(phi: Formula) -> set:
    out = set()
    for node in _walk(phi):
        if isinstance(node, (Member, Equal)):
            terms = (node.lhs, node.rhs)
        elif isinstance(node, LevyAtom):
            terms = node.args
        elif isinstance(node, _BOUNDED):
            terms = (node.bound,)
        else:
            continue
        out.update(t for t in terms if isinstance(t, (Const, SigConst)))
    return out


def _walk(phi: Formula) -> Iterator[Formula]:
    stack = [phi]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Not):
            stack.append(node.body)
        elif isinstance(node, (And, Or)):
            stack.extend((node.right, node.left))
        elif isinstance(node, _BOUNDED + _UNBOUNDED):
            stack.append(node.body)


class _Fresh:
    def __init__(self, avoid: Iterable[str]):
        self.avoid = set(avoid)
        self.counter = itertools.count()

    def __call__(self, base: str) -> str:
        base = base.rstrip("0123456789_") or "v"
        while True:
            cand = f"{base}{next(self.counter)}"
            if cand not in self.avoid:
                self.avoid.add(cand)
                return cand


def _sub_term(t: Term, mapping: dict) -> Term:
    if isinstance(t, Var) and t.name in mapping:
        return mapping[t.name]
    return t


def map_terms(phi: Formula, fn) -> Formula:
    """Apply fn to every term occurrence (bounds included); binders are kept."""
    if isinstance(phi, Member):
        return Member(fn(phi.lhs), fn(phi.rhs))
    if isinstance(phi, Equal):
        return Equal(fn(phi.lhs), fn(phi.rhs))
    if isinstance(phi, LevyAtom):
        return LevyAtom(phi.atom, tuple(fn(a) for a in phi.args))
    if isinstance(phi, Not):
        return Not(map_terms(phi.body, fn))
    if isinstance(phi, (And, Or)):
        return type(phi)(map_terms(phi.left, fn), map_terms(phi.right, fn))
    if isinstance(phi, _BOUNDED):
        return type(phi)(phi.var, fn(phi.bound), map_terms(phi.body, fn))
    if isinstance(phi, _UNBOUNDED):
        return type(phi)(phi.var, map_terms(phi.body, fn))
    raise FormulaError(f"not a formula: {phi!r}")


def substitute_many(phi: Formula, mapping: dict, fresh: Optional[_Fresh] = None) -> Formula:
    """Capture-avoiding simultaneous substitution of terms for free variables."""
    if not mapping:
        return phi
    if fresh is None:
        avoid = all_vars(phi)
        for t in mapping.values():
            avoid |= _term_vars(t)
        fresh = _Fresh(avoid)
    return _subst(phi, dict(mapping), fresh)


def _subst(phi, mapping, fresh):
    if isinstance(phi, Member):
        return Member(_sub_term(phi.lhs, mapping), _sub_term(phi.rhs, mapping))
    if isinstance(phi, Equal):
        return Equal(_sub_term(phi.lhs, mapping), _sub_term(phi.rhs, mapping))
    if isinstance(phi, LevyAtom):
        return LevyAtom(phi.atom, tuple(_sub_term(a, mapping) for a in phi.args))
    if isinstance(phi, Not):
        return Not(_subst(phi.body, mapping, fresh))
    if isinstance(phi, (And, Or)):
        return type(phi)(_subst(phi.left, mapping, fresh), _subst(phi.right, mapping, fresh))
    if isinstance(phi, _BOUNDED + _UNBOUNDED):
        inner = {k: v for k, v in mapping.items() if k != phi.var}
        var = phi.var
        captured = any(var in _term_vars(t) for k, t in inner.items() if k in free_vars(phi.body))
        if captured:
            new = fresh(var)
            inner[var] = Var(new)
            var = new
        body = _subst(phi.body, inner, fresh) if inner else phi.body
        if isinstance(phi, _BOUNDED):
            return type(phi)(var, _sub_term(phi.bound, mapping), body)
        return type(phi)(var, body)
    raise FormulaError(f"not a formula: {phi!r}")


def substitute(phi: Formula, var: str, t: Term) -> Formula:
    return substitute_many(phi, {var: t})


def alpha_normalize(phi: Formula, fresh: Optional[_Fresh] = None) -> Formula:
    """Rename bound variables so that they are pairwise distinct and not free."""
    if fresh is None:
        fresh = _Fresh(all_vars(phi))
    used = set(free_vars(phi))
    return _alpha(phi, {}, used, fresh)


def _alpha(phi, ren, used, fresh):
    if isinstance(phi, _ATOMIC):
        return _subst(phi, ren, fresh) if ren else phi
    if isinstance(phi, Not):
        return Not(_alpha(phi.body, ren, used, fresh))
    if isinstance(phi, (And, Or)):
        return type(phi)(_alpha(phi.left, ren, used, fresh), _alpha(phi.right, ren, used, fresh))
    var = phi.var
    inner = dict(ren)
    if var in used:
        new = fresh(var)
        inner[var] = Var(new)
        var = new
    else:
        inner.pop(var, None)
    used.add(var)
    body = _alpha(phi.body, inner, used, fresh)
    if isinstance(phi, _BOUNDED):
        return type(phi)(var, _sub_term(phi.bound, ren), body)
    return type(phi)(var, body)


# --------------------------------------------------------------------------
# classification

def levy_bounds(phi: Formula) -> tuple:
    """(s, p): least n with phi syntactically Sigma(n), least n with phi Pi(n); 0 means Delta0.

    Bounded quantifiers do not raise complexity (Collection pushes them
    inside unbounded ones, see ``normalize_collection``).
    """
    if isinstance(phi, (Member, Equal)):
        return 0, 0
    if isinstance(phi, LevyAtom):
        REGISTRY.get(phi.atom)
        return 0, 0
    if isinstance(phi, Not):
        s, p = levy_bounds(phi.body)
        return p, s
    if isinstance(phi, (And, Or)):
        s1, p1 = levy_bounds(phi.left)
        s2, p2 = levy_bounds(phi.right)
        return max(s1, s2), max(p1, p2)
    if isinstance(phi, _BOUNDED):
        return levy_bounds(phi.body)
    s, p = levy_bounds(phi.body)
    if isinstance(phi, Exists):
        s2 = min(max(s, 1), p + 1)
        return s2, s2 + 1
    p2 = min(max(p, 1), s + 1)
    return p2 + 1, p2


def classify(phi: Formula) -> LevyClass:
    """Least Lévy class syntactically containing phi (Sigma on ties)."""
    s, p = levy_bounds(phi)
    if s == 0:
        return DELTA0
    if p < s:
        return LevyClass("P", p)
    return LevyClass("S", s)


# --------------------------------------------------------------------------
# Collection-based prenex normalization

def _blocks(prefix: list) -> list:
    blocks = []
    for q, v in prefix:
        if blocks and blocks[-1][0] == q:
            blocks[-1][1].append(v)
        else:
            blocks.append((q, [v]))
    return blocks


def _merge_prefixes(a: list, b: list, prefer: str = "E") -> list:
    """Interleave two quantifier prefixes with as few alternations as possible.

    On a tie the block of kind ``prefer`` goes first, so that it can merge
    with the quantifier the caller is about to put in front.
    """
    ba, bb = _blocks(a), _blocks(b)
    out = []
    while ba or bb:
        if not ba:
            head = bb.pop(0)
        elif not bb:
            head = ba.pop(0)
        elif ba[0][0] == bb[0][0]:
            head = (ba[0][0], ba.pop(0)[1] + bb.pop(0)[1])
        elif len(ba) > len(bb):
            head = ba.pop(0)
        elif len(bb) > len(ba):
            head = bb.pop(0)
        else:
            head = ba.pop(0) if ba[0][0] == prefer else bb.pop(0)
        out.extend((head[0], v) for v in head[1])
    return out


def _close(prefix: list, matrix: Formula) -> Formula:
    out = matrix
    for q, v in reversed(prefix):
        out = Exists(v, out) if q == "E" else Forall(v, out)
    return out


def _push_bounded(kind: str, var: str, bound: Term, prefix: list, matrix: Formula, fresh) -> tuple:
    """Move the bounded quantifier (kind var∈bound) inside an unbounded prefix."""
    stack = [(kind, var, bound)]
    out_prefix = []
    for q, y in prefix:
        cur = y
        i = len(stack) - 1
        while i >= 0:
            if stack[i][0] != q:
                # Qb x∈z  Q' cur  ==>  Q' Y  Qb x∈z  Q' cur∈Y
                big = fresh(cur.upper() if cur.islower() else cur + "_")
                stack.insert(i + 1, (q, cur, Var(big)))
                cur = big
            i -= 1
        out_prefix.append((q, cur))
    body = matrix
    for k, v, b in reversed(stack):
        body = BoundedExists(v, b, body) if k == "E" else BoundedForall(v, b, body)
    return out_prefix, body


def _prenex(phi: Formula, fresh, prefer: str = "E") -> tuple:
    if classify(phi) == DELTA0:
        return [], phi
    if isinstance(phi, Not):
        flip = "A" if prefer == "E" else "E"
        prefix, matrix = _prenex(phi.body, fresh, flip)
        return [("A" if q == "E" else "E", v) for q, v in prefix], Not(matrix)
    if isinstance(phi, (And, Or)):
        pl, ml = _prenex(phi.left, fresh, prefer)
        pr, mr = _prenex(phi.right, fresh, prefer)
        return _merge_prefixes(pl, pr, prefer), type(phi)(ml, mr)
    if isinstance(phi, _UNBOUNDED):
        q = "E" if isinstance(phi, Exists) else "A"
        prefix, matrix = _prenex(phi.body, fresh, q)
        return [(q, phi.var)] + prefix, matrix
    if isinstance(phi, _BOUNDED):
        prefix, matrix = _prenex(phi.body, fresh, prefer)
        kind = "E" if isinstance(phi, BoundedExists) else "A"
        return _push_bounded(kind, phi.var, phi.bound, prefix, matrix, fresh)
    raise FormulaError(f"not a formula: {phi!r}")


def normalize_collection(phi: Formula) -> Formula:
    """Equivalent prenex form: unbounded quantifiers first, then a Δ0 matrix.

    Bounded quantifiers are pushed inward past unbounded ones, using
    ``∀x∈z ∃y ψ  <->  ∃Y ∀x∈z ∃y∈Y ψ`` (valid under Replacement) and its dual;
    rewriting is innermost-first, left to right.
    """
    phi = alpha_normalize(phi)
    if classify(phi) == DELTA0:
        return phi
    fresh = _Fresh(all_vars(phi))
    prefix, matrix = _prenex(phi, fresh, "A" if classify(phi).kind == "P" else "E")
    return _close(prefix, matrix)


def is_prenex(phi: Formula) -> bool:
    while isinstance(phi, _UNBOUNDED):
        phi = phi.body
    return classify(phi) == DELTA0 and not any(isinstance(n, _UNBOUNDED) for n in _walk(phi))


# --------------------------------------------------------------------------
# atom expansion

def expand_levy_atoms(phi: Formula) -> Formula:
    """Replace every Lévy atom by its (recursively expanded) definition."""
    fresh = _Fresh(all_vars(phi))
    return _expand(phi, fresh)


def _rename_binders(phi, ren, fresh):
    """Copy of phi with every bound variable replaced by a fresh name."""
    if isinstance(phi, _ATOMIC):
        return _subst(phi, ren, fresh) if ren else phi
    if isinstance(phi, Not):
        return Not(_rename_binders(phi.body, ren, fresh))
    if isinstance(phi, (And, Or)):
        return type(phi)(_rename_binders(phi.left, ren, fresh), _rename_binders(phi.right, ren, fresh))
    new = fresh(phi.var)
    body = _rename_binders(phi.body, {**ren, phi.var: Var(new)}, fresh)
    if isinstance(phi, _BOUNDED):
        return type(phi)(new, _sub_term(phi.bound, ren), body)
    return type(phi)(new, body)


def _expand(phi, fresh):
    if isinstance(phi, (Member, Equal)):
        return phi
    if isinstance(phi, LevyAtom):
        d = REGISTRY.get(phi.atom)
        if len(phi.args) != len(d.params):
            raise FormulaError(f"atom {phi.atom} expects {len(d.params)} arguments")
        body = _rename_binders(d.body, {}, fresh)
        body = substitute_many(body, dict(zip(d.params, phi.args)), fresh)
        return _expand(body, fresh)
    if isinstance(phi, Not):
        return Not(_expand(phi.body, fresh))
    if isinstance(phi, (And, Or)):
        return type(phi)(_expand(phi.left, fresh), _expand(phi.right, fresh))
    if isinstance(phi, _BOUNDED):
        return type(phi)(phi.var, phi.bound, _expand(phi.body, fresh))
    return type(phi)(phi.var, _expand(phi.body, fresh))


# --------------------------------------------------------------------------
# Gödel coding: Cantor pairing throughout, tags fixed below.

def _pair(a: int, b: int) -> int:
    return (a + b) * (a + b + 1) // 2 + b


def _unpair(z: int) -> tuple:
    from math import isqrt
    w = (isqrt(8 * z + 1) - 1) // 2
    t = w * (w + 1) // 2
    b = z - t
    return w - b, b


def _str_code(s: str) -> int:
    return int.from_bytes(b"\x01" + s.encode("utf-8"), "big")


def _str_decode(n: int) -> str:
    raw = n.to_bytes((n.bit_length() + 7) // 8, "big")
    if not raw or raw[0] != 1:
        raise FormulaError("bad string code")
    return raw[1:].decode("utf-8")


def _list_code(items: list) -> int:
    out = 0
    for x in reversed(items):
        out = 1 + _pair(x, out)
    return out


def _list_decode(n: int) -> list:
    out = []
    while n:
        head, n = _unpair(n - 1)
        out.append(head)
    return out


_SIG = {"p": 0, "c": 1, "d": 2}
_SIG_INV = {v: k for k, v in _SIG.items()}


def _term_code(t: Term) -> int:
    if isinstance(t, Var):
        return _pair(0, _str_code(t.name))
    if isinstance(t, Const):
        if not isinstance(t.value, int):
            raise FormulaError("only integer model constants have Gödel codes")
        return _pair(1, t.value)
    if isinstance(t, SigConst):
        return _pair(2, _pair(_SIG[t.kind], 0 if t.index is None else t.index + 1))
    raise FormulaError(f"not a term: {t!r}")


def _term_decode(n: int) -> Term:
    tag, payload = _unpair(n)
    if tag == 0:
        return Var(_str_decode(payload))
    if tag == 1:
        return Const(payload)
    if tag == 2:
        k, i = _unpair(payload)
        return SigConst(_SIG_INV[k], None if i == 0 else i - 1)
    raise FormulaError("bad term code")


_TAGS = [Member, Equal, LevyAtom, Not, And, Or, BoundedExists, BoundedForall, Exists, Forall]


def godel_code(phi: Formula) -> int:
    tag = _TAGS.index(type(phi))
    if isinstance(phi, (Member, Equal)):
        payload = _pair(_term_code(phi.lhs), _term_code(phi.rhs))
    elif isinstance(phi, LevyAtom):
        payload = _pair(_str_code(phi.atom), _list_code([_term_code(a) for a in phi.args]))
    elif isinstance(phi, Not):
        payload = godel_code(phi.body)
    elif isinstance(phi, (And, Or)):
        payload = _pair(godel_code(phi.left), godel_code(phi.right))
    elif isinstance(phi, _BOUNDED):
        payload = _pair(_str_code(phi.var), _pair(_term_code(phi.bound), godel_code(phi.body)))
    else:
        payload = _pair(_str_code(phi.var), godel_code(phi.body))
    return _pair(tag, payload)


def godel_decode(n: int) -> Formula:
    tag, payload = _unpair(n)
    if tag >= len(_TAGS):
        raise FormulaError("bad formula code")
    cls = _TAGS[tag]
    if cls in (Member, Equal):
        a, b = _unpair(payload)
        return cls(_term_decode(a), _term_decode(b))
    if cls is LevyAtom:
        a, b = _unpair(payload)
        return LevyAtom(_str_decode(a), tuple(_term_decode(x) for x in _list_decode(b)))
    if cls is Not:
        return Not(godel_decode(payload))
    if cls in (And, Or):
        a, b = _unpair(payload)
        return cls(godel_decode(a), godel_decode(b))
    if cls in _BOUNDED:
        v, rest = _unpair(payload)
        t, body = _unpair(rest)
        return cls(_str_decode(v), _term_decode(t), godel_decode(body))
    v, body = _unpair(payload)
    return cls(_str_decode(v), godel_decode(body))
