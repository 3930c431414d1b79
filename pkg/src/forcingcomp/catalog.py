"""Basic Delta0 predicates of set theory, registered as Lévy atoms.

Each atom carries its defining formula and a direct implementation on
structural sets; the test suite checks the two against each other and
against independent integer-code algorithms.
"""

from __future__ import annotations

from .formula import (
    BoundedExists as BEx, BoundedForall as BAll, Equal, LevyAtom, Member, Not, Var,
    conj, disj, implies, register_levy_atom,
)
from .hfmodel import HSet, hs_pair, hs_unpair

__all__ = ["CATALOG", "LEMMA_PREDICATES", "atom", "separation"]

x, y, z, w, u, v, a, b, s = (Var(n) for n in "xyzwuvabs")


def atom(name: str, *args) -> LevyAtom:
    return LevyAtom(name, tuple(Var(t) if isinstance(t, str) else t for t in args))


def _top(e) -> bool:
    return True


# ---- direct implementations on HSets -------------------------------------

def _transitive(X) -> bool:
    return all(e <= X for e in X)


def _ordinal(X) -> bool:
    return _transitive(X) and all(_transitive(e) for e in X)


def _succ(S, Y) -> bool:
    return S == Y | {Y}


def _is_nat(Y) -> bool:
    if not _ordinal(Y):
        return False
    return all(not e or any(_succ(e, f) for f in e) for e in Y | {Y})


def _is_pair(X) -> bool:
    return hs_unpair(X) is not None


def _is_function(X) -> bool:
    if not all(_is_pair(e) for e in X):
        return False
    dom = {}
    for e in X:
        k, val = hs_unpair(e)
        if dom.setdefault(k, val) != val:
            return False
    return True


def _inductive(X) -> bool:
    return HSet() in X and all(HSet(e | {e}) in X for e in X)


# ---- registrations --------------------------------------------------------

def _reg(name, phi, params, fast):
    return register_levy_atom(phi, len(params), params=params, name=name, fast=fast)


_reg("empty", BAll("y", x, Not(Equal(y, y))), ("x",), lambda X: not X)
_reg("subset", BAll("z", x, Member(z, y)), ("x", "y"), lambda X, Y: X <= Y)
_reg("upair", conj(Member(y, x), Member(z, x), BAll("w", x, disj(Equal(w, y), Equal(w, z)))),
     ("x", "y", "z"), lambda X, Y, Z: X == {Y, Z})
_reg("bigunion", conj(BAll("w", x, BEx("u", y, Member(w, u))),
                      BAll("u", y, BAll("w", u, Member(w, x)))),
     ("x", "y"), lambda X, Y: X == frozenset().union(*Y))
_reg("sep_nonempty",
     conj(BAll("z", x, conj(Member(z, y), BEx("w", z, Equal(w, w)))),
          BAll("z", y, implies(BEx("w", z, Equal(w, w)), Member(z, x)))),
     ("x", "y"), lambda X, Y: X == {e for e in Y if e})
_reg("pairof",
     conj(BEx("u", z, atom("upair", "u", "a", "a")),
          BEx("v", z, atom("upair", "v", "a", "b")),
          BAll("w", z, disj(atom("upair", "w", "a", "a"), atom("upair", "w", "a", "b")))),
     ("z", "a", "b"), lambda Z, A, B: Z == hs_pair(A, B))
_reg("is_pair", BEx("u", x, BEx("a", u, BEx("v", x, BEx("b", v, atom("pairof", "x", "a", "b"))))),
     ("x",), _is_pair)
_reg("is_relation", BAll("z", x, atom("is_pair", "z")), ("x",), lambda X: all(_is_pair(e) for e in X))
_reg("is_function",
     conj(atom("is_relation", "x"),
          BAll("z", x, BAll("w", x, BAll("u", z, BAll("a", u, BAll("v", z, BAll("b", v,
               BAll("s", w, BAll("y", s, implies(
                   conj(atom("pairof", "z", "a", "b"), atom("pairof", "w", "a", "y")),
                   Equal(b, y))))))))))),
     ("x",), _is_function)
_reg("transitive", BAll("y", x, BAll("z", y, Member(z, x))), ("x",), _transitive)
_reg("ordinal",
     conj(atom("transitive", "x"),
          BAll("y", x, BAll("z", x, disj(Member(y, z), Equal(y, z), Member(z, y))))),
     ("x",), _ordinal)
_reg("succ", conj(Member(y, s), BAll("w", y, Member(w, s)), BAll("w", s, disj(Member(w, y), Equal(w, y)))),
     ("s", "y"), _succ)
_reg("inductive",
     conj(BEx("z", x, atom("empty", "z")), BAll("y", x, BEx("s", x, atom("succ", "s", "y")))),
     ("x",), _inductive)
_reg("nonlimit", disj(atom("empty", "z"), BEx("w", z, atom("succ", "z", "w"))),
     ("z",), lambda Z: not Z or any(_succ(Z, f) for f in Z))
_reg("is_omega",
     conj(atom("inductive", "x"),
          BAll("y", x, conj(atom("ordinal", "y"), atom("nonlimit", "y"),
                            BAll("z", y, atom("nonlimit", "z"))))),
     ("x",), lambda X: _inductive(X) and all(_is_nat(e) for e in X))
_reg("inrel", BEx("z", x, atom("pairof", "z", "a", "b")), ("x", "a", "b"),
     lambda X, A, B: hs_pair(A, B) in X)


def separation(phi, var: str = "z", name=None) -> str:
    """Register x = {var in y : phi(var)} for a Delta0 phi with one free variable."""
    body = conj(BAll(var, x, conj(Member(Var(var), y), phi)),
                BAll(var, y, implies(phi, Member(Var(var), x))))
    return register_levy_atom(body, 2, params=("x", "y"), name=name)


# The twelve predicates listed as Delta0 in the standard catalog, in order.
LEMMA_PREDICATES = (
    "empty", "subset", "upair", "bigunion", "sep_nonempty", "is_pair",
    "is_relation", "is_function", "transitive", "ordinal", "inductive", "is_omega",
)
CATALOG = LEMMA_PREDICATES + ("pairof", "succ", "nonlimit", "inrel")
