"""Reference implementations used as test oracles.

Everything here is written from the definitions with plain Python
frozensets and no code shared with the package, so agreement with the
package is evidence rather than tautology.
"""

from __future__ import annotations

from functools import lru_cache


@lru_cache(maxsize=None)
def decode(n: int) -> frozenset:
    """Ackermann: n codes the set of decode(i) for the set bits i of n."""
    out, i = [], 0
    while n:
        if n % 2:
            out.append(decode(i))
        n //= 2
        i += 1
    return frozenset(out)


def encode(x: frozenset) -> int:
    return sum(2 ** encode(e) for e in x)


def kpair(a: frozenset, b: frozenset) -> frozenset:
    return frozenset({frozenset({a}), frozenset({a, b})})


def universe(bound: int) -> list:
    return [decode(i) for i in range(bound)]


# ---- a direct evaluator over frozensets -----------------------------------
# Formulas are nested tuples:
#   ("in", a, b) ("eq", a, b) ("not", f) ("and", f, g) ("or", f, g)
#   ("bex", v, t, f) ("ball", v, t, f)
# where terms are variable names or ("c", code).

def _term(t, env):
    if isinstance(t, tuple):
        return decode(t[1])
    return env[t]


def holds(f, env=None) -> bool:
    env = env or {}
    op = f[0]
    if op == "in":
        return _term(f[1], env) in _term(f[2], env)
    if op == "eq":
        return _term(f[1], env) == _term(f[2], env)
    if op == "not":
        return not holds(f[1], env)
    if op == "and":
        return holds(f[1], env) and holds(f[2], env)
    if op == "or":
        return holds(f[1], env) or holds(f[2], env)
    if op in ("bex", "ball"):
        _, v, t, body = f
        vals = (holds(body, {**env, v: e}) for e in _term(t, env))
        return any(vals) if op == "bex" else all(vals)
    raise ValueError(op)


def to_package(f):
    """Translate the tuple syntax into package formula objects."""
    from forcingcomp.formula import (
        And, BoundedExists, BoundedForall, Const, Equal, Member, Not, Or, Var,
    )

    def term(t):
        return Const(t[1]) if isinstance(t, tuple) else Var(t)

    op = f[0]
    if op == "in":
        return Member(term(f[1]), term(f[2]))
    if op == "eq":
        return Equal(term(f[1]), term(f[2]))
    if op == "not":
        return Not(to_package(f[1]))
    if op == "and":
        return And(to_package(f[1]), to_package(f[2]))
    if op == "or":
        return Or(to_package(f[1]), to_package(f[2]))
    cls = BoundedExists if op == "bex" else BoundedForall
    return cls(f[1], term(f[2]), to_package(f[3]))


# ---- posets, names and generic filters ------------------------------------

def leq_closure(conds, pairs) -> set:
    rel = {(p, p) for p in conds} | set(pairs)
    changed = True
    while changed:
        changed = False
        for (a, b) in list(rel):
            for (c, d) in list(rel):
                if b == c and (a, d) not in rel:
                    rel.add((a, d))
                    changed = True
    return rel


def generic_filters(conds, leq) -> list:
    """Filters meeting every dense set; on a finite poset, up-sets of minimal elements."""
    minimal = [m for m in conds if not any((q, m) in leq and q != m for q in conds)]
    return [frozenset(q for q in conds if (m, q) in leq) for m in minimal]


def value(name: frozenset, G, cond_code) -> frozenset:
    """name_G by the defining recursion; entries are Kuratowski pairs (tau, p)."""
    out = set()
    for e in name:
        tau, p = unpair(e)
        if cond_code(p) in G:
            out.add(value(tau, G, cond_code))
    return frozenset(out)


def unpair(e: frozenset):
    parts = sorted(e, key=len)
    a = next(iter(parts[0]))
    rest = parts[-1] - {a}
    b = next(iter(rest)) if rest else a
    return a, b
