"""The forcing relation: atomic recursion, the formula compiler, two decision routes.

Atomic recursion (finite names, conditions as bitmasks):

    p ⊩ σ ∈ τ  iff  {q ≤ p : some (ρ, r) ∈ τ has q ≤ r and q ⊩ ρ = σ} is dense below p
    p ⊩ σ ⊆ τ  iff  for all (ρ, r) ∈ σ and q ≤ p with q ≤ r, q ⊩ ρ ∈ τ
    p ⊩ σ = τ  iff  p ⊩ σ ⊆ τ and p ⊩ τ ⊆ σ

Inside the model the same recursion is expressed by a certificate: a pair
W = (C, F) where C is a set of names closed under first coordinates and F
is a complete table of the three relations on P x C x C satisfying the
recursion clauses.  Checking a candidate W is Delta0; the relation is then
Sigma1 (some W says yes) and Pi1 (every W says yes), hence Delta1.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass
from functools import lru_cache
from itertools import count
from typing import Optional

from .catalog import atom
from .formula import (
    And, BoundedExists, BoundedForall, Const, DELTA0, Equal, Exists, Forall,
    FormulaError, LevyAtom, Member, Not, Or, SigConst, Var, classify, conj, expand_levy_atoms,
    free_vars, iff, implies, register_levy_atom, substitute_many, LevyClass,
)
from .hfmodel import CodeOverflow, HFOracle, HSet, InstalledPoset, evaluate, hs, hs_pair, hs_unpair, register_witness_hint, to_code
from .names import interpret_name, is_name_direct, name_entries
from .oracle import Answer, DiagramOracle, FULL
from .posets import FinitePoset

BEx, BAll = BoundedExists, BoundedForall

__all__ = [
    "ForcingKind", "ForcingTables", "tables_for", "forces_atomic", "forcing_masks",
    "CompiledForcing", "compile_forcing", "forces", "forces_semantic", "decide_delta1",
    "certificate_for", "generic_filters_below",
]


class ForcingKind(enum.Enum):
    MEMBER = "in"
    SUBSET = "sub"
    EQUAL = "eq"


# --------------------------------------------------------------------------
# direct recursion

class ForcingTables:
    """Memoized atomic forcing on one finite poset; names are interned to ids."""

    def __init__(self, poset: FinitePoset, label=None):
        self.poset = poset
        self.label = label or (lambda c: c)
        self.ids: dict = {}
        self.names: list = []
        self.entries: list = []
        self._in: dict = {}
        self._sub: dict = {}
        self._lock = threading.RLock()
        n = len(poset.conditions)
        if n <= 12:
            self._dense = [poset.dense_below_mask(S) for S in range(1 << n)]
            self._all = [poset.all_below_mask(S) for S in range(1 << n)]
        else:
            self._dense = self._all = None

    def dense_below(self, S: int) -> int:
        return self._dense[S] if self._dense is not None else self.poset.dense_below_mask(S)

    def all_below(self, S: int) -> int:
        full = self.poset.full_mask
        return self._all[S & full] if self._all is not None else self.poset.all_below_mask(S & full)

    def intern(self, sigma) -> int:
        sigma = hs(sigma)
        i = self.ids.get(sigma)
        if i is not None:
            return i
        with self._lock:
            if sigma in self.ids:
                return self.ids[sigma]
            ents = []
            for t, p in name_entries(sigma):
                lab = self.label(p)
                if lab not in self.poset.index:
                    raise ValueError(f"not a name over this poset: condition {p!r}")
                ents.append((self.intern(t), self.poset.below_mask[lab]))
            i = len(self.names)
            self.names.append(sigma)
            self.entries.append(tuple(ents))
            self.ids[sigma] = i
            return i

    def in_mask(self, i: int, j: int) -> int:
        """Conditions forcing name i ∈ name j."""
        key = (i, j)
        m = self._in.get(key)
        if m is None:
            S = 0
            for mu, down in self.entries[j]:
                S |= down & self.eq_mask(mu, i)
            m = self.dense_below(S)
            self._in[key] = m
        return m

    def sub_mask(self, i: int, j: int) -> int:
        key = (i, j)
        m = self._sub.get(key)
        if m is None:
            m = self.poset.full_mask
            for rho, down in self.entries[i]:
                # p works iff every q <= p that lies below r forces rho ∈ j
                m &= self.all_below(self.in_mask(rho, j) | ~down)
                if not m:
                    break
            self._sub[key] = m
        return m

    def eq_mask(self, i: int, j: int) -> int:
        if i == j:
            return self.poset.full_mask
        return self.sub_mask(i, j) & self.sub_mask(j, i)

    def mask(self, kind: ForcingKind, sigma, tau) -> int:
        i, j = self.intern(sigma), self.intern(tau)
        if kind is ForcingKind.MEMBER:
            return self.in_mask(i, j)
        if kind is ForcingKind.SUBSET:
            return self.sub_mask(i, j)
        return self.eq_mask(i, j)


_TABLES: dict = {}
_TABLES_LOCK = threading.Lock()


def tables_for(h) -> ForcingTables:
    poset = h.poset if isinstance(h, InstalledPoset) else h
    with _TABLES_LOCK:
        t = _TABLES.get(poset)
        if t is None:
            t = _TABLES[poset] = ForcingTables(poset)
        return t


def forcing_masks(h, sigma, tau, kind: ForcingKind) -> int:
    return tables_for(h).mask(kind, sigma, tau)


def forces_atomic(h: InstalledPoset, p, sigma, tau, kind: ForcingKind) -> bool:
    T = tables_for(h)
    if p not in T.poset.index:
        raise ValueError(f"{p!r} is not a condition")
    return bool(T.mask(kind, sigma, tau) >> T.poset.index[p] & 1)


# --------------------------------------------------------------------------
# certificates inside the model

K_IN, K_SUB, K_EQ = hs(0), hs(1), hs(3)
KINDS = hs(11)          # {0, 1, 2} as von Neumann numerals
BIT0, BIT1 = hs(0), hs(1)
_KIND_OF = {ForcingKind.MEMBER: K_IN, ForcingKind.SUBSET: K_SUB, ForcingKind.EQUAL: K_EQ}


def _quint(k, q, r, s, bit) -> HSet:
    return hs_pair(k, hs_pair(q, hs_pair(r, hs_pair(s, bit))))


def _unquint(t) -> Optional[tuple]:
    out = []
    cur = t
    for _ in range(4):
        pq = hs_unpair(cur)
        if pq is None:
            return None
        out.append(pq[0])
        cur = pq[1]
    out.append(cur)
    return tuple(out)


def _closure(xs) -> HSet:
    seen = set()
    todo = [hs(x) for x in xs]
    while todo:
        x = todo.pop()
        if x in seen:
            continue
        seen.add(x)
        for e in x:
            pq = hs_unpair(e)
            if pq is not None:
                todo.append(pq[0])
    return HSet(seen)


@lru_cache(maxsize=256)
def _poset_of(pp: HSet):
    pq = hs_unpair(pp)
    if pq is None:
        return None
    P, L = pq
    pairs = []
    for e in L:
        ab = hs_unpair(e)
        if ab is None:
            return None
        pairs.append((to_code(ab[0]), to_code(ab[1])))
    try:
        return FinitePoset(tuple(sorted(to_code(c) for c in P)), frozenset(pairs))
    except (ValueError, CodeOverflow):
        return None


@lru_cache(maxsize=256)
def _cert_for(pp: HSet, C: HSet) -> Optional[HSet]:
    poset = _poset_of(pp)
    if poset is None:
        return None
    T = ForcingTables(poset)
    conds = poset.conditions
    rows = []
    names = list(C)
    for rho in names:
        if not is_name_direct(rho, conds):
            return None
    for rho in names:
        for pi in names:
            masks = {K_IN: T.mask(ForcingKind.MEMBER, rho, pi),
                     K_SUB: T.mask(ForcingKind.SUBSET, rho, pi),
                     K_EQ: T.mask(ForcingKind.EQUAL, rho, pi)}
            for k, m in masks.items():
                for q in conds:
                    bit = BIT1 if m >> poset.index[q] & 1 else BIT0
                    rows.append(_quint(k, q, rho, pi, bit))
    return hs_pair(C, HSet(rows))


def certificate_for(h: InstalledPoset, names) -> HSet:
    """The canonical forcing certificate covering the given names."""
    W = _cert_for(h.notion, _closure(names))
    if W is None:
        raise ValueError("names are not names over this poset")
    return W


@lru_cache(maxsize=1024)
def _cert_ok(W: HSet, pp: HSet) -> bool:
    cf = hs_unpair(W)
    pl = hs_unpair(pp)
    if cf is None or pl is None:
        return False
    C, F = cf
    P, L = pl
    for rho in C:
        for e in rho:
            pq = hs_unpair(e)
            if pq is not None and pq[0] not in C:
                return False
    bits: dict = {}
    for t in F:
        d = _unquint(t)
        if d is not None:
            bits.setdefault(d[:4], set()).add(d[4])
    val = {}
    for k in KINDS:
        for q in P:
            for rho in C:
                for pi in C:
                    bs = bits.get((k, q, rho, pi), set()) & {BIT0, BIT1}
                    if len(bs) != 1:
                        return False
                    val[(k, q, rho, pi)] = BIT1 in bs

    def le(a, b):
        return hs_pair(a, b) in L

    def v(k, q, r, s):
        return val.get((k, q, r, s), False)

    ents = {x: [pq for pq in map(hs_unpair, x) if pq is not None] for x in C}
    for q in P:
        for rho in C:
            for pi in C:
                f_in = all(
                    any(le(r, q2) and any(le(r, s) and v(K_EQ, r, mu, rho) for mu, s in ents[pi])
                        for r in P)
                    for q2 in P if le(q2, q))
                f_sub = all(v(K_IN, r, mu, pi)
                            for mu, s in ents[rho] for r in P if le(r, q) and le(r, s))
                if v(K_IN, q, rho, pi) != f_in or v(K_SUB, q, rho, pi) != f_sub:
                    return False
                if v(K_EQ, q, rho, pi) != (v(K_SUB, q, rho, pi) and v(K_SUB, q, pi, rho)):
                    return False
    return True


def _nametree_ok(T: HSet, x: HSet, pp: HSet) -> bool:
    pl = hs_unpair(pp)
    if pl is None or x not in T:
        return False
    P = pl[0]
    for n in T:
        for e in n:
            pq = hs_unpair(e)
            if pq is None or pq[1] not in P or pq[0] not in T:
                return False
    return True


def _register_cert_atoms():
    V = Var
    ent = atom("ent", "F", "k", "q", "r", "s", "b")
    unpack_pp = lambda body: BEx("u2", V("pp"), BEx("P", V("u2"), BEx("L", V("u2"),
                                 conj(atom("pairof", "pp", "P", "L"), body))))
    unpack_w = lambda body: BEx("u", V("W"), BEx("C", V("u"), BEx("F", V("u"),
                                conj(atom("pairof", "W", "C", "F"), body))))
    quint = BEx("u1", V("t"), BEx("x1", V("u1"), conj(
        atom("pairof", "t", "k", "x1"),
        BEx("u2", V("x1"), BEx("x2", V("u2"), conj(
            atom("pairof", "x1", "q", "x2"),
            BEx("u3", V("x2"), BEx("x3", V("u3"), conj(
                atom("pairof", "x2", "r", "x3"), atom("pairof", "x3", "s", "b"))))))))))
    register_levy_atom(quint, 6, params=("t", "k", "q", "r", "s", "b"), name="quint",
                       fast=lambda t, k, q, r, s, b: t == _quint(k, q, r, s, b))
    register_levy_atom(BEx("t", V("F"), atom("quint", "t", "k", "q", "r", "s", "b")), 6,
                       params=("F", "k", "q", "r", "s", "b"), name="ent",
                       fast=lambda F, k, q, r, s, b: _quint(k, q, r, s, b) in F)

    def _w_fast(W, k, q, r, s, b):
        cf = hs_unpair(W)
        return cf is not None and _quint(k, q, r, s, b) in cf[1]

    register_levy_atom(unpack_w(ent), 6, params=("W", "k", "q", "r", "s", "b"), name="wentry",
                       fast=_w_fast)

    def _inc_fast(W, x):
        cf = hs_unpair(W)
        return cf is not None and x in cf[0]

    register_levy_atom(unpack_w(Member(V("x"), V("C"))), 2, params=("W", "x"), name="inc", fast=_inc_fast)

    isfirst = BEx("v", V("z"), BEx("s", V("v"), atom("pairof", "z", "mu", "s")))
    closed = BAll("rho", V("C"), BAll("z", V("rho"), BAll("u", V("z"), BAll("mu", V("u"),
                  implies(isfirst, Member(V("mu"), V("C")))))))
    e = lambda k, q, r, s, b: LevyAtom("ent", (V("F"), k, V(q), V(r), V(s), b))
    one, zero = Const(BIT1), Const(BIT0)
    total = BAll("k", Const(KINDS), BAll("q", V("P"), BAll("rho", V("C"), BAll("pi", V("C"), conj(
        Or(LevyAtom("ent", (V("F"), V("k"), V("q"), V("rho"), V("pi"), zero)),
           LevyAtom("ent", (V("F"), V("k"), V("q"), V("rho"), V("pi"), one))),
        Not(And(LevyAtom("ent", (V("F"), V("k"), V("q"), V("rho"), V("pi"), zero)),
                LevyAtom("ent", (V("F"), V("k"), V("q"), V("rho"), V("pi"), one)))))))))
    le = lambda a, b: atom("inrel", "L", a, b)
    entry_of = lambda zv, mu, s: BEx("u", V(zv), BEx(mu, V("u"), BEx("v", V(zv), BEx(s, V("v"),
                                     atom("pairof", zv, mu, s)))))
    f_in = BAll("q2", V("P"), implies(le("q2", "q"), BEx("r", V("P"), conj(
        le("r", "q2"),
        BEx("z", V("pi"), BEx("u", V("z"), BEx("mu", V("u"), BEx("v", V("z"), BEx("s", V("v"), conj(
            atom("pairof", "z", "mu", "s"), le("r", "s"), e(Const(K_EQ), "r", "mu", "rho", one)))))))))))
    f_sub = BAll("z", V("rho"), BAll("u", V("z"), BAll("mu", V("u"), BAll("v", V("z"), BAll("s", V("v"),
        implies(atom("pairof", "z", "mu", "s"),
                BAll("r", V("P"), implies(conj(le("r", "q"), le("r", "s")),
                                          e(Const(K_IN), "r", "mu", "pi", one)))))))))
    rec = BAll("q", V("P"), BAll("rho", V("C"), BAll("pi", V("C"), conj(
        iff(e(Const(K_IN), "q", "rho", "pi", one), f_in),
        iff(e(Const(K_SUB), "q", "rho", "pi", one), f_sub),
        iff(e(Const(K_EQ), "q", "rho", "pi", one),
            And(e(Const(K_SUB), "q", "rho", "pi", one), e(Const(K_SUB), "q", "pi", "rho", one)))))))
    del entry_of
    body = unpack_w(unpack_pp(conj(closed, total, rec)))
    register_levy_atom(body, 2, params=("W", "pp"), name="forcecert", fast=_cert_ok)

    tree = conj(Member(V("x"), V("T")), unpack_pp(BAll("n", V("T"), BAll("z", V("n"),
        BEx("u", V("z"), BEx("a", V("u"), BEx("v", V("z"), BEx("b", V("v"), conj(
            atom("pairof", "z", "a", "b"), Member(V("b"), V("P")), Member(V("a"), V("T")))))))))))
    register_levy_atom(tree, 3, params=("T", "x", "pp"), name="nametree", fast=_nametree_ok)


_register_cert_atoms()


def _cert_hint(args, siblings):
    (pp,) = args
    xs = [vals[1] for name, vals in siblings if name == "inc" and vals[1] is not None]
    return _cert_for(pp, _closure(xs))


def _nametree_hint(args, siblings):
    x, _pp = args
    return _closure([x])


register_witness_hint("forcecert", _cert_hint, unique=True)
register_witness_hint("nametree", _nametree_hint)


# --------------------------------------------------------------------------
# the compiler

PP = SigConst("p")


@dataclass(frozen=True)
class CompiledForcing:
    source: object
    sigma_form: object       # the Sigma-side definition
    pi_form: object          # the Pi-side definition (same as sigma_form above Delta0)
    cond_var: str
    name_vars: tuple

    @property
    def delta1(self) -> bool:
        return classify(self.source) == DELTA0

    @property
    def result(self):
        return self.pi_form if classify(self.source).kind == "P" else self.sigma_form

    @property
    def complexity(self) -> LevyClass:
        return classify(self.result)

    @property
    def pi_complexity(self) -> LevyClass:
        return classify(self.pi_form)

    def instantiate(self, p, names: dict, which: str = "result"):
        form = {"result": self.result, "sigma": self.sigma_form, "pi": self.pi_form}[which]
        mapping = {self.cond_var: Const(p)}
        mapping.update({v: Const(hs(names[v])) for v in self.name_vars})
        return substitute_many(form, mapping)


class _Compiler:
    def __init__(self, avoid):
        self.avoid = set(avoid)
        self.counter = count()

    def fresh(self, base: str) -> str:
        while True:
            name = f"_{base}{next(self.counter)}"
            if name not in self.avoid:
                self.avoid.add(name)
                return name

    def le(self, a, b):
        return LevyAtom("inrel", (Var("_L"), a, b))

    # Delta0 matrix over a certificate variable W
    def body(self, phi, c, W):
        if isinstance(phi, (Member, Equal)):
            k = K_IN if isinstance(phi, Member) else K_EQ
            return LevyAtom("wentry", (W, Const(k), c, phi.lhs, phi.rhs, Const(BIT1)))
        if isinstance(phi, Not):
            q = Var(self.fresh("q"))
            return BAll(q.name, Var("_P"), implies(self.le(q, c), Not(self.body(phi.body, q, W))))
        if isinstance(phi, And):
            return And(self.body(phi.left, c, W), self.body(phi.right, c, W))
        if isinstance(phi, Or):
            q, r = Var(self.fresh("q")), Var(self.fresh("r"))
            return BAll(q.name, Var("_P"), implies(self.le(q, c), BEx(r.name, Var("_P"), conj(
                self.le(r, q), Or(self.body(phi.left, r, W), self.body(phi.right, r, W))))))
        if isinstance(phi, BoundedExists):
            q, r = Var(self.fresh("q")), Var(self.fresh("r"))
            inner = self.body(phi.body, r, W)
            return BAll(q.name, Var("_P"), implies(self.le(q, c), BEx(r.name, Var("_P"), conj(
                self.le(r, q), self._entry(phi.var, phi.bound, lambda s: conj(self.le(r, s), inner), "E")))))
        if isinstance(phi, BoundedForall):
            q = Var(self.fresh("q"))
            inner = self.body(phi.body, q, W)
            return self._entry(phi.var, phi.bound, lambda s: BAll(q.name, Var("_P"), implies(
                conj(self.le(q, c), self.le(q, s)), inner)), "A")
        raise FormulaError(f"unexpected formula in Delta0 part: {phi!r}")

    def _entry(self, var, bound, k, kind):
        """Quantify over entries (var, s) of the name ``bound``."""
        zv, uv, vv, sv = (self.fresh(t) for t in ("z", "u", "v", "s"))
        body = k(Var(sv))
        if kind == "E":
            return BEx(zv, bound, BEx(uv, Var(zv), BEx(var, Var(uv), BEx(vv, Var(zv), BEx(sv, Var(vv), conj(
                LevyAtom("pairof", (Var(zv), Var(var), Var(sv))), body))))))
        return BAll(zv, bound, BAll(uv, Var(zv), BAll(var, Var(uv), BAll(vv, Var(zv), BAll(sv, Var(vv), implies(
            LevyAtom("pairof", (Var(zv), Var(var), Var(sv))), body))))))

    def delta1(self, phi, c, want):
        W = self.fresh("W")
        guard = conj(LevyAtom("forcecert", (Var(W), PP)),
                     *[LevyAtom("inc", (Var(W), Var(x))) for x in sorted(free_vars(phi))])
        B = self.body(phi, c, Var(W))
        if want == "S":
            return Exists(W, And(guard, B))
        return Forall(W, Or(Not(guard), B))

    def name_pred(self, x):
        T = self.fresh("T")
        return Exists(T, LevyAtom("nametree", (Var(T), Var(x), PP)))

    def force(self, phi, c, want):
        if classify(phi) == DELTA0:
            return self.delta1(phi, c, want)
        flip = "P" if want == "S" else "S"
        if isinstance(phi, Not):
            q = Var(self.fresh("q"))
            return BAll(q.name, Var("_P"), implies(self.le(q, c), Not(self.force(phi.body, q, flip))))
        if isinstance(phi, And):
            return And(self.force(phi.left, c, want), self.force(phi.right, c, want))
        if isinstance(phi, Or):
            q, r = Var(self.fresh("q")), Var(self.fresh("r"))
            return BAll(q.name, Var("_P"), implies(self.le(q, c), BEx(r.name, Var("_P"), conj(
                self.le(r, q), Or(self.force(phi.left, r, want), self.force(phi.right, r, want))))))
        if isinstance(phi, BoundedExists):
            q, r = Var(self.fresh("q")), Var(self.fresh("r"))
            inner = self.force(phi.body, r, want)
            return BAll(q.name, Var("_P"), implies(self.le(q, c), BEx(r.name, Var("_P"), conj(
                self.le(r, q), self._entry(phi.var, phi.bound, lambda s: conj(self.le(r, s), inner), "E")))))
        if isinstance(phi, BoundedForall):
            q = Var(self.fresh("q"))
            inner = self.force(phi.body, q, want)
            return self._entry(phi.var, phi.bound, lambda s: BAll(q.name, Var("_P"), implies(
                conj(self.le(q, c), self.le(q, s)), inner)), "A")
        if isinstance(phi, Exists):
            q, r = Var(self.fresh("q")), Var(self.fresh("r"))
            inner = self.force(phi.body, r, "S")
            return BAll(q.name, Var("_P"), implies(self.le(q, c), BEx(r.name, Var("_P"), conj(
                self.le(r, q), Exists(phi.var, And(self.name_pred(phi.var), inner))))))
        if isinstance(phi, Forall):
            return Forall(phi.var, Or(Not(self.name_pred(phi.var)), self.force(phi.body, c, "P")))
        raise FormulaError(f"not a formula: {phi!r}")


def _wrap(body):
    return BEx("_u", PP, BEx("_P", Var("_u"), BEx("_L", Var("_u"), And(
        LevyAtom("pairof", (PP, Var("_P"), Var("_L"))), body))))


def compile_forcing(phi) -> CompiledForcing:
    """force_phi(p, names): a formula over the model defining p ⊩ phi.

    Terms of phi must be variables (standing for names).  Lévy atoms are
    expanded first.  Delta0 sources get both a Sigma1 and a Pi1 definition.
    """
    from .formula import alpha_normalize, constants
    phi = alpha_normalize(expand_levy_atoms(phi))
    if constants(phi):
        raise FormulaError("replace constants by name variables before compiling")
    fv = sorted(free_vars(phi))
    cond = "p" if "p" not in fv else "p_"
    comp = _Compiler(set(fv) | {cond})
    c = Var(cond)
    S = _wrap(comp.force(phi, c, "S"))
    if classify(phi) == DELTA0:
        P = _wrap(comp.force(phi, c, "P"))
    else:
        P = S
    return CompiledForcing(phi, S, P, cond, tuple(fv))


# --------------------------------------------------------------------------
# deciding forcing

def decide_delta1(oracle: DiagramOracle, h: InstalledPoset, compiled: CompiledForcing, p, names: dict) -> Answer:
    """Decide p ⊩ phi for Delta0 phi using only Delta0 questions.

    The witness search for the Sigma1 side (and the refutation of the Pi1
    side) starts with the canonical certificate built from the names; its
    validity is what the oracle is asked about.
    """
    W = certificate_for(h, [names[v] for v in compiled.name_vars])
    sigma_inst = compiled.instantiate(p, names, "sigma")
    m = _matrix_at(sigma_inst, W)
    ans = oracle.query(m)
    if ans is Answer.TRUE:
        return Answer.TRUE
    pi_inst = compiled.instantiate(p, names, "pi")
    m2 = _matrix_at(pi_inst, W, negate=True)
    ans2 = oracle.query(m2)
    if ans2 is Answer.TRUE:
        return Answer.FALSE
    return Answer.OUT_OF_BUDGET


def _matrix_at(form, W, negate=False):
    """Replace the certificate quantifier under the bounded wrapper by the witness W."""
    if isinstance(form, (BEx, BAll)):
        return type(form)(form.var, form.bound, _matrix_at(form.body, W, negate))
    if isinstance(form, And):
        return And(form.left, _matrix_at(form.right, W, negate))
    if isinstance(form, Exists):
        return substitute_many(form.body, {form.var: Const(W)})
    if isinstance(form, Forall):
        body = substitute_many(form.body, {form.var: Const(W)})
        # ∀W (¬guard ∨ B): refuted at W by guard ∧ ¬B
        return And(body.left.body, Not(body.right)) if negate else body
    raise FormulaError("unexpected shape for a Delta1 forcing formula")


def forces(h: InstalledPoset, p, phi, names: dict, budget: int = 0,
           oracle: Optional[DiagramOracle] = None) -> Answer:
    """p ⊩ phi(names), asked of the model through the compiled formula."""
    if oracle is None:
        oracle = HFOracle(FULL, sig=h.sig())
    compiled = phi if isinstance(phi, CompiledForcing) else compile_forcing(phi)
    names = {k: hs(v) for k, v in names.items()}
    missing = set(compiled.name_vars) - set(names)
    if missing:
        raise FormulaError(f"no names given for {sorted(missing)}")
    if compiled.delta1:
        return decide_delta1(oracle, h, compiled, p, names)
    return oracle.query(compiled.instantiate(p, names), budget)


def generic_filters_below(h: InstalledPoset, p) -> list:
    """Generic filters through p: for a finite poset, up-closures of minimal conditions below p."""
    P = h.poset
    return [P.up(m) for m in P.minimal() if P.le(m, p)]


def forces_semantic(h: InstalledPoset, p, phi, names: dict, budget: int = 0) -> Answer:
    """Brute force: phi holds in every extension by a generic filter containing p."""
    unknown = False
    for G in generic_filters_below(h, p):
        env = {k: interpret_name(v, frozenset(G)) for k, v in names.items()}
        val = evaluate(phi, budget, env=env)
        if val is False:
            return Answer.FALSE
        unknown |= val is None
    return Answer.OUT_OF_BUDGET if unknown else Answer.TRUE
