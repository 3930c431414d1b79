"""Fully parenthesized prefix syntax for formulas.

    (mem a b)  (eq a b)  (atom subset a b)  (subset a b)
    (not f)  (and f g ...)  (or f g ...)  (implies f g)  (iff f g)
    (bex v t f)  (ball v t f)  (ex v f)  (all v f)

Model constants are written ``#3``, signature constants ``@p @c @d7``.
Implication and biconditional are desugared while parsing.
"""

from __future__ import annotations

import re

from .formula import (
    And, BoundedExists, BoundedForall, Const, Equal, Exists, Forall, FormulaError,
    LevyAtom, Member, Not, Or, REGISTRY, SigConst, Var, alpha_normalize, conj, disj,
    iff, implies,
)

__all__ = ["parse_formula", "format_formula", "parse_term", "format_term"]

_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*$")
_KEYWORDS = {"mem", "eq", "atom", "not", "and", "or", "implies", "iff", "bex", "ball", "ex", "all"}


def _tokenize(text: str) -> list:
    out, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaError(f"cannot tokenize at {text[pos:pos + 20]!r}")
        out.append(m.group(1) or m.group(2) or m.group(3))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return out


def _read(tokens: list, i: int):
    if i >= len(tokens):
        raise FormulaError("unexpected end of input")
    tok = tokens[i]
    if tok == ")":
        raise FormulaError("unexpected ')'")
    if tok != "(":
        return tok, i + 1
    items, i = [], i + 1
    while True:
        if i >= len(tokens):
            raise FormulaError("missing ')'")
        if tokens[i] == ")":
            return items, i + 1
        item, i = _read(tokens, i)
        items.append(item)


def parse_term(tok) -> object:
    if not isinstance(tok, str):
        raise FormulaError(f"expected a term, got {tok!r}")
    if tok.startswith("#"):
        if not tok[1:].isdigit():
            raise FormulaError(f"bad model constant {tok!r}")
        return Const(int(tok[1:]))
    if tok.startswith("@"):
        body = tok[1:]
        if body in ("p", "c"):
            return SigConst(body)
        if body.startswith("d") and body[1:].isdigit():
            return SigConst("d", int(body[1:]))
        raise FormulaError(f"bad signature constant {tok!r}")
    if _IDENT.match(tok) and tok not in _KEYWORDS:
        return Var(tok)
    raise FormulaError(f"bad term {tok!r}")


def _build(sx):
    if not isinstance(sx, list) or not sx:
        raise FormulaError(f"expected a formula, got {sx!r}")
    head, args = sx[0], sx[1:]
    if not isinstance(head, str):
        raise FormulaError("formula head must be a keyword")

    def need(n):
        if len(args) != n:
            raise FormulaError(f"{head} takes {n} arguments, got {len(args)}")

    if head in ("mem", "eq"):
        need(2)
        cls = Member if head == "mem" else Equal
        return cls(parse_term(args[0]), parse_term(args[1]))
    if head == "atom":
        if not args or not isinstance(args[0], str):
            raise FormulaError("atom needs a name")
        return _atom(args[0], args[1:])
    if head == "not":
        need(1)
        return Not(_build(args[0]))
    if head in ("and", "or"):
        if len(args) < 2:
            raise FormulaError(f"{head} needs at least two operands")
        parts = [_build(a) for a in args]
        return conj(*parts) if head == "and" else disj(*parts)
    if head in ("implies", "iff"):
        need(2)
        return (implies if head == "implies" else iff)(_build(args[0]), _build(args[1]))
    if head in ("bex", "ball"):
        need(3)
        var = parse_term(args[0])
        if not isinstance(var, Var):
            raise FormulaError("quantified variable must be an identifier")
        cls = BoundedExists if head == "bex" else BoundedForall
        return cls(var.name, parse_term(args[1]), _build(args[2]))
    if head in ("ex", "all"):
        need(2)
        var = parse_term(args[0])
        if not isinstance(var, Var):
            raise FormulaError("quantified variable must be an identifier")
        return (Exists if head == "ex" else Forall)(var.name, _build(args[1]))
    if head in REGISTRY:
        return _atom(head, args)
    raise FormulaError(f"unknown form {head!r}")


def _atom(name, args):
    d = REGISTRY.get(name)
    if len(args) != len(d.params):
        raise FormulaError(f"atom {name} takes {len(d.params)} arguments, got {len(args)}")
    return LevyAtom(name, tuple(parse_term(a) for a in args))


def parse_formula(text: str, *, normalize: bool = False):
    """Parse one formula; ``normalize`` alpha-renames bound variables apart."""
    tokens = _tokenize(text)
    sx, i = _read(tokens, 0)
    if i != len(tokens):
        raise FormulaError("trailing input after formula")
    phi = _build(sx)
    return alpha_normalize(phi) if normalize else phi


def format_term(t) -> str:
    if isinstance(t, Const) and not isinstance(t.value, int):
        raise FormulaError("structural constants have no textual form")
    return str(t)


def format_formula(phi) -> str:
    if isinstance(phi, Member):
        return f"(mem {format_term(phi.lhs)} {format_term(phi.rhs)})"
    if isinstance(phi, Equal):
        return f"(eq {format_term(phi.lhs)} {format_term(phi.rhs)})"
    if isinstance(phi, LevyAtom):
        return "(atom " + " ".join([phi.atom, *map(format_term, phi.args)]) + ")"
    if isinstance(phi, Not):
        return f"(not {format_formula(phi.body)})"
    if isinstance(phi, (And, Or)):
        op = "and" if isinstance(phi, And) else "or"
        return f"({op} {format_formula(phi.left)} {format_formula(phi.right)})"
    if isinstance(phi, (BoundedExists, BoundedForall)):
        op = "bex" if isinstance(phi, BoundedExists) else "ball"
        return f"({op} {phi.var} {format_term(phi.bound)} {format_formula(phi.body)})"
    if isinstance(phi, (Exists, Forall)):
        op = "ex" if isinstance(phi, Exists) else "all"
        return f"({op} {phi.var} {format_formula(phi.body)})"
    raise FormulaError(f"not a formula: {phi!r}")
