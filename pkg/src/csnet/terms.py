"""Arc inscriptions and guards, with their prefix s-expression syntax.

Terms (used both as input patterns and output expressions)::

    x                 variable
    3  -1             integer literal
    'go               symbol literal
    ()                unit literal
    (tuple x 'go 3)   tuple

Guards::

    true  false
    (= a b) (!= a b) (< a b) (<= a b) (> a b) (>= a b)
    (and g ...) (or g ...) (not g)
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Optional, Union

from .colors import UNIT, ColorValue, Int, Sym, Tuple, Unit


@dataclass(frozen=True, slots=True)
class Var:
    name: str


@dataclass(frozen=True, slots=True)
class Lit:
    value: ColorValue


@dataclass(frozen=True, slots=True)
class TupleTerm:
    items: tuple


Term = Union[Var, Lit, TupleTerm]

CMP_OPS = ("=", "!=", "<", "<=", ">", ">=")
ORDER_OPS = ("<", "<=", ">", ">=")


@dataclass(frozen=True, slots=True)
class Const:
    value: bool


@dataclass(frozen=True, slots=True)
class Cmp:
    op: str
    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class And:
    items: tuple


@dataclass(frozen=True, slots=True)
class Or:
    items: tuple


@dataclass(frozen=True, slots=True)
class Not:
    item: "Guard"


Guard = Union[Const, Cmp, And, Or, Not]

TRUE = Const(True)


def term_vars(t: Term) -> Iterator[str]:
    if isinstance(t, Var):
        yield t.name
    elif isinstance(t, TupleTerm):
        for i in t.items:
            yield from term_vars(i)


def guard_vars(g: Guard) -> Iterator[str]:
    if isinstance(g, Cmp):
        yield from term_vars(g.left)
        yield from term_vars(g.right)
    elif isinstance(g, (And, Or)):
        for i in g.items:
            yield from guard_vars(i)
    elif isinstance(g, Not):
        yield from guard_vars(g.item)


def guard_comparisons(g: Guard) -> Iterator[Cmp]:
    if isinstance(g, Cmp):
        yield g
    elif isinstance(g, (And, Or)):
        for i in g.items:
            yield from guard_comparisons(i)
    elif isinstance(g, Not):
        yield from guard_comparisons(g.item)


def match(pattern: Term, value: ColorValue, binding: dict) -> Optional[dict]:
    """Match ``value`` against ``pattern``, extending ``binding``.

    Returns the extended binding (a new dict when anything was added) or None.
    A variable already bound must be bound to an equal value.
    """
    if isinstance(pattern, Var):
        bound = binding.get(pattern.name)
        if bound is None:
            b = dict(binding)
            b[pattern.name] = value
            return b
        return binding if bound == value else None
    if isinstance(pattern, Lit):
        return binding if pattern.value == value else None
    if not isinstance(value, Tuple) or len(value.elements) != len(pattern.items):
        return None
    for p, v in zip(pattern.items, value.elements):
        binding = match(p, v, binding)
        if binding is None:
            return None
    return binding


def evaluate(t: Term, binding: Mapping[str, ColorValue]) -> ColorValue:
    if isinstance(t, Var):
        return binding[t.name]
    if isinstance(t, Lit):
        return t.value
    return Tuple(tuple(evaluate(i, binding) for i in t.items))


def holds(g: Guard, binding: Mapping[str, ColorValue]) -> bool:
    if isinstance(g, Const):
        return g.value
    if isinstance(g, Cmp):
        a, b = evaluate(g.left, binding), evaluate(g.right, binding)
        if g.op == "=":
            return a == b
        if g.op == "!=":
            return a != b
        if not (isinstance(a, Int) and isinstance(b, Int)):
            raise TypeError(f"ordering comparison on non-integers: {a!r} {g.op} {b!r}")
        x, y = a.value, b.value
        return {"<": x < y, "<=": x <= y, ">": x > y, ">=": x >= y}[g.op]
    if isinstance(g, And):
        return all(holds(i, binding) for i in g.items)
    if isinstance(g, Or):
        return any(holds(i, binding) for i in g.items)
    return not holds(g.item, binding)


# -- s-expression syntax -----------------------------------------------------


class SexprError(ValueError):
    pass


_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*$")
_INT = re.compile(r"-?[0-9]+$")


def _tokenize(text: str) -> list[str]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SexprError(f"unexpected character at offset {pos} in {text!r}")
        out.append(m.group(1) or m.group(2) or m.group(3))
        pos = m.end()
    return out


def _read(tokens: list[str], pos: int):
    if pos >= len(tokens):
        raise SexprError("unexpected end of expression")
    tok = tokens[pos]
    if tok == ")":
        raise SexprError("unexpected ')'")
    if tok != "(":
        return tok, pos + 1
    items, pos = [], pos + 1
    while True:
        if pos >= len(tokens):
            raise SexprError("missing ')'")
        if tokens[pos] == ")":
            return items, pos + 1
        item, pos = _read(tokens, pos)
        items.append(item)


def _read_all(text: str):
    tokens = _tokenize(text)
    tree, pos = _read(tokens, 0)
    if pos != len(tokens):
        raise SexprError(f"trailing input in {text!r}")
    return tree


def _to_term(tree) -> Term:
    if isinstance(tree, list):
        if not tree:
            return Lit(UNIT)
        if tree[0] != "tuple":
            raise SexprError(f"expected (tuple ...), got ({tree[0]} ...)")
        return TupleTerm(tuple(_to_term(t) for t in tree[1:]))
    if _INT.match(tree):
        return Lit(Int(int(tree)))
    if tree.startswith("'") and _IDENT.match(tree[1:]):
        return Lit(Sym(tree[1:]))
    if _IDENT.match(tree) and tree not in ("true", "false", "tuple"):
        return Var(tree)
    raise SexprError(f"bad term {tree!r}")


def _to_guard(tree) -> Guard:
    if tree == "true":
        return Const(True)
    if tree == "false":
        return Const(False)
    if not isinstance(tree, list) or not tree:
        raise SexprError(f"bad guard {tree!r}")
    head, args = tree[0], tree[1:]
    if head in CMP_OPS:
        if len(args) != 2:
            raise SexprError(f"({head} ...) takes two operands")
        return Cmp(head, _to_term(args[0]), _to_term(args[1]))
    if head == "and":
        return And(tuple(_to_guard(a) for a in args))
    if head == "or":
        return Or(tuple(_to_guard(a) for a in args))
    if head == "not":
        if len(args) != 1:
            raise SexprError("(not ...) takes one operand")
        return Not(_to_guard(args[0]))
    raise SexprError(f"unknown guard operator {head!r}")


def parse_term(text: str) -> Term:
    return _to_term(_read_all(text))


def parse_guard(text: str) -> Guard:
    return _to_guard(_read_all(text))


def format_value(v: ColorValue) -> str:
    if isinstance(v, Unit):
        return "()"
    if isinstance(v, Int):
        return str(v.value)
    if isinstance(v, Sym):
        return "'" + v.symbol
    return "(tuple " + " ".join(format_value(e) for e in v.elements) + ")"


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Lit):
        return format_value(t.value)
    return "(tuple " + " ".join(format_term(i) for i in t.items) + ")"


def format_guard(g: Guard) -> str:
    if isinstance(g, Const):
        return "true" if g.value else "false"
    if isinstance(g, Cmp):
        return f"({g.op} {format_term(g.left)} {format_term(g.right)})"
    if isinstance(g, (And, Or)):
        head = "and" if isinstance(g, And) else "or"
        return "(" + " ".join([head] + [format_guard(i) for i in g.items]) + ")"
    return f"(not {format_guard(g.item)})"


def lit_term(v: ColorValue) -> Term:
    """Term that evaluates to ``v``; tuples become TupleTerms of literals."""
    if isinstance(v, Tuple):
        return TupleTerm(tuple(lit_term(e) for e in v.elements))
    return Lit(v)
