"""Token colors: color-set declarations and the values that inhabit them."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Union


@dataclass(frozen=True, slots=True)
class Unit:
    def __repr__(self) -> str:
        return "()"


@dataclass(frozen=True, slots=True)
class Int:
    value: int

    def __repr__(self) -> str:
        return str(self.value)


@dataclass(frozen=True, slots=True)
class Sym:
    symbol: str

    def __repr__(self) -> str:
        return f"'{self.symbol}"


@dataclass(frozen=True, slots=True)
class Tuple:
    elements: tuple

    def __repr__(self) -> str:
        return "(" + ", ".join(repr(e) for e in self.elements) + ")"


ColorValue = Union[Unit, Int, Sym, Tuple]

UNIT = Unit()


def val(x: Any) -> ColorValue:
    """Convert a plain Python value into a ColorValue.

    ``None`` and ``()`` become Unit, ints become Int, strings become Sym and
    lists/tuples become Tuple.  ColorValues pass through unchanged.
    """
    if isinstance(x, (Unit, Int, Sym, Tuple)):
        return x
    if x is None or x == ():
        return UNIT
    if isinstance(x, bool):
        raise TypeError("booleans are not color values")
    if isinstance(x, int):
        return Int(x)
    if isinstance(x, str):
        return Sym(x)
    if isinstance(x, (list, tuple)):
        return Tuple(tuple(val(e) for e in x))
    raise TypeError(f"cannot convert {x!r} to a color value")


def to_json(v: ColorValue) -> Any:
    if isinstance(v, Unit):
        return None
    if isinstance(v, Int):
        return v.value
    if isinstance(v, Sym):
        return v.symbol
    return [to_json(e) for e in v.elements]


def from_json(x: Any) -> ColorValue:
    if x is None:
        return UNIT
    if isinstance(x, bool):
        raise ValueError("booleans are not color values")
    if isinstance(x, int):
        return Int(x)
    if isinstance(x, str):
        return Sym(x)
    if isinstance(x, list):
        return Tuple(tuple(from_json(e) for e in x))
    raise ValueError(f"not a color value: {x!r}")


def generic_key(v: ColorValue) -> tuple:
    """Colorset-free total order (symbols by name); used for display only."""
    if isinstance(v, Unit):
        return (0,)
    if isinstance(v, Int):
        return (1, v.value)
    if isinstance(v, Sym):
        return (2, v.symbol)
    return (3, tuple(generic_key(e) for e in v.elements))


@dataclass(frozen=True)
class ColorSet:
    """A named color domain.

    ``kind`` is one of ``unit``, ``int-range``, ``enum`` or ``product``.
    Only the fields relevant to the kind are meaningful.
    """

    name: str
    kind: str
    lo: int = 0
    hi: int = 0
    symbols: tuple[str, ...] = ()
    components: tuple[str, ...] = ()

    @classmethod
    def unit(cls, name: str) -> "ColorSet":
        return cls(name, "unit")

    @classmethod
    def int_range(cls, name: str, lo: int, hi: int) -> "ColorSet":
        return cls(name, "int-range", lo=lo, hi=hi)

    @classmethod
    def enum(cls, name: str, symbols: Iterable[str]) -> "ColorSet":
        return cls(name, "enum", symbols=tuple(symbols))

    @classmethod
    def product(cls, name: str, components: Iterable[str]) -> "ColorSet":
        return cls(name, "product", components=tuple(components))

    def describe(self) -> str:
        if self.kind == "int-range":
            return f"int[{self.lo},{self.hi}]"
        if self.kind == "enum":
            return "enum{" + ",".join(self.symbols) + "}"
        if self.kind == "product":
            return "product(" + ",".join(self.components) + ")"
        return "unit"


KINDS = ("unit", "int-range", "enum", "product")


def colorset_problems(colorsets: Mapping[str, ColorSet]) -> list[tuple[str, str]]:
    """Return ``(colorset name, message)`` for every malformed declaration."""
    problems = []
    for name, cs in colorsets.items():
        if cs.name != name:
            problems.append((name, f"declared under key {name!r} but named {cs.name!r}"))
        if cs.kind not in KINDS:
            problems.append((name, f"unknown kind {cs.kind!r}"))
        elif cs.kind == "int-range" and cs.lo > cs.hi:
            problems.append((name, f"empty range [{cs.lo},{cs.hi}]"))
        elif cs.kind == "enum":
            if not cs.symbols:
                problems.append((name, "enum has no symbols"))
            if len(set(cs.symbols)) != len(cs.symbols):
                problems.append((name, "enum has duplicate symbols"))
        elif cs.kind == "product":
            for c in cs.components:
                if c not in colorsets:
                    problems.append((name, f"unknown component {c!r}"))
    # cycle detection over product references
    state: dict[str, int] = {}

    def visit(n: str) -> bool:
        if state.get(n) == 1:
            return True
        if state.get(n) == 2 or n not in colorsets:
            return False
        state[n] = 1
        cs = colorsets[n]
        cyclic = cs.kind == "product" and any(visit(c) for c in cs.components)
        state[n] = 2
        return cyclic

    for name in colorsets:
        if name not in state and visit(name):
            problems.append((name, "product components form a cycle"))
    return problems


def conforms(v: ColorValue, cs_name: str, colorsets: Mapping[str, ColorSet]) -> bool:
    cs = colorsets.get(cs_name)
    if cs is None:
        return False
    if cs.kind == "unit":
        return isinstance(v, Unit)
    if cs.kind == "int-range":
        return isinstance(v, Int) and cs.lo <= v.value <= cs.hi
    if cs.kind == "enum":
        return isinstance(v, Sym) and v.symbol in cs.symbols
    if cs.kind == "product":
        return (
            isinstance(v, Tuple)
            and len(v.elements) == len(cs.components)
            and all(conforms(e, c, colorsets) for e, c in zip(v.elements, cs.components))
        )
    return False


def domain(cs_name: str, colorsets: Mapping[str, ColorSet]) -> list[ColorValue]:
    """Enumerate every value of a color set, in canonical order."""
    cs = colorsets[cs_name]
    if cs.kind == "unit":
        return [UNIT]
    if cs.kind == "int-range":
        return [Int(i) for i in range(cs.lo, cs.hi + 1)]
    if cs.kind == "enum":
        return [Sym(s) for s in cs.symbols]
    parts = [domain(c, colorsets) for c in cs.components]
    return [Tuple(tuple(p)) for p in itertools.product(*parts)]


@dataclass
class KeyFactory:
    """Builds sort keys that follow the canonical value order.

    Unit < Int (by value) < Sym (by declaration index) < Tuple (lexicographic).
    Symbols are ranked by their position in the enum that declares them.
    """

    colorsets: Mapping[str, ColorSet]
    _cache: dict = field(default_factory=dict)

    def for_colorset(self, cs_name: str) -> Callable[[ColorValue], tuple]:
        fn = self._cache.get(cs_name)
        if fn is None:
            fn = self._build(cs_name)
            self._cache[cs_name] = fn
        return fn

    def _build(self, cs_name: str) -> Callable[[ColorValue], tuple]:
        cs = self.colorsets.get(cs_name)
        if cs is None or cs.kind in ("unit", "int-range"):
            return generic_key
        if cs.kind == "enum":
            rank = {s: i for i, s in enumerate(cs.symbols)}

            def sym_key(v: ColorValue) -> tuple:
                if isinstance(v, Sym) and v.symbol in rank:
                    return (2, rank[v.symbol])
                return generic_key(v)

            return sym_key
        subs = [self.for_colorset(c) for c in cs.components]

        def tuple_key(v: ColorValue) -> tuple:
            if isinstance(v, Tuple) and len(v.elements) == len(subs):
                return (3, tuple(k(e) for k, e in zip(subs, v.elements)))
            return generic_key(v)

        return tuple_key
