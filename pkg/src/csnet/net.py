"""Colored Petri net kernel: structure, markings, binding enumeration, firing."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Iterable, Iterator, Mapping, Optional

from . import terms as T
from .colors import (
    ColorSet,
    ColorValue,
    Int,
    KeyFactory,
    Tuple,
    colorset_problems,
    conforms,
    generic_key,
    to_json,
    val,
)

LEXICOGRAPHIC = "lexicographic-first"
RANDOM = "seeded-uniform-random"
POLICIES = (LEXICOGRAPHIC, RANDOM)


class NotEnabled(Exception):
    """Raised when firing a transition under a binding that is not enabled."""


class UnknownTransition(KeyError):
    pass


@dataclass(frozen=True)
class Violation:
    code: str
    subject: str
    detail: str
    ref: Any = None

    def __str__(self) -> str:
        return f"{self.code}\t{self.subject} {self.detail}"


@dataclass(frozen=True)
class Place:
    id: str
    colorset: str
    name: str = ""


def _normalize(t: T.Term) -> T.Term:
    if isinstance(t, T.Lit) and isinstance(t.value, Tuple):
        return T.lit_term(t.value)
    if isinstance(t, T.TupleTerm):
        return T.TupleTerm(tuple(_normalize(i) for i in t.items))
    return t


def _normalize_guard(g: T.Guard) -> T.Guard:
    if isinstance(g, T.Cmp):
        return T.Cmp(g.op, _normalize(g.left), _normalize(g.right))
    if isinstance(g, T.And):
        return T.And(tuple(_normalize_guard(i) for i in g.items))
    if isinstance(g, T.Or):
        return T.Or(tuple(_normalize_guard(i) for i in g.items))
    if isinstance(g, T.Not):
        return T.Not(_normalize_guard(g.item))
    return g


def _as_term(x: Any) -> T.Term:
    if isinstance(x, (T.Var, T.Lit, T.TupleTerm)):
        return _normalize(x)
    if isinstance(x, str):
        return _normalize(T.parse_term(x))
    return T.lit_term(val(x))


@dataclass(frozen=True, init=False)
class Transition:
    """A transition with pattern-inscribed input arcs and expression outputs.

    Arc inscriptions and the guard may be given as s-expression strings
    (``"x"``, ``"(tuple d 'go)"``, ``"(< x 3)"``) or as term objects.
    Multiplicity is expressed by repeating an arc.
    """

    id: str
    inputs: tuple
    outputs: tuple
    guard: T.Guard
    name: str

    def __init__(self, id, inputs=(), outputs=(), guard=T.TRUE, name=""):
        object.__setattr__(self, "id", id)
        object.__setattr__(self, "inputs", tuple((p, _as_term(t)) for p, t in inputs))
        object.__setattr__(self, "outputs", tuple((p, _as_term(t)) for p, t in outputs))
        if isinstance(guard, str):
            guard = T.parse_guard(guard)
        object.__setattr__(self, "guard", _normalize_guard(guard))
        object.__setattr__(self, "name", name or id)

    @property
    def variables(self) -> list[str]:
        names = set()
        for _, pat in self.inputs:
            names.update(T.term_vars(pat))
        return sorted(names)

    def places(self) -> set[str]:
        return {p for p, _ in self.inputs} | {p for p, _ in self.outputs}


class Marking:
    """Immutable multiset of tokens per place.

    Empty places are not stored; ``m[p]`` on an absent place is ``[]``.
    Equality and hashing are multiset-based and ignore insertion order.
    """

    __slots__ = ("_bags", "_hash")

    def __init__(self, tokens: Optional[Mapping[str, Iterable[Any]]] = None):
        bags: dict[str, dict] = {}
        for p, values in (tokens or {}).items():
            bag: dict = {}
            for v in values:
                v = val(v)
                bag[v] = bag.get(v, 0) + 1
            if bag:
                bags[p] = bag
        self._bags = bags
        self._hash = None

    @classmethod
    def _from_bags(cls, bags: dict) -> "Marking":
        m = cls.__new__(cls)
        m._bags = bags
        m._hash = None
        return m

    def __getitem__(self, place: str) -> list[ColorValue]:
        bag = self._bags.get(place, {})
        out = []
        for v in sorted(bag, key=generic_key):
            out.extend([v] * bag[v])
        return out

    def bag(self, place: str) -> dict:
        return dict(self._bags.get(place, {}))

    def count(self, place: str, value: Any = None) -> int:
        bag = self._bags.get(place, {})
        if value is None:
            return sum(bag.values())
        return bag.get(val(value), 0)

    def places(self) -> list[str]:
        return sorted(self._bags)

    def total(self) -> int:
        return sum(sum(b.values()) for b in self._bags.values())

    def items(self) -> Iterator[tuple[str, ColorValue, int]]:
        for p in sorted(self._bags):
            for v, n in self._bags[p].items():
                yield p, v, n

    def contains(self, required: Mapping[str, Mapping[ColorValue, int]]) -> bool:
        for p, need in required.items():
            bag = self._bags.get(p)
            if bag is None:
                return False
            for v, n in need.items():
                if bag.get(v, 0) < n:
                    return False
        return True

    def apply(self, removed, added) -> "Marking":
        """Return a new marking with ``removed`` taken out and ``added`` put in.

        Both arguments map place -> {value: count}.  No enabledness check.
        """
        bags = dict(self._bags)
        touched = set(removed) | set(added)
        for p in touched:
            bag = dict(bags.get(p, {}))
            for v, n in removed.get(p, {}).items():
                left = bag.get(v, 0) - n
                if left < 0:
                    raise ValueError(f"cannot remove {n} x {v!r} from {p}")
                if left:
                    bag[v] = left
                else:
                    bag.pop(v, None)
            for v, n in added.get(p, {}).items():
                bag[v] = bag.get(v, 0) + n
            if bag:
                bags[p] = bag
            else:
                bags.pop(p, None)
        return Marking._from_bags(bags)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Marking) and self._bags == other._bags

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset((p, frozenset(b.items())) for p, b in self._bags.items()))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{p}: {self[p]}" for p in self.places())
        return "Marking{" + body + "}"


@dataclass(eq=False)
class Net:
    colorsets: dict[str, ColorSet]
    places: dict[str, Place]
    transitions: dict[str, Transition]
    initial: Marking = field(default_factory=Marking)

    @classmethod
    def build(
        cls,
        colorsets: Iterable[ColorSet],
        places: Iterable[Place],
        transitions: Iterable[Transition],
        initial: Optional[Mapping[str, Iterable[Any]]] = None,
    ) -> "Net":
        return cls(
            {c.name: c for c in colorsets},
            {p.id: p for p in places},
            {t.id: t for t in transitions},
            initial if isinstance(initial, Marking) else Marking(initial),
        )

    def transition(self, tid: str) -> Transition:
        try:
            return self.transitions[tid]
        except KeyError:
            raise UnknownTransition(tid) from None

    @cached_property
    def keys(self) -> KeyFactory:
        return KeyFactory(self.colorsets)

    @cached_property
    def _var_types(self) -> dict[str, dict[str, str]]:
        out = {}
        for t in self.transitions.values():
            types: dict[str, str] = {}
            for p, pat in t.inputs:
                if p in self.places:
                    _collect_var_types(pat, self.places[p].colorset, self.colorsets, types)
            out[t.id] = types
        return out

    def var_types(self, tid: str) -> dict[str, str]:
        return self._var_types[tid]

    def place_key(self, place: str) -> Callable[[ColorValue], tuple]:
        p = self.places.get(place)
        return self.keys.for_colorset(p.colorset) if p else generic_key

    def binding_key(self, tid: str, binding: Mapping[str, ColorValue]) -> tuple:
        types = self._var_types[tid]
        return tuple(
            (name, self.keys.for_colorset(types.get(name, ""))(binding[name]))
            for name in sorted(binding)
        )

    def canonical(self, marking: Marking) -> list:
        """JSON-ready canonical form: places by id, tokens in value order."""
        out = []
        for p in marking.places():
            key = self.place_key(p)
            bag = marking._bags[p]
            tokens = []
            for v in sorted(bag, key=key):
                tokens.extend([to_json(v)] * bag[v])
            out.append([p, tokens])
        return out

    def digest(self, marking: Marking) -> str:
        data = json.dumps(self.canonical(marking), separators=(",", ":"))
        return hashlib.sha256(data.encode()).hexdigest()


def _collect_var_types(pat: T.Term, cs_name: str, colorsets, types: dict) -> None:
    if isinstance(pat, T.Var):
        types.setdefault(pat.name, cs_name)
    elif isinstance(pat, T.TupleTerm):
        cs = colorsets.get(cs_name)
        if cs is not None and cs.kind == "product" and len(cs.components) == len(pat.items):
            for sub, comp in zip(pat.items, cs.components):
                _collect_var_types(sub, comp, colorsets, types)


# -- validation --------------------------------------------------------------


def assignable(src: str, dst: str, colorsets: Mapping[str, ColorSet]) -> bool:
    """True when every value of colorset ``src`` conforms to ``dst``."""
    if src == dst:
        return True
    a, b = colorsets.get(src), colorsets.get(dst)
    if a is None or b is None or a.kind != b.kind:
        return False
    if a.kind == "unit":
        return True
    if a.kind == "int-range":
        return b.lo <= a.lo and a.hi <= b.hi
    if a.kind == "enum":
        return set(a.symbols) <= set(b.symbols)
    return len(a.components) == len(b.components) and all(
        assignable(x, y, colorsets) for x, y in zip(a.components, b.components)
    )


def _check_term(term, cs_name, colorsets, var_types, bad: list, where: str) -> None:
    """Collect shape errors of ``term`` against ``cs_name`` into ``bad``."""
    cs = colorsets.get(cs_name)
    if cs is None:
        bad.append(f"{where}: unknown colorset {cs_name!r}")
        return
    if isinstance(term, T.Lit):
        if not conforms(term.value, cs_name, colorsets):
            bad.append(f"{where}: literal {T.format_value(term.value)} not in {cs.describe()}")
    elif isinstance(term, T.Var):
        vt = var_types.get(term.name)
        if vt is not None and not assignable(vt, cs_name, colorsets):
            bad.append(f"{where}: variable {term.name} of {vt} used as {cs_name}")
    else:
        if cs.kind != "product" or len(cs.components) != len(term.items):
            bad.append(f"{where}: tuple of arity {len(term.items)} not in {cs.describe()}")
            return
        for sub, comp in zip(term.items, cs.components):
            _check_term(sub, comp, colorsets, var_types, bad, where)


def _is_int_typed(term, var_types, colorsets) -> bool:
    if isinstance(term, T.Lit):
        return isinstance(term.value, Int)
    if isinstance(term, T.Var):
        cs = colorsets.get(var_types.get(term.name, ""))
        return cs is not None and cs.kind == "int-range"
    return False


def validate_net(net: Net) -> list[Violation]:
    """Every structural and typing problem of ``net``; empty iff well-formed."""
    out: list[Violation] = []
    cs = net.colorsets
    for name, msg in colorset_problems(cs):
        out.append(Violation("COLORSET", name, msg))

    for pid in sorted(net.places):
        p = net.places[pid]
        if p.id != pid:
            out.append(Violation("PLACE_ID", pid, f"declared under key {pid!r} but id is {p.id!r}"))
        if p.colorset not in cs:
            out.append(Violation("UNKNOWN_COLORSET", pid, f"colorset {p.colorset!r} is not declared", p.colorset))

    for tid in sorted(net.transitions):
        t = net.transitions[tid]
        if t.id != tid:
            out.append(Violation("TRANSITION_ID", tid, f"declared under key {tid!r} but id is {t.id!r}"))
        out.extend(_validate_transition(net, t))

    for p in net.initial.places():
        if p not in net.places:
            out.append(Violation("MARKING_PLACE", p, "initial marking names an unknown place", p))
            continue
        csn = net.places[p].colorset
        if csn not in cs:
            continue
        for v in net.initial[p]:
            if not conforms(v, csn, cs):
                out.append(
                    Violation("MARKING_TYPE", p, f"token {T.format_value(v)} not in {cs[csn].describe()}", v)
                )
    return out


def _validate_transition(net: Net, t: Transition) -> list[Violation]:
    out = []
    cs = net.colorsets
    for p, _ in t.inputs + t.outputs:
        if p not in net.places:
            out.append(Violation("DANGLING_PLACE", t.id, f"arc references unknown place {p!r}", p))

    # each variable's type is fixed by its first input occurrence
    types: dict[str, str] = {}
    for p, pat in t.inputs:
        if p in net.places:
            _collect_var_types(pat, net.places[p].colorset, cs, types)
    for p, pat in t.inputs:
        if p not in net.places:
            continue
        bad: list[str] = []
        _check_term(pat, net.places[p].colorset, cs, types, bad, f"input {p}")
        for msg in bad:
            out.append(Violation("PATTERN_TYPE", t.id, msg, p))
        for name in T.term_vars(pat):
            if name not in types:
                out.append(Violation("PATTERN_TYPE", t.id, f"input {p}: cannot type variable {name}", name))

    bound = set(types)
    for p, expr in t.outputs:
        for name in sorted(set(T.term_vars(expr)) - bound):
            out.append(Violation("UNBOUND_VARIABLE", t.id, f"output to {p} uses unbound variable {name}", name))
        if p not in net.places:
            continue
        bad = []
        _check_term(expr, net.places[p].colorset, cs, types, bad, f"output {p}")
        for msg in bad:
            out.append(Violation("EXPR_TYPE", t.id, msg, p))

    for name in sorted(set(T.guard_vars(t.guard)) - bound):
        out.append(Violation("GUARD_UNBOUND", t.id, f"guard uses unbound variable {name}", name))
    for c in T.guard_comparisons(t.guard):
        msg = _guard_type_error(c, types, cs)
        if msg:
            out.append(Violation("GUARD_TYPE", t.id, msg))
    return out


def _guard_type_error(c: T.Cmp, types, cs) -> Optional[str]:
    text = T.format_guard(c)
    if any(n not in types for n in T.term_vars(c.left)) or any(n not in types for n in T.term_vars(c.right)):
        return None  # reported as GUARD_UNBOUND
    if c.op in T.ORDER_OPS:
        if not (_is_int_typed(c.left, types, cs) and _is_int_typed(c.right, types, cs)):
            return f"{text}: ordering needs integer operands"
        return None
    for a, b in ((c.left, c.right), (c.right, c.left)):
        if isinstance(a, T.Var):
            at = types[a.name]
            if isinstance(b, T.Var):
                bt = types[b.name]
                if not (assignable(at, bt, cs) or assignable(bt, at, cs)):
                    return f"{text}: compares {at} with {bt}"
                return None
            bad: list[str] = []
            _check_term(b, at, cs, types, bad, "guard")
            if bad:
                return f"{text}: operand does not fit {at}"
            return None
    return None


# -- enabling and firing -----------------------------------------------------


def _bag(values: Iterable[tuple[str, ColorValue]]) -> dict:
    out: dict = {}
    for p, v in values:
        b = out.setdefault(p, {})
        b[v] = b.get(v, 0) + 1
    return out


def consumed(t: Transition, binding: Mapping[str, ColorValue]) -> dict:
    return _bag((p, T.evaluate(pat, binding)) for p, pat in t.inputs)


def produced(t: Transition, binding: Mapping[str, ColorValue]) -> dict:
    return _bag((p, T.evaluate(e, binding)) for p, e in t.outputs)


def enabled_bindings(net: Net, marking: Marking, tid: str) -> list[dict]:
    """All bindings under which ``tid`` may fire, in canonical order.

    Bindings range over token values: equal tokens are interchangeable, so
    each distinct variable assignment is reported once.
    """
    t = net.transition(tid)
    arcs = t.inputs
    found: set = set()
    used: dict[str, dict] = {}

    def search(i: int, binding: dict) -> None:
        if i == len(arcs):
            key = tuple(sorted(binding.items(), key=lambda kv: kv[0]))
            if key not in found and T.holds(t.guard, binding):
                found.add(key)
            return
        place, pat = arcs[i]
        bag = marking._bags.get(place)
        if not bag:
            return
        u = used.setdefault(place, {})
        for value, n in bag.items():
            if u.get(value, 0) >= n:
                continue
            b = T.match(pat, value, binding)
            if b is None:
                continue
            u[value] = u.get(value, 0) + 1
            search(i + 1, b)
            u[value] -= 1

    search(0, {})
    result = [dict(k) for k in found]
    result.sort(key=lambda b: net.binding_key(tid, b))
    return result


def enabled_transitions(net: Net, marking: Marking) -> list[tuple[str, dict]]:
    out = []
    for tid in sorted(net.transitions):
        out.extend((tid, b) for b in enabled_bindings(net, marking, tid))
    return out


def is_enabled(net: Net, marking: Marking, tid: str, binding: Mapping[str, ColorValue]) -> bool:
    t = net.transition(tid)
    if set(binding) != set(t.variables):
        return False
    try:
        need = consumed(t, binding)
        if not marking.contains(need):
            return False
        return T.holds(t.guard, binding)
    except (KeyError, TypeError):
        return False


def fire(net: Net, marking: Marking, tid: str, binding: Mapping[str, Any]) -> Marking:
    """Fire ``tid`` under ``binding``; the input marking is left untouched."""
    t = net.transition(tid)
    binding = {k: val(v) for k, v in binding.items()}
    if not is_enabled(net, marking, tid, binding):
        raise NotEnabled(f"{tid} is not enabled under {binding}")
    return marking.apply(consumed(t, binding), produced(t, binding))


# -- simulation --------------------------------------------------------------


def choose(events: list, policy: str, rng: Optional[random.Random]):
    if not events:
        return None
    if policy == LEXICOGRAPHIC:
        return events[0]
    if policy == RANDOM:
        if rng is None:
            raise ValueError("seeded-uniform-random needs an rng")
        return events[rng.randrange(len(events))]
    raise ValueError(f"unknown firing policy {policy!r}")


def step(net: Net, marking: Marking, policy: str = RANDOM, rng: Optional[random.Random] = None):
    """Fire one enabled event chosen by ``policy``.

    Returns ``(transition id, binding, successor marking)`` or None when the
    marking is quiescent.
    """
    event = choose(enabled_transitions(net, marking), policy, rng)
    if event is None:
        return None
    tid, binding = event
    return tid, binding, fire(net, marking, tid, binding)


QUIESCENT = "quiescent"
MAX_STEPS = "max-steps"
HALTED = "halted"


@dataclass(frozen=True)
class TraceStep:
    index: int
    transition: str
    binding: dict
    digest: str


@dataclass
class Trace:
    seed: int
    policy: str
    steps: list[TraceStep] = field(default_factory=list)
    terminal: str = QUIESCENT
    final: Optional[Marking] = None

    def __len__(self) -> int:
        return len(self.steps)

    def count(self, tid: str) -> int:
        return sum(1 for s in self.steps if s.transition == tid)


def run(
    net: Net,
    policy: str = RANDOM,
    seed: int = 0,
    max_steps: int = 1000,
    halt: Optional[Callable[[Marking], bool]] = None,
) -> Trace:
    """Simulate from the initial marking until quiescence or ``max_steps``.

    ``halt`` is an optional marking predicate that stops the run early.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    rng = random.Random(seed)
    trace = Trace(seed, policy)
    m = net.initial
    while True:
        if halt is not None and halt(m):
            trace.terminal = HALTED
            break
        if len(trace.steps) >= max_steps:
            trace.terminal = MAX_STEPS if enabled_transitions(net, m) else QUIESCENT
            break
        ev = step(net, m, policy, rng)
        if ev is None:
            trace.terminal = QUIESCENT
            break
        tid, binding, m = ev
        trace.steps.append(TraceStep(len(trace.steps), tid, binding, net.digest(m)))
    trace.final = m
    return trace
