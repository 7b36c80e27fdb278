"""Surface / observation / computation layering over a colored net."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping

from .net import Marking, Net, Violation


class SpaceKind(enum.Enum):
    SURFACE = "surface"
    OBSERVATION = "observation"
    COMPUTATION = "computation"

    @classmethod
    def parse(cls, text: str) -> "SpaceKind":
        return cls(text.lower())


_ADJACENT = {
    SpaceKind.SURFACE: {SpaceKind.SURFACE, SpaceKind.OBSERVATION},
    SpaceKind.OBSERVATION: {SpaceKind.SURFACE, SpaceKind.OBSERVATION, SpaceKind.COMPUTATION},
    SpaceKind.COMPUTATION: {SpaceKind.OBSERVATION, SpaceKind.COMPUTATION},
}


def adjacent(a: SpaceKind, b: SpaceKind) -> bool:
    """Equal or neighbouring layers; surface and computation never touch."""
    return b in _ADJACENT[a]


class FlowKind(enum.Enum):
    HORIZONTAL = "horizontal"
    VERTICAL = "vertical"


@dataclass
class SpaceAssignment:
    places: dict[str, SpaceKind] = field(default_factory=dict)
    transitions: dict[str, SpaceKind] = field(default_factory=dict)


@dataclass
class CommSpaceNet:
    net: Net
    spaces: SpaceAssignment
    # pairs of (approve transition, deny transition) that model a human decision
    human: tuple = ()

    @classmethod
    def build(cls, net: Net, place_spaces: Mapping, transition_spaces: Mapping, human=()) -> "CommSpaceNet":
        def conv(m):
            return {k: v if isinstance(v, SpaceKind) else SpaceKind.parse(v) for k, v in m.items()}

        return cls(net, SpaceAssignment(conv(place_spaces), conv(transition_spaces)), tuple(human))


def validate_layering(csnet: CommSpaceNet) -> list[Violation]:
    """Report unassigned elements and every arc that skips a layer."""
    net, sp = csnet.net, csnet.spaces
    out = []
    for pid in sorted(net.places):
        if pid not in sp.places:
            out.append(Violation("UNASSIGNED", pid, "place has no space"))
    for tid in sorted(net.transitions):
        if tid not in sp.transitions:
            out.append(Violation("UNASSIGNED", tid, "transition has no space"))
    for pid in sorted(set(sp.places) - set(net.places)):
        out.append(Violation("UNKNOWN_ELEMENT", pid, "space assigned to unknown place"))
    for tid in sorted(set(sp.transitions) - set(net.transitions)):
        out.append(Violation("UNKNOWN_ELEMENT", tid, "space assigned to unknown transition"))

    for tid in sorted(net.transitions):
        ts = sp.transitions.get(tid)
        if ts is None:
            continue
        t = net.transitions[tid]
        seen = set()
        for direction, arcs in (("in", t.inputs), ("out", t.outputs)):
            for pid, _ in arcs:
                ps = sp.places.get(pid)
                if ps is None or adjacent(ts, ps) or (direction, pid) in seen:
                    continue
                seen.add((direction, pid))
                src, dst = (ps, ts) if direction == "in" else (ts, ps)
                out.append(Violation("BYPASS", tid, f"{src.value}->{dst.value}", pid))
    for a, d in csnet.human:
        for tid in (a, d):
            if tid is not None and tid not in net.transitions:
                out.append(Violation("UNKNOWN_ELEMENT", tid, "human decision names an unknown transition"))
    return out


def flow_classify(csnet: CommSpaceNet, tid: str) -> FlowKind:
    t = csnet.net.transition(tid)
    ts = csnet.spaces.transitions[tid]
    if all(csnet.spaces.places[p] == ts for p in t.places()):
        return FlowKind.HORIZONTAL
    return FlowKind.VERTICAL


def space_projection(csnet: CommSpaceNet, space: SpaceKind) -> Net:
    """Subnet of the places in ``space`` and the horizontal transitions there."""
    net, sp = csnet.net, csnet.spaces
    places = {p: pl for p, pl in net.places.items() if sp.places.get(p) == space}
    transitions = {
        tid: t
        for tid, t in net.transitions.items()
        if sp.transitions.get(tid) == space and flow_classify(csnet, tid) is FlowKind.HORIZONTAL
    }
    initial = Marking({p: net.initial[p] for p in places})
    return Net(dict(net.colorsets), places, transitions, initial)
