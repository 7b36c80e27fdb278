"""Reading and writing net documents, traces and scenario configs.

A net document is a single JSON object with ``"version": "csnet-1"``::

    {
      "version": "csnet-1",
      "colorsets": [{"name": "U", "kind": "unit"},
                    {"name": "R", "kind": "int-range", "lo": 0, "hi": 5}],
      "places": [{"id": "P1", "name": "ready", "colorset": "U", "space": "surface"}],
      "transitions": [{"id": "T", "name": "go", "space": "surface",
                       "inputs": [{"place": "P1", "pattern": "()"}],
                       "outputs": [{"place": "P2", "expr": "()"}],
                       "guard": "true"}],
      "initial_marking": {"P1": [null]},
      "human": [{"approve": "ok", "deny": "reject"}],
      "groups": [...],
      "scenario": {"kind": "swarm", ...}
    }

Token values are plain JSON: ``null`` is unit, numbers are integers,
strings are enum symbols and arrays are tuples.  Patterns, output
expressions and guards are prefix s-expressions (see :mod:`csnet.terms`).
When ``places`` is absent and a ``scenario`` section is present, the net is
built from the scenario config.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Optional, TextIO

from . import terms as T
from .colors import ColorSet, from_json, to_json
from .commspace import CommSpaceNet, SpaceKind
from .group import AgentRef, AlreadyMember, GroupAgent
from .net import Marking, Net, Place, Trace, Transition
from .scenarios import lam as L
from .scenarios import swarm as W

VERSION = "csnet-1"

_TOP = {"version", "colorsets", "places", "transitions", "initial_marking", "groups", "scenario", "human"}


class NetFileError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        where = f"{line}:{column}: " if line else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


@dataclass
class NetDocument:
    csnet: CommSpaceNet
    groups: list = field(default_factory=list)
    scenario: Any = None


def _fields(obj, where: str, required: set, optional: set = frozenset()) -> dict:
    if not isinstance(obj, dict):
        raise NetFileError(f"{where}: expected an object")
    unknown = set(obj) - required - optional
    if unknown:
        raise NetFileError(f"{where}: unknown field(s) {', '.join(sorted(unknown))}")
    missing = required - set(obj)
    if missing:
        raise NetFileError(f"{where}: missing field(s) {', '.join(sorted(missing))}")
    return obj


def _list(obj, where: str) -> list:
    if not isinstance(obj, list):
        raise NetFileError(f"{where}: expected an array")
    return obj


def _str(obj, where: str) -> str:
    if not isinstance(obj, str):
        raise NetFileError(f"{where}: expected a string")
    return obj


def _int(obj, where: str) -> int:
    if not isinstance(obj, int) or isinstance(obj, bool):
        raise NetFileError(f"{where}: expected an integer")
    return obj


def _space(text, where: str) -> SpaceKind:
    try:
        return SpaceKind.parse(_str(text, where))
    except ValueError:
        raise NetFileError(f"{where}: unknown space {text!r}") from None


def _colorset(obj, where: str) -> ColorSet:
    kind = _fields(obj, where, {"name", "kind"}, {"lo", "hi", "symbols", "components"}).get("kind")
    name = _str(obj["name"], where + ".name")
    allowed = {
        "unit": set(),
        "int-range": {"lo", "hi"},
        "enum": {"symbols"},
        "product": {"components"},
    }
    if kind not in allowed:
        raise NetFileError(f"{where}: unknown colorset kind {kind!r}")
    _fields(obj, where, {"name", "kind"} | allowed[kind])
    if kind == "unit":
        return ColorSet.unit(name)
    if kind == "int-range":
        return ColorSet.int_range(name, _int(obj["lo"], where + ".lo"), _int(obj["hi"], where + ".hi"))
    if kind == "enum":
        return ColorSet.enum(name, [_str(s, where + ".symbols") for s in _list(obj["symbols"], where + ".symbols")])
    return ColorSet.product(name, [_str(s, where + ".components") for s in _list(obj["components"], where + ".components")])


def _term(text, where: str) -> T.Term:
    try:
        return T.parse_term(_str(text, where))
    except T.SexprError as e:
        raise NetFileError(f"{where}: {e}") from None


def _guard(text, where: str) -> T.Guard:
    try:
        return T.parse_guard(_str(text, where))
    except T.SexprError as e:
        raise NetFileError(f"{where}: {e}") from None


def _value(x, where: str):
    try:
        return from_json(x)
    except ValueError as e:
        raise NetFileError(f"{where}: {e}") from None


def parse_netfile(text: str) -> NetDocument:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise NetFileError(e.msg, e.lineno, e.colno) from None
    _fields(doc, "document", {"version"}, _TOP - {"version"})
    if doc["version"] != VERSION:
        raise NetFileError(f"document: unsupported version {doc['version']!r} (expected {VERSION!r})")

    scenario = None
    if "scenario" in doc:
        scenario = parse_scenario(doc["scenario"], "scenario")
    groups = [_group(g, f"groups[{i}]") for i, g in enumerate(_list(doc.get("groups", []), "groups"))]

    if "places" not in doc:
        if scenario is None:
            raise NetFileError("document: needs either places or a scenario section")
        extra = set(doc) & {"colorsets", "transitions", "initial_marking", "human"}
        if extra:
            raise NetFileError(f"document: {', '.join(sorted(extra))} given without places")
        return NetDocument(build_scenario_net(scenario), groups, scenario)

    colorsets = [_colorset(c, f"colorsets[{i}]") for i, c in enumerate(_list(doc.get("colorsets", []), "colorsets"))]
    places, pspace = [], {}
    for i, p in enumerate(_list(doc["places"], "places")):
        where = f"places[{i}]"
        _fields(p, where, {"id", "colorset", "space"}, {"name"})
        pid = _str(p["id"], where + ".id")
        if pid in pspace:
            raise NetFileError(f"{where}: duplicate place id {pid!r}")
        places.append(Place(pid, _str(p["colorset"], where + ".colorset"), _str(p.get("name", pid), where + ".name")))
        pspace[pid] = _space(p["space"], where + ".space")
    transitions, tspace = [], {}
    for i, t in enumerate(_list(doc.get("transitions", []), "transitions")):
        where = f"transitions[{i}]"
        _fields(t, where, {"id", "space"}, {"name", "inputs", "outputs", "guard"})
        tid = _str(t["id"], where + ".id")
        if tid in tspace:
            raise NetFileError(f"{where}: duplicate transition id {tid!r}")
        inputs = []
        for j, a in enumerate(_list(t.get("inputs", []), where + ".inputs")):
            w = f"{where}.inputs[{j}]"
            _fields(a, w, {"place", "pattern"})
            inputs.append((_str(a["place"], w + ".place"), _term(a["pattern"], w + ".pattern")))
        outputs = []
        for j, a in enumerate(_list(t.get("outputs", []), where + ".outputs")):
            w = f"{where}.outputs[{j}]"
            _fields(a, w, {"place", "expr"})
            outputs.append((_str(a["place"], w + ".place"), _term(a["expr"], w + ".expr")))
        guard = _guard(t.get("guard", "true"), where + ".guard")
        transitions.append(Transition(tid, inputs, outputs, guard, _str(t.get("name", tid), where + ".name")))
        tspace[tid] = _space(t["space"], where + ".space")

    marking = {}
    im = doc.get("initial_marking", {})
    if not isinstance(im, dict):
        raise NetFileError("initial_marking: expected an object")
    for pid, values in im.items():
        marking[pid] = [_value(v, f"initial_marking.{pid}") for v in _list(values, f"initial_marking.{pid}")]

    human = []
    for i, h in enumerate(_list(doc.get("human", []), "human")):
        where = f"human[{i}]"
        _fields(h, where, set(), {"approve", "deny"})
        human.append((h.get("approve"), h.get("deny")))

    net = Net.build(colorsets, places, transitions, Marking(marking))
    return NetDocument(CommSpaceNet.build(net, pspace, tspace, human), groups, scenario)


def load_netfile(path: str) -> NetDocument:
    with open(path, encoding="utf-8") as f:
        return parse_netfile(f.read())


def _group(obj, where: str) -> GroupAgent:
    _fields(obj, where, {"id", "topic"}, {"st", "members"})
    st = obj.get("st", "ON")
    if st not in ("ON", "OFF"):
        raise NetFileError(f"{where}.st: expected ON or OFF")
    g = GroupAgent(_str(obj["id"], where + ".id"), _str(obj["topic"], where + ".topic"), st)
    for i, m in enumerate(_list(obj.get("members", []), where + ".members")):
        w = f"{where}.members[{i}]"
        _fields(m, w, {"id"}, {"st", "topics"})
        st = m.get("st", "ON")
        if st not in ("ON", "OFF"):
            raise NetFileError(f"{w}.st: expected ON or OFF")
        try:
            g.register(AgentRef(_str(m["id"], w + ".id"), st, frozenset(_list(m.get("topics", []), w + ".topics"))))
        except AlreadyMember:
            raise NetFileError(f"{w}: duplicate member {m['id']!r}") from None
    return g


# -- scenario configs --------------------------------------------------------


def parse_scenario(obj, where: str = "scenario"):
    kind = _fields(obj, where, {"kind"}, _SWARM_KEYS | _LAM_KEYS).get("kind")
    if kind == "swarm":
        return _swarm(obj, where)
    if kind == "lam":
        return _lam(obj, where)
    raise NetFileError(f"{where}.kind: unknown scenario {kind!r}")


_SWARM_KEYS = {"grid", "drones", "tasks", "obstacles", "human_policy", "seed", "mode_schedule"}
_LAM_KEYS = {"action_alphabet", "demonstrations", "repetitions"}


def _swarm(obj, where: str) -> W.SwarmConfig:
    _fields(obj, where, {"kind"}, _SWARM_KEYS)
    tasks = []
    for i, t in enumerate(_list(obj.get("tasks", []), where + ".tasks")):
        _fields(t, f"{where}.tasks[{i}]", {"id", "cell"})
        tasks.append((_str(t["id"], f"{where}.tasks[{i}].id"), _cell(t["cell"], f"{where}.tasks[{i}].cell")))
    obstacles = []
    for i, o in enumerate(_list(obj.get("obstacles", []), where + ".obstacles")):
        _fields(o, f"{where}.obstacles[{i}]", {"step", "cell"})
        obstacles.append((_int(o["step"], f"{where}.obstacles[{i}].step"), _cell(o["cell"], f"{where}.obstacles[{i}].cell")))
    hp = obj.get("human_policy", W.APPROVE_ALL)
    if isinstance(hp, dict):
        _fields(hp, where + ".human_policy", {"script"})
        policy = W.HumanPolicy.scripted(_list(hp["script"], where + ".human_policy.script"))
    else:
        policy = W.HumanPolicy(_str(hp, where + ".human_policy"))
    schedule = []
    for i, s in enumerate(_list(obj.get("mode_schedule", []), where + ".mode_schedule")):
        _fields(s, f"{where}.mode_schedule[{i}]", {"from", "mode"}, {"to"})
        w = f"{where}.mode_schedule[{i}]"
        end = s.get("to")
        schedule.append(W.ModeSpan(_int(s["from"], w + ".from"), None if end is None else _int(end, w + ".to"), _str(s["mode"], w + ".mode")))
    grid = _cell(obj.get("grid", [4, 4]), where + ".grid")
    return W.SwarmConfig(
        grid=tuple(grid),
        drones=_int(obj.get("drones", 1), where + ".drones"),
        tasks=tasks,
        obstacles=obstacles,
        human_policy=policy,
        seed=_int(obj.get("seed", 0), where + ".seed"),
        mode_schedule=schedule,
    )


def _cell(obj, where: str) -> tuple:
    items = _list(obj, where)
    if len(items) != 2:
        raise NetFileError(f"{where}: expected [x, y]")
    return tuple(_int(v, where) for v in items)


def _lam(obj, where: str) -> L.LamConfig:
    _fields(obj, where, {"kind", "action_alphabet", "demonstrations"}, {"repetitions"})
    alphabet = [_str(a, where + ".action_alphabet") for a in _list(obj["action_alphabet"], where + ".action_alphabet")]
    demos = [
        [_str(a, f"{where}.demonstrations[{i}]") for a in _list(d, f"{where}.demonstrations[{i}]")]
        for i, d in enumerate(_list(obj["demonstrations"], where + ".demonstrations"))
    ]
    return L.LamConfig(
        action_alphabet=alphabet,
        demonstrations=demos,
        repetitions=_int(obj.get("repetitions", 1), where + ".repetitions"),
    )


def build_scenario_net(config) -> CommSpaceNet:
    if isinstance(config, W.SwarmConfig):
        return W.build_swarm_net(config)
    return L.build_lam_net(config)


def scenario_to_json(config) -> dict:
    if isinstance(config, L.LamConfig):
        return {
            "kind": "lam",
            "action_alphabet": list(config.action_alphabet),
            "demonstrations": [list(d) for d in config.demonstrations],
            "repetitions": config.repetitions,
        }
    hp = config.human_policy
    policy = {"script": ["approve" if d else "deny" for d in hp.script]} if hp.kind == W.SCRIPT else hp.kind
    return {
        "kind": "swarm",
        "grid": list(config.grid),
        "drones": config.drones,
        "tasks": [{"id": t, "cell": list(c)} for t, c in config.tasks],
        "obstacles": [{"step": s, "cell": list(c)} for s, c in config.obstacles],
        "human_policy": policy,
        "seed": config.seed,
        "mode_schedule": [{"from": s.start, "to": s.end, "mode": s.mode} for s in config.mode_schedule],
    }


# -- writing -----------------------------------------------------------------


def _colorset_json(cs: ColorSet) -> dict:
    out = {"name": cs.name, "kind": cs.kind}
    if cs.kind == "int-range":
        out.update(lo=cs.lo, hi=cs.hi)
    elif cs.kind == "enum":
        out["symbols"] = list(cs.symbols)
    elif cs.kind == "product":
        out["components"] = list(cs.components)
    return out


def netfile_dict(csnet: CommSpaceNet, groups=(), scenario=None) -> dict:
    """Canonical document for ``csnet``: elements sorted by id/name."""
    net, sp = csnet.net, csnet.spaces
    doc: dict = {"version": VERSION}
    doc["colorsets"] = [_colorset_json(net.colorsets[n]) for n in sorted(net.colorsets)]
    doc["places"] = [
        {"id": p.id, "name": p.name, "colorset": p.colorset, "space": sp.places[p.id].value}
        for p in (net.places[k] for k in sorted(net.places))
    ]
    doc["transitions"] = [
        {
            "id": t.id,
            "name": t.name,
            "space": sp.transitions[t.id].value,
            "inputs": [{"place": p, "pattern": T.format_term(x)} for p, x in t.inputs],
            "outputs": [{"place": p, "expr": T.format_term(x)} for p, x in t.outputs],
            "guard": T.format_guard(t.guard),
        }
        for t in (net.transitions[k] for k in sorted(net.transitions))
    ]
    doc["initial_marking"] = {p: tokens for p, tokens in net.canonical(net.initial)}
    if csnet.human:
        doc["human"] = [{"approve": a, "deny": d} for a, d in csnet.human]
    if groups:
        doc["groups"] = [
            {
                "id": g.id,
                "topic": g.topic,
                "st": g.st,
                "members": [
                    {"id": a, "st": g.agents[a].st, "topics": sorted(g.agents[a].topics)} for a in g.members()
                ],
            }
            for g in groups
        ]
    if scenario is not None:
        doc["scenario"] = scenario_to_json(scenario)
    return doc


def dump_netfile(csnet: CommSpaceNet, groups=(), scenario=None) -> str:
    return json.dumps(netfile_dict(csnet, groups, scenario), indent=2) + "\n"


def net_digest(csnet: CommSpaceNet) -> str:
    data = json.dumps(netfile_dict(csnet), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(data.encode()).hexdigest()


def write_trace(out: TextIO, trace: Trace, csnet: CommSpaceNet) -> None:
    """JSON Lines: a header record, then one record per fired event."""
    header = {"seed": trace.seed, "policy": trace.policy, "net_digest": net_digest(csnet)}
    out.write(json.dumps(header) + "\n")
    for s in trace.steps:
        rec = {
            "step": s.index,
            "transition": s.transition,
            "binding": {k: to_json(s.binding[k]) for k in sorted(s.binding)},
            "marking_digest": s.digest,
        }
        out.write(json.dumps(rec) + "\n")


def read_trace(text: str) -> tuple[dict, list[dict]]:
    lines = [json.loads(line) for line in text.splitlines() if line.strip()]
    if not lines:
        raise NetFileError("empty trace file")
    return lines[0], lines[1:]


def load_config(path: Optional[str]):
    """Scenario config from a bare config document or a net document's
    ``scenario`` section."""
    with open(path, encoding="utf-8") as f:
        text = f.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise NetFileError(e.msg, e.lineno, e.colno) from None
    if isinstance(doc, dict) and "version" in doc:
        parsed = parse_netfile(text)
        if parsed.scenario is None:
            raise NetFileError("document has no scenario section")
        return parsed.scenario
    return parse_scenario(doc)
