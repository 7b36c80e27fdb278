"""Drone swarm coordination with LLM planning and human approval gating.

Net topology (one reading of the semi-centralized control flow)::

    surface        sensor --emit--> uplink            obstacle_feed --sense_obstacle--> obstacle_raw
                   hmi_requests --human_approve/human_deny--> hmi_decisions
    observation    uplink --parse_telemetry--> telemetry
                   proposals --route_request--> hmi_requests          (Centaurian mode)
                   hmi_decisions --parse_approval--> approval
                   hmi_decisions --parse_denial--> denials
                   obstacle_raw + world --parse_obstacle_k--> world' + cycle
    computation    telemetry + world --register_d--> world' + cycle
                   cycle + world --plan_*--> world' + planning + proposals   (LLM stand-in)
                   planning + approval --assign--> assigned                  (joint gate)
                   planning + proposals --assign_auto--> assigned            (MAS mode)
                   denials + planning + world --release_d_t--> world'

``world`` holds a single token ``(phase, drone statuses..., task statuses...)``.
The planner has no arithmetic to run on, so the greedy plan is compiled
ahead of time: one ``plan_*`` transition per (phase, idle drones, open
tasks) combination, each emitting the proposals :func:`llm_stub_plan`
computes for that world.  A denied proposal is released back to the world
and stays unassigned until the next planning cycle (a drone registration
or an obstacle report).
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..colors import UNIT, ColorSet, ColorValue, Int, Sym, Tuple
from ..commspace import CommSpaceNet
from ..net import Marking, Net, Place, Transition
from ..terms import TRUE, And, Cmp, Lit, TupleTerm, Var

MAS = "MAS"
CENTAURIAN = "Centaurian"
MODES = (MAS, CENTAURIAN)

APPROVE_ALL = "approve-all"
DENY_ALL = "deny-all"
SCRIPT = "script"
INTERACTIVE = "interactive"

OFFLINE, IDLE, PENDING = "offline", "idle", "pending"
OPEN = "open"

MAX_ENTITIES = 14

# place ids
SENSOR, UPLINK, TELEMETRY = "sensor", "uplink", "telemetry"
OBSTACLE_FEED, OBSTACLE_RAW = "obstacle_feed", "obstacle_raw"
HMI_REQUESTS, HMI_DECISIONS = "hmi_requests", "hmi_decisions"
WORLD, CYCLE, MODE = "world", "cycle", "mode"
PLANNING, PROPOSALS, APPROVAL, DENIALS, ASSIGNED = "planning", "proposals", "approval", "denials", "assigned"

# transition ids
ASSIGN_GATE = "assign"
ASSIGN_AUTO = "assign_auto"
ROUTE_REQUEST = "route_request"
HUMAN_APPROVE = "human_approve"
HUMAN_DENY = "human_deny"
SENSE_OBSTACLE = "sense_obstacle"
SWITCH_TO_MAS = "switch_to_mas"
SWITCH_TO_CENTAURIAN = "switch_to_centaurian"


class InvalidConfig(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class HumanPolicy:
    kind: str = APPROVE_ALL
    script: tuple = ()

    @classmethod
    def scripted(cls, decisions: Sequence) -> "HumanPolicy":
        return cls(SCRIPT, tuple(_as_decision(d) for d in decisions))


def _as_decision(d) -> bool:
    if isinstance(d, bool):
        return d
    text = str(d).strip().lower()
    if text in ("approve", "y", "yes"):
        return True
    if text in ("deny", "n", "no"):
        return False
    raise InvalidConfig("human_policy", f"unknown scripted decision {d!r}")


@dataclass
class ModeSpan:
    start: int
    end: Optional[int]  # exclusive; None = open-ended
    mode: str

    def covers(self, step: int) -> bool:
        return self.start <= step and (self.end is None or step < self.end)


@dataclass
class SwarmConfig:
    grid: tuple = (4, 4)
    drones: int = 1
    tasks: list = field(default_factory=list)  # [(task id, (x, y))]
    obstacles: list = field(default_factory=list)  # [(step index, (x, y))]
    human_policy: HumanPolicy = field(default_factory=HumanPolicy)
    seed: int = 0
    mode_schedule: list = field(default_factory=list)  # [ModeSpan]

    def __post_init__(self):
        self.grid = tuple(self.grid)
        self.tasks = [(str(t), tuple(c)) for t, c in self.tasks]
        self.obstacles = [(int(s), tuple(c)) for s, c in self.obstacles]
        if isinstance(self.human_policy, str):
            self.human_policy = HumanPolicy(self.human_policy)
        elif isinstance(self.human_policy, (list, tuple)):
            self.human_policy = HumanPolicy.scripted(self.human_policy)
        self.mode_schedule = [s if isinstance(s, ModeSpan) else ModeSpan(*s) for s in self.mode_schedule]

    # -- derived facts ---------------------------------------------------

    def drone_cell(self, d: int) -> tuple[int, int]:
        """Drones start row-major from the origin."""
        w = self.grid[0]
        return (d % w, d // w)

    def ordered_obstacles(self) -> list[tuple[int, tuple]]:
        return sorted(self.obstacles, key=lambda o: o[0])

    def mode_at(self, step: int) -> str:
        for span in self.mode_schedule:
            if span.covers(step):
                return span.mode
        return CENTAURIAN

    def modes(self) -> set[str]:
        found = {s.mode for s in self.mode_schedule}
        if not self.mode_schedule or any(
            not any(s.covers(i) for s in self.mode_schedule) for i in range(self._horizon())
        ):
            found.add(CENTAURIAN)
        return found

    def _horizon(self) -> int:
        ends = [s.end for s in self.mode_schedule if s.end is not None]
        starts = [s.start for s in self.mode_schedule]
        return max(ends + starts + [0]) + 1

    def validate(self) -> None:
        if len(self.grid) != 2 or self.grid[0] < 1 or self.grid[1] < 1:
            raise InvalidConfig("grid", "needs positive (width, height)")
        w, h = self.grid
        if self.drones < 1:
            raise InvalidConfig("drones", "at least one drone is required")
        if self.drones > w * h:
            raise InvalidConfig("drones", "more drones than grid cells")
        ids = [t for t, _ in self.tasks]
        if len(set(ids)) != len(ids):
            raise InvalidConfig("tasks", "duplicate task ids")
        for t, (x, y) in self.tasks:
            if not (0 <= x < w and 0 <= y < h):
                raise InvalidConfig("tasks", f"task {t} at {(x, y)} is outside the grid")
            if not t.replace("_", "a").isalnum() or not t[0].isalpha():
                raise InvalidConfig("tasks", f"task id {t!r} must be an identifier")
        for s, (x, y) in self.obstacles:
            if s < 0 or not (0 <= x < w and 0 <= y < h):
                raise InvalidConfig("obstacles", f"bad obstacle {(s, (x, y))}")
        if self.drones + len(self.tasks) > MAX_ENTITIES:
            raise InvalidConfig("tasks", f"drones + tasks must not exceed {MAX_ENTITIES}")
        hp = self.human_policy
        if hp.kind not in (APPROVE_ALL, DENY_ALL, SCRIPT, INTERACTIVE):
            raise InvalidConfig("human_policy", f"unknown policy {hp.kind!r}")
        for span in self.mode_schedule:
            if span.mode not in MODES:
                raise InvalidConfig("mode_schedule", f"unknown mode {span.mode!r}")
            if span.start < 0 or (span.end is not None and span.end <= span.start):
                raise InvalidConfig("mode_schedule", f"bad step range {span.start}..{span.end}")


# -- the deterministic planner ----------------------------------------------


def grid_distance(grid, start, goal, blocked=frozenset()) -> Optional[int]:
    """Shortest 4-neighbour path length avoiding ``blocked`` cells.

    With no obstacles this is the Manhattan distance.  None if unreachable.
    """
    if goal in blocked:
        return None
    if not blocked:
        return abs(start[0] - goal[0]) + abs(start[1] - goal[1])
    w, h = grid
    seen = {start}
    q = deque([(start, 0)])
    while q:
        (x, y), d = q.popleft()
        if (x, y) == goal:
            return d
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= nx < w and 0 <= ny < h and (nx, ny) not in seen and (nx, ny) not in blocked:
                seen.add((nx, ny))
                q.append(((nx, ny), d + 1))
    return None


@dataclass(frozen=True)
class Proposal:
    drone: int
    task: str
    distance: int


def greedy_plan(grid, drone_cells: dict, task_cells: dict, blocked=frozenset()) -> list[Proposal]:
    """Nearest-idle-drone assignment.

    Pairs are taken in order of (distance, drone id, task id); each drone and
    each task is used at most once.
    """
    pairs = []
    for d, dc in drone_cells.items():
        for t, tc in task_cells.items():
            dist = grid_distance(grid, dc, tc, blocked)
            if dist is not None:
                pairs.append((dist, d, t))
    pairs.sort()
    used_d, used_t, out = set(), set(), []
    for dist, d, t in pairs:
        if d in used_d or t in used_t:
            continue
        used_d.add(d)
        used_t.add(t)
        out.append(Proposal(d, t, dist))
    return out


def world_token(phase: int, drone_status: Sequence[str], task_status: Sequence[str]) -> ColorValue:
    return Tuple((Int(phase), *(Sym(s) for s in drone_status), *(Sym(s) for s in task_status)))


def decode_world(token: ColorValue, config: SwarmConfig) -> tuple[int, list[str], list[str]]:
    els = token.elements
    n = config.drones
    return els[0].value, [e.symbol for e in els[1 : 1 + n]], [e.symbol for e in els[1 + n :]]


def llm_stub_plan(world: ColorValue, config: SwarmConfig) -> list[Proposal]:
    """Planning proposals for a parsed world state.

    Idle drones are matched to open tasks greedily by grid distance, taking
    into account the obstacles reported up to the world's phase.
    """
    phase, dstat, tstat = decode_world(world, config)
    blocked = frozenset(c for _, c in config.ordered_obstacles()[:phase])
    drones = {d: config.drone_cell(d) for d, s in enumerate(dstat) if s == IDLE}
    tasks = {t: c for (t, c), s in zip(config.tasks, tstat) if s == OPEN}
    return greedy_plan(config.grid, drones, tasks, blocked)


# -- net construction --------------------------------------------------------


def build_assign_gate() -> Transition:
    """The joint-token gate: a planning token and an approval token for the
    same task are both required before the task is assigned."""
    return Transition(
        ASSIGN_GATE,
        inputs=[(PLANNING, "(tuple d t)"), (APPROVAL, "(tuple ad at)")],
        outputs=[(ASSIGNED, "(tuple d t)")],
        guard="(= t at)",
        name="Assign Task",
    )


def _world_vars(n_drones: int, n_tasks: int):
    return [Var(f"d{i}") for i in range(n_drones)], [Var(f"t{j}") for j in range(n_tasks)]


def _world_term(phase, dterms, tterms) -> TupleTerm:
    return TupleTerm((phase, *dterms, *tterms))


def build_swarm_net(config: SwarmConfig) -> CommSpaceNet:
    config.validate()
    w, h = config.grid
    n_d, n_t = config.drones, len(config.tasks)
    obstacles = config.ordered_obstacles()
    n_o = len(obstacles)
    task_ids = [t for t, _ in config.tasks]
    modes = config.modes()

    colorsets = [
        ColorSet.unit("UNIT"),
        ColorSet.int_range("DRONE", 0, n_d - 1),
        ColorSet.enum("TASK", task_ids or ["none"]),
        ColorSet.int_range("X", 0, w - 1),
        ColorSet.int_range("Y", 0, h - 1),
        ColorSet.product("CELL", ["X", "Y"]),
        ColorSet.product("READING", ["DRONE", "CELL"]),
        ColorSet.enum("DSTAT", [OFFLINE, IDLE, PENDING]),
        ColorSet.enum("TSTAT", [OPEN, PENDING]),
        ColorSet.int_range("PHASE", 0, n_o),
        ColorSet.product("WORLD", ["PHASE"] + ["DSTAT"] * n_d + ["TSTAT"] * n_t),
        ColorSet.product("PLAN", ["DRONE", "TASK"]),
        ColorSet.enum("VERDICT", ["yes", "no"]),
        ColorSet.product("DECISION", ["DRONE", "TASK", "VERDICT"]),
        ColorSet.enum("MODE", [MAS, CENTAURIAN]),
        ColorSet.int_range("OBSIDX", 0, max(n_o - 1, 0)),
        ColorSet.product("OBSTACLE", ["OBSIDX", "CELL"]),
    ]
    S, O, C = "surface", "observation", "computation"
    place_defs = [
        (SENSOR, "READING", S, "drone sensor readings"),
        (UPLINK, "READING", S, "emitted telemetry"),
        (OBSTACLE_FEED, "OBSTACLE", S, "obstacles in the environment"),
        (OBSTACLE_RAW, "OBSTACLE", S, "raw obstacle detections"),
        (HMI_REQUESTS, "PLAN", S, "approval requests shown to the operator"),
        (HMI_DECISIONS, "DECISION", S, "operator decisions"),
        (TELEMETRY, "DRONE", O, "parsed telemetry"),
        (WORLD, "WORLD", C, "parsed world state"),
        (CYCLE, "UNIT", C, "planning cycle triggers"),
        (MODE, "MODE", C, "coupling mode"),
        (PLANNING, "PLAN", C, "LLM planning tokens"),
        (PROPOSALS, "PLAN", C, "proposals awaiting dispatch"),
        (APPROVAL, "PLAN", C, "human approval tokens"),
        (DENIALS, "PLAN", C, "human denials"),
        (ASSIGNED, "PLAN", C, "assigned tasks"),
    ]
    places = [Place(pid, cs, name) for pid, cs, _, name in place_defs]
    pspace = {pid: sp for pid, _, sp, _ in place_defs}

    transitions: list[Transition] = []
    tspace: dict[str, str] = {}

    def add(t: Transition, space: str) -> None:
        transitions.append(t)
        tspace[t.id] = space

    add(Transition("emit", [(SENSOR, "r")], [(UPLINK, "r")], name="emit telemetry"), S)
    add(Transition("parse_telemetry", [(UPLINK, "(tuple d c)")], [(TELEMETRY, "d")], name="parse telemetry"), O)
    add(Transition(SENSE_OBSTACLE, [(OBSTACLE_FEED, "o")], [(OBSTACLE_RAW, "o")], name="sense obstacle"), S)

    dv, tv = _world_vars(n_d, n_t)
    ph = Var("ph")
    for i in range(n_d):
        pat = list(dv)
        pat[i] = Lit(Sym(OFFLINE))
        out = list(dv)
        out[i] = Lit(Sym(IDLE))
        add(
            Transition(
                f"register_{i}",
                [(TELEMETRY, Lit(Int(i))), (WORLD, _world_term(ph, pat, tv))],
                [(WORLD, _world_term(ph, out, tv)), (CYCLE, Lit(UNIT))],
                name=f"register drone {i}",
            ),
            C,
        )

    for k, (_, cell) in enumerate(obstacles):
        add(
            Transition(
                f"parse_obstacle_{k}",
                [(OBSTACLE_RAW, TupleTerm((Lit(Int(k)), Var("c")))), (WORLD, _world_term(Lit(Int(k)), dv, tv))],
                [(WORLD, _world_term(Lit(Int(k + 1)), dv, tv)), (CYCLE, Lit(UNIT))],
                name=f"parse obstacle {k}",
            ),
            O,
        )

    for phase in range(n_o + 1):
        for idle in _subsets(n_d):
            for open_ in _subsets(n_t):
                add(_planner(config, phase, idle, open_, dv, tv), C)

    if CENTAURIAN in modes:
        add(
            Transition(
                ROUTE_REQUEST,
                [(PROPOSALS, "p"), (MODE, f"'{CENTAURIAN}")],
                [(HMI_REQUESTS, "p"), (MODE, f"'{CENTAURIAN}")],
                name="route approval request",
            ),
            O,
        )
        add(build_assign_gate(), C)
    if MAS in modes:
        add(
            Transition(
                ASSIGN_AUTO,
                [(PLANNING, "(tuple d t)"), (PROPOSALS, "(tuple d t)"), (MODE, f"'{MAS}")],
                [(ASSIGNED, "(tuple d t)"), (MODE, f"'{MAS}")],
                name="assign autonomously",
            ),
            C,
        )
    if len(modes) > 1:
        add(Transition(SWITCH_TO_MAS, [(MODE, f"'{CENTAURIAN}")], [(MODE, f"'{MAS}")], name="switch to MAS"), C)
        add(
            Transition(SWITCH_TO_CENTAURIAN, [(MODE, f"'{MAS}")], [(MODE, f"'{CENTAURIAN}")], name="switch to Centaurian"),
            C,
        )

    kind = config.human_policy.kind
    human = []
    if kind != DENY_ALL:
        add(
            Transition(HUMAN_APPROVE, [(HMI_REQUESTS, "(tuple d t)")], [(HMI_DECISIONS, "(tuple d t 'yes)")], name="operator approves"),
            S,
        )
    if kind != APPROVE_ALL:
        add(
            Transition(HUMAN_DENY, [(HMI_REQUESTS, "(tuple d t)")], [(HMI_DECISIONS, "(tuple d t 'no)")], name="operator denies"),
            S,
        )
    human.append((HUMAN_APPROVE if kind != DENY_ALL else None, HUMAN_DENY if kind != APPROVE_ALL else None))
    add(Transition("parse_approval", [(HMI_DECISIONS, "(tuple d t 'yes)")], [(APPROVAL, "(tuple d t)")], name="parse approval"), O)
    add(Transition("parse_denial", [(HMI_DECISIONS, "(tuple d t 'no)")], [(DENIALS, "(tuple d t)")], name="parse denial"), O)

    for i in range(n_d):
        for j, tid in enumerate(task_ids):
            pat_d, pat_t = list(dv), list(tv)
            pat_d[i], pat_t[j] = Lit(Sym(PENDING)), Lit(Sym(PENDING))
            out_d, out_t = list(dv), list(tv)
            out_d[i], out_t[j] = Lit(Sym(IDLE)), Lit(Sym(OPEN))
            plan = TupleTerm((Lit(Int(i)), Lit(Sym(tid))))
            add(
                Transition(
                    f"release_{i}_{tid}",
                    [(DENIALS, plan), (PLANNING, plan), (WORLD, _world_term(ph, pat_d, pat_t))],
                    [(WORLD, _world_term(ph, out_d, out_t))],
                    name=f"release drone {i} / task {tid}",
                ),
                C,
            )

    initial = {
        SENSOR: [(d, config.drone_cell(d)) for d in range(n_d)],
        OBSTACLE_FEED: [(k, cell) for k, (_, cell) in enumerate(obstacles)],
        WORLD: [world_token(0, [OFFLINE] * n_d, [OPEN] * n_t)],
        MODE: [config.mode_at(0)],
    }
    net = Net.build(colorsets, places, transitions, Marking(initial))
    return CommSpaceNet.build(net, pspace, tspace, human=human)


def _subsets(n: int):
    for r in range(n + 1):
        yield from itertools.combinations(range(n), r)


def _planner(config: SwarmConfig, phase: int, idle, open_, dv, tv) -> Transition:
    n_d, n_t = config.drones, len(config.tasks)
    dstat = [IDLE if i in idle else PENDING for i in range(n_d)]
    tstat = [OPEN if j in open_ else PENDING for j in range(n_t)]
    proposals = llm_stub_plan(world_token(phase, dstat, tstat), config)
    task_index = {t: j for j, (t, _) in enumerate(config.tasks)}
    busy_d = {p.drone for p in proposals}
    busy_t = {task_index[p.task] for p in proposals}

    pat_d = [Lit(Sym(IDLE)) if i in idle else dv[i] for i in range(n_d)]
    pat_t = [Lit(Sym(OPEN)) if j in open_ else tv[j] for j in range(n_t)]
    conds = [Cmp("!=", dv[i], Lit(Sym(IDLE))) for i in range(n_d) if i not in idle]
    conds += [Cmp("!=", tv[j], Lit(Sym(OPEN))) for j in range(n_t) if j not in open_]
    out_d = [Lit(Sym(PENDING)) if i in busy_d else pat_d[i] for i in range(n_d)]
    out_t = [Lit(Sym(PENDING)) if j in busy_t else pat_t[j] for j in range(n_t)]

    outputs = [(WORLD, _world_term(Lit(Int(phase)), out_d, out_t))]
    for p in proposals:
        tok = TupleTerm((Lit(Int(p.drone)), Lit(Sym(p.task))))
        outputs += [(PLANNING, tok), (PROPOSALS, tok)]
    tag = "d" + "".join(map(str, idle)) + "_t" + "".join(map(str, open_))
    guard = And(tuple(conds)) if conds else TRUE
    return Transition(
        f"plan_p{phase}_{tag}",
        [(CYCLE, Lit(UNIT)), (WORLD, _world_term(Lit(Int(phase)), pat_d, pat_t))],
        outputs,
        guard=guard,
        name=f"LLM plan (phase {phase}, idle {list(idle)}, open {list(open_)})",
    )


def assigned_tasks(marking: Marking) -> list[tuple[int, str]]:
    return sorted((v.elements[0].value, v.elements[1].symbol) for v in marking[ASSIGNED])
