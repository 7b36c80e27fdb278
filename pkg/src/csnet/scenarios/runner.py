"""Running scenario nets and summarizing what happened."""

from __future__ import annotations

import random
import sys
from dataclasses import dataclass, field
from typing import Optional, TextIO, Union

from ..colors import ColorValue, Tuple
from ..commspace import CommSpaceNet
from ..net import (
    MAX_STEPS,
    QUIESCENT,
    RANDOM,
    Trace,
    Transition,
    TraceStep,
    choose,
    enabled_transitions,
    fire,
)
from ..terms import evaluate
from . import lam as L
from . import swarm as W


class ScriptExhausted(Exception):
    pass


class InputClosed(Exception):
    pass


@dataclass
class Decision:
    approved: bool
    request: ColorValue

    @property
    def token(self) -> Optional[ColorValue]:
        """The approval token (the request itself) or None on denial."""
        return self.request if self.approved else None


class HumanChannel:
    """Stateful view of a human policy: remembers how much script is used."""

    def __init__(self, policy: W.HumanPolicy, stdin: Optional[TextIO] = None, prompt: Optional[TextIO] = None):
        self.policy = policy
        self.stdin = stdin
        self.prompt = prompt
        self.cursor = 0

    def decide(self, request: ColorValue) -> Decision:
        kind = self.policy.kind
        if kind == W.APPROVE_ALL:
            return Decision(True, request)
        if kind == W.DENY_ALL:
            return Decision(False, request)
        if kind == W.SCRIPT:
            if self.cursor >= len(self.policy.script):
                raise ScriptExhausted(f"no scripted decision for request #{self.cursor + 1}")
            ok = self.policy.script[self.cursor]
            self.cursor += 1
            return Decision(ok, request)
        stdin = self.stdin if self.stdin is not None else sys.stdin
        out = self.prompt if self.prompt is not None else sys.stderr
        while True:
            out.write(f"approve {describe_request(request)}? [y/n] ")
            out.flush()
            line = stdin.readline()
            if not line:
                raise InputClosed("input closed while waiting for an approval")
            answer = line.strip().lower()
            if answer in ("y", "yes"):
                return Decision(True, request)
            if answer in ("n", "no"):
                return Decision(False, request)


def describe_request(request: ColorValue) -> str:
    if isinstance(request, Tuple) and len(request.elements) == 2:
        d, t = request.elements
        return f"drone {d!r} for task {t!r}"
    return repr(request)


def human_decide(policy, request: ColorValue, input_channel: Optional[TextIO] = None) -> Decision:
    """One-shot decision.  Pass a :class:`HumanChannel` to consume a script
    across several requests."""
    if isinstance(policy, HumanChannel):
        return policy.decide(request)
    if isinstance(policy, str):
        policy = W.HumanPolicy(policy)
    return HumanChannel(policy, input_channel).decide(request)


@dataclass
class ScenarioReport:
    scenario: str
    seed: int
    steps: int = 0
    terminal: str = QUIESCENT
    tasks_assigned: int = 0
    approvals_requested: int = 0
    approvals_granted: int = 0
    approvals_denied: int = 0
    assignments: list = field(default_factory=list)
    prediction_accuracy: list = field(default_factory=list)
    trace: Optional[Trace] = None

    def to_dict(self) -> dict:
        out = {
            "scenario": self.scenario,
            "seed": self.seed,
            "steps": self.steps,
            "terminal": self.terminal,
            "tasks_assigned": self.tasks_assigned,
            "approvals_requested": self.approvals_requested,
            "approvals_granted": self.approvals_granted,
            "approvals_denied": self.approvals_denied,
        }
        if self.scenario == "swarm":
            out["assignments"] = [[d, t] for d, t in self.assignments]
        else:
            out["prediction_accuracy"] = list(self.prediction_accuracy)
        return out


def _scheduled_events(csnet: CommSpaceNet, config: W.SwarmConfig, events, step: int, mode_now: str):
    """Filter swarm events by the step-indexed schedule.

    Returns ``(forced, candidates)``: a mode switch that must happen now, or
    the events allowed at this step.  Obstacles whose step has not come yet
    are held back unless nothing else can happen.
    """
    want = config.mode_at(step)
    switches = [e for e in events if e[0] in (W.SWITCH_TO_MAS, W.SWITCH_TO_CENTAURIAN)]
    rest = [e for e in events if e[0] not in (W.SWITCH_TO_MAS, W.SWITCH_TO_CENTAURIAN)]
    if want != mode_now and rest:
        target = W.SWITCH_TO_MAS if want == W.MAS else W.SWITCH_TO_CENTAURIAN
        for e in switches:
            if e[0] == target:
                return e, []
    due = {k: s for k, (s, _) in enumerate(config.ordered_obstacles())}

    def deferred(e):
        return e[0] == W.SENSE_OBSTACLE and due[e[1]["o"].elements[0].value] > step

    ready = [e for e in rest if not deferred(e)]
    if not ready and rest:
        # nothing else can happen: time jumps to the next obstacle
        ready = [min(rest, key=lambda e: due[e[1]["o"].elements[0].value])]
    return None, ready


def simulate(
    csnet: CommSpaceNet,
    policy: str = RANDOM,
    seed: int = 0,
    max_steps: int = 10_000,
    human: Optional[HumanChannel] = None,
    schedule: Optional[W.SwarmConfig] = None,
) -> Trace:
    """Run ``csnet`` from its initial marking.

    With ``human`` set, each pending approve/deny pair counts as a single
    candidate event; when it is picked the human channel decides which of
    the two fires.  With ``schedule`` set, obstacle sensing and coupling-mode
    switches follow the swarm config's step indices.
    """
    net = csnet.net
    rng = random.Random(seed)
    decision_pairs = {}
    if human is not None:
        for approve, deny in csnet.human:
            for t in (approve, deny):
                if t is not None:
                    decision_pairs[t] = (approve, deny)

    trace = Trace(seed, policy)
    m = net.initial
    mode_now = m[W.MODE][0].symbol if schedule is not None and m.count(W.MODE) else None
    while True:
        if len(trace.steps) >= max_steps:
            trace.terminal = MAX_STEPS if enabled_transitions(net, m) else QUIESCENT
            break
        events = enabled_transitions(net, m)
        if schedule is not None:
            forced, events = _scheduled_events(csnet, schedule, events, len(trace.steps), mode_now)
            if forced is not None:
                events = [forced]
        seen, candidates = set(), []
        for tid, b in events:
            if tid in decision_pairs:
                key = (decision_pairs[tid], tuple(sorted(b.items())))
                if key in seen:
                    continue
                seen.add(key)
            candidates.append((tid, b))
        event = choose(candidates, policy, rng)
        if event is None:
            trace.terminal = QUIESCENT
            break
        tid, b = event
        if tid in decision_pairs:
            approve, deny = decision_pairs[tid]
            decision = human.decide(_request_token(net.transition(tid), b))
            chosen = approve if decision.approved else deny
            if chosen is None:
                raise ValueError(f"net has no transition for a {'grant' if decision.approved else 'denial'}")
            tid = chosen
        m = fire(net, m, tid, b)
        if tid == W.SWITCH_TO_MAS:
            mode_now = W.MAS
        elif tid == W.SWITCH_TO_CENTAURIAN:
            mode_now = W.CENTAURIAN
        trace.steps.append(TraceStep(len(trace.steps), tid, b, net.digest(m)))
    trace.final = m
    return trace


def run_scenario(
    csnet: CommSpaceNet,
    config: Union[W.SwarmConfig, L.LamConfig],
    policy: str = RANDOM,
    seed: Optional[int] = None,
    input_channel: Optional[TextIO] = None,
    prompt: Optional[TextIO] = None,
    max_steps: int = 10_000,
) -> ScenarioReport:
    """Run a scenario net to quiescence (or ``max_steps``) and count events.

    Swarm human decision points are resolved by the config's human policy
    rather than by the firing policy.
    """
    if seed is None:
        seed = getattr(config, "seed", 0)
    if isinstance(config, W.SwarmConfig):
        human = HumanChannel(config.human_policy, input_channel, prompt)
        trace = simulate(csnet, policy, seed, max_steps, human=human, schedule=config)
    else:
        trace = simulate(csnet, policy, seed, max_steps)
    return _report(config, trace)


def _request_token(t: Transition, binding: dict) -> ColorValue:
    """What the human is asked about: the token on the decision's input arc."""
    if len(t.inputs) == 1:
        return evaluate(t.inputs[0][1], binding)
    return Tuple(tuple(binding[k] for k in sorted(binding)))


def _report(config, trace: Trace) -> ScenarioReport:
    if isinstance(config, W.SwarmConfig):
        assignments = W.assigned_tasks(trace.final)
        return ScenarioReport(
            "swarm",
            trace.seed,
            steps=len(trace),
            terminal=trace.terminal,
            tasks_assigned=len(assignments),
            approvals_requested=trace.count(W.ROUTE_REQUEST),
            approvals_granted=trace.count(W.HUMAN_APPROVE),
            approvals_denied=trace.count(W.HUMAN_DENY),
            assignments=assignments,
            trace=trace,
        )
    hits = [s.binding["i"].value for s in trace.steps if s.transition == L.COMPARE_HIT]
    return ScenarioReport(
        "lam",
        trace.seed,
        steps=len(trace),
        terminal=trace.terminal,
        prediction_accuracy=L.accuracy_by_repetition(config, hits),
        trace=trace,
    )
