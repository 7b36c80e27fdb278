"""Topic-scoped group agents: membership compartments and sequenced delivery."""

from __future__ import annotations

import enum
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from .colors import ColorSet, ColorValue, val
from .commspace import CommSpaceNet
from .net import Marking, Net, Place, Transition
from .terms import TupleTerm, Var

log = logging.getLogger(__name__)

ON = "ON"
OFF = "OFF"


class AlreadyMember(Exception):
    pass


class NotMember(Exception):
    pass


class SenderNotMember(NotMember):
    pass


class Outcome(enum.Enum):
    ADDED_ACTIVE = "added-active"
    ADDED_NONACTIVE = "added-nonactive"
    NOT_CONCERNED = "not-concerned"
    DELIVERED = "delivered"
    DROPPED = "dropped"
    REMOVED = "removed"
    NO_EFFECT = "no-effect"
    MOVED_TO_ACTIVE = "moved-to-active"
    MOVED_TO_NONACTIVE = "moved-to-nonactive"
    UNCHANGED = "unchanged"


@dataclass(frozen=True)
class Message:
    seq: int
    sender: str
    topic: str
    payload: ColorValue


@dataclass(eq=False)
class AgentRef:
    id: str
    st: str = ON
    topics: frozenset = frozenset()
    buffer: deque = field(default_factory=deque)

    def __post_init__(self):
        self.topics = frozenset(self.topics)

    def add_to_buffer(self, m: Message) -> None:
        if self.buffer and self.buffer[-1].seq >= m.seq:
            raise ValueError("buffer must stay ordered by sequence number")
        self.buffer.append(m)


@dataclass(frozen=True)
class Event:
    outcome: Outcome
    agent: Optional[str] = None
    seq: Optional[int] = None


@dataclass(eq=False)
class GroupAgent:
    """Membership registry for one topic.

    Members live in exactly one of two compartments, ``cmp_active`` or
    ``cmp_nonactive``.  Operations mutate the group in place and return an
    :class:`Outcome`; every outcome is also appended to ``events``.
    """

    id: str
    topic: str
    st: str = ON
    cmp_active: set = field(default_factory=set)
    cmp_nonactive: set = field(default_factory=set)
    next_seq: int = 0
    agents: dict = field(default_factory=dict)
    events: list = field(default_factory=list)

    def is_member(self, agent_id: str) -> bool:
        return agent_id in self.cmp_active or agent_id in self.cmp_nonactive

    def members(self) -> list[str]:
        return sorted(self.cmp_active | self.cmp_nonactive)

    def _record(self, outcome: Outcome, agent=None, seq=None) -> Outcome:
        self.events.append(Event(outcome, agent, seq))
        return outcome

    def register(self, agent: AgentRef) -> Outcome:
        if self.is_member(agent.id):
            raise AlreadyMember(agent.id)
        if self.topic not in agent.topics:
            return self._record(Outcome.NOT_CONCERNED, agent.id)
        self.agents[agent.id] = agent
        if agent.st == ON:
            self.cmp_active.add(agent.id)
            return self._record(Outcome.ADDED_ACTIVE, agent.id)
        self.cmp_nonactive.add(agent.id)
        return self._record(Outcome.ADDED_NONACTIVE, agent.id)

    def deliver(self, sender: str, topic: str, payload: Any) -> list[str]:
        """Sequence a message and append it to every active member's buffer.

        Returns the recipient ids (sorted).  When the group is OFF or the
        topic differs the message is dropped: no sequence number is used and
        the recipient list is empty.
        """
        if not self.is_member(sender):
            raise SenderNotMember(sender)
        if self.st != ON or topic != self.topic:
            log.debug("group %s dropped message from %s on %s", self.id, sender, topic)
            self._record(Outcome.DROPPED, sender)
            return []
        m = Message(self.next_seq, sender, topic, val(payload))
        self.next_seq += 1
        recipients = sorted(self.cmp_active)
        for aid in recipients:
            self.agents[aid].add_to_buffer(m)
        self._record(Outcome.DELIVERED, sender, m.seq)
        return recipients

    def deregister(self, agent_id: str) -> Outcome:
        # only active members can leave
        if agent_id in self.cmp_active:
            self.cmp_active.remove(agent_id)
            del self.agents[agent_id]
            return self._record(Outcome.REMOVED, agent_id)
        return self._record(Outcome.NO_EFFECT, agent_id)

    def switch_cmp(self, agent: AgentRef) -> Outcome:
        if not self.is_member(agent.id):
            raise NotMember(agent.id)
        if agent.st == OFF and agent.id in self.cmp_active:
            self.cmp_active.remove(agent.id)
            self.cmp_nonactive.add(agent.id)
            return self._record(Outcome.MOVED_TO_NONACTIVE, agent.id)
        if agent.st == ON and agent.id in self.cmp_nonactive:
            self.cmp_nonactive.remove(agent.id)
            self.cmp_active.add(agent.id)
            return self._record(Outcome.MOVED_TO_ACTIVE, agent.id)
        return self._record(Outcome.UNCHANGED, agent.id)

    def check_invariants(self) -> list[str]:
        problems = []
        if self.cmp_active & self.cmp_nonactive:
            problems.append("compartments overlap")
        for aid in self.members():
            agent = self.agents.get(aid)
            if agent is None:
                problems.append(f"{aid} has no agent record")
                continue
            if self.topic not in agent.topics:
                problems.append(f"{aid} is not concerned with {self.topic}")
            want = ON if aid in self.cmp_active else OFF
            if agent.st != want:
                problems.append(f"{aid} has st={agent.st} but sits in the {want} compartment")
        for aid, agent in self.agents.items():
            seqs = [m.seq for m in agent.buffer]
            if seqs != sorted(seqs):
                problems.append(f"{aid} buffer out of order")
        return problems


# -- net compilation ---------------------------------------------------------

PUBLISH = "publish"


def inbox(agent_id: str) -> str:
    return f"inbox_{agent_id}"


def compile_group_to_net(
    group: GroupAgent,
    payload: Optional[ColorSet] = None,
    topics: Iterable[str] = (),
    published: Iterable[tuple[str, Any]] = (),
) -> CommSpaceNet:
    """Net fragment that broadcasts published messages to active members.

    Messages are ``(topic, payload)`` tokens in the surface ``publish`` place.
    Active members form a relay chain: each member's delivery transition
    takes the message from the previous stage, drops a copy in the member's
    observation inbox and hands it to the next stage.  Every delivery
    transition is guarded on topic equality.  ``published`` seeds the
    publish place.
    """
    payload = payload or ColorSet.unit("PAYLOAD")
    topic_syms = sorted({group.topic, *topics, *(t for t, _ in published)})
    colorsets = [
        payload,
        ColorSet.enum("TOPIC", topic_syms),
        ColorSet.product("MSG", ["TOPIC", payload.name]),
    ]
    places = [Place(PUBLISH, "MSG", "published messages")]
    spaces_p = {PUBLISH: "surface"}
    for aid in group.members():
        places.append(Place(inbox(aid), "MSG", f"inbox of {aid}"))
        spaces_p[inbox(aid)] = "observation"

    transitions, spaces_t = [], {}
    active = sorted(group.cmp_active) if group.st == ON else []
    source = PUBLISH
    msg = TupleTerm((Var("t"), Var("p")))
    for i, aid in enumerate(active):
        outputs = [(inbox(aid), msg)]
        nxt = None
        if i + 1 < len(active):
            nxt = f"relay_{aid}"
            places.append(Place(nxt, "MSG", f"relay after {aid}"))
            spaces_p[nxt] = "observation"
            outputs.append((nxt, msg))
        tid = f"deliver_{aid}"
        transitions.append(
            Transition(tid, [(source, msg)], outputs, guard=f"(= t '{group.topic})", name=f"deliver to {aid}")
        )
        spaces_t[tid] = "observation"
        source = nxt

    initial = Marking({PUBLISH: [(t, p) for t, p in published]})
    net = Net.build(colorsets, places, transitions, initial)
    return CommSpaceNet.build(net, spaces_p, spaces_t)


def inbox_contents(csnet: CommSpaceNet, marking: Marking, agent_id: str) -> dict:
    """Multiset of ``(topic, payload)`` values in an agent's inbox."""
    return {(v.elements[0].symbol, v.elements[1]): n for v, n in marking.bag(inbox(agent_id)).items()}


def buffer_contents(agent: AgentRef) -> dict:
    out: dict = {}
    for m in agent.buffer:
        k = (m.topic, m.payload)
        out[k] = out.get(k, 0) + 1
    return out

