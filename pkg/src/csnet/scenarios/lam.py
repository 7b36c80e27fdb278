"""Action-model feedback loop: perceive, predict, compare, update.

The user's demonstrated actions enter at the surface, are parsed in the
observation space and drive a first-order frequency model held as a single
token in the computation space.  Each observed action makes one full trip
around the loop before the next action is emitted::

    surface       cursor + stream + ticks + ui_ready --emit--> raw
    observation   raw --parse--> parsed            feedback --ack--> ui_ready
    computation   parsed + model --predict_c_x--> prediction + model
                  prediction --compare_hit / compare_miss--> outcome
                  outcome + model + counter --update_c_a--> model' + feedback

Counting without arithmetic uses successor tables: ``ticks`` and ``counter``
hold ``(n, n + 1)`` pairs that transitions consume and put back.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from ..colors import ColorSet, ColorValue, Int, Sym, Tuple
from ..commspace import CommSpaceNet
from ..net import Marking, Net, Place, Transition
from ..terms import TRUE, And, Cmp, Lit, TupleTerm, Var
from .swarm import InvalidConfig

START = "_start"

# place ids
STREAM, CURSOR, TICKS, UI_READY, RAW = "stream", "cursor", "ticks", "ui_ready", "raw"
PARSED, FEEDBACK = "parsed", "feedback"
MODEL, COUNTER, PREDICTION, OUTCOME = "model", "counter", "prediction", "outcome"

COMPARE_HIT, COMPARE_MISS = "compare_hit", "compare_miss"


@dataclass
class LamConfig:
    action_alphabet: list = field(default_factory=list)
    demonstrations: list = field(default_factory=list)
    repetitions: int = 1

    def __post_init__(self):
        if isinstance(self.action_alphabet, ColorSet):
            self.action_alphabet = list(self.action_alphabet.symbols)
        self.action_alphabet = [str(a) for a in self.action_alphabet]
        self.demonstrations = [[str(a) for a in d] for d in self.demonstrations]

    def validate(self) -> None:
        a = self.action_alphabet
        if not a or len(set(a)) != len(a):
            raise InvalidConfig("action_alphabet", "must be a nonempty list of distinct symbols")
        if START in a:
            raise InvalidConfig("action_alphabet", f"{START!r} is reserved")
        if not self.demonstrations:
            raise InvalidConfig("demonstrations", "at least one demonstration is required")
        for d in self.demonstrations:
            if not d:
                raise InvalidConfig("demonstrations", "demonstrations must be nonempty")
            for x in d:
                if x not in a:
                    raise InvalidConfig("demonstrations", f"action {x!r} is not in the alphabet")
        if self.repetitions < 1:
            raise InvalidConfig("repetitions", "must be >= 1")

    @property
    def contexts(self) -> list[str]:
        return [START] + self.action_alphabet

    def episode_length(self) -> int:
        return sum(len(d) for d in self.demonstrations)

    def observations(self) -> list[tuple[str, str]]:
        """``(context, action)`` pairs in the order the user performs them."""
        out = []
        for _ in range(self.repetitions):
            for demo in self.demonstrations:
                prev = START
                for act in demo:
                    out.append((prev, act))
                    prev = act
        return out


class LamModel:
    """First-order frequency table ``context -> next action -> count``.

    Prediction is the most frequent next action for the context, ties going
    to the earliest action in the alphabet.
    """

    def __init__(self, alphabet: Sequence[str]):
        self.alphabet = list(alphabet)
        self.counts = {c: {a: 0 for a in self.alphabet} for c in [START] + self.alphabet}

    def predict(self, context: str) -> str:
        row = self.counts[context]
        return max(self.alphabet, key=lambda a: (row[a], -self.alphabet.index(a)))

    def update(self, context: str, action: str) -> None:
        self.counts[context][action] += 1

    def to_token(self) -> ColorValue:
        return Tuple(tuple(Int(self.counts[c][a]) for c in [START] + self.alphabet for a in self.alphabet))

    @classmethod
    def from_token(cls, token: ColorValue, alphabet: Sequence[str]) -> "LamModel":
        m = cls(alphabet)
        it = iter(token.elements)
        for c in [START] + m.alphabet:
            for a in m.alphabet:
                m.counts[c][a] = next(it).value
        return m


def slot(config: LamConfig, context: str, action: str) -> int:
    return config.contexts.index(context) * len(config.action_alphabet) + config.action_alphabet.index(action)


def build_lam_net(config: LamConfig) -> CommSpaceNet:
    config.validate()
    alpha, ctxs = config.action_alphabet, config.contexts
    obs = config.observations()
    n = len(obs)
    n_slots = len(ctxs) * len(alpha)

    colorsets = [
        ColorSet.unit("UNIT"),
        ColorSet.enum("ACT", alpha),
        ColorSet.enum("CTX", ctxs),
        ColorSet.enum("VERDICT", ["hit", "miss"]),
        ColorSet.int_range("IDX", 0, n),
        ColorSet.product("STEP", ["IDX", "IDX"]),
        ColorSet.product("EVENT", ["IDX", "CTX", "ACT"]),
        ColorSet.product("PRED", ["IDX", "CTX", "ACT", "ACT"]),
        ColorSet.product("OUTCOME", ["IDX", "VERDICT", "CTX", "ACT"]),
        ColorSet.product("MODEL", ["IDX"] * n_slots),
    ]
    S, O, C = "surface", "observation", "computation"
    place_defs = [
        (STREAM, "EVENT", S, "demonstrated user actions"),
        (CURSOR, "IDX", S, "next action index"),
        (TICKS, "STEP", S, "index successor table"),
        (UI_READY, "UNIT", S, "interface ready for the next action"),
        (RAW, "EVENT", S, "raw user action"),
        (PARSED, "EVENT", O, "parsed action"),
        (FEEDBACK, "IDX", O, "feedback to the interface"),
        (MODEL, "MODEL", C, "action model"),
        (COUNTER, "STEP", C, "count successor table"),
        (PREDICTION, "PRED", C, "prediction with actual action"),
        (OUTCOME, "OUTCOME", C, "comparison outcome"),
    ]
    places = [Place(pid, cs, name) for pid, cs, _, name in place_defs]
    pspace = {pid: sp for pid, _, sp, _ in place_defs}
    transitions, tspace = [], {}

    def add(t, space):
        transitions.append(t)
        tspace[t.id] = space

    add(
        Transition(
            "emit",
            [(CURSOR, "i"), (STREAM, "(tuple i c a)"), (TICKS, "(tuple i j)"), (UI_READY, "()")],
            [(CURSOR, "j"), (TICKS, "(tuple i j)"), (RAW, "(tuple i c a)")],
            name="user acts",
        ),
        S,
    )
    add(Transition("parse", [(RAW, "e")], [(PARSED, "e")], name="parse action"), O)
    add(Transition("ack", [(FEEDBACK, "i")], [(UI_READY, "()")], name="feedback to user"), O)

    mv = [Var(f"m{k}") for k in range(n_slots)]
    model_pat = TupleTerm(tuple(mv))
    for c in ctxs:
        for x in alpha:
            me = mv[slot(config, c, x)]
            conds = []
            for y in alpha:
                if y == x:
                    continue
                other = mv[slot(config, c, y)]
                # earlier symbols win ties
                op = ">" if alpha.index(y) < alpha.index(x) else ">="
                conds.append(Cmp(op, me, other))
            add(
                Transition(
                    f"predict_{c}_{x}",
                    [(PARSED, TupleTerm((Var("i"), Lit(Sym(c)), Var("a")))), (MODEL, model_pat)],
                    [(MODEL, model_pat), (PREDICTION, TupleTerm((Var("i"), Lit(Sym(c)), Lit(Sym(x)), Var("a"))))],
                    guard=And(tuple(conds)) if conds else TRUE,
                    name=f"predict {x} after {c}",
                ),
                C,
            )
    add(
        Transition(
            COMPARE_HIT,
            [(PREDICTION, "(tuple i c x a)")],
            [(OUTCOME, "(tuple i 'hit c a)")],
            guard="(= x a)",
            name="prediction correct",
        ),
        C,
    )
    add(
        Transition(
            COMPARE_MISS,
            [(PREDICTION, "(tuple i c x a)")],
            [(OUTCOME, "(tuple i 'miss c a)")],
            guard="(!= x a)",
            name="prediction wrong",
        ),
        C,
    )
    for c in ctxs:
        for a in alpha:
            k = slot(config, c, a)
            bumped = list(mv)
            bumped[k] = Var("nxt")
            add(
                Transition(
                    f"update_{c}_{a}",
                    [
                        (OUTCOME, TupleTerm((Var("i"), Var("r"), Lit(Sym(c)), Lit(Sym(a))))),
                        (MODEL, model_pat),
                        (COUNTER, TupleTerm((mv[k], Var("nxt")))),
                    ],
                    [
                        (MODEL, TupleTerm(tuple(bumped))),
                        (COUNTER, TupleTerm((mv[k], Var("nxt")))),
                        (FEEDBACK, Var("i")),
                    ],
                    name=f"learn {a} after {c}",
                ),
                C,
            )

    succ = [(i, i + 1) for i in range(n)]
    initial = {
        STREAM: [(i, c, a) for i, (c, a) in enumerate(obs)],
        CURSOR: [0],
        TICKS: succ,
        UI_READY: [()],
        MODEL: [LamModel(alpha).to_token()],
        COUNTER: succ,
    }
    net = Net.build(colorsets, places, transitions, Marking(initial))
    return CommSpaceNet.build(net, pspace, tspace)


def accuracy_by_repetition(config: LamConfig, hits: Sequence[int]) -> list[float]:
    """Fraction of correct predictions per repetition, given hit indices."""
    per = config.episode_length()
    counts = [0] * config.repetitions
    for i in hits:
        counts[i // per] += 1
    return [c / per for c in counts]


def final_model(config: LamConfig, marking: Marking) -> LamModel:
    (token,) = marking[MODEL]
    return LamModel.from_token(token, config.action_alphabet)
