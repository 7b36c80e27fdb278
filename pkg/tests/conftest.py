import sys
from pathlib import Path

import pytest

from csnet import analysis as A
from csnet.colors import ColorSet
from csnet.net import Net, Place, Transition
from csnet.scenarios import swarm as W

NETS = Path(__file__).resolve().parent.parent / "demos" / "nets"


def two_place_net(tokens=1) -> Net:
    return Net.build(
        [ColorSet.unit("UNIT")],
        [Place("P1", "UNIT"), Place("P2", "UNIT")],
        [Transition("T", [("P1", "()")], [("P2", "()")])],
        {"P1": [()] * tokens},
    )


def producer_consumer(capacity=2) -> Net:
    return Net.build(
        [ColorSet.unit("UNIT"), ColorSet.enum("STATE", ["ready", "busy"])],
        [Place("producer", "STATE"), Place("consumer", "STATE"), Place("buffer", "UNIT"), Place("free", "UNIT")],
        [
            Transition("produce", [("producer", "'ready")], [("producer", "'busy")]),
            Transition("put", [("producer", "'busy"), ("free", "()")], [("producer", "'ready"), ("buffer", "()")]),
            Transition("take", [("consumer", "'ready"), ("buffer", "()")], [("consumer", "'busy"), ("free", "()")]),
            Transition("consume", [("consumer", "'busy")], [("consumer", "'ready")]),
        ],
        {"producer": ["ready"], "consumer": ["ready"], "free": [()] * capacity},
    )


def self_loop_net() -> Net:
    return Net.build(
        [ColorSet.unit("UNIT")],
        [Place("P", "UNIT")],
        [Transition("T", [("P", "()")], [("P", "()")])],
        {"P": [()]},
    )


def stock_swarm(policy=W.APPROVE_ALL, **kw) -> W.SwarmConfig:
    args = dict(
        grid=(4, 4),
        drones=3,
        tasks=[("t1", (3, 3)), ("t2", (0, 3)), ("t3", (2, 1))],
        human_policy=policy,
    )
    args.update(kw)
    return W.SwarmConfig(**args)


@pytest.fixture
def net1():
    return two_place_net()


@pytest.fixture(scope="session")
def swarm_approve():
    csnet = W.build_swarm_net(stock_swarm(W.APPROVE_ALL))
    return csnet, A.explore(csnet.net)


@pytest.fixture(scope="session")
def swarm_deny():
    csnet = W.build_swarm_net(stock_swarm(W.DENY_ALL))
    return csnet, A.explore(csnet.net)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is not None and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in module.RESULTS:
            terminalreporter.write_line(line)
