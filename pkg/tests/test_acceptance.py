"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run directly (``python tests/test_acceptance.py``) for the summary alone, or
through pytest, where the lines are repeated in the terminal summary.
"""

import itertools
import os
import random
import subprocess
import sys
import tempfile
import time
from collections import Counter
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))

from conftest import NETS, producer_consumer, stock_swarm  # noqa: E402
from oracles import (  # noqa: E402
    as_counter,
    brute_bindings,
    drive_group,
    ev,
    freeze,
    freeze_binding,
    random_bounded_net,
    random_marking,
    random_net,
)

from csnet import analysis as A  # noqa: E402
from csnet.colors import ColorSet  # noqa: E402
from csnet.commspace import CommSpaceNet, SpaceKind, adjacent, validate_layering  # noqa: E402
from csnet.group import OFF, ON, AgentRef, GroupAgent, buffer_contents, compile_group_to_net, inbox_contents  # noqa: E402
from csnet.net import enabled_bindings, enabled_transitions, fire, run  # noqa: E402
from csnet.scenarios import lam as L  # noqa: E402
from csnet.scenarios import swarm as W  # noqa: E402
from csnet.scenarios.runner import run_scenario  # noqa: E402

RESULTS: list[str] = []


def report(n: int, title: str, ok: bool, detail: str) -> None:
    line = f"criterion {n} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    RESULTS.append(line)
    print(line)


def _binding_set(bindings):
    return sorted(repr(sorted(b.items())) for b in bindings)


# 1 ---------------------------------------------------------------------------------


def criterion_1():
    rng = random.Random(1)
    start = time.perf_counter()
    mismatches = checked = 0
    for _ in range(1000):
        net = random_net(rng, max_places=4, max_transitions=3, max_tokens=5)
        for m in (net.initial, random_marking(rng, net, 5)):
            for tid in net.transitions:
                checked += 1
                if _binding_set(enabled_bindings(net, m, tid)) != _binding_set(brute_bindings(net, m, tid)):
                    mismatches += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 60
    report(1, "binding oracle", ok, f"{checked} checks on 1000 nets, {mismatches} mismatches, {elapsed:.1f}s")
    return ok


def test_criterion_1_binding_oracle():
    assert criterion_1()


# 2 ---------------------------------------------------------------------------------


def criterion_2():
    rng = random.Random(2)
    fired = violations = 0
    while fired < 10_000:
        net = random_net(rng)
        m = random_marking(rng, net, 5)
        for _ in range(10):
            events = enabled_transitions(net, m)
            if not events or fired >= 10_000:
                break
            tid, b = rng.choice(events)
            after = fire(net, m, tid, b)
            fired += 1
            t = net.transitions[tid]
            before_c, after_c = as_counter(m), as_counter(after)
            removed = Counter((p, ev(pat, b)) for p, pat in t.inputs)
            added = Counter((p, ev(e, b)) for p, e in t.outputs)
            # conservation: M' = M - consumed + produced, token for token
            expect = before_c.copy()
            expect.subtract(removed)
            expect.update(added)
            if +expect != after_c or sum(after_c.values()) != sum(before_c.values()) - len(t.inputs) + len(t.outputs):
                violations += 1
            # frame: places off the transition's arcs are untouched
            for p in set(net.places) - t.places():
                if m.bag(p) != after.bag(p):
                    violations += 1
            m = after
    ok = violations == 0
    report(2, "firing conservation and frame", ok, f"{fired} firings, {violations} violations")
    return ok


def test_criterion_2_conservation_and_frame():
    assert criterion_2()


# 3 ---------------------------------------------------------------------------------

S, O, C = SpaceKind.SURFACE, SpaceKind.OBSERVATION, SpaceKind.COMPUTATION


def _valid_assignment(rng, net):
    places = {p: rng.choice(list(SpaceKind)) for p in net.places}
    trans = {}
    for tid, t in net.transitions.items():
        allowed = [s for s in SpaceKind if all(adjacent(s, places[p]) for p in t.places())]
        trans[tid] = rng.choice(allowed)  # O is always allowed
    return places, trans


def _bypass_assignment(rng, net):
    places, trans = _valid_assignment(rng, net)
    tid = rng.choice(sorted(net.transitions))
    p = rng.choice(sorted(net.transitions[tid].places()))
    ts, ps = rng.choice([(S, C), (C, S)])
    trans[tid], places[p] = ts, ps
    return places, trans, tid


def criterion_3():
    rng = random.Random(3)
    false_accepts = false_rejects = 0
    for _ in range(500):
        net = random_net(rng)
        places, trans, culprit = _bypass_assignment(rng, net)
        found = validate_layering(CommSpaceNet.build(net, places, trans))
        if not any(v.code == "BYPASS" and v.subject == culprit for v in found):
            false_accepts += 1
    for _ in range(500):
        net = random_net(rng)
        places, trans = _valid_assignment(rng, net)
        if validate_layering(CommSpaceNet.build(net, places, trans)):
            false_rejects += 1
    ok = false_accepts == 0 and false_rejects == 0
    report(3, "layering validator", ok, f"false accepts {false_accepts}/500, false rejects {false_rejects}/500")
    return ok


def test_criterion_3_layering():
    assert criterion_3()


# 4 ---------------------------------------------------------------------------------

PAYLOAD = ColorSet.int_range("PAYLOAD", 0, 3)


def _compile_matches_deliver(group_st, sts, messages, seed):
    def build():
        g = GroupAgent("g", "news", group_st)
        for i, s in enumerate(sts):
            g.register(AgentRef(f"m{i}", s, frozenset({"news"})))
        return g

    direct = build()
    if direct.members():
        for topic, p in messages:
            direct.deliver(direct.members()[0], topic, p)
    want = {a: buffer_contents(direct.agents[a]) for a in direct.members()}
    g = build()
    cs = compile_group_to_net(g, PAYLOAD, topics=["sports"], published=messages)
    final = run(cs.net, seed=seed).final
    got = {a: inbox_contents(cs, final, a) for a in g.members()}
    return got == want


def criterion_4():
    rng = random.Random(4)
    problems = 0
    for _ in range(10_000):
        problems += len(drive_group(rng, rng.randint(5, 40)))
    long_problems = len(drive_group(random.Random(44), 10_000))
    groups = mismatches = 0
    for n in range(6):
        for group_st in (ON, OFF):
            for sts in itertools.product((ON, OFF), repeat=n):
                messages = [(rng.choice(["news", "sports"]), rng.randint(0, 3)) for _ in range(rng.randint(1, 4))]
                groups += 1
                if not _compile_matches_deliver(group_st, sts, messages, rng.randrange(1000)):
                    mismatches += 1
    ok = problems == 0 and long_problems == 0 and mismatches == 0
    report(
        4,
        "group-agent invariants",
        ok,
        f"10000 sequences + one of 10^4 ops: {problems + long_problems} problems; "
        f"compiled vs deliver on {groups} groups (<=5 members): {mismatches} mismatches",
    )
    return ok


def test_criterion_4_group_agent():
    assert criterion_4()


# 5 ---------------------------------------------------------------------------------


def criterion_5():
    limits = A.Limits(max_nodes=100_000)
    # both human choices present: the widest Centaurian net
    both = W.build_swarm_net(stock_swarm(W.HumanPolicy.scripted(["approve"])))
    g = A.explore(both.net, limits)
    gate = A.verify_edge_property(g, W.ASSIGN_GATE, A.place_nonempty(W.APPROVAL)) if not g.truncated else None
    gate_ok = gate is not None and gate.holds
    deny = W.build_swarm_net(stock_swarm(W.DENY_ALL))
    gd = A.explore(deny.net, limits)
    dead_ok = not gd.truncated and W.ASSIGN_GATE in A.dead_transitions(gd, deny.net)
    approve = W.build_swarm_net(stock_swarm(W.APPROVE_ALL))
    ga = A.explore(approve.net, limits)
    ends = A.find_deadlocks(ga)
    full_ok = not ga.truncated and bool(ends) and all(len(W.assigned_tasks(ga.nodes[d])) == 3 for d in ends)
    ok = gate_ok and dead_ok and full_ok
    report(
        5,
        "swarm gating safety",
        ok,
        f"gate edge property {'holds' if gate_ok else 'FAILS'} over {len(g.nodes)} markings; "
        f"deny-all gate dead: {dead_ok}; approve-all {len(ends)} terminal markings all with 3 assigned: {full_ok}",
    )
    return ok


def test_criterion_5_swarm_gate():
    assert criterion_5()


# 6 ---------------------------------------------------------------------------------


def _hand_oracle():
    # repetition 1: every context is new, so the tie rule predicts 'a' for all
    # four actions and only the opening 'a' is right.  From repetition 2 on
    # each context has one successor (start->a, a->b, b->c, c->b).
    return [0.25, 1.0, 1.0, 1.0, 1.0, 1.0]


def criterion_6():
    cfg = L.LamConfig(["a", "b", "c"], [["a", "b", "c", "b"]], 6)
    acc = run_scenario(L.build_lam_net(cfg), cfg, seed=0).prediction_accuracy
    ok = acc[5] == 1.0 and acc == _hand_oracle() and all(x <= y for x, y in zip(acc, acc[1:]))
    report(6, "LAM learning", ok, f"accuracy by repetition {acc}")
    return ok


def test_criterion_6_lam():
    assert criterion_6()


# 7 ---------------------------------------------------------------------------------


def criterion_7():
    rng = random.Random(7)
    mismatches = 0
    sizes = []
    for _ in range(100):
        net, (nodes, edges) = random_bounded_net(rng, cap=200, min_nodes=4)
        sizes.append(len(nodes))
        g = A.explore(net)
        got_nodes = {freeze(as_counter(m)) for m in g.nodes.values()}
        got_edges = Counter(
            (
                freeze(as_counter(g.nodes[e.source])),
                e.transition,
                freeze_binding(e.binding),
                freeze(as_counter(g.nodes[e.target])),
            )
            for e in g.edges
        )
        if g.truncated or got_nodes != nodes or got_edges != edges:
            mismatches += 1
    pc = len(A.explore(producer_consumer(2)).nodes)
    ok = mismatches == 0 and pc == 12
    report(
        7,
        "state-space oracle",
        ok,
        f"100 nets ({min(sizes)}-{max(sizes)} markings), {mismatches} mismatches; producer-consumer {pc} markings (hand count 12)",
    )
    return ok


def test_criterion_7_state_space():
    assert criterion_7()


# 8 ---------------------------------------------------------------------------------


def _csnet_cli(args, workers, hashseed):
    code = f"import sys; from csnet import cli; cli.ANALYZE_WORKERS = {workers}; sys.exit(cli.main(sys.argv[1:]))"
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed))
    return subprocess.run([sys.executable, "-c", code, *args], capture_output=True, env=env).returncode


def criterion_8():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        outputs = {}
        runs = [("a", 1, 1), ("b", 1, 2), ("c", 4, 3)]
        for tag, workers, hashseed in runs:
            for net in ("producer_consumer", "swarm_approve"):
                path = str(NETS / f"{net}.json")
                trace, dot = tmp / f"{net}-{tag}.jsonl", tmp / f"{net}-{tag}.dot"
                _csnet_cli(["run", path, "--seed", "11", "--max-steps", "200", "--trace", str(trace)], workers, hashseed)
                _csnet_cli(["analyze", path, "--dot", str(dot)], workers, hashseed)
                outputs[(net, tag)] = (trace.read_bytes(), dot.read_bytes())
        same_runs = all(outputs[(n, "a")] == outputs[(n, "b")] for n in ("producer_consumer", "swarm_approve"))
        same_threads = all(outputs[(n, "a")] == outputs[(n, "c")] for n in ("producer_consumer", "swarm_approve"))
        nonempty = all(t and d for t, d in outputs.values())
    ok = same_runs and same_threads and nonempty
    report(
        8,
        "CLI determinism",
        ok,
        f"trace+DOT byte-identical across runs: {same_runs}; across 1 vs 4 exploration threads: {same_threads}",
    )
    return ok


def test_criterion_8_determinism():
    assert criterion_8()


if __name__ == "__main__":
    results = [f() for f in (criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8)]
    sys.exit(0 if all(results) else 1)
