import io

import pytest
from conftest import stock_swarm

from csnet import analysis as A
from csnet.colors import val
from csnet.commspace import validate_layering
from csnet.net import Marking, enabled_bindings, fire, validate_net
from csnet.scenarios import lam as L
from csnet.scenarios import swarm as W
from csnet.scenarios.runner import (
    HumanChannel,
    InputClosed,
    ScriptExhausted,
    human_decide,
    run_scenario,
)

# -- planner stand-in ------------------------------------------------------------


def test_single_drone_plan_uses_manhattan_distance():
    cfg = W.SwarmConfig(grid=(4, 4), drones=1, tasks=[("t", (2, 3))])
    [p] = W.llm_stub_plan(W.world_token(0, [W.IDLE], [W.OPEN]), cfg)
    assert (p.drone, p.task, p.distance) == (0, "t", 5)


def test_no_idle_drones_no_plan():
    cfg = W.SwarmConfig(grid=(4, 4), drones=2, tasks=[("t", (2, 3))])
    assert W.llm_stub_plan(W.world_token(0, [W.OFFLINE, W.PENDING], [W.OPEN]), cfg) == []


def test_equidistant_drones_prefer_lower_id():
    # drones start at (0,0), (1,0), (2,0); task at (1,2) is 3 steps from 0 and 2
    cfg = W.SwarmConfig(grid=(3, 3), drones=3, tasks=[("t", (1, 2))])
    [p] = W.llm_stub_plan(W.world_token(0, [W.IDLE, W.PENDING, W.IDLE], [W.OPEN]), cfg)
    assert p.drone == 0


def test_obstacles_lengthen_paths():
    cfg = W.SwarmConfig(grid=(3, 2), drones=1, tasks=[("t", (2, 0))], obstacles=[(0, (1, 0))])
    [free] = W.llm_stub_plan(W.world_token(0, [W.IDLE], [W.OPEN]), cfg)
    [detour] = W.llm_stub_plan(W.world_token(1, [W.IDLE], [W.OPEN]), cfg)
    assert (free.distance, detour.distance) == (2, 4)


def test_greedy_plan_matches_each_drone_once():
    plan = W.greedy_plan((5, 5), {0: (0, 0), 1: (4, 4)}, {"a": (0, 1), "b": (4, 3), "c": (2, 2)})
    assert [(p.drone, p.task) for p in plan] == [(0, "a"), (1, "b")]


# -- the joint-token gate --------------------------------------------------------


@pytest.fixture
def gate_net():
    cs = W.build_swarm_net(stock_swarm())
    return cs.net


def gate_marking(planning, approval):
    return Marking({W.PLANNING: planning, W.APPROVAL: approval})


def test_gate_needs_both_tokens(gate_net):
    assert enabled_bindings(gate_net, gate_marking([(0, "t1")], []), W.ASSIGN_GATE) == []
    assert enabled_bindings(gate_net, gate_marking([], [(0, "t1")]), W.ASSIGN_GATE) == []


def test_gate_fires_once_on_matching_tokens(gate_net):
    m = gate_marking([(0, "t1")], [(0, "t1")])
    [b] = enabled_bindings(gate_net, m, W.ASSIGN_GATE)
    after = fire(gate_net, m, W.ASSIGN_GATE, b)
    assert after[W.ASSIGNED] == [val((0, "t1"))]
    assert enabled_bindings(gate_net, after, W.ASSIGN_GATE) == []


def test_gate_rejects_mismatched_task(gate_net):
    assert enabled_bindings(gate_net, gate_marking([(0, "t1")], [(0, "t2")]), W.ASSIGN_GATE) == []


def test_gate_template():
    t = W.build_assign_gate()
    assert {p for p, _ in t.inputs} == {W.PLANNING, W.APPROVAL}
    assert [p for p, _ in t.outputs] == [W.ASSIGNED]


# -- swarm net construction ------------------------------------------------------


def test_one_drone_one_task_gets_assigned():
    cs = W.build_swarm_net(W.SwarmConfig(grid=(3, 3), drones=1, tasks=[("t1", (2, 2))]))
    assert validate_net(cs.net) == [] and validate_layering(cs) == []
    g = A.explore(cs.net)
    assert not g.truncated
    ends = A.find_deadlocks(g)
    assert ends and all(W.assigned_tasks(g.nodes[d]) == [(0, "t1")] for d in ends)


def test_no_tasks_means_gate_is_dead():
    cs = W.build_swarm_net(W.SwarmConfig(grid=(2, 2), drones=2, tasks=[]))
    assert validate_net(cs.net) == [] and validate_layering(cs) == []
    g = A.explore(cs.net)
    dead = A.dead_transitions(g, cs.net)
    assert W.ASSIGN_GATE in dead and "parse_approval" in dead


@pytest.mark.parametrize(
    "kwargs,field",
    [
        (dict(grid=(0, 3)), "grid"),
        (dict(drones=0), "drones"),
        (dict(drones=20), "drones"),
        (dict(tasks=[("a", (0, 0)), ("a", (1, 1))]), "tasks"),
        (dict(tasks=[("a", (9, 0))]), "tasks"),
        (dict(tasks=[("1bad", (0, 0))]), "tasks"),
        (dict(obstacles=[(-1, (0, 0))]), "obstacles"),
        (dict(human_policy="sometimes"), "human_policy"),
        (dict(mode_schedule=[(0, None, "solo")]), "mode_schedule"),
        (dict(mode_schedule=[(5, 2, W.MAS)]), "mode_schedule"),
    ],
)
def test_invalid_config_names_the_field(kwargs, field):
    with pytest.raises(W.InvalidConfig) as err:
        W.build_swarm_net(W.SwarmConfig(**kwargs))
    assert err.value.field == field


def test_unknown_scripted_decision():
    with pytest.raises(W.InvalidConfig) as err:
        W.HumanPolicy.scripted(["approve", "maybe"])
    assert err.value.field == "human_policy"


# -- human decisions -------------------------------------------------------------

REQ = val((0, "t1"))


def test_approve_all_returns_the_request():
    d = human_decide(W.APPROVE_ALL, REQ)
    assert d.approved and d.token == REQ
    assert human_decide(W.DENY_ALL, REQ).token is None


def test_script_is_consumed_in_order():
    ch = HumanChannel(W.HumanPolicy.scripted(["approve", "deny"]))
    assert [ch.decide(REQ).approved for _ in range(2)] == [True, False]
    with pytest.raises(ScriptExhausted):
        ch.decide(REQ)


def test_interactive_reads_lines_and_prompts():
    out = io.StringIO()
    ch = HumanChannel(W.HumanPolicy(W.INTERACTIVE), io.StringIO("maybe\nY\nno\n"), out)
    assert ch.decide(REQ).approved
    assert not ch.decide(REQ).approved
    assert out.getvalue().count("[y/n]") == 3
    with pytest.raises(InputClosed):
        ch.decide(REQ)


# -- swarm runs -----------------------------------------------------------------


@pytest.mark.parametrize("seed", range(5))
def test_approve_all_assigns_every_task(seed):
    cfg = stock_swarm()
    r = run_scenario(W.build_swarm_net(cfg), cfg, seed=seed)
    assert r.tasks_assigned == 3 and r.terminal == "quiescent"
    assert r.approvals_requested == r.approvals_granted == 3
    # 3 x (emit, parse, register) + 3 plans + 3 x (route, approve, parse, assign)
    assert r.steps == 24


@pytest.mark.parametrize("seed", range(5))
def test_mas_mode_skips_the_human(seed):
    cfg = stock_swarm(mode_schedule=[W.ModeSpan(0, None, W.MAS)])
    r = run_scenario(W.build_swarm_net(cfg), cfg, seed=seed)
    assert r.tasks_assigned == 3 and r.approvals_requested == 0
    assert r.steps == 15


def test_deny_all_assigns_nothing():
    cfg = stock_swarm(W.DENY_ALL)
    r = run_scenario(W.build_swarm_net(cfg), cfg)
    assert r.tasks_assigned == 0
    assert r.approvals_denied == r.approvals_requested > 0


def test_script_mixes_grants_and_denials():
    cfg = stock_swarm(W.HumanPolicy.scripted(["approve", "deny", "approve", "approve", "approve"]))
    r = run_scenario(W.build_swarm_net(cfg), cfg, seed=4)
    assert r.approvals_denied == 1
    assert r.approvals_granted == r.tasks_assigned


def test_scripted_run_stops_when_script_runs_out():
    cfg = stock_swarm(W.HumanPolicy.scripted(["approve"]))
    with pytest.raises(ScriptExhausted):
        run_scenario(W.build_swarm_net(cfg), cfg)


def test_interactive_run_closes_cleanly():
    cfg = stock_swarm(W.INTERACTIVE)
    with pytest.raises(InputClosed):
        run_scenario(W.build_swarm_net(cfg), cfg, input_channel=io.StringIO("y\n"), prompt=io.StringIO())


def test_schedule_controls_obstacles_and_mode():
    cfg = W.SwarmConfig(
        grid=(5, 5),
        drones=3,
        tasks=[("a", (4, 4)), ("b", (0, 4)), ("c", (3, 1)), ("d", (2, 2))],
        obstacles=[(6, (1, 1))],
        mode_schedule=[W.ModeSpan(0, 10, W.MAS), W.ModeSpan(10, None, W.CENTAURIAN)],
    )
    cs = W.build_swarm_net(cfg)
    for seed in range(5):
        r = run_scenario(cs, cfg, seed=seed)
        steps = [s.transition for s in r.trace.steps]
        assert steps.index(W.SENSE_OBSTACLE) >= 6
        assert steps.index(W.SWITCH_TO_CENTAURIAN) == 10
        assert W.ASSIGN_AUTO not in steps[10:]
        assert r.tasks_assigned == 3


def test_same_seed_same_report():
    cfg = stock_swarm(W.HumanPolicy.scripted(["deny"] + ["approve"] * 6))
    cs = W.build_swarm_net(cfg)
    a, b = run_scenario(cs, cfg, seed=9), run_scenario(cs, cfg, seed=9)
    assert a.to_dict() == b.to_dict()
    assert [s.digest for s in a.trace.steps] == [s.digest for s in b.trace.steps]


# -- LAM -----------------------------------------------------------------------


def frequency_oracle(alphabet, demos, reps):
    """Per-repetition accuracy of a most-frequent-successor predictor."""
    counts = {}
    acc = []
    for _ in range(reps):
        hits = total = 0
        for demo in demos:
            prev = None
            for act in demo:
                row = counts.setdefault(prev, {})
                best = max(alphabet, key=lambda a: (row.get(a, 0), -alphabet.index(a)))
                hits += best == act
                total += 1
                row[act] = row.get(act, 0) + 1
                prev = act
        acc.append(hits / total)
    return acc


def lam_report(alphabet, demos, reps, seed=0):
    cfg = L.LamConfig(alphabet, demos, reps)
    cs = L.build_lam_net(cfg)
    return cfg, cs, run_scenario(cs, cfg, seed=seed)


def test_lam_learns_the_demonstration():
    cfg, cs, r = lam_report(["a", "b", "c"], [["a", "b", "c", "b"]], 6)
    assert r.prediction_accuracy == [0.25, 1.0, 1.0, 1.0, 1.0, 1.0]
    assert r.prediction_accuracy == frequency_oracle(["a", "b", "c"], [["a", "b", "c", "b"]], 6)
    model = L.final_model(cfg, r.trace.final)
    assert model.counts["c"]["b"] == 6 and model.counts["b"]["c"] == 6


@pytest.mark.parametrize(
    "alphabet,demos,reps",
    [
        (["x", "y"], [["y", "x", "y", "y"], ["x", "x"]], 4),
        (["a", "b", "c"], [["c", "a"], ["c", "b"], ["c", "a"]], 3),
        (["p", "q", "r", "s"], [["s", "r", "q", "p", "q"]], 3),
    ],
)
def test_lam_matches_frequency_oracle(alphabet, demos, reps):
    _, _, r = lam_report(alphabet, demos, reps, seed=3)
    assert r.prediction_accuracy == frequency_oracle(alphabet, demos, reps)


def test_single_action_is_always_right():
    _, _, r = lam_report(["go"], [["go", "go", "go"]], 2)
    assert r.prediction_accuracy == [1.0, 1.0]


def test_lam_net_is_layered_and_model_token_unique():
    cfg = L.LamConfig(["a", "b"], [["a", "b", "a"]], 1)
    cs = L.build_lam_net(cfg)
    assert validate_net(cs.net) == [] and validate_layering(cs) == []
    g = A.explore(cs.net)
    assert not g.truncated
    assert all(m.count(L.MODEL) == 1 for m in g.nodes.values())


def test_lam_model_token_round_trip():
    m = L.LamModel(["a", "b"])
    m.update(L.START, "b")
    m.update("b", "a")
    back = L.LamModel.from_token(m.to_token(), ["a", "b"])
    assert back.counts == m.counts
    assert back.predict(L.START) == "b" and back.predict("a") == "a"


@pytest.mark.parametrize(
    "alphabet,demos,reps,field",
    [
        ([], [["a"]], 1, "action_alphabet"),
        (["a", "a"], [["a"]], 1, "action_alphabet"),
        (["a", L.START], [["a"]], 1, "action_alphabet"),
        (["a"], [], 1, "demonstrations"),
        (["a"], [["b"]], 1, "demonstrations"),
        (["a"], [["a"]], 0, "repetitions"),
    ],
)
def test_lam_invalid_config(alphabet, demos, reps, field):
    with pytest.raises(W.InvalidConfig) as err:
        L.build_lam_net(L.LamConfig(alphabet, demos, reps))
    assert err.value.field == field
