"""Drone swarm with a human approval gate under several policies."""

from pathlib import Path

from csnet import analysis as A
from csnet.netfile import load_config
from csnet.scenarios import swarm as W
from csnet.scenarios.runner import run_scenario

NETS = Path(__file__).resolve().parent / "nets"

base = dict(grid=(4, 4), drones=3, tasks=[("t1", (3, 3)), ("t2", (0, 3)), ("t3", (2, 1))])
for policy in (W.APPROVE_ALL, W.DENY_ALL, ["approve", "deny", "approve"]):
    config = W.SwarmConfig(**base, human_policy=policy)
    report = run_scenario(W.build_swarm_net(config), config, seed=1)
    print(
        f"{str(policy):<28} steps={report.steps:<3} assigned={report.tasks_assigned} "
        f"granted={report.approvals_granted} denied={report.approvals_denied}"
    )

# obstacles and a mode switch from a config file
mixed = load_config(NETS / "swarm_mixed.json")
report = run_scenario(W.build_swarm_net(mixed), mixed, seed=mixed.seed)
print("swarm_mixed.json:", report.to_dict()["tasks_assigned"], "tasks assigned in", report.steps, "steps")

# exhaustive check: no assignment without an approval token present
config = W.SwarmConfig(**base, human_policy=W.APPROVE_ALL)
graph = A.explore(W.build_swarm_net(config).net)
verdict = A.verify_edge_property(graph, W.ASSIGN_GATE, A.place_nonempty(W.APPROVAL))
print(f"gate check over {len(graph.nodes)} markings: {verdict.outcome}")
