"""State-space exploration, property checks and DOT export."""

from pathlib import Path

from csnet import analysis as A
from csnet import load_netfile

NETS = Path(__file__).resolve().parent / "nets"
net = load_netfile(NETS / "producer_consumer.json").csnet.net

graph = A.explore(net)
print(f"{len(graph.nodes)} markings, {len(graph.edges)} edges, truncated={graph.truncated}")
for verdict in (A.check_boundedness(graph, 2), A.check_liveness(graph, net), A.check_deadlock_free(graph)):
    print(f"  {verdict.prop}: {verdict.outcome}")

# a bound that is too tight comes back with a witness path
tight = A.check_boundedness(graph, 1)
print(f"  {tight.prop}: {tight.outcome}", "(already at the initial marking)" if not tight.path else "")
for tid, binding in tight.path:
    print(f"    {tid} {binding}")

small = A.explore(net, A.Limits(max_nodes=5))
print("with max_nodes=5: truncated =", small.truncated, "liveness =", A.check_liveness(small, net).outcome)

print(A.to_dot(graph, net)[:300], "...")
