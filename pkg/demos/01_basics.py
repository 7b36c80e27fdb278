"""Build a small colored net, list its enabled bindings and fire a few steps."""

from csnet import ColorSet, Net, Place, Transition, enabled_transitions, fire, run

colors = [
    ColorSet.enum("JOB", ["scan", "lift"]),
    ColorSet.enum("DRONE", ["d1", "d2"]),
    ColorSet.product("WORK", ["DRONE", "JOB"]),
]
net = Net.build(
    colors,
    [Place("queue", "JOB"), Place("idle", "DRONE"), Place("busy", "WORK")],
    [
        # d2 cannot lift, so the guard rules out that pairing
        Transition(
            "start",
            [("queue", "j"), ("idle", "d")],
            [("busy", "(tuple d j)")],
            guard="(not (and (= d 'd2) (= j 'lift)))",
        ),
        Transition("finish", [("busy", "(tuple d j)")], [("idle", "d")]),
    ],
    {"queue": ["scan", "lift", "scan"], "idle": ["d1", "d2"]},
)

m = net.initial
print("initial:", {p: m[p] for p in net.places})
for tid, binding in enabled_transitions(net, m):
    print("enabled:", tid, binding)

tid, binding = enabled_transitions(net, m)[0]
m = fire(net, m, tid, binding)
print("after one firing:", {p: m[p] for p in net.places})

trace = run(net, seed=42)
print(f"seeded run: {len(trace)} steps, ends {trace.terminal}")
for step in trace.steps:
    print(f"  {step.index}: {step.transition} {step.binding} -> {step.digest[:12]}")
