"""Explicit state-space construction and the checks built on it."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

from .net import Marking, Net, enabled_transitions, fire

HOLDS = "holds"
FAILS = "fails"
UNKNOWN = "unknown-truncated"


class TruncatedGraph(Exception):
    """The check needs a complete state space but exploration was cut short."""


@dataclass(frozen=True)
class Limits:
    max_nodes: int = 100_000
    max_tokens: int = 1_000


@dataclass
class Edge:
    source: str
    transition: str
    binding: dict
    target: str


@dataclass
class ReachabilityGraph:
    nodes: dict[str, Marking]
    edges: list[Edge]
    root: str
    truncated: bool
    limits: Limits
    # digest -> (parent digest, index into edges) on a shortest path from root
    parents: dict = field(default_factory=dict)
    expanded: set = field(default_factory=set)

    def successors(self, digest: str) -> list[Edge]:
        return [e for e in self.edges if e.source == digest]

    def path_to(self, digest: str) -> list[tuple[str, dict]]:
        """Replayable ``(transition, binding)`` path from the root."""
        path = []
        while digest != self.root:
            parent, ei = self.parents[digest]
            e = self.edges[ei]
            path.append((e.transition, e.binding))
            digest = parent
        path.reverse()
        return path


@dataclass
class AnalysisVerdict:
    prop: str
    outcome: str
    path: Optional[list] = None
    detail: str = ""

    @property
    def holds(self) -> bool:
        return self.outcome == HOLDS


def _successors(net: Net, m: Marking):
    return [(tid, b, fire(net, m, tid, b)) for tid, b in enabled_transitions(net, m)]


def explore(net: Net, limits: Optional[Limits] = None, workers: int = 1) -> ReachabilityGraph:
    """Breadth-first reachability graph from the initial marking.

    Nodes are keyed by canonical marking digest and kept in discovery order;
    edges follow the canonical event order of each node.  ``workers > 1``
    computes successor sets of a BFS level concurrently; the merge is done
    in level order, so the result is independent of the worker count.
    Exploration stops adding nodes once ``max_nodes`` is reached or a place
    would exceed ``max_tokens`` and marks the graph truncated.
    """
    limits = limits or Limits()
    root_m = net.initial
    root = net.digest(root_m)
    nodes = {root: root_m}
    ids = {root_m: root}
    edges: list[Edge] = []
    parents: dict = {}
    expanded: set = set()
    truncated = False
    level = [root]
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        while level:
            if pool is not None:
                succ_lists = list(pool.map(lambda d: _successors(net, nodes[d]), level))
            else:
                succ_lists = [_successors(net, nodes[d]) for d in level]
            nxt = []
            for src, succs in zip(level, succ_lists):
                expanded.add(src)
                for tid, b, m in succs:
                    d = ids.get(m)
                    if d is None:
                        if len(nodes) >= limits.max_nodes or any(
                            m.count(p) > limits.max_tokens for p in m.places()
                        ):
                            truncated = True
                            continue
                        d = net.digest(m)
                        nodes[d] = m
                        ids[m] = d
                        parents[d] = (src, len(edges))
                        nxt.append(d)
                    edges.append(Edge(src, tid, b, d))
            level = nxt
    finally:
        if pool is not None:
            pool.shutdown()
    return ReachabilityGraph(nodes, edges, root, truncated, limits, parents, expanded)


def replay(net: Net, path) -> Marking:
    m = net.initial
    for tid, b in path:
        m = fire(net, m, tid, b)
    return m


def check_boundedness(graph: ReachabilityGraph, k: int) -> AnalysisVerdict:
    prop = f"bounded:{k}"
    for d, m in graph.nodes.items():
        for p in m.places():
            if m.count(p) > k:
                return AnalysisVerdict(prop, FAILS, graph.path_to(d), f"{p} holds {m.count(p)} tokens")
    if graph.truncated:
        return AnalysisVerdict(prop, UNKNOWN, detail="graph truncated before a violation was found")
    return AnalysisVerdict(prop, HOLDS)


def dead_transitions(graph: ReachabilityGraph, net: Net) -> list[str]:
    """Transitions that label no edge (never fire from any reachable marking)."""
    if graph.truncated:
        raise TruncatedGraph("liveness needs the complete state space")
    fired = {e.transition for e in graph.edges}
    return sorted(set(net.transitions) - fired)


def check_liveness(graph: ReachabilityGraph, net: Net) -> AnalysisVerdict:
    if graph.truncated:
        return AnalysisVerdict("live", UNKNOWN, detail="graph truncated")
    dead = dead_transitions(graph, net)
    if dead:
        return AnalysisVerdict("live", FAILS, detail="dead: " + ",".join(dead))
    return AnalysisVerdict("live", HOLDS)


def find_deadlocks(graph: ReachabilityGraph) -> list[str]:
    """Expanded nodes without outgoing edges, in discovery order."""
    sources = {e.source for e in graph.edges}
    return [d for d in graph.nodes if d in graph.expanded and d not in sources]


def check_deadlock_free(graph: ReachabilityGraph) -> AnalysisVerdict:
    dead = find_deadlocks(graph)
    if dead:
        return AnalysisVerdict("deadlock", FAILS, graph.path_to(dead[0]), f"{len(dead)} terminal marking(s)")
    if graph.truncated:
        return AnalysisVerdict("deadlock", UNKNOWN, detail="graph truncated")
    return AnalysisVerdict("deadlock", HOLDS)


def verify_edge_property(
    graph: ReachabilityGraph, tid: str, predicate: Callable[[Marking], bool], prop: str = ""
) -> AnalysisVerdict:
    """Every ``tid`` edge must leave a marking that satisfies ``predicate``."""
    prop = prop or f"edge:{tid}"
    if graph.truncated:
        raise TruncatedGraph("edge properties need the complete state space")
    for e in graph.edges:
        if e.transition == tid and not predicate(graph.nodes[e.source]):
            path = graph.path_to(e.source) + [(e.transition, e.binding)]
            return AnalysisVerdict(prop, FAILS, path, f"{tid} fired from {e.source[:12]}")
    return AnalysisVerdict(prop, HOLDS)


def place_nonempty(place: str) -> Callable[[Marking], bool]:
    return lambda m: m.count(place) > 0


def to_dot(graph: ReachabilityGraph, net: Net) -> str:
    """DOT rendering with byte-stable ordering.

    Nodes are labeled with a digest prefix and the per-place token counts,
    edges with the transition display name.
    """
    lines = ["digraph reachability {", "  node [shape=box, fontname=monospace];"]
    for d, m in graph.nodes.items():
        counts = " ".join(f"{p}={m.count(p)}" for p in m.places())
        label = d[:12] + (("\\n" + counts) if counts else "")
        extra = ", peripheries=2" if d == graph.root else ""
        lines.append(f'  "{d}" [label="{label}"{extra}];')
    for e in graph.edges:
        name = net.transitions[e.transition].name.replace('"', '\\"')
        lines.append(f'  "{e.source}" -> "{e.target}" [label="{name}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
