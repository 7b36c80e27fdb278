"""Colored Petri nets organized into surface, observation and computation
spaces, with group-agent messaging, scenario builders and state-space
analysis."""

from .analysis import (
    AnalysisVerdict,
    Limits,
    ReachabilityGraph,
    TruncatedGraph,
    check_boundedness,
    check_deadlock_free,
    check_liveness,
    dead_transitions,
    explore,
    find_deadlocks,
    place_nonempty,
    replay,
    to_dot,
    verify_edge_property,
)
from .colors import UNIT, ColorSet, Int, Sym, Tuple, Unit, val
from .commspace import (
    CommSpaceNet,
    FlowKind,
    SpaceKind,
    flow_classify,
    space_projection,
    validate_layering,
)
from .group import AgentRef, GroupAgent, Message, Outcome, compile_group_to_net
from .net import (
    LEXICOGRAPHIC,
    RANDOM,
    Marking,
    Net,
    NotEnabled,
    Place,
    Trace,
    Transition,
    Violation,
    enabled_bindings,
    enabled_transitions,
    fire,
    run,
    validate_net,
)
from .netfile import dump_netfile, load_netfile, parse_netfile

__version__ = "0.1.0"

__all__ = [
    "AnalysisVerdict",
    "Limits",
    "ReachabilityGraph",
    "TruncatedGraph",
    "check_boundedness",
    "check_deadlock_free",
    "check_liveness",
    "dead_transitions",
    "explore",
    "find_deadlocks",
    "place_nonempty",
    "replay",
    "to_dot",
    "verify_edge_property",
    "UNIT",
    "ColorSet",
    "Int",
    "Sym",
    "Tuple",
    "Unit",
    "val",
    "CommSpaceNet",
    "FlowKind",
    "SpaceKind",
    "flow_classify",
    "space_projection",
    "validate_layering",
    "AgentRef",
    "GroupAgent",
    "Message",
    "Outcome",
    "compile_group_to_net",
    "LEXICOGRAPHIC",
    "RANDOM",
    "Marking",
    "Net",
    "NotEnabled",
    "Place",
    "Trace",
    "Transition",
    "Violation",
    "enabled_bindings",
    "enabled_transitions",
    "fire",
    "run",
    "validate_net",
    "dump_netfile",
    "load_netfile",
    "parse_netfile",
]
