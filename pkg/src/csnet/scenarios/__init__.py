from .lam import LamConfig, LamModel, build_lam_net
from .runner import (
    Decision,
    HumanChannel,
    InputClosed,
    ScenarioReport,
    ScriptExhausted,
    human_decide,
    run_scenario,
    simulate,
)
from .swarm import (
    HumanPolicy,
    InvalidConfig,
    ModeSpan,
    Proposal,
    SwarmConfig,
    build_assign_gate,
    build_swarm_net,
    greedy_plan,
    llm_stub_plan,
)

__all__ = [
    "Decision",
    "HumanChannel",
    "HumanPolicy",
    "InputClosed",
    "InvalidConfig",
    "LamConfig",
    "LamModel",
    "ModeSpan",
    "Proposal",
    "ScenarioReport",
    "ScriptExhausted",
    "SwarmConfig",
    "build_assign_gate",
    "build_lam_net",
    "build_swarm_net",
    "greedy_plan",
    "human_decide",
    "llm_stub_plan",
    "run_scenario",
    "simulate",
]
