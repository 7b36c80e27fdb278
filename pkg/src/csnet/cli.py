"""``csnet`` command line: validate, run, analyze and scenario.

Exit codes: 0 success, 1 check or validation failure, 2 parse error,
3 interactive input failure, 4 analysis truncated.  Every run is seeded;
``--seed`` defaults to 0.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from . import analysis as A
from .colors import to_json
from .commspace import validate_layering
from .net import POLICIES, RANDOM, validate_net
from .netfile import NetDocument, NetFileError, load_config, load_netfile, write_trace
from .scenarios import lam as L
from .scenarios import swarm as W
from .scenarios.runner import HumanChannel, InputClosed, ScriptExhausted, run_scenario, simulate

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_INPUT, EXIT_TRUNCATED = 0, 1, 2, 3, 4

# Exploration threads for ``analyze``.  Output does not depend on it.
ANALYZE_WORKERS = min(4, os.cpu_count() or 1)


def _err(msg: str) -> None:
    print(f"csnet: {msg}", file=sys.stderr)


def _violations(doc: NetDocument) -> list:
    found = validate_net(doc.csnet.net)
    if not found:
        found += validate_layering(doc.csnet)
    return found


def _load_checked(path: str):
    """Parse and validate; returns (doc, exit code or None)."""
    try:
        doc = load_netfile(path)
    except (NetFileError, OSError) as e:
        _err(f"{path}: {e}")
        return None, EXIT_PARSE
    except W.InvalidConfig as e:
        _err(f"{path}: invalid config: {e}")
        return None, EXIT_FAIL
    found = _violations(doc)
    if found:
        for v in found:
            print(v)
        return None, EXIT_FAIL
    return doc, None


def cmd_validate(args) -> int:
    doc, code = _load_checked(args.path)
    if doc is None:
        return code
    print("OK")
    return EXIT_OK


def cmd_run(args) -> int:
    doc, code = _load_checked(args.path)
    if doc is None:
        return code
    csnet = doc.csnet
    schedule = doc.scenario if isinstance(doc.scenario, W.SwarmConfig) else None
    human = None
    if args.interactive:
        human = HumanChannel(W.HumanPolicy(W.INTERACTIVE))
    elif schedule is not None:
        human = HumanChannel(schedule.human_policy)
    try:
        trace = simulate(csnet, args.policy, args.seed, args.max_steps, human=human, schedule=schedule)
    except InputClosed as e:
        _err(str(e))
        return EXIT_INPUT
    except ScriptExhausted as e:
        _err(str(e))
        return EXIT_INPUT
    if args.trace:
        with open(args.trace, "w", encoding="utf-8", newline="\n") as f:
            write_trace(f, trace, csnet)
    print(f"steps: {len(trace)}")
    print(f"terminal: {trace.terminal}")
    return EXIT_OK


def _parse_check(text: str):
    kind, _, rest = text.partition(":")
    if kind == "bounded":
        try:
            return ("bounded", int(rest))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bounded needs an integer bound, got {text!r}") from None
    if kind in ("live", "deadlock") and not rest:
        return (kind,)
    if kind == "gate":
        tid, _, place = rest.partition(":")
        if tid and place:
            return ("gate", tid, place)
    raise argparse.ArgumentTypeError(f"unknown check {text!r}")


def _format_path(net, path) -> list[str]:
    out = []
    for i, (tid, b) in enumerate(path):
        binding = json.dumps({k: to_json(b[k]) for k in sorted(b)}, separators=(",", ":"))
        out.append(f"  {i}: {tid} {binding}")
    return out


def cmd_analyze(args) -> int:
    doc, code = _load_checked(args.path)
    if doc is None:
        return code
    net = doc.csnet.net
    checks = list(args.check or [])
    for c in checks:
        if c[0] == "gate":
            if c[1] not in net.transitions:
                _err(f"gate check: unknown transition {c[1]!r}")
                return EXIT_FAIL
            if c[2] not in net.places:
                _err(f"gate check: unknown place {c[2]!r}")
                return EXIT_FAIL
    graph = A.explore(net, A.Limits(max_nodes=args.max_nodes), workers=ANALYZE_WORKERS)
    print(f"nodes: {len(graph.nodes)}")
    print(f"edges: {len(graph.edges)}")
    if graph.truncated:
        print("truncated: yes")
    if args.dot:
        with open(args.dot, "w", encoding="utf-8", newline="\n") as f:
            f.write(A.to_dot(graph, net))

    outcomes = []
    for c in checks:
        if c[0] == "bounded":
            verdict = A.check_boundedness(graph, c[1])
        elif c[0] == "live":
            verdict = A.check_liveness(graph, net)
        elif c[0] == "deadlock":
            verdict = A.check_deadlock_free(graph)
        else:
            prop = f"gate:{c[1]}:{c[2]}"
            try:
                verdict = A.verify_edge_property(graph, c[1], A.place_nonempty(c[2]), prop)
            except A.TruncatedGraph:
                verdict = A.AnalysisVerdict(prop, A.UNKNOWN, detail="graph truncated")
        line = f"{verdict.prop}\t{verdict.outcome}"
        if verdict.detail:
            line += f"\t{verdict.detail}"
        print(line)
        if verdict.outcome == A.FAILS and verdict.path is not None:
            print("  counterexample:" if verdict.path else "  counterexample: initial marking")
            for row in _format_path(net, verdict.path):
                print(row)
        outcomes.append(verdict.outcome)
    if A.FAILS in outcomes:
        return EXIT_FAIL
    if A.UNKNOWN in outcomes:
        return EXIT_TRUNCATED
    return EXIT_OK


def cmd_scenario(args) -> int:
    try:
        config = load_config(args.config)
    except (NetFileError, OSError) as e:
        _err(f"{args.config}: {e}")
        return EXIT_PARSE
    except W.InvalidConfig as e:
        _err(f"invalid config: {e}")
        return EXIT_FAIL
    wanted = W.SwarmConfig if args.name == "swarm" else L.LamConfig
    if not isinstance(config, wanted):
        _err(f"{args.config}: not a {args.name} config")
        return EXIT_FAIL
    try:
        if isinstance(config, W.SwarmConfig):
            csnet = W.build_swarm_net(config)
        else:
            csnet = L.build_lam_net(config)
    except W.InvalidConfig as e:
        _err(f"invalid config: {e}")
        return EXIT_FAIL
    try:
        report = run_scenario(csnet, config, seed=args.seed)
    except (InputClosed, ScriptExhausted) as e:
        _err(str(e))
        return EXIT_INPUT
    data = report.to_dict()
    if args.report:
        with open(args.report, "w", encoding="utf-8", newline="\n") as f:
            json.dump(data, f, indent=2)
            f.write("\n")
    print(f"steps: {report.steps}")
    print(f"terminal: {report.terminal}")
    if report.scenario == "swarm":
        print(f"tasks_assigned: {report.tasks_assigned}")
        print(f"approvals: requested={report.approvals_requested} granted={report.approvals_granted} denied={report.approvals_denied}")
    else:
        print("prediction_accuracy: " + " ".join(f"{a:.3f}" for a in report.prediction_accuracy))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csnet", description="Communication-space colored Petri nets.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a net file")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="simulate a net and optionally write a trace")
    p.add_argument("path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--policy", choices=POLICIES, default=RANDOM)
    p.add_argument("--max-steps", type=int, default=1000)
    p.add_argument("--trace", metavar="OUT")
    p.add_argument("--interactive", action="store_true", help="ask for approvals on stdin")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("analyze", help="explore the state space and check properties")
    p.add_argument("path")
    p.add_argument(
        "--check",
        action="append",
        type=_parse_check,
        metavar="CHECK",
        help="bounded:K, live, deadlock or gate:TRANSITION:PLACE (repeatable)",
    )
    p.add_argument("--max-nodes", type=int, default=A.Limits().max_nodes)
    p.add_argument("--dot", metavar="OUT")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("scenario", help="run the swarm or lam scenario")
    p.add_argument("name", choices=("swarm", "lam"))
    p.add_argument("--config", required=True, metavar="PATH")
    p.add_argument("--seed", type=int, default=None, help="defaults to the config's seed, else 0")
    p.add_argument("--report", metavar="OUT")
    p.set_defaults(func=cmd_scenario)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
