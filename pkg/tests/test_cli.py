import io
import json
import subprocess
import sys

import pytest
from conftest import NETS

from csnet import cli

TWO = str(NETS / "two_places.json")
PC = str(NETS / "producer_consumer.json")
SWARM = str(NETS / "swarm_approve.json")
SWARM_DENY = str(NETS / "swarm_deny.json")


def call(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_ok(capsys):
    assert call(capsys, "validate", TWO) == (0, "OK\n", "")


def test_validate_bypass(capsys):
    code, out, _ = call(capsys, "validate", str(NETS / "bypass.json"))
    assert code == 1
    assert out.splitlines() == ["BYPASS\tT1 surface->computation"]


def test_validate_malformed(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": "csnet-1",\n "places": [}')
    code, out, err = call(capsys, "validate", str(bad))
    assert code == 2 and out == ""
    assert "2:13" in err


def test_validate_type_error(capsys, tmp_path):
    d = json.loads((NETS / "two_places.json").read_text())
    d["initial_marking"] = {"P1": [3]}
    f = tmp_path / "typed.json"
    f.write_text(json.dumps(d))
    code, out, _ = call(capsys, "validate", str(f))
    assert code == 1 and out.startswith("MARKING_TYPE\tP1")


def test_run_two_places(capsys, tmp_path):
    trace = tmp_path / "t.jsonl"
    code, out, _ = call(capsys, "run", TWO, "--seed", "5", "--trace", str(trace))
    assert code == 0
    assert out == "steps: 1\nterminal: quiescent\n"
    lines = trace.read_text().splitlines()
    assert len(lines) == 2
    assert json.loads(lines[1])["transition"] == "T"


def test_run_zero_steps(capsys, tmp_path):
    trace = tmp_path / "t.jsonl"
    code, out, _ = call(capsys, "run", TWO, "--max-steps", "0", "--trace", str(trace))
    assert code == 0 and "terminal: max-steps" in out
    assert len(trace.read_text().splitlines()) == 1


def test_run_is_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    call(capsys, "run", PC, "--seed", "3", "--max-steps", "50", "--trace", str(a))
    call(capsys, "run", PC, "--seed", "3", "--max-steps", "50", "--trace", str(b))
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.jsonl"
    call(capsys, "run", PC, "--seed", "4", "--max-steps", "50", "--trace", str(c))
    assert c.read_bytes() != a.read_bytes()


def test_run_interactive_input_closed(capsys, monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO("y\n"))
    code, out, err = call(capsys, "run", SWARM, "--interactive")
    assert code == 3
    assert "[y/n]" in err and "[y/n]" not in out


def test_run_interactive_answers(capsys, monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO("y\n" * 10))
    code, out, _ = call(capsys, "run", SWARM, "--interactive", "--policy", "lexicographic-first")
    assert code == 0 and "terminal: quiescent" in out


def test_run_invalid_net(capsys):
    code, out, _ = call(capsys, "run", str(NETS / "bypass.json"))
    assert code == 1 and out.startswith("BYPASS")


def test_analyze_bounded(capsys):
    code, out, _ = call(capsys, "analyze", TWO, "--check", "bounded:1")
    assert code == 0 and "bounded:1\tholds" in out


def test_analyze_counterexample(capsys):
    code, out, _ = call(capsys, "analyze", PC, "--check", "bounded:1")
    assert code == 1
    assert "bounded:1\tfails" in out and "counterexample" in out


def test_analyze_deny_all_live(capsys):
    code, out, _ = call(capsys, "analyze", SWARM_DENY, "--check", "live")
    assert code == 1
    [line] = [l for l in out.splitlines() if l.startswith("live")]
    assert "assign," in line.split("dead: ")[1] + ","


def test_analyze_gate(capsys):
    code, out, _ = call(capsys, "analyze", SWARM, "--check", "gate:assign:approval")
    assert code == 0 and "gate:assign:approval\tholds" in out


def test_analyze_truncated(capsys):
    code, out, _ = call(capsys, "analyze", PC, "--check", "live", "--max-nodes", "5")
    assert code == 4 and "truncated" in out
    code, *_ = call(capsys, "analyze", PC, "--check", "gate:put:free", "--max-nodes", "5")
    assert code == 4


def test_analyze_dot(capsys, tmp_path):
    dot = tmp_path / "g.dot"
    assert call(capsys, "analyze", PC, "--dot", str(dot))[0] == 0
    text = dot.read_text()
    assert text.count(" -> ") == 20 and text.count("[label=") == 12 + 20


def test_analyze_bad_check_is_usage_error(capsys):
    with pytest.raises(SystemExit) as err:
        cli.main(["analyze", PC, "--check", "fast"])
    assert err.value.code == 2


def test_scenario_swarm(capsys, tmp_path):
    report = tmp_path / "r.json"
    code, out, _ = call(capsys, "scenario", "swarm", "--config", SWARM, "--report", str(report))
    assert code == 0 and "tasks_assigned: 3" in out
    assert json.loads(report.read_text())["tasks_assigned"] == 3


def test_scenario_swarm_deny(capsys):
    code, out, _ = call(capsys, "scenario", "swarm", "--config", SWARM_DENY)
    assert code == 0 and "tasks_assigned: 0" in out


def test_scenario_lam_single_symbol(capsys, tmp_path):
    cfg = tmp_path / "lam.json"
    cfg.write_text(json.dumps({"kind": "lam", "action_alphabet": ["a"], "demonstrations": [["a", "a"]], "repetitions": 3}))
    report = tmp_path / "r.json"
    code, _, _ = call(capsys, "scenario", "lam", "--config", str(cfg), "--report", str(report))
    assert code == 0
    assert json.loads(report.read_text())["prediction_accuracy"] == [1.0, 1.0, 1.0]


def test_scenario_invalid_config(capsys, tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"kind": "swarm", "drones": 0}))
    code, _, err = call(capsys, "scenario", "swarm", "--config", str(cfg))
    assert code == 1 and "drones" in err


def test_scenario_kind_mismatch(capsys):
    code, _, err = call(capsys, "scenario", "lam", "--config", SWARM)
    assert code == 1


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "csnet.cli", "validate", TWO], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "OK\n"
