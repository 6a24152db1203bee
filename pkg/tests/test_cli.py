import json
import subprocess
import sys

import pytest

from opmap.cli import main
from opmap.model import load_mapping

from conftest import DATA

SAMPLE = str(DATA / "sample_instance.json")
SAMPLE_MAP = str(DATA / "sample_mapping.json")


def run(*args):
    return main([str(a) for a in args])


def test_generate_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run("generate", "--seed", 7, "--apps", 2, "--max-ops", 10, "--procs", 5, "-o", p) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.json"
    run("generate", "--seed", 8, "--apps", 2, "--max-ops", 10, "--procs", 5, "-o", c)
    assert c.read_bytes() != a.read_bytes()


def test_check_feasible(tmp_path):
    rep = tmp_path / "r.json"
    assert run("check", SAMPLE, SAMPLE_MAP, "--report", rep) == 0
    body = json.loads(rep.read_text())
    assert body["feasible"] is True
    assert body["cost"]["proc_nb"] == 3


def test_check_infeasible(tmp_path):
    body = json.loads(open(SAMPLE_MAP).read())
    inst = json.loads(open(SAMPLE).read())
    for p in inst["platform"]["processors"]:
        p["speed"] = p["speed"] / 100
    ip = tmp_path / "slow.json"
    ip.write_text(json.dumps(inst))
    mp = tmp_path / "m.json"
    mp.write_text(json.dumps(body))
    rep = tmp_path / "r.json"
    assert run("check", ip, mp, "--report", rep) == 1
    assert json.loads(rep.read_text())["violations"]


def test_check_invalid_input(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("check", bad, SAMPLE_MAP) == 2
    assert run("check", SAMPLE, bad) == 2
    assert run("check", tmp_path / "missing.json", SAMPLE_MAP) == 2


def test_solve_and_recheck(tmp_path):
    out = tmp_path / "m.json"
    assert run("solve", SAMPLE, "--heuristic", "h4", "--strategy", "s3", "--seed", 1, "-o", out) == 0
    body = json.loads(out.read_text())
    assert body["status"] == "ok" and "cost" in body
    assert load_mapping(out).assign
    assert run("check", SAMPLE, out) == 0


def test_solve_failure_json(tmp_path):
    inst = json.loads(open(SAMPLE).read())
    for p in inst["platform"]["processors"]:
        p["speed"] = 0.01
    ip = tmp_path / "slow.json"
    ip.write_text(json.dumps(inst))
    out = tmp_path / "m.json"
    assert run("solve", ip, "--heuristic", "h1", "--strategy", "s1", "-o", out) == 1
    body = json.loads(out.read_text())
    assert body["status"] == "failed"
    assert body["failure"]["reason"]


def test_export_lp(tmp_path):
    out = tmp_path / "m.lp"
    assert run("export-lp", SAMPLE, "--objective", "bw-max", "-o", out) == 0
    text = out.read_text()
    assert text.startswith("\\ objective bw-max\n") and text.endswith("End\n")


def test_oracle(tmp_path):
    out = tmp_path / "o.json"
    assert run("oracle", SAMPLE, "--objective", "proc-power", "-o", out) == 0
    body = json.loads(out.read_text())
    assert body["status"] == "optimal"
    assert body["value"] == pytest.approx(0.894)
    assert run("check", SAMPLE, out) == 0


def test_oracle_budget(tmp_path):
    out = tmp_path / "o.json"
    assert run("oracle", SAMPLE, "--objective", "bw-sum", "--max-states", 2, "-o", out) == 1
    assert json.loads(out.read_text())["status"] in ("budget-exceeded",)


def test_experiment_is_deterministic(tmp_path):
    args = ["experiment", "--which", "e2", "--runs", 1, "--seed", 4, "--strategies", "s1,s3"]
    assert run(*args, "-o", tmp_path / "a") == 0
    assert run(*args, "-o", tmp_path / "b") == 0
    for f in sorted(p.name for p in (tmp_path / "a").iterdir()):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "opmap.cli", "check", SAMPLE, SAMPLE_MAP],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.strip() == "feasible"
