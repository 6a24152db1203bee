import csv
import subprocess
import sys

import pytest

from opmap.generator import GenParams
from opmap.harness import (
    ExperimentConfig,
    RunRecord,
    derive_seed,
    emit_report,
    relative_performance,
    run_experiment,
    summarize,
)
from opmap.heuristics import HEURISTICS, STRATEGIES
from opmap.objectives import CostVector

SMALL = GenParams(n_apps=2, max_ops_per_app=8, n_procs=6)


def rec(run, h, power, s="s1"):
    cost = None if power is None else CostVector(1, power, 0.0, 0.0)
    return RunRecord(run, 0, h, s, cost is not None, cost)


def three_runs():
    # h costs 4, 5, fails; the best costs are 4, 4, 3
    return [
        rec(0, "h1", 4.0), rec(0, "h2", 6.0),
        rec(1, "h1", 5.0), rec(1, "h2", 4.0),
        rec(2, "h1", None), rec(2, "h2", 3.0),
    ]


def test_relative_performance_fixture():
    assert relative_performance(three_runs(), "h1") == pytest.approx(0.6, abs=1e-12)


def test_always_best_scores_one():
    recs = [rec(r, "h1", 1.0) for r in range(4)] + [rec(r, "h2", 2.0) for r in range(4)]
    assert relative_performance(recs, "h1") == 1.0
    assert relative_performance(recs, "h2") == 0.5


def test_always_failing_scores_zero():
    recs = [rec(r, "h1", None) for r in range(3)] + [rec(r, "h2", 2.0) for r in range(3)]
    assert relative_performance(recs, "h1") == 0.0


def test_mismatched_runs_rejected():
    with pytest.raises(ValueError):
        relative_performance([rec(0, "h1", 1.0), rec(0, "h2", 1.0), rec(1, "h1", 1.0)], "h1")
    with pytest.raises(ValueError):
        relative_performance([rec(0, "h1", 1.0)], "h3")


def test_record_cost_must_match_success():
    with pytest.raises(ValueError):
        RunRecord(0, 0, "h1", "s1", True, None)


def test_seed_derivation_is_stable():
    assert derive_seed(1, "e1", 5, 0) == derive_seed(1, "e1", 5, 0)
    assert derive_seed(1, "e1", 5, 0) != derive_seed(1, "e1", 5, 1)
    assert derive_seed(1, "e1", 5, 0) != derive_seed(2, "e1", 5, 0)


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig("e9").validate()
    with pytest.raises(ValueError):
        ExperimentConfig("e1", runs=0).validate()
    with pytest.raises(ValueError):
        ExperimentConfig("e1", strategies=("s7",)).validate()


def test_default_grids():
    assert ExperimentConfig("e1").grid() == [1] + list(range(5, 71, 5))
    assert ExperimentConfig("e2").grid() == list(range(1, 16))
    assert ExperimentConfig("e4").grid() == [10, 30, 60, 90, 120, 150, 180]
    cfg = ExperimentConfig("e5")
    assert cfg.grid()[-1] == cfg.params().max_ops_per_app


@pytest.fixture(scope="module")
def small_e4():
    cfg = ExperimentConfig("e4", runs=3, seed=5, base=SMALL, points=(10, 90))
    return cfg, run_experiment(cfg)


def test_records_cover_every_cell(small_e4):
    cfg, recs = small_e4
    assert len(recs) == 2 * 3 * len(HEURISTICS) * len(STRATEGIES)


def test_relative_performance_bounded_by_success_rate(small_e4):
    _, recs = small_e4
    for row in summarize(recs):
        assert 0.0 <= row["relative_performance"] <= row["successes"] / row["runs"] + 1e-12


def test_success_csv_shape(small_e4, tmp_path):
    cfg, recs = small_e4
    emit_report(cfg, recs, tmp_path)
    with open(tmp_path / "e4_success.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == len(cfg.grid()) * 24
    assert sorted({float(r["point"]) for r in rows}) == [10.0, 90.0]
    with open(tmp_path / "e4_runs.csv", newline="") as fh:
        assert len(list(csv.DictReader(fh))) == len(recs)


def test_report_is_byte_identical(tmp_path):
    cfg = ExperimentConfig("e2", runs=2, seed=9, base=SMALL, points=(1, 3))
    a, b = tmp_path / "a", tmp_path / "b"
    emit_report(cfg, run_experiment(cfg), a)
    emit_report(cfg, run_experiment(cfg), b)
    for f in sorted(p.name for p in a.iterdir()):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_zero_success_rows():
    cfg = ExperimentConfig("e1", runs=2, seed=0, base=SMALL, points=(1,),
                           heuristics=("h1",), strategies=("s1",))
    rows = summarize(run_experiment(cfg))
    # a single processor cannot host a blocking H1 run of two apps
    assert rows == [{"point": 1, "heuristic": "h1", "strategy": "s1", "runs": 2,
                     "successes": 0, "relative_performance": 0.0}]


def test_reuse_only_adds_successes_on_identical_apps():
    # identical apps: switching reuse on does not lose any success on these runs
    base = GenParams(n_apps=2, max_ops_per_app=10, n_procs=10)
    on = ExperimentConfig("e5", runs=4, seed=3, base=base, points=(0,), heuristics=("h2", "h5"))
    off = ExperimentConfig("e5", runs=4, seed=3, base=base, points=(0,), heuristics=("h2", "h5"),
                           reuse=False)
    ok_on = {(r.run, r.heuristic, r.strategy) for r in run_experiment(on) if r.success}
    ok_off = {(r.run, r.heuristic, r.strategy) for r in run_experiment(off) if r.success}
    assert ok_off <= ok_on


def test_plot_script_runs(small_e4, tmp_path):
    pytest.importorskip("matplotlib")
    cfg, recs = small_e4
    emit_report(cfg, recs, tmp_path)
    out = tmp_path / "fig.png"
    subprocess.run([sys.executable, "plot_e4_relative.py", str(out)], cwd=tmp_path, check=True)
    assert out.stat().st_size > 0
