"""Batch experiments over generated instances, success counts and relative performance.

Every (sweep point, run) pair gets one instance, shared by all heuristic
cells, with a seed derived from the master seed by hashing.  Output is a
pair of CSVs per experiment plus two generated matplotlib scripts.

``e{n}_success.csv`` columns, rows ordered by point, heuristic, strategy::

    point,heuristic,strategy,runs,successes,relative_performance

``e{n}_runs.csv`` columns, rows ordered by point, run, heuristic, strategy::

    point,run,heuristic,strategy,success,proc_nb,proc_power,bw_sum,bw_max,reason

Relative performance of heuristic h over runs r = 1..R::

    a_h(r) = best(r) / cost_h(r)   if h succeeds in run r, else 0
    rp(h)  = (1 / R) * sum_r a_h(r)

where best(r) is the smallest Proc-Power cost among the heuristics that
succeed in run r under the same strategy.  Example: over three runs, h
costs 4, 5 and fails while the best costs are 4, 4 and 3, so
rp(h) = (4/4 + 4/5 + 0) / 3 = 0.6.
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .feasibility import check
from .generator import GenerationError, GenParams, generate, make_similar_pair
from .heuristics import HEURISTICS, STRATEGIES, attempt
from .objectives import CostVector, evaluate

EXPERIMENTS = ("e1", "e2", "e3", "e4", "e5")
METRIC = "proc-power"

SWEEP_NAMES = {
    "e1": "processors",
    "e2": "applications",
    "e3": "max_operators",
    "e4": "ccr",
    "e5": "differing_operators",
}


def default_points(which: str, base: GenParams) -> list:
    if which == "e1":
        return [1] + list(range(5, 71, 5))
    if which == "e2":
        return list(range(1, 16))
    if which == "e3":
        return list(range(10, 81, 10))
    if which == "e4":
        return [10, 30, 60, 90, 120, 150, 180]
    if which == "e5":
        return list(range(0, base.max_ops_per_app + 1, 2))
    raise ValueError(f"unknown experiment {which!r}")


def default_base(which: str) -> GenParams:
    if which == "e5":
        return GenParams(n_apps=2, n_procs=10)
    return GenParams()


@dataclass(frozen=True)
class ExperimentConfig:
    which: str
    runs: int = 50
    seed: int = 0
    base: GenParams | None = None
    heuristics: tuple[str, ...] = tuple(HEURISTICS)
    strategies: tuple[str, ...] = STRATEGIES
    reuse: bool = True
    points: tuple | None = None

    def params(self) -> GenParams:
        return self.base if self.base is not None else default_base(self.which)

    def grid(self) -> list:
        return list(self.points) if self.points is not None else default_points(self.which, self.params())

    def validate(self) -> None:
        if self.which not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.which!r}")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if not self.grid():
            raise ValueError("empty sweep")
        if not self.heuristics or not self.strategies:
            raise ValueError("empty heuristic or strategy selection")
        for h in self.heuristics:
            if h not in HEURISTICS:
                raise ValueError(f"unknown heuristic {h!r}")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ValueError(f"unknown strategy {s!r}")
        self.params().validate()


@dataclass(frozen=True)
class RunRecord:
    run: int
    point: object
    heuristic: str
    strategy: str
    success: bool
    cost: CostVector | None = None
    reason: str = ""
    wall_time: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if self.success != (self.cost is not None):
            raise ValueError("a record has a cost exactly when it succeeded")


def derive_seed(master: int, which: str, point, run: int) -> int:
    h = hashlib.blake2b(f"{master}|{which}|{point}|{run}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "big")


def make_instance(cfg: ExperimentConfig, point, seed: int):
    p = cfg.params()
    if cfg.which == "e1":
        return generate(replace(p, n_procs=int(point)), seed)
    if cfg.which == "e2":
        return generate(replace(p, n_apps=int(point)), seed)
    if cfg.which == "e3":
        return generate(replace(p, max_ops_per_app=int(point)), seed)
    if cfg.which == "e4":
        return generate(replace(p, ccr=float(point)), seed)
    return make_similar_pair(p, int(point), seed)


def _one_run(cfg: ExperimentConfig, point, run: int) -> list[RunRecord]:
    seed = derive_seed(cfg.seed, cfg.which, point, run)
    cells = [(h, s) for h in cfg.heuristics for s in cfg.strategies]
    try:
        inst = make_instance(cfg, point, seed)
    except GenerationError as e:
        return [RunRecord(run, point, h, s, False, None, f"generation: {e}") for h, s in cells]
    out = []
    for h, s in cells:
        t0 = time.perf_counter()
        res = attempt(inst, h, s, seed=seed, reuse=cfg.reuse)
        dt = time.perf_counter() - t0
        if res.ok:
            report = check(inst, res.mapping)
            if not report.feasible:
                raise AssertionError(f"{h}/{s} returned an infeasible mapping at {point}, run {run}")
            out.append(RunRecord(run, point, h, s, True, evaluate(inst, res.mapping), "", dt))
        else:
            out.append(RunRecord(run, point, h, s, False, None, res.failure.reason, dt))
    return out


def _task(args):
    return _one_run(*args)


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> list[RunRecord]:
    """All records in (point, run, heuristic, strategy) order."""
    cfg.validate()
    tasks = [(cfg, p, r) for p in cfg.grid() for r in range(cfg.runs)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            chunks = list(ex.map(_task, tasks, chunksize=4))
    else:
        chunks = [_task(t) for t in tasks]
    return [rec for chunk in chunks for rec in chunk]


def relative_performance(records: list[RunRecord], heuristic: str, metric: str = METRIC) -> float:
    """Mean over runs of best/own cost, counting failures as 0.

    ``records`` must hold every compared heuristic on the same set of runs.
    """
    by_run: dict[int, dict[str, RunRecord]] = {}
    for rec in records:
        by_run.setdefault(rec.run, {})[rec.heuristic] = rec
    if not by_run:
        raise ValueError("no records")
    names = {frozenset(v) for v in by_run.values()}
    if len(names) != 1:
        raise ValueError("heuristics were not evaluated on the same runs")
    if heuristic not in next(iter(names)):
        raise ValueError(f"no records for {heuristic!r}")
    terms = []
    for run in sorted(by_run):
        cells = by_run[run]
        costs = [r.cost.get(metric) for r in cells.values() if r.success]
        mine = cells[heuristic]
        if not mine.success:
            terms.append(0.0)
            continue
        best, own = min(costs), mine.cost.get(metric)
        terms.append(1.0 if own == best else best / own)
    return math.fsum(terms) / len(terms)


def summarize(records: list[RunRecord]) -> list[dict]:
    """One row per (point, heuristic, strategy) in canonical order."""
    if not records:
        raise ValueError("no records")
    points: list = []
    groups: dict[tuple, list[RunRecord]] = {}
    for rec in records:
        if rec.point not in points:
            points.append(rec.point)
        groups.setdefault((rec.point, rec.strategy), []).append(rec)
    hs = [h for h in HEURISTICS if any(r.heuristic == h for r in records)]
    ss = [s for s in STRATEGIES if any(r.strategy == s for r in records)]
    rows = []
    for p in points:
        for h in hs:
            for s in ss:
                grp = groups[(p, s)]
                mine = [r for r in grp if r.heuristic == h]
                rows.append({
                    "point": p,
                    "heuristic": h,
                    "strategy": s,
                    "runs": len(mine),
                    "successes": sum(r.success for r in mine),
                    "relative_performance": relative_performance(grp, h),
                })
    return rows


def success_totals(records: list[RunRecord], strategy: str) -> dict[str, int]:
    out = {h: 0 for h in HEURISTICS if any(r.heuristic == h for r in records)}
    for r in records:
        if r.strategy == strategy and r.success:
            out[r.heuristic] += 1
    return out


def _fmt(x) -> str:
    return repr(x) if isinstance(x, float) else str(x)


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


_PLOT = '''"""Regenerated by opmap on each experiment run."""
import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

SRC = {src!r}
COLUMN = {column!r}
LABEL = {label!r}
SWEEP = {sweep!r}

series = defaultdict(lambda: defaultdict(list))
with open(SRC, newline="") as fh:
    for row in csv.DictReader(fh):
        series[row["strategy"]][row["heuristic"]].append((float(row["point"]), float(row[COLUMN])))

out = sys.argv[1] if len(sys.argv) > 1 else {default_out!r}
strategies = sorted(series)
fig, axes = plt.subplots(1, len(strategies), figsize=(5 * len(strategies), 4), squeeze=False)
for ax, s in zip(axes[0], strategies):
    for h, pts in sorted(series[s].items()):
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker="o", label=h)
    ax.set_title("strategy " + s)
    ax.set_xlabel(SWEEP)
    ax.set_ylabel(LABEL)
    ax.legend()
fig.tight_layout()
fig.savefig(out)
'''


def emit_report(cfg: ExperimentConfig, records: list[RunRecord], outdir: str | Path) -> list[Path]:
    """Write CSVs and plot scripts; returns the written paths."""
    rows = summarize(records)
    out = Path(outdir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create {out}: {e}") from e
    name = cfg.which
    sweep = SWEEP_NAMES[name]
    files = {
        f"{name}_success.csv": _csv(
            [["point", "heuristic", "strategy", "runs", "successes", "relative_performance"]]
            + [[r["point"], r["heuristic"], r["strategy"], r["runs"], r["successes"],
                r["relative_performance"]] for r in rows]
        ),
        f"{name}_runs.csv": _csv(
            [["point", "run", "heuristic", "strategy", "success",
              "proc_nb", "proc_power", "bw_sum", "bw_max", "reason"]]
            + [[r.point, r.run, r.heuristic, r.strategy, int(r.success)]
               + ([r.cost.proc_nb, r.cost.proc_power, r.cost.bw_sum, r.cost.bw_max] if r.success else [""] * 4)
               + [r.reason] for r in records]
        ),
        f"plot_{name}_success.py": _PLOT.format(
            src=f"{name}_success.csv", column="successes", label="successful runs",
            sweep=sweep, default_out=f"{name}_success.png"),
        f"plot_{name}_relative.py": _PLOT.format(
            src=f"{name}_success.csv", column="relative_performance", label="relative performance",
            sweep=sweep, default_out=f"{name}_relative.png"),
    }
    written = []
    for fname, text in files.items():
        path = out / fname
        try:
            path.write_text(text)
        except OSError as e:
            raise OSError(f"cannot write {path}: {e}") from e
        written.append(path)
    return written
