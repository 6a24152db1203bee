"""Command-line entry point: ``opmap <command> ...``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import generator, harness, ilp_export, oracle
from .feasibility import MappingError, check
from .heuristics import HEURISTICS, STRATEGIES, attempt
from .model import dumps, load_instance, load_mapping, save_instance, save_mapping, validate_instance
from .objectives import evaluate

EXIT_OK, EXIT_INFEASIBLE, EXIT_INVALID = 0, 1, 2


class InputError(Exception):
    pass


def _instance(path: str):
    try:
        inst = load_instance(path)
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise InputError(f"{path}: cannot read instance: {e}") from e
    rep = validate_instance(inst)
    if not rep.ok:
        raise InputError(f"{path}: invalid instance: " + "; ".join(str(v) for v in rep.violations[:5]))
    return inst


def _cost(c) -> dict:
    return {k: ("inf" if v == float("inf") else v) for k, v in c.to_dict().items()}


def _write(path: str, text: str) -> None:
    Path(path).write_text(text)


def cmd_generate(a) -> int:
    params = generator.GenParams(
        n_apps=a.apps,
        max_ops_per_app=a.max_ops,
        n_procs=a.procs,
        homogeneous=a.hom,
        ccr=a.ccr,
        similarity=a.similarity,
    )
    try:
        inst = generator.generate(params, a.seed)
    except generator.GenerationError as e:
        raise InputError(str(e)) from e
    save_instance(inst, a.output)
    return EXIT_OK


def cmd_check(a) -> int:
    inst = _instance(a.instance)
    try:
        m = load_mapping(a.mapping)
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise InputError(f"{a.mapping}: cannot read mapping: {e}") from e
    try:
        report = check(inst, m)
        cost = evaluate(inst, m)
    except MappingError as e:
        raise InputError(f"{a.mapping}: {e}") from e
    out = report.to_dict()
    out["cost"] = _cost(cost)
    if a.report:
        _write(a.report, dumps(out))
    print("feasible" if report.feasible else f"infeasible ({len(report.violations)} violations)")
    return EXIT_OK if report.feasible else EXIT_INFEASIBLE


def cmd_solve(a) -> int:
    inst = _instance(a.instance)
    res = attempt(inst, a.heuristic, a.strategy, seed=a.seed, reuse=not a.no_reuse)
    meta = {"heuristic": a.heuristic, "strategy": a.strategy, "seed": a.seed}
    if not res.ok:
        _write(a.output, dumps({"status": "failed", **meta, "failure": res.failure.to_dict()}))
        print(f"failed: {res.failure}", file=sys.stderr)
        return EXIT_INFEASIBLE
    save_mapping(res.mapping, a.output, {"status": "ok", **meta, "cost": _cost(evaluate(inst, res.mapping))})
    return EXIT_OK


def cmd_export_lp(a) -> int:
    inst = _instance(a.instance)
    model = ilp_export.build_model(inst, a.objective, extensions=a.extensions)
    _write(a.output, ilp_export.emit_lp(model))
    return EXIT_OK


def cmd_oracle(a) -> int:
    inst = _instance(a.instance)
    limits = oracle.OracleLimits(
        max_nodes=a.max_nodes,
        max_procs=a.max_procs,
        max_states=a.max_states,
        objective=a.objective,
        allow_reuse=not a.no_reuse,
    )
    try:
        res = oracle.exact_solve(inst, limits)
    except oracle.BudgetExceeded as e:
        body = {"status": "budget-exceeded", "objective": a.objective, "states": e.states}
        if e.partial is not None:
            save_mapping(e.partial.mapping, a.output, {**body, "value": e.partial.value})
        else:
            _write(a.output, dumps(body))
        print(f"state budget exhausted after {e.states} states", file=sys.stderr)
        return EXIT_INFEASIBLE
    except oracle.OracleError as e:
        raise InputError(str(e)) from e
    body = {"status": res.status, "objective": a.objective, "value": res.value, "states": res.states}
    if res.mapping is None:
        _write(a.output, dumps(body))
        return EXIT_INFEASIBLE
    save_mapping(res.mapping, a.output, {**body, "cost": _cost(res.cost)})
    return EXIT_OK


def cmd_experiment(a) -> int:
    strategies = tuple(s.strip() for s in a.strategies.split(",")) if a.strategies else STRATEGIES
    cfg = harness.ExperimentConfig(
        which=a.which, runs=a.runs, seed=a.seed, strategies=strategies, reuse=not a.no_reuse
    )
    try:
        cfg.validate()
    except ValueError as e:
        raise InputError(str(e)) from e
    records = harness.run_experiment(cfg, jobs=a.jobs)
    for p in harness.emit_report(cfg, records, a.output):
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="opmap", description="Operator-tree mapping toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a random instance")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--apps", type=int, default=5)
    g.add_argument("--max-ops", type=int, default=50)
    g.add_argument("--procs", type=int, default=30)
    g.add_argument("--hom", action="store_true", help="homogeneous platform")
    g.add_argument("--ccr", type=float)
    g.add_argument("--similarity", type=int, help="operators replaced in each derived app")
    g.add_argument("-o", "--output", required=True)
    g.set_defaults(func=cmd_generate)

    c = sub.add_parser("check", help="check a mapping's feasibility")
    c.add_argument("instance")
    c.add_argument("mapping")
    c.add_argument("--report")
    c.set_defaults(func=cmd_check)

    s = sub.add_parser("solve", help="run a mapping heuristic")
    s.add_argument("instance")
    s.add_argument("--heuristic", choices=list(HEURISTICS), required=True)
    s.add_argument("--strategy", choices=list(STRATEGIES), required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--no-reuse", action="store_true")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("export-lp", help="write the placement ILP in LP format")
    e.add_argument("instance")
    e.add_argument("--objective", choices=list(ilp_export.ILP_OBJECTIVES + ilp_export.EXTENSION_OBJECTIVES),
                   required=True)
    e.add_argument("--extensions", action="store_true", help="allow the proc-nb objective")
    e.add_argument("-o", "--output", required=True)
    e.set_defaults(func=cmd_export_lp)

    o = sub.add_parser("oracle", help="exhaustive optimum for tiny instances")
    o.add_argument("instance")
    o.add_argument("--objective", choices=["proc-nb", "proc-power", "bw-sum", "bw-max"], required=True)
    o.add_argument("--max-states", type=int, default=oracle.OracleLimits.max_states)
    o.add_argument("--max-nodes", type=int, default=oracle.OracleLimits.max_nodes)
    o.add_argument("--max-procs", type=int, default=oracle.OracleLimits.max_procs)
    o.add_argument("--no-reuse", action="store_true")
    o.add_argument("-o", "--output", required=True)
    o.set_defaults(func=cmd_oracle)

    x = sub.add_parser("experiment", help="run a batch experiment")
    x.add_argument("--which", choices=list(harness.EXPERIMENTS), required=True)
    x.add_argument("--runs", type=int, default=50)
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--no-reuse", action="store_true")
    x.add_argument("--strategies", help="comma-separated subset, e.g. s1,s3")
    x.add_argument("--jobs", type=int, default=1)
    x.add_argument("-o", "--output", required=True)
    x.set_defaults(func=cmd_experiment)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
