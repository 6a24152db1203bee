import math
import os
from dataclasses import replace

import pytest

from opmap.feasibility import check
from opmap.generator import TINY, GenParams, generate, make_similar_pair, tiny_instance
from opmap.heuristics import HEURISTICS, STRATEGIES, attempt
from opmap.model import ObjectSpec, OperatorSpec
from opmap.objectives import OBJECTIVES, evaluate
from opmap.oracle import (
    BACKEND,
    BudgetExceeded,
    OracleError,
    OracleLimits,
    available_kernels,
    contains,
    enumerate_mappings,
    evaluate_mapping,
    exact_solve,
)

from conftest import make_instance, platform


def test_backend_selection():
    kernels = available_kernels()
    assert "python" in kernels
    expected = "cython" if "cython" in kernels and not os.environ.get("OPMAP_PURE_PYTHON") else "python"
    assert BACKEND == expected


@pytest.mark.parametrize("seed", range(12))
@pytest.mark.parametrize("obj", OBJECTIVES)
def test_backends_agree(seed, obj):
    inst = tiny_instance(seed)
    lim = OracleLimits(objective=obj)
    a = exact_solve(inst, lim, backend="python")
    b = exact_solve(inst, lim, backend="cython")
    assert a.status == b.status
    assert a.value == b.value
    assert a.mapping == b.mapping


@pytest.mark.parametrize("seed", range(12))
def test_pruning_keeps_the_optimum(seed):
    inst = tiny_instance(seed)
    for obj in OBJECTIVES:
        a = exact_solve(inst, OracleLimits(objective=obj))
        b = exact_solve(inst, OracleLimits(objective=obj, prune=False))
        assert a.value == b.value
        assert b.states >= a.states


@pytest.mark.parametrize("seed", range(15))
def test_optimum_is_the_enumerated_minimum(seed):
    inst = tiny_instance(seed)
    vals = [ev.cost(m).bw_sum for m, ev in enumerate_mappings(inst) if ev.feasible]
    res = exact_solve(inst, OracleLimits(objective="bw-sum"))
    if not vals:
        assert res.status == "infeasible" and res.mapping is None
    else:
        assert math.isclose(res.value, min(vals), rel_tol=1e-12, abs_tol=1e-15)
        assert check(inst, res.mapping).feasible


def test_eval_matches_checker_on_feasible_optimum():
    for seed in range(10):
        inst = tiny_instance(seed)
        res = exact_solve(inst, OracleLimits(objective="proc-power"))
        if res.mapping is None:
            continue
        ev = evaluate_mapping(inst, res.mapping)
        cv = evaluate(inst, res.mapping)
        assert ev.feasible
        for name in OBJECTIVES:
            assert math.isclose(ev.cost(res.mapping).get(name), cv.get(name), rel_tol=1e-12, abs_tol=1e-15)


def test_single_node_uses_first_processor():
    inst = make_instance([OperatorSpec(1, 1.0, 1.0)], [], [(1.0, {1: (1, {})})],
                         platform([10, 10, 10], [10, 10, 10]))
    res = exact_solve(inst, OracleLimits(objective="proc-nb"))
    assert res.value == 1
    assert res.mapping.assign == {(1, 1): 1}


def test_infeasible_verdict():
    inst = make_instance([OperatorSpec(1, 5.0, 1.0)], [], [(1.0, {1: (1, {})})],
                         platform([1, 2], [10, 10]))
    res = exact_solve(inst)
    assert res.status == "infeasible"
    assert res.value is None and res.mapping is None
    assert res.states > 0


def test_budget_exceeded():
    inst = max((tiny_instance(s) for s in range(30)), key=lambda i: i.node_count)
    with pytest.raises(BudgetExceeded) as exc:
        exact_solve(inst, OracleLimits(max_states=3, prune=False))
    assert exc.value.states >= 3


def test_too_large_instance_is_refused():
    inst = generate(GenParams(n_apps=3, max_ops_per_app=10, n_procs=6), 1)
    with pytest.raises(OracleError):
        exact_solve(inst)


def _twin_pairs():
    leaf = OperatorSpec(1, 1.0, 1.0, frozenset({1}))
    top = OperatorSpec(2, 1.0, 1.0, frozenset(), frozenset({1}))
    tree = {1: (2, {}), 2: (1, {1: 0.5})}
    return make_instance([leaf, top], [ObjectSpec(1, 1.0)], [(1.0, tree), (1.0, tree)],
                         platform([10, 10], [100, 100], holds={1: {1}, 2: {1}}))


def _similar_pair(seed):
    return make_similar_pair(replace(TINY, n_apps=2, max_ops_per_app=3, n_procs=3), 0, seed)


def test_reuse_lowers_the_optimum():
    inst = _similar_pair(34)
    for obj in ("proc-nb", "proc-power", "bw-sum"):
        with_reuse = exact_solve(inst, OracleLimits(objective=obj))
        without = exact_solve(inst, OracleLimits(objective=obj, allow_reuse=False))
        assert with_reuse.value < without.value, obj
        assert with_reuse.mapping.reuse


@pytest.mark.parametrize("seed", range(20))
def test_reuse_never_raises_the_optimum(seed):
    inst = _similar_pair(seed)
    for obj in OBJECTIVES:
        a = exact_solve(inst, OracleLimits(objective=obj))
        b = exact_solve(inst, OracleLimits(objective=obj, allow_reuse=False))
        if b.value is not None:
            assert a.value <= b.value


def test_no_reuse_space_is_smaller():
    inst = _twin_pairs()
    full = sum(1 for _ in enumerate_mappings(inst))
    plain = sum(1 for _ in enumerate_mappings(inst, allow_reuse=False))
    assert plain < full


@pytest.mark.parametrize("seed", range(20))
def test_heuristic_mappings_lie_in_the_search_space(seed):
    inst = tiny_instance(seed)
    for h in HEURISTICS:
        for s in STRATEGIES:
            res = attempt(inst, h, s, seed=seed)
            if res.ok:
                assert contains(inst, res.mapping)
                assert evaluate_mapping(inst, res.mapping).feasible


def test_ties_keep_the_first_optimum():
    inst = make_instance([OperatorSpec(1, 1.0, 1.0)], [], [(1.0, {1: (1, {})})],
                         platform([10, 10], [10, 10]))
    assert exact_solve(inst, OracleLimits(objective="bw-sum")).mapping.assign == {(1, 1): 1}
