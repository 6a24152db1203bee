import pytest

from opmap.model import Mapping, ObjectSpec, OperatorSpec
from opmap.objectives import OBJECTIVES, CostVector, evaluate
from opmap.oracle import evaluate_mapping

from conftest import make_instance, platform

LEAF = OperatorSpec(1, 2.0, 1.0, frozenset({1}))
TOP = OperatorSpec(2, 1.0, 0.5, frozenset(), frozenset({1}))


def twins(rho=(1.0, 1.0)):
    return make_instance(
        [LEAF, TOP], [ObjectSpec(1, 2.0)],
        [(r, {1: (2, {}), 2: (1, {1: 0.5})}) for r in rho],
        platform([10, 10], [50, 50], link=40, holds={1: {1}, 2: {1}}),
    )


def test_single_processor_costs():
    inst = twins()
    c = evaluate(inst, Mapping({(1, 1): 1, (1, 2): 1, (2, 1): 1, (2, 2): 1}))
    assert c.proc_nb == 1 and c.bw_sum == 0 and c.bw_max == 0
    # each operator computed once at rate 1 on a speed-10 processor
    assert c.proc_power == pytest.approx(0.3)


def test_empty_instance_costs_nothing():
    inst = make_instance([], [], [], platform([1, 2], [1, 1]))
    assert evaluate(inst, Mapping()) == CostVector(0, 0.0, 0.0, 0.0)


def test_sample_costs_match_independent_evaluation(sample, sample_mapping):
    assert evaluate(sample, sample_mapping) == evaluate_mapping(sample, sample_mapping).cost(sample_mapping)


def test_bw_sum_counts_each_flow_once():
    inst = twins((1.0,))
    c = evaluate(inst, Mapping({(1, 1): 1, (1, 2): 2}))
    # the leaf's 1 MB result at 1 result/s crosses one link
    assert c.bw_sum == 1.0
    assert c.bw_max == 1.0 / 40


def test_reuse_lowers_proc_power():
    inst = twins()
    fresh = Mapping({(1, 1): 1, (1, 2): 1, (2, 1): 2, (2, 2): 2})
    reused = Mapping({(1, 1): 1, (1, 2): 1, (2, 1): 2}, {(2, 2): (1, 2)})
    assert evaluate(inst, reused).proc_power < evaluate(inst, fresh).proc_power


def test_get_by_name():
    c = CostVector(2, 0.5, 3.0, 0.1)
    assert [c.get(o) for o in OBJECTIVES] == [2, 0.5, 3.0, 0.1]
