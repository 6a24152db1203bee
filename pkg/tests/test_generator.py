import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from opmap.generator import GenerationError, GenParams, generate, make_similar_pair, tiny_instance
from opmap.model import dumps, instance_to_dict, validate_instance

SMALL = GenParams(n_apps=3, max_ops_per_app=12, n_procs=6)


def test_defaults_match_the_experimental_setup():
    inst = generate(GenParams(), 42)
    assert validate_instance(inst).ok
    assert len(inst.apps) == 5
    assert all(len(a.nodes) <= 50 for a in inst.apps)
    assert len(inst.platform.processors) == 30
    assert len(inst.objects) == 10


def test_same_seed_same_bytes():
    a = dumps(instance_to_dict(generate(SMALL, 7)))
    b = dumps(instance_to_dict(generate(SMALL, 7)))
    assert a == b
    assert a != dumps(instance_to_dict(generate(SMALL, 8)))


def test_homogeneous_platform():
    plat = generate(GenParams(n_procs=8, homogeneous=True), 3).platform
    assert len({p.speed for p in plat.processors}) == 1
    assert len({p.nic_bw for p in plat.processors}) == 1
    assert len(set(plat.links.values())) == 1
    assert plat.is_homogeneous


def _node_ops(app):
    return {i: n.operator for i, n in app.nodes.items()}


def test_similarity_zero_gives_identical_trees():
    inst = make_similar_pair(SMALL, 0, 5)
    a, b = inst.apps
    assert _node_ops(a) == _node_ops(b)


@pytest.mark.parametrize("n_diff", [0, 3, 10])
def test_exact_number_of_differing_nodes(n_diff):
    inst = make_similar_pair(GenParams(max_ops_per_app=10, n_procs=5), n_diff, 11)
    a, b = inst.apps
    assert len(a.nodes) == 10
    assert a.nodes.keys() == b.nodes.keys()
    assert sum(a.nodes[i].operator != b.nodes[i].operator for i in a.nodes) == n_diff
    assert validate_instance(inst).ok


def test_full_difference_gives_disjoint_operators():
    inst = make_similar_pair(GenParams(max_ops_per_app=10, n_procs=5), 10, 2)
    a, b = inst.apps
    assert not set(_node_ops(a).values()) & set(_node_ops(b).values())


def test_similarity_larger_than_tree_fails():
    with pytest.raises(GenerationError):
        make_similar_pair(GenParams(max_ops_per_app=10, n_procs=5), 11, 0)


def test_ccr_rescales_output_sizes():
    inst = generate(GenParams(max_ops_per_app=20, ccr=60), 9)
    ops = inst.operators.values()
    ratio = (sum(o.out_size for o in ops) / len(ops)) / (sum(o.comp for o in ops) / len(ops))
    assert ratio == pytest.approx(60, rel=0.01)


def test_invalid_params_rejected():
    with pytest.raises(ValueError):
        generate(GenParams(n_apps=0), 1)
    with pytest.raises(ValueError):
        generate(GenParams(speed_range=(5.0, 1.0)), 1)


@settings(max_examples=40)
@given(st.integers(min_value=0, max_value=2**63 - 1))
def test_generated_values_in_range(seed):
    p = SMALL
    inst = generate(p, seed)
    assert validate_instance(inst).ok
    for ob in inst.objects.values():
        assert p.obj_size_range[0] <= ob.size <= p.obj_size_range[1]
    for op in inst.operators.values():
        assert p.comp_range[0] <= op.comp <= p.comp_range[1]
        assert p.out_size_range[0] <= op.out_size <= p.out_size_range[1]
    for a in inst.apps:
        assert p.throughput_range[0] <= a.throughput <= p.throughput_range[1]
        assert 1 <= len(a.nodes) <= p.max_ops_per_app
        for n in a.nodes.values():
            assert all(0 < f <= 1 for f in n.object_freqs.values())
    for q in inst.platform.processors:
        assert p.speed_range[0] <= q.speed <= p.speed_range[1]
        assert p.nic_range[0] <= q.nic_bw <= p.nic_range[1]
    assert all(p.link_range[0] <= b <= p.link_range[1] for b in inst.platform.links.values())


@given(st.integers(min_value=0, max_value=100_000))
def test_tiny_instances_stay_tiny(seed):
    inst = tiny_instance(seed)
    assert validate_instance(inst).ok
    assert len(inst.apps) <= 2
    assert all(len(a.nodes) <= 4 for a in inst.apps)
    assert len(inst.platform.processors) <= 4
    assert len(inst.objects) <= 3
