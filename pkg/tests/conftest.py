import os
from importlib import resources
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from opmap.model import (
    ApplicationTree,
    Instance,
    Platform,
    Processor,
    TreeNode,
    load_instance,
    load_mapping,
)

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = resources.files("opmap") / "data"
TEST_DATA = Path(__file__).parent / "data"

# (criterion, passed, detail) lines collected by the acceptance suite
ACCEPTANCE: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def sample():
    return load_instance(DATA / "sample_instance.json")


@pytest.fixture
def sample_mapping():
    return load_mapping(DATA / "sample_mapping.json")


def platform(speeds, nics, link=100.0, holds=None, links=None):
    procs = tuple(Processor(u, float(s), float(b)) for u, (s, b) in enumerate(zip(speeds, nics), start=1))
    ids = [p.id for p in procs]
    bw = {(u, v): float(link) for u in ids for v in ids if u < v}
    if links:
        bw.update({k: float(v) for k, v in links.items()})
    return Platform(procs, bw, {u: frozenset(js) for u, js in (holds or {}).items()})


def make_instance(operators, objects, apps, plat):
    """``apps`` is a list of (throughput, {index: (op, {obj: freq})})."""
    trees = tuple(
        ApplicationTree(k, float(rho), {i: TreeNode(i, op, dict(fr)) for i, (op, fr) in nodes.items()})
        for k, (rho, nodes) in enumerate(apps, start=1)
    )
    return Instance(
        {o.id: o for o in operators}, {o.id: o for o in objects}, trees, plat
    )


def scale_capacities(inst, c):
    plat = inst.platform
    procs = tuple(Processor(p.id, p.speed * c, p.nic_bw * c) for p in plat.processors)
    links = {k: v * c for k, v in plat.links.items()}
    return Instance(inst.operators, inst.objects, inst.apps, Platform(procs, links, plat.holds))


def scale_throughput(inst, c):
    apps = tuple(ApplicationTree(a.app_id, a.throughput * c, a.nodes) for a in inst.apps)
    return Instance(inst.operators, inst.objects, apps, inst.platform)


def feasible_pairs(count, seed=0, allow_reuse=True):
    """``count`` (instance, mapping) pairs drawn from oracle enumerations."""
    import random

    from opmap.generator import tiny_instance
    from opmap.oracle import enumerate_mappings

    rng = random.Random(seed)
    out = []
    s = 0
    while len(out) < count:
        inst = tiny_instance(1000 + s)
        s += 1
        ok = [m for m, ev in enumerate_mappings(inst, allow_reuse) if ev.feasible]
        if ok:
            out.append((inst, rng.choice(ok)))
    return out


def solve_milp(model):
    """Optimum of an exported model with scipy's HiGHS wrapper, as {name: value}."""
    from scipy.optimize import Bounds, LinearConstraint, milp

    mx = model.to_matrices()
    cons = [LinearConstraint(mx["A"], mx["row_lb"], mx["row_ub"])] if len(mx["A"]) else []
    res = milp(mx["c"], constraints=cons, integrality=mx["integrality"],
               bounds=Bounds(mx["lb"], mx["ub"]))
    if res.status != 0:
        return None
    return dict(zip(mx["names"], res.x))
