"""Steady-state feasibility of a mapping.

Builds the per-processor communication sets (incoming results, outgoing
results, object downloads) and evaluates the four constraint families:
compute (per processor), per-processor receive/send link shares, NIC
bandwidth and pairwise link bandwidth.

Rates.  A node runs at the throughput of its application, raised to
whatever its consumers demand: a node feeding a parent that runs at rate
r must itself run at r, and a producer whose result is reused must run at
the rate of every consumer's parent (or the consumer application's
throughput, for a reused root).  Rates are (throughput, app_id) pairs; a
higher throughput wins and equal throughputs resolve to the lowest app id.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import FEAS_RTOL, Instance, Mapping, NodeKey

Rate = tuple[float, int]  # (throughput, app_id that imposes it)


class MappingError(ValueError):
    """The mapping does not describe a well-formed placement."""


class IncompleteMappingError(MappingError):
    """Some node is neither placed nor covered by reuse, or a download is unsourced."""


def _better(a: Rate, b: Rate) -> bool:
    return a[0] > b[0] or (a[0] == b[0] and a[1] < b[1])


@dataclass
class _Resolved:
    assigned: list[NodeKey]
    satisfied: set[NodeKey]
    eff: dict[NodeKey, Rate]


def _resolve(inst: Instance, m: Mapping) -> _Resolved:
    apps = inst.app
    procs = inst.platform.proc

    def exists(n: NodeKey) -> bool:
        return n[0] in apps and n[1] in apps[n[0]].nodes

    for n, u in m.assign.items():
        if not exists(n):
            raise MappingError(f"assignment of unknown node {n}")
        if u not in procs:
            raise MappingError(f"node {n} assigned to unknown processor {u}")

    satisfied: set[NodeKey] = set()
    for c, q in m.reuse.items():
        if not exists(c) or not exists(q):
            raise MappingError(f"reuse record {c} <- {q} names an unknown node")
        if c in m.assign:
            raise MappingError(f"reuse consumer {c} is also assigned")
        if q not in m.assign:
            raise MappingError(f"reuse producer {q} is not assigned")
        if inst.op_of(c).id != inst.op_of(q).id:
            raise MappingError(f"reuse {c} <- {q} joins different operators")
    for c in m.reuse:
        k, i = c
        a = i // 2
        while a >= 1:
            if (k, a) in m.reuse:
                raise MappingError(f"reuse consumer {c} lies inside reused subtree of {(k, a)}")
            a //= 2
        satisfied.update((k, s) for s in apps[k].subtree(i))

    clash = satisfied & m.assign.keys()
    if clash:
        raise MappingError(f"nodes {sorted(clash)} are both assigned and covered by reuse")
    missing = [n for n in inst.nodes() if n not in m.assign and n not in satisfied]
    if missing:
        raise IncompleteMappingError(f"unmapped nodes: {missing}")

    assigned = [n for n in inst.nodes() if n in m.assign]
    eff: dict[NodeKey, Rate] = {n: (inst.rho(n[0]), n[0]) for n in assigned}
    changed = True
    while changed:
        changed = False
        for n in assigned:
            k, i = n
            if i > 1 and _better(eff[(k, i // 2)], eff[n]):
                eff[n] = eff[(k, i // 2)]
                changed = True
        for c, q in sorted(m.reuse.items()):
            k, i = c
            demand = (inst.rho(k), k) if i == 1 else eff[(k, i // 2)]
            if _better(demand, eff[q]):
                eff[q] = demand
                changed = True

    needed = set()
    plat = inst.platform
    for n in assigned:
        u = m.assign[n]
        for j in inst.op_of(n).required_objects:
            if not plat.has(u, j):
                needed.add((u, j))
    for (u, j), v in m.download_src.items():
        if (u, j) in needed:
            if v == u or not plat.has(v, j):
                raise MappingError(f"processor {u} downloads object {j} from non-holder {v}")
        elif not (v == u and plat.has(u, j)):
            raise MappingError(f"download of object {j} at processor {u} is not needed")
    unsourced = sorted(needed - m.download_src.keys())
    if unsourced:
        raise IncompleteMappingError(f"no download source for (processor, object) {unsourced}")
    return _Resolved(assigned, satisfied, eff)


@dataclass(frozen=True)
class CommSets:
    """Per-processor flow sets after (operator, peer) deduplication."""

    ch: dict[int, frozenset[tuple[int, int, int]]]
    par: dict[int, frozenset[tuple[int, int, int]]]
    down: dict[int, frozenset[tuple[int, int, int]]]
    # processor -> {(operator, max rate)} computed there
    ops: dict[int, dict[int, float]] = field(default_factory=dict)


def build_comm_sets(inst: Instance, m: Mapping) -> CommSets:
    r = _resolve(inst, m)
    a, eff = m.assign, r.eff
    flows: dict[tuple[int, int, int], Rate] = {}

    def add_flow(p: int, s: int, d: int, rate: Rate) -> None:
        if s == d:
            return
        key = (p, s, d)
        if key not in flows or _better(rate, flows[key]):
            flows[key] = rate

    for n in r.assigned:
        k, i = n
        if i > 1:
            parent = (k, i // 2)
            add_flow(inst.op_of(n).id, a[n], a[parent], eff[parent])
    for c, q in m.reuse.items():
        k, i = c
        if i > 1:
            parent = (k, i // 2)
            add_flow(inst.op_of(q).id, a[q], a[parent], eff[parent])

    ch: dict[int, set] = {u: set() for u in inst.platform.ids}
    par: dict[int, set] = {u: set() for u in inst.platform.ids}
    for (p, s, d), (_, k) in flows.items():
        ch[d].add((p, s, k))
        par[s].add((p, d, k))

    down: dict[int, set] = {u: set() for u in inst.platform.ids}
    ops: dict[int, dict[int, float]] = {u: {} for u in inst.platform.ids}
    for n in r.assigned:
        u = a[n]
        op = inst.op_of(n)
        rate = eff[n][0]
        if rate > ops[u].get(op.id, 0.0):
            ops[u][op.id] = rate
        for j in op.required_objects:
            if not inst.platform.has(u, j):
                down[u].add((j, m.download_src[(u, j)], n[0]))

    return CommSets(
        ch={u: frozenset(s) for u, s in ch.items()},
        par={u: frozenset(s) for u, s in par.items()},
        down={u: frozenset(s) for u, s in down.items()},
        ops=ops,
    )


def _compute(inst: Instance, ops_on: dict[int, float], u: int) -> float:
    if not ops_on:
        return 0.0
    s = inst.platform.proc[u].speed
    if s == 0:
        return math.inf
    return sum(rate * inst.operators[p].comp / s for p, rate in sorted(ops_on.items()))


def compute_load(inst: Instance, m: Mapping, u: int) -> float:
    """Left-hand side of the compute constraint on processor ``u``."""
    return _compute(inst, build_comm_sets(inst, m).ops[u], u)


@dataclass(frozen=True)
class ConstraintViolation:
    constraint: str  # compute | receive | send | nic | link
    entity: int | tuple[int, int]
    load: float
    capacity: float


@dataclass(frozen=True)
class FeasibilityReport:
    compute_util: dict[int, float]
    recv_util: dict[int, float]
    send_util: dict[int, float]
    nic_load: dict[int, float]
    link_load: dict[tuple[int, int], float]
    violations: tuple[ConstraintViolation, ...]

    @property
    def feasible(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        def num(x: float):
            return "inf" if math.isinf(x) else x

        return {
            "feasible": self.feasible,
            "compute_util": {str(u): num(x) for u, x in sorted(self.compute_util.items())},
            "recv_util": {str(u): x for u, x in sorted(self.recv_util.items())},
            "send_util": {str(u): x for u, x in sorted(self.send_util.items())},
            "nic_load": {str(u): x for u, x in sorted(self.nic_load.items())},
            "link_load": {f"{u}-{v}": x for (u, v), x in sorted(self.link_load.items())},
            "violations": [
                {
                    "constraint": c.constraint,
                    "entity": list(c.entity) if isinstance(c.entity, tuple) else c.entity,
                    "load": num(c.load),
                    "capacity": c.capacity,
                }
                for c in self.violations
            ],
        }


def _download_rates(inst: Instance, sets: CommSets) -> dict[tuple[int, int], tuple[int, float]]:
    """(downloader, object) -> (source, deduplicated rate)."""
    out: dict[tuple[int, int], tuple[int, float]] = {}
    for u, tuples in sets.down.items():
        for j, v, k in sorted(tuples):
            rate = inst.objects[j].size * inst.app[k].frequency(j)
            prev = out.get((u, j))
            out[(u, j)] = (v, rate if prev is None else max(prev[1], rate))
    return out


def loads_from_sets(inst: Instance, sets: CommSets) -> FeasibilityReport:
    plat = inst.platform
    ids = plat.ids
    compute = {u: _compute(inst, sets.ops[u], u) for u in ids}
    recv = {u: 0.0 for u in ids}
    send = {u: 0.0 for u in ids}
    nic = {u: 0.0 for u in ids}
    link = {pair: 0.0 for pair in sorted(plat.links)}

    for u in ids:
        for p, v, k in sorted(sets.ch[u]):
            vol = inst.rho(k) * inst.operators[p].out_size
            recv[u] += vol / plat.bw(v, u)
            nic[u] += vol
        for p, v, k in sorted(sets.par[u]):
            vol = inst.rho(k) * inst.operators[p].out_size
            send[u] += vol / plat.bw(u, v)
            nic[u] += vol
            link[(u, v) if u < v else (v, u)] += vol
    for (u, j), (v, rate) in sorted(_download_rates(inst, sets).items()):
        nic[u] += rate
        nic[v] += rate
        link[(u, v) if u < v else (v, u)] += rate

    viol: list[ConstraintViolation] = []
    slack = 1.0 + FEAS_RTOL
    for u in ids:
        if compute[u] > slack:
            viol.append(ConstraintViolation("compute", u, compute[u], 1.0))
    for u in ids:
        if recv[u] > slack:
            viol.append(ConstraintViolation("receive", u, recv[u], 1.0))
    for u in ids:
        if send[u] > slack:
            viol.append(ConstraintViolation("send", u, send[u], 1.0))
    for u in ids:
        cap = plat.proc[u].nic_bw
        if nic[u] > cap * slack:
            viol.append(ConstraintViolation("nic", u, nic[u], cap))
    for pair, load in link.items():
        cap = plat.links[pair]
        if load > cap * slack:
            viol.append(ConstraintViolation("link", pair, load, cap))
    return FeasibilityReport(compute, recv, send, nic, link, tuple(viol))


def check(inst: Instance, m: Mapping) -> FeasibilityReport:
    """Evaluate every constraint; raises ``MappingError`` on malformed input."""
    return loads_from_sets(inst, build_comm_sets(inst, m))
