"""Exact exhaustive solver and independent constraint evaluator for tiny instances.

The search enumerates every non-chained reuse configuration, every
node-to-processor assignment of the nodes left to compute, and every
choice of download source.  Rates and loads are derived here from
scratch; nothing is shared with ``opmap.feasibility``.

The hot loop lives in a compiled kernel (``_kernel``) with a pure-Python
twin (``_kernel_py``) selected when the extension is unavailable or when
``OPMAP_PURE_PYTHON`` is set.
"""
from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from ..model import Instance, Mapping, NodeKey, validate_instance
from ..objectives import OBJECTIVES, CostVector
from . import _kernel_py

try:
    if os.environ.get("OPMAP_PURE_PYTHON"):
        raise ImportError("pure Python kernel requested")
    from . import _kernel as _compiled
except ImportError:
    _compiled = None

kernel = _compiled if _compiled is not None else _kernel_py
BACKEND = "cython" if _compiled is not None else "python"

TOL = 1e-9
_OBJ_CODE = {"proc-nb": 0, "proc-power": 1, "bw-sum": 2, "bw-max": 3}


def available_kernels() -> dict:
    out = {"python": _kernel_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out


class OracleError(Exception):
    pass


class BudgetExceeded(OracleError):
    def __init__(self, states: int, partial: "OracleResult | None"):
        super().__init__(f"state budget exhausted after {states} states")
        self.states = states
        self.partial = partial


@dataclass(frozen=True)
class OracleLimits:
    max_nodes: int = 8
    max_procs: int = 4
    max_states: int = 10_000_000
    objective: str = "proc-power"
    allow_reuse: bool = True
    prune: bool = True

    def __post_init__(self):
        if self.max_states <= 0:
            raise ValueError("max_states must be positive")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}")


@dataclass
class OracleResult:
    status: str  # optimal | infeasible
    objective: str
    value: float | None
    mapping: Mapping | None
    states: int
    cost: CostVector | None = None


@dataclass
class OracleEval:
    feasible: bool
    compute: dict[int, float]
    recv: dict[int, float]
    send: dict[int, float]
    nic: dict[int, float]
    link: dict[tuple[int, int], float]

    def cost(self, m: Mapping) -> CostVector:
        return CostVector(
            proc_nb=len(set(m.assign.values())),
            proc_power=_fsum_in_order(self.compute.values()),
            bw_sum=_fsum_in_order(self.link.values()),
            bw_max=max((x / self._bl[p] for p, x in self.link.items()), default=0.0),
        )

    _bl: dict = field(default_factory=dict, repr=False)


def _fsum_in_order(xs) -> float:
    t = 0.0
    for x in xs:
        t += x
    return t


class _Platform:
    """Dense re-indexing of processors, operators and objects."""

    def __init__(self, inst: Instance):
        plat = inst.platform
        self.pids = plat.ids
        self.pidx = {u: a for a, u in enumerate(self.pids)}
        self.opids = sorted(inst.operators)
        self.opidx = {p: a for a, p in enumerate(self.opids)}
        self.objids = sorted(inst.objects)
        self.objidx = {j: a for a, j in enumerate(self.objids)}
        P, J = len(self.pids), len(self.objids)
        self.P, self.nops, self.J = P, len(self.opids), J
        self.speed = np.array([plat.proc[u].speed for u in self.pids], dtype=np.float64)
        self.nic = np.array([plat.proc[u].nic_bw for u in self.pids], dtype=np.float64)
        bl = np.zeros(P * P)
        for (u, v), b in plat.links.items():
            a, c = self.pidx[u], self.pidx[v]
            bl[a * P + c] = bl[c * P + a] = b
        self.bl = bl
        self.w = np.array([inst.operators[p].comp for p in self.opids], dtype=np.float64)
        self.delta = np.array([inst.operators[p].out_size for p in self.opids], dtype=np.float64)
        holds = np.zeros(P * J, dtype=np.int64)
        ptr, lst = [0], []
        for jj, j in enumerate(self.objids):
            for a, u in enumerate(self.pids):
                if plat.has(u, j):
                    holds[a * J + jj] = 1
                    lst.append(a)
            ptr.append(len(lst))
        self.holds = holds
        self.hold_ptr = np.array(ptr, dtype=np.int64)
        self.hold_list = np.array(lst, dtype=np.int64)


@dataclass
class _Config:
    reuse: dict[NodeKey, NodeKey]
    nodes: list[NodeKey]
    node_op: np.ndarray
    node_rate: np.ndarray
    e_from: np.ndarray
    e_to: np.ndarray
    e_op: np.ndarray
    e_rate: np.ndarray
    need_node: np.ndarray
    need_obj: np.ndarray
    need_rate: np.ndarray


def _subtree(inst: Instance, n: NodeKey) -> list[NodeKey]:
    k, i = n
    return [(k, s) for s in inst.app[k].subtree(i)]


def reuse_configs(inst: Instance, allow_reuse: bool = True) -> Iterator[dict[NodeKey, NodeKey]]:
    """Every non-chained reuse configuration, the empty one first."""
    nodes = list(inst.nodes())
    if not allow_reuse:
        yield {}
        return
    by_op: dict[int, list[NodeKey]] = {}
    for n in nodes:
        by_op.setdefault(inst.op_of(n).id, []).append(n)
    options = [[None] + [q for q in by_op[inst.op_of(c).id] if q != c] for c in nodes]
    for choice in itertools.product(*options):
        cfg = {c: q for c, q in zip(nodes, choice) if q is not None}
        covered: set[NodeKey] = set()
        ok = True
        for c in cfg:
            sub = _subtree(inst, c)
            if covered.intersection(sub):
                ok = False
                break
            covered.update(sub)
        if ok and not any(q in covered for q in cfg.values()):
            yield cfg


def _rates(inst: Instance, cfg: dict[NodeKey, NodeKey], computed: list[NodeKey]) -> dict:
    """Effective (throughput, app) per computed node via worklist propagation."""
    rate = {n: (inst.rho(n[0]), n[0]) for n in computed}
    feeds: dict[NodeKey, list[NodeKey]] = {n: [] for n in computed}
    for n in computed:
        k, i = n
        for c in inst.app[k].children(i):
            child = (k, c)
            feeds[n].append(cfg[child] if child in cfg else child)
    work = list(computed)
    for c, q in cfg.items():
        if c[1] == 1:
            d = (inst.rho(c[0]), c[0])
            if d[0] > rate[q][0] or (d[0] == rate[q][0] and d[1] < rate[q][1]):
                rate[q] = d
                work.append(q)
    while work:
        n = work.pop()
        for m in feeds[n]:
            r, o = rate[n], rate[m]
            if r[0] > o[0] or (r[0] == o[0] and r[1] < o[1]):
                rate[m] = r
                work.append(m)
    return rate


def _config(inst: Instance, plat: _Platform, cfg: dict[NodeKey, NodeKey]) -> _Config:
    covered: set[NodeKey] = set()
    for c in cfg:
        covered.update(_subtree(inst, c))
    nodes = [n for n in inst.nodes() if n not in covered]
    pos = {n: a for a, n in enumerate(nodes)}
    rate = _rates(inst, cfg, nodes)
    ef, et, eo, er = [], [], [], []
    for n in nodes:
        k, i = n
        if i > 1:
            par = (k, i // 2)
            ef.append(pos[n]); et.append(pos[par])
            eo.append(plat.opidx[inst.op_of(n).id]); er.append(rate[par][0])
    for c, q in sorted(cfg.items()):
        k, i = c
        if i > 1:
            par = (k, i // 2)
            ef.append(pos[q]); et.append(pos[par])
            eo.append(plat.opidx[inst.op_of(q).id]); er.append(rate[par][0])
    nn, nj, nr = [], [], []
    for n in nodes:
        freqs = inst.app[n[0]].nodes[n[1]].object_freqs
        for j in sorted(inst.op_of(n).required_objects):
            nn.append(pos[n]); nj.append(plat.objidx[j])
            nr.append(inst.objects[j].size * freqs[j])
    i64 = np.int64
    return _Config(
        reuse=cfg,
        nodes=nodes,
        node_op=np.array([plat.opidx[inst.op_of(n).id] for n in nodes], dtype=i64),
        node_rate=np.array([rate[n][0] for n in nodes], dtype=np.float64),
        e_from=np.array(ef, dtype=i64), e_to=np.array(et, dtype=i64),
        e_op=np.array(eo, dtype=i64), e_rate=np.array(er, dtype=np.float64),
        need_node=np.array(nn, dtype=i64), need_obj=np.array(nj, dtype=i64),
        need_rate=np.array(nr, dtype=np.float64),
    )


def _args(k, plat: _Platform, c: _Config) -> tuple:
    arrays = (
        plat.speed, plat.nic, plat.bl, plat.w, plat.delta, plat.holds,
    )
    cfg = (c.node_op, c.node_rate)
    edges = (c.e_from, c.e_to, c.e_op, c.e_rate, c.need_node, c.need_obj, c.need_rate)
    if k is _kernel_py:
        arrays = tuple(x.tolist() for x in arrays)
        cfg = tuple(x.tolist() for x in cfg)
        edges = tuple(x.tolist() for x in edges)
    return arrays, cfg, edges


def _evaluate(k, plat: _Platform, c: _Config, assign, src) -> tuple[int, list]:
    P = plat.P
    arrays, cfg, edges = _args(k, plat, c)
    if k is _kernel_py:
        outs = [[0.0] * P, [0.0] * P, [0.0] * P, [0.0] * P, [0.0] * (P * P)]
        assign, src = list(assign), list(src)
    else:
        outs = [np.zeros(P), np.zeros(P), np.zeros(P), np.zeros(P), np.zeros(P * P)]
        assign = np.asarray(assign, dtype=np.int64)
        src = np.asarray(src, dtype=np.int64)
    ok = k.evaluate(P, plat.nops, plat.J, *arrays, *cfg, assign, *edges, src, TOL, *outs)
    return ok, outs


def _to_eval(inst: Instance, plat: _Platform, ok: int, outs) -> OracleEval:
    comp, recv, send, nicl, link = outs
    P, ids = plat.P, plat.pids
    links = {}
    for a in range(P):
        for b in range(a + 1, P):
            links[(ids[a], ids[b])] = float(link[a * P + b])
    return OracleEval(
        feasible=bool(ok),
        compute={ids[a]: float(comp[a]) for a in range(P)},
        recv={ids[a]: float(recv[a]) for a in range(P)},
        send={ids[a]: float(send[a]) for a in range(P)},
        nic={ids[a]: float(nicl[a]) for a in range(P)},
        link=links,
        _bl=dict(inst.platform.links),
    )


def _mapping(plat: _Platform, c: _Config, assign, src) -> Mapping:
    J = plat.J
    downloads = {}
    for x, v in enumerate(src):
        if v >= 0:
            downloads[(plat.pids[x // J], plat.objids[x % J])] = plat.pids[int(v)]
    return Mapping(
        assign={n: plat.pids[int(a)] for n, a in zip(c.nodes, assign)},
        reuse=dict(c.reuse),
        download_src=downloads,
    )


def _needed(plat: _Platform, c: _Config, assign) -> list[int]:
    J = plat.J
    keys = set()
    for n, j in zip(c.need_node.tolist(), c.need_obj.tolist()):
        u = int(assign[n])
        if not plat.holds[u * J + j]:
            keys.add(u * J + j)
    return sorted(keys)


def _check_limits(inst: Instance, max_nodes: int, max_procs: int) -> None:
    report = validate_instance(inst)
    if not report.ok:
        raise OracleError(f"invalid instance: {report.violations[0]}")
    if inst.node_count > max_nodes or len(inst.platform.processors) > max_procs:
        raise OracleError(
            f"instance too large for exhaustive search "
            f"({inst.node_count} nodes, {len(inst.platform.processors)} processors)"
        )


def evaluate_mapping(inst: Instance, m: Mapping, backend: str | None = None) -> OracleEval:
    """Recompute every constraint left-hand side for ``m`` from scratch."""
    k = available_kernels()[backend] if backend else kernel
    plat = _Platform(inst)
    c = _config(inst, plat, dict(m.reuse))
    if set(c.nodes) != set(m.assign):
        raise OracleError("assignment does not cover exactly the computed nodes")
    assign = [plat.pidx[m.assign[n]] for n in c.nodes]
    src = [-1] * (plat.P * plat.J)
    for (u, j), v in m.download_src.items():
        if not inst.platform.has(u, j):
            src[plat.pidx[u] * plat.J + plat.objidx[j]] = plat.pidx[v]
    ok, outs = _evaluate(k, plat, c, assign, src)
    return _to_eval(inst, plat, ok, outs)


def enumerate_mappings(
    inst: Instance, allow_reuse: bool = True, backend: str | None = None
) -> Iterator[tuple[Mapping, OracleEval]]:
    """Every complete mapping with its independent evaluation."""
    k = available_kernels()[backend] if backend else kernel
    plat = _Platform(inst)
    P, J = plat.P, plat.J
    for cfg in reuse_configs(inst, allow_reuse):
        c = _config(inst, plat, cfg)
        for assign in itertools.product(range(P), repeat=len(c.nodes)):
            keys = _needed(plat, c, assign)
            choices = [
                plat.hold_list[plat.hold_ptr[x % J]:plat.hold_ptr[x % J + 1]].tolist()
                for x in keys
            ]
            for combo in itertools.product(*choices):
                src = [-1] * (P * J)
                for x, v in zip(keys, combo):
                    src[x] = v
                ok, outs = _evaluate(k, plat, c, assign, src)
                yield _mapping(plat, c, assign, src), _to_eval(inst, plat, ok, outs)


def contains(inst: Instance, m: Mapping, allow_reuse: bool = True) -> bool:
    """Whether ``m`` lies in the space the exhaustive search covers."""
    plat = _Platform(inst)
    configs = list(reuse_configs(inst, allow_reuse))
    if dict(m.reuse) not in configs:
        return False
    c = _config(inst, plat, dict(m.reuse))
    if set(c.nodes) != set(m.assign) or any(u not in plat.pidx for u in m.assign.values()):
        return False
    assign = [plat.pidx[m.assign[n]] for n in c.nodes]
    J = plat.J
    want = {(plat.pids[x // J], plat.objids[x % J]) for x in _needed(plat, c, assign)}
    if set(m.download_src) != want:
        return False
    return all(inst.platform.has(v, j) and v != u for (u, j), v in m.download_src.items())


def exact_solve(inst: Instance, limits: OracleLimits = OracleLimits(), backend: str | None = None) -> OracleResult:
    """Minimize ``limits.objective`` over the whole mapping space.

    Ties keep the first optimum met: reuse configurations in enumeration
    order (the empty one first), then assignments in lexicographic order of
    processor ids over the canonical node order.
    """
    _check_limits(inst, limits.max_nodes, limits.max_procs)
    k = available_kernels()[backend] if backend else kernel
    plat = _Platform(inst)
    code = _OBJ_CODE[limits.objective]
    best, best_map, states = math.inf, None, 0
    for cfg in reuse_configs(inst, limits.allow_reuse):
        c = _config(inst, plat, cfg)
        arrays, cfgarr, edges = _args(k, plat, c)
        n = len(c.nodes)
        if k is _kernel_py:
            ba, bs = [-1] * n, [-1] * (plat.P * plat.J)
            ptrs = (plat.hold_ptr.tolist(), plat.hold_list.tolist())
        else:
            ba, bs = np.full(n, -1, dtype=np.int64), np.full(plat.P * plat.J, -1, dtype=np.int64)
            ptrs = (plat.hold_ptr, plat.hold_list)
        speed, nic, bl, w, delta, holds = arrays
        status, val, found, used = k.search(
            plat.P, plat.nops, plat.J, speed, nic, bl, w, delta, holds, *ptrs,
            *cfgarr, *edges, code, TOL, limits.prune,
            limits.max_states - states, best, ba, bs,
        )
        states += used
        if found:
            best = val
            best_map = _mapping(plat, c, list(ba), list(bs))
        if status == _kernel_py.STATUS_BUDGET:
            partial = None
            if best_map is not None:
                partial = OracleResult("partial", limits.objective, best, best_map, states)
            raise BudgetExceeded(states, partial)
    if best_map is None:
        return OracleResult("infeasible", limits.objective, None, None, states)
    ev = evaluate_mapping(inst, best_map, backend)
    return OracleResult("optimal", limits.objective, best, best_map, states, ev.cost(best_map))
