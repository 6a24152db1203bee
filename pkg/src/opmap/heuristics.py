"""Greedy mapping heuristics H1-H6 with processor-selection strategies S1-S4.

All heuristics grow a partial mapping node by node on a ``BuilderState``
that keeps every constraint's left-hand side as a running sum, so a
tentative placement only touches the rows it affects and is rolled back
through an undo log when any of them overflows.

Heuristics::

    h1  RandomNoReuse   random order, no reuse
    h2  Random          random order, reuse when the operator is mapped
    h3  TopDownBFS      forest BFS, father's processor, then reuse
    h4  TopDownDFS      as h3 in preorder
    h5  BottomUpBFS     reverse BFS, reuse, then children's processors
    h6  BottomUpDFS     postorder, climbs to the highest reusable ancestor

Strategies::

    s1  fastest processor first (blocking)
    s2  biggest NIC first (blocking)
    s3  most remaining compute (speed x free share)
    s4  most remaining NIC bandwidth
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .feasibility import check
from .model import Instance, Mapping, NodeKey

HEURISTICS = {
    "h1": "RandomNoReuse",
    "h2": "Random",
    "h3": "TopDownBFS",
    "h4": "TopDownDFS",
    "h5": "BottomUpBFS",
    "h6": "BottomUpDFS",
}
STRATEGIES = ("s1", "s2", "s3", "s4")
BLOCKING = ("s1", "s2")

# Stricter than the checker's slack so running-sum rounding can never
# produce a mapping the checker rejects.
_TOL = 1e-10
_MISSING = object()

Rate = tuple[float, int]


def _better(a: Rate, b: Rate) -> bool:
    return a[0] > b[0] or (a[0] == b[0] and a[1] < b[1])


class HeuristicFailure(Exception):
    def __init__(self, node: NodeKey | None, reason: str):
        super().__init__(f"node {node}: {reason}")
        self.node = node
        self.reason = reason

    def to_dict(self) -> dict:
        return {"node": list(self.node) if self.node else None, "reason": self.reason}


class BuilderState:
    """Partial mapping plus incremental constraint loads."""

    def __init__(self, inst: Instance):
        self.inst = inst
        plat = inst.platform
        self.plat = plat
        self.speed = {u: plat.proc[u].speed for u in plat.ids}
        self.nic_cap = {u: plat.proc[u].nic_bw for u in plat.ids}

        self.op: dict[NodeKey, int] = {}
        self.kids: dict[NodeKey, list[NodeKey]] = {}
        self.parent: dict[NodeKey, NodeKey | None] = {}
        for a in inst.apps:
            k = a.app_id
            for i, node in a.nodes.items():
                self.op[(k, i)] = node.operator
                self.kids[(k, i)] = [(k, c) for c in a.children(i)]
                self.parent[(k, i)] = (k, i // 2) if i > 1 else None
        self.w = {p: o.comp for p, o in inst.operators.items()}
        self.delta = {p: o.out_size for p, o in inst.operators.items()}
        self.objs = {p: sorted(o.required_objects) for p, o in inst.operators.items()}

        self.assign: dict[NodeKey, int] = {}
        self.reuse: dict[NodeKey, NodeKey] = {}
        self.satisfied: dict[NodeKey, bool] = {}
        self.eff: dict[NodeKey, Rate] = {}
        self.registry: dict[int, tuple[NodeKey, ...]] = {}
        self.dl_src: dict[tuple[int, int], int] = {}
        self.dl_rate: dict[tuple[int, int], float] = {}
        self.ops_rate: dict[int, dict[int, float]] = {u: {} for u in plat.ids}
        self.flows: dict[tuple[int, int, int], Rate] = {}

        self.compute = dict.fromkeys(plat.ids, 0.0)
        self.recv = dict.fromkeys(plat.ids, 0.0)
        self.send = dict.fromkeys(plat.ids, 0.0)
        self.nic = dict.fromkeys(plat.ids, 0.0)
        self.link = dict.fromkeys(plat.links, 0.0)

        self._log: list = []
        self._touched_p: set[int] = set()
        self._touched_l: set[tuple[int, int]] = set()

    # -- undo log ---------------------------------------------------------

    def _set(self, d: dict, key, val) -> None:
        self._log.append((d, key, d.get(key, _MISSING)))
        d[key] = val

    def _del(self, d: dict, key) -> None:
        self._log.append((d, key, d[key]))
        del d[key]

    def _load(self, d: dict, key, delta: float) -> None:
        self._log.append((d, key, d[key]))
        d[key] += delta

    def _begin(self) -> None:
        self._log = []
        self._touched_p = set()
        self._touched_l = set()

    def _rollback(self) -> None:
        for d, key, old in reversed(self._log):
            if old is _MISSING:
                del d[key]
            else:
                d[key] = old
        self._log = []

    def _ok(self) -> bool:
        hi = 1.0 + _TOL
        for u in self._touched_p:
            if self.compute[u] > hi or self.recv[u] > hi or self.send[u] > hi:
                return False
            if self.nic[u] > self.nic_cap[u] * hi:
                return False
        for pair in self._touched_l:
            if self.link[pair] > self.plat.links[pair] * hi:
                return False
        return True

    def _finish(self) -> bool:
        if self._ok():
            self._log = []
            return True
        self._rollback()
        return False

    # -- primitive updates --------------------------------------------------

    def _ops(self, u: int, p: int, rate: float) -> None:
        old = self.ops_rate[u].get(p, 0.0)
        if rate <= old:
            return
        self._set(self.ops_rate[u], p, rate)
        s = self.speed[u]
        if s == 0:
            self._set(self.compute, u, math.inf)
        else:
            self._load(self.compute, u, (rate - old) * self.w[p] / s)
        self._touched_p.add(u)

    def _traffic(self, s: int, d: int, vol: float) -> None:
        pair = (s, d) if s < d else (d, s)
        self._load(self.nic, s, vol)
        self._load(self.nic, d, vol)
        self._load(self.link, pair, vol)
        self._touched_p.update((s, d))
        self._touched_l.add(pair)

    def _flow(self, p: int, s: int, d: int, rate: Rate) -> None:
        if s == d:
            return
        key = (p, s, d)
        old = self.flows.get(key)
        if old is not None and not _better(rate, old):
            return
        self._set(self.flows, key, rate)
        dv = (rate[0] - (old[0] if old else 0.0)) * self.delta[p]
        if dv == 0:
            return
        bw = self.plat.bw(s, d)
        self._load(self.recv, d, dv / bw)
        self._load(self.send, s, dv / bw)
        self._traffic(s, d, dv)

    def _pick_source(self, u: int, j: int, rate: float) -> int | None:
        hi = 1.0 + _TOL
        best, best_free = None, -math.inf
        for v in self.plat.holders.get(j, ()):
            if v == u:
                continue
            pair = (u, v) if u < v else (v, u)
            if self.nic[v] + rate > self.nic_cap[v] * hi:
                continue
            if self.link[pair] + rate > self.plat.links[pair] * hi:
                continue
            free = self.nic_cap[v] - self.nic[v]
            if free > best_free:
                best, best_free = v, free
        return best

    def _download(self, u: int, j: int, rate: float) -> bool:
        if self.plat.has(u, j):
            return True
        key = (u, j)
        src = self.dl_src.get(key)
        if src is None:
            src = self._pick_source(u, j, rate)
            if src is None:
                return False
            self._set(self.dl_src, key, src)
            old = 0.0
        else:
            old = self.dl_rate[key]
            if rate <= old:
                return True
        self._set(self.dl_rate, key, rate)
        self._traffic(u, src, rate - old)
        return True

    def _raise(self, n: NodeKey, rate: Rate) -> None:
        stack = [(n, rate)]
        while stack:
            n, rate = stack.pop()
            if not _better(rate, self.eff[n]):
                continue
            self._set(self.eff, n, rate)
            u = self.assign[n]
            self._ops(u, self.op[n], rate[0])
            for c in self.kids[n]:
                if c in self.assign:
                    self._flow(self.op[c], self.assign[c], u, rate)
                    stack.append((c, rate))
                elif c in self.reuse:
                    q = self.reuse[c]
                    self._flow(self.op[q], self.assign[q], u, rate)
                    stack.append((q, rate))

    # -- public moves -------------------------------------------------------

    def is_open(self, n: NodeKey) -> bool:
        return n not in self.assign and n not in self.satisfied

    def try_place(self, n: NodeKey, u: int) -> bool:
        """Assign ``n`` to ``u`` if every constraint still holds."""
        if self.speed[u] == 0:
            return False
        self._begin()
        k = n[0]
        p = self.op[n]
        rate: Rate = (self.inst.rho(k), k)
        par = self.parent[n]
        if par is not None and par in self.assign and _better(self.eff[par], rate):
            rate = self.eff[par]
        self._set(self.assign, n, u)
        self._set(self.eff, n, rate)
        self._set(self.registry, p, self.registry.get(p, ()) + (n,))
        self._ops(u, p, rate[0])
        if par is not None and par in self.assign:
            self._flow(p, u, self.assign[par], self.eff[par])
        for c in self.kids[n]:
            if c in self.assign:
                self._flow(self.op[c], self.assign[c], u, rate)
                self._raise(c, rate)
            elif c in self.reuse:
                q = self.reuse[c]
                self._flow(self.op[q], self.assign[q], u, rate)
                self._raise(q, rate)
        freq = self.inst.app[k].nodes[n[1]].object_freqs
        for j in self.objs[p]:
            if not self._download(u, j, self.inst.objects[j].size * freq[j]):
                self._rollback()
                return False
        return self._finish()

    def subtree_clean(self, n: NodeKey) -> bool:
        k, i = n
        return not any((k, s) in self.assign for s in self.inst.app[k].subtree(i))

    def reusable(self, n: NodeKey) -> bool:
        return bool(self.registry.get(self.op[n])) and self.subtree_clean(n)

    def _reuse_with(self, n: NodeKey, q: NodeKey) -> bool:
        self._begin()
        k, i = n
        for s in self.inst.app[k].subtree(i):
            if (k, s) in self.reuse:
                self._del(self.reuse, (k, s))
            if (k, s) not in self.satisfied:
                self._set(self.satisfied, (k, s), True)
        self._set(self.reuse, n, q)
        par = self.parent[n]
        if par is None:
            self._raise(q, (self.inst.rho(k), k))
        elif par in self.assign:
            self._flow(self.op[q], self.assign[q], self.assign[par], self.eff[par])
            self._raise(q, self.eff[par])
        return self._finish()

    def try_reuse(self, n: NodeKey) -> bool:
        """Stream an already computed copy of ``n``'s operator instead of mapping its subtree.

        Producers are tried by smallest added traffic, then processor id.
        """
        if not self.reusable(n):
            return False
        par = self.parent[n]
        dest = self.assign.get(par) if par is not None else None

        def footprint(q: NodeKey) -> tuple:
            u = self.assign[q]
            vol = 0.0
            if dest is not None and u != dest:
                vol = self.eff[par][0] * self.delta[self.op[q]]
            return (vol, u, q)

        for q in sorted(self.registry[self.op[n]], key=footprint):
            if self._reuse_with(n, q):
                return True
        return False

    # -- views ---------------------------------------------------------------

    def remaining_compute(self, u: int) -> float:
        return self.speed[u] * (1.0 - self.compute[u]) if self.speed[u] else -math.inf

    def remaining_nic(self, u: int) -> float:
        return self.nic_cap[u] - self.nic[u]

    def relative_procs(self, n: NodeKey) -> list[int]:
        """Processors of the father, then of the children (or their reuse producers)."""
        out: list[int] = []
        par = self.parent[n]
        if par is not None and par in self.assign:
            out.append(self.assign[par])
        out.extend(self.children_procs(n))
        return list(dict.fromkeys(out))

    def children_procs(self, n: NodeKey) -> list[int]:
        out: list[int] = []
        for c in self.kids[n]:
            if c in self.assign:
                out.append(self.assign[c])
            elif c in self.reuse:
                out.append(self.assign[self.reuse[c]])
        return list(dict.fromkeys(out))

    def to_mapping(self) -> Mapping:
        return Mapping(dict(self.assign), dict(self.reuse), dict(self.dl_src))


def candidates(state: BuilderState, n: NodeKey, strategy: str) -> list[int]:
    """Processors in the order ``strategy`` would try them for node ``n``."""
    ids = state.plat.ids
    if strategy == "s1":
        order = sorted(ids, key=lambda u: (-state.speed[u], u))
    elif strategy == "s2":
        order = sorted(ids, key=lambda u: (-state.nic_cap[u], u))
    elif strategy == "s3":
        return sorted(ids, key=lambda u: (-state.remaining_compute(u), u))
    elif strategy == "s4":
        return sorted(ids, key=lambda u: (-state.remaining_nic(u), u))
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    used = set(state.assign.values())
    relatives = set(state.relative_procs(n))
    return [u for u in order if u not in used or u in relatives]


class _Run:
    def __init__(self, inst: Instance, strategy: str, reuse: bool):
        if strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {strategy!r}")
        self.st = BuilderState(inst)
        self.strategy = strategy
        self.reuse = reuse

    def first_of(self, n: NodeKey, procs, tried: set[int]) -> bool:
        for u in procs:
            if u in tried:
                continue
            tried.add(u)
            if self.st.try_place(n, u):
                return True
        return False

    def select(self, n: NodeKey, tried: set[int]) -> None:
        if not self.first_of(n, candidates(self.st, n, self.strategy), tried):
            raise HeuristicFailure(n, "no processor admits the node")

    def can_reuse(self, n: NodeKey) -> bool:
        return self.reuse and self.st.reusable(n)

    # Placement rules, one per heuristic family.

    def random_rule(self, n: NodeKey) -> None:
        tried: set[int] = set()
        if self.can_reuse(n):
            if self.st.try_reuse(n):
                return
        elif self.first_of(n, self.st.relative_procs(n), tried):
            return
        self.select(n, tried)

    def top_down_rule(self, n: NodeKey) -> None:
        tried: set[int] = set()
        par = self.st.parent[n]
        if par is not None and par in self.st.assign:
            if self.first_of(n, [self.st.assign[par]], tried):
                return
        if self.can_reuse(n) and self.st.try_reuse(n):
            return
        self.select(n, tried)

    def bottom_up_rule(self, n: NodeKey, climb: bool) -> None:
        if self.can_reuse(n):
            chain = [n]
            if climb:
                a = self.st.parent[n]
                while a is not None and self.st.is_open(a) and self.st.subtree_clean(a):
                    chain.append(a)
                    a = self.st.parent[a]
                chain = [c for c in chain if self.st.registry.get(self.st.op[c])]
            for c in reversed(chain):
                if self.st.try_reuse(c):
                    return
        tried: set[int] = set()
        if self.first_of(n, self.st.children_procs(n), tried):
            return
        self.select(n, tried)


def _forest(inst: Instance, key) -> list[NodeKey]:
    order = {a.app_id: pos for pos, a in enumerate(inst.apps)}
    return sorted(inst.nodes(), key=lambda n: key(n, order[n[0]]))


def _preorder(inst: Instance) -> list[NodeKey]:
    return [(a.app_id, i) for a in inst.apps for i in a.subtree(1)] if inst.apps else []


def _postorder(inst: Instance) -> list[NodeKey]:
    out: list[NodeKey] = []
    for a in inst.apps:
        stack = [(1, False)]
        while stack:
            i, done = stack.pop()
            if done:
                out.append((a.app_id, i))
                continue
            stack.append((i, True))
            stack.extend((c, False) for c in reversed(a.children(i)))
    return out


def run_heuristic(
    inst: Instance, h: str, strategy: str, seed: int = 0, reuse: bool = True
) -> Mapping:
    """Build a feasible mapping or raise ``HeuristicFailure``.

    ``reuse=False`` turns every heuristic into its no-reuse variant.
    """
    if h not in HEURISTICS:
        raise ValueError(f"unknown heuristic {h!r}")
    run = _Run(inst, strategy, reuse and h != "h1")
    st = run.st

    if h in ("h1", "h2"):
        rng = random.Random(seed)
        pending = list(inst.nodes())
        while True:
            pending = [n for n in pending if st.is_open(n)]
            if not pending:
                break
            run.random_rule(pending[rng.randrange(len(pending))])
    else:
        if h == "h3":
            order = _forest(inst, lambda n, pos: (n[1].bit_length(), pos, n[1]))
        elif h == "h4":
            order = _preorder(inst)
        elif h == "h5":
            order = _forest(inst, lambda n, pos: (-n[1].bit_length(), pos, n[1]))
        else:
            order = _postorder(inst)
        for n in order:
            if not st.is_open(n):
                continue
            if h in ("h3", "h4"):
                run.top_down_rule(n)
            else:
                run.bottom_up_rule(n, climb=h == "h6")

    m = st.to_mapping()
    report = check(inst, m)
    if not report.feasible:  # the running sums disagree with the checker
        raise AssertionError(f"heuristic produced an infeasible mapping: {report.violations[:3]}")
    return m


@dataclass(frozen=True)
class RunOutcome:
    mapping: Mapping | None
    failure: HeuristicFailure | None

    @property
    def ok(self) -> bool:
        return self.mapping is not None


def attempt(inst: Instance, h: str, strategy: str, seed: int = 0, reuse: bool = True) -> RunOutcome:
    try:
        return RunOutcome(run_heuristic(inst, h, strategy, seed, reuse), None)
    except HeuristicFailure as e:
        return RunOutcome(None, e)
