"""Domain types: operators, objects, application trees, platforms, mappings.

Units are MB, MB/s, MFlop, MIPS and results/sec throughout.  Nodes are
addressed as ``(app_id, index)`` with heap indexing inside each tree
(root = 1, parent of ``i`` is ``i // 2``).  Processors, objects and
operators are addressed by their integer ids.

Model values are treated as immutable once built; the dict fields are
never mutated by this package.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator

# Relative slack on every capacity comparison (loads are sums of doubles).
FEAS_RTOL = 1e-9

NodeKey = tuple[int, int]


class InvalidIndexError(ValueError):
    pass


def parent_index(i: int) -> int | None:
    """Heap parent of node ``i``; ``None`` for the root."""
    if i < 1:
        raise InvalidIndexError(f"node index must be >= 1, got {i}")
    return None if i == 1 else i // 2


@dataclass(frozen=True)
class OperatorSpec:
    id: int
    comp: float
    out_size: float
    required_objects: frozenset[int] = frozenset()
    required_operators: frozenset[int] = frozenset()


@dataclass(frozen=True)
class ObjectSpec:
    id: int
    size: float


@dataclass(frozen=True)
class TreeNode:
    index: int
    operator: int
    object_freqs: dict[int, float] = field(default_factory=dict)


@dataclass(frozen=True)
class ApplicationTree:
    app_id: int
    throughput: float
    nodes: dict[int, TreeNode]

    def children(self, i: int) -> list[int]:
        return [c for c in (2 * i, 2 * i + 1) if c in self.nodes]

    def subtree(self, i: int) -> list[int]:
        """Node indices of the subtree rooted at ``i`` in preorder."""
        out, stack = [], [i]
        while stack:
            n = stack.pop()
            out.append(n)
            stack.extend(reversed(self.children(n)))
        return out

    def depth(self, i: int) -> int:
        return i.bit_length()

    def frequency(self, j: int) -> float:
        for node in self.nodes.values():
            if j in node.object_freqs:
                return node.object_freqs[j]
        raise KeyError(f"application {self.app_id} does not use object {j}")

    @property
    def objects_used(self) -> set[int]:
        return {j for n in self.nodes.values() for j in n.object_freqs}


@dataclass(frozen=True)
class Processor:
    id: int
    speed: float
    nic_bw: float


@dataclass(frozen=True)
class Platform:
    processors: tuple[Processor, ...]
    links: dict[tuple[int, int], float]  # keyed (u, v) with u < v
    holds: dict[int, frozenset[int]]  # processor id -> object ids

    @cached_property
    def proc(self) -> dict[int, Processor]:
        return {p.id: p for p in self.processors}

    @cached_property
    def ids(self) -> list[int]:
        return sorted(p.id for p in self.processors)

    def bw(self, u: int, v: int) -> float:
        return self.links[(u, v) if u < v else (v, u)]

    def has(self, u: int, j: int) -> bool:
        return j in self.holds.get(u, ())

    @cached_property
    def holders(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for u in self.ids:
            for j in self.holds.get(u, ()):
                out.setdefault(j, []).append(u)
        return out

    @property
    def is_homogeneous(self) -> bool:
        speeds = {p.speed for p in self.processors}
        nics = {p.nic_bw for p in self.processors}
        return len(speeds) <= 1 and len(nics) <= 1 and len(set(self.links.values())) <= 1


@dataclass(frozen=True)
class Instance:
    operators: dict[int, OperatorSpec]
    objects: dict[int, ObjectSpec]
    apps: tuple[ApplicationTree, ...]
    platform: Platform

    @cached_property
    def app(self) -> dict[int, ApplicationTree]:
        return {a.app_id: a for a in self.apps}

    def nodes(self) -> Iterator[NodeKey]:
        """All node keys in canonical order (app order, then index)."""
        for a in self.apps:
            for i in sorted(a.nodes):
                yield (a.app_id, i)

    def op_of(self, node: NodeKey) -> OperatorSpec:
        k, i = node
        return self.operators[self.app[k].nodes[i].operator]

    def rho(self, k: int) -> float:
        return self.app[k].throughput

    @property
    def node_count(self) -> int:
        return sum(len(a.nodes) for a in self.apps)


def download_rate(inst: Instance, j: int, k: int) -> float:
    """Bandwidth (MB/s) app ``k`` consumes downloading object ``j``."""
    if j not in inst.objects or k not in inst.app:
        raise KeyError(f"unknown (object, app) pair ({j}, {k})")
    return inst.objects[j].size * inst.app[k].frequency(j)


def effective_download_rate(inst: Instance, j: int, apps: Iterable[int]) -> float:
    """A processor serving several apps downloads ``j`` once, at the max rate."""
    rates = [download_rate(inst, j, k) for k in apps]
    if not rates:
        raise ValueError("effective download rate needs at least one application")
    return max(rates)


@dataclass(frozen=True)
class Mapping:
    """Node placement, reuse links and download sources.

    ``reuse`` maps a consumer node to the producer node whose result it
    streams instead of computing its own subtree.
    """

    assign: dict[NodeKey, int] = field(default_factory=dict)
    reuse: dict[NodeKey, NodeKey] = field(default_factory=dict)
    download_src: dict[tuple[int, int], int] = field(default_factory=dict)


# -- validation ---------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    entity: str
    invariant: str
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.entity}: {self.invariant}" + (f" ({self.detail})" if self.detail else "")


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def invariants(self) -> set[str]:
        return {v.invariant for v in self.violations}


def _operator_cycles(ops: dict[int, OperatorSpec]) -> list[int]:
    """Operators that transitively require themselves."""
    bad = []
    for p in sorted(ops):
        seen: set[int] = set()
        stack = [q for q in ops[p].required_operators if q in ops]
        while stack:
            q = stack.pop()
            if q == p:
                bad.append(p)
                break
            if q not in seen:
                seen.add(q)
                stack.extend(r for r in ops[q].required_operators if r in ops)
    return bad


def validate_instance(inst: Instance) -> ValidationReport:
    v: list[Violation] = []
    ops, objs = inst.operators, inst.objects

    for j in sorted(objs):
        if not objs[j].size > 0:
            v.append(Violation(f"object {j}", "positive-size"))

    for p in sorted(ops):
        op = ops[p]
        if len(op.required_objects) + len(op.required_operators) > 2:
            v.append(Violation(f"operator {p}", "binary-arity"))
        if op.comp < 0 or op.out_size < 0:
            v.append(Violation(f"operator {p}", "nonnegative-params"))
        for j in sorted(op.required_objects - objs.keys()):
            v.append(Violation(f"operator {p}", "unknown-object", str(j)))
        for q in sorted(op.required_operators - ops.keys()):
            v.append(Violation(f"operator {p}", "unknown-operator", str(q)))
    for p in _operator_cycles(ops):
        v.append(Violation(f"operator {p}", "acyclic-operators"))

    plat = inst.platform
    pids = [p.id for p in plat.processors]
    if len(set(pids)) != len(pids):
        v.append(Violation("platform", "unique-processor-ids"))
    for p in plat.processors:
        if p.speed < 0:
            v.append(Violation(f"processor {p.id}", "nonnegative-speed"))
        if p.nic_bw < 0:
            v.append(Violation(f"processor {p.id}", "nonnegative-nic"))
    ids = sorted(set(pids))
    for a_i, u in enumerate(ids):
        for w in ids[a_i + 1:]:
            bw = plat.links.get((u, w))
            if bw is None:
                v.append(Violation(f"link {u}-{w}", "missing-link"))
            elif not bw > 0:
                v.append(Violation(f"link {u}-{w}", "positive-link-bw"))
    for (u, w) in sorted(plat.links):
        if not (u < w and u in plat.proc and w in plat.proc):
            v.append(Violation(f"link {u}-{w}", "link-endpoints"))
    for u in sorted(plat.holds):
        if u not in plat.proc:
            v.append(Violation(f"holds {u}", "unknown-processor"))
        for j in sorted(plat.holds[u] - objs.keys()):
            v.append(Violation(f"holds {u}", "unknown-object", str(j)))
    held = set().union(*plat.holds.values()) if plat.holds else set()
    for j in sorted(objs.keys() - held):
        v.append(Violation(f"object {j}", "unplaced-object"))

    app_ids = [a.app_id for a in inst.apps]
    if len(set(app_ids)) != len(app_ids):
        v.append(Violation("applications", "unique-app-ids"))
    for a in inst.apps:
        name = f"app {a.app_id}"
        if not a.throughput > 0:
            v.append(Violation(name, "positive-throughput"))
        if 1 not in a.nodes:
            v.append(Violation(name, "root-exists"))
        freq_seen: dict[int, float] = {}
        for i in sorted(a.nodes):
            node = a.nodes[i]
            where = f"{name} node {i}"
            if node.index != i:
                v.append(Violation(where, "index-key-mismatch"))
            if i < 1 or (i > 1 and i // 2 not in a.nodes):
                v.append(Violation(where, "parent-exists"))
            op = ops.get(node.operator)
            if op is None:
                v.append(Violation(where, "unknown-operator", str(node.operator)))
                continue
            kids = a.children(i)
            kid_ops = sorted(a.nodes[c].operator for c in kids)
            if kid_ops != sorted(op.required_operators):
                v.append(Violation(where, "children-match-operators"))
            elif len(kids) == 1 and op.required_objects and kids[0] != 2 * i:
                v.append(Violation(where, "single-child-slot"))
            if set(node.object_freqs) != set(op.required_objects):
                v.append(Violation(where, "object-freqs-match-objects"))
            for j, f in sorted(node.object_freqs.items()):
                if not f > 0:
                    v.append(Violation(where, "positive-frequency", str(j)))
                if j in freq_seen and freq_seen[j] != f:
                    v.append(Violation(where, "consistent-app-frequency", str(j)))
                freq_seen.setdefault(j, f)
    return ValidationReport(tuple(v))


# -- JSON ---------------------------------------------------------------------

def instance_to_dict(inst: Instance) -> dict:
    plat = inst.platform
    return {
        "operators": [
            {
                "id": op.id,
                "comp": op.comp,
                "out_size": op.out_size,
                "required_objects": sorted(op.required_objects),
                "required_operators": sorted(op.required_operators),
            }
            for op in sorted(inst.operators.values(), key=lambda o: o.id)
        ],
        "objects": [
            {"id": ob.id, "size": ob.size}
            for ob in sorted(inst.objects.values(), key=lambda o: o.id)
        ],
        "applications": [
            {
                "id": a.app_id,
                "throughput": a.throughput,
                "nodes": [
                    {
                        "index": n.index,
                        "operator": n.operator,
                        "object_freqs": {str(j): f for j, f in sorted(n.object_freqs.items())},
                    }
                    for _, n in sorted(a.nodes.items())
                ],
            }
            for a in inst.apps
        ],
        "platform": {
            "processors": [
                {"id": p.id, "speed": p.speed, "nic_bw": p.nic_bw} for p in plat.processors
            ],
            "links": [{"u": u, "v": w, "bw": bw} for (u, w), bw in sorted(plat.links.items())],
            "holds": {str(u): sorted(js) for u, js in sorted(plat.holds.items())},
        },
    }


def instance_from_dict(d: dict) -> Instance:
    ops = {
        o["id"]: OperatorSpec(
            id=o["id"],
            comp=float(o["comp"]),
            out_size=float(o["out_size"]),
            required_objects=frozenset(o.get("required_objects", ())),
            required_operators=frozenset(o.get("required_operators", ())),
        )
        for o in d["operators"]
    }
    objs = {o["id"]: ObjectSpec(o["id"], float(o["size"])) for o in d["objects"]}
    apps = tuple(
        ApplicationTree(
            app_id=a["id"],
            throughput=float(a["throughput"]),
            nodes={
                n["index"]: TreeNode(
                    n["index"],
                    n["operator"],
                    {int(j): float(f) for j, f in n.get("object_freqs", {}).items()},
                )
                for n in a["nodes"]
            },
        )
        for a in d["applications"]
    )
    p = d["platform"]
    links = {}
    for link in p["links"]:
        u, w = link["u"], link["v"]
        links[(min(u, w), max(u, w))] = float(link["bw"])
    plat = Platform(
        processors=tuple(
            Processor(q["id"], float(q["speed"]), float(q["nic_bw"])) for q in p["processors"]
        ),
        links=links,
        holds={int(u): frozenset(js) for u, js in p.get("holds", {}).items()},
    )
    return Instance(ops, objs, apps, plat)


def mapping_to_dict(m: Mapping) -> dict:
    return {
        "assignments": [
            {"app": k, "node": i, "processor": u} for (k, i), u in sorted(m.assign.items())
        ],
        "reuse": [
            {"consumer": list(c), "producer": list(p)} for c, p in sorted(m.reuse.items())
        ],
        "downloads": [
            {"processor": u, "object": j, "source": v}
            for (u, j), v in sorted(m.download_src.items())
        ],
    }


def mapping_from_dict(d: dict) -> Mapping:
    return Mapping(
        assign={(a["app"], a["node"]): a["processor"] for a in d.get("assignments", ())},
        reuse={tuple(r["consumer"]): tuple(r["producer"]) for r in d.get("reuse", ())},
        download_src={
            (x["processor"], x["object"]): x["source"] for x in d.get("downloads", ())
        },
    )


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_instance(path: str | Path) -> Instance:
    return instance_from_dict(json.loads(Path(path).read_text()))


def save_instance(inst: Instance, path: str | Path) -> None:
    Path(path).write_text(dumps(instance_to_dict(inst)))


def load_mapping(path: str | Path) -> Mapping:
    return mapping_from_dict(json.loads(Path(path).read_text()))


def save_mapping(m: Mapping, path: str | Path, extra: dict | None = None) -> None:
    d = mapping_to_dict(m)
    if extra:
        d.update(extra)
    Path(path).write_text(dumps(d))
