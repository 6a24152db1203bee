"""Seeded random instances following the experimental distributions.

Draw order from the single ``random.Random(seed)`` stream:

1. object sizes, by object id;
2. processor speed and NIC bandwidth, by processor id (one draw each when
   homogeneous);
3. link bandwidths over ``u < v`` in lexicographic order (one draw when
   homogeneous);
4. object holders, by object id;
5. per application: tree shape and leaf objects, operator parameters for
   each newly created operator (bottom-up), throughput, then download
   frequencies by object id.  Derived applications (``similarity``) draw
   the set of replaced nodes, fresh operator parameters, throughput and
   frequencies.

Operators are hash-consed: two tree nodes share an operator iff they
require the same objects and the same child operators, so identical
subtrees across applications are recognised as reusable.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, replace

from .model import (
    ApplicationTree,
    Instance,
    ObjectSpec,
    OperatorSpec,
    Platform,
    Processor,
    TreeNode,
)


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class GenParams:
    n_apps: int = 5
    max_ops_per_app: int = 50
    n_object_types: int = 10
    obj_size_range: tuple[float, float] = (3.0, 13.0)
    freq_range: tuple[float, float] = (0.0, 1.0)  # open at the low end
    throughput_range: tuple[float, float] = (1.0, 2.0)
    comp_range: tuple[float, float] = (0.5, 1.5)
    out_size_range: tuple[float, float] = (0.5, 1.5)
    n_procs: int = 30
    nic_range: tuple[float, float] = (50.0, 180.0)
    speed_range: tuple[float, float] = (50.0, 180.0)
    link_range: tuple[float, float] = (60.0, 100.0)
    ccr: float | None = None
    similarity: int | None = None
    homogeneous: bool = False
    object_replicas: int = 1
    # probabilities that a node has 0, 1 or 2 operator children
    shape: tuple[float, float, float] = (0.3, 0.3, 0.4)

    def validate(self) -> None:
        for name in ("n_apps", "max_ops_per_app", "n_object_types", "n_procs", "object_replicas"):
            if getattr(self, name) < 1:
                raise GenerationError(f"{name} must be >= 1")
        if self.object_replicas > self.n_procs:
            raise GenerationError("object_replicas exceeds the processor count")
        for name in (
            "obj_size_range", "freq_range", "throughput_range", "comp_range",
            "out_size_range", "nic_range", "speed_range", "link_range",
        ):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise GenerationError(f"{name} is empty")
        if self.obj_size_range[0] <= 0 or self.throughput_range[0] <= 0:
            raise GenerationError("object sizes and throughputs must be positive")
        if self.link_range[0] <= 0:
            raise GenerationError("link bandwidths must be positive")
        if self.freq_range[1] <= 0:
            raise GenerationError("frequency range must contain positive values")
        if self.ccr is not None and self.ccr <= 0:
            raise GenerationError("ccr must be positive")
        if self.similarity is not None and self.similarity < 0:
            raise GenerationError("similarity must be >= 0")
        if len(self.shape) != 3 or min(self.shape) < 0 or sum(self.shape) <= 0:
            raise GenerationError("shape needs three nonnegative weights")


# A tree skeleton: index -> (operator-child indices, leaf objects)
Skeleton = dict[int, tuple[list[int], list[int]]]


def _grow(rng: random.Random, max_ops: int, n_obj: int, shape) -> Skeleton:
    sk: Skeleton = {}
    count = 1
    queue = deque([1])
    while queue:
        i = queue.popleft()
        c = rng.choices((0, 1, 2), weights=shape)[0]
        c = min(c, max_ops - count)
        if c == 0 and not queue and count < max_ops:
            c = 1  # no early extinction: the tree reaches max_ops
        kids = [2 * i + t for t in range(c)]
        objs = sorted(rng.sample(range(1, n_obj + 1), min(2 - c, n_obj)))
        sk[i] = (kids, objs)
        count += c
        queue.extend(kids)
    return sk


def _signatures(sk: Skeleton) -> dict[int, tuple]:
    sig: dict[int, tuple] = {}
    for i in sorted(sk, reverse=True):
        kids, objs = sk[i]
        sig[i] = (tuple(objs), tuple(sorted(sig[c] for c in kids)))
    return sig


def _drop_subtree(sk: Skeleton, i: int) -> None:
    stack = [i]
    while stack:
        n = stack.pop()
        stack.extend(sk.pop(n)[0])


def _distinct_siblings(rng: random.Random, sk: Skeleton, n_obj: int) -> None:
    """Make the two operator children of every node structurally different.

    An operator's required operators form a set, so twin children would be
    the same operator twice.  Swap one leaf object in the right twin; if the
    object catalog is too small for that, drop the right twin instead.
    """
    while True:
        sig = _signatures(sk)
        twin = next(
            (i for i in sorted(sk) if len(sk[i][0]) == 2 and sig[sk[i][0][0]] == sig[sk[i][0][1]]),
            None,
        )
        if twin is None:
            return
        right = sk[twin][0][1]
        stack, target = [right], None
        while stack:
            n = stack.pop()
            kids, objs = sk[n]
            if objs and len(objs) < n_obj:
                target = n
                break
            stack.extend(kids)
        if target is None:
            _drop_subtree(sk, right)
            kids, objs = sk[twin]
            spare = [j for j in range(1, n_obj + 1) if j not in objs]
            sk[twin] = ([kids[0]], sorted(objs + [rng.choice(spare)]) if spare else objs)
            continue
        kids, objs = sk[target]
        pos = rng.randrange(len(objs))
        spare = [j for j in range(1, n_obj + 1) if j not in objs]
        objs = list(objs)
        objs[pos] = rng.choice(spare)
        sk[target] = (kids, sorted(objs))


class _OperatorFactory:
    def __init__(self, rng: random.Random, params: GenParams):
        self.rng = rng
        self.params = params
        self.by_key: dict[tuple, int] = {}
        self.ops: dict[int, OperatorSpec] = {}

    def get(self, objs: tuple[int, ...], child_ops: frozenset[int], variant) -> int:
        key = (objs, tuple(sorted(child_ops)), variant)
        if key not in self.by_key:
            p = len(self.ops) + 1
            self.ops[p] = OperatorSpec(
                id=p,
                comp=self.rng.uniform(*self.params.comp_range),
                out_size=self.rng.uniform(*self.params.out_size_range),
                required_objects=frozenset(objs),
                required_operators=child_ops,
            )
            self.by_key[key] = p
        return self.by_key[key]


def _label(sk: Skeleton, factory: _OperatorFactory, fresh: set[int], variant) -> dict[int, int]:
    ops: dict[int, int] = {}
    for i in sorted(sk, reverse=True):
        kids, objs = sk[i]
        child_ops = frozenset(ops[c] for c in kids)
        ops[i] = factory.get(tuple(objs), child_ops, variant if i in fresh else None)
    return ops


def _ordered(sk: Skeleton, ops: dict[int, int]) -> Skeleton:
    """Canonical child slots: lower operator id at 2i."""
    out: Skeleton = {}

    def place(src: int, dst: int) -> None:
        kids, objs = sk[src]
        kids = sorted(kids, key=lambda c: ops[c])
        new_kids = [2 * dst + t for t in range(len(kids))]
        out[dst] = (new_kids, objs)
        mapping[dst] = src
        for c, nc in zip(kids, new_kids):
            place(c, nc)

    mapping: dict[int, int] = {}
    place(1, 1)
    relabel = {dst: ops[src] for dst, src in mapping.items()}
    ops.clear()
    ops.update(relabel)
    return out


def _app(rng, params, k, sk, ops) -> ApplicationTree:
    throughput = rng.uniform(*params.throughput_range)
    used = sorted({j for _, objs in sk.values() for j in objs})
    lo, hi = params.freq_range
    freqs = {j: hi - rng.random() * (hi - lo) for j in used}
    nodes = {
        i: TreeNode(i, ops[i], {j: freqs[j] for j in objs}) for i, (_, objs) in sorted(sk.items())
    }
    return ApplicationTree(k, throughput, nodes)


def _upward_closed(rng: random.Random, sk: Skeleton, size: int) -> set[int]:
    if size == 0:
        return set()
    chosen, frontier = {1}, list(sk[1][0])
    while len(chosen) < size:
        frontier.sort()
        n = frontier.pop(rng.randrange(len(frontier)))
        chosen.add(n)
        frontier.extend(sk[n][0])
    return chosen


def generate(params: GenParams, seed: int) -> Instance:
    params.validate()
    rng = random.Random(seed)
    P, J = params.n_procs, params.n_object_types

    objects = {j: ObjectSpec(j, rng.uniform(*params.obj_size_range)) for j in range(1, J + 1)}

    if params.homogeneous:
        s, b = rng.uniform(*params.speed_range), rng.uniform(*params.nic_range)
        procs = tuple(Processor(u, s, b) for u in range(1, P + 1))
        bl = rng.uniform(*params.link_range)
        links = {(u, v): bl for u in range(1, P + 1) for v in range(u + 1, P + 1)}
    else:
        procs = tuple(
            Processor(u, rng.uniform(*params.speed_range), rng.uniform(*params.nic_range))
            for u in range(1, P + 1)
        )
        links = {
            (u, v): rng.uniform(*params.link_range)
            for u in range(1, P + 1)
            for v in range(u + 1, P + 1)
        }

    holds: dict[int, set[int]] = {}
    for j in range(1, J + 1):
        for u in rng.sample(range(1, P + 1), params.object_replicas):
            holds.setdefault(u, set()).add(j)

    factory = _OperatorFactory(rng, params)
    apps: list[ApplicationTree] = []
    base = None
    for k in range(1, params.n_apps + 1):
        if params.similarity is None or base is None:
            sk = _grow(rng, params.max_ops_per_app, J, params.shape)
            _distinct_siblings(rng, sk, J)
            ops = _label(sk, factory, set(), None)
            sk = _ordered(sk, ops)
            if params.similarity is not None:
                if params.similarity > len(sk):
                    raise GenerationError(
                        f"similarity {params.similarity} exceeds tree size {len(sk)}"
                    )
                base = sk
            apps.append(_app(rng, params, k, sk, ops))
        else:
            fresh = _upward_closed(rng, base, params.similarity)
            ops = _label(base, factory, fresh, ("variant", k))
            sk = base  # keep positions so replaced nodes line up with the base
            apps.append(_app(rng, params, k, sk, ops))

    operators = factory.ops
    if params.ccr is not None and operators:
        mean_w = sum(o.comp for o in operators.values()) / len(operators)
        mean_d = sum(o.out_size for o in operators.values()) / len(operators)
        if mean_d > 0:
            scale = params.ccr * mean_w / mean_d
            operators = {p: replace(o, out_size=o.out_size * scale) for p, o in operators.items()}

    platform = Platform(procs, links, {u: frozenset(js) for u, js in sorted(holds.items())})
    return Instance(operators, objects, tuple(apps), platform)


def make_similar_pair(params: GenParams, n_diff: int, seed: int) -> Instance:
    """Two applications; the second replaces exactly ``n_diff`` node operators."""
    return generate(replace(params, n_apps=2, similarity=n_diff), seed)


# Small instances for exhaustive search: tight capacities so that a good
# share of the mapping space is infeasible.
TINY = GenParams(
    n_apps=2,
    max_ops_per_app=4,
    n_object_types=3,
    obj_size_range=(1.0, 5.0),
    comp_range=(0.5, 1.5),
    out_size_range=(0.5, 1.5),
    n_procs=4,
    speed_range=(1.0, 5.0),
    nic_range=(6.0, 30.0),
    link_range=(3.0, 15.0),
    shape=(0.3, 0.4, 0.3),
)


def tiny_instance(seed: int) -> Instance:
    """At most 2 apps x 4 nodes, 4 processors and 3 objects."""
    rng = random.Random(f"tiny-{seed}")
    n_apps, n_ops = rng.randint(1, 2), rng.randint(1, 4)
    params = replace(
        TINY,
        n_apps=n_apps,
        max_ops_per_app=n_ops,
        n_object_types=rng.randint(1, 3),
        # keep the exhaustive space around 3^8 assignments at most
        n_procs=rng.randint(2, 4 if n_apps * n_ops <= 6 else 3),
    )
    params = replace(params, object_replicas=rng.randint(1, min(2, params.n_procs)))
    return generate(params, seed)
