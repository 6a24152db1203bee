"""Integer linear program for reuse-free mappings, emitted in CPLEX LP text format.

Variable families (ids, not dense indices, appear in names)::

    x_k_i_u          node (k, i) placed on u                          binary
    d_j_u_v_k        u obtains object j from v for app k (v = u: local) binary
    ds_j_u_v         u downloads j from v for some app (v != u)         binary
    y_k_c_u_i_v      child c on u and its parent i on v                binary
    used_u           u hosts at least one node                         binary
    xop_k_p_u        some node of app k with operator p sits on u      binary
    yop_k_p_u_q_v    some node with op p on u feeds op q on v in app k binary
    Par_u_p_v_k      u sends p's result to v for app k (v != u)        binary
    Ch_u_p_v_k       u receives p's result from v for app k (v != u)   binary
    flow_p_u_v       rate of p's result streamed from u to v           continuous
    rho_u_p          rate at which u computes p                        continuous
    ratemax_j_u_v    rate of object j downloaded by u from v           continuous
    bwmax            largest link utilization (bw-max only)            continuous

Every product of a binary and a rate is folded into a ``>=`` row on a rate
variable (``flow >= rho_k * Par``, ``ratemax >= rate * d``, ``rho >= rho_k *
xop``), so the bandwidth rows are linear in ``flow`` and ``ratemax``.

An instance without applications gives an empty model.  Otherwise the
closed-form sizes, with K apps, N nodes, E = N - K tree edges, P
processors, J objects, Z zero-speed processors, O = sum_k |ops(k)|,
C = sum_k |child ops(k)|, Q = sum_k |(child op, parent op) pairs of k|,
W = |ops used anywhere|, F = |child ops used anywhere|,
R = sum over nodes of |objects(op)|, U = sum_k |objects used by k|,
L = P(P - 1)::

    variables = N*P + J*P*P*K + J*L + E*P*P + P + O*P + Q*P*P
                + 2*C*L + F*L + W*P + J*L            (+1 for bwmax)
    rows      = N + Z + J*P*P*K + R*P + J*P*K + J*L*K + J*P
                + 3*E*P*P + N*P + P + N*P + O*P + E*P*P + Q*P*P
                + 2*(E*L + C*L) + 2*C*L + O*P + U*L
                + (P - Z) + 3*P + L/2                 (+L/2 for bw-max)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .feasibility import FeasibilityReport, MappingError, check
from .model import Instance, Mapping
from .objectives import evaluate

ILP_OBJECTIVES = ("proc-power", "bw-sum", "bw-max")
EXTENSION_OBJECTIVES = ("proc-nb",)


class IlpSolutionError(ValueError):
    pass


@dataclass
class Row:
    name: str
    terms: list[tuple[str, float]]
    sense: str  # "<=", ">=", "="
    rhs: float


@dataclass
class IlpModel:
    objective: str
    obj_terms: list[tuple[str, float]] = field(default_factory=list)
    variables: dict[str, tuple[str, float, float]] = field(default_factory=dict)
    rows: list[Row] = field(default_factory=list)

    def var(self, name: str, kind: str = "B", lb: float = 0.0, ub: float = 1.0) -> str:
        self.variables.setdefault(name, (kind, lb, ub))
        return name

    def add(self, name: str, terms, sense: str, rhs: float) -> None:
        self.rows.append(Row(name, list(terms), sense, float(rhs)))

    def family_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for name in self.variables:
            fam = name.split("_")[0]
            out[fam] = out.get(fam, 0) + 1
        return out

    def row_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for r in self.rows:
            fam = r.name.split("#")[0]
            out[fam] = out.get(fam, 0) + 1
        return out

    def objective_value(self, values: dict[str, float]) -> float:
        return sum(c * values.get(v, 0.0) for v, c in self.obj_terms)

    def violations(self, values: dict[str, float], tol: float = 1e-9) -> list[str]:
        """Rows (and bounds) violated by a full variable assignment."""
        bad = []
        for name, (_, lb, ub) in self.variables.items():
            x = values.get(name, 0.0)
            if x < lb - tol or x > ub + tol * max(1.0, abs(ub)):
                bad.append(f"bound {name}")
        for r in self.rows:
            lhs = sum(c * values.get(v, 0.0) for v, c in r.terms)
            slack = tol * max(1.0, abs(r.rhs), max((abs(c * values.get(v, 0.0)) for v, c in r.terms), default=0.0))
            if (r.sense == "<=" and lhs > r.rhs + slack) or (
                r.sense == ">=" and lhs < r.rhs - slack
            ) or (r.sense == "=" and abs(lhs - r.rhs) > slack):
                bad.append(r.name)
        return bad

    def to_matrices(self) -> dict:
        """Dense arrays for ``lb <= A x <= ub`` solvers."""
        names = list(self.variables)
        col = {n: a for a, n in enumerate(names)}
        A = np.zeros((len(self.rows), len(names)))
        lo = np.full(len(self.rows), -np.inf)
        hi = np.full(len(self.rows), np.inf)
        for r_i, r in enumerate(self.rows):
            for v, c in r.terms:
                A[r_i, col[v]] += c
            if r.sense in ("<=", "="):
                hi[r_i] = r.rhs
            if r.sense in (">=", "="):
                lo[r_i] = r.rhs
        c = np.zeros(len(names))
        for v, coef in self.obj_terms:
            c[col[v]] += coef
        kinds = [self.variables[n] for n in names]
        return {
            "names": names,
            "c": c,
            "A": A,
            "row_lb": lo,
            "row_ub": hi,
            "lb": np.array([k[1] for k in kinds]),
            "ub": np.array([k[2] for k in kinds]),
            "integrality": np.array([1 if k[0] == "B" else 0 for k in kinds]),
        }


def _name(*parts) -> str:
    return "_".join(str(p) for p in parts)


def build_model(inst: Instance, objective: str = "proc-power", extensions: bool = False) -> IlpModel:
    """The placement ILP for ``inst`` (reuse is not modelled)."""
    allowed = ILP_OBJECTIVES + (EXTENSION_OBJECTIVES if extensions else ())
    if objective not in allowed:
        raise ValueError(f"objective {objective!r} not available (extensions={extensions})")
    m = IlpModel(objective)
    if not inst.apps:
        return m
    plat = inst.platform
    P = plat.ids
    pairs = [(u, v) for u in P for v in P if u != v]
    J = sorted(inst.objects)
    K = [a.app_id for a in inst.apps]
    ops = inst.operators
    rho_max = max((a.throughput for a in inst.apps), default=0.0)

    app_ops: dict[int, list[int]] = {}
    child_ops: dict[int, list[int]] = {}
    op_pairs: dict[int, list[tuple[int, int]]] = {}
    edges: list[tuple[int, int, int]] = []  # (k, child, parent)
    rate: dict[tuple[int, int], float] = {}
    for a in inst.apps:
        k = a.app_id
        app_ops[k] = sorted({n.operator for n in a.nodes.values()})
        child_ops[k] = sorted({a.nodes[i].operator for i in a.nodes if i > 1})
        op_pairs[k] = sorted({(a.nodes[i].operator, a.nodes[i // 2].operator) for i in a.nodes if i > 1})
        edges.extend((k, i, i // 2) for i in sorted(a.nodes) if i > 1)
        for j in sorted(a.objects_used):
            rate[(j, k)] = inst.objects[j].size * a.frequency(j)
    used_ops = sorted({p for k in K for p in app_ops[k]})
    flow_ops = sorted({p for k in K for p in child_ops[k]})
    rate_max = max(rate.values(), default=0.0)

    # variables, family by family
    for k, i in inst.nodes():
        for u in P:
            m.var(_name("x", k, i, u))
    for j in J:
        for u in P:
            for v in P:
                for k in K:
                    m.var(_name("d", j, u, v, k))
    for j in J:
        for u, v in pairs:
            m.var(_name("ds", j, u, v))
    for k, c, i in edges:
        for u in P:
            for v in P:
                m.var(_name("y", k, c, u, i, v))
    for u in P:
        m.var(_name("used", u))
    for k in K:
        for p in app_ops[k]:
            for u in P:
                m.var(_name("xop", k, p, u))
    for k in K:
        for p, q in op_pairs[k]:
            for u in P:
                for v in P:
                    m.var(_name("yop", k, p, u, q, v))
    for fam in ("Par", "Ch"):
        for k in K:
            for p in child_ops[k]:
                for u, v in pairs:
                    m.var(_name(fam, u, p, v, k))
    for p in flow_ops:
        for u, v in pairs:
            m.var(_name("flow", p, u, v), "C", 0.0, rho_max)
    for u in P:
        for p in used_ops:
            m.var(_name("rho", u, p), "C", 0.0, rho_max)
    for j in J:
        for u, v in pairs:
            m.var(_name("ratemax", j, u, v), "C", 0.0, rate_max)
    if objective == "bw-max":
        m.var("bwmax", "C", 0.0, math.inf)

    # placement
    for k, i in inst.nodes():
        m.add(f"place#{k}_{i}", [(_name("x", k, i, u), 1.0) for u in P], "=", 1)
    for u in P:
        if plat.proc[u].speed == 0:
            m.add(f"zerospeed#{u}", [(_name("x", k, i, u), 1.0) for k, i in inst.nodes()], "=", 0)

    # downloads
    for j in J:
        for u in P:
            for v in P:
                for k in K:
                    m.add(f"avail#{j}_{u}_{v}_{k}", [(_name("d", j, u, v, k), 1.0)], "<=",
                          1.0 if plat.has(v, j) else 0.0)
    for k, i in inst.nodes():
        for j in sorted(inst.op_of((k, i)).required_objects):
            for u in P:
                m.add(f"cover#{k}_{i}_{j}_{u}",
                      [(_name("d", j, u, v, k), 1.0) for v in P] + [(_name("x", k, i, u), -1.0)],
                      ">=", 0)
    for j in J:
        for u in P:
            for k in K:
                m.add(f"onesrc#{j}_{u}_{k}", [(_name("d", j, u, v, k), 1.0) for v in P], "<=", 1)
    for j in J:
        for u, v in pairs:
            for k in K:
                m.add(f"srclink#{j}_{u}_{v}_{k}",
                      [(_name("d", j, u, v, k), 1.0), (_name("ds", j, u, v), -1.0)], "<=", 0)
    for j in J:
        for u in P:
            m.add(f"srcone#{j}_{u}", [(_name("ds", j, u, v), 1.0) for v in P if v != u], "<=", 1)

    # y = x_child * x_parent
    for k, c, i in edges:
        for u in P:
            for v in P:
                y = _name("y", k, c, u, i, v)
                xc, xp = _name("x", k, c, u), _name("x", k, i, v)
                m.add(f"ychild#{k}_{c}_{u}_{i}_{v}", [(y, 1.0), (xc, -1.0)], "<=", 0)
                m.add(f"yparent#{k}_{c}_{u}_{i}_{v}", [(y, 1.0), (xp, -1.0)], "<=", 0)
                m.add(f"ylow#{k}_{c}_{u}_{i}_{v}", [(y, 1.0), (xc, -1.0), (xp, -1.0)], ">=", -1)

    # used
    for k, i in inst.nodes():
        for u in P:
            m.add(f"usedlow#{k}_{i}_{u}", [(_name("used", u), 1.0), (_name("x", k, i, u), -1.0)], ">=", 0)
    for u in P:
        m.add(f"usedhigh#{u}",
              [(_name("used", u), 1.0)] + [(_name("x", k, i, u), -1.0) for k, i in inst.nodes()],
              "<=", 0)

    # xop / yop
    nodes_of: dict[tuple[int, int], list[int]] = {}
    for k, i in inst.nodes():
        nodes_of.setdefault((k, inst.op_of((k, i)).id), []).append(i)
    for k, i in inst.nodes():
        p = inst.op_of((k, i)).id
        for u in P:
            m.add(f"xoplow#{k}_{i}_{u}", [(_name("xop", k, p, u), 1.0), (_name("x", k, i, u), -1.0)], ">=", 0)
    for k in K:
        for p in app_ops[k]:
            for u in P:
                m.add(f"xophigh#{k}_{p}_{u}",
                      [(_name("xop", k, p, u), 1.0)] + [(_name("x", k, i, u), -1.0) for i in nodes_of[(k, p)]],
                      "<=", 0)
    edges_of_pair: dict[tuple[int, int, int], list[tuple[int, int]]] = {}
    edges_of_child: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for k, c, i in edges:
        p, q = inst.app[k].nodes[c].operator, inst.app[k].nodes[i].operator
        edges_of_pair.setdefault((k, p, q), []).append((c, i))
        edges_of_child.setdefault((k, p), []).append((c, i))
        for u in P:
            for v in P:
                m.add(f"yoplow#{k}_{c}_{u}_{i}_{v}",
                      [(_name("yop", k, p, u, q, v), 1.0), (_name("y", k, c, u, i, v), -1.0)], ">=", 0)
    for k in K:
        for p, q in op_pairs[k]:
            for u in P:
                for v in P:
                    m.add(f"yophigh#{k}_{p}_{u}_{q}_{v}",
                          [(_name("yop", k, p, u, q, v), 1.0)]
                          + [(_name("y", k, c, u, i, v), -1.0) for c, i in edges_of_pair[(k, p, q)]],
                          "<=", 0)

    # Par / Ch from split parent-child pairs
    for k, c, i in edges:
        p = inst.app[k].nodes[c].operator
        for u, v in pairs:
            y = _name("y", k, c, u, i, v)
            m.add(f"parlow#{k}_{c}_{u}_{i}_{v}", [(_name("Par", u, p, v, k), 1.0), (y, -1.0)], ">=", 0)
            m.add(f"chlow#{k}_{c}_{u}_{i}_{v}", [(_name("Ch", v, p, u, k), 1.0), (y, -1.0)], ">=", 0)
    for k in K:
        for p in child_ops[k]:
            for u, v in pairs:
                ys = [(_name("y", k, c, u, i, v), -1.0) for c, i in edges_of_child[(k, p)]]
                m.add(f"parhigh#{u}_{p}_{v}_{k}", [(_name("Par", u, p, v, k), 1.0)] + ys, "<=", 0)
                m.add(f"chhigh#{v}_{p}_{u}_{k}", [(_name("Ch", v, p, u, k), 1.0)] + ys, "<=", 0)

    # rates
    for k in K:
        r = inst.rho(k)
        for p in child_ops[k]:
            for u, v in pairs:
                m.add(f"flowpar#{p}_{u}_{v}_{k}",
                      [(_name("flow", p, u, v), 1.0), (_name("Par", u, p, v, k), -r)], ">=", 0)
                m.add(f"flowch#{p}_{u}_{v}_{k}",
                      [(_name("flow", p, u, v), 1.0), (_name("Ch", v, p, u, k), -r)], ">=", 0)
    for k in K:
        r = inst.rho(k)
        for p in app_ops[k]:
            for u in P:
                m.add(f"rate#{k}_{p}_{u}", [(_name("rho", u, p), 1.0), (_name("xop", k, p, u), -r)], ">=", 0)
    for (j, k), rt in sorted(rate.items()):
        for u, v in pairs:
            m.add(f"ratemax#{j}_{u}_{v}_{k}",
                  [(_name("ratemax", j, u, v), 1.0), (_name("d", j, u, v, k), -rt)], ">=", 0)

    # capacities
    for u in P:
        s = plat.proc[u].speed
        if s > 0:
            m.add(f"compute#{u}", [(_name("rho", u, p), ops[p].comp / s) for p in used_ops], "<=", 1)
    for u in P:
        m.add(f"receive#{u}",
              [(_name("flow", p, v, u), ops[p].out_size / plat.bw(u, v)) for p in flow_ops for v in P if v != u],
              "<=", 1)
    for u in P:
        m.add(f"send#{u}",
              [(_name("flow", p, u, v), ops[p].out_size / plat.bw(u, v)) for p in flow_ops for v in P if v != u],
              "<=", 1)

    def pair_load(u: int, v: int) -> list[tuple[str, float]]:
        terms = []
        for p in flow_ops:
            terms.append((_name("flow", p, u, v), ops[p].out_size))
            terms.append((_name("flow", p, v, u), ops[p].out_size))
        for j in J:
            terms.append((_name("ratemax", j, u, v), 1.0))
            terms.append((_name("ratemax", j, v, u), 1.0))
        return terms

    for u in P:
        terms = [t for v in P if v != u for t in pair_load(u, v)]
        m.add(f"nic#{u}", terms, "<=", plat.proc[u].nic_bw)
    for a, u in enumerate(P):
        for v in P[a + 1:]:
            m.add(f"link#{u}_{v}", pair_load(u, v), "<=", plat.bw(u, v))
    if objective == "bw-max":
        for a, u in enumerate(P):
            for v in P[a + 1:]:
                bl = plat.bw(u, v)
                m.add(f"bwmax#{u}_{v}",
                      [(n, c / bl) for n, c in pair_load(u, v)] + [("bwmax", -1.0)], "<=", 0)

    # objective
    if objective == "proc-power":
        m.obj_terms = [
            (_name("rho", u, p), ops[p].comp / plat.proc[u].speed)
            for u in P if plat.proc[u].speed > 0 for p in used_ops
        ]
    elif objective == "bw-sum":
        m.obj_terms = [
            t for a, u in enumerate(P) for v in P[a + 1:] for t in pair_load(u, v)
        ]
    elif objective == "bw-max":
        m.obj_terms = [("bwmax", 1.0)]
    else:
        m.obj_terms = [(_name("used", u), 1.0) for u in P]
    return m


def _num(x: float) -> str:
    if x == math.inf:
        return "inf"
    if float(x).is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(float(x))


def _wrap(head: str, terms: list[str], width: int = 78) -> list[str]:
    lines, cur = [], head
    for t in terms:
        if len(cur) + 1 + len(t) > width and cur.strip():
            lines.append(cur)
            cur = "   " + t
        else:
            cur = f"{cur} {t}" if cur else t
    lines.append(cur)
    return lines


def _linear(terms: list[tuple[str, float]]) -> list[str]:
    merged: dict[str, float] = {}
    for v, c in terms:
        merged[v] = merged.get(v, 0.0) + c
    out = []
    for i, (v, c) in enumerate(merged.items()):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        coef = "" if mag == 1 else _num(mag) + " "
        out.append(f"{sign} {coef}{v}" if i or sign == "-" else f"{coef}{v}")
    return out


def emit_lp(model: IlpModel) -> str:
    """Deterministic LP text: objective, rows in build order, bounds, binaries."""
    lines = [f"\\ objective {model.objective}", "Minimize"]
    obj = _linear(model.obj_terms)
    lines += _wrap(" obj:", obj if obj else ["0"])
    lines.append("Subject To")
    for r in model.rows:
        # a row can be empty, e.g. receive rows when no tree has an edge
        terms = _linear(r.terms) or ["0 " + next(iter(model.variables))]
        lines += _wrap(f" {r.name.replace('#', '_')}:", terms + [r.sense, _num(r.rhs)])
    lines.append("Bounds")
    for name, (kind, lb, ub) in model.variables.items():
        if kind == "C":
            lines.append(f" {_num(lb)} <= {name} <= {_num(ub)}")
    binaries = [n for n, (kind, _, _) in model.variables.items() if kind == "B"]
    if binaries:
        lines.append("Binaries")
        lines += _wrap("", binaries)
    lines.append("End")
    return "\n".join(lines) + "\n"


def encode_mapping(inst: Instance, mp: Mapping, model: IlpModel) -> dict[str, float]:
    """Variable values induced by a reuse-free mapping, with tight rates."""
    if mp.reuse:
        raise ValueError("the ILP does not model reuse")
    plat = inst.platform
    vals = {n: 0.0 for n in model.variables}

    def put(name: str, val: float) -> None:
        if name in vals:
            vals[name] = max(vals[name], val)

    for (k, i), u in mp.assign.items():
        p = inst.op_of((k, i)).id
        r = inst.rho(k)
        put(_name("x", k, i, u), 1.0)
        put(_name("used", u), 1.0)
        put(_name("xop", k, p, u), 1.0)
        put(_name("rho", u, p), r)
        freqs = inst.app[k].nodes[i].object_freqs
        for j in inst.op_of((k, i)).required_objects:
            v = u if plat.has(u, j) else mp.download_src[(u, j)]
            put(_name("d", j, u, v, k), 1.0)
            if v != u:
                put(_name("ds", j, u, v), 1.0)
                put(_name("ratemax", j, u, v), inst.objects[j].size * freqs[j])
        if i > 1:
            par = (k, i // 2)
            v = mp.assign[par]
            q = inst.op_of(par).id
            put(_name("y", k, i, u, i // 2, v), 1.0)
            put(_name("yop", k, p, u, q, v), 1.0)
            if u != v:
                put(_name("Par", u, p, v, k), 1.0)
                put(_name("Ch", v, p, u, k), 1.0)
                put(_name("flow", p, u, v), r)
    if "bwmax" in vals:
        vals["bwmax"] = 0.0
        loads: dict[tuple[int, int], float] = {}
        for row in model.rows:
            if row.name.startswith("link#"):
                u, v = (int(x) for x in row.name.split("#")[1].split("_"))
                loads[(u, v)] = sum(c * vals[n] for n, c in row.terms)
        for (u, v), load in loads.items():
            vals["bwmax"] = max(vals["bwmax"], load / plat.bw(u, v))
    return vals


@dataclass(frozen=True)
class SolutionCheck:
    mapping: Mapping
    report: FeasibilityReport
    ilp_objective: float
    recomputed: float
    matches: bool


def validate_solution(inst: Instance, values: dict[str, float], model: IlpModel) -> SolutionCheck:
    """Rebuild a mapping from solver values and re-check it independently."""
    for name, (kind, _, _) in model.variables.items():
        if kind == "B":
            x = values.get(name, 0.0)
            if min(abs(x), abs(x - 1.0)) > 1e-6:
                raise IlpSolutionError(f"binary {name} is fractional ({x})")
    plat = inst.platform
    assign = {}
    for k, i in inst.nodes():
        on = [u for u in plat.ids if round(values.get(_name("x", k, i, u), 0.0)) == 1]
        if len(on) != 1:
            raise IlpSolutionError(f"node {(k, i)} placed on {len(on)} processors")
        assign[(k, i)] = on[0]
    downloads = {}
    for (k, i), u in sorted(assign.items()):
        for j in sorted(inst.op_of((k, i)).required_objects):
            if plat.has(u, j):
                continue
            srcs = [
                v for v in plat.ids
                if v != u and round(values.get(_name("d", j, u, v, k), 0.0)) == 1
            ]
            if not srcs:
                raise IlpSolutionError(f"processor {u} has no source for object {j}")
            v = srcs[0]
            if (u, j) in downloads and downloads[(u, j)] != v:
                raise IlpSolutionError(f"processor {u} downloads object {j} from two sources")
            downloads[(u, j)] = v
    mp = Mapping(assign, {}, downloads)
    try:
        report = check(inst, mp)
    except MappingError as e:
        raise IlpSolutionError(str(e)) from e
    cost = evaluate(inst, mp).get(model.objective)
    ilp = model.objective_value(values)
    ok = abs(ilp - cost) <= 1e-6 * max(1.0, abs(cost))
    return SolutionCheck(mp, report, ilp, cost, ok)


def closed_form_sizes(inst: Instance, objective: str = "proc-power") -> tuple[int, int]:
    """(variables, rows) predicted from instance counts alone."""
    K = len(inst.apps)
    if K == 0:
        return 0, 0
    N = inst.node_count
    E = N - K
    P = len(inst.platform.processors)
    J = len(inst.objects)
    Z = sum(1 for p in inst.platform.processors if p.speed == 0)
    L = P * (P - 1)
    O = C = Q = R = U = 0
    used_ops: set[int] = set()
    child_ops: set[int] = set()
    for a in inst.apps:
        ops = {n.operator for n in a.nodes.values()}
        kids = {a.nodes[i].operator for i in a.nodes if i > 1}
        O += len(ops)
        C += len(kids)
        Q += len({(a.nodes[i].operator, a.nodes[i // 2].operator) for i in a.nodes if i > 1})
        R += sum(len(inst.operators[n.operator].required_objects) for n in a.nodes.values())
        U += len(a.objects_used)
        used_ops |= ops
        child_ops |= kids
    W, F = len(used_ops), len(child_ops)
    extra = objective == "bw-max"
    variables = (N * P + J * P * P * K + J * L + E * P * P + P + O * P + Q * P * P
                 + 2 * C * L + F * L + W * P + J * L + extra)
    rows = (N + Z + J * P * P * K + R * P + J * P * K + J * L * K + J * P
            + 3 * E * P * P + N * P + P + N * P + O * P + E * P * P + Q * P * P
            + 2 * (E * L + C * L) + 2 * C * L + O * P + U * L
            + (P - Z) + 3 * P + L // 2 + (L // 2 if extra else 0))
    return variables, rows
