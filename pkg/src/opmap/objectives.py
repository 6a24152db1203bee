"""The four cost functions: processor count, compute power, bandwidth sum and max."""
from __future__ import annotations

from dataclasses import asdict, dataclass

from .feasibility import CommSets, build_comm_sets, loads_from_sets
from .model import Instance, Mapping

OBJECTIVES = ("proc-nb", "proc-power", "bw-sum", "bw-max")


@dataclass(frozen=True)
class CostVector:
    proc_nb: int
    proc_power: float
    bw_sum: float
    bw_max: float

    def get(self, objective: str) -> float:
        return getattr(self, objective.replace("-", "_"))

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate(inst: Instance, m: Mapping, sets: CommSets | None = None) -> CostVector:
    """All four costs of a complete mapping.

    ``proc_power`` is the summed compute utilization, ``bw_sum`` counts each
    inter-processor flow once, and ``bw_max`` is the largest link
    utilization fraction.
    """
    if sets is None:
        sets = build_comm_sets(inst, m)
    report = loads_from_sets(inst, sets)
    links = inst.platform.links
    return CostVector(
        proc_nb=len(set(m.assign.values())),
        proc_power=sum(x for _, x in sorted(report.compute_util.items())),
        bw_sum=sum(x for _, x in sorted(report.link_load.items())),
        bw_max=max((x / links[pair] for pair, x in report.link_load.items()), default=0.0),
    )
