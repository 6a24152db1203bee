"""Mapping multiple operator trees onto a heterogeneous processor clique."""
from .feasibility import FeasibilityReport, MappingError, check
from .model import Instance, Mapping, load_instance, load_mapping, validate_instance
from .objectives import CostVector, evaluate

__version__ = "0.1.0"

__all__ = [
    "CostVector",
    "FeasibilityReport",
    "Instance",
    "Mapping",
    "MappingError",
    "check",
    "evaluate",
    "load_instance",
    "load_mapping",
    "validate_instance",
]
