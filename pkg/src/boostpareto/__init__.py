"""Exact biobjective analysis of a piecewise-linear boost converter with PV input."""

from .errors import (
    BoostParetoError,
    ConfigError,
    DegenerateError,
    DomainError,
    EmptyFrontError,
    EventStallError,
    NoOrbitError,
    ParameterError,
    RefPointError,
    TypeMismatchError,
)
from .moea import EaConfig, EaRun, hypervolume, igd, nsga2
from .objectives import ObjectivePoint, evaluate, evaluate_arrays
from .orbit import OrbitType, PeriodicOrbit, sample_orbit, solve_orbit
from .pareto import LatticeSpec, ScanResult, dominates, pareto_filter, scan
from .pv_model import DimensionlessParams, PhysicalCircuit, pv_curve, to_dimensionless

__all__ = [
    "BoostParetoError", "ConfigError", "DegenerateError", "DomainError", "EmptyFrontError",
    "EventStallError", "NoOrbitError", "ParameterError", "RefPointError", "TypeMismatchError",
    "EaConfig", "EaRun", "hypervolume", "igd", "nsga2",
    "ObjectivePoint", "evaluate", "evaluate_arrays",
    "OrbitType", "PeriodicOrbit", "sample_orbit", "solve_orbit",
    "LatticeSpec", "ScanResult", "dominates", "pareto_filter", "scan",
    "DimensionlessParams", "PhysicalCircuit", "pv_curve", "to_dimensionless",
]
