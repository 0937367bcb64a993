"""Stability margin F1 and average input power F2 of the period-T_p orbit.

Both objectives are maximized. F1 = 1 - |Df| is positive exactly when the
orbit is stable; F2 is the time-average of p = x * y over one period.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import TypeMismatchError
from .orbit import OrbitType, PeriodicOrbit, solve_arrays, solve_orbit
from .pv_model import DimensionlessParams


@dataclass(frozen=True)
class ObjectivePoint:
    params: DimensionlessParams
    F1: float
    F2: float
    orbit_type: OrbitType
    orbit: PeriodicOrbit

    @property
    def stable(self) -> bool:
        return self.F1 > 0.0


def average_power_type1(o: PeriodicOrbit) -> float:
    if o.type is not OrbitType.TYPE1:
        raise TypeMismatchError("average_power_type1 needs a Type 1 orbit")
    p, a = o.params, o.params.aux
    ta, tb, _ = o.switching_times
    bracket = (1.0 - p.X_minus) / p.alpha + (o.x_f - 1.0) / p.beta + a.A2 * (tb - ta) + a.B2 * ta
    return p.q / p.T_p * bracket


def average_power_type2(o: PeriodicOrbit) -> float:
    if o.type is not OrbitType.TYPE2:
        raise TypeMismatchError("average_power_type2 needs a Type 2 orbit")
    p, a = o.params, o.params.aux
    (td,) = o.switching_times
    return p.q / p.T_p * ((o.x_f - p.X_minus) / p.alpha + a.A2 * td)


def average_power(o: PeriodicOrbit) -> float:
    if o.type is OrbitType.TYPE1:
        return average_power_type1(o)
    return average_power_type2(o)


def evaluate(p: DimensionlessParams) -> ObjectivePoint:
    """Objectives at ``p``; raises NoOrbitError/DegenerateError if infeasible."""
    o = solve_orbit(p)
    return ObjectivePoint(p, 1.0 - abs(o.Df), average_power(o), o.type, o)


class ObjectiveArrays(NamedTuple):
    type: np.ndarray
    x_f: np.ndarray
    Df: np.ndarray
    F1: np.ndarray
    F2: np.ndarray

    @property
    def feasible(self) -> np.ndarray:
        return self.type > 0

    @property
    def stable(self) -> np.ndarray:
        """Points of the stable parameter subspace (orbit exists, |Df| < 1)."""
        return self.feasible & (np.abs(self.Df) < 1.0)


def evaluate_arrays(q, X_minus, T_p: float, alpha: float, beta: float) -> ObjectiveArrays:
    """Vectorized :func:`evaluate`; infeasible entries hold NaN objectives."""
    o = solve_arrays(q, X_minus, T_p, alpha, beta)
    q, X = np.broadcast_arrays(np.asarray(q, dtype=float), np.asarray(X_minus, dtype=float))
    A2 = (alpha + 1.0 - q) / alpha
    B2 = (beta + 1.0 - q) / beta
    p1 = q / T_p * (
        (1.0 - X) / alpha + (o.x_f - 1.0) / beta + A2 * (o.tau_b - o.tau_a) + B2 * o.tau_a
    )
    p2 = q / T_p * ((o.x_f - X) / alpha + A2 * o.tau_d)
    F2 = np.where(o.type == 1, p1, np.where(o.type == 2, p2, np.nan))
    return ObjectiveArrays(o.type, o.x_f, o.Df, 1.0 - np.abs(o.Df), F2)
