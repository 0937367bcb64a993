"""Closed-form period-T_p orbits of the dimensionless switched system.

Between switching events the current obeys a linear ODE, so each segment is
``x(tau) = (x0 - E) * exp(-k * tau) + E`` with rate ``k`` (alpha below the
break point x = 1, beta above it) and equilibrium ``E`` (one of A1, A2, B1, B2).

Type 1 orbits start above the break point and pass through four segments:
discharge above 1, discharge below 1 down to X_minus, charge below 1, charge
above 1. Type 2 orbits stay below the break point: discharge to X_minus, then
charge until the clock.

Scalar entry points (:func:`solve_orbit` and friends) raise typed errors;
:func:`solve_arrays` is the vectorized kernel used by lattice scans and marks
failures in an integer type array instead.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateError, DomainError, NoOrbitError
from .pv_model import DimensionlessParams, pv_curve

DEGENERACY_TOL = 1e-12
# On the type border x_f = 1 and tau_c = T_p; misses this small are rounding noise.
KNEE_TOL = 1e-12


class OrbitType(enum.IntEnum):
    TYPE1 = 1
    TYPE2 = 2

    def __str__(self) -> str:
        return f"Type{int(self)}"


@dataclass(frozen=True)
class PeriodicOrbit:
    params: DimensionlessParams
    type: OrbitType
    x_f: float
    switching_times: tuple[float, ...]
    Df: float

    @property
    def stable(self) -> bool:
        return abs(self.Df) < 1.0

    @property
    def tau_a(self) -> float:
        return self._time(OrbitType.TYPE1, 0)

    @property
    def tau_b(self) -> float:
        return self._time(OrbitType.TYPE1, 1)

    @property
    def tau_c(self) -> float:
        return self._time(OrbitType.TYPE1, 2)

    @property
    def tau_d(self) -> float:
        return self._time(OrbitType.TYPE2, 0)

    def _time(self, kind: OrbitType, i: int) -> float:
        if self.type is not kind:
            raise AttributeError(f"{self.type} orbit has no such switching time")
        return self.switching_times[i]


def contraction_rate_type1(p: DimensionlessParams) -> float:
    """Slope of the Type 1 stroboscopic map.

    The factor (1 - B1)/(1 - B2) is negative whenever q > 1, so the rate
    itself is negative; only its magnitude enters the stability objective.
    """
    a = p.aux
    if p.q <= 1.0:
        raise DomainError(f"Type 1 rate needs q > 1 (B2 < 1), got q={p.q}")
    num = (p.X_minus - a.A1) * (1.0 - a.A2)
    den = (1.0 - a.A1) * (p.X_minus - a.A2)
    if den == 0.0 or num / den <= 0.0:
        raise DomainError("log-ratio of the below-knee segments is not positive")
    base = num / den
    return base ** (p.beta / p.alpha) * (1.0 - a.B1) / (1.0 - a.B2) * math.exp(-p.beta * p.T_p)


def contraction_rate_type2(p: DimensionlessParams) -> float:
    a = p.aux
    if p.X_minus == a.A2:
        raise DomainError("X_minus coincides with the discharge equilibrium A2")
    return (p.X_minus - a.A1) / (p.X_minus - a.A2) * math.exp(-p.alpha * p.T_p)


def return_map_type1(p: DimensionlessParams, x0: float) -> float:
    return contraction_rate_type1(p) * (x0 - p.aux.B2) + p.aux.B1


def return_map_type2(p: DimensionlessParams, x0: float) -> float:
    return contraction_rate_type2(p) * (x0 - p.aux.A2) + p.aux.A1


def fixed_point(p: DimensionlessParams, kind: OrbitType) -> float:
    a = p.aux
    if kind is OrbitType.TYPE1:
        df, low, high = contraction_rate_type1(p), a.B2, a.B1
    else:
        df, low, high = contraction_rate_type2(p), a.A2, a.A1
    # only Df = +1 makes 1 - Df vanish; Df = -1 is the ordinary stability border
    if abs(df - 1.0) < DEGENERACY_TOL:
        raise DegenerateError(f"Df = 1 for {kind} at {p}")
    return (high - df * low) / (1.0 - df)


def _log_ratio(num: float, den: float) -> float:
    if den == 0.0 or num / den <= 0.0:
        raise DomainError("non-positive time-of-flight ratio")
    return math.log(num / den)


def _try_type1(p: DimensionlessParams) -> PeriodicOrbit | None:
    try:
        df = contraction_rate_type1(p)
    except DomainError:
        return None
    x_f = fixed_point(p, OrbitType.TYPE1)
    if 1.0 - KNEE_TOL <= x_f < 1.0:
        x_f = 1.0
    if x_f < 1.0:
        return None
    a = p.aux
    try:
        tau_a = _log_ratio(x_f - a.B2, 1.0 - a.B2) / p.beta
        tau_b = _log_ratio(1.0 - a.A2, p.X_minus - a.A2) / p.alpha + tau_a
        tau_c = _log_ratio(p.X_minus - a.A1, 1.0 - a.A1) / p.alpha + tau_b
    except DomainError:
        return None
    # tau_a == 0 only on the type border x_f == 1, which is assigned to Type 1.
    if not (0.0 <= tau_a < tau_b < tau_c <= p.T_p + KNEE_TOL):
        return None
    return PeriodicOrbit(p, OrbitType.TYPE1, x_f, (tau_a, tau_b, tau_c), df)


def _try_type2(p: DimensionlessParams) -> PeriodicOrbit | None:
    try:
        df = contraction_rate_type2(p)
    except DomainError:
        return None
    x_f = fixed_point(p, OrbitType.TYPE2)
    if not x_f < 1.0:
        return None
    a = p.aux
    try:
        tau_d = _log_ratio(x_f - a.A2, p.X_minus - a.A2) / p.alpha
    except DomainError:
        return None
    if not 0.0 < tau_d < p.T_p:
        return None
    return PeriodicOrbit(p, OrbitType.TYPE2, x_f, (tau_d,), df)


def solve_orbit(p: DimensionlessParams) -> PeriodicOrbit:
    """Return the period-T_p orbit at ``p``, trying Type 1 before Type 2."""
    if p.q <= 1.0:
        raise NoOrbitError(
            f"q={p.q} <= 1: the discharge phase cannot pull the current below the knee"
        )
    orbit = _try_type1(p) or _try_type2(p)
    if orbit is None:
        raise NoOrbitError(f"no period-T_p orbit of Type 1 or Type 2 at q={p.q}, X_minus={p.X_minus}")
    return orbit


def orbit_value(o: PeriodicOrbit, tau):
    """Current x(tau) on the closed-form orbit for tau in [0, T_p]."""
    p, a = o.params, o.params.aux
    t = np.asarray(tau, dtype=float)
    if o.type is OrbitType.TYPE1:
        ta, tb, tc = o.switching_times
        x = np.select(
            [t <= ta, t <= tb, t <= tc],
            [
                (o.x_f - a.B2) * np.exp(-p.beta * t) + a.B2,
                (1.0 - a.A2) * np.exp(-p.alpha * (t - ta)) + a.A2,
                (p.X_minus - a.A1) * np.exp(-p.alpha * (t - tb)) + a.A1,
            ],
            # State 1 above the knee relaxes toward B1 (the State 1 equilibrium).
            (1.0 - a.B1) * np.exp(-p.beta * (t - tc)) + a.B1,
        )
    else:
        (td,) = o.switching_times
        # First segment relaxes toward A2: the discharge equilibrium below the
        # knee. A B2 offset here would contradict the tau_d time of flight.
        x = np.where(
            t <= td,
            (o.x_f - a.A2) * np.exp(-p.alpha * t) + a.A2,
            (p.X_minus - a.A1) * np.exp(-p.alpha * (t - td)) + a.A1,
        )
    return float(x) if x.ndim == 0 else x


def sample_orbit(o: PeriodicOrbit, n: int) -> np.ndarray:
    """``n`` equally spaced rows of (tau, x, y, p) over one period."""
    if n < 2:
        raise ValueError("need at least two samples")
    tau = np.linspace(0.0, o.params.T_p, n)
    x = orbit_value(o, tau)
    y = pv_curve(o.params, x)
    return np.column_stack([tau, x, y, x * y])


class OrbitArrays(NamedTuple):
    """Vectorized orbit solution; ``type`` is 0 where no orbit exists."""

    type: np.ndarray
    x_f: np.ndarray
    Df: np.ndarray
    tau_a: np.ndarray
    tau_b: np.ndarray
    tau_d: np.ndarray


def solve_arrays(q, X_minus, T_p: float, alpha: float, beta: float) -> OrbitArrays:
    """Array counterpart of :func:`solve_orbit` with identical acceptance rules.

    ``tau_c`` is not returned since nothing downstream needs it beyond the
    acceptance test. Entries that are not of the returned type hold NaN.
    """
    q = np.asarray(q, dtype=float)
    X = np.asarray(X_minus, dtype=float)
    q, X = np.broadcast_arrays(q, X)
    A1 = (alpha + 1.0) / alpha
    A2 = (alpha + 1.0 - q) / alpha
    B1 = (beta + 1.0) / beta
    B2 = (beta + 1.0 - q) / beta
    with np.errstate(all="ignore"):
        base = ((X - A1) * (1.0 - A2)) / ((1.0 - A1) * (X - A2))
        df1 = base ** (beta / alpha) * (1.0 - B1) / (1.0 - B2) * math.exp(-beta * T_p)
        ok1 = (q > 1.0) & (base > 0.0) & (np.abs(df1 - 1.0) >= DEGENERACY_TOL)
        x1 = (B1 - df1 * B2) / (1.0 - df1)
        x1 = np.where((x1 < 1.0) & (x1 >= 1.0 - KNEE_TOL), 1.0, x1)
        ta = np.log((x1 - B2) / (1.0 - B2)) / beta
        tb = np.log((1.0 - A2) / (X - A2)) / alpha + ta
        tc = np.log((X - A1) / (1.0 - A1)) / alpha + tb
        ok1 &= (x1 >= 1.0) & (ta >= 0.0) & (ta < tb) & (tb < tc) & (tc <= T_p + KNEE_TOL)

        df2 = (X - A1) / (X - A2) * math.exp(-alpha * T_p)
        ok2 = (q > 1.0) & (X != A2) & (np.abs(df2 - 1.0) >= DEGENERACY_TOL)
        x2 = (A1 - df2 * A2) / (1.0 - df2)
        td = np.log((x2 - A2) / (X - A2)) / alpha
        ok2 &= ~ok1 & (x2 < 1.0) & (td > 0.0) & (td < T_p)

    kind = np.where(ok1, 1, np.where(ok2, 2, 0)).astype(np.int8)
    nan = np.nan
    return OrbitArrays(
        type=kind,
        x_f=np.where(ok1, x1, np.where(ok2, x2, nan)),
        Df=np.where(ok1, df1, np.where(ok2, df2, nan)),
        tau_a=np.where(ok1, ta, nan),
        tau_b=np.where(ok1, tb, nan),
        tau_d=np.where(ok2, td, nan),
    )
