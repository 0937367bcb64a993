"""Photovoltaic input model and the dimensionless parameterization.

The physical circuit is a photo-current source with a piecewise-linear
junction diode, a series resistance R_s and a shunt resistance R_p feeding
a boost converter with inductance L, clock period T, lower current threshold
I_minus and constant output voltage V_o. Everything downstream works with the
five dimensionless parameters (T_p, alpha, beta, X_minus, q).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ParameterError

# Fixed setting for the two-parameter problem; (q, X_minus) stay free.
DEFAULT_TP = 1.0
DEFAULT_ALPHA = 0.875
DEFAULT_BETA = 3.5


def reduce_diode(g_d: float, V_T: float, v_d: float) -> float:
    """Current through the piecewise-linear diode at junction voltage ``v_d``."""
    if g_d < 0:
        raise ParameterError(f"diode conductance must be non-negative, got {g_d}")
    if v_d >= V_T:
        return g_d * (v_d - V_T)
    return 0.0


@dataclass(frozen=True)
class PhysicalCircuit:
    """Circuit constants in SI units."""

    I_s: float
    V_T: float
    g_d: float
    R_s: float
    R_p: float
    L: float
    T: float
    I_minus: float
    V_o: float

    def __post_init__(self) -> None:
        if not (self.R_p > 0 and self.L > 0 and self.T > 0):
            raise ParameterError("R_p, L and T must be positive")
        if self.g_d < 0 or self.R_s < 0:
            raise ParameterError("g_d and R_s must be non-negative")

    @property
    def r_a(self) -> float:
        """Small-signal resistance of the PV source below the knee current."""
        return self.R_s + self.R_p / (1.0 + self.g_d * self.R_p)

    @property
    def r_b(self) -> float:
        return self.R_s + self.R_p

    @property
    def I_p(self) -> float:
        """Knee current: the diode starts conducting below it."""
        return self.I_s - self.V_T / self.R_p

    @property
    def V_p(self) -> float:
        return (1.0 + self.R_s / self.R_p) * self.V_T - self.R_s * self.I_s

    def pv_voltage(self, i: float) -> float:
        """Terminal voltage v(i) of the reduced current-controlled source."""
        if i <= 0:
            raise ParameterError(f"current must be positive, got {i}")
        r = self.r_a if i < self.I_p else self.r_b
        return -r * (i - self.I_p) + self.V_p

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> PhysicalCircuit:
        return cls(**_checked_fields(cls, data))


@dataclass(frozen=True)
class AuxConstants:
    """Equilibrium levels of the four linear vector fields.

    A1/A2 belong to the x < 1 branch (State 1 / State 2), B1/B2 to x >= 1.
    """

    A1: float
    A2: float
    B1: float
    B2: float

    @classmethod
    def from_params(cls, alpha: float, beta: float, q: float) -> AuxConstants:
        return cls(
            A1=(alpha + 1.0) / alpha,
            A2=(alpha + 1.0 - q) / alpha,
            B1=(beta + 1.0) / beta,
            B2=(beta + 1.0 - q) / beta,
        )


@dataclass(frozen=True)
class DimensionlessParams:
    """The five parameters that fully define the switched system.

    ``q <= 1`` is accepted here and rejected later by the orbit solver,
    since no period-T_p orbit of the assumed shape exists there.
    """

    T_p: float
    alpha: float
    beta: float
    X_minus: float
    q: float
    aux: AuxConstants = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        for name in ("T_p", "alpha", "beta", "X_minus", "q"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value}")
        if not (self.T_p > 0 and self.alpha > 0 and self.beta > 0):
            raise ParameterError("T_p, alpha and beta must be positive")
        if not 0.0 < self.X_minus < 1.0:
            raise ParameterError(f"X_minus must lie in (0, 1), got {self.X_minus}")
        if self.q <= 0:
            raise ParameterError(f"q must be positive, got {self.q}")
        object.__setattr__(
            self, "aux", AuxConstants.from_params(self.alpha, self.beta, self.q)
        )

    @classmethod
    def defaults(cls, q: float, X_minus: float, **overrides: float) -> DimensionlessParams:
        """Parameters with T_p, alpha, beta fixed at the two-parameter setting."""
        base = {"T_p": DEFAULT_TP, "alpha": DEFAULT_ALPHA, "beta": DEFAULT_BETA}
        base.update(overrides)
        return cls(X_minus=X_minus, q=q, **base)

    def with_control(self, q: float, X_minus: float) -> DimensionlessParams:
        return DimensionlessParams(self.T_p, self.alpha, self.beta, X_minus, q)

    def as_dict(self) -> dict[str, float]:
        d = asdict(self)
        d.pop("aux")
        return d

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> DimensionlessParams:
        return cls(**_checked_fields(cls, data))


def _checked_fields(cls: type, data: dict[str, Any]) -> dict[str, float]:
    names = {f.name for f in fields(cls) if f.init}
    unknown = set(data) - names
    if unknown:
        raise ParameterError(f"unknown field(s) for {cls.__name__}: {sorted(unknown)}")
    missing = names - set(data)
    if missing:
        raise ParameterError(f"missing field(s) for {cls.__name__}: {sorted(missing)}")
    return {k: float(v) for k, v in data.items()}


def to_dimensionless(c: PhysicalCircuit) -> DimensionlessParams:
    """Normalize currents by I_p, voltages by V_p and time by L*I_p/V_p."""
    I_p, V_p = c.I_p, c.V_p
    if I_p <= 0:
        raise ParameterError(f"I_p = I_s - V_T/R_p must be positive, got {I_p}")
    if V_p <= 0:
        raise ParameterError(f"V_p must be positive, got {V_p}")
    return DimensionlessParams(
        T_p=V_p / (c.L * I_p) * c.T,
        alpha=I_p / V_p * c.r_a,
        beta=I_p / V_p * c.r_b,
        X_minus=c.I_minus / I_p,
        q=c.V_o / V_p,
    )


def pv_curve(p: DimensionlessParams, x):
    """Dimensionless PV voltage y(x); accepts scalars or arrays with x > 0."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise ParameterError("pv_curve is defined only for x > 0")
    y = np.where(xa < 1.0, -p.alpha * (xa - 1.0) + 1.0, -p.beta * (xa - 1.0) + 1.0)
    return float(y) if y.ndim == 0 else y


def load_config(source: str | Path | dict[str, Any]) -> PhysicalCircuit | DimensionlessParams:
    """Read a JSON document holding either ``{"circuit": {...}}`` or ``{"params": {...}}``.

    A circuit is converted with :func:`to_dimensionless` by the caller if needed;
    unknown keys at either level raise :class:`ParameterError`.
    """
    if isinstance(source, dict):
        doc = source
    else:
        path = Path(source)
        doc = json.loads(path.read_text())
    if not isinstance(doc, dict) or len(doc) != 1 or next(iter(doc)) not in ("circuit", "params"):
        raise ParameterError('config must have exactly one top-level key: "circuit" or "params"')
    (kind, body), = doc.items()
    if not isinstance(body, dict):
        raise ParameterError(f'"{kind}" must be an object')
    if kind == "circuit":
        return PhysicalCircuit.from_dict(body)
    return DimensionlessParams.from_dict(body)
