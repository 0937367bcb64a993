"""Event-driven simulation of the dimensionless switched system.

This is a validation path only. It integrates

    dx/dtau = y(x)        in State 1 (switch on, inductor charging)
    dx/dtau = y(x) - q    in State 2 (switch off, inductor discharging)

with the clock forcing State 1 -> State 2 at tau = n*T_p and the threshold
x = X_minus forcing State 2 -> State 1. Nothing here reuses the closed-form
orbit constants: the ``"exact"`` method derives each segment's equilibrium
from the vector field itself, and the ``"adaptive"`` method hands the raw
vector field to a Runge-Kutta integrator with event location.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.integrate import solve_ivp

from .errors import EventStallError
from .objectives import evaluate, evaluate_arrays
from .pv_model import DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_TP, DimensionlessParams

Method = Literal["exact", "adaptive"]

DEFAULT_TOL = 1e-10
BURN_IN_PERIODS = 30
MEASURED_PERIODS = 10


@dataclass
class _Segment:
    t0: float
    t1: float
    x0: float
    state: int
    # exact segments: x = (x0 - eq) * exp(-rate * (t - t0)) + eq
    rate: float = 0.0
    eq: float = 0.0
    # adaptive segments carry the integrator's dense output instead
    dense: object = None

    def value(self, t):
        if self.dense is not None:
            return self.dense(t)[0]
        return (self.x0 - self.eq) * np.exp(-self.rate * (t - self.t0)) + self.eq


@dataclass
class SimTrace:
    """Simulated trajectory.

    ``events`` holds ``(tau, kind)`` pairs; kinds are ``"clock"`` (State 1 to 2),
    ``"threshold"`` (State 2 to 1) and ``"knee"`` (x crosses the break point
    x = 1 without a state change).
    """

    params: DimensionlessParams
    tau: np.ndarray
    x: np.ndarray
    state: np.ndarray
    events: list[tuple[float, str]]
    segments: list[_Segment] = field(repr=False)

    @property
    def x_end(self) -> float:
        s = self.segments[-1]
        return float(s.value(s.t1))

    def x_at(self, tau):
        """Current at arbitrary times within the simulated horizon."""
        t = np.atleast_1d(np.asarray(tau, dtype=float))
        starts = np.array([s.t0 for s in self.segments])
        idx = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(self.segments) - 1)
        out = np.empty_like(t)
        for k in np.unique(idx):
            m = idx == k
            out[m] = self.segments[k].value(t[m])
        return out if np.ndim(tau) else float(out[0])

    def state_at(self, tau: float) -> int:
        starts = [s.t0 for s in self.segments]
        k = max(0, int(np.searchsorted(starts, tau, side="right")) - 1)
        return self.segments[k].state


def _slope_and_equilibrium(p: DimensionlessParams, state: int, above: bool) -> tuple[float, float]:
    # y(x) = -k (x - 1) + 1, so dx/dtau = -k (x - eq) with eq = 1 + (1 - s q) / k
    k = p.beta if above else p.alpha
    drive = 1.0 - (p.q if state == 2 else 0.0)
    return k, 1.0 + drive / k


def _time_to_level(x0: float, eq: float, k: float, level: float) -> float:
    """Time for x0 -> level along (x0 - eq) e^{-k t} + eq, or inf if never reached."""
    if x0 == level:
        return 0.0
    ratio = (level - eq) / (x0 - eq)
    if not 0.0 < ratio < 1.0:
        return math.inf
    return -math.log(ratio) / k


def _is_above(p: DimensionlessParams, x: float, state: int) -> bool:
    if x != 1.0:
        return x > 1.0
    # exactly on the knee: pick the branch the flow is heading into
    return 1.0 - (p.q if state == 2 else 0.0) > 0.0


def _integrate_exact(p, x0, state0, tau_end):
    segments: list[_Segment] = []
    events: list[tuple[float, str]] = []
    t, x, state = 0.0, float(x0), state0
    n_clock = 1
    state2_since = 0.0 if state0 == 2 else None
    while t < tau_end:
        above = _is_above(p, x, state)
        k, eq = _slope_and_equilibrium(p, state, above)
        candidates: list[tuple[float, str]] = [(tau_end, "end")]
        knee = _time_to_level(x, eq, k, 1.0) if x != 1.0 else math.inf
        candidates.append((t + knee, "knee"))
        if state == 1:
            while n_clock * p.T_p <= t:
                n_clock += 1
            candidates.append((n_clock * p.T_p, "clock"))
        else:
            if x > p.X_minus:
                candidates.append((t + _time_to_level(x, eq, k, p.X_minus), "threshold"))
            else:
                candidates.append((t, "threshold"))
            candidates.append((state2_since + p.T_p, "stall"))
        t_next, kind = min(candidates, key=lambda c: c[0])
        if kind == "stall" and t_next < tau_end:
            raise EventStallError(
                f"no threshold crossing within one period of entering State 2 (tau={state2_since:.6g})"
            )
        t_next = min(t_next, tau_end)
        seg = _Segment(t, t_next, x, state, rate=k, eq=eq)
        segments.append(seg)
        if kind == "knee":
            x_next = 1.0
        elif kind == "threshold":
            x_next = p.X_minus
        else:
            x_next = float(seg.value(t_next))
        t, x = t_next, x_next
        if kind == "end" or kind == "stall":
            break
        if kind == "knee":
            events.append((t, "knee"))
        elif kind == "clock":
            events.append((t, "clock"))
            state, state2_since = 2, t
            n_clock += 1
        elif kind == "threshold":
            events.append((t, "threshold"))
            state, state2_since = 1, None
    return segments, events


def _integrate_adaptive(p, x0, state0, tau_end, tol):
    segments: list[_Segment] = []
    events: list[tuple[float, str]] = []
    t, x, state = 0.0, float(x0), state0
    n_clock = 1
    state2_since = 0.0 if state0 == 2 else None
    rtol, atol = max(tol * 1e-2, 1e-13), max(tol * 1e-3, 1e-15)
    while t < tau_end:
        above = _is_above(p, x, state)
        # evaluate the branch fixed for the whole leg so the RHS stays smooth
        k = p.beta if above else p.alpha
        q = p.q if state == 2 else 0.0

        def rhs(_t, z, k=k, q=q):
            return [-k * (z[0] - 1.0) + 1.0 - q]

        def knee(_t, z):
            return z[0] - 1.0

        knee.terminal = True
        knee.direction = -1.0 if above else 1.0
        evs = [knee]
        if state == 1:
            while n_clock * p.T_p <= t:
                n_clock += 1
            t_stop = min(n_clock * p.T_p, tau_end)
        else:
            def threshold(_t, z):
                return z[0] - p.X_minus

            threshold.terminal = True
            threshold.direction = -1.0
            evs.append(threshold)
            t_stop = min(state2_since + p.T_p, tau_end)
        if t_stop <= t:
            break
        sol = solve_ivp(rhs, (t, t_stop), [x], method="DOP853", rtol=rtol, atol=atol,
                        events=evs, dense_output=True)
        hit = None
        for i, te in enumerate(sol.t_events):
            if len(te) and te[0] > t and (hit is None or te[0] < hit[0]):
                hit = (float(te[0]), i)
        t_next = hit[0] if hit else float(sol.t[-1])
        segments.append(_Segment(t, t_next, x, state, dense=sol.sol))
        if hit is not None and hit[1] == 0:
            t, x = t_next, 1.0
            events.append((t, "knee"))
            continue
        if hit is not None:
            t, x = t_next, p.X_minus
            events.append((t, "threshold"))
            state, state2_since = 1, None
            continue
        t, x = t_next, float(sol.y[0, -1])
        if t >= tau_end:
            break
        if state == 1:
            events.append((t, "clock"))
            state, state2_since = 2, t
            n_clock += 1
        else:
            raise EventStallError(
                f"no threshold crossing within one period of entering State 2 (tau={state2_since:.6g})"
            )
    return segments, events


def integrate(
    p: DimensionlessParams,
    x0: float,
    state0: int = 2,
    tau_end: float | None = None,
    tol: float = DEFAULT_TOL,
    *,
    method: Method = "exact",
    samples_per_period: int = 200,
) -> SimTrace:
    """Simulate from ``x0`` at tau = 0 in ``state0`` up to ``tau_end``.

    The default horizon is one clock period. Samples are taken on a uniform
    grid plus every event time.
    """
    if x0 <= 0 or tol <= 0:
        raise ValueError("x0 and tol must be positive")
    if state0 not in (1, 2):
        raise ValueError("state0 must be 1 or 2")
    tau_end = p.T_p if tau_end is None else tau_end
    if tau_end <= 0:
        raise ValueError("tau_end must be positive")
    if method == "exact":
        segments, events = _integrate_exact(p, x0, state0, tau_end)
    elif method == "adaptive":
        segments, events = _integrate_adaptive(p, x0, state0, tau_end, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    n = max(2, int(round(tau_end / p.T_p * samples_per_period)) + 1)
    grid = np.union1d(np.linspace(0.0, tau_end, n), [e[0] for e in events])
    trace = SimTrace(p, grid, np.empty_like(grid), np.empty(grid.shape, dtype=np.int8),
                     events, segments)
    trace.x = trace.x_at(grid)
    starts = np.array([s.t0 for s in segments])
    idx = np.clip(np.searchsorted(starts, grid, side="right") - 1, 0, len(segments) - 1)
    trace.state = np.array([segments[k].state for k in idx], dtype=np.int8)
    return trace


def return_map(p: DimensionlessParams, x0: float, *, method: Method = "exact",
               tol: float = DEFAULT_TOL) -> float:
    """Current one clock period after starting at ``x0`` in State 2."""
    trace = integrate(p, x0, 2, p.T_p, tol, method=method, samples_per_period=2)
    if trace.segments[-1].state == 2 and not any(k == "threshold" for _, k in trace.events):
        raise EventStallError("discharge did not reach the threshold within one period")
    return trace.x_end


def return_map_slope(p: DimensionlessParams, x0: float, h: float = 1e-6,
                     *, method: Method = "exact") -> float:
    """Central finite-difference slope of the one-period map at ``x0``."""
    return (return_map(p, x0 + h, method=method) - return_map(p, x0 - h, method=method)) / (2 * h)


def find_fixed_point(p: DimensionlessParams, x_start: float = 1.0, *,
                     method: Method = "exact", burn_in: int = BURN_IN_PERIODS) -> float:
    """Locate the period-T_p fixed point by iteration followed by secant steps.

    Iterating the map settles the trajectory onto the affine piece that holds
    the fixed point; one secant step on an affine map is then exact, and a
    second one mops up rounding.
    """
    x = x_start
    for _ in range(burn_in):
        try:
            x = return_map(p, x, method=method)
        except EventStallError:
            break
    for _ in range(3):
        fx = return_map(p, x, method=method)
        slope = return_map_slope(p, x, method=method)
        step = (fx - x) / (1.0 - slope)
        x += step
        if abs(step) < 1e-15:
            break
    return x


def poincare_samples(p: DimensionlessParams, x0: float, periods: int, *,
                     method: Method = "exact") -> np.ndarray:
    """Stroboscopic samples x(n T_p) for n = 0..periods."""
    trace = integrate(p, x0, 2, periods * p.T_p, method=method, samples_per_period=2)
    return trace.x_at(np.arange(periods + 1) * p.T_p)


def average_power(p: DimensionlessParams, x_f: float, n: int = 20001, *,
                  method: Method = "exact") -> float:
    """Trapezoidal mean of x * y over one simulated period from ``x_f``."""
    trace = integrate(p, x_f, 2, p.T_p, method=method, samples_per_period=2)
    tau = np.union1d(np.linspace(0.0, p.T_p, n), [e[0] for e in trace.events])
    x = trace.x_at(tau)
    y = np.where(x < 1.0, -p.alpha * (x - 1.0) + 1.0, -p.beta * (x - 1.0) + 1.0)
    return float(np.trapezoid(x * y, tau) / p.T_p)


def validation_records(p: DimensionlessParams, closed: dict[str, float], *,
                       method: Method = "exact") -> list[dict]:
    """Compare closed-form ``x_f``, ``Df`` and ``power`` against simulation."""
    x_f = find_fixed_point(p, 1.0, method=method)
    measured = {
        "x_f": x_f,
        "Df": return_map_slope(p, x_f, method=method),
        "power": average_power(p, x_f, method=method),
    }
    point = {"q": p.q, "X_minus": p.X_minus, "T_p": p.T_p, "alpha": p.alpha, "beta": p.beta}
    return [
        {
            "point": point,
            "quantity": name,
            "closed_form": closed[name],
            "oracle": measured[name],
            "abs_err": abs(closed[name] - measured[name]),
        }
        for name in ("x_f", "Df", "power")
    ]


def draw_stable_points(n: int, seed: int, q_range=(1.0, 4.0), xminus_range=(0.0, 0.9),
                       T_p: float = DEFAULT_TP, alpha: float = DEFAULT_ALPHA,
                       beta: float = DEFAULT_BETA) -> list[DimensionlessParams]:
    """``n`` uniform draws from the box, keeping only stable-orbit points."""
    rng = np.random.default_rng(seed)
    out: list[DimensionlessParams] = []
    while len(out) < n:
        q = rng.uniform(*q_range, size=4 * n)
        x = rng.uniform(*xminus_range, size=4 * n)
        ok = evaluate_arrays(q, x, T_p, alpha, beta).stable & (x > xminus_range[0]) & (q > q_range[0])
        out.extend(DimensionlessParams(T_p, alpha, beta, float(xi), float(qi))
                   for qi, xi in zip(q[ok], x[ok]))
    return out[:n]


def validate_points(points: list[DimensionlessParams], *, method: Method = "exact") -> list[dict]:
    """Closed-form versus simulated ``x_f``, ``Df`` and average power at each point."""
    records = []
    for p in points:
        e = evaluate(p)
        closed = {"x_f": e.orbit.x_f, "Df": e.orbit.Df, "power": e.F2}
        records.extend(validation_records(p, closed, method=method))
    return records
