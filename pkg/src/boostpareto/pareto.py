"""Brute-force Pareto analysis over the (q, X_minus) lattice.

Both objectives are maximized. Domination follows the three-clause rule:
u dominates v when it is strictly better in one objective and at least as
good in the other, with "as good" meaning exact floating-point equality.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .objectives import ObjectiveArrays, evaluate_arrays
from .orbit import solve_arrays
from .pv_model import DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_TP

BISECT_ITERS = 48
ROWS_PER_CHUNK = 64


@dataclass(frozen=True)
class LatticeSpec:
    """Open box in (q, X_minus) and its lattice pitch."""

    q_range: tuple[float, float] = (1.0, 4.0)
    xminus_range: tuple[float, float] = (0.0, 0.9)
    step_q: float = 1e-3
    step_x: float = 1e-3

    def __post_init__(self) -> None:
        if not (self.step_q > 0 and self.step_x > 0):
            raise ValueError("lattice steps must be positive")
        if not (self.q_range[0] < self.q_range[1] and self.xminus_range[0] < self.xminus_range[1]):
            raise ValueError("ranges must be non-empty")

    @staticmethod
    def _axis(lo: float, hi: float, step: float) -> np.ndarray:
        n = math.floor((hi - lo) / step + 1e-9)
        vals = np.round(lo + np.arange(1, n + 1) * step, 12)
        return vals[vals < hi]

    @property
    def q_values(self) -> np.ndarray:
        return self._axis(*self.q_range, self.step_q)

    @property
    def xminus_values(self) -> np.ndarray:
        return self._axis(*self.xminus_range, self.step_x)

    def as_dict(self) -> dict:
        return {
            "q_range": list(self.q_range),
            "xminus_range": list(self.xminus_range),
            "step_q": self.step_q,
            "step_x": self.step_x,
        }


def dominates(u, v) -> bool:
    """True when objective pair ``u`` dominates ``v`` (maximization)."""
    return (u[0] > v[0] and u[1] >= v[1]) or (u[0] >= v[0] and u[1] > v[1])


def _output_order(f1: np.ndarray, f2: np.ndarray, ids: np.ndarray, idx: np.ndarray) -> np.ndarray:
    return idx[np.lexsort((ids[idx], -f2[idx], f1[idx]))]


def pareto_filter(f1, f2, ids=None) -> np.ndarray:
    """Positions of the non-dominated points.

    Sweep in decreasing F1. A point survives when it has the largest F2 of its
    equal-F1 group and that F2 strictly beats every point with larger F1.
    Exact duplicates are mutually non-dominating, so all copies survive.
    Output is sorted by F1 ascending, F2 descending, then id.
    """
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    ids = np.arange(len(f1)) if ids is None else np.asarray(ids)
    if len(f1) == 0:
        return np.empty(0, dtype=np.intp)
    order = np.lexsort((-f2, -f1))
    s1, s2 = f1[order], f2[order]
    new_group = np.empty(len(s1), dtype=bool)
    new_group[0] = True
    new_group[1:] = s1[1:] != s1[:-1]
    group_id = np.cumsum(new_group) - 1
    group_best = s2[new_group]
    # best F2 among groups with strictly larger F1
    prior = np.concatenate([[-np.inf], np.maximum.accumulate(group_best)[:-1]])
    keep = (s2 == group_best[group_id]) & (s2 > prior[group_id])
    return _output_order(f1, f2, ids, order[keep])


def pareto_filter_bruteforce(f1, f2, ids=None) -> np.ndarray:
    """O(n^2) reference for :func:`pareto_filter`."""
    f1 = np.asarray(f1, dtype=float)
    f2 = np.asarray(f2, dtype=float)
    ids = np.arange(len(f1)) if ids is None else np.asarray(ids)
    keep = []
    for i in range(len(f1)):
        dominated = np.any(((f1 > f1[i]) & (f2 >= f2[i])) | ((f1 >= f1[i]) & (f2 > f2[i])))
        if not dominated:
            keep.append(i)
    return _output_order(f1, f2, ids, np.asarray(keep, dtype=np.intp))


def evaluate_lattice(spec: LatticeSpec, T_p: float, alpha: float, beta: float,
                     threads: int = 1) -> ObjectiveArrays:
    """Objectives on the full lattice, shape (n_q, n_x).

    Rows are evaluated in fixed chunks and stitched back in chunk order, so
    the result does not depend on ``threads``.
    """
    qs, xs = spec.q_values, spec.xminus_values
    chunks = [qs[i:i + ROWS_PER_CHUNK] for i in range(0, len(qs), ROWS_PER_CHUNK)]

    def run(qc):
        return evaluate_arrays(qc[:, None], xs[None, :], T_p, alpha, beta)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(c) for c in chunks]
    return ObjectiveArrays(*(np.concatenate(col, axis=0) for col in zip(*parts)))


# --- borders -----------------------------------------------------------------

def _bisect_edges(p0: np.ndarray, p1: np.ndarray, predicate) -> np.ndarray:
    """Vectorized bisection between rows of p0 (predicate true) and p1 (false)."""
    lo, hi = p0.copy(), p1.copy()
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        inside = predicate(mid[:, 0], mid[:, 1])
        lo = np.where(inside[:, None], mid, lo)
        hi = np.where(inside[:, None], hi, mid)
    return 0.5 * (lo + hi)


def _chain(cells: dict[tuple[int, int], list], edge_points: dict) -> list[np.ndarray]:
    """Link crossing edges through shared cells into ordered polylines."""
    adj: dict = {e: [] for e in edge_points}
    for links in cells.values():
        for a, b in links:
            adj[a].append(b)
            adj[b].append(a)
    seen: set = set()
    lines = []

    def walk(start):
        path = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [n for n in adj[cur] if n != prev and n not in seen]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            seen.add(cur)
            path.append(cur)
        return path

    for e in sorted(adj):
        if e not in seen and len(adj[e]) <= 1:
            lines.append(walk(e))
    for e in sorted(adj):
        if e not in seen:
            lines.append(walk(e))
    out = []
    for path in lines:
        pts = np.array([edge_points[e] for e in path])
        if tuple(pts[-1]) < tuple(pts[0]):
            pts = pts[::-1]
        out.append(pts)
    out.sort(key=lambda a: tuple(a[0]))
    return out


def trace_border(qs: np.ndarray, xs: np.ndarray, inside: np.ndarray, valid: np.ndarray,
                 xf: np.ndarray, predicate) -> list[np.ndarray]:
    """Polylines separating ``inside`` from ``~inside`` lattice nodes.

    Only lattice edges joining two ``valid`` nodes with different labels are
    crossings. Each crossing is refined by bisection of ``predicate``. Saddle
    cells are resolved by keeping the diagonal with the larger mean ``xf``
    connected.
    """
    Q, X = np.meshgrid(qs, xs, indexing="ij")
    cross_h = valid[:-1, :] & valid[1:, :] & (inside[:-1, :] != inside[1:, :])
    cross_v = valid[:, :-1] & valid[:, 1:] & (inside[:, :-1] != inside[:, 1:])
    keys, p0, p1 = [], [], []
    for kind, mask, di, dj in (("h", cross_h, 1, 0), ("v", cross_v, 0, 1)):
        ii, jj = np.nonzero(mask)
        a_in = inside[ii, jj]
        qa, xa = Q[ii, jj], X[ii, jj]
        qb, xb = Q[ii + di, jj + dj], X[ii + di, jj + dj]
        p0.append(np.where(a_in[:, None], np.c_[qa, xa], np.c_[qb, xb]))
        p1.append(np.where(a_in[:, None], np.c_[qb, xb], np.c_[qa, xa]))
        keys.extend((kind, int(i), int(j)) for i, j in zip(ii, jj))
    if not keys:
        return []
    pts = _bisect_edges(np.concatenate(p0), np.concatenate(p1), predicate)
    edge_points = {k: tuple(pt) for k, pt in zip(keys, pts)}

    cells: dict[tuple[int, int], list] = {}
    for kind, i, j in keys:
        owners = [(i, j - 1), (i, j)] if kind == "h" else [(i - 1, j), (i, j)]
        for c in owners:
            if 0 <= c[0] < len(qs) - 1 and 0 <= c[1] < len(xs) - 1:
                cells.setdefault(c, [])
    for (i, j) in list(cells):
        bottom, top = ("h", i, j), ("h", i, j + 1)
        left, right = ("v", i, j), ("v", i + 1, j)
        present = [e for e in (bottom, right, top, left) if e in edge_points]
        if len(present) == 2:
            cells[(i, j)] = [tuple(present)]
        elif len(present) == 4:
            main = np.nanmean([xf[i, j], xf[i + 1, j + 1]])
            anti = np.nanmean([xf[i + 1, j], xf[i, j + 1]])
            if main >= anti:
                # (i, j)-(i+1, j+1) stay joined; cut off the other two corners
                cells[(i, j)] = [(bottom, right), (top, left)]
            else:
                cells[(i, j)] = [(bottom, left), (top, right)]
        else:
            cells[(i, j)] = []
    return _chain(cells, edge_points)


def border_type(qs, xs, lattice: ObjectiveArrays, T_p, alpha, beta) -> list[np.ndarray]:
    """Polylines of the Type 1 / Type 2 border (x_f = 1)."""
    def is_type1(q, x):
        return solve_arrays(q, x, T_p, alpha, beta).type == 1

    valid = lattice.type > 0
    return trace_border(qs, xs, lattice.type == 1, valid, lattice.x_f, is_type1)


def border_stability(qs, xs, lattice: ObjectiveArrays, T_p, alpha, beta) -> list[np.ndarray]:
    """Polylines of the stability border (|Df| = 1)."""
    def is_stable(q, x):
        o = solve_arrays(q, x, T_p, alpha, beta)
        return (o.type > 0) & (np.abs(o.Df) < 1.0)

    valid = lattice.type > 0
    return trace_border(qs, xs, lattice.stable, valid, lattice.x_f, is_stable)


# --- edges of the parameter box ---------------------------------------------

@dataclass
class EdgeImage:
    """Objective-space image of one box edge, split at infeasible gaps."""

    name: str
    params: np.ndarray  # (n, 2) q, X_minus along the edge, S_p points only
    objectives: np.ndarray  # (n, 2) F1, F2
    segments: list[tuple[int, int]]  # [start, stop) runs of consecutive lattice samples
    arc: np.ndarray | None = None  # top edge only: rows on the quasi-Pareto arc

    def polylines(self) -> list[np.ndarray]:
        return [self.objectives[a:b] for a, b in self.segments]


def _edge(name: str, q, x, T_p, alpha, beta) -> EdgeImage:
    q, x = np.broadcast_arrays(np.asarray(q, float), np.asarray(x, float))
    ev = evaluate_arrays(q, x, T_p, alpha, beta)
    keep = ev.stable
    pos = np.nonzero(keep)[0]
    segments = []
    if len(pos):
        breaks = np.nonzero(np.diff(pos) > 1)[0]
        starts = np.r_[0, breaks + 1]
        stops = np.r_[breaks + 1, len(pos)]
        segments = [(int(a), int(b)) for a, b in zip(starts, stops)]
    return EdgeImage(name, np.c_[q[keep], x[keep]], np.c_[ev.F1[keep], ev.F2[keep]], segments)


def edge_images(spec: LatticeSpec, T_p: float, alpha: float, beta: float,
                lattice_front: np.ndarray | None = None) -> tuple[dict[str, EdgeImage], dict[str, dict]]:
    """Images of the top (q = q_max), left and right edges, plus anchor points.

    The left edge X_minus = lower bound is excluded from the open box, so it
    is sampled one pitch inside. Anchors:

    * ``arc_start`` / ``arc_end``: ends of the quasi-Pareto arc, the part of
      the top-edge image that no lattice point or other top-edge point
      dominates (``arc_start`` has the smaller X_minus);
    * ``right_stability``: where stability sets in along the right edge.
    """
    qs, xs = spec.q_values, spec.xminus_values
    q_top, x_left, x_right = spec.q_range[1], xs[0], spec.xminus_range[1]
    edges = {
        "top": _edge("top", q_top, xs, T_p, alpha, beta),
        "left": _edge("left", qs, x_left, T_p, alpha, beta),
        "right": _edge("right", qs, x_right, T_p, alpha, beta),
    }
    anchors: dict[str, dict] = {}
    top = edges["top"]
    if len(top.objectives):
        pool = top.objectives
        if lattice_front is not None and len(lattice_front):
            pool = np.vstack([top.objectives, lattice_front])
        nd = pareto_filter(pool[:, 0], pool[:, 1])
        arc = np.sort(nd[nd < len(top.objectives)])
        if len(arc):
            for name, k in (("arc_start", arc[0]), ("arc_end", arc[-1])):
                anchors[name] = _anchor(top.params[k], top.objectives[k])
            top.arc = arc
    ev = evaluate_arrays(qs, x_right, T_p, alpha, beta)
    flips = np.nonzero(~ev.stable[:-1] & ev.stable[1:] & (ev.type[:-1] > 0))[0]
    if len(flips):
        i = flips[0]

        def stable(q, x):
            o = solve_arrays(q, x, T_p, alpha, beta)
            return (o.type > 0) & (np.abs(o.Df) < 1.0)

        pt = _bisect_edges(np.array([[qs[i + 1], x_right]]), np.array([[qs[i], x_right]]), stable)[0]
        e = evaluate_arrays(pt[0], pt[1], T_p, alpha, beta)
        anchors["right_stability"] = _anchor(pt, (float(e.F1), float(e.F2)))
    return edges, anchors


def _anchor(param, obj) -> dict:
    return {"q": float(param[0]), "xminus": float(param[1]),
            "f1": float(obj[0]), "f2": float(obj[1])}


# --- full scan ---------------------------------------------------------------

@dataclass
class ScanResult:
    spec: LatticeSpec
    fixed: dict[str, float]
    q_values: np.ndarray
    xminus_values: np.ndarray
    lattice: ObjectiveArrays
    pareto_index: np.ndarray  # flat indices into the lattice, in front order
    borders: dict[str, list[np.ndarray]]
    edges: dict[str, EdgeImage]
    anchors: dict[str, dict]
    runtime_s: float = 0.0
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def pareto_set(self) -> np.ndarray:
        i, j = np.unravel_index(self.pareto_index, self.lattice.type.shape)
        return np.c_[self.q_values[i], self.xminus_values[j]]

    @property
    def pareto_front(self) -> np.ndarray:
        return np.c_[self.lattice.F1.ravel()[self.pareto_index],
                     self.lattice.F2.ravel()[self.pareto_index]]

    @property
    def pareto_types(self) -> np.ndarray:
        return self.lattice.type.ravel()[self.pareto_index]


def lattice_pareto(lattice: ObjectiveArrays) -> np.ndarray:
    """Flat indices of non-dominated stable lattice points."""
    cand = np.flatnonzero(lattice.stable.ravel())
    f1 = lattice.F1.ravel()[cand]
    f2 = lattice.F2.ravel()[cand]
    return cand[pareto_filter(f1, f2, cand)]


def scan(spec: LatticeSpec | None = None, T_p: float = DEFAULT_TP, alpha: float = DEFAULT_ALPHA,
         beta: float = DEFAULT_BETA, threads: int = 1, *, with_borders: bool = True) -> ScanResult:
    """Evaluate every lattice point and extract the Pareto set, borders and edges."""
    spec = spec or LatticeSpec()
    t0 = time.perf_counter()
    qs, xs = spec.q_values, spec.xminus_values
    lat = evaluate_lattice(spec, T_p, alpha, beta, threads)
    pidx = lattice_pareto(lat)
    borders: dict[str, list[np.ndarray]] = {}
    edges: dict[str, EdgeImage] = {}
    anchors: dict[str, dict] = {}
    if with_borders:
        borders["type"] = border_type(qs, xs, lat, T_p, alpha, beta)
        borders["stability"] = border_stability(qs, xs, lat, T_p, alpha, beta)
        front = np.c_[lat.F1.ravel()[pidx], lat.F2.ravel()[pidx]]
        edges, anchors = edge_images(spec, T_p, alpha, beta, front)
    counts = {
        "points": int(lat.type.size),
        "feasible": int(lat.feasible.sum()),
        "stable": int(lat.stable.sum()),
        "type1": int((lat.type == 1).sum()),
        "type2": int((lat.type == 2).sum()),
        "pareto": int(len(pidx)),
    }
    return ScanResult(spec, {"T_p": T_p, "alpha": alpha, "beta": beta}, qs, xs, lat, pidx,
                      borders, edges, anchors, time.perf_counter() - t0, counts)
