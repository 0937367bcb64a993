"""NSGA-II over the (q, X_minus) box, scored against the exact lattice front.

Individuals without a stable period-T_p orbit are infeasible and share one
rank behind every feasible individual. The random stream is a single
``numpy.random.Generator`` consumed in a fixed order, and evaluation draws
no randomness, so runs are reproducible from the seed alone.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import ConfigError, EmptyFrontError, RefPointError
from .objectives import evaluate_arrays
from .pareto import dominates, pareto_filter
from .pv_model import DEFAULT_ALPHA, DEFAULT_BETA, DEFAULT_TP


@dataclass(frozen=True)
class EaConfig:
    pop_size: int = 100
    generations: int = 200
    eta_c: float = 15.0
    p_crossover: float = 0.9
    eta_m: float = 20.0
    p_mutation: float = 0.5  # per variable
    seed: int = 1
    q_range: tuple[float, float] = (1.0, 4.0)
    xminus_range: tuple[float, float] = (0.0, 0.9)
    T_p: float = DEFAULT_TP
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA

    def validate(self) -> None:
        if self.pop_size < 4 or self.pop_size % 2:
            raise ConfigError(f"population size must be even and >= 4, got {self.pop_size}")
        if self.generations < 1:
            raise ConfigError("need at least one generation")
        for name in ("p_crossover", "p_mutation"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        if self.eta_c < 0 or self.eta_m < 0:
            raise ConfigError("distribution indices must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if not (self.q_range[0] < self.q_range[1] and self.xminus_range[0] < self.xminus_range[1]):
            raise ConfigError("empty search box")

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.q_range[0], self.xminus_range[0]])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.q_range[1], self.xminus_range[1]])

    def as_dict(self) -> dict:
        d = asdict(self)
        d["q_range"] = list(self.q_range)
        d["xminus_range"] = list(self.xminus_range)
        return d


@dataclass
class EaRun:
    config: EaConfig
    params: np.ndarray  # final population (n, 2): q, X_minus
    objectives: np.ndarray  # (n, 2) F1, F2; NaN where infeasible
    feasible: np.ndarray
    ranks: np.ndarray
    igd: np.ndarray  # one entry per generation, NaN when no exact front was given
    hv: np.ndarray
    evals: np.ndarray  # cumulative evaluation count after each generation
    evaluations: int
    wall_time_s: float = 0.0
    gen_fronts: list[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def front_index(self) -> np.ndarray:
        """Final non-dominated feasible individuals, in front order."""
        idx = np.flatnonzero(self.feasible)
        return idx[pareto_filter(self.objectives[idx, 0], self.objectives[idx, 1], idx)]

    @property
    def front(self) -> np.ndarray:
        return self.objectives[self.front_index]


# --- indicators ---------------------------------------------------------------

def igd(approx, exact) -> float:
    """Mean distance from each exact-front point to its nearest approximation point."""
    approx = np.asarray(approx, dtype=float).reshape(-1, 2)
    exact = np.asarray(exact, dtype=float).reshape(-1, 2)
    if len(approx) == 0 or len(exact) == 0:
        raise EmptyFrontError("IGD needs two non-empty fronts")
    dist, _ = cKDTree(approx).query(exact)
    return float(np.mean(dist))


def hypervolume(front, ref=(0.0, 0.0)) -> float:
    """Area dominated by ``front`` and bounded below by ``ref`` (maximization)."""
    pts = np.asarray(front, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return 0.0
    for pt in pts:
        if not dominates(pt, ref):
            raise RefPointError(f"point {tuple(pt)} does not dominate reference {tuple(ref)}")
    nd = pts[pareto_filter(pts[:, 0], pts[:, 1])]
    # front order is F1 ascending / F2 descending; sweep from the largest F1
    area, height = 0.0, ref[1]
    for f1, f2 in nd[::-1]:
        if f2 > height:
            area += (f1 - ref[0]) * (f2 - height)
            height = f2
    return area


# --- NSGA-II building blocks --------------------------------------------------

def domination_matrix(F: np.ndarray) -> np.ndarray:
    """``D[i, j]`` is True when row i dominates row j."""
    a1, a2 = F[:, None, 0], F[:, None, 1]
    b1, b2 = F[None, :, 0], F[None, :, 1]
    return ((a1 > b1) & (a2 >= b2)) | ((a1 >= b1) & (a2 > b2))


def fast_non_dominated_sort(F: np.ndarray, feasible: np.ndarray | None = None) -> np.ndarray:
    """1-based front ranks; infeasible rows share the rank after the last front."""
    n = len(F)
    feasible = np.ones(n, dtype=bool) if feasible is None else np.asarray(feasible, bool)
    ranks = np.zeros(n, dtype=int)
    idx = np.flatnonzero(feasible)
    if len(idx):
        D = domination_matrix(F[idx])
        count = D.sum(axis=0)
        current = np.flatnonzero(count == 0)
        r = 1
        while len(current):
            ranks[idx[current]] = r
            count = count - D[current].sum(axis=0)
            count[current] = -1
            current = np.flatnonzero(count == 0)
            r += 1
    last = ranks.max() if len(idx) else 0
    ranks[~feasible] = last + 1
    return ranks


def crowding_distance(F: np.ndarray) -> np.ndarray:
    n = len(F)
    d = np.zeros(n)
    if n <= 2:
        d[:] = np.inf
        return d
    for m in range(F.shape[1]):
        order = np.argsort(F[:, m], kind="stable")
        fs = F[order, m]
        d[order[0]] = d[order[-1]] = np.inf
        span = fs[-1] - fs[0]
        if span > 0:
            d[order[1:-1]] += (fs[2:] - fs[:-2]) / span
    return d


def _crowding_all(F: np.ndarray, ranks: np.ndarray, feasible: np.ndarray) -> np.ndarray:
    crowd = np.zeros(len(F))
    for r in np.unique(ranks[feasible]):
        members = np.flatnonzero((ranks == r) & feasible)
        crowd[members] = crowding_distance(F[members])
    return crowd


def _tournament(rng, ranks, crowd, n) -> np.ndarray:
    a = rng.integers(0, len(ranks), n)
    b = rng.integers(0, len(ranks), n)
    a_wins = (ranks[a] < ranks[b]) | ((ranks[a] == ranks[b]) & (crowd[a] >= crowd[b]))
    return np.where(a_wins, a, b)


def sbx(rng, p1: np.ndarray, p2: np.ndarray, lo, hi, eta: float, prob: float):
    """Bounded simulated-binary crossover on parent rows."""
    n, nv = p1.shape
    c1, c2 = p1.copy(), p2.copy()
    do_pair = rng.random(n) <= prob
    u_var = rng.random((n, nv))
    u = rng.random((n, nv))
    swap = rng.random((n, nv)) <= 0.5
    for i in range(n):
        if not do_pair[i]:
            continue
        for j in range(nv):
            x1, x2 = p1[i, j], p2[i, j]
            if u_var[i, j] > 0.5 or abs(x1 - x2) <= 1e-14:
                continue
            y1, y2 = min(x1, x2), max(x1, x2)
            yl, yu = lo[j], hi[j]
            rand = u[i, j]
            beta = 1.0 + 2.0 * (y1 - yl) / (y2 - y1)
            alpha = 2.0 - beta ** -(eta + 1.0)
            betaq = ((rand * alpha) ** (1.0 / (eta + 1.0)) if rand <= 1.0 / alpha
                     else (1.0 / (2.0 - rand * alpha)) ** (1.0 / (eta + 1.0)))
            a = 0.5 * ((y1 + y2) - betaq * (y2 - y1))
            beta = 1.0 + 2.0 * (yu - y2) / (y2 - y1)
            alpha = 2.0 - beta ** -(eta + 1.0)
            betaq = ((rand * alpha) ** (1.0 / (eta + 1.0)) if rand <= 1.0 / alpha
                     else (1.0 / (2.0 - rand * alpha)) ** (1.0 / (eta + 1.0)))
            b = 0.5 * ((y1 + y2) + betaq * (y2 - y1))
            a, b = min(max(a, yl), yu), min(max(b, yl), yu)
            if swap[i, j]:
                a, b = b, a
            c1[i, j], c2[i, j] = a, b
    return c1, c2


def polynomial_mutation(rng, X: np.ndarray, lo, hi, eta: float, prob: float) -> np.ndarray:
    X = X.copy()
    mask = rng.random(X.shape) <= prob
    u = rng.random(X.shape)
    span = hi - lo
    d1 = (X - lo) / span
    d2 = (hi - X) / span
    power = 1.0 / (eta + 1.0)
    low = u < 0.5
    xy_low = 1.0 - d1
    xy_high = 1.0 - d2
    val_low = 2.0 * u + (1.0 - 2.0 * u) * xy_low ** (eta + 1.0)
    val_high = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * xy_high ** (eta + 1.0)
    deltaq = np.where(low, val_low ** power - 1.0, 1.0 - val_high ** power)
    X = np.where(mask, X + deltaq * span, X)
    return np.clip(X, lo, hi)


def _evaluate(cfg: EaConfig, X: np.ndarray, threads: int):
    def run(chunk):
        return evaluate_arrays(chunk[:, 0], chunk[:, 1], cfg.T_p, cfg.alpha, cfg.beta)

    if threads > 1 and len(X) > 1:
        chunks = np.array_split(X, threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, chunks))
        F1 = np.concatenate([p.F1 for p in parts])
        F2 = np.concatenate([p.F2 for p in parts])
        stable = np.concatenate([p.stable for p in parts])
    else:
        ev = run(X)
        F1, F2, stable = ev.F1, ev.F2, ev.stable
    lo, hi = cfg.lower, cfg.upper
    inside = np.all((X > lo) & (X < hi), axis=1)
    feasible = stable & inside
    F = np.c_[F1, F2]
    F[~feasible] = np.nan
    return F, feasible


def _survivors(F, feasible, n_keep):
    ranks = fast_non_dominated_sort(F, feasible)
    crowd = _crowding_all(F, ranks, feasible)
    order = np.lexsort((-crowd, ranks))
    return order[:n_keep]


def nsga2(cfg: EaConfig | None = None, exact_front: np.ndarray | None = None,
          threads: int = 1) -> EaRun:
    """Run NSGA-II; indicators against ``exact_front`` are NaN when it is None."""
    cfg = cfg or EaConfig()
    cfg.validate()
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    lo, hi = cfg.lower, cfg.upper
    N = cfg.pop_size

    X = lo + rng.random((N, 2)) * (hi - lo)
    F, feas = _evaluate(cfg, X, threads)
    evals = N
    igd_trace, hv_trace, eval_trace, fronts = [], [], [], []
    ranks = fast_non_dominated_sort(F, feas)
    crowd = _crowding_all(F, ranks, feas)

    for _ in range(cfg.generations):
        parents = _tournament(rng, ranks, crowd, N)
        p1, p2 = X[parents[0::2]], X[parents[1::2]]
        c1, c2 = sbx(rng, p1, p2, lo, hi, cfg.eta_c, cfg.p_crossover)
        children = np.empty((N, 2))
        children[0::2], children[1::2] = c1, c2
        children = polynomial_mutation(rng, children, lo, hi, cfg.eta_m, cfg.p_mutation)
        Fc, feas_c = _evaluate(cfg, children, threads)
        evals += N

        X_all = np.vstack([X, children])
        F_all = np.vstack([F, Fc])
        feas_all = np.concatenate([feas, feas_c])
        keep = _survivors(F_all, feas_all, N)
        X, F, feas = X_all[keep], F_all[keep], feas_all[keep]
        ranks = fast_non_dominated_sort(F, feas)
        crowd = _crowding_all(F, ranks, feas)

        best = F[(ranks == 1) & feas]
        fronts.append(best)
        in_box = best[(best[:, 0] > 0) & (best[:, 1] > 0)]
        hv_trace.append(hypervolume(in_box))
        if exact_front is not None and len(best):
            igd_trace.append(igd(best, exact_front))
        else:
            igd_trace.append(np.nan)
        eval_trace.append(evals)

    return EaRun(
        config=cfg,
        params=X,
        objectives=F,
        feasible=feas,
        ranks=ranks,
        igd=np.array(igd_trace),
        hv=np.array(hv_trace),
        evals=np.array(eval_trace),
        evaluations=evals,
        wall_time_s=time.perf_counter() - t0,
        gen_fronts=fronts,
    )
