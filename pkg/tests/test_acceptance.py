"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line (printed in the terminal summary under
"acceptance criteria") and then asserts. Tolerances are fixed here.
"""

import filecmp
import json
import time

import numpy as np
import pytest
from scipy.spatial import cKDTree

from boostpareto import cli, io
from boostpareto.moea import EaConfig, fast_non_dominated_sort, nsga2
from boostpareto.objectives import evaluate, evaluate_arrays
from boostpareto.oracle import draw_stable_points, validate_points
from boostpareto.orbit import OrbitType
from boostpareto.pareto import (
    LatticeSpec,
    dominates,
    pareto_filter,
    pareto_filter_bruteforce,
    scan,
)
from boostpareto.pv_model import DimensionlessParams
from conftest import POINT_A, POINT_B, POINT_C
from test_moea import bruteforce_ranks

GOLDEN_TOL = 1e-3
ORACLE_TOL = 1e-6
IGD_TARGET = 2e-3
REFINE_WINDOW = LatticeSpec((1.60, 1.75), (0.69, 0.76), 1e-4, 1e-4)

# (q, X_minus) -> (type, |Df|, average power), published to three decimals
GOLDEN = [
    (POINT_A, OrbitType.TYPE1, 0.658, 0.937),
    (POINT_B, OrbitType.TYPE1, 0.147, 0.842),
    (POINT_C, OrbitType.TYPE2, 0.528, 0.761),
]


def test_golden_orbit_values(criterion):
    t0 = time.perf_counter()
    misses = []
    for (q, x), kind, df, power in GOLDEN:
        e = evaluate(DimensionlessParams.defaults(q, x))
        got = (e.orbit_type, abs(e.orbit.Df), e.F2)
        if (got[0] is not kind or abs(got[1] - df) > GOLDEN_TOL
                or abs(got[2] - power) > GOLDEN_TOL):
            misses.append(f"({q},{x}): want {kind} |Df|={df} P={power}, "
                          f"got {got[0]} |Df|={got[1]:.4f} P={got[2]:.4f}")
    ms = 1e3 * (time.perf_counter() - t0)
    detail = "; ".join(misses) if misses else f"3/3 within {GOLDEN_TOL:g} ({ms:.1f} ms)"
    assert criterion("golden orbit values", not misses, detail), detail


def test_oracle_equivalence(criterion):
    t0 = time.perf_counter()
    records = validate_points(draw_stable_points(100, 1))
    elapsed = time.perf_counter() - t0
    worst = max(r["abs_err"] for r in records)
    ok = worst <= ORACLE_TOL and elapsed < 10.0
    detail = f"max |err| {worst:.2e} over {len(records)} comparisons in {elapsed:.2f} s"
    assert criterion("oracle equivalence", ok, detail), detail


def test_exact_scan(criterion, full_scan):
    r = full_scan
    ps = r.pareto_set
    all_type1 = bool(np.all(r.pareto_types == 1))
    tree = cKDTree(ps)
    near = [tree.query(pt, p=np.inf)[0] <= r.spec.step_q + 1e-12 for pt in (POINT_A, POINT_B)]
    ok = len(ps) > 0 and all_type1 and all(near) and r.runtime_s < 60.0
    detail = (f"{len(ps)} Pareto points, all Type 1: {all_type1}, "
              f"points A/B within one cell: {near}, {r.runtime_s:.2f} s")
    assert criterion("exact scan reproduction", ok, detail), detail


def test_refinement_consistency(criterion, full_scan):
    (q0, q1), (x0, x1) = REFINE_WINDOW.q_range, REFINE_WINDOW.xminus_range
    ps, pf = full_scan.pareto_set, full_scan.pareto_front
    m = (ps[:, 0] > q0) & (ps[:, 0] < q1) & (ps[:, 1] > x0) & (ps[:, 1] < x1)
    fine = scan(REFINE_WINDOW, threads=4, with_borders=False)
    dist, _ = cKDTree(fine.pareto_front).query(pf[m])
    # objective-space extent of one coarse cell around each coarse point
    h = full_scan.spec.step_q
    cell = np.zeros(m.sum())
    for dq in (-h, 0.0, h):
        for dx in (-h, 0.0, h):
            e = evaluate_arrays(ps[m, 0] + dq, ps[m, 1] + dx, 1.0, 0.875, 3.5)
            cell = np.maximum(cell, np.hypot(e.F1 - pf[m, 0], e.F2 - pf[m, 1]))
    ok = m.sum() > 0 and bool(np.all(dist <= cell))
    detail = (f"{m.sum()} coarse points vs {len(fine.pareto_front)} fine, "
              f"max dist {dist.max():.2e}, smallest cell {cell.min():.2e}")
    assert criterion("refinement consistency", ok, detail), detail


def _tradeoff_steps(xminus):
    qs = np.round(np.arange(1, 3000) * 1e-3 + 1.0, 12)
    e = evaluate_arrays(qs, xminus, 1.0, 0.875, 3.5)
    s = e.stable
    both = s[:-1] & s[1:]
    return int(np.sum(both & (np.diff(e.F1) > 0) & (np.diff(e.F2) < 0)))


def test_sweep_tradeoffs(criterion):
    steps = {x: _tradeoff_steps(x) for x in (0.9, 0.438, 0.2)}
    ok = steps[0.9] > 0 and steps[0.438] > 0 and steps[0.2] == 0
    detail = "trade-off steps per X_minus " + ", ".join(f"{k}: {v}" for k, v in steps.items())
    assert criterion("sweep trade-off checks", ok, detail), detail


def test_property_suites(criterion, full_scan):
    rng = np.random.default_rng(2024)
    # strict partial order on 10^4 triples drawn from a coarse grid so ties occur
    tri = rng.integers(0, 4, size=(10_000, 3, 2)) / 4
    order_ok = True
    for u, v, w in tri:
        if dominates(u, u) or (dominates(u, v) and dominates(v, u)):
            order_ok = False
        if dominates(u, v) and dominates(v, w) and not dominates(u, w):
            order_ok = False
    filter_ok = True
    for _ in range(100):
        f = np.round(rng.random((1000, 2)), 2)
        if pareto_filter(*f.T).tolist() != pareto_filter_bruteforce(*f.T).tolist():
            filter_ok = False
    f = rng.random((1000, 2))
    base = set(pareto_filter(*f.T).tolist())
    transforms = [
        lambda a, k=k: np.exp(k * a) if k % 2 else a**3 * (k + 1) + k for k in range(20)
    ]
    invariance_ok = all(
        set(pareto_filter(t(f[:, 0]), transforms[-1 - i](f[:, 1])).tolist()) == base
        for i, t in enumerate(transforms)
    )
    lat = full_scan.lattice
    feas = lat.feasible
    bounded = bool(np.all(lat.F1[feas] < 1.0) and np.all(lat.F2[feas] < 1.0))
    ok = order_ok and filter_ok and invariance_ok and bounded
    detail = (f"order laws {order_ok}, filter = brute force {filter_ok}, "
              f"transform invariance {invariance_ok}, F1,F2 < 1 on {int(feas.sum())} points {bounded}")
    assert criterion("property suites", ok, detail), detail


def test_ea_quality(criterion, full_scan):
    run = nsga2(EaConfig(pop_size=100, generations=200, seed=1), full_scan.pareto_front)
    final = float(run.igd[-1])
    rng = np.random.default_rng(7)
    sort_ok = True
    for _ in range(50):
        F = rng.integers(0, 10, size=(100, 2)).astype(float)
        if fast_non_dominated_sort(F).tolist() != bruteforce_ranks(F).tolist():
            sort_ok = False
    ok = final <= IGD_TARGET and sort_ok
    detail = f"IGD {final:.3e} (target {IGD_TARGET:g}), sort = brute force on 50 sets {sort_ok}"
    assert criterion("EA quality", ok, detail), detail


def _same_outputs(a, b, names):
    for name in names:
        if name == "meta.json":
            ja, jb = (json.loads((d / name).read_text()) for d in (a, b))
            for j in (ja, jb):
                j.pop("runtime_s", None)
                j.pop("threads", None)
            if ja != jb:
                return False
        elif not filecmp.cmp(a / name, b / name, shallow=False):
            return False
    return True


@pytest.mark.slow
def test_determinism(criterion, tmp_path):
    scan_names = ["lattice.csv", "pareto_set.csv", "pareto_front.csv", "borders.csv",
                  "edges.csv", "meta.json"]
    ea_names = ["ea_front.csv", "indicators.csv", "meta.json"]
    for threads in (1, 4):
        assert cli.main(["scan", "--threads", str(threads), "--out", str(tmp_path / f"s{threads}")]) == 0
    front = tmp_path / "s1" / "pareto_front.csv"
    for threads in (1, 4):
        assert cli.main(["ea", "--seed", "1", "--threads", str(threads), "--exact-front", str(front),
                         "--out", str(tmp_path / f"e{threads}")]) == 0
    scan_ok = _same_outputs(tmp_path / "s1", tmp_path / "s4", scan_names)
    ea_ok = _same_outputs(tmp_path / "e1", tmp_path / "e4", ea_names)
    # the lattice file round-trips exactly
    lat = io.read_lattice(tmp_path / "s1" / "lattice.csv")
    ok = scan_ok and ea_ok and len(lat["q"]) == 2999 * 899
    detail = f"scan identical across 1/4 threads {scan_ok}, ea identical {ea_ok}"
    assert criterion("determinism", ok, detail), detail
