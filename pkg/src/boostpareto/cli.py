"""Command-line entry point.

Exit codes: 0 success, 2 orbit/parameter errors, 3 validation failure,
64 usage errors.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .errors import BoostParetoError, DegenerateError, NoOrbitError, ParameterError
from .moea import EaConfig, nsga2
from .objectives import evaluate, evaluate_arrays
from .orbit import sample_orbit
from .oracle import draw_stable_points, validate_points
from .pareto import LatticeSpec, scan
from .pv_model import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    DEFAULT_TP,
    DimensionlessParams,
    PhysicalCircuit,
    load_config,
    to_dimensionless,
)

EXIT_ORBIT = 2
EXIT_VALIDATION = 3
EXIT_USAGE = 64
OUT_ENV = "BOOSTPARETO_OUT"
VALIDATION_TOL = 1e-6


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fixed(args) -> dict[str, float]:
    fixed = {"T_p": args.tp, "alpha": args.alpha, "beta": args.beta}
    if getattr(args, "config", None):
        cfg = load_config(args.config)
        if isinstance(cfg, PhysicalCircuit):
            cfg = to_dimensionless(cfg)
        fixed = {"T_p": cfg.T_p, "alpha": cfg.alpha, "beta": cfg.beta}
        if getattr(args, "q", None) is None:
            args.q = cfg.q
        if getattr(args, "xminus", None) is None:
            args.xminus = cfg.X_minus
    return fixed


def _outdir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV, "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _add_fixed(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tp", type=float, default=DEFAULT_TP, help="dimensionless clock period")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--beta", type=float, default=DEFAULT_BETA)
    p.add_argument("--config", help='JSON file with {"params": {...}} or {"circuit": {...}}')
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")


def cmd_orbit(args) -> int:
    fixed = _fixed(args)
    if args.q is None or args.xminus is None:
        raise ParameterError("--q and --xminus are required")
    p = DimensionlessParams(fixed["T_p"], fixed["alpha"], fixed["beta"], args.xminus, args.q)
    e = evaluate(p)
    o = e.orbit
    print(f"type      {o.type}")
    print(f"x_f       {o.x_f:.12g}")
    print(f"Df        {o.Df:.12g}")
    print(f"stable    {o.stable}")
    print(f"F1        {e.F1:.12g}")
    print(f"F2        {e.F2:.12g}")
    names = ("tau_a", "tau_b", "tau_c") if len(o.switching_times) == 3 else ("tau_d",)
    for name, t in zip(names, o.switching_times):
        print(f"{name:<9} {t:.12g}")
    out = _outdir(args)
    io.write_orbit_trace(out / "orbit_trace.csv", sample_orbit(o, args.samples))
    io.write_orbit_summary(out / "orbit_summary.csv", [o])
    return 0


def sweep_rows(xminus: float, qs: np.ndarray, fixed: dict[str, float]) -> list[list]:
    ev = evaluate_arrays(qs, xminus, fixed["T_p"], fixed["alpha"], fixed["beta"])
    return [
        [q, f1, f2, str(int(t)) if t else "", "1" if t else "0"]
        for q, f1, f2, t in zip(qs.tolist(), ev.F1.tolist(), ev.F2.tolist(), ev.type.tolist())
    ]


def cmd_sweep(args) -> int:
    fixed = _fixed(args)
    if not 0.0 < args.xminus < 1.0:
        raise ParameterError("--xminus must lie in (0, 1)")
    if args.qmax < args.qmin or args.step <= 0:
        raise ParameterError("need qmin <= qmax and step > 0")
    n = int(np.floor((args.qmax - args.qmin) / args.step + 1e-9)) + 1
    qs = np.round(args.qmin + np.arange(n) * args.step, 12)
    rows = sweep_rows(args.xminus, qs, fixed)
    out = _outdir(args)
    io.write_rows(out / "sweep.csv", "q,f1,f2,type,feasible", rows)
    print(f"wrote {len(rows)} rows to {out / 'sweep.csv'}")
    return 0


def write_scan(result, out: Path, threads: int) -> None:
    lat, qs, xs = result.lattice, result.q_values, result.xminus_values
    io.write_lattice(out / "lattice.csv", qs, xs, lat)
    io.write_rows(out / "pareto_set.csv", "q,xminus", result.pareto_set.tolist())
    io.write_rows(out / "pareto_front.csv", "f1,f2", result.pareto_front.tolist())
    border_rows = []
    for name, lines in result.borders.items():
        for k, line in enumerate(lines):
            label = name if len(lines) == 1 else f"{name}.{k}"
            border_rows.extend([label, q, x] for q, x in line.tolist())
    io.write_rows(out / "borders.csv", "border,q,xminus", border_rows)
    edge_rows = []
    for name, edge in result.edges.items():
        lines = edge.polylines()
        for k, line in enumerate(lines):
            label = name if len(lines) == 1 else f"{name}.{k}"
            edge_rows.extend([label, f1, f2] for f1, f2 in line.tolist())
    top = result.edges.get("top")
    if top is not None and top.arc is not None:
        edge_rows.extend(["quasi_front", f1, f2] for f1, f2 in top.objectives[top.arc].tolist())
    for name, a in result.anchors.items():
        edge_rows.append([f"anchor_{name}", a["f1"], a["f2"]])
    io.write_rows(out / "edges.csv", "edge,f1,f2", edge_rows)
    io.write_json(out / "meta.json", {
        "spec": result.spec.as_dict(),
        "fixed": result.fixed,
        "counts": result.counts,
        "anchors": result.anchors,
        "left_edge_xminus": float(xs[0]),
        "threads": threads,
        "runtime_s": result.runtime_s,
    })


def cmd_scan(args) -> int:
    fixed = _fixed(args)
    spec = LatticeSpec((args.qmin, args.qmax), (args.xmin, args.xmax), args.step, args.step)
    result = scan(spec, fixed["T_p"], fixed["alpha"], fixed["beta"], threads=args.threads)
    out = _outdir(args)
    write_scan(result, out, args.threads)
    c = result.counts
    print(f"{c['points']} points, {c['feasible']} with an orbit, {c['stable']} stable, "
          f"{c['pareto']} Pareto-optimal ({result.runtime_s:.2f} s)")
    return 0


def cmd_ea(args) -> int:
    fixed = _fixed(args)
    cfg = EaConfig(pop_size=args.pop, generations=args.gens, seed=args.seed, **fixed)
    exact = io.read_front(Path(args.exact_front)) if args.exact_front else None
    run = nsga2(cfg, exact, threads=args.threads)
    out = _outdir(args)
    idx = run.front_index
    io.write_rows(out / "ea_front.csv", "f1,f2,q,xminus",
                  np.c_[run.objectives[idx], run.params[idx]].tolist())
    io.write_rows(out / "indicators.csv", "gen,igd,hv,evals",
                  ([str(g + 1), i, h, str(int(e))] for g, (i, h, e)
                   in enumerate(zip(run.igd.tolist(), run.hv.tolist(), run.evals.tolist()))))
    io.write_json(out / "meta.json", {
        "config": cfg.as_dict(),
        "exact_front": args.exact_front,
        "evaluations": run.evaluations,
        "final_igd": None if np.isnan(run.igd[-1]) else float(run.igd[-1]),
        "final_hv": float(run.hv[-1]),
        "threads": args.threads,
        "runtime_s": run.wall_time_s,
    })
    igd_txt = "n/a" if np.isnan(run.igd[-1]) else f"{run.igd[-1]:.3e}"
    print(f"{len(idx)} non-dominated, IGD {igd_txt}, HV {run.hv[-1]:.6f}, "
          f"{run.evaluations} evaluations ({run.wall_time_s:.2f} s)")
    return 0


def cmd_validate(args) -> int:
    fixed = _fixed(args)
    if (args.q is None) != (args.xminus is None):
        raise ParameterError("--q and --xminus go together")
    if args.q is not None:
        points = [DimensionlessParams(fixed["T_p"], fixed["alpha"], fixed["beta"], args.xminus, args.q)]
    else:
        points = draw_stable_points(args.n, args.seed, **fixed)
    t0 = time.perf_counter()
    records = validate_points(points, method=args.method)
    worst = max(r["abs_err"] for r in records)
    failed = [r for r in records if not r["abs_err"] <= VALIDATION_TOL]
    out = _outdir(args)
    io.write_json(out / "validation.json", records)
    print(f"{len(points)} points, {len(records)} comparisons, max |err| {worst:.3e}, "
          f"{len(failed)} above {VALIDATION_TOL:g} ({time.perf_counter() - t0:.2f} s)")
    return EXIT_VALIDATION if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="boostpareto", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("orbit", help="solve one periodic orbit and write its trace")
    p.add_argument("--q", type=float)
    p.add_argument("--xminus", type=float)
    p.add_argument("--samples", type=int, default=1001)
    _add_fixed(p)
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("sweep", help="objectives along q at fixed X_minus")
    p.add_argument("--xminus", type=float, required=True)
    p.add_argument("--qmin", type=float, default=1.001)
    p.add_argument("--qmax", type=float, default=3.999)
    p.add_argument("--step", type=float, default=1e-3)
    _add_fixed(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("scan", help="exact lattice scan and Pareto extraction")
    p.add_argument("--qmin", type=float, default=1.0)
    p.add_argument("--qmax", type=float, default=4.0)
    p.add_argument("--xmin", type=float, default=0.0)
    p.add_argument("--xmax", type=float, default=0.9)
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--threads", type=int, default=1)
    _add_fixed(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("ea", help="NSGA-II approximation of the front")
    p.add_argument("--pop", type=int, default=100)
    p.add_argument("--gens", type=int, default=200)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--exact-front", help="pareto_front.csv from a scan run")
    p.add_argument("--threads", type=int, default=1)
    _add_fixed(p)
    p.set_defaults(func=cmd_ea)

    p = sub.add_parser("validate", help="cross-check closed forms against simulation")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--q", type=float, help="validate this single point instead of random draws")
    p.add_argument("--xminus", type=float)
    p.add_argument("--method", choices=("exact", "adaptive"), default="exact")
    _add_fixed(p)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "validate" and args.n < 1:
        parser.error("--n must be at least 1")
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.func(args)
    except (NoOrbitError, DegenerateError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORBIT
    except BoostParetoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ORBIT


if __name__ == "__main__":
    sys.exit(main())
