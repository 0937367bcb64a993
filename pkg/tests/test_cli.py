import csv
import json

import numpy as np
import pytest

from boostpareto import cli, io
from boostpareto.objectives import evaluate
from boostpareto.pv_model import DimensionlessParams


def run(*argv):
    return cli.main([str(a) for a in argv])


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_orbit_outputs(tmp_path, capsys):
    assert run("orbit", "--q", 1.66, "--xminus", 0.726, "--samples", 11, "--out", tmp_path) == 0
    out = capsys.readouterr().out
    assert "Type1" in out and "tau_c" in out
    trace = rows(tmp_path / "orbit_trace.csv")
    assert len(trace) == 11 and list(trace[0]) == ["tau", "x", "y", "p"]
    summary = rows(tmp_path / "orbit_summary.csv")[0]
    assert summary["type"] == "1" and summary["stable"] == "1"
    assert abs(float(summary["df"])) == pytest.approx(0.658, abs=1e-3)


def test_orbit_from_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"params": {"T_p": 1, "alpha": 0.875, "beta": 3.5,
                                          "X_minus": 0.2, "q": 3.2}}))
    assert run("orbit", "--config", cfg, "--out", tmp_path) == 0
    assert rows(tmp_path / "orbit_summary.csv")[0]["type"] == "2"


def test_out_directory_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "env"))
    assert run("orbit", "--q", 3.2, "--xminus", 0.492) == 0
    assert (tmp_path / "env" / "orbit_trace.csv").exists()


@pytest.mark.parametrize("argv", [
    ["orbit", "--q", "1.05", "--xminus", "0.05"],
    ["orbit", "--q", "0.5", "--xminus", "0.5"],
    ["orbit", "--q", "2.0", "--xminus", "1.5"],
    ["orbit", "--q", "2.0"],
])
def test_orbit_errors_exit_2(tmp_path, argv):
    assert cli.main(argv + ["--out", str(tmp_path)]) == cli.EXIT_ORBIT


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["sweep"],
    ["validate", "--n", "0"],
    ["scan", "--threads", "0"],
    ["orbit", "--q", "abc"],
])
def test_usage_errors_exit_64(argv):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == cli.EXIT_USAGE


def test_sweep_single_point_matches_orbit(tmp_path):
    assert run("sweep", "--xminus", 0.726, "--qmin", 1.66, "--qmax", 1.66, "--out", tmp_path) == 0
    (row,) = rows(tmp_path / "sweep.csv")
    e = evaluate(DimensionlessParams.defaults(1.66, 0.726))
    assert float(row["f1"]) == e.F1 and float(row["f2"]) == e.F2
    assert row["type"] == "1" and row["feasible"] == "1"


def test_sweep_inclusive_range(tmp_path):
    assert run("sweep", "--xminus", 0.2, "--qmin", 1.0, "--qmax", 2.0, "--step", 0.1,
               "--out", tmp_path) == 0
    qs = [float(r["q"]) for r in rows(tmp_path / "sweep.csv")]
    assert len(qs) == 11 and qs[0] == 1.0 and qs[-1] == 2.0
    assert rows(tmp_path / "sweep.csv")[0]["feasible"] == "0"


def test_scan_then_ea(tmp_path):
    scan_dir, ea_dir = tmp_path / "scan", tmp_path / "ea"
    assert run("scan", "--step", 0.01, "--out", scan_dir) == 0
    for name in ("lattice.csv", "pareto_set.csv", "pareto_front.csv", "borders.csv",
                 "edges.csv", "meta.json"):
        assert (scan_dir / name).exists()
    lat = io.read_lattice(scan_dir / "lattice.csv")
    meta = json.loads((scan_dir / "meta.json").read_text())
    assert len(lat["q"]) == meta["counts"]["points"]
    assert int(lat["feasible"].sum()) == meta["counts"]["feasible"]
    front = io.read_front(scan_dir / "pareto_front.csv")
    assert len(front) == meta["counts"]["pareto"]
    labels = {r["border"] for r in rows(scan_dir / "borders.csv")}
    assert labels == {"type", "stability"}
    edges = {r["edge"] for r in rows(scan_dir / "edges.csv")}
    assert {"top", "left", "right", "quasi_front", "anchor_arc_start"} <= edges

    assert run("ea", "--pop", 20, "--gens", 5, "--exact-front", scan_dir / "pareto_front.csv",
               "--out", ea_dir) == 0
    ind = rows(ea_dir / "indicators.csv")
    assert len(ind) == 5 and ind[-1]["evals"] == "120"
    assert all(float(r["igd"]) > 0 for r in ind)
    ea_front = rows(ea_dir / "ea_front.csv")
    assert list(ea_front[0]) == ["f1", "f2", "q", "xminus"]


def test_lattice_round_trip(tmp_path):
    from boostpareto.pareto import LatticeSpec, scan

    r = scan(LatticeSpec((1.0, 4.0), (0.0, 0.9), 0.05, 0.05), with_borders=False)
    io.write_lattice(tmp_path / "l.csv", r.q_values, r.xminus_values, r.lattice)
    lat = io.read_lattice(tmp_path / "l.csv")
    np.testing.assert_array_equal(lat["f1"], r.lattice.F1.ravel())
    np.testing.assert_array_equal(lat["df"], r.lattice.Df.ravel())
    np.testing.assert_array_equal(lat["type"], r.lattice.type.ravel())


def test_validate_passes(tmp_path):
    assert run("validate", "--n", 5, "--seed", 2, "--out", tmp_path) == 0
    recs = json.loads((tmp_path / "validation.json").read_text())
    assert len(recs) == 15
    assert max(r["abs_err"] for r in recs) < cli.VALIDATION_TOL


def test_validate_single_point_adaptive(tmp_path):
    assert run("validate", "--q", 3.2, "--xminus", 0.2, "--method", "adaptive",
               "--out", tmp_path) == 0


def test_validate_reports_failure(tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "VALIDATION_TOL", 0.0)
    assert run("validate", "--n", 2, "--out", tmp_path) == cli.EXIT_VALIDATION
