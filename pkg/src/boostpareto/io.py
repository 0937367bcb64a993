"""CSV/JSON readers and writers for every exported artifact.

Floats are written in shortest round-trip form, so reading a file back
reproduces the exact binary values; undefined values are empty fields.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .objectives import ObjectiveArrays
from .orbit import PeriodicOrbit

LATTICE_HEADER = "q,xminus,type,df,f1,f2,feasible"


def fmt(v) -> str:
    if v is None:
        return ""
    v = float(v)
    return "" if np.isnan(v) else repr(v)


def write_rows(path: Path, header: str, rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(c if isinstance(c, str) else fmt(c) for c in row) + "\n")


def write_json(path: Path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _col(a: np.ndarray) -> list[str]:
    return [("" if x != x else repr(x)) for x in a.tolist()]


def write_lattice(path: Path, qs: np.ndarray, xs: np.ndarray, lat: ObjectiveArrays) -> None:
    """One row per lattice point, q-major order."""
    xs_s = _col(xs)
    with open(path, "w", newline="") as fh:
        fh.write(LATTICE_HEADER + "\n")
        for i, q in enumerate(qs.tolist()):
            qs_ = repr(q)
            t = lat.type[i]
            types = np.where(t > 0, t.astype(str), "").tolist()
            df, f1, f2 = _col(lat.Df[i]), _col(lat.F1[i]), _col(lat.F2[i])
            feas = np.where(t > 0, "1", "0").tolist()
            fh.write("".join(
                f"{qs_},{xs_s[j]},{types[j]},{df[j]},{f1[j]},{f2[j]},{feas[j]}\n"
                for j in range(len(xs_s))
            ))


def read_lattice(path: Path) -> dict[str, np.ndarray]:
    """Columns of a lattice/objective-sweep CSV; empty fields become NaN / type 0."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if ",".join(header) != LATTICE_HEADER:
            raise ValueError(f"unexpected header {header}")
        cols = list(zip(*reader)) or [()] * len(header)
    flt = lambda c: np.array([float(v) if v else np.nan for v in c])  # noqa: E731
    return {
        "q": flt(cols[0]),
        "xminus": flt(cols[1]),
        "type": np.array([int(v) if v else 0 for v in cols[2]], dtype=np.int8),
        "df": flt(cols[3]),
        "f1": flt(cols[4]),
        "f2": flt(cols[5]),
        "feasible": np.array([v == "1" for v in cols[6]]),
    }


def read_front(path: Path) -> np.ndarray:
    """(n, 2) array from a CSV whose first two columns are f1, f2."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["f1", "f2"]:
            raise ValueError(f"expected f1,f2 columns, got {header}")
        rows = [(float(r[0]), float(r[1])) for r in reader if r]
    return np.array(rows, dtype=float).reshape(-1, 2)


def write_orbit_trace(path: Path, samples: np.ndarray) -> None:
    write_rows(path, "tau,x,y,p", samples.tolist())


def orbit_summary_row(o: PeriodicOrbit) -> list:
    return [o.params.q, o.params.X_minus, str(int(o.type)), o.x_f, o.Df, "1" if o.stable else "0"]


def write_orbit_summary(path: Path, orbits: Iterable[PeriodicOrbit]) -> None:
    write_rows(path, "q,xminus,type,xf,df,stable", (orbit_summary_row(o) for o in orbits))


def write_sim_trace(path: Path, tau: np.ndarray, x: np.ndarray, state: np.ndarray) -> None:
    write_rows(path, "tau,x,state", ([t, v, str(int(s))] for t, v, s in zip(tau.tolist(), x.tolist(), state)))
