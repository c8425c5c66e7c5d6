"""File output: diagnostics CSV time series and legacy-VTK snapshots.

The CSV layout is fixed (one row per report, 17 significant digits, LF
line endings) so repeated runs of the same configuration are comparable
byte for byte.  Snapshots use the legacy VTK structured-points ASCII
format with cell data for the scalars and vertex-interpolated velocity
as point data.
"""

from __future__ import annotations

import csv
import io
from typing import Iterable

import numpy as np

from . import operators as ops
from .diagnostics import StepReport, divergence_field
from .schemes import State

__all__ = ["CSV_COLUMNS", "format_report", "write_timeseries",
           "read_timeseries", "write_snapshot"]

CSV_COLUMNS = ("time", "mass_rho", "mass_rhoc", "energy", "energy_delta",
               "max_div", "cycles", "metric")


def _fmt(x) -> str:
    return "%.17g" % x


def format_report(r: StepReport) -> str:
    vals = [_fmt(r.time), _fmt(r.mass_rho), _fmt(r.mass_rhoc),
            _fmt(r.energy), _fmt(r.energy_delta), _fmt(r.max_div),
            str(r.cycles), "" if r.metric is None else _fmt(r.metric)]
    return ",".join(vals)


def write_timeseries(reports: Iterable[StepReport], path: str) -> None:
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for r in reports:
                fh.write(format_report(r) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write time series {path}: {exc}") from exc


def read_timeseries(path: str) -> list[StepReport]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(StepReport(
                time=float(row["time"]),
                mass_rho=float(row["mass_rho"]),
                mass_rhoc=float(row["mass_rhoc"]),
                energy=float(row["energy"]),
                energy_delta=float(row["energy_delta"]),
                max_div=float(row["max_div"]),
                cycles=int(row["cycles"]),
                metric=float(row["metric"]) if row["metric"] else None,
            ))
    return out


def _cell_scalar(fh, name: str, arr: np.ndarray) -> None:
    fh.write(f"SCALARS {name} double 1\n")
    fh.write("LOOKUP_TABLE default\n")
    # x varies fastest in VTK order
    for col in arr.T:
        fh.write(" ".join(_fmt(v) for v in col) + "\n")


def write_snapshot(s: State, path: str) -> None:
    """Legacy VTK structured-points file: c, mu_bar, p_bar, div_u as cell
    data; velocity interpolated to grid vertices as point data."""
    g = s.grid
    div = divergence_field(s)
    # vertex velocity: average the stored edge components onto corners
    uv = ops.avg_ev_y(s.u, g)
    vv = ops.avg_ev_x(s.v, g)
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write("# vtk DataFile Version 2.0\n")
            fh.write(f"qnsch snapshot t={_fmt(s.time)}\n")
            fh.write("ASCII\n")
            fh.write("DATASET STRUCTURED_POINTS\n")
            fh.write(f"DIMENSIONS {g.m1 + 1} {g.m2 + 1} 1\n")
            fh.write("ORIGIN 0 0 0\n")
            fh.write(f"SPACING {_fmt(g.h)} {_fmt(g.h)} 1\n")
            fh.write(f"CELL_DATA {g.m1 * g.m2}\n")
            _cell_scalar(fh, "c", s.c[1:-1, 1:-1])
            _cell_scalar(fh, "mu_bar", s.mu_bar[1:-1, 1:-1])
            _cell_scalar(fh, "p_bar", s.p_bar[1:-1, 1:-1])
            _cell_scalar(fh, "div_u", div[1:-1, 1:-1])
            fh.write(f"POINT_DATA {(g.m1 + 1) * (g.m2 + 1)}\n")
            fh.write("VECTORS velocity double\n")
            for j in range(g.m2 + 1):
                for i in range(g.m1 + 1):
                    fh.write(f"{_fmt(uv[i, j])} {_fmt(vv[i, j])} 0\n")
    except OSError as exc:
        raise OSError(f"cannot write snapshot {path}: {exc}") from exc
