"""File output: error tables, run logs, field dumps, legacy VTK.

Field dumps use the flat cell ordering documented in `grid` (axis 0
fastest).  CSV dumps are one value per line for cell fields and one
column per velocity component for face fields; any other suffix writes
raw little-endian float64 in the same ordering.
"""

from __future__ import annotations

import csv
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .fields import CellField, FaceField, State, cell_average_velocity
from .grid import StaggeredGrid
from .thermo import GasLaw, pressure

TABLE_COLUMNS = [
    "h", "dt", "gamma",
    "e_E", "eoc_E", "e_gradu", "eoc_gradu", "e_rho", "eoc_rho",
    "e_u", "eoc_u", "e_p", "eoc_p",
]
LOG_COLUMNS = [
    "step", "time", "mass", "mass_drift", "min_density",
    "energy", "energy_slack", "newton_iterations", "residual_norm",
]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".10e")
    return str(value)


def write_error_table(path, rows, config_hash: str) -> None:
    """Error/EOC table in the fixed column order, one row per resolution."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TABLE_COLUMNS + ["config_hash"])
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in TABLE_COLUMNS] + [config_hash])


def write_run_log(path, records) -> None:
    """Per-step diagnostics of one run."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(LOG_COLUMNS)
        for rec in records:
            data = asdict(rec)
            writer.writerow([_fmt(data[c]) for c in LOG_COLUMNS])


def save_cell_field(field: CellField, path) -> None:
    path = Path(path)
    if path.suffix == ".csv":
        np.savetxt(path, field.values, fmt="%.17e")
    else:
        field.values.astype("<f8").tofile(path)


def load_cell_field(path, grid: StaggeredGrid) -> CellField:
    path = Path(path)
    if path.suffix == ".csv":
        values = np.loadtxt(path, dtype=float).reshape(-1)
    else:
        values = np.fromfile(path, dtype="<f8")
    return CellField(grid, values)


def save_face_field(field: FaceField, path) -> None:
    path = Path(path)
    if path.suffix == ".csv":
        np.savetxt(path, field.values.T, fmt="%.17e")
    else:
        field.values.astype("<f8").tofile(path)


def load_face_field(path, grid: StaggeredGrid) -> FaceField:
    path = Path(path)
    if path.suffix == ".csv":
        values = np.loadtxt(path, dtype=float, ndmin=2).T
    else:
        values = np.fromfile(path, dtype="<f8").reshape(grid.d, -1)
    return FaceField(grid, values)


def write_vtk(path, state: State, law: GasLaw) -> None:
    """Legacy structured-points VTK with cell data (density, pressure, velocity).

    The flat field ordering already matches VTK's x-fastest cell ordering;
    the velocity is cell-averaged and zero-padded to three components.
    """
    g = state.grid
    n = g.n
    dims = [n + 1, n + 1, n + 1 if g.d == 3 else 1]
    spacing = [g.h, g.h, g.h if g.d == 3 else 1.0]
    ubar = cell_average_velocity(state.velocity)
    vel = np.zeros((g.ncells, 3))
    for k, comp in enumerate(ubar):
        vel[:, k] = comp.values

    lines = [
        "# vtk DataFile Version 3.0",
        f"macns state t={state.time:.10e} step={state.step}",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {dims[0]} {dims[1]} {dims[2]}",
        "ORIGIN 0 0 0",
        f"SPACING {spacing[0]:.10e} {spacing[1]:.10e} {spacing[2]:.10e}",
        f"CELL_DATA {g.ncells}",
        "SCALARS density double 1",
        "LOOKUP_TABLE default",
    ]
    lines.extend(format(v, ".10e") for v in state.density.values)
    lines.append("SCALARS pressure double 1")
    lines.append("LOOKUP_TABLE default")
    lines.extend(format(v, ".10e") for v in pressure(law, state.density.values))
    lines.append("VECTORS velocity double")
    lines.extend(" ".join(format(c, ".10e") for c in row) for row in vel)
    Path(path).write_text("\n".join(lines) + "\n")
