"""Discrete fields on the staggered grid, projections, averages, integrals.

A CellField stores one value per primary cell; a FaceField stores one value
per face for each of the d face families, i.e. an array of shape
(d, ncells) in the cell-owner ordering described in `grid`.  Pointwise
functions are turned into discrete fields by quadrature-backed mean-value
projections (tensor 2-point Gauss, exact for per-axis quadratic
integrands and far below the scheme's own accuracy for smooth ones).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import GridMismatchError
from .grid import StaggeredGrid

# Scan every constructed field for NaN/inf when enabled (cheap, but off by
# default; the test suite switches it on).
DEBUG_FINITE = bool(int(os.environ.get("MACNS_DEBUG_FINITE", "0")))

_GAUSS2 = np.array([-0.5, 0.5]) / np.sqrt(3.0)  # 2-pt Gauss nodes on [-1/2, 1/2]


def _check_finite(values: np.ndarray, what: str) -> None:
    if DEBUG_FINITE and not np.all(np.isfinite(values)):
        raise FloatingPointError(f"non-finite values in {what}")


@dataclass
class CellField:
    """Scalar field sampled on the primary cells (flat array of length n^d)."""

    grid: StaggeredGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=float).reshape(-1)
        if self.values.shape != (self.grid.ncells,):
            raise ValueError(
                f"expected {self.grid.ncells} cell values, got {self.values.shape}"
            )
        _check_finite(self.values, "CellField")

    def copy(self) -> "CellField":
        return CellField(self.grid, self.values.copy())


@dataclass
class FaceField:
    """Vector field with component k on the faces normal to axis k.

    `values[k]` is the flat array of component k keyed by the owning cell.
    """

    grid: StaggeredGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=float)
        expect = (self.grid.d, self.grid.ncells)
        if self.values.shape != expect:
            raise ValueError(f"expected face values of shape {expect}, got {self.values.shape}")
        _check_finite(self.values, "FaceField")

    def component(self, axis: int) -> np.ndarray:
        return self.values[axis]

    def copy(self) -> "FaceField":
        return FaceField(self.grid, self.values.copy())


def same_grid(*fields) -> StaggeredGrid:
    """Return the common grid of the arguments, or raise GridMismatchError."""
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise GridMismatchError(f"grids differ: {g} vs {f.grid}")
    return g


@dataclass
class State:
    """Density + face velocity at one time level."""

    density: CellField
    velocity: FaceField
    time: float = 0.0
    step: int = 0

    def __post_init__(self):
        same_grid(self.density, self.velocity)

    @property
    def grid(self) -> StaggeredGrid:
        return self.density.grid

    def copy(self) -> "State":
        return replace(self, density=self.density.copy(), velocity=self.velocity.copy())


# -- projections -----------------------------------------------------------


def project_cells(grid: StaggeredGrid, fn) -> CellField:
    """Cell-mean projection of a pointwise scalar ``fn((m, d) points) -> (m,)``."""
    centers = grid.cell_centers()
    acc = np.zeros(grid.ncells)
    npts = 0
    for offsets in np.ndindex(*(2,) * grid.d):
        pts = centers + _GAUSS2[list(offsets)] * grid.h
        acc += np.asarray(fn(pts), dtype=float)
        npts += 1
    return CellField(grid, acc / npts)


def project_faces(grid: StaggeredGrid, fn) -> FaceField:
    """Face-mean projection of a vector function ``fn((m, d) points) -> (m, d)``.

    Component k is averaged over the faces normal to axis k using the
    tensor Gauss rule on the d-1 transverse axes.
    """
    out = np.zeros((grid.d, grid.ncells))
    for axis in range(grid.d):
        centers = grid.face_centers(axis)
        transverse = [k for k in range(grid.d) if k != axis]
        acc = np.zeros(grid.ncells)
        npts = 0
        for offsets in np.ndindex(*(2,) * len(transverse)):
            pts = centers.copy()
            for k, o in zip(transverse, offsets):
                pts[:, k] += _GAUSS2[o] * grid.h
            vals = np.asarray(fn(pts), dtype=float)
            acc += vals[:, axis]
            npts += 1
        out[axis] = acc / npts
    return FaceField(grid, out)


# -- averages --------------------------------------------------------------


def face_average(r: CellField) -> FaceField:
    """Arithmetic two-cell average of a cell field onto every face family."""
    g = r.grid
    out = np.empty((g.d, g.ncells))
    for axis in range(g.d):
        out[axis] = 0.5 * (r.values + g.roll(r.values, axis, +1))
    return FaceField(g, out)


def face_average_axis(r: CellField, axis: int) -> np.ndarray:
    """Two-cell average onto the faces of one axis only."""
    return 0.5 * (r.values + r.grid.roll(r.values, axis, +1))


def cell_average_velocity(v: FaceField) -> tuple:
    """Per-component two-face average onto cells (the bar operator)."""
    g = v.grid
    return tuple(
        CellField(g, 0.5 * (v.values[axis] + g.roll(v.values[axis], axis, -1)))
        for axis in range(g.d)
    )


# -- integrals -------------------------------------------------------------


def integrate_cells(r: CellField) -> float:
    """Integral over the torus with the primary cell measure h^d."""
    return r.grid.h**r.grid.d * float(np.sum(r.values))


def integrate_faces(v: FaceField, axis: int) -> float:
    """Integral of component `axis` with the dual cell measure h^d."""
    return v.grid.h**v.grid.d * float(np.sum(v.values[axis]))
