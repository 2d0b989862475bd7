"""Discrete differential operators on the staggered grid.

Sign and placement conventions, with K -> L the oriented cell pair of a
face (x_L - x_K = h e_axis):

* edge derivative on faces:      (r_L - r_K) / h
* cell derivative of component:  (v[K,axis+] - v[K,axis-]) / h
* upwind flux on a face:         r_K v+ + r_L v-   (v+ = max(v,0), v- = min(v,0))

The bidual gradient of a velocity field is stored as a (d, d, ncells)
array: entry [i, j] holds the derivative of component i along axis j,
keyed by the face with the lower coordinate of the dual-cell pair.
All operators are matrix-free (periodic rolls); sparse counterparts used
by the Jacobian live in `scheme`.
"""

from __future__ import annotations

import numpy as np

from .fields import CellField, FaceField, same_grid
from .grid import StaggeredGrid


def edge_derivative(r: CellField, axis: int) -> np.ndarray:
    """(r_L - r_K)/h on the faces normal to `axis`."""
    g = r.grid
    return (g.roll(r.values, axis, +1) - r.values) / g.h


def cell_derivative(values: np.ndarray, grid: StaggeredGrid, axis: int) -> np.ndarray:
    """Difference of the two `axis`-faces of each cell, over h."""
    return (values - grid.roll(values, axis, -1)) / grid.h


def grad_edges(r: CellField) -> FaceField:
    """Face-wise gradient: component k on the k-faces."""
    g = r.grid
    return FaceField(g, np.stack([edge_derivative(r, k) for k in range(g.d)]))


def div_cells(v: FaceField) -> CellField:
    """Cell divergence of a face field."""
    g = v.grid
    acc = np.zeros(g.ncells)
    for axis in range(g.d):
        acc += cell_derivative(v.values[axis], g, axis)
    return CellField(g, acc)


def _stencil_laplacian(values: np.ndarray, grid: StaggeredGrid) -> np.ndarray:
    acc = -2.0 * grid.d * values
    for axis in range(grid.d):
        acc = acc + grid.roll(values, axis, +1) + grid.roll(values, axis, -1)
    return acc / grid.h**2

def laplace_cells(r: CellField) -> CellField:
    """2d+1 point Laplacian on primary cells."""
    return CellField(r.grid, _stencil_laplacian(r.values, r.grid))

def laplace_faces(v: FaceField) -> FaceField:
    """Component-wise 2d+1 point Laplacian on each dual grid."""
    g = v.grid
    return FaceField(g, np.stack([_stencil_laplacian(v.values[k], g) for k in range(g.d)]))


def grad_bidual(v: FaceField) -> np.ndarray:
    """Full velocity gradient on bidual cells, shape (d, d, ncells)."""
    g = v.grid
    out = np.empty((g.d, g.d, g.ncells))
    for i in range(g.d):
        for j in range(g.d):
            out[i, j] = (g.roll(v.values[i], j, +1) - v.values[i]) / g.h
    return out


def upwind_flux_axis(r: CellField, v: FaceField, axis: int) -> np.ndarray:
    """Donor-cell mass flux of the cell quantity `r` through the `axis`-faces."""
    g = same_grid(r, v)
    vel = v.values[axis]
    return r.values * np.maximum(vel, 0.0) + g.roll(r.values, axis, +1) * np.minimum(vel, 0.0)


def upwind_flux(r: CellField, v: FaceField) -> FaceField:
    g = same_grid(r, v)
    return FaceField(g, np.stack([upwind_flux_axis(r, v, k) for k in range(g.d)]))


def upwind_divergence(r: CellField, v: FaceField) -> CellField:
    """div of the donor-cell flux; conservative (sums to zero over the torus)."""
    return div_cells(upwind_flux(r, v))


def identity_residuals(grid: StaggeredGrid, rng: np.random.Generator) -> dict:
    """Relative residuals of the exact operator identities on random fields.

    Used by the self-test command and the acceptance suite.  Every entry
    should vanish to rounding on any grid; values are scaled by the size
    of the terms entering each identity.
    """
    from .fields import face_average_axis, integrate_cells

    h = grid.h
    vol = h**grid.d
    r = CellField(grid, rng.uniform(0.2, 2.0, grid.ncells))
    phi = CellField(grid, rng.standard_normal(grid.ncells))
    v = FaceField(grid, rng.standard_normal((grid.d, grid.ncells)))
    w = FaceField(grid, rng.standard_normal((grid.d, grid.ncells)))

    def rel(a, b):
        scale = max(abs(a), abs(b), 1e-30)
        return abs(a - b) / scale

    out = {}

    # -<laplace_cells r, phi> == <grad_edges r, grad_edges phi>
    lhs = -vol * float(np.sum(laplace_cells(r).values * phi.values))
    rhs = vol * float(np.sum(grad_edges(r).values * grad_edges(phi).values))
    out["laplacian_cells_sbp"] = rel(lhs, rhs)

    # -<laplace_faces v, w> == <grad_bidual v : grad_bidual w>
    lhs = -vol * float(np.sum(laplace_faces(v).values * w.values))
    rhs = vol * float(np.sum(grad_bidual(v) * grad_bidual(w)))
    out["laplacian_faces_sbp"] = rel(lhs, rhs)

    # -<div_cells v, r> == <v, grad_edges r>
    lhs = -vol * float(np.sum(div_cells(v).values * r.values))
    rhs = vol * float(np.sum(v.values * grad_edges(r).values))
    out["divergence_sbp"] = rel(lhs, rhs)

    # -<upwind_divergence, phi> == sum_i <flux_i, edge_derivative_i phi>
    lhs = -vol * float(np.sum(upwind_divergence(r, v).values * phi.values))
    rhs = vol * sum(
        float(np.sum(upwind_flux_axis(r, v, k) * edge_derivative(phi, k)))
        for k in range(grid.d)
    )
    out["upwind_sbp"] = rel(lhs, rhs)

    # flux == averaged flux minus the numerical-diffusion correction
    err = 0.0
    scale = 0.0
    for k in range(grid.d):
        vel = v.values[k]
        recon = face_average_axis(r, k) * vel - 0.5 * h * np.abs(vel) * edge_derivative(r, k)
        flux = upwind_flux_axis(r, v, k)
        err = max(err, float(np.max(np.abs(flux - recon))))
        scale = max(scale, float(np.max(np.abs(flux))))
    out["upwind_average_form"] = err / max(scale, 1e-30)

    # conservation: total upwind divergence vanishes
    total = integrate_cells(upwind_divergence(r, v))
    out["upwind_conservation"] = abs(total) / max(float(np.max(np.abs(upwind_flux(r, v).values))), 1e-30)

    # composition: laplace_cells == sum_i cell_derivative(edge_derivative)
    comp = np.zeros(grid.ncells)
    for k in range(grid.d):
        comp += cell_derivative(edge_derivative(r, k), grid, k)
    num = float(np.max(np.abs(comp - laplace_cells(r).values)))
    out["laplacian_composition"] = num / max(float(np.max(np.abs(comp))), 1e-30)

    return out
