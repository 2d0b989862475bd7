"""Error norms against a reference solution, EOC, and grid transfer.

A reference provides the pair (density, velocity) on the grid of the
numerical solution at any snapshot time: analytically known solutions are
projected with the quadrature rules of `fields`, and a fine numerical run
is restricted by exact cell/face averaging.  Both routes then feed the
same norm code, so a table produced against either kind of reference
means the same thing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .fields import (
    CellField,
    FaceField,
    State,
    cell_average_velocity,
    project_cells,
    project_faces,
)
from .grid import StaggeredGrid
from .operators import grad_bidual
from .thermo import GasLaw, pressure, relative_energy


class AnalyticReference:
    """Reference from closed-form density/velocity functions of (t, x)."""

    def __init__(self, grid: StaggeredGrid, density_fn, velocity_fn):
        self.grid = grid
        self._density_fn = density_fn
        self._velocity_fn = velocity_fn

    def density(self, t: float) -> CellField:
        return project_cells(self.grid, lambda pts: self._density_fn(t, pts))

    def velocity(self, t: float) -> FaceField:
        return project_faces(self.grid, lambda pts: self._velocity_fn(t, pts))


class RestrictedReference:
    """Reference built by restricting snapshots of a finer numerical run."""

    def __init__(self, grid: StaggeredGrid, snapshots: dict):
        self.grid = grid
        self._times = np.array(sorted(snapshots))
        self._snapshots = snapshots

    def _lookup(self, t: float):
        idx = int(np.argmin(np.abs(self._times - t)))
        t_hit = self._times[idx]
        if abs(t_hit - t) > 1e-9 * max(1.0, abs(t)):
            raise ConfigurationError(
                f"no reference snapshot at t={t!r}; stored times do not align "
                "(coarse dt must be an integer multiple of the fine dt)"
            )
        return self._snapshots[t_hit]

    def density(self, t: float) -> CellField:
        return self._lookup(t)[0]

    def velocity(self, t: float) -> FaceField:
        return self._lookup(t)[1]


def _block_mean(arr: np.ndarray, factor: int, skip_axis: Optional[int] = None) -> np.ndarray:
    shape = []
    mean_axes = []
    pos = 0
    for ax in range(arr.ndim):
        if ax == skip_axis:
            shape.append(arr.shape[ax])
            pos += 1
        else:
            shape.extend([arr.shape[ax] // factor, factor])
            mean_axes.append(pos + 1)
            pos += 2
    return arr.reshape(shape).mean(axis=tuple(mean_axes))


def restrict_cells(fine: CellField, coarse: StaggeredGrid) -> CellField:
    """Exact mean over the nested fine cells of each coarse cell."""
    fg = fine.grid
    if fg.d != coarse.d or fg.n % coarse.n:
        raise ConfigurationError(f"cannot restrict n={fg.n} to n={coarse.n}")
    m = fg.n // coarse.n
    a = fine.values.reshape(fg.shape)
    return CellField(coarse, _block_mean(a, m).reshape(-1))


def restrict_faces(fine: FaceField, coarse: StaggeredGrid) -> FaceField:
    """Mean of the fine faces lying in the plane of each coarse face."""
    fg = fine.grid
    if fg.d != coarse.d or fg.n % coarse.n:
        raise ConfigurationError(f"cannot restrict n={fg.n} to n={coarse.n}")
    m = fg.n // coarse.n
    out = np.empty((coarse.d, coarse.ncells))
    for axis in range(fg.d):
        a = fine.values[axis].reshape(fg.shape)
        np_axis = fg.d - 1 - axis
        planes = np.take(a, np.arange(coarse.n) * m + (m - 1), axis=np_axis)
        out[axis] = _block_mean(planes, m, skip_axis=np_axis).reshape(-1)
    return FaceField(coarse, out)


def restrict_reference(fine_states: Sequence[State], coarse: StaggeredGrid) -> RestrictedReference:
    """Restrict a list of fine-grid snapshots onto `coarse`."""
    snapshots = {}
    for s in fine_states:
        snapshots[s.time] = (restrict_cells(s.density, coarse), restrict_faces(s.velocity, coarse))
    return RestrictedReference(coarse, snapshots)


@dataclass
class ErrorReport:
    """The five error norms of a run against its reference."""

    h: float
    dt: float
    gamma: float
    e_energy: float
    e_grad_velocity: float
    e_density: float
    e_velocity: float
    e_pressure: float

    def values(self) -> dict:
        return {
            "e_E": self.e_energy,
            "e_gradu": self.e_grad_velocity,
            "e_rho": self.e_density,
            "e_u": self.e_velocity,
            "e_p": self.e_pressure,
        }


def error_norms(states: Sequence[State], reference, law: GasLaw, dt: float) -> ErrorReport:
    """Norms of the discrepancy between a run's snapshots and a reference.

    `states` must contain every step of the run, initial state first.
    The energy and pressure errors take the worst step; the others are
    discrete space-time integrals over steps 1..N.
    """
    if len(states) < 2:
        raise ConfigurationError("need at least the initial state and one step")
    g = states[0].grid
    vol = g.h**g.d

    e_energy = 0.0
    e_pressure = 0.0
    acc_gradu = 0.0
    acc_rho = 0.0
    acc_u = 0.0
    for s in states[1:]:
        r_ref = reference.density(s.time)
        u_ref = reference.velocity(s.time)
        ubar_ref = cell_average_velocity(u_ref)

        e_energy = max(e_energy, relative_energy(law, s, r_ref, ubar_ref))

        du = FaceField(g, s.velocity.values - u_ref.values)
        acc_gradu += dt * vol * float(np.sum(grad_bidual(du) ** 2))
        acc_u += dt * vol * float(np.sum(du.values**2))
        acc_rho += dt * vol * float(np.sum(np.abs(s.density.values - r_ref.values)))
        dp = np.abs(pressure(law, s.density.values) - pressure(law, r_ref.values))
        e_pressure = max(e_pressure, float(np.max(dp)))

    return ErrorReport(
        h=g.h,
        dt=dt,
        gamma=law.gamma,
        e_energy=e_energy,
        e_grad_velocity=math.sqrt(acc_gradu),
        e_density=acc_rho,
        e_velocity=math.sqrt(acc_u),
        e_pressure=e_pressure,
    )


def eoc(coarse: float, fine: float) -> Optional[float]:
    """Observed order between two successive resolutions (h halved)."""
    if coarse <= 0 or fine <= 0:
        return None
    return math.log2(coarse / fine)
