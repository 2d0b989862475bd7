"""One implicit time step of the upwind scheme: residuals, Jacobian, diagnostics.

The step from `prev` to `trial` (both States, trial.time = prev.time + dt)
solves, with D_t f = (f - f_prev)/dt and all operators from `operators`:

  cells:    D_t rho + div_up(rho, u) - h^alpha lap rho = 0
  i-faces:  avg_i[ D_t(rho ubar_i) + div_up(rho ubar_i, u) ] + ddx_i p(rho)
            - mu lap u_i - (mu + lam) ddx_i div u
            - h^alpha sum_j avg_i[ ddx_j( avg_j(ubar_i) * ddx_j rho ) ]
            - f_i(t) = 0

where avg_i maps cells to i-faces, ubar_i is the two-face cell average of
u_i, and the h^alpha terms stabilize the density update (see the alpha
admissibility warning in SchemeParams).  The upwind flux makes the
residual piecewise smooth; the Jacobian freezes the flux sign pattern at
the trial point with sign(0) = 0, so at a zero face velocity the flux
derivative is the plain two-cell average.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from . import operators as ops
from .errors import ConfigurationError, GridMismatchError
from .fields import CellField, FaceField, State, project_faces, same_grid
from .grid import StaggeredGrid, shift_matrix
from .thermo import GasLaw, pressure, pressure_derivative, total_energy


@dataclass
class SchemeParams:
    """Everything that defines one discrete problem at a fixed resolution."""

    grid: StaggeredGrid
    law: GasLaw
    mu: float
    dt: float
    lam: float = 0.0
    alpha: float = 1.6
    t_end: Optional[float] = None
    forcing: Optional[Callable] = None  # forcing(t, (m,d) points) -> (m,d)

    def __post_init__(self):
        if not self.mu > 0:
            raise ConfigurationError(f"shear viscosity must be positive, got mu={self.mu}")
        if self.mu + self.lam < 0:
            raise ConfigurationError(
                f"mu + lam must be nonnegative, got {self.mu} + {self.lam}"
            )
        if not self.dt > 0:
            raise ConfigurationError(f"time step must be positive, got dt={self.dt}")
        if self.t_end is not None and self.t_end < self.dt:
            raise ConfigurationError("final time must be at least one time step")
        gamma = self.law.gamma
        if gamma < 2:
            hi = 2.0 * gamma - self.grid.d / 3.0
            if not 1.0 < self.alpha < hi:
                warnings.warn(
                    f"alpha={self.alpha} outside the admissible range (1, {hi:.4g}) "
                    f"for gamma={gamma}, d={self.grid.d}; the scheme runs but the "
                    "stability theory does not cover it",
                    UserWarning,
                    stacklevel=2,
                )
        elif not self.alpha > 1.0:
            warnings.warn(
                f"alpha={self.alpha} <= 1 is outside the admissible range for "
                f"gamma={gamma}; the scheme runs but the stability theory does "
                "not cover it",
                UserWarning,
                stacklevel=2,
            )

    @property
    def n_steps(self) -> int:
        if self.t_end is None:
            raise ConfigurationError("t_end not set on SchemeParams")
        return int(round(self.t_end / self.dt))

    def forcing_field(self, t: float) -> Optional[FaceField]:
        if self.forcing is None:
            return None
        return project_faces(self.grid, lambda pts: self.forcing(t, pts))


def _check_step_args(params: SchemeParams, prev: State, trial: State) -> StaggeredGrid:
    g = same_grid(prev.density, prev.velocity, trial.density, trial.velocity)
    if g != params.grid:
        raise GridMismatchError(f"state grid {g} does not match params grid {params.grid}")
    return g


def _ubar(g: StaggeredGrid, u: FaceField, axis: int) -> np.ndarray:
    return 0.5 * (u.values[axis] + g.roll(u.values[axis], axis, -1))


def residual_density(params: SchemeParams, prev: State, trial: State) -> CellField:
    """Mass residual on the cells; evaluable for any (even nonpositive) density."""
    g = _check_step_args(params, prev, trial)
    rho = trial.density
    conv = ops.upwind_divergence(rho, trial.velocity).values
    diff = g.h**params.alpha * ops.laplace_cells(rho).values
    out = (rho.values - prev.density.values) / params.dt + conv - diff
    return CellField(g, out)


def residual_momentum(params: SchemeParams, prev: State, trial: State) -> FaceField:
    g = _check_step_args(params, prev, trial)
    h, dt, mu, lam = g.h, params.dt, params.mu, params.lam
    rho, u = trial.density, trial.velocity
    halpha = h**params.alpha

    p = CellField(g, pressure(params.law, rho.values))
    divu = ops.div_cells(u).values
    lap_u = ops.laplace_faces(u)
    force = params.forcing_field(trial.time)

    out = np.empty((g.d, g.ncells))
    for i in range(g.d):
        ubar_i = _ubar(g, u, i)
        m_i = CellField(g, rho.values * ubar_i)
        m_prev = prev.density.values * _ubar(g, prev.velocity, i)

        def avg_i(c):
            return 0.5 * (c + g.roll(c, i, +1))

        res = avg_i(m_i.values - m_prev) / dt
        res += avg_i(ops.upwind_divergence(m_i, u).values)
        res += ops.edge_derivative(p, i)
        res -= mu * lap_u.values[i]
        res -= (mu + lam) * (g.roll(divu, i, +1) - divu) / h
        for j in range(g.d):
            avg_j_ubar = 0.5 * (ubar_i + g.roll(ubar_i, j, +1))
            flux_j = avg_j_ubar * ops.edge_derivative(rho, j)
            res -= halpha * avg_i(ops.cell_derivative(flux_j, g, j))
        if force is not None:
            res -= force.values[i]
        out[i] = res
    return FaceField(g, out)


def residual_vector(params: SchemeParams, prev: State, trial: State) -> np.ndarray:
    """Stacked residual [mass, momentum_0, ..., momentum_{d-1}]."""
    mass = residual_density(params, prev, trial)
    mom = residual_momentum(params, prev, trial)
    return np.concatenate([mass.values, mom.values.reshape(-1)])


def split_increment(grid: StaggeredGrid, vec: np.ndarray):
    """Undo the stacking of `residual_vector` for an increment vector."""
    nc = grid.ncells
    return vec[:nc], vec[nc:].reshape(grid.d, nc)


# -- sparse Jacobian -------------------------------------------------------


@lru_cache(maxsize=16)
def _elementary_ops(grid: StaggeredGrid):
    """Cached sparse building blocks matching the matrix-free operators."""
    h = grid.h
    eye = sp.identity(grid.ncells, format="csr")
    Sp = [shift_matrix(grid, k, +1) for k in range(grid.d)]
    Sm = [shift_matrix(grid, k, -1) for k in range(grid.d)]
    avg = [0.5 * (eye + Sp[k]) for k in range(grid.d)]      # cells -> k-faces
    bar = [0.5 * (eye + Sm[k]) for k in range(grid.d)]      # k-faces -> cells
    gradk = [(Sp[k] - eye) / h for k in range(grid.d)]      # edge derivative
    divk = [(eye - Sm[k]) / h for k in range(grid.d)]       # cell derivative
    lap = sum((Sp[k] + Sm[k] - 2.0 * eye) for k in range(grid.d)) / h**2
    return {"eye": eye, "Sp": Sp, "avg": avg, "bar": bar, "grad": gradk, "div": divk, "lap": lap}


def _upwind_weight(g: StaggeredGrid, c: np.ndarray, vel: np.ndarray, axis: int) -> np.ndarray:
    """d(flux)/d(face velocity) with the sign pattern frozen (sign(0) = 0)."""
    s = np.sign(vel)
    return 0.5 * ((1.0 + s) * c + (1.0 - s) * g.roll(c, axis, +1))


def assemble_jacobian(params: SchemeParams, trial: State) -> sp.csr_matrix:
    """Exact Jacobian of `residual_vector` wrt `trial`, upwind signs frozen.

    Block layout follows the stacking: density first, then one velocity
    block per axis.
    """
    g = _check_step_args(params, trial, trial)
    d, nc = g.d, g.ncells
    dt, mu, lam = params.dt, params.mu, params.lam
    halpha = g.h**params.alpha
    el = _elementary_ops(g)
    eye, Sp, avg, bar, gradk, divk, lap = (
        el["eye"], el["Sp"], el["avg"], el["bar"], el["grad"], el["div"], el["lap"],
    )

    rho = trial.density.values
    u = trial.velocity

    # flux operators: transported cell quantity -> face flux, and the full
    # cell-to-cell upwind divergence
    flux_op = []
    for j in range(d):
        vel = u.values[j]
        flux_op.append(sp.diags(np.maximum(vel, 0.0)) @ eye + sp.diags(np.minimum(vel, 0.0)) @ Sp[j])
    conv = sum(divk[j] @ flux_op[j] for j in range(d))

    dp = sp.diags(pressure_derivative(params.law, rho))

    blocks = [[None] * (1 + d) for _ in range(1 + d)]
    blocks[0][0] = (eye / dt + conv - halpha * lap).tocsr()
    for j in range(d):
        blocks[0][1 + j] = divk[j] @ sp.diags(_upwind_weight(g, rho, u.values[j], j))

    for i in range(d):
        ubar_i = _ubar(g, u, i)
        m_i = rho * ubar_i

        j_rho = avg[i] @ (sp.diags(ubar_i) / dt + conv @ sp.diags(ubar_i)) + gradk[i] @ dp
        for j in range(d):
            avg_j_ubar = 0.5 * (ubar_i + g.roll(ubar_i, j, +1))
            j_rho -= halpha * (avg[i] @ divk[j] @ sp.diags(avg_j_ubar) @ gradk[j])
        blocks[1 + i][0] = j_rho.tocsr()

        for k in range(d):
            jik = avg[i] @ divk[k] @ sp.diags(_upwind_weight(g, m_i, u.values[k], k))
            jik -= (mu + lam) * (gradk[i] @ divk[k])
            if k == i:
                rho_bar = avg[i] @ sp.diags(rho) @ bar[i]
                jik = jik + rho_bar / dt + avg[i] @ conv @ sp.diags(rho) @ bar[i] - mu * lap
                for j in range(d):
                    drho_j = ops.edge_derivative(trial.density, j)
                    jik -= halpha * (avg[i] @ divk[j] @ sp.diags(drho_j) @ avg[j] @ bar[i])
            blocks[1 + i][1 + k] = jik.tocsr()

    return sp.bmat(blocks, format="csr")


# -- per-step diagnostics --------------------------------------------------


@dataclass
class StepDiagnostics:
    """Conservation and stability readouts for one accepted step."""

    mass: float
    min_density: float
    energy: float
    dissipation: float
    energy_slack: float


def diagnostics(params: SchemeParams, prev: State, trial: State) -> StepDiagnostics:
    """Mass, positivity, and the energy balance of the step prev -> trial.

    `energy_slack` is the amount by which the step undershoots the energy
    bound: E(prev) - E(trial) - dt * (mu |grad u|^2 + (mu+lam) |div u|^2).
    For unforced runs it is nonnegative up to the Newton tolerance.
    """
    g = _check_step_args(params, prev, trial)
    vol = g.h**g.d
    mass = vol * float(np.sum(trial.density.values))
    min_density = float(np.min(trial.density.values))

    energy_prev = total_energy(params.law, prev)
    energy = total_energy(params.law, trial)
    gradu = ops.grad_bidual(trial.velocity)
    divu = ops.div_cells(trial.velocity).values
    dissipation = params.mu * vol * float(np.sum(gradu**2))
    dissipation += (params.mu + params.lam) * vol * float(np.sum(divu**2))
    slack = energy_prev - energy - params.dt * dissipation
    return StepDiagnostics(
        mass=mass,
        min_density=min_density,
        energy=energy,
        dissipation=dissipation,
        energy_slack=slack,
    )
