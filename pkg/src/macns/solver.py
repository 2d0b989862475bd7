"""Damped Newton solver for one implicit step, plus the linear sub-solves.

Convergence is measured in the max norm of the stacked residual with the
mass rows scaled by dt, so both blocks are compared in the units of the
per-step update of the unknowns.  Updates are damped twice over: first so
the density never loses more than a configured fraction of its current
value in any cell (which keeps every iterate strictly positive), then by
backtracking whenever the residual norm fails to decrease.  The accepted
state's residual is recomputed matrix-free before it is returned.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    ConfigurationError,
    LinearBreakdown,
    LinearNonConvergence,
    LinearSolverError,
    SolverFailure,
)
from .fields import CellField, FaceField, State
from .scheme import SchemeParams, assemble_jacobian, residual_vector, split_increment

# Largest system handed to the sparse direct factorization under the
# "auto" policy; 3 * 128^2, i.e. up to n=128 in d=2.
DIRECT_SIZE_LIMIT = 49152


@dataclass
class SolverConfig:
    newton_tol: float = 1e-10
    max_iterations: int = 25
    damping: float = 0.5
    positivity_fraction: float = 0.9
    max_backtracks: int = 40
    linear_solver: str = "auto"  # auto | direct | iterative
    linear_tol: float = 1e-12
    iterative_maxiter: int = 600
    ilu_drop_tol: float = 1e-5
    ilu_fill_factor: float = 20.0

    def __post_init__(self):
        if not 0 < self.positivity_fraction < 1:
            raise ConfigurationError(
                f"positivity_fraction must lie in (0,1), got {self.positivity_fraction}"
            )
        if not 0 < self.damping < 1:
            raise ConfigurationError(f"damping must lie in (0,1), got {self.damping}")
        if self.linear_solver not in ("auto", "direct", "iterative"):
            raise ConfigurationError(f"unknown linear solver {self.linear_solver!r}")
        if not self.newton_tol > 0 or not self.linear_tol > 0:
            raise ConfigurationError("tolerances must be positive")


def linear_solve(matrix: sp.spmatrix, rhs: np.ndarray, config: SolverConfig) -> np.ndarray:
    """Solve matrix @ x = rhs to a relative residual of `linear_tol`.

    Deterministic for fixed inputs.  Singular systems raise
    LinearBreakdown; a stalled Krylov iteration raises LinearNonConvergence.
    """
    rhs = np.asarray(rhs, dtype=float)
    matrix = matrix.tocsr()
    n = matrix.shape[0]
    if matrix.shape != (n, n) or rhs.shape != (n,):
        raise ValueError(f"incompatible shapes {matrix.shape} vs {rhs.shape}")
    rhs_norm = float(np.linalg.norm(rhs))
    if rhs_norm == 0.0:
        return np.zeros(n)

    method = config.linear_solver
    if method == "auto":
        method = "direct" if n <= DIRECT_SIZE_LIMIT else "iterative"

    if method == "direct":
        try:
            x = spla.splu(matrix.tocsc()).solve(rhs)
        except RuntimeError as exc:  # SuperLU reports exact singularity this way
            raise LinearBreakdown(f"direct factorization failed: {exc}") from exc
        if not np.all(np.isfinite(x)):
            raise LinearBreakdown("direct solve produced non-finite values")
        rel = float(np.linalg.norm(matrix @ x - rhs)) / rhs_norm
        if rel > max(config.linear_tol, 1e-12) * 1e3:
            raise LinearBreakdown(f"direct solve residual {rel:.3e} too large (singular system?)")
        return x

    try:
        ilu = spla.spilu(
            matrix.tocsc(),
            drop_tol=config.ilu_drop_tol,
            fill_factor=config.ilu_fill_factor,
        )
    except RuntimeError as exc:
        raise LinearBreakdown(f"ILU factorization failed: {exc}") from exc
    precond = spla.LinearOperator(matrix.shape, ilu.solve)
    x, info = spla.gmres(
        matrix,
        rhs,
        rtol=config.linear_tol,
        atol=0.0,
        restart=60,
        maxiter=config.iterative_maxiter,
        M=precond,
    )
    if info < 0:
        raise LinearBreakdown(f"gmres breakdown (info={info})")
    rel = float(np.linalg.norm(matrix @ x - rhs)) / rhs_norm
    if info > 0 or rel > config.linear_tol * 10:
        raise LinearNonConvergence(
            f"gmres stalled at relative residual {rel:.3e} (target {config.linear_tol:.1e})"
        )
    return x


@dataclass
class NewtonReport:
    """Structured record of one Newton solve (success or failure)."""

    converged: bool
    iterations: int
    residual_norms: list = field(default_factory=list)
    step_sizes: list = field(default_factory=list)
    min_density: float = float("nan")
    message: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def _scaled_norm(params: SchemeParams, vec: np.ndarray) -> float:
    nc = params.grid.ncells
    mass = float(np.max(np.abs(vec[:nc]))) if nc else 0.0
    mom = float(np.max(np.abs(vec[nc:]))) if vec.size > nc else 0.0
    return max(params.dt * mass, mom)


def newton_step_solve(
    params: SchemeParams, config: SolverConfig, prev: State
) -> "tuple[State, NewtonReport]":
    """Advance `prev` by one implicit step; raises SolverFailure on trouble."""
    if np.any(prev.density.values <= 0):
        raise SolverFailure("previous state has nonpositive density", NewtonReport(False, 0))
    g = params.grid
    t_new = prev.time + params.dt
    trial = State(
        density=prev.density.copy(),
        velocity=prev.velocity.copy(),
        time=t_new,
        step=prev.step + 1,
    )
    report = NewtonReport(converged=False, iterations=0)

    res = residual_vector(params, prev, trial)
    norm = _scaled_norm(params, res)
    report.residual_norms.append(norm)

    for _ in range(config.max_iterations):
        if norm <= config.newton_tol:
            break
        jac = assemble_jacobian(params, trial)
        try:
            delta = linear_solve(jac, -res, config)
        except LinearSolverError as exc:
            report.message = f"linear solve failed: {exc}"
            report.min_density = float(np.min(trial.density.values))
            raise SolverFailure(report.message, report) from exc
        d_rho, d_u = split_increment(g, delta)

        # cap the step so no cell loses more than the configured density fraction
        theta = 1.0
        shrink = d_rho < 0
        if np.any(shrink):
            allowed = config.positivity_fraction * trial.density.values[shrink] / -d_rho[shrink]
            theta = min(1.0, float(np.min(allowed)))

        accepted = False
        for _bt in range(config.max_backtracks):
            cand = State(
                density=CellField(g, trial.density.values + theta * d_rho),
                velocity=FaceField(g, trial.velocity.values + theta * d_u),
                time=t_new,
                step=trial.step,
            )
            if np.min(cand.density.values) <= 0:
                theta *= config.damping
                continue
            cand_res = residual_vector(params, prev, cand)
            cand_norm = _scaled_norm(params, cand_res)
            if np.isfinite(cand_norm) and cand_norm < norm:
                accepted = True
                break
            theta *= config.damping
        if not accepted:
            report.message = f"line search stalled at residual {norm:.3e}"
            report.min_density = float(np.min(trial.density.values))
            raise SolverFailure(report.message, report)

        trial, res, norm = cand, cand_res, cand_norm
        report.iterations += 1
        report.residual_norms.append(norm)
        report.step_sizes.append(theta)

    # never trust the accepted residual: recompute it matrix-free
    final_norm = _scaled_norm(params, residual_vector(params, prev, trial))
    report.min_density = float(np.min(trial.density.values))
    if final_norm > config.newton_tol:
        report.message = (
            f"no convergence after {report.iterations} iterations "
            f"(residual {final_norm:.3e}, target {config.newton_tol:.1e})"
        )
        raise SolverFailure(report.message, report)
    if report.min_density <= 0:
        report.message = "converged state has nonpositive density"
        raise SolverFailure(report.message, report)
    report.converged = True
    report.residual_norms[-1] = final_norm
    return trial, report
