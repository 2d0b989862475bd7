"""Strictly sequential time loop with invariant enforcement and logging."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigurationError, InvariantViolation
from .fields import State, integrate_cells
from .scheme import SchemeParams, diagnostics
from .solver import SolverConfig, newton_step_solve


@dataclass
class StepRecord:
    """One accepted step's log line."""

    step: int
    time: float
    mass: float
    mass_drift: float
    min_density: float
    energy: float
    energy_slack: float
    newton_iterations: int
    residual_norm: float


@dataclass
class SimulationResult:
    states: list  # snapshots; always includes the initial and final state
    records: list
    final: State


def simulate(
    params: SchemeParams,
    config: SolverConfig,
    initial: State,
    snapshot_stride: int = 1,
    enforce_invariants: bool = True,
) -> SimulationResult:
    """March `initial` to params.t_end, checking invariants every step.

    Raises SolverFailure if a step cannot be solved and InvariantViolation
    if an accepted step breaks mass conservation, density positivity, or
    (for unforced runs) the energy bound beyond the Newton tolerance.
    """
    if params.t_end is None:
        raise ConfigurationError("simulate needs params.t_end")
    if snapshot_stride < 1:
        raise ConfigurationError("snapshot_stride must be >= 1")
    n_steps = params.n_steps
    mass0 = integrate_cells(initial.density)
    drift_budget = params.grid.ncells * config.newton_tol
    slack_budget = -10.0 * config.newton_tol
    unforced = params.forcing is None

    states = [initial]
    records = []
    prev = initial
    for n in range(1, n_steps + 1):
        state, report = newton_step_solve(params, config, prev)
        state.time = n * params.dt  # keep snapshot times exactly on the uniform grid
        diag = diagnostics(params, prev, state)
        drift = diag.mass - mass0
        records.append(
            StepRecord(
                step=n,
                time=state.time,
                mass=diag.mass,
                mass_drift=drift,
                min_density=diag.min_density,
                energy=diag.energy,
                energy_slack=diag.energy_slack,
                newton_iterations=report.iterations,
                residual_norm=report.residual_norms[-1],
            )
        )
        if enforce_invariants:
            if diag.min_density <= 0:
                raise InvariantViolation(
                    f"step {n}: nonpositive density {diag.min_density:.3e}"
                )
            if abs(drift) > drift_budget:
                raise InvariantViolation(
                    f"step {n}: mass drift {drift:.3e} exceeds budget {drift_budget:.3e}"
                )
            if unforced and diag.energy_slack < slack_budget:
                raise InvariantViolation(
                    f"step {n}: energy slack {diag.energy_slack:.3e} below {slack_budget:.3e}"
                )
        if n % snapshot_stride == 0 or n == n_steps:
            states.append(state)
        prev = state
    return SimulationResult(states=states, records=records, final=prev)
