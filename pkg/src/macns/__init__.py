"""Implicit staggered-grid finite differences for compressible isentropic flow.

The package solves the barotropic Navier-Stokes system on the periodic
torus [0,1]^d (d = 2, 3) with a fully implicit upwind scheme: density on
cells, velocity components on their face families, backward Euler in
time, and an h^alpha density regularization.  Discrete summation-by-parts
identities, mass conservation, density positivity, and a per-step energy
inequality hold exactly (up to solver tolerances) and are enforced at run
time; `analysis` measures errors in the relative-energy and companion
norms and reports observed convergence orders.
"""

from .analysis import (
    AnalyticReference,
    ErrorReport,
    RestrictedReference,
    eoc,
    error_norms,
    restrict_cells,
    restrict_faces,
    restrict_reference,
)
from .errors import (
    ConfigurationError,
    DomainError,
    GridMismatchError,
    InvariantViolation,
    LinearBreakdown,
    LinearNonConvergence,
    LinearSolverError,
    SolverFailure,
)
from .experiments import (
    ExperimentResult,
    ManufacturedSolution,
    RunConfig,
    gresho_velocity,
    load_config,
    parse_config,
    run_experiment,
    step_counts,
)
from .fields import (
    CellField,
    FaceField,
    State,
    cell_average_velocity,
    face_average,
    integrate_cells,
    integrate_faces,
    project_cells,
    project_faces,
)
from .grid import StaggeredGrid, build_grid
from .operators import (
    div_cells,
    grad_bidual,
    grad_edges,
    identity_residuals,
    laplace_cells,
    laplace_faces,
    upwind_divergence,
    upwind_flux,
)
from .scheme import (
    SchemeParams,
    StepDiagnostics,
    assemble_jacobian,
    diagnostics,
    residual_density,
    residual_momentum,
    residual_vector,
)
from .simulate import SimulationResult, StepRecord, simulate
from .solver import NewtonReport, SolverConfig, linear_solve, newton_step_solve
from .thermo import GasLaw, helmholtz, pressure, relative_energy, total_energy

__version__ = "0.1.0"
