"""Built-in experiments, run configuration, and the sweep driver.

Two canonical 2-d setups are provided: a manufactured near-steady flow
with a closed-form forcing (exact errors, EOC in all five norms) and the
Gresho vortex (unforced; errors against a restricted fine-grid run).
`run_experiment` takes a validated RunConfig, runs the requested
resolution sweep, and writes the error table plus one diagnostic log per
run into the output directory.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Optional

import numpy as np

from . import io as mio
from .analysis import (
    AnalyticReference,
    ErrorReport,
    RestrictedReference,
    eoc,
    error_norms,
    restrict_reference,
)
from .errors import ConfigurationError
from .fields import State, project_cells, project_faces
from .grid import build_grid
from .scheme import SchemeParams
from .simulate import SimulationResult, simulate
from .solver import SolverConfig
from .thermo import GasLaw


class ManufacturedSolution:
    """Divergence-free decaying velocity over constant density, with the
    forcing that makes the pair an exact solution of the continuous system.

    velocity = (sin(2 pi x) cos(2 pi y), -cos(2 pi x) sin(2 pi y)) e^{-kt};
    with density 1 the momentum forcing reduces to
    f = -k U + (U . grad) U + 8 pi^2 mu U, all in closed form.
    """

    def __init__(self, mu: float, decay_rate: float = 0.01):
        self.mu = mu
        self.k = decay_rate

    def density(self, t, pts):
        return np.ones(len(pts))

    def velocity(self, t, pts):
        x, y = pts[:, 0], pts[:, 1]
        damp = math.exp(-self.k * t)
        return damp * np.stack(
            [
                np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y),
                -np.cos(2 * np.pi * x) * np.sin(2 * np.pi * y),
            ],
            axis=1,
        )

    def forcing(self, t, pts):
        x, y = pts[:, 0], pts[:, 1]
        damp = math.exp(-self.k * t)
        lin = 8 * np.pi**2 * self.mu - self.k
        conv = np.pi * damp**2
        return np.stack(
            [
                lin * damp * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y)
                + conv * np.sin(4 * np.pi * x),
                -lin * damp * np.cos(2 * np.pi * x) * np.sin(2 * np.pi * y)
                + conv * np.sin(4 * np.pi * y),
            ],
            axis=1,
        )


GRESHO_RADIUS = 0.2
GRESHO_CENTER = (0.5, 0.5)


def gresho_velocity(pts: np.ndarray, gamma: float) -> np.ndarray:
    """Initial Gresho vortex velocity, azimuthal speed scaled by sqrt(gamma).

    The angular factor u_phi / R is piecewise smooth and bounded, so the
    center needs no special casing.
    """
    x = pts[:, 0] - GRESHO_CENTER[0]
    y = pts[:, 1] - GRESHO_CENTER[1]
    radius = np.hypot(x, y)
    angular = np.zeros_like(radius)
    inner = radius < GRESHO_RADIUS / 2
    ring = (radius >= GRESHO_RADIUS / 2) & (radius < GRESHO_RADIUS)
    angular[inner] = 2.0 / GRESHO_RADIUS
    angular[ring] = 2.0 * (1.0 / radius[ring] - 1.0 / GRESHO_RADIUS)
    angular *= math.sqrt(gamma)
    return np.stack([angular * y, -angular * x], axis=1)


# -- configuration ---------------------------------------------------------

_TOP_KEYS = {
    "experiment", "d", "resolutions", "gamma", "a", "mu", "lambda", "alpha",
    "c_dt", "t_end", "decay_rate", "n_fine", "solver", "output",
    "initial_density", "initial_velocity",
}
_OUTPUT_KEYS = {"dump_fields", "dump_vtk"}


@dataclass
class RunConfig:
    experiment: str
    d: int
    resolutions: list
    gamma: float
    mu: float
    t_end: float
    a: float = 1.0
    lam: float = 0.0
    alpha: float = 1.6
    c_dt: float = 1.0
    decay_rate: float = 0.01
    n_fine: Optional[int] = None
    initial_density: Optional[str] = None
    initial_velocity: Optional[str] = None
    solver: SolverConfig = dc_field(default_factory=SolverConfig)
    dump_fields: bool = False
    dump_vtk: bool = False
    raw: dict = dc_field(default_factory=dict)

    @property
    def law(self) -> GasLaw:
        return GasLaw(a=self.a, gamma=self.gamma)

    @property
    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigurationError(message)


def parse_config(data: dict) -> RunConfig:
    """Validate a configuration mapping (e.g. parsed JSON) into a RunConfig."""
    _require(isinstance(data, dict), "configuration must be a mapping")
    unknown = set(data) - _TOP_KEYS
    _require(not unknown, f"unknown configuration keys: {sorted(unknown)}")
    for key in ("experiment", "d", "resolutions", "gamma", "mu", "t_end"):
        _require(key in data, f"missing required key {key!r}")

    experiment = data["experiment"]
    _require(
        experiment in ("manufactured", "gresho", "custom"),
        f"unknown experiment {experiment!r}",
    )
    d = data["d"]
    _require(d in (2, 3), f"d must be 2 or 3, got {d!r}")
    if experiment in ("manufactured", "gresho"):
        _require(d == 2, f"the {experiment} experiment is defined in d=2")

    res = data["resolutions"]
    if isinstance(res, int):
        res = [res]
    _require(
        isinstance(res, list) and res and all(isinstance(n, int) and n >= 2 for n in res),
        "resolutions must be a nonempty list of integers >= 2",
    )
    for a, b in zip(res, res[1:]):
        _require(b > a and b % a == 0, f"resolutions must ascend and divide: {a} -> {b}")

    numbers = {
        "gamma": data["gamma"], "mu": data["mu"], "t_end": data["t_end"],
        "a": data.get("a", 1.0), "lambda": data.get("lambda", 0.0),
        "alpha": data.get("alpha", 1.6), "c_dt": data.get("c_dt", 1.0),
        "decay_rate": data.get("decay_rate", 0.01),
    }
    for key, val in numbers.items():
        _require(isinstance(val, (int, float)) and not isinstance(val, bool),
                 f"{key} must be a number, got {val!r}")
    _require(numbers["gamma"] > 1, "gamma must exceed 1")
    _require(numbers["a"] > 0, "a must be positive")
    _require(numbers["mu"] > 0, "mu must be positive")
    _require(numbers["mu"] + numbers["lambda"] >= 0, "mu + lambda must be nonnegative")
    _require(numbers["t_end"] > 0, "t_end must be positive")
    _require(numbers["c_dt"] > 0, "c_dt must be positive")

    n_fine = data.get("n_fine")
    if experiment == "gresho":
        _require(isinstance(n_fine, int), "gresho needs an integer n_fine")
        _require(n_fine > res[-1] and n_fine % res[-1] == 0,
                 f"n_fine={n_fine} must be a proper multiple of the finest sweep resolution {res[-1]}")
    else:
        _require(n_fine is None, "n_fine only applies to the gresho experiment")

    init_rho = data.get("initial_density")
    init_u = data.get("initial_velocity")
    if experiment == "custom":
        _require(isinstance(init_rho, str) and isinstance(init_u, str),
                 "custom runs need initial_density and initial_velocity paths")
        _require(len(res) == 1, "custom runs take a single resolution")
    else:
        _require(init_rho is None and init_u is None,
                 "initial field paths only apply to custom runs")

    solver_data = data.get("solver", {})
    _require(isinstance(solver_data, dict), "solver section must be a mapping")
    known = set(SolverConfig.__dataclass_fields__)
    unknown = set(solver_data) - known
    _require(not unknown, f"unknown solver keys: {sorted(unknown)}")
    solver = SolverConfig(**solver_data)

    output = data.get("output", {})
    _require(isinstance(output, dict), "output section must be a mapping")
    unknown = set(output) - _OUTPUT_KEYS
    _require(not unknown, f"unknown output keys: {sorted(unknown)}")

    return RunConfig(
        experiment=experiment,
        d=d,
        resolutions=list(res),
        gamma=float(numbers["gamma"]),
        mu=float(numbers["mu"]),
        t_end=float(numbers["t_end"]),
        a=float(numbers["a"]),
        lam=float(numbers["lambda"]),
        alpha=float(numbers["alpha"]),
        c_dt=float(numbers["c_dt"]),
        decay_rate=float(numbers["decay_rate"]),
        n_fine=n_fine,
        initial_density=init_rho,
        initial_velocity=init_u,
        solver=solver,
        dump_fields=bool(output.get("dump_fields", False)),
        dump_vtk=bool(output.get("dump_vtk", False)),
        raw=data,
    )


def load_config(path) -> RunConfig:
    """Parse and validate a JSON configuration file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read configuration {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"configuration {path} is not valid JSON: {exc}") from exc
    return parse_config(data)


def step_counts(cfg: RunConfig) -> dict:
    """Steps per resolution: dt tracks c_dt * h and snapshot times nest.

    The coarsest level takes N0 = ceil(t_end/(c_dt h0)) equal steps; finer
    levels scale N0 proportionally to n, so dt halves exactly when n
    doubles and every coarse snapshot time is hit by the finer runs.
    """
    n0 = cfg.resolutions[0]
    base = max(1, math.ceil(cfg.t_end * n0 / cfg.c_dt - 1e-9))
    counts = {n: base * (n // n0) for n in cfg.resolutions}
    if cfg.n_fine is not None:
        counts[cfg.n_fine] = base * (cfg.n_fine // n0)
    return counts


# -- the sweep driver ------------------------------------------------------


@dataclass
class RunSummary:
    n: int
    h: float
    dt: float
    n_steps: int
    records: list
    errors: Optional[ErrorReport]
    log_path: Optional[Path]


@dataclass
class ExperimentResult:
    config_hash: str
    runs: list
    reference_run: Optional[RunSummary]
    table_path: Optional[Path]
    table_rows: list


def _build_params(cfg: RunConfig, n: int, dt: float, forcing=None) -> SchemeParams:
    return SchemeParams(
        grid=build_grid(cfg.d, n),
        law=cfg.law,
        mu=cfg.mu,
        lam=cfg.lam,
        alpha=cfg.alpha,
        dt=dt,
        t_end=cfg.t_end,
        forcing=forcing,
    )


def _dump_final(cfg: RunConfig, out_dir: Path, tag: str, state: State) -> None:
    if cfg.dump_fields:
        mio.save_cell_field(state.density, out_dir / f"density_{tag}.csv")
        mio.save_face_field(state.velocity, out_dir / f"velocity_{tag}.csv")
    if cfg.dump_vtk:
        mio.write_vtk(out_dir / f"fields_{tag}.vtk", state, cfg.law)


def _error_row(report: ErrorReport, previous: Optional[ErrorReport]) -> dict:
    row = {"h": report.h, "dt": report.dt, "gamma": report.gamma}
    prev_vals = previous.values() if previous else {}
    for key, val in report.values().items():
        row[key] = val
        row["eoc_" + key[2:]] = eoc(prev_vals[key], val) if previous else None
    return row


def run_experiment(cfg: RunConfig, out_dir) -> ExperimentResult:
    """Run the configured sweep and write table + logs under `out_dir`."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    counts = step_counts(cfg)

    if cfg.experiment == "custom":
        return _run_custom(cfg, out_dir, counts)

    if cfg.experiment == "manufactured":
        solution = ManufacturedSolution(mu=cfg.mu, decay_rate=cfg.decay_rate)
        forcing = solution.forcing
        reference_for = lambda grid: AnalyticReference(grid, solution.density, solution.velocity)

        def initial_for(grid):
            return State(
                density=project_cells(grid, lambda pts: solution.density(0.0, pts)),
                velocity=project_faces(grid, lambda pts: solution.velocity(0.0, pts)),
            )

        reference_run = None
    else:  # gresho
        forcing = None

        def initial_for(grid):
            return State(
                density=project_cells(grid, lambda pts: np.ones(len(pts))),
                velocity=project_faces(grid, lambda pts: gresho_velocity(pts, cfg.gamma)),
            )

        n_fine = cfg.n_fine
        dt_fine = cfg.t_end / counts[n_fine]
        stride = counts[n_fine] // counts[cfg.resolutions[-1]]
        params = _build_params(cfg, n_fine, dt_fine)
        fine_grid = params.grid
        result = simulate(params, cfg.solver, initial_for(fine_grid), snapshot_stride=stride)
        log_path = out_dir / "runlog_reference.csv"
        mio.write_run_log(log_path, result.records)
        reference_run = RunSummary(
            n=n_fine, h=fine_grid.h, dt=dt_fine, n_steps=counts[n_fine],
            records=result.records, errors=None, log_path=log_path,
        )
        fine_states = result.states
        reference_for = lambda grid: restrict_reference(fine_states, grid)
        _dump_final(cfg, out_dir, f"n{n_fine}_reference", result.final)

    runs = []
    rows = []
    prev_report = None
    for n in cfg.resolutions:
        dt = cfg.t_end / counts[n]
        params = _build_params(cfg, n, dt, forcing=forcing)
        grid = params.grid
        result = simulate(params, cfg.solver, initial_for(grid))
        report = error_norms(result.states, reference_for(grid), cfg.law, dt)
        rows.append(_error_row(report, prev_report))
        prev_report = report
        log_path = out_dir / f"runlog_n{n}.csv"
        mio.write_run_log(log_path, result.records)
        _dump_final(cfg, out_dir, f"n{n}", result.final)
        runs.append(
            RunSummary(
                n=n, h=grid.h, dt=dt, n_steps=counts[n],
                records=result.records, errors=report, log_path=log_path,
            )
        )

    table_path = out_dir / "eoc.csv"
    mio.write_error_table(table_path, rows, cfg.config_hash)
    return ExperimentResult(
        config_hash=cfg.config_hash,
        runs=runs,
        reference_run=reference_run,
        table_path=table_path,
        table_rows=rows,
    )


def _run_custom(cfg: RunConfig, out_dir: Path, counts: dict) -> ExperimentResult:
    n = cfg.resolutions[0]
    dt = cfg.t_end / counts[n]
    params = _build_params(cfg, n, dt)
    grid = params.grid
    initial = State(
        density=mio.load_cell_field(cfg.initial_density, grid),
        velocity=mio.load_face_field(cfg.initial_velocity, grid),
    )
    result = simulate(params, cfg.solver, initial)
    log_path = out_dir / f"runlog_n{n}.csv"
    mio.write_run_log(log_path, result.records)
    _dump_final(cfg, out_dir, f"n{n}", result.final)
    run = RunSummary(
        n=n, h=grid.h, dt=dt, n_steps=counts[n],
        records=result.records, errors=None, log_path=log_path,
    )
    return ExperimentResult(
        config_hash=cfg.config_hash,
        runs=[run],
        reference_run=None,
        table_path=None,
        table_rows=[],
    )
