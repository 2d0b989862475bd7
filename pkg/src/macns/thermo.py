"""Isentropic pressure law and the energy functionals built on it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .fields import CellField, State, cell_average_velocity, same_grid


@dataclass(frozen=True)
class GasLaw:
    """Pressure law p(rho) = a rho^gamma with a > 0, gamma > 1."""

    a: float
    gamma: float

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigurationError(f"pressure coefficient must be positive, got a={self.a}")
        if not self.gamma > 1:
            raise ConfigurationError(f"adiabatic exponent must exceed 1, got gamma={self.gamma}")


def pressure(law: GasLaw, rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError("pressure evaluated at negative density")
    return law.a * rho**law.gamma


def pressure_derivative(law: GasLaw, rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError("pressure derivative evaluated at negative density")
    return law.a * law.gamma * rho ** (law.gamma - 1.0)


def helmholtz(law: GasLaw, rho):
    """Pressure potential H(rho) = a (rho^gamma - rho)/(gamma - 1).

    Normalized so H(1) = 0; satisfies rho H'(rho) - H(rho) = p(rho) and
    H''(rho) = p'(rho)/rho.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise DomainError("pressure potential evaluated at negative density")
    return law.a * (rho**law.gamma - rho) / (law.gamma - 1.0)


def helmholtz_derivative(law: GasLaw, rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("pressure potential derivative needs positive density")
    return law.a * (law.gamma * rho ** (law.gamma - 1.0) - 1.0) / (law.gamma - 1.0)


def kinetic_energy(s: State) -> float:
    """h^d sum of (1/2) rho |ubar|^2 over the cells."""
    g = s.grid
    ubar = cell_average_velocity(s.velocity)
    speed2 = sum(c.values**2 for c in ubar)
    return g.h**g.d * float(np.sum(0.5 * s.density.values * speed2))


def total_energy(law: GasLaw, s: State) -> float:
    """Kinetic plus internal energy of a discrete state."""
    g = s.grid
    internal = g.h**g.d * float(np.sum(helmholtz(law, s.density.values)))
    return kinetic_energy(s) + internal


def relative_energy(law: GasLaw, s: State, ref_density: CellField, ref_velocity) -> float:
    """Distance of a state to a positive reference pair (r, U).

    `ref_velocity` is the reference velocity at cell centers, given as d
    cell fields (or an array of shape (d, ncells)).  Nonnegative for any
    admissible arguments, zero only at the reference itself.
    """
    g = same_grid(s.density, ref_density)
    if isinstance(ref_velocity, np.ndarray):
        refv = ref_velocity
    else:
        refv = np.stack([c.values for c in ref_velocity])
    if refv.shape != (g.d, g.ncells):
        raise ValueError(f"reference velocity shape {refv.shape} != {(g.d, g.ncells)}")

    rho = s.density.values
    r = ref_density.values
    if np.any(r <= 0):
        raise DomainError("reference density must be positive")
    ubar = np.stack([c.values for c in cell_average_velocity(s.velocity)])

    kin = 0.5 * rho * np.sum((ubar - refv) ** 2, axis=0)
    pot = helmholtz(law, rho) - helmholtz_derivative(law, r) * (rho - r) - helmholtz(law, r)
    return g.h**g.d * float(np.sum(kin + pot))
