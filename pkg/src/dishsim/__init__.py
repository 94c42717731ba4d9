"""Deterministic simulator for pressure-repelled cell populations in a dish.

Two competing cell densities grow logistically and push each other apart
down the gradient of a shared, screened pressure field.  The package covers
the finite-volume solver on a 1D interval or the unit disk, the well-mixed
ODE companion model, characteristic-path verification tools, reproducible
stochastic seeding, and logistic growth-curve fitting, all behind a
file-driven command line (``dishsim``).
"""

from __future__ import annotations

__version__ = "0.1.0"

from .grid import Grid, GridSpec, build_grid
from .kinetics import EquilibriumReport, KineticParams, classify, ode_integrate
from .simulator import MetricsRow, Simulation, SimSettings, SimState

__all__ = [
    "Grid", "GridSpec", "build_grid",
    "EquilibriumReport", "KineticParams", "classify", "ode_integrate",
    "MetricsRow", "Simulation", "SimSettings", "SimState",
    "__version__",
]
