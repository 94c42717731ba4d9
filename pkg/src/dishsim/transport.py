"""Upwind finite-volume transport of cell densities down pressure gradients.

Cells drift with velocity proportional to minus the pressure gradient, so
each interior face carries the velocity -(p_upper - p_lower)/dx and an upwind
mass flux.  The conservative update subtracts the flux divergence; since
boundary faces simply do not exist, total mass over the domain telescopes to
machine precision.  Positivity of densities holds under the dimension-scaled
CFL bound computed by cfl_dt.
"""

from __future__ import annotations

import numpy as np

from .errors import StabilityError
from .grid import Grid


def face_velocities(pressure: np.ndarray, grid: Grid) -> np.ndarray:
    """Unit-mobility drift velocity on every interior face."""
    p = np.asarray(pressure, dtype=float)
    return -(p[grid.face_b] - p[grid.face_a]) / grid.dx


def upwind_flux(velocity, density_lower, density_upper):
    """Donor-cell flux for a face: the side the velocity comes from wins.

    Positive velocity points from the lower cell to the upper cell, so it
    carries the lower cell's density; negative velocity carries the upper's.
    Accepts scalars or arrays elementwise.
    """
    v = np.asarray(velocity, dtype=float)
    flux = np.where(v >= 0.0, v * density_lower, v * density_upper)
    return flux if flux.ndim else float(flux)


def cfl_dt(velocities: np.ndarray, mobility_max: float, dx: float,
           cfl: float, dimension: int, dt_max: float) -> float:
    """Largest stable step for the upwind update, capped at dt_max.

    The 1/dimension factor keeps the donor-cell update a convex combination
    even when a cell loses mass through faces on every axis at once.
    """
    if not 0.0 < cfl <= 1.0:
        raise ValueError(f"cfl must lie in (0, 1], got {cfl}")
    speed = float(np.max(np.abs(velocities))) if len(velocities) else 0.0
    if speed <= 0.0 or mobility_max <= 0.0:
        return dt_max
    return min(dt_max, cfl * dx / (dimension * mobility_max * speed))


def advect(density: np.ndarray, velocities: np.ndarray, mobility: float,
           dt: float, grid: Grid) -> np.ndarray:
    """One conservative upwind step: density - dt*mobility/dx * div(flux).

    Reaction terms are not applied here; callers add them on top of the
    transported field.  Rejects steps that violate even the loosest
    single-face CFL bound.
    """
    u = np.asarray(density, dtype=float)
    speed = float(np.max(np.abs(velocities))) if len(velocities) else 0.0
    if dt * mobility * speed / grid.dx > 1.0:
        raise StabilityError(
            f"transport step dt={dt:.3e} exceeds the CFL bound "
            f"{grid.dx / (mobility * speed):.3e}"
        )
    flux = upwind_flux(velocities, u[grid.face_a], u[grid.face_b])
    divergence = (np.bincount(grid.face_a, weights=flux, minlength=grid.n_cells)
                  - np.bincount(grid.face_b, weights=flux, minlength=grid.n_cells))
    return u - (mobility * dt / grid.dx) * divergence
