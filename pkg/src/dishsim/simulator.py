"""Time stepping for the two-species repulsion model.

One step, at pre-step densities throughout:

  1. solve the screened pressure equation from the total density;
  2. pick dt: the dimension-scaled CFL bound, a reaction bound keeping
     per-capita growth increments below 10%, the configured dt_max, and any
     caller cap (used to land exactly on output times);
  3. advect each species down the shared pressure gradient with its own
     mobility and add dt * density * rate;
  4. zero out rounding-level negative densities (beyond -1e-14 is a scheme
     failure and raises).

run() drives steps to t_end, emitting metrics rows on a fixed cadence and
optional callbacks per frame (for history capture) and per snapshot time.
The mass-conservation residual reported in metrics is the actual total mass
minus the mass the reaction term itself injected, relative to the initial
mass, so pure-transport runs read their conservation drift directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import elliptic, transport
from .errors import ConfigError, StabilityError
from .grid import Grid
from .kinetics import KineticParams

_CLAMP_LIMIT = 1e-14
_TIME_EPS = 1e-9


@dataclass(frozen=True)
class SimSettings:
    """Run-control knobs independent of geometry and kinetics."""

    t_end: float
    cfl: float = 0.45
    dt_max: float = 0.01
    elliptic_rel_tol: float = 1e-11
    output_every: float = 0.05
    snapshot_every: float | None = None

    def __post_init__(self):
        if not (self.t_end > 0.0 and np.isfinite(self.t_end)):
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if not (0.0 < self.cfl <= 1.0):
            raise ConfigError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not (self.dt_max > 0.0 and np.isfinite(self.dt_max)):
            raise ConfigError(f"dt_max must be positive, got {self.dt_max}")
        if not (0.0 < self.elliptic_rel_tol <= 1e-4):
            raise ConfigError("elliptic_rel_tol must lie in (0, 1e-4]")
        if not (self.output_every > 0.0):
            raise ConfigError("output_every must be positive")
        if self.snapshot_every is not None and not (self.snapshot_every > 0.0):
            raise ConfigError("snapshot_every must be positive when set")


@dataclass
class SimState:
    """Densities at one instant; pressure is filled in once solved."""

    t: float
    u1: np.ndarray
    u2: np.ndarray
    pressure: np.ndarray | None = None


@dataclass(frozen=True)
class MetricsRow:
    """One line of the run log."""

    t: float
    mass1: float
    mass2: float
    fraction1: float
    fraction2: float
    overlap: float
    mass_residual: float


class Simulation:
    """Grid + kinetics + run controls, with the operator assembled once."""

    def __init__(self, grid: Grid, params: KineticParams, settings: SimSettings):
        self.grid = grid
        self.params = params
        self.settings = settings
        self.operator = elliptic.assemble(grid, params.screening)
        self.clamp_max = 0.0            # largest negative excursion zeroed so far
        self.mean_residual_max = 0.0    # worst relative mean-preservation slip
        self._warm = None

    # -- pressure ----------------------------------------------------------
    def pressure(self, state: SimState) -> np.ndarray:
        """Pressure at state's time, warm-started from the previous solve."""
        if state.pressure is not None:
            return state.pressure
        total = state.u1 + state.u2
        p = elliptic.solve(self.operator, total,
                           rel_tol=self.settings.elliptic_rel_tol, x0=self._warm)
        self._warm = p
        state.pressure = p
        scale = float(np.add.reduce(np.abs(total)))
        if scale > 0.0:
            slip = abs(float(np.add.reduce(p - total))) / scale
            self.mean_residual_max = max(self.mean_residual_max, slip)
        return p

    # -- stepping ----------------------------------------------------------
    def _clamped(self, u: np.ndarray) -> np.ndarray:
        worst = -float(u.min(initial=0.0))
        if worst > _CLAMP_LIMIT:
            raise StabilityError(
                f"density went negative by {worst:.3e}, beyond rounding noise"
            )
        if worst > 0.0:
            self.clamp_max = max(self.clamp_max, worst)
            return np.maximum(u, 0.0)
        return u

    def step(self, state: SimState, dt_cap: float = np.inf) -> SimState:
        """Advance one step; dt_cap additionally bounds the step length."""
        p = self.pressure(state)
        v = transport.face_velocities(p, self.grid)
        s = self.settings
        dt = transport.cfl_dt(v, max(self.params.dispersal), self.grid.dx,
                              s.cfl, self.grid.dimension, s.dt_max)
        r1 = self.params.rate(0, state.u1, state.u2)
        r2 = self.params.rate(1, state.u1, state.u2)
        rate_scale = max(float(np.max(np.abs(r1))), float(np.max(np.abs(r2))))
        if rate_scale > 0.0:
            dt = min(dt, 0.1 / rate_scale)
        dt = min(dt, dt_cap)
        if not (dt > 0.0 and np.isfinite(dt)):
            raise StabilityError(f"step collapsed to dt={dt}")

        u1 = transport.advect(state.u1, v, self.params.dispersal1, dt, self.grid)
        u2 = transport.advect(state.u2, v, self.params.dispersal2, dt, self.grid)
        u1 = self._clamped(u1 + dt * state.u1 * r1)
        u2 = self._clamped(u2 + dt * state.u2 * r2)
        return SimState(state.t + dt, u1, u2)

    # -- full runs ---------------------------------------------------------
    def _metrics(self, state: SimState, mass0: float, reacted: float) -> MetricsRow:
        m1 = self.grid.integrate(state.u1)
        m2 = self.grid.integrate(state.u2)
        total = m1 + m2
        f1 = m1 / total if total > 0.0 else 0.0
        f2 = m2 / total if total > 0.0 else 0.0
        overlap = self.grid.integrate(state.u1 * state.u2)
        residual = (total - mass0 - reacted) / mass0 if mass0 > 0.0 else 0.0
        return MetricsRow(state.t, m1, m2, f1, f2, overlap, residual)

    def run(self, u1: np.ndarray, u2: np.ndarray, on_metrics=None,
            on_snapshot=None, on_frame=None):
        """Integrate from t=0 to t_end; returns (final state, metrics rows).

        on_metrics(row) fires per cadence row, on_snapshot(state) at t=0,
        snapshot cadence times, and t_end (pressure filled in), and
        on_frame(state) after every pressure solve, i.e. once per step plus
        the final state.
        """
        u1 = np.asarray(u1, dtype=float)
        u2 = np.asarray(u2, dtype=float)
        n = self.grid.n_cells
        if u1.shape != (n,) or u2.shape != (n,):
            raise ConfigError(f"initial fields must have shape ({n},)")
        if np.any(u1 < 0.0) or np.any(u2 < 0.0) or not (
                np.all(np.isfinite(u1)) and np.all(np.isfinite(u2))):
            raise ConfigError("initial densities must be finite and >= 0")

        s = self.settings
        state = SimState(0.0, u1.copy(), u2.copy())
        mass0 = self.grid.integrate(u1) + self.grid.integrate(u2)
        reacted = 0.0
        rows = [self._metrics(state, mass0, reacted)]
        if on_metrics:
            on_metrics(rows[0])
        out_k = 1
        snap_k = 0
        snap_due = 0.0 if on_snapshot else np.inf

        while state.t < s.t_end - _TIME_EPS:
            self.pressure(state)
            if state.t >= snap_due - _TIME_EPS:
                on_snapshot(state)
                snap_k += 1
                snap_due = (np.inf if s.snapshot_every is None
                            else snap_k * s.snapshot_every)
            if on_frame:
                on_frame(state)

            out_due = out_k * s.output_every
            horizon = min(out_due, snap_due, s.t_end)
            pre = state
            state = self.step(state, dt_cap=horizon - state.t)
            dt = state.t - pre.t
            reacted += dt * (
                self.grid.integrate(pre.u1 * self.params.rate(0, pre.u1, pre.u2))
                + self.grid.integrate(pre.u2 * self.params.rate(1, pre.u1, pre.u2)))
            if state.t >= out_due - _TIME_EPS or state.t >= s.t_end - _TIME_EPS:
                row = self._metrics(state, mass0, reacted)
                rows.append(row)
                if on_metrics:
                    on_metrics(row)
                while out_k * s.output_every <= state.t + _TIME_EPS:
                    out_k += 1

        self.pressure(state)
        if on_snapshot:
            on_snapshot(state)
        if on_frame:
            on_frame(state)
        return state, rows
