"""Characteristic paths of the transport field, for verifying runs.

A recorded run (densities and pressure on a sequence of frame times) defines
a velocity field: minus the mobility-scaled pressure gradient, linear in time
between frames, componentwise (bi)linear in space between face values, and
zero on missing boundary faces.  Cells of the continuum model ride exactly
along its characteristics, and two exact identities make good diagnostics:

* the flow's volume distortion is exp(mobility * integral of the velocity
  divergence along the path), which a finite-difference Jacobian of traced
  neighbors must reproduce; on the cells of a recorded run the divergence
  equals (total density - pressure) / screening exactly, so this is the
  density-pressure compression integral in disguise;
* the density riding a path evolves by the accumulated per-capita growth
  minus the same compression integral, which the recorded end-state density
  must reproduce.

Tracing is RK2 (midpoint) with at least four substeps per frame interval and
never more than half a cell of motion per substep; paths are confined to the
domain, with overshoot beyond 1e-8 treated as a failure rather than silently
projected back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalError, StabilityError
from .grid import Grid
from .kinetics import KineticParams
from .simulator import SimState


@dataclass
class PressureHistory:
    """Frames of one run: times, per-species densities, pressure."""

    grid: Grid
    times: np.ndarray                 # (n_frames,) strictly increasing
    densities: tuple                  # per species: (n_frames, n_cells)
    pressures: np.ndarray             # (n_frames, n_cells)
    params: KineticParams | None = None
    _faces: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or self.times.size == 0:
            raise ConfigError("history needs at least one frame")
        if np.any(np.diff(self.times) <= 0.0):
            raise ConfigError("history frame times must be strictly increasing")
        n = self.grid.n_cells
        for u in (*self.densities, self.pressures):
            if u.shape != (self.times.size, n):
                raise ConfigError("history arrays must be (n_frames, n_cells)")

    @property
    def n_frames(self) -> int:
        return self.times.size

    def span(self) -> tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def face_grids(self, k: int):
        """Dense unit-mobility face velocities of frame k, plus their max."""
        if k not in self._faces:
            g = self.grid
            m = g.resolution
            p = self.pressures[k]
            v = -(p[g.face_b] - p[g.face_a]) / g.dx
            grids = []
            if g.dimension == 1:
                gx = np.zeros(m + 1)
                gx[g.cell_ij[g.face_a, 0] + 1] = v
                grids.append(gx)
            else:
                ij = g.cell_ij
                sel = g.face_axis == 0
                gx = np.zeros((m + 1, m))
                gx[ij[g.face_a[sel], 0] + 1, ij[g.face_a[sel], 1]] = v[sel]
                sel = g.face_axis == 1
                gy = np.zeros((m, m + 1))
                gy[ij[g.face_a[sel], 0], ij[g.face_a[sel], 1] + 1] = v[sel]
                grids.extend((gx, gy))
            speed = max(float(np.max(np.abs(a))) if a.size else 0.0 for a in grids)
            self._faces[k] = (grids, speed)
        return self._faces[k]

    def divergence_grids(self, k: int):
        """Per-axis derivative fields of frame k's interpolated velocity.

        Within a cell the x-component of the interpolant has constant
        x-derivative (the face difference over dx) and, in 2D, varies
        linearly between cell rows; same for y with the roles swapped.
        These dense arrays hold the face differences per structured cell,
        valid over the whole bounding square because missing faces carry
        zero velocity.
        """
        key = ("div", k)
        if key not in self._faces:
            grids, _ = self.face_grids(k)
            dx = self.grid.dx
            if self.grid.dimension == 1:
                self._faces[key] = (np.diff(grids[0]) / dx,)
            else:
                self._faces[key] = (np.diff(grids[0], axis=0) / dx,
                                    np.diff(grids[1], axis=1) / dx)
        return self._faces[key]

    def bracket(self, t: float) -> tuple[int, float]:
        """Frame interval index and interpolation weight for time t."""
        lo, hi = self.span()
        if not (lo - 1e-9 <= t <= hi + 1e-9):
            raise ConfigError(f"time {t} outside recorded span [{lo}, {hi}]")
        if self.n_frames == 1:
            return 0, 0.0
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        k = min(max(k, 0), self.n_frames - 2)
        w = (t - self.times[k]) / (self.times[k + 1] - self.times[k])
        return k, float(min(max(w, 0.0), 1.0))


class HistoryRecorder:
    """Frame callback for Simulation.run that accumulates a PressureHistory.

    min_spacing thins the recording: frames closer than that to the last
    kept one are parked in a pending slot, so the first frame and the final
    state offered always make it into the history.
    """

    def __init__(self, grid: Grid, params: KineticParams | None = None,
                 min_spacing: float = 0.0):
        self.grid = grid
        self.params = params
        self.min_spacing = min_spacing
        self._kept: list[tuple] = []
        self._pending: tuple | None = None

    @staticmethod
    def _snap(state: SimState) -> tuple:
        return (state.t, state.u1.copy(), state.u2.copy(), state.pressure.copy())

    def __call__(self, state: SimState):
        if self._kept and state.t < self._kept[-1][0] + self.min_spacing - 1e-12:
            self._pending = self._snap(state)
        else:
            self._kept.append(self._snap(state))
            self._pending = None

    def history(self) -> PressureHistory:
        frames = list(self._kept)
        if self._pending is not None and self._pending[0] > frames[-1][0]:
            frames.append(self._pending)
        return PressureHistory(self.grid, np.array([f[0] for f in frames]),
                               (np.stack([f[1] for f in frames]),
                                np.stack([f[2] for f in frames])),
                               np.stack([f[3] for f in frames]), self.params)


@dataclass
class CharPath:
    """One traced characteristic with its accumulated line integrals.

    compression holds the integral of the unit-mobility velocity divergence
    along the path, which on the cells of a recorded run coincides with
    (total density - pressure) / screening.
    """

    times: np.ndarray            # (n_knots,)
    points: np.ndarray           # (n_knots, dim)
    compression: np.ndarray      # (n_knots,) integral of the velocity divergence
    growth: np.ndarray           # (n_knots, 2) integral of per-capita rate
    mobility: float
    max_overshoot: float

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]


# -- spatial sampling ------------------------------------------------------

def _sample_faces(grid: Grid, grids, points: np.ndarray) -> np.ndarray:
    """(Bi)linear sample of the per-axis face-velocity grids at points."""
    m, dx, length = grid.resolution, grid.dx, grid.length
    out = np.empty_like(points)
    for axis in range(grid.dimension):
        garr = grids[axis]
        s = (points[:, axis] + length) / dx           # face-slot coordinate
        s = np.clip(s, 0.0, m)
        s0 = np.minimum(np.floor(s).astype(int), m - 1)
        fs = s - s0
        if grid.dimension == 1:
            out[:, 0] = (1.0 - fs) * garr[s0] + fs * garr[s0 + 1]
            continue
        other = 1 - axis
        w = (points[:, other] + length) / dx - 0.5    # cell-row coordinate
        w = np.clip(w, 0.0, m - 1.0)
        w0 = np.minimum(np.floor(w).astype(int), m - 2)
        fw = w - w0
        if axis == 0:
            v = ((1 - fs) * (1 - fw) * garr[s0, w0]
                 + fs * (1 - fw) * garr[s0 + 1, w0]
                 + (1 - fs) * fw * garr[s0, w0 + 1]
                 + fs * fw * garr[s0 + 1, w0 + 1])
        else:
            v = ((1 - fs) * (1 - fw) * garr[w0, s0]
                 + fs * (1 - fw) * garr[w0, s0 + 1]
                 + (1 - fs) * fw * garr[w0 + 1, s0]
                 + fs * fw * garr[w0 + 1, s0 + 1])
        out[:, axis] = v
    return out


def sample_cell_field(grid: Grid, flat_field: np.ndarray,
                      points: np.ndarray) -> np.ndarray:
    """Masked (bi)linear interpolation of cell-centered values at points.

    Inactive corner cells drop out of the stencil with their weight
    renormalized away; points whose whole stencil is inactive fall back to
    inverse-distance weights over the surrounding 3x3 block.
    """
    m, dx, length = grid.resolution, grid.dx, grid.length
    q = (points + length) / dx - 0.5
    q = np.clip(q, 0.0, m - 1.0)
    i0 = np.minimum(np.floor(q).astype(int), m - 2)
    f = q - i0

    if grid.dimension == 1:
        u = flat_field
        return (1.0 - f[:, 0]) * u[i0[:, 0]] + f[:, 0] * u[i0[:, 0] + 1]

    imap = grid.index_map
    vals = np.zeros(points.shape[0])
    wsum = np.zeros(points.shape[0])
    for di in (0, 1):
        for dj in (0, 1):
            ci = i0[:, 0] + di
            cj = i0[:, 1] + dj
            w = (f[:, 0] if di else 1.0 - f[:, 0]) * (f[:, 1] if dj else 1.0 - f[:, 1])
            idx = imap[ci, cj]
            ok = idx >= 0
            w = np.where(ok, w, 0.0)
            vals += w * np.where(ok, flat_field[np.maximum(idx, 0)], 0.0)
            wsum += w
    bad = wsum <= 0.0
    if np.any(bad):
        vals[bad] = _sample_fallback(grid, flat_field, points[bad])
        wsum[bad] = 1.0
    return vals / wsum


def _sample_fallback(grid: Grid, flat_field, points) -> np.ndarray:
    # inverse-distance over the 3x3 block around the nearest structured cell
    m, dx, length = grid.resolution, grid.dx, grid.length
    imap = grid.index_map
    out = np.empty(points.shape[0])
    for k, pt in enumerate(points):
        ic = np.clip(np.rint((pt + length) / dx - 0.5).astype(int), 0, m - 1)
        best_val, best_w = 0.0, 0.0
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                ci, cj = ic[0] + di, ic[1] + dj
                if not (0 <= ci < m and 0 <= cj < m):
                    continue
                idx = imap[ci, cj]
                if idx < 0:
                    continue
                center = grid.centers[idx]
                d2 = float(np.add.reduce((center - pt) ** 2))
                w = 1.0 / (d2 + 1e-30)
                best_val += w * flat_field[idx]
                best_w += w
        if best_w <= 0.0:
            raise NumericalError(f"point {tuple(pt)} has no active cells nearby")
        out[k] = best_val / best_w
    return out


# -- velocity and integrand evaluation -------------------------------------

def velocity_at(history: PressureHistory, t: float, points: np.ndarray,
                mobility: float) -> np.ndarray:
    """Velocity of species with the given mobility at time t and points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    k, w = history.bracket(t)
    grids_a, _ = history.face_grids(k)
    va = _sample_faces(history.grid, grids_a, points)
    if w > 0.0:
        grids_b, _ = history.face_grids(k + 1)
        vb = _sample_faces(history.grid, grids_b, points)
        va = (1.0 - w) * va + w * vb
    return mobility * va


def _fields_at(history: PressureHistory, t: float):
    """Time-interpolated flat fields (u1, u2, total - pressure) at time t."""
    k, w = history.bracket(t)
    u1 = history.densities[0][k]
    u2 = history.densities[1][k]
    p = history.pressures[k]
    if w > 0.0:
        u1 = (1.0 - w) * u1 + w * history.densities[0][k + 1]
        u2 = (1.0 - w) * u2 + w * history.densities[1][k + 1]
        p = (1.0 - w) * p + w * history.pressures[k + 1]
    return u1, u2, (u1 + u2) - p


def _rates_at(history: PressureHistory, t: float, points: np.ndarray):
    """The two per-capita rates at (t, points), zero without kinetics."""
    if history.params is None:
        return np.zeros((points.shape[0], 2))
    u1, u2, _ = _fields_at(history, t)
    g = history.grid
    s1 = sample_cell_field(g, u1, points)
    s2 = sample_cell_field(g, u2, points)
    return np.stack([history.params.rate(0, s1, s2),
                     history.params.rate(1, s1, s2)], axis=1)


def _sample_divergence(grid: Grid, dgrids, points: np.ndarray) -> np.ndarray:
    """Exact divergence of the interpolated unit-mobility velocity at points.

    Each per-axis term is constant across the cell along its own axis and
    linear between cell rows along the other, mirroring the interpolant.
    """
    m, dx, length = grid.resolution, grid.dx, grid.length
    if grid.dimension == 1:
        c = np.clip(np.floor((points[:, 0] + length) / dx).astype(int), 0, m - 1)
        return dgrids[0][c]
    out = np.zeros(points.shape[0])
    for axis in (0, 1):
        arr = dgrids[axis]
        c = np.clip(np.floor((points[:, axis] + length) / dx).astype(int),
                    0, m - 1)
        other = 1 - axis
        w = np.clip((points[:, other] + length) / dx - 0.5, 0.0, m - 1.0)
        w0 = np.minimum(np.floor(w).astype(int), m - 2)
        fw = w - w0
        if axis == 0:
            out += (1.0 - fw) * arr[c, w0] + fw * arr[c, w0 + 1]
        else:
            out += (1.0 - fw) * arr[w0, c] + fw * arr[w0 + 1, c]
    return out


def _divergence_mean(grid: Grid, div_a, div_b, wa: float, wb: float,
                     pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    """Mean velocity divergence over one substep, per path.

    Motion is taken as the straight chord pa -> pb with the frame weight
    sliding from wa to wb.  In 1D the integrand is constant per cell column
    and linear in time, so splitting the chord at the single possible face
    crossing and applying the midpoint rule per piece integrates it exactly.
    In 2D a three-point Simpson sample along the chord is used instead.
    """
    if grid.dimension == 1:
        m, dx, length = grid.resolution, grid.dx, grid.length
        a, b = div_a[0], div_b[0]
        xa, xb = pa[:, 0], pb[:, 0]
        ca = np.clip(np.floor((xa + length) / dx).astype(int), 0, m - 1)
        cb = np.clip(np.floor((xb + length) / dx).astype(int), 0, m - 1)
        move = xb - xa
        face = -length + np.maximum(ca, cb) * dx
        safe = np.where(move == 0.0, 1.0, move)
        s = np.where(ca != cb, (face - xa) / safe, 1.0)
        s = np.clip(s, 0.0, 1.0)
        wm1 = wa + 0.5 * s * (wb - wa)
        wm2 = wa + 0.5 * (1.0 + s) * (wb - wa)
        g1 = (1.0 - wm1) * a[ca] + wm1 * b[ca]
        g2 = (1.0 - wm2) * a[cb] + wm2 * b[cb]
        return s * g1 + (1.0 - s) * g2
    pm = 0.5 * (pa + pb)
    wm = 0.5 * (wa + wb)
    ga = ((1.0 - wa) * _sample_divergence(grid, div_a, pa)
          + wa * _sample_divergence(grid, div_b, pa))
    gm = ((1.0 - wm) * _sample_divergence(grid, div_a, pm)
          + wm * _sample_divergence(grid, div_b, pm))
    gb = ((1.0 - wb) * _sample_divergence(grid, div_a, pb)
          + wb * _sample_divergence(grid, div_b, pb))
    return (ga + 4.0 * gm + gb) / 6.0


# -- tracing ---------------------------------------------------------------

def _confine(grid: Grid, pts: np.ndarray) -> float:
    """Clamp paths to the closed domain in place; returns worst overshoot.

    On the interval the walls coincide with cell faces, so overshoot beyond
    rounding noise would mean the tracer lost the field.  On the disk the
    active cells are those whose centers lie inside the circle, so rim cells
    poke past it and a faithfully traced point can briefly ride up to about
    a cell width beyond r = 1 before the no-flux staircase stops it; the
    excursion is recorded (and the point pulled back onto the circle), and
    only an escape beyond a full cell width raises.
    """
    if grid.dimension == 1:
        length = grid.length
        over = float(np.max(np.abs(pts)) - length)
        if over > grid.dx:
            raise StabilityError(
                f"characteristic left the interval by {over:.3e}"
            )
        if over > 0.0:
            np.clip(pts, -length, length, out=pts)
            return over
        return 0.0
    r = np.sqrt(np.add.reduce(pts * pts, axis=1))
    over = float(r.max(initial=0.0) - 1.0)
    if over > grid.dx:
        raise StabilityError(f"characteristic left the disk by {over:.3e}")
    if over > 0.0:
        out = r > 1.0
        pts[out] /= r[out, None]
        return over
    return 0.0


def trace_bundle(history: PressureHistory, starts: np.ndarray, t_start: float,
                 t_end: float, mobility: float) -> list[CharPath]:
    """Trace many characteristics at once (shared substep schedule)."""
    g = history.grid
    pts = np.atleast_2d(np.asarray(starts, dtype=float)).copy()
    if pts.shape[1] != g.dimension:
        raise ConfigError(f"start points must have dimension {g.dimension}")
    lo, hi = history.span()
    if history.n_frames < 2:
        raise ConfigError("tracing needs a history with at least two frames")
    if not (lo - 1e-9 <= t_start < t_end <= hi + 1e-9):
        raise ConfigError(
            f"trace window [{t_start}, {t_end}] must sit inside [{lo}, {hi}]"
        )
    _confine(g, pts)

    n = pts.shape[0]
    knot_t = [t_start]
    knot_x = [pts.copy()]
    comp = np.zeros(n)
    grow = np.zeros((n, 2))
    knot_comp = [comp.copy()]
    knot_grow = [grow.copy()]
    rate_prev = _rates_at(history, t_start, pts)
    max_over = 0.0

    k_first, _ = history.bracket(t_start)
    for k in range(k_first, history.n_frames - 1):
        c0 = max(t_start, float(history.times[k]))
        c1 = min(t_end, float(history.times[k + 1]))
        if c1 <= c0 + 1e-15:
            if history.times[k] >= t_end:
                break
            continue
        _, speed_a = history.face_grids(k)
        _, speed_b = history.face_grids(k + 1)
        div_a = history.divergence_grids(k)
        div_b = history.divergence_grids(k + 1)
        tk0 = float(history.times[k])
        frame_len = float(history.times[k + 1]) - tk0
        vmax = mobility * max(speed_a, speed_b)
        # at least 4 substeps per frame interval: the knot map's derivative
        # carries O(substep) kinks at face crossings, and tying the substep
        # to the frame spacing keeps Jacobian checks convergent under frame
        # refinement; the motion cap of half a cell bounds crossings per
        # substep to one, which the 1D compression pieces rely on
        n_sub = max(4, int(math.ceil((c1 - c0) * vmax / (0.5 * g.dx))))
        delta = (c1 - c0) / n_sub
        for j in range(n_sub):
            ta = c0 + j * delta
            tb = ta + delta
            prev = pts
            v1 = velocity_at(history, ta, pts, mobility)
            mid = pts + 0.5 * delta * v1
            v2 = velocity_at(history, ta + 0.5 * delta, mid, mobility)
            pts = pts + delta * v2
            max_over = max(max_over, _confine(g, pts))
            wa = (ta - tk0) / frame_len
            wb = (tb - tk0) / frame_len
            comp = comp + delta * _divergence_mean(g, div_a, div_b,
                                                  wa, wb, prev, pts)
            rate_new = _rates_at(history, tb, pts)
            grow = grow + 0.5 * delta * (rate_prev + rate_new)
            rate_prev = rate_new
            knot_t.append(tb)
            knot_x.append(pts.copy())
            knot_comp.append(comp.copy())
            knot_grow.append(grow.copy())

    times = np.array(knot_t)
    xs = np.stack(knot_x)            # (n_knots, n, dim)
    cs = np.stack(knot_comp)         # (n_knots, n)
    gs = np.stack(knot_grow)         # (n_knots, n, 2)
    return [CharPath(times, xs[:, i, :], cs[:, i], gs[:, i, :],
                     mobility, max_over) for i in range(n)]


def trace(history: PressureHistory, start, t_start: float, t_end: float,
          mobility: float) -> CharPath:
    """Trace a single characteristic from start between two recorded times."""
    return trace_bundle(history, np.atleast_2d(start), t_start, t_end, mobility)[0]


# -- derived checks --------------------------------------------------------

def jacobian_det(path: CharPath) -> float:
    """Volume distortion of the flow along the path (end vs start)."""
    return float(np.exp(path.mobility * path.compression[-1]))


def volume_mass_check(history: PressureHistory, cells: np.ndarray,
                      t_start: float, t_end: float, species: int = 0):
    """Mass of a transported cell patch vs the growth-integral prediction.

    Returns (transported, predicted): the density integral over the image of
    the patch under the flow (via the Jacobian identity) and the start-time
    patch mass amplified by the accumulated per-capita growth.  The two agree
    for the continuum model exactly; discretely to O(dx + dt).
    """
    if history.params is None:
        raise ConfigError("volume_mass_check needs kinetics on the history")
    cells = np.asarray(cells, dtype=int)
    g = history.grid
    mobility = history.params.dispersal[species]
    paths = trace_bundle(history, g.centers[cells], t_start, t_end, mobility)

    u1_end, u2_end, _ = _fields_at(history, t_end)
    end_field = (u1_end, u2_end)[species]
    ends = np.stack([p.end for p in paths])
    density_end = sample_cell_field(g, end_field, ends)
    dets = np.array([jacobian_det(p) for p in paths])
    transported = float(np.add.reduce(density_end * dets)) * g.cell_volume

    u1_0, u2_0, _ = _fields_at(history, t_start)
    start_field = (u1_0, u2_0)[species]
    amps = np.exp([p.growth[-1, species] for p in paths])
    predicted = float(np.add.reduce(start_field[cells] * amps)) * g.cell_volume
    return transported, predicted


def representation_check(history: PressureHistory, start, t_end: float,
                         species: int = 0):
    """Density at a traced endpoint vs the closed-form path prediction.

    Returns (recorded, predicted): the recorded density interpolated at the
    traced endpoint, and the start density amplified by the accumulated
    growth minus compression integrals.
    """
    if history.params is None:
        raise ConfigError("representation_check needs kinetics on the history")
    t0 = history.span()[0]
    mobility = history.params.dispersal[species]
    path = trace(history, start, t0, t_end, mobility)

    u1_end, u2_end, _ = _fields_at(history, t_end)
    end_field = (u1_end, u2_end)[species]
    recorded = float(sample_cell_field(history.grid, end_field,
                                       np.atleast_2d(path.end))[0])
    u1_0, u2_0, _ = _fields_at(history, t0)
    start_field = (u1_0, u2_0)[species]
    u0 = float(sample_cell_field(history.grid, start_field,
                                 np.atleast_2d(np.asarray(start, dtype=float)))[0])
    exponent = path.growth[-1, species] - mobility * path.compression[-1]
    predicted = u0 * float(np.exp(exponent))
    return recorded, predicted
