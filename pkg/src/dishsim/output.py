"""File writers for runs: metrics, snapshots, heatmaps, paths, fits.

All CSV numbers are written with repr, which round-trips binary64 exactly,
so identical runs produce byte-identical files.  Heatmaps are binary 8-bit
PGM, one file per field, max-normalized per file with inactive cells black;
rows run from the top of the dish (largest second coordinate) downward.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .fitting import FitResult
from .grid import Grid
from .simulator import MetricsRow, SimState

METRICS_HEADER = ("t", "U1", "U2", "p1", "p2", "overlap", "mass_residual")
SNAPSHOT_HEADER = ("cell", "x", "y", "u1", "u2", "P")
PATH_HEADER = ("t", "x", "y", "compression", "growth1", "growth2")
FIT_HEADER = ("b", "a", "delta", "rss")
TRAJECTORY_HEADER = ("t", "u1", "u2")


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_rows(path, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) if not isinstance(v, str) else v
                          for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def write_metrics(path, rows) -> None:
    """Write the per-cadence run metrics as CSV."""
    _write_rows(path, METRICS_HEADER,
                ((r.t, r.mass1, r.mass2, r.fraction1, r.fraction2,
                  r.overlap, r.mass_residual) for r in rows))


def read_metrics(path) -> list[MetricsRow]:
    """Read a metrics CSV back into rows (inverse of write_metrics)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != METRICS_HEADER:
            raise ConfigError(f"{path}: not a metrics file")
        out = []
        for row in reader:
            if len(row) != len(METRICS_HEADER):
                raise ConfigError(f"{path}: malformed row {row!r}")
            vals = [float(v) for v in row]
            out.append(MetricsRow(*vals))
    return out


def snapshot_name(t: float) -> str:
    return f"snap_{t:.3f}"


def write_snapshot_csv(path, grid: Grid, state: SimState) -> None:
    """Write one frame as CSV rows (cell, x, y, u1, u2, P); y is 0 in 1D."""
    if state.pressure is None:
        raise ConfigError("snapshot needs the pressure field on the state")
    xs = grid.centers[:, 0]
    ys = grid.centers[:, 1] if grid.dimension == 2 else np.zeros_like(xs)
    _write_rows(path, SNAPSHOT_HEADER,
                ((str(i), xs[i], ys[i], state.u1[i], state.u2[i],
                  state.pressure[i]) for i in range(grid.n_cells)))


def read_snapshot_csv(path, grid: Grid):
    """Read a snapshot CSV back into (u1, u2, pressure) flat fields."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != SNAPSHOT_HEADER:
            raise ConfigError(f"{path}: not a snapshot file")
        u1 = np.zeros(grid.n_cells)
        u2 = np.zeros(grid.n_cells)
        pressure = np.zeros(grid.n_cells)
        seen = 0
        for row in reader:
            if len(row) != len(SNAPSHOT_HEADER):
                raise ConfigError(f"{path}: malformed row {row!r}")
            i = int(row[0])
            if not 0 <= i < grid.n_cells:
                raise ConfigError(f"{path}: cell index {i} out of range")
            u1[i], u2[i], pressure[i] = (float(row[3]), float(row[4]),
                                         float(row[5]))
            seen += 1
    if seen != grid.n_cells:
        raise ConfigError(f"{path}: {seen} rows for {grid.n_cells} cells")
    return u1, u2, pressure


def write_pgm(path, grid: Grid, field: np.ndarray) -> None:
    """Write one flat field as a binary 8-bit PGM heatmap."""
    m = grid.resolution
    dense = grid.to_dense(np.maximum(field, 0.0), fill=0.0)
    vmax = float(np.max(dense))
    if vmax > 0.0:
        dense = dense / vmax
    if grid.dimension == 1:
        pixels = np.rint(255.0 * dense[None, :]).astype(np.uint8)
    else:
        # dense is indexed [i, j] = (x, y); image rows scan y top to bottom
        pixels = np.rint(255.0 * dense.T[::-1, :]).astype(np.uint8)
    header = f"P5\n{pixels.shape[1]} {pixels.shape[0]}\n255\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(pixels.tobytes())


def write_snapshot(directory, grid: Grid, state: SimState) -> None:
    """Write the CSV and the three PGM heatmaps for one frame."""
    directory = Path(directory)
    stem = snapshot_name(state.t)
    write_snapshot_csv(directory / f"{stem}.csv", grid, state)
    for label, field in (("u1", state.u1), ("u2", state.u2),
                         ("P", state.pressure)):
        write_pgm(directory / f"{stem}_{label}.pgm", grid, field)


def write_path_csv(path, char_path) -> None:
    """Write a traced characteristic as CSV; y is 0 in 1D."""
    pts = char_path.points
    ys = pts[:, 1] if pts.shape[1] == 2 else np.zeros(pts.shape[0])
    _write_rows(path, PATH_HEADER,
                ((char_path.times[k], pts[k, 0], ys[k],
                  char_path.compression[k], char_path.growth[k, 0],
                  char_path.growth[k, 1])
                 for k in range(char_path.times.size)))


def write_trajectory(path, trajectory) -> None:
    """Write a well-mixed competition trajectory as CSV."""
    _write_rows(path, TRAJECTORY_HEADER,
                ((trajectory.times[k], trajectory.states[k, 0],
                  trajectory.states[k, 1])
                 for k in range(trajectory.times.size)))


def write_fit_csv(path, result: FitResult) -> None:
    """Write one fit result as a single-row CSV."""
    _write_rows(path, FIT_HEADER,
                [(result.growth, result.quadratic, result.mortality,
                  result.rss)])
