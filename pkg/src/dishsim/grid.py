"""Uniform finite-volume grids: a 1D interval and a 2D disk.

The interval [-L, L] is split into M equal cells.  The disk of radius 1 is
embedded in the square [-1, 1]^2 split into M x M cells, and a cell is active
exactly when its center lies strictly inside the disk.  Scalar fields carry
one value per active cell, stored in a flat array ordered row-major over the
structured indices.

Faces connect pairs of active cells that are adjacent along one axis.  The
face list is sorted by (axis, structured index of the lower cell), and the
domain boundary carries no faces at all: boundary cells simply have fewer
neighbors, which is what makes the transport update mass-conserving without
any explicit boundary handling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class GridSpec:
    """Geometry request: dimension, cells per axis, half-extent."""

    dimension: int
    resolution: int
    length: float = 1.0

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ConfigError(f"dimension must be 1 or 2, got {self.dimension}")
        if not isinstance(self.resolution, int) or self.resolution < 4:
            raise ConfigError(
                f"resolution must be an integer >= 4, got {self.resolution!r}"
            )
        if not (self.length > 0.0 and np.isfinite(self.length)):
            raise ConfigError(f"length must be positive and finite, got {self.length}")
        if self.dimension == 2 and self.length != 1.0:
            raise ConfigError("the 2D domain is the unit disk; length must be 1.0")


@dataclass
class Grid:
    """Realized grid: active cells, their centers, and the interior face list."""

    dimension: int
    resolution: int
    length: float
    dx: float
    centers: np.ndarray        # (n_cells, dimension) cell-center coordinates
    index_map: np.ndarray      # structured -> flat cell index, -1 where inactive
    cell_ij: np.ndarray        # (n_cells, dimension) structured indices
    face_a: np.ndarray         # flat index of the lower cell of each face
    face_b: np.ndarray         # flat index of the upper cell (a + one step on axis)
    face_axis: np.ndarray      # axis (0 or 1) each face is perpendicular to
    neighbor_count: np.ndarray = field(init=False)

    def __post_init__(self):
        counts = np.bincount(self.face_a, minlength=self.n_cells)
        counts += np.bincount(self.face_b, minlength=self.n_cells)
        self.neighbor_count = counts

    @property
    def n_cells(self) -> int:
        return self.centers.shape[0]

    @property
    def n_faces(self) -> int:
        return self.face_a.shape[0]

    @property
    def cell_volume(self) -> float:
        """Measure of one cell: dx in 1D, dx^2 in 2D."""
        return self.dx**self.dimension

    @property
    def active_mask(self) -> np.ndarray:
        return self.index_map >= 0

    def total_area(self) -> float:
        """Measure of the whole computational domain."""
        return self.n_cells * self.cell_volume

    def integrate(self, cell_field: np.ndarray) -> float:
        """Integral of a per-cell field over the domain."""
        return float(np.add.reduce(np.asarray(cell_field, dtype=float))) * self.cell_volume

    def to_dense(self, cell_field: np.ndarray, fill: float = np.nan) -> np.ndarray:
        """Scatter a flat field onto the structured array (inactive -> fill)."""
        dense = np.full(self.index_map.shape, fill, dtype=float)
        dense[self.active_mask] = cell_field
        return dense

    def reflection(self, axis: int = 0) -> np.ndarray:
        """Permutation sending each cell to its mirror image across an axis.

        The active set is symmetric under coordinate reflection by
        construction, so the permutation is total.
        """
        if axis < 0 or axis >= self.dimension:
            raise ValueError(f"axis {axis} out of range for dimension {self.dimension}")
        ij = self.cell_ij.copy()
        ij[:, axis] = self.resolution - 1 - ij[:, axis]
        if self.dimension == 1:
            perm = self.index_map[ij[:, 0]]
        else:
            perm = self.index_map[ij[:, 0], ij[:, 1]]
        if np.any(perm < 0):
            raise RuntimeError("active set is not reflection-symmetric")
        return perm


def build_grid(spec: GridSpec) -> Grid:
    """Construct the realized grid for a geometry request."""
    m = spec.resolution
    dx = 2.0 * spec.length / m
    axis_centers = -spec.length + (np.arange(m) + 0.5) * dx

    if spec.dimension == 1:
        index_map = np.arange(m)
        centers = axis_centers[:, None]
        cell_ij = np.arange(m)[:, None]
        face_a = np.arange(m - 1)
        face_b = face_a + 1
        face_axis = np.zeros(m - 1, dtype=np.int8)
        return Grid(1, m, spec.length, dx, centers, index_map, cell_ij,
                    face_a, face_b, face_axis)

    xx, yy = np.meshgrid(axis_centers, axis_centers, indexing="ij")
    active = xx * xx + yy * yy < 1.0
    n = int(active.sum())
    if n == 0:
        raise ConfigError(f"resolution {m} leaves no cell inside the disk")
    index_map = np.full((m, m), -1, dtype=int)
    index_map[active] = np.arange(n)
    ii, jj = np.nonzero(active)                     # row-major: lexicographic (i, j)
    cell_ij = np.stack([ii, jj], axis=1)
    centers = np.stack([axis_centers[ii], axis_centers[jj]], axis=1)

    faces_a, faces_b, faces_axis = [], [], []
    pair_x = active[:-1, :] & active[1:, :]
    ai, aj = np.nonzero(pair_x)
    faces_a.append(index_map[ai, aj])
    faces_b.append(index_map[ai + 1, aj])
    faces_axis.append(np.zeros(ai.size, dtype=np.int8))
    pair_y = active[:, :-1] & active[:, 1:]
    bi, bj = np.nonzero(pair_y)
    faces_a.append(index_map[bi, bj])
    faces_b.append(index_map[bi, bj + 1])
    faces_axis.append(np.ones(bi.size, dtype=np.int8))

    return Grid(2, m, spec.length, dx, centers, index_map, cell_ij,
                np.concatenate(faces_a), np.concatenate(faces_b),
                np.concatenate(faces_axis))
