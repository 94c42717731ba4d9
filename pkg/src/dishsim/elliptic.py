"""Screened pressure equation on the grid: (I - chi * Lap) p = source.

The Laplacian is the standard compact finite-volume stencil with no-flux
boundaries: each face contributes (neighbor - cell) / dx^2, and missing faces
(domain boundary, inactive neighbor) contribute nothing.  The resulting
matrix is symmetric positive definite and every row sums to one, so the
solve preserves the mean of the source exactly up to solver tolerance.

The solver is conjugate gradients with Jacobi preconditioning.  Inner
products use a fixed numpy reduction and the matvec is a sequential CSR
product, so repeated solves on the same inputs give bit-identical results,
which the rest of the package relies on for reproducible runs.  Passing the
previous solution as the initial guess (warm start) is the main cost lever
in time stepping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse

from .errors import ConfigError, ConvergenceError
from .grid import Grid


@dataclass
class HelmholtzOperator:
    """Assembled (I - chi * Lap) with its grid and Jacobi diagonal."""

    grid: Grid
    chi: float
    matrix: sparse.csr_matrix
    diagonal: np.ndarray

    @property
    def n(self) -> int:
        return self.diagonal.shape[0]


def assemble(grid: Grid, chi: float) -> HelmholtzOperator:
    """Build the operator matrix for screening strength chi > 0."""
    if not (chi > 0.0 and np.isfinite(chi)):
        raise ConfigError(f"screening strength must be positive, got {chi}")
    n = grid.n_cells
    w = chi / (grid.dx * grid.dx)
    diag = 1.0 + w * grid.neighbor_count

    rows = np.concatenate([np.arange(n), grid.face_a, grid.face_b])
    cols = np.concatenate([np.arange(n), grid.face_b, grid.face_a])
    vals = np.concatenate([diag, np.full(grid.n_faces, -w), np.full(grid.n_faces, -w)])
    matrix = sparse.csr_matrix(
        sparse.coo_matrix((vals, (rows, cols)), shape=(n, n))
    )
    return HelmholtzOperator(grid, chi, matrix, diag)


def _dot(a: np.ndarray, b: np.ndarray) -> float:
    # fixed pairwise reduction; never hands the sum to threaded BLAS
    return float(np.add.reduce(a * b))


def solve(op: HelmholtzOperator, source: np.ndarray, rel_tol: float = 1e-10,
          x0: np.ndarray | None = None, max_iter: int | None = None) -> np.ndarray:
    """Solve (I - chi*Lap) x = source to a relative residual tolerance.

    x0 warm-starts the iteration (defaults to the source itself, which is
    already the exact answer in the chi -> 0 limit).  Raises ConvergenceError
    if the tolerance is not met within the iteration budget.
    """
    if not (0.0 < rel_tol <= 1e-4):
        raise ConfigError(f"rel_tol must lie in (0, 1e-4], got {rel_tol}")
    b = np.asarray(source, dtype=float)
    if b.shape != (op.n,):
        raise ConfigError(f"source has shape {b.shape}, expected ({op.n},)")
    if not np.all(np.isfinite(b)):
        raise ConfigError("source contains non-finite values")

    b_norm = np.sqrt(_dot(b, b))
    if b_norm == 0.0:
        return np.zeros_like(b)
    threshold = rel_tol * b_norm
    budget = max_iter if max_iter is not None else 20 * op.n

    a = op.matrix
    x = (b if x0 is None else np.asarray(x0, dtype=float)).copy()
    r = b - a @ x
    z = r / op.diagonal
    p = z.copy()
    rz = _dot(r, z)
    iterations = 0
    while True:
        if np.sqrt(_dot(r, r)) <= threshold:
            # recurrence residual can drift; confirm against the true residual
            r = b - a @ x
            if np.sqrt(_dot(r, r)) <= threshold:
                return x
            z = r / op.diagonal
            p = z.copy()
            rz = _dot(r, z)
        if iterations >= budget:
            raise ConvergenceError(
                f"pressure solve stalled: {iterations} iterations, "
                f"residual {np.sqrt(_dot(r, r)):.3e} vs threshold {threshold:.3e}"
            )
        ap = a @ p
        alpha = rz / _dot(p, ap)
        x += alpha * p
        r -= alpha * ap
        z = r / op.diagonal
        rz_next = _dot(r, z)
        p = z + (rz_next / rz) * p
        rz = rz_next
        iterations += 1
