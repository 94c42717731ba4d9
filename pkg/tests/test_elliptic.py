"""Pressure operator assembly and the preconditioned CG solve."""

from __future__ import annotations

import math

import numpy as np
import pytest

from dishsim import elliptic
from dishsim.errors import ConfigError, ConvergenceError
from dishsim.grid import Grid, GridSpec, build_grid


def tiny_interval_grid():
    # three unit cells on [-1.5, 1.5]; small enough to check the matrix by hand
    return Grid(dimension=1, resolution=3, length=1.5, dx=1.0,
                centers=np.array([[-1.0], [0.0], [1.0]]),
                index_map=np.arange(3), cell_ij=np.arange(3)[:, None],
                face_a=np.array([0, 1]), face_b=np.array([1, 2]),
                face_axis=np.zeros(2, dtype=np.int8))


def test_three_cell_matrix_entries():
    op = elliptic.assemble(tiny_interval_grid(), chi=1.0)
    expected = np.array([[2.0, -1.0, 0.0],
                         [-1.0, 3.0, -1.0],
                         [0.0, -1.0, 2.0]])
    assert np.array_equal(op.matrix.toarray(), expected)


def test_assemble_rejects_nonpositive_screening():
    g = build_grid(GridSpec(dimension=1, resolution=8))
    for chi in (0.0, -0.01, math.nan):
        with pytest.raises(ConfigError):
            elliptic.assemble(g, chi)


@pytest.mark.parametrize("spec", [GridSpec(1, 32), GridSpec(2, 24)])
def test_matrix_symmetric_with_unit_row_sums(spec):
    op = elliptic.assemble(build_grid(spec), chi=0.01)
    diff = op.matrix - op.matrix.T
    assert abs(diff).max() == 0.0
    row_sums = op.matrix @ np.ones(op.n)
    assert np.max(np.abs(row_sums - 1.0)) < 1e-14


def test_matrix_positive_definite_on_small_grid():
    op = elliptic.assemble(build_grid(GridSpec(2, 8)), chi=0.05)
    eigs = np.linalg.eigvalsh(op.matrix.toarray())
    assert eigs.min() > 0.999  # identity part keeps the spectrum above 1


def test_constant_source_is_a_fixed_point():
    # unit row sums mean constants solve the equation exactly
    op = elliptic.assemble(build_grid(GridSpec(2, 32)), chi=0.01)
    src = np.full(op.n, 3.25)
    p = elliptic.solve(op, src, rel_tol=1e-12)
    assert np.max(np.abs(p - 3.25)) < 1e-10


def manufactured_error(m: int, chi: float = 0.01) -> float:
    # if p(x) = 1 + cos(pi x) (zero slope at both walls), the source must be
    # p - chi p'' = 1 + (1 + chi pi^2) cos(pi x)
    g = build_grid(GridSpec(dimension=1, resolution=m, length=1.0))
    x = g.centers[:, 0]
    source = 1.0 + (1.0 + chi * math.pi**2) * np.cos(math.pi * x)
    p = elliptic.solve(elliptic.assemble(g, chi), source, rel_tol=1e-12)
    return float(np.max(np.abs(p - (1.0 + np.cos(math.pi * x)))))


def test_manufactured_solution_is_second_order():
    e1, e2 = manufactured_error(128), manufactured_error(256)
    order = math.log2(e1 / e2)
    assert order >= 1.8


def test_solve_preserves_the_mean():
    g = build_grid(GridSpec(2, 32))
    op = elliptic.assemble(g, chi=0.01)
    rng = np.random.default_rng(3)
    src = rng.random(op.n)
    p = elliptic.solve(op, src, rel_tol=1e-12)
    slip = abs(float(np.add.reduce(p - src))) / float(np.add.reduce(np.abs(src)))
    assert slip < 1e-11


def test_solve_is_deterministic_and_warm_start_changes_nothing():
    g = build_grid(GridSpec(2, 24))
    op = elliptic.assemble(g, chi=0.01)
    rng = np.random.default_rng(11)
    src = rng.random(op.n)
    a = elliptic.solve(op, src, rel_tol=1e-11)
    b = elliptic.solve(op, src, rel_tol=1e-11)
    assert np.array_equal(a, b)  # bit-identical repeat
    warm = elliptic.solve(op, src, rel_tol=1e-11, x0=a)
    r = src - op.matrix @ warm
    assert np.sqrt(r @ r) <= 1e-11 * np.sqrt(src @ src)


def test_zero_source_short_circuits():
    op = elliptic.assemble(build_grid(GridSpec(1, 16)), chi=0.01)
    assert np.array_equal(elliptic.solve(op, np.zeros(op.n)), np.zeros(op.n))


def test_solve_input_validation():
    op = elliptic.assemble(build_grid(GridSpec(1, 16)), chi=0.01)
    with pytest.raises(ConfigError):
        elliptic.solve(op, np.ones(5))
    with pytest.raises(ConfigError):
        elliptic.solve(op, np.full(op.n, math.inf))
    with pytest.raises(ConfigError):
        elliptic.solve(op, np.ones(op.n), rel_tol=1e-3)  # too loose to trust


def test_exhausted_budget_raises():
    g = build_grid(GridSpec(1, 64, length=1.0))
    op = elliptic.assemble(g, chi=10.0)  # stiff: strongly coupled
    rng = np.random.default_rng(1)
    src = rng.random(op.n)
    with pytest.raises(ConvergenceError):
        elliptic.solve(op, src, rel_tol=1e-12, x0=np.zeros(op.n), max_iter=2)
