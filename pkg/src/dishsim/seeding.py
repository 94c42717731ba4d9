"""Stochastic initial conditions: clustered cell colonies in the dish.

Cluster centers are drawn in polar form: the squared radius follows a
Beta(alpha, beta) law and the angle is uniform, so alpha = beta = 1
reproduces the uniform distribution over the disk and skewed laws bias
colonies toward the center or the rim.  Each cluster deposits a Gaussian
bump of width sigma, truncated to the active cells and renormalized so that
every cluster carries exactly mass/clusters; the species total is therefore
exact regardless of how much of a bump hangs over the boundary.

Draw order per species stream: cluster 1 radius, cluster 1 angle,
cluster 2 radius, ...  Species use independent streams seeded separately.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ConfigError
from .grid import Grid
from .rng import Xoshiro256StarStar


@dataclass(frozen=True)
class SeedSpec:
    """One species' seeding recipe."""

    clusters: int = 20
    mass: float = 0.01
    alpha: float = 1.0
    beta: float = 1.0
    sigma: float = 0.03
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.clusters, int) or self.clusters < 1:
            raise ConfigError(f"clusters must be an integer >= 1, got {self.clusters!r}")
        if not (self.mass > 0.0 and np.isfinite(self.mass)):
            raise ConfigError(f"mass must be positive, got {self.mass}")
        if self.alpha <= 0.0 or self.beta <= 0.0:
            raise ConfigError("beta-law shape parameters must be positive")
        if not (self.sigma > 0.0 and np.isfinite(self.sigma)):
            raise ConfigError(f"sigma must be positive, got {self.sigma}")
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")


@dataclass(frozen=True)
class SeedingConfig:
    """Seeding recipe for the species pair.

    mode "independent" seeds each species from its own stream; "segregated"
    additionally assigns each cell to whichever species dominates it
    (winner-takes-all, species 1 on ties) and renormalizes, so supports are
    disjoint from the start; "mirror" builds species 2 as the exact mirror
    image of species 1, for symmetry studies.  Explicit center lists override
    random sampling for the corresponding species.
    """

    species1: SeedSpec = field(default_factory=SeedSpec)
    species2: SeedSpec | None = field(default_factory=lambda: SeedSpec(seed=1))
    mode: str = "independent"
    centers1: tuple | None = None
    centers2: tuple | None = None

    def __post_init__(self):
        if self.mode not in ("independent", "segregated", "mirror"):
            raise ConfigError(f"unknown seeding mode {self.mode!r}")
        if self.mode in ("independent", "segregated") and self.species2 is None \
                and self.centers2 is not None:
            raise ConfigError("centers2 given but species2 is absent")


def beta_density(x, alpha: float, beta: float):
    """Density of the Beta(alpha, beta) law on [0, 1]; broadcasts over x."""
    if alpha <= 0.0 or beta <= 0.0:
        raise ConfigError("beta-law shape parameters must be positive")
    norm = math.exp(math.lgamma(alpha) + math.lgamma(beta) - math.lgamma(alpha + beta))
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        out = x ** (alpha - 1.0) * (1.0 - x) ** (beta - 1.0) / norm
    return out if out.ndim else float(out)


def sample_centers(spec: SeedSpec) -> np.ndarray:
    """Draw the cluster centers for one species in the unit disk."""
    rng = Xoshiro256StarStar(spec.seed)
    centers = np.empty((spec.clusters, 2))
    for k in range(spec.clusters):
        r = rng.beta(spec.alpha, spec.beta)        # squared radius
        theta = rng.uniform(0.0, 2.0 * math.pi)
        rad = math.sqrt(r)
        centers[k] = (rad * math.cos(theta), rad * math.sin(theta))
    return centers


def place_clusters(grid: Grid, centers: np.ndarray, sigma: float,
                   mass: float) -> np.ndarray:
    """Deposit equal-mass Gaussian bumps at the given centers.

    Each bump is evaluated at active cell centers only and scaled so its
    discrete integral is exactly mass/len(centers).  A bump whose footprint
    misses every active cell (sigma far below the cell size, or a center far
    outside the domain) cannot be normalized and raises.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if centers.shape[1] != grid.dimension:
        raise ConfigError(
            f"centers have dimension {centers.shape[1]}, grid has {grid.dimension}"
        )
    u = np.zeros(grid.n_cells)
    per_cluster = mass / len(centers)
    for k, c in enumerate(centers):
        d2 = np.add.reduce((grid.centers - c) ** 2, axis=1)
        bump = np.exp(-d2 / (2.0 * sigma * sigma))
        weight = grid.integrate(bump)
        if weight <= 0.0:
            raise ConfigError(
                f"cluster {k} at {tuple(c)} has no overlap with active cells "
                f"(sigma={sigma}, dx={grid.dx})"
            )
        u += (per_cluster / weight) * bump
    return u


def _one_species(grid: Grid, spec: SeedSpec, centers) -> np.ndarray:
    if centers is None:
        if grid.dimension != 2:
            raise ConfigError(
                "random center sampling is defined on the disk; "
                "1D seeding needs explicit centers"
            )
        centers = sample_centers(spec)
    return place_clusters(grid, centers, spec.sigma, spec.mass)


def seed_fields(grid: Grid, cfg: SeedingConfig) -> tuple[np.ndarray, np.ndarray]:
    """Build the initial density pair for a seeding recipe."""
    u1 = _one_species(grid, cfg.species1, cfg.centers1)

    if cfg.mode == "mirror":
        return u1, u1[grid.reflection(axis=0)]

    if cfg.species2 is None:
        return u1, np.zeros_like(u1)
    u2 = _one_species(grid, cfg.species2, cfg.centers2)

    if cfg.mode == "segregated":
        keep1 = u1 >= u2                       # species 1 keeps ties
        u1 = np.where(keep1, u1, 0.0)
        u2 = np.where(keep1, 0.0, u2)
        for label, spec, u in (("species1", cfg.species1, u1),
                               ("species2", cfg.species2, u2)):
            total = grid.integrate(u)
            if total <= 0.0:
                raise ConfigError(
                    f"winner-takes-all masking wiped out {label}; reseed or "
                    "lower the other species' density"
                )
            u *= spec.mass / total
    return u1, u2
