"""Two-species growth/competition kinetics and the well-mixed ODE companion.

Each species i grows logistically with per-capita rate

    rate_i(u1, u2) = growth_i - mortality_i - comp_i1*u1 - comp_i2*u2,

which also drives the spatial model's reaction term.  With space removed the
densities follow the classical two-species competition ODE, whose long-run
outcome is decided entirely by how the cross-competition ratios compare with
the ratio of the single-species equilibria.  classify() reports that outcome
as one of four regimes:

    i   : coexistence at the interior equilibrium
    ii  : species 2 excludes species 1
    iii : species 1 excludes species 2
    iv  : bistable; the winner depends on the initial state

Comparisons sitting on a regime boundary (equality of a ratio pair) have no
robust label and raise instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, StabilityError


@dataclass(frozen=True)
class KineticParams:
    """Growth, mortality, competition, dispersal, and pressure screening."""

    growth1: float = 0.6420
    growth2: float = 0.6359
    mortality1: float = 0.0
    mortality2: float = 0.0
    comp11: float = 1.5588
    comp12: float = 0.0
    comp21: float = 0.0
    comp22: float = 1.5415
    dispersal1: float = 2.0
    dispersal2: float = 2.0
    screening: float = 0.01

    def __post_init__(self):
        for name in ("growth1", "growth2", "comp11", "comp12", "comp21", "comp22",
                     "mortality1", "mortality2"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0.0):
                raise ConfigError(f"{name} must be finite and >= 0, got {v}")
        for name in ("dispersal1", "dispersal2", "screening"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0.0):
                raise ConfigError(f"{name} must be finite and > 0, got {v}")

    # -- convenience views -------------------------------------------------
    @property
    def growth(self):
        return (self.growth1, self.growth2)

    @property
    def mortality(self):
        return (self.mortality1, self.mortality2)

    @property
    def competition(self) -> np.ndarray:
        return np.array([[self.comp11, self.comp12], [self.comp21, self.comp22]])

    @property
    def dispersal(self):
        return (self.dispersal1, self.dispersal2)

    def net_growth(self, species: int) -> float:
        """Intrinsic rate with mortality removed."""
        return self.growth[species] - self.mortality[species]

    def rate(self, species: int, u1, u2):
        """Per-capita net growth rate; broadcasts over density arrays."""
        comp = self.competition[species]
        return self.net_growth(species) - comp[0] * u1 - comp[1] * u2

    def single_equilibrium(self, species: int) -> float:
        """Carrying density of one species alone: net growth / self-competition."""
        self_comp = (self.comp11, self.comp22)[species]
        if self_comp <= 0.0:
            raise ConfigError("single-species equilibrium needs self-competition > 0")
        return self.net_growth(species) / self_comp


@dataclass(frozen=True)
class EquilibriumReport:
    """Long-run outcome of the well-mixed competition dynamics."""

    single1: float               # species-1-alone equilibrium density
    single2: float
    coexistence: tuple | None    # interior equilibrium if it exists in the open quadrant
    case: str                    # "i" | "ii" | "iii" | "iv"
    attractor: str               # human-readable description
    nonviable: tuple = ()        # species whose net growth is <= 0


def classify(params: KineticParams, boundary_rtol: float = 1e-12) -> EquilibriumReport:
    """Decide which equilibrium attracts the well-mixed dynamics.

    Requires positive self-competition.  If exactly one species has
    non-positive net growth the report flags it and labels the case by the
    surviving species' attractor; if both are non-viable there is nothing to
    classify and a ConfigError is raised.
    """
    if params.comp11 <= 0.0 or params.comp22 <= 0.0:
        raise ConfigError("classification requires positive self-competition")
    net1, net2 = params.net_growth(0), params.net_growth(1)
    p1 = net1 / params.comp11
    p2 = net2 / params.comp22

    if net1 <= 0.0 and net2 <= 0.0:
        raise ConfigError("both species decay; no competitive outcome to classify")
    if net1 <= 0.0:
        return EquilibriumReport(p1, p2, None, "ii",
                                 f"species 2 alone at density {p2:.6g}", (0,))
    if net2 <= 0.0:
        return EquilibriumReport(p1, p2, None, "iii",
                                 f"species 1 alone at density {p1:.6g}", (1,))

    # cross-ratio tests, written multiplicatively to avoid dividing by the
    # equilibria themselves
    lhs1, rhs1 = params.comp12 * p2, params.comp11 * p1
    lhs2, rhs2 = params.comp21 * p1, params.comp22 * p2
    for lhs, rhs in ((lhs1, rhs1), (lhs2, rhs2)):
        if abs(lhs - rhs) <= boundary_rtol * max(abs(lhs), abs(rhs)):
            raise ConfigError(
                "competition parameters sit on a regime boundary; "
                "the long-run outcome is degenerate"
            )
    one_weak = lhs1 < rhs1     # species 2's pressure on 1 is sub-critical
    two_weak = lhs2 < rhs2     # species 1's pressure on 2 is sub-critical

    det = params.comp11 * params.comp22 - params.comp12 * params.comp21
    coexistence = None
    if det != 0.0:
        c1 = (params.comp22 * net1 - params.comp12 * net2) / det
        c2 = (params.comp21 * net1 - params.comp11 * net2) / (-det)
        if c1 > 0.0 and c2 > 0.0:
            coexistence = (c1, c2)

    if one_weak and two_weak:
        return EquilibriumReport(p1, p2, coexistence, "i",
                                 f"coexistence at {coexistence}")
    if not one_weak and two_weak:
        return EquilibriumReport(p1, p2, coexistence, "ii",
                                 f"species 2 alone at density {p2:.6g}")
    if one_weak and not two_weak:
        return EquilibriumReport(p1, p2, coexistence, "iii",
                                 f"species 1 alone at density {p1:.6g}")
    return EquilibriumReport(p1, p2, coexistence, "iv",
                             "bistable: one species excludes the other, "
                             "decided by the initial densities")


@dataclass
class OdeTrajectory:
    times: np.ndarray     # (n_steps + 1,)
    states: np.ndarray    # (n_steps + 1, 2)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def _rhs(params: KineticParams, u: np.ndarray) -> np.ndarray:
    return np.array([u[0] * params.rate(0, u[0], u[1]),
                     u[1] * params.rate(1, u[0], u[1])])


def ode_integrate(params: KineticParams, u0, t_end: float, dt: float) -> OdeTrajectory:
    """Fixed-step RK4 integration of the well-mixed competition dynamics.

    The step bound dt <= 0.01 / max(growth + mortality) keeps RK4 far inside
    its stability region for these kinetics; negative excursions beyond
    rounding noise indicate a step too large and raise.
    """
    u = np.asarray(u0, dtype=float)
    if u.shape != (2,) or np.any(u < 0.0) or not np.all(np.isfinite(u)):
        raise ConfigError(f"initial densities must be two finite values >= 0, got {u0}")
    if not (t_end > 0.0 and np.isfinite(t_end)):
        raise ConfigError(f"t_end must be positive, got {t_end}")
    scale = max(params.growth1 + params.mortality1,
                params.growth2 + params.mortality2)
    if scale > 0.0 and dt > 0.01 / scale:
        raise ConfigError(
            f"dt={dt} too large for rates ~{scale}; need dt <= {0.01 / scale:.3e}"
        )
    if dt <= 0.0:
        raise ConfigError(f"dt must be positive, got {dt}")

    n_steps = int(np.ceil(t_end / dt - 1e-12))
    times = np.empty(n_steps + 1)
    states = np.empty((n_steps + 1, 2))
    times[0] = 0.0
    states[0] = u
    t = 0.0
    for k in range(n_steps):
        h = min(dt, t_end - t)
        k1 = _rhs(params, u)
        k2 = _rhs(params, u + 0.5 * h * k1)
        k3 = _rhs(params, u + 0.5 * h * k2)
        k4 = _rhs(params, u + h * k3)
        u = u + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if np.any(u < -1e-12):
            raise StabilityError(
                f"ODE step produced negative density {u.min():.3e}; reduce dt"
            )
        u = np.maximum(u, 0.0)
        t += h
        times[k + 1] = t
        states[k + 1] = u
    return OdeTrajectory(times, states)
