"""Named, ready-to-run experiment configurations.

Each preset is a complete ExperimentConfig plus a one-line note saying what
the scenario demonstrates.  Seeds are fixed and distinct so every preset is
reproducible down to the byte; every preset survives a round trip through
the TOML config format unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .config import ExperimentConfig
from .errors import ConfigError
from .grid import GridSpec
from .kinetics import KineticParams
from .seeding import SeedingConfig, SeedSpec
from .simulator import SimSettings

DISK_128 = GridSpec(dimension=2, resolution=128)

# all reaction terms off: pure transport, conserving total mass exactly
TRANSPORT_ONLY = KineticParams(growth1=0.0, growth2=0.0, mortality1=0.0,
                               mortality2=0.0, comp11=0.0, comp12=0.0,
                               comp21=0.0, comp22=0.0)

# the four cross-competition regimes, drug pressure on species 1 only
REGIME_BASE = KineticParams(mortality1=0.4)

# single-drug background used by the seeding-pattern studies
SEEDING_STUDY = KineticParams(mortality1=0.15, comp12=0.0, comp21=0.0)

# competition off the diagonal removed, mobility contrast studies
MOBILITY_BASE = KineticParams(comp12=0.0, comp21=0.0)

SIX_DAYS = SimSettings(t_end=6.0, snapshot_every=1.0)


@dataclass(frozen=True)
class ExperimentPreset:
    """A named configuration with a human-readable purpose note."""

    name: str
    note: str
    config: ExperimentConfig


def _clusters(count: int, mass: float, seed: int, alpha: float = 1.0,
              beta: float = 1.0, sigma: float = 0.03) -> SeedSpec:
    return SeedSpec(clusters=count, mass=mass, alpha=alpha, beta=beta,
                    sigma=sigma, seed=seed)


def _pair(count: int, mass: float, seed: int, alpha: float = 1.0,
          beta: float = 1.0, sigma: float = 0.03) -> SeedingConfig:
    return SeedingConfig(
        species1=_clusters(count, mass, seed, alpha, beta, sigma),
        species2=_clusters(count, mass, seed + 1, alpha, beta, sigma))


def _preset(name: str, note: str, kinetics: KineticParams,
            seeding: SeedingConfig, grid: GridSpec = DISK_128,
            run: SimSettings = SIX_DAYS) -> ExperimentPreset:
    return ExperimentPreset(name, note, ExperimentConfig(
        grid=grid, kinetics=kinetics, seeding=seeding, run=run))


_ALL = (
    _preset(
        "conservation",
        "pure transport with every reaction term off; total mass of each "
        "species is conserved to rounding",
        TRANSPORT_ONLY, _pair(20, 0.01, 101)),
    _preset(
        "case_i",
        "weak cross-competition both ways: the two species settle toward "
        "stable coexistence",
        replace(REGIME_BASE, comp12=0.2, comp21=1.0), _pair(20, 0.01, 103)),
    _preset(
        "case_ii",
        "cross-competition strong against species 1 only: species 2 "
        "excludes it",
        replace(REGIME_BASE, comp12=1.0, comp21=1.0), _pair(20, 0.01, 105)),
    _preset(
        "case_iii",
        "cross-competition strong against species 2 only: species 1 is the "
        "well-mixed winner despite its drug handicap",
        replace(REGIME_BASE, comp12=0.2, comp21=5.0), _pair(20, 0.01, 107)),
    _preset(
        "case_iv",
        "strong cross-competition both ways: bistable exclusion decided by "
        "the initial densities",
        replace(REGIME_BASE, comp12=1.0, comp21=5.0), _pair(20, 0.01, 109)),
    _preset(
        "symmetric",
        "identical species with mirrored seeding; proportions stay at one "
        "half to rounding",
        KineticParams(growth2=0.6420, comp22=1.5588, comp12=0.0, comp21=0.0),
        SeedingConfig(species1=_clusters(20, 0.01, 111), species2=None,
                      mode="mirror")),
    _preset(
        "sparse_seeding",
        "few small clusters under light drug pressure on species 1",
        SEEDING_STUDY, _pair(10, 0.005, 113)),
    _preset(
        "dense_seeding",
        "many heavy clusters under light drug pressure on species 1",
        SEEDING_STUDY, _pair(200, 0.1, 115)),
    _preset(
        "beta_uniform",
        "cluster centers spread uniformly over the dish",
        SEEDING_STUDY, _pair(40, 0.02, 117)),
    _preset(
        "beta_biased",
        "cluster centers biased toward the rim by a skewed radial law",
        SEEDING_STUDY, _pair(40, 0.02, 119, alpha=3.0, beta=2.0)),
    _preset(
        "dispersal_equal",
        "equal mobilities, competition only within species: the baseline "
        "for the mobility-contrast pair",
        MOBILITY_BASE, _pair(10, 0.005, 121, sigma=0.01),
        grid=GridSpec(dimension=2, resolution=192)),
    _preset(
        "dispersal_slow2",
        "species 2 ten times less mobile; fast species 1 spreads first",
        replace(MOBILITY_BASE, dispersal2=0.2),
        _pair(10, 0.005, 123, sigma=0.01),
        grid=GridSpec(dimension=2, resolution=192)),
    _preset(
        "dispersal_drug",
        "fast species 1 under drug pressure: early lead, late loss",
        replace(MOBILITY_BASE, dispersal2=0.2, mortality1=0.1),
        _pair(10, 0.005, 125, sigma=0.01),
        grid=GridSpec(dimension=2, resolution=192)),
    _preset(
        "segregation",
        "winner-takes-all seeding with equal mobilities: initially disjoint "
        "supports stay segregated up to numerical smearing",
        replace(REGIME_BASE, comp12=0.2, comp21=1.0),
        replace(_pair(8, 0.01, 127, sigma=0.05), mode="segregated"),
        grid=GridSpec(dimension=2, resolution=96)),
    _preset(
        "gaussian_1d",
        "one species, one mid-interval bump, pure transport on the line; "
        "the reference scenario for characteristic-path checks",
        TRANSPORT_ONLY,
        SeedingConfig(species1=SeedSpec(clusters=1, mass=0.25, sigma=0.1,
                                        seed=129),
                      species2=None, centers1=((0.0,),)),
        grid=GridSpec(dimension=1, resolution=256),
        run=SimSettings(t_end=0.5, snapshot_every=0.1)),
)

PRESETS = {p.name: p for p in _ALL}


def preset_names() -> tuple[str, ...]:
    return tuple(PRESETS)


def get_preset(name: str) -> ExperimentPreset:
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(PRESETS)
        raise ConfigError(f"unknown preset {name!r}; available: {known}") from None
