"""Command-line driver: simulate, ode, fit, trace, seed.

Every subcommand writes its results as plain files into an output directory
and prints a one-line summary.  Configuration comes from a shipped preset
(--preset) or a TOML file (--config); individual keys can be overridden on
the command line with dotted flags such as `--kinetics.mortality1 0.4`.
Exit codes: 0 on success, 2 for configuration problems, 3 for numerical
failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import output
from .characteristics import PressureHistory, representation_check, trace_bundle
from .config import (ExperimentConfig, apply_overrides, config_from_dict,
                     config_to_toml, load_dict, write_config)
from .errors import ConfigError, NumericalError
from .fitting import (DEFAULT_SATURATION, ProliferationSeries, fit_growth,
                      fit_mortality)
from .grid import build_grid
from .kinetics import KineticParams, classify, ode_integrate
from .presets import get_preset, preset_names
from .seeding import seed_fields
from .simulator import Simulation, SimState

try:
    import tomllib
except ModuleNotFoundError:             # pragma: no cover
    import tomli as tomllib

_ODE_FIELDS = ("growth1", "growth2", "mortality1", "mortality2",
               "comp11", "comp12", "comp21", "comp22")


# -- argument plumbing ------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dishsim",
        description="Deterministic simulator for two cell populations "
                    "repelling each other through shared pressure in a dish.")
    parser.add_argument("--list-presets", action="store_true",
                        help="list the shipped experiment presets and exit")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add_config_source(p):
        p.add_argument("--preset", help="name of a shipped configuration")
        p.add_argument("--config", help="path to a TOML configuration file")
        p.add_argument("--out", help="output directory (default: the preset "
                                     "name or the config file stem)")

    p = sub.add_parser("simulate",
                       help="run a dish experiment and write metrics, "
                            "snapshots, and heatmaps")
    add_config_source(p)

    p = sub.add_parser("seed",
                       help="sample the initial fields only and write them "
                            "as a time-zero snapshot")
    add_config_source(p)

    p = sub.add_parser("ode",
                       help="classify and integrate the well-mixed "
                            "competition dynamics")
    for name in _ODE_FIELDS:
        p.add_argument(f"--{name}", type=float, metavar="RATE",
                       help=f"kinetic coefficient {name} (default: the "
                            "baseline value)")
    p.add_argument("--initial", type=float, nargs=2, default=(0.01, 0.01),
                   metavar=("U1", "U2"), help="starting densities")
    p.add_argument("--t-end", type=float, default=60.0,
                   help="integration horizon in days (default 60)")
    p.add_argument("--dt", type=float,
                   help="fixed step (default: the stability bound)")
    p.add_argument("--out", default="ode", help="output directory")

    p = sub.add_parser("fit",
                       help="fit logistic growth, and optionally a "
                            "mortality rate, to count series")
    p.add_argument("--growth-csv", required=True,
                   help="untreated count series (columns t,count)")
    p.add_argument("--mortality-csv",
                   help="treated series fitted with growth frozen")
    p.add_argument("--saturation", type=float, default=DEFAULT_SATURATION,
                   help="carrying capacity tying the quadratic coefficient "
                        "to the growth rate (default %(default)s)")
    p.add_argument("--out", default="fit", help="output directory")

    p = sub.add_parser("trace",
                       help="trace characteristics through a recorded run "
                            "and check the density representation")
    p.add_argument("--run", required=True,
                   help="a simulate output directory with run_config.toml "
                        "and at least two snapshots")
    p.add_argument("--start", action="append", required=True,
                   metavar="X[,Y]",
                   help="start point; repeat for a bundle of paths")
    p.add_argument("--species", type=int, choices=(1, 2), default=1,
                   help="species whose mobility moves the path (default 1)")
    p.add_argument("--t-start", type=float,
                   help="trace window start (default: first snapshot)")
    p.add_argument("--t-end", type=float,
                   help="trace window end (default: last snapshot)")
    p.add_argument("--out", help="output directory (default: RUN/trace)")
    return parser


def _collect_overrides(extras) -> list[tuple[str, str]]:
    """Turn leftover --section.key value tokens into override pairs."""
    pairs = []
    i = 0
    while i < len(extras):
        token = extras[i]
        if not token.startswith("--"):
            raise ConfigError(f"unexpected argument {token!r}")
        body = token[2:]
        if "=" in body:
            path, text = body.split("=", 1)
            i += 1
        else:
            path = body
            if i + 1 >= len(extras) or extras[i + 1].startswith("--"):
                raise ConfigError(f"override --{path} needs a value")
            text = extras[i + 1]
            i += 2
        if "." not in path:
            raise ConfigError(f"unknown option --{path}")
        pairs.append((path, text))
    return pairs


def _resolve_config(preset: str | None, config_path: str | None,
                    overrides) -> tuple[ExperimentConfig, str]:
    if (preset is None) == (config_path is None):
        raise ConfigError("give exactly one of --preset or --config")
    if preset is not None:
        data = tomllib.loads(config_to_toml(get_preset(preset).config))
        default_out = preset
    else:
        data = load_dict(config_path)
        default_out = Path(config_path).stem
    apply_overrides(data, overrides)
    return config_from_dict(data), default_out


def _out_dir(arg: str | None, default: str) -> Path:
    out = Path(arg) if arg else Path(default)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# -- subcommands ------------------------------------------------------------

def cmd_simulate(args, overrides) -> int:
    cfg, default_out = _resolve_config(args.preset, args.config, overrides)
    out = _out_dir(args.out, default_out)
    grid = build_grid(cfg.grid)
    u1, u2 = seed_fields(grid, cfg.seeding)
    sim = Simulation(grid, cfg.kinetics, cfg.run)
    state, rows = sim.run(u1, u2,
                          on_snapshot=lambda s: output.write_snapshot(out, grid, s))
    write_config(cfg, out / "run_config.toml")
    output.write_metrics(out / "metrics.csv", rows)
    last = rows[-1]
    print(f"{out}: t={state.t:g}, masses {last.mass1:.6g} / {last.mass2:.6g}, "
          f"largest negativity clamp {sim.clamp_max:.3e}")
    return 0


def cmd_seed(args, overrides) -> int:
    cfg, default_out = _resolve_config(args.preset, args.config, overrides)
    out = _out_dir(args.out, default_out)
    grid = build_grid(cfg.grid)
    u1, u2 = seed_fields(grid, cfg.seeding)
    sim = Simulation(grid, cfg.kinetics, cfg.run)
    state = SimState(t=0.0, u1=u1, u2=u2)
    sim.pressure(state)
    write_config(cfg, out / "run_config.toml")
    output.write_snapshot(out, grid, state)
    print(f"{out}: seeded masses {grid.integrate(u1):.6g} / "
          f"{grid.integrate(u2):.6g}")
    return 0


def cmd_ode(args) -> int:
    kwargs = {name: getattr(args, name) for name in _ODE_FIELDS
              if getattr(args, name) is not None}
    params = KineticParams(**kwargs)
    report = classify(params)
    scale = max(params.growth1 + params.mortality1,
                params.growth2 + params.mortality2)
    dt = args.dt if args.dt is not None else (0.01 / scale if scale > 0.0
                                              else 0.01)
    trajectory = ode_integrate(params, args.initial, args.t_end, dt)
    out = _out_dir(args.out, "ode")
    output.write_trajectory(out / "trajectory.csv", trajectory)
    payload = dataclasses.asdict(report)
    payload["final"] = list(trajectory.final)
    _write_json(out / "equilibrium.json", payload)
    print(f"{out}: case {report.case}, {report.attractor}; "
          f"final ({trajectory.final[0]:.6g}, {trajectory.final[1]:.6g})")
    return 0


def cmd_fit(args) -> int:
    out = _out_dir(args.out, "fit")
    series = ProliferationSeries.from_csv(args.growth_csv)
    growth = fit_growth(series, saturation=args.saturation)
    output.write_fit_csv(out / "growth_fit.csv", growth)
    print(f"{out}: growth b={growth.growth:.6g}, a={growth.quadratic:.6g}, "
          f"rss={growth.rss:.3e}")
    if args.mortality_csv is not None:
        treated = ProliferationSeries.from_csv(args.mortality_csv)
        mortality = fit_mortality(treated, growth.growth, growth.quadratic)
        output.write_fit_csv(out / "mortality_fit.csv", mortality)
        print(f"{out}: mortality delta={mortality.mortality:.6g}, "
              f"rss={mortality.rss:.3e}")
    return 0


def _load_history(run_dir: Path) -> tuple[PressureHistory, ExperimentConfig]:
    cfg_path = run_dir / "run_config.toml"
    if not cfg_path.is_file():
        raise ConfigError(f"{run_dir} has no run_config.toml; "
                          "point --run at a simulate output directory")
    cfg = config_from_dict(load_dict(cfg_path))
    grid = build_grid(cfg.grid)
    snaps = sorted(run_dir.glob("snap_*.csv"),
                   key=lambda p: float(p.stem[len("snap_"):]))
    if len(snaps) < 2:
        raise ConfigError(
            f"{run_dir} holds {len(snaps)} snapshot(s); tracing needs at "
            "least two (set run.snapshot_every and simulate again)")
    frames = [output.read_snapshot_csv(p, grid) for p in snaps]
    times = np.array([float(p.stem[len("snap_"):]) for p in snaps])
    history = PressureHistory(
        grid, times,
        (np.stack([f[0] for f in frames]), np.stack([f[1] for f in frames])),
        np.stack([f[2] for f in frames]), cfg.kinetics)
    return history, cfg


def _parse_start(text: str, dimension: int) -> tuple[float, ...]:
    try:
        point = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"bad start point {text!r}") from None
    if len(point) != dimension:
        raise ConfigError(f"start point {text!r} has {len(point)} "
                          f"coordinate(s); the run is {dimension}-dimensional")
    return point


def cmd_trace(args) -> int:
    run_dir = Path(args.run)
    history, cfg = _load_history(run_dir)
    lo, hi = history.span()
    t_start = lo if args.t_start is None else args.t_start
    t_end = hi if args.t_end is None else args.t_end
    starts = [_parse_start(text, history.grid.dimension)
              for text in args.start]
    mobility = cfg.kinetics.dispersal[args.species - 1]
    paths = trace_bundle(history, np.array(starts), t_start, t_end, mobility)
    out = _out_dir(args.out, str(run_dir / "trace"))

    entries = []
    for k, (start, path) in enumerate(zip(starts, paths)):
        name = f"path_{k}.csv"
        output.write_path_csv(out / name, path)
        recorded, predicted = representation_check(history, start, t_end,
                                                   args.species - 1)
        entries.append({
            "file": name,
            "start": list(start),
            "end": [float(v) for v in path.end],
            "jacobian": float(np.exp(mobility * path.compression[-1])),
            "compression": float(path.compression[-1]),
            "growth": [float(path.growth[-1, 0]), float(path.growth[-1, 1])],
            "max_overshoot": path.max_overshoot,
            "representation": {"recorded": recorded, "predicted": predicted},
        })
    _write_json(out / "trace_report.json", {
        "run": str(run_dir), "species": args.species, "mobility": mobility,
        "t_start": t_start, "t_end": t_end, "paths": entries,
    })
    worst = max(e["max_overshoot"] for e in entries)
    print(f"{out}: {len(entries)} path(s), largest boundary overshoot "
          f"{worst:.3e}")
    return 0


# -- entry point ------------------------------------------------------------

def main(argv=None) -> int:
    parser = build_parser()
    args, extras = parser.parse_known_args(argv)
    try:
        if args.list_presets:
            width = max(len(name) for name in preset_names())
            for name in preset_names():
                print(f"{name:<{width}}  {get_preset(name).note}")
            return 0
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 2
        if args.command in ("simulate", "seed"):
            return {"simulate": cmd_simulate,
                    "seed": cmd_seed}[args.command](args, _collect_overrides(extras))
        if extras:
            raise ConfigError(f"unexpected arguments: {' '.join(extras)}")
        return {"ode": cmd_ode, "fit": cmd_fit,
                "trace": cmd_trace}[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":              # pragma: no cover
    sys.exit(main())
