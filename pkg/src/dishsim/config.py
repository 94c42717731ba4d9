"""Experiment configuration: TOML loading, emission, and overrides.

One file describes one run: [grid], [kinetics], [seeding] (with
[seeding.species1] / [seeding.species2] subtables), and [run].  Keys mirror
the dataclass field names one-to-one, floats are emitted with repr so a
written config reloads to bit-identical values, and unknown sections or
keys are rejected rather than ignored.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:                       # python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .grid import GridSpec
from .kinetics import KineticParams
from .seeding import SeedingConfig, SeedSpec
from .simulator import SimSettings

_SECTIONS = ("grid", "kinetics", "seeding", "run")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one simulation run needs, minus output paths."""

    grid: GridSpec
    kinetics: KineticParams
    seeding: SeedingConfig
    run: SimSettings


# -- building from plain dictionaries --------------------------------------

def _coerce(cls_name: str, field: dataclasses.Field, value):
    kind = field.type
    label = f"{cls_name}.{field.name}"
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{label} must be an integer, got {value!r}")
        return value
    if kind in ("float", "float | None"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{label} must be a number, got {value!r}")
        return float(value)
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{label} must be a string, got {value!r}")
        return value
    raise ConfigError(f"{label} cannot be set from a config file")


def _build(cls, data: dict, where: str, skip=()):
    if not isinstance(data, dict):
        raise ConfigError(f"[{where}] must be a table")
    names = {f.name: f for f in dataclasses.fields(cls) if f.name not in skip}
    kwargs = {}
    for key, value in data.items():
        if key not in names:
            raise ConfigError(f"unknown key '{key}' in [{where}]")
        kwargs[key] = _coerce(cls.__name__, names[key], value)
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"[{where}]: {exc}") from exc


def _centers(raw, where: str):
    if raw is None:
        return None
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{where} must be a non-empty array of points")
    out = []
    for point in raw:
        if (not isinstance(point, list)
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool)
                           for c in point)):
            raise ConfigError(f"{where} entries must be arrays of numbers")
        out.append(tuple(float(c) for c in point))
    return tuple(out)


def _build_seeding(data: dict) -> SeedingConfig:
    if not isinstance(data, dict):
        raise ConfigError("[seeding] must be a table")
    known = {"mode", "centers1", "centers2", "species1", "species2"}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown key '{key}' in [seeding]")
    if "species1" not in data:
        raise ConfigError("[seeding] needs a [seeding.species1] table")
    species1 = _build(SeedSpec, data["species1"], "seeding.species1")
    species2 = None
    if "species2" in data:
        species2 = _build(SeedSpec, data["species2"], "seeding.species2")
    kwargs = {}
    if "mode" in data:
        if not isinstance(data["mode"], str):
            raise ConfigError("seeding.mode must be a string")
        kwargs["mode"] = data["mode"]
    return SeedingConfig(
        species1=species1, species2=species2,
        centers1=_centers(data.get("centers1"), "seeding.centers1"),
        centers2=_centers(data.get("centers2"), "seeding.centers2"),
        **kwargs)


def config_from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a table")
    for key in data:
        if key not in _SECTIONS:
            raise ConfigError(f"unknown config section [{key}]")
    for section in _SECTIONS:
        if section not in data:
            raise ConfigError(f"config is missing the [{section}] section")
    return ExperimentConfig(
        grid=_build(GridSpec, data["grid"], "grid"),
        kinetics=_build(KineticParams, data["kinetics"], "kinetics"),
        seeding=_build_seeding(data["seeding"]),
        run=_build(SimSettings, data["run"], "run"),
    )


def load_dict(path) -> dict:
    """Read a TOML file into a raw dictionary (before validation)."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_config(path) -> ExperimentConfig:
    return config_from_dict(load_dict(path))


# -- emission ---------------------------------------------------------------

def _format_value(value) -> str:
    if isinstance(value, bool):
        raise ConfigError(f"cannot emit {value!r}")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, tuple):
        return "[" + ", ".join(_format_value(list(v) if isinstance(v, tuple)
                                             else v) for v in value) + "]"
    if isinstance(value, list):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    raise ConfigError(f"cannot emit {value!r}")


def _emit_table(name: str, obj, skip=()) -> list[str]:
    lines = [f"[{name}]"]
    for field in dataclasses.fields(obj):
        if field.name in skip:
            continue
        value = getattr(obj, field.name)
        if value is None:
            continue
        lines.append(f"{field.name} = {_format_value(value)}")
    lines.append("")
    return lines


def config_to_toml(cfg: ExperimentConfig) -> str:
    lines = _emit_table("grid", cfg.grid)
    lines += _emit_table("kinetics", cfg.kinetics)
    seeding = ["[seeding]", f"mode = {json.dumps(cfg.seeding.mode)}"]
    if cfg.seeding.centers1 is not None:
        seeding.append(f"centers1 = {_format_value(cfg.seeding.centers1)}")
    if cfg.seeding.centers2 is not None:
        seeding.append(f"centers2 = {_format_value(cfg.seeding.centers2)}")
    seeding.append("")
    lines += seeding
    lines += _emit_table("seeding.species1", cfg.seeding.species1)
    if cfg.seeding.species2 is not None:
        lines += _emit_table("seeding.species2", cfg.seeding.species2)
    lines += _emit_table("run", cfg.run)
    return "\n".join(lines)


def write_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(config_to_toml(cfg))


# -- overrides ---------------------------------------------------------------

def parse_override_value(text: str):
    """Interpret an override value as a TOML literal, else a bare string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(data: dict, pairs) -> dict:
    """Apply dotted-path overrides to a raw config dictionary, in place.

    pairs are (path, text) tuples such as ("kinetics.mortality1", "0.4");
    values go through the TOML literal parser, and path validity is left to
    config_from_dict so unknown names fail with the same message either way.
    """
    for path, text in pairs:
        parts = path.split(".")
        if not all(parts):
            raise ConfigError(f"bad override path '{path}'")
        node = data
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override '{path}' descends into a value")
        node[parts[-1]] = parse_override_value(text)
    return data
