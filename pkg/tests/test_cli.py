"""End-to-end tests for the command-line driver."""

from __future__ import annotations

import json

import numpy as np
import pytest

from dishsim.cli import main
from dishsim.config import load_config
from dishsim.fitting import logistic_solution
from dishsim.grid import build_grid
from dishsim.output import read_metrics, read_snapshot_csv

TINY_1D = """\
[grid]
dimension = 1
resolution = 16

[kinetics]
growth1 = 0.0
growth2 = 0.0
comp11 = 0.0
comp22 = 0.0

[seeding]
centers1 = [[0.2]]
centers2 = [[-0.3]]

[seeding.species1]
clusters = 1
mass = 0.05
sigma = 0.08
seed = 21

[seeding.species2]
clusters = 1
mass = 0.05
sigma = 0.08
seed = 22

[run]
t_end = 0.05
output_every = 0.025
snapshot_every = 0.025
"""


def write_tiny_config(tmp_path):
    path = tmp_path / "tiny.toml"
    path.write_text(TINY_1D)
    return path


def fit_series_csv(tmp_path, name, growth, quadratic, mortality=0.0):
    times = np.arange(0.0, 6.0 + 1e-9, 0.5)
    counts = logistic_solution(times, 1.0, growth, quadratic, mortality)
    lines = ["t,count"] + [f"{float(t)!r},{float(c)!r}"
                           for t, c in zip(times, counts)]
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n")
    return path


# -- global flags -----------------------------------------------------------

def test_list_presets(capsys):
    assert main(["--list-presets"]) == 0
    out = capsys.readouterr().out
    for name in ("conservation", "case_iv", "segregation", "gaussian_1d"):
        assert name in out


def test_no_command_prints_usage(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


# -- simulate ---------------------------------------------------------------

def test_simulate_config_file_writes_run_directory(tmp_path, capsys):
    cfg_path = write_tiny_config(tmp_path)
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(cfg_path),
                 "--out", str(out)]) == 0
    for name in ("run_config.toml", "metrics.csv", "snap_0.000.csv",
                 "snap_0.025.csv", "snap_0.050.csv", "snap_0.050_u1.pgm",
                 "snap_0.050_u2.pgm", "snap_0.050_P.pgm"):
        assert (out / name).exists(), name
    rows = read_metrics(out / "metrics.csv")
    assert rows[0].t == 0.0
    assert rows[-1].t == pytest.approx(0.05)
    assert abs(rows[-1].mass_residual) < 1e-12
    assert "largest negativity clamp" in capsys.readouterr().out


def test_simulate_preset_with_overrides(tmp_path):
    out = tmp_path / "run"
    assert main(["simulate", "--preset", "conservation", "--out", str(out),
                 "--grid.resolution", "12", "--run.t_end", "0.02",
                 "--run.output_every", "0.01", "--run.snapshot_every=0.02",
                 "--seeding.species1.clusters", "3",
                 "--seeding.species2.clusters", "3"]) == 0
    cfg = load_config(out / "run_config.toml")
    assert cfg.grid.resolution == 12
    assert cfg.run.t_end == 0.02
    assert cfg.seeding.species1.clusters == 3
    grid = build_grid(cfg.grid)
    u1, _, pressure = read_snapshot_csv(out / "snap_0.020.csv", grid)
    assert np.all(u1 >= 0.0)
    assert pressure.shape == (grid.n_cells,)


def test_simulate_reruns_are_byte_identical(tmp_path):
    cfg_path = write_tiny_config(tmp_path)
    dirs = (tmp_path / "a", tmp_path / "b")
    for d in dirs:
        assert main(["simulate", "--config", str(cfg_path),
                     "--out", str(d)]) == 0
    for name in ("metrics.csv", "snap_0.050.csv", "snap_0.050_u1.pgm",
                 "run_config.toml"):
        assert ((dirs[0] / name).read_bytes()
                == (dirs[1] / name).read_bytes()), name


def test_simulate_requires_exactly_one_source(tmp_path, capsys):
    cfg_path = write_tiny_config(tmp_path)
    assert main(["simulate"]) == 2
    assert "--preset or --config" in capsys.readouterr().err
    assert main(["simulate", "--preset", "conservation",
                 "--config", str(cfg_path)]) == 2


def test_simulate_rejects_unknown_preset(capsys):
    assert main(["simulate", "--preset", "nope"]) == 2
    assert "unknown preset" in capsys.readouterr().err


def test_simulate_rejects_bad_overrides(tmp_path, capsys):
    cfg_path = write_tiny_config(tmp_path)
    assert main(["simulate", "--config", str(cfg_path),
                 "--kinetics.growth9", "1.0"]) == 2
    assert "growth9" in capsys.readouterr().err
    assert main(["simulate", "--config", str(cfg_path), "stray"]) == 2
    assert main(["simulate", "--config", str(cfg_path), "--cfl", "0.4"]) == 2
    assert main(["simulate", "--config", str(cfg_path),
                 "--run.cfl"]) == 2


# -- seed -------------------------------------------------------------------

def test_seed_writes_initial_snapshot(tmp_path):
    out = tmp_path / "seeded"
    assert main(["seed", "--preset", "gaussian_1d", "--out", str(out),
                 "--grid.resolution", "32"]) == 0
    cfg = load_config(out / "run_config.toml")
    grid = build_grid(cfg.grid)
    u1, u2, pressure = read_snapshot_csv(out / "snap_0.000.csv", grid)
    assert grid.integrate(u1) == pytest.approx(0.25, rel=1e-12)
    assert np.all(u2 == 0.0)
    assert np.all(np.isfinite(pressure))


# -- ode --------------------------------------------------------------------

def test_ode_writes_trajectory_and_report(tmp_path, capsys):
    out = tmp_path / "ode"
    assert main(["ode", "--mortality1", "0.4", "--comp12", "0.2",
                 "--comp21", "1.0", "--t-end", "5", "--out", str(out)]) == 0
    report = json.loads((out / "equilibrium.json").read_text())
    assert report["case"] == "i"
    assert len(report["final"]) == 2
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,u1,u2"
    assert len(lines) > 100
    assert "case i" in capsys.readouterr().out


def test_ode_rejects_doomed_populations(capsys):
    assert main(["ode", "--mortality1", "1.0", "--mortality2", "1.0"]) == 2
    assert "decay" in capsys.readouterr().err


def test_ode_rejects_oversized_steps(capsys):
    assert main(["ode", "--dt", "0.5"]) == 2
    assert "dt" in capsys.readouterr().err


# -- fit --------------------------------------------------------------------

def test_fit_recovers_generator_rates(tmp_path, capsys):
    growth_csv = fit_series_csv(tmp_path, "untreated.csv", 0.6420,
                                0.6420 / 129.0)
    treated_csv = fit_series_csv(tmp_path, "treated.csv", 0.6420,
                                 0.6420 / 129.0, mortality=0.2192)
    out = tmp_path / "fits"
    assert main(["fit", "--growth-csv", str(growth_csv),
                 "--mortality-csv", str(treated_csv),
                 "--out", str(out)]) == 0
    b, a, delta, rss = [float(v) for v in
                        (out / "growth_fit.csv").read_text()
                        .splitlines()[1].split(",")]
    assert b == pytest.approx(0.6420, abs=1e-6)
    assert a == pytest.approx(b / 129.0, rel=1e-12)
    assert delta == 0.0
    assert rss < 1e-15
    _, _, delta, _ = [float(v) for v in
                      (out / "mortality_fit.csv").read_text()
                      .splitlines()[1].split(",")]
    assert delta == pytest.approx(0.2192, abs=1e-6)
    assert "growth b=" in capsys.readouterr().out


def test_fit_missing_file(tmp_path, capsys):
    assert main(["fit", "--growth-csv", str(tmp_path / "none.csv")]) == 2
    assert "cannot read" in capsys.readouterr().err


# -- trace ------------------------------------------------------------------

def gaussian_run(tmp_path):
    out = tmp_path / "gauss"
    assert main(["simulate", "--preset", "gaussian_1d", "--out", str(out),
                 "--grid.resolution", "128", "--run.t_end", "0.1",
                 "--run.snapshot_every", "0.01"]) == 0
    return out


def test_trace_writes_paths_and_report(tmp_path):
    run = gaussian_run(tmp_path)
    assert main(["trace", "--run", str(run), "--start", "0.05",
                 "--start", "-0.1"]) == 0
    trace_dir = run / "trace"
    report = json.loads((trace_dir / "trace_report.json").read_text())
    assert report["species"] == 1
    assert report["mobility"] == 2.0
    assert len(report["paths"]) == 2
    for k, entry in enumerate(report["paths"]):
        assert (trace_dir / entry["file"]).exists()
        assert entry["jacobian"] > 0.0
        assert entry["max_overshoot"] <= 1e-8
        rec = entry["representation"]["recorded"]
        pred = entry["representation"]["predicted"]
        assert rec == pytest.approx(pred, rel=0.1)
        lines = (trace_dir / f"path_{k}.csv").read_text().splitlines()
        assert lines[0] == "t,x,y,compression,growth1,growth2"
        assert len(lines) > 2


def test_trace_rejects_bad_runs(tmp_path, capsys):
    assert main(["trace", "--run", str(tmp_path / "missing"),
                 "--start", "0.0"]) == 2
    assert "run_config.toml" in capsys.readouterr().err
    run = gaussian_run(tmp_path)
    for snap in sorted(run.glob("snap_*.csv"))[1:]:
        snap.unlink()
    assert main(["trace", "--run", str(run), "--start", "0.0"]) == 2
    assert "at least two" in capsys.readouterr().err


def test_trace_rejects_wrong_start_dimension(tmp_path, capsys):
    run = gaussian_run(tmp_path)
    assert main(["trace", "--run", str(run), "--start", "0.1,0.2"]) == 2
    assert "1-dimensional" in capsys.readouterr().err


def test_trace_rejects_windows_outside_the_recording(tmp_path):
    run = gaussian_run(tmp_path)
    assert main(["trace", "--run", str(run), "--start", "0.0",
                 "--t-end", "5.0"]) == 2
