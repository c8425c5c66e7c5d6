"""Tests for configuration parsing, scenario ICs, file output, the run
loop, and the command-line interface."""

import json
import os

import numpy as np
import pytest

from qnsch.cli import main
from qnsch.diagnostics import StepReport
from qnsch.grid import GridSpec, PERIODIC
from qnsch.output import (CSV_COLUMNS, read_timeseries, write_snapshot,
                          write_timeseries)
from qnsch.runner import converge, default_levels, run
from qnsch.scenarios import ConfigError, RunConfig, init_scenario
from qnsch.schemes import PROJECTION, State
from qnsch.selftest import run_selftest
from qnsch import selftest as selftest_mod


def cap_config(**over):
    d = {
        "scheme": "primitive",
        "grid": {"m1": 16, "m2": 16, "Lx": 1.0, "Ly": 1.0},
        "time": {"dt": 1e-3, "t_end": 2e-3, "report_every": 1},
        "fluids": {"rho1": 1.0, "rho2": 10.0, "mu1": 1.0, "mu2": 10.0},
        "groups": {"Re": 100.0, "We": 1.0, "Fr": 1.0, "epsilon": 0.05},
        "scenario": {"kind": "capillary"},
    }
    d.update(over)
    return d


# ---------------------------------------------------------------------------
# Configuration

def test_config_defaults_and_bc():
    cfg = RunConfig.from_dict(cap_config())
    assert cfg.groups.M == 0.05 and cfg.groups.Pe == 20.0
    assert cfg.bc.vel_x == PERIODIC          # channel default
    assert cfg.n_steps == 2
    assert cfg.groups.alpha == cfg.fluids.alpha


def test_config_rejects_bad_values():
    with pytest.raises(ConfigError):
        RunConfig.from_dict(cap_config(scheme="spectral"))
    with pytest.raises(ConfigError):
        RunConfig.from_dict(cap_config(
            time={"dt": 1e-3, "t_end": 1.5e-3}))
    with pytest.raises(ConfigError):
        RunConfig.from_dict(cap_config(scenario={"kind": "nope"}))
    with pytest.raises(ConfigError):
        RunConfig.from_dict(cap_config(
            output={"snapshot_times": [2.5e-4]}, time={"dt": 1e-3,
                                                       "t_end": 1e-3}))
    with pytest.raises(ConfigError):
        RunConfig.from_dict(cap_config(
            scenario={"kind": "rayleigh_taylor"}))   # needs Ly = 4 Lx


def test_config_json_roundtrip(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cap_config()))
    cfg = RunConfig.from_json(str(path))
    assert cfg.scenario == "capillary"
    with pytest.raises(ConfigError):
        RunConfig.from_json(str(tmp_path / "missing.json"))


# ---------------------------------------------------------------------------
# Scenario initial conditions

def test_convergence_ic_value():
    cfg = RunConfig.from_dict(cap_config(
        scenario={"kind": "convergence"},
        fluids={"rho1": 1.0, "rho2": 1.0},
        groups={"epsilon": 0.1}))
    st = init_scenario(cfg)
    x1 = 0.5 / 16
    assert abs(st.c[1, 1] - 2 * np.cos(2 * np.pi * x1)) < 1e-14
    assert np.all(st.u == 0) and np.all(st.p_bar == 0)


def test_capillary_ic_orientation():
    cfg = RunConfig.from_dict(cap_config())
    st = init_scenario(cfg)
    # heavier fluid (c=0 side, rho2=10) sits below by default
    assert st.c[1, 1] < 0.5 < st.c[1, 16]
    cfg2 = RunConfig.from_dict(cap_config(
        scenario={"kind": "capillary", "heavy_below": False}))
    st2 = init_scenario(cfg2)
    assert st2.c[1, 1] > 0.5 > st2.c[1, 16]


def test_droplet_ic_center_saturated():
    d = cap_config(scenario={"kind": "droplet"},
                   grid={"m1": 16, "m2": 32, "Lx": 1.0, "Ly": 2.0},
                   groups={"Re": 100.0, "We": 1.0, "Fr": 0.98,
                           "epsilon": 0.02})
    st = init_scenario(RunConfig.from_dict(d))
    assert st.c[8, 8] > 0.99          # inside the drop
    assert st.c[1, 28] < 0.01         # far outside


def test_projection_state_has_tilde():
    cfg = RunConfig.from_dict(cap_config(scheme=PROJECTION))
    st = init_scenario(cfg)
    assert st.u_tilde is not None and st.v_tilde is not None


# ---------------------------------------------------------------------------
# Output files

def test_csv_roundtrip(tmp_path):
    path = str(tmp_path / "ts.csv")
    rows = [StepReport(0.0, 5.5, 0.5, 1.25, 0.0, 0.0, 0, None),
            StepReport(1e-3, 5.5 + 1e-16, 0.5, 1.2499, -1e-4, 3.7e-9, 6,
                       -0.0097)]
    write_timeseries(rows, path)
    back = read_timeseries(path)
    assert back[0].metric is None
    for a, b in zip(rows, back):
        for f in ("time", "mass_rho", "mass_rhoc", "energy", "energy_delta",
                  "max_div", "cycles", "metric"):
            assert getattr(a, f) == getattr(b, f), f


def test_csv_header_only(tmp_path):
    path = str(tmp_path / "empty.csv")
    write_timeseries([], path)
    raw = open(path, "rb").read()
    assert raw == (",".join(CSV_COLUMNS) + "\n").encode()
    assert b"\r" not in raw


def test_vtk_snapshot_constant_field(tmp_path):
    g = GridSpec(8, 8, 1.0 / 8)
    s = State.zeros(g)
    s.c[...] = 1.0
    path = str(tmp_path / "snap.vtk")
    write_snapshot(s, path)
    lines = open(path).read().splitlines()
    assert lines[0].startswith("# vtk DataFile")
    assert "DATASET STRUCTURED_POINTS" in lines
    assert f"DIMENSIONS 9 9 1" in lines
    i = lines.index("SCALARS c double 1")
    vals = np.fromstring(" ".join(lines[i + 2:i + 10]), sep=" ")
    assert vals.size == 64 and np.all(vals == 1.0)
    j = lines.index("VECTORS velocity double")
    assert len(lines) - (j + 1) == 81


# ---------------------------------------------------------------------------
# Run loop

def test_zero_step_run(tmp_path):
    cfg = RunConfig.from_dict(cap_config(
        time={"dt": 1e-3, "t_end": 0.0},
        output={"directory": str(tmp_path)}))
    _, reports = run(cfg)
    assert len(reports) == 1
    assert reports[0].energy_delta == 0.0
    assert os.path.exists(tmp_path / "timeseries.csv")


def test_run_outputs_reproducible(tmp_path):
    base = cap_config()
    cfg1 = RunConfig.from_dict({**base, "output":
                                {"directory": str(tmp_path / "a")}})
    cfg2 = RunConfig.from_dict({**base, "output":
                                {"directory": str(tmp_path / "b")}})
    run(cfg1)
    run(cfg2)
    a = open(tmp_path / "a" / "timeseries.csv", "rb").read()
    b = open(tmp_path / "b" / "timeseries.csv", "rb").read()
    assert a == b


def test_run_mass_and_energy_guards_hold(tmp_path):
    cfg = RunConfig.from_dict(cap_config(
        output={"directory": str(tmp_path), "guard_mode": "fail"}))
    _, reports = run(cfg)
    m0 = reports[0].mass_rho
    for r in reports[1:]:
        assert abs(r.mass_rho - m0) <= 1e-10 * m0
        assert r.energy_delta <= 10 * cfg.mg.tol * abs(r.energy)


# ---------------------------------------------------------------------------
# Convergence harness

@pytest.mark.slow
def test_converge_two_levels():
    cfg = RunConfig.from_dict(cap_config(
        scenario={"kind": "convergence"},
        fluids={"rho1": 1.0, "rho2": 1.0},
        groups={"epsilon": 0.1},
        time={"dt": 1.0 / 16, "t_end": 1.0 / 16}))
    rows = converge(cfg, default_levels(2))
    assert len(rows) == 1
    (mc, mf, err, rate) = rows[0]
    assert (mc, mf) == (16, 32)
    assert err > 0 and rate is None


def test_default_levels_schedule():
    assert default_levels(3) == [(16, 1.0 / 16), (32, 1.0 / 64),
                                 (64, 1.0 / 256)]


# ---------------------------------------------------------------------------
# Selftest and CLI

def test_selftest_small_passes():
    passed, worst = run_selftest(ms=(8,))
    assert passed
    assert max(worst.values()) <= 1e-12


def test_selftest_detects_corrupted_stencil(monkeypatch):
    real = selftest_mod.ch_advection_flux

    def corrupted(rho, c, u, v, g):
        return 1.001 * real(rho, c, u, v, g)

    monkeypatch.setattr(selftest_mod, "ch_advection_flux", corrupted)
    passed, worst = run_selftest(ms=(8,))
    assert not passed
    assert max(worst["advection_mass_identity"],
               worst["surface_tension_duality"]) > 1e-6


def test_cli_config_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(cap_config(scheme="nope")))
    assert main(["run", "--config", str(bad)]) == 2
    assert main(["run", "--config", str(tmp_path / "none.json")]) == 2


def test_cli_run_and_outputs(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cap_config(
        output={"directory": str(tmp_path / "out")})))
    code = main(["run", "--config", str(path), "--scheme", "projection"])
    assert code == 0
    assert (tmp_path / "out" / "timeseries.csv").exists()
    assert "completed 2 steps" in capsys.readouterr().out
