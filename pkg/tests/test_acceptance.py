"""End-to-end acceptance suite.

Each test verifies one headline guarantee of the solver and prints a
single PASS/FAIL line (visible with ``pytest -s``):

 1. summation-by-parts operator identity suite at machine precision
 2. secant (difference-quotient) identities for the double well and
    the density over a million random pairs
 3. discrete mass conservation on the capillary-wave benchmark
 4. discrete energy dissipation on the same runs
 5. second-order Cauchy convergence under mesh/time refinement
 6. quasi-incompressibility: discrete divergence vanishes in the bulk
 7. primitive vs projection agreement to second order in the time step
 8. multigrid robustness: convergence, contraction, mesh independence
 9. bit-for-bit deterministic benchmark output

The capillary, droplet and convergence runs take minutes each; they are
marked ``slow`` but run as part of the plain ``pytest`` invocation.

Check 6 currently fails, deliberately: with gravity on, the regularized
mobility carries a hydrostatic seepage flux that the zero-flux wall
edges truncate, leaving an O(1e-4) divergence in the two wall-adjacent
cell rows.  That is a property of the discretization, not a solver bug;
see the test docstring for the quantitative analysis.  Away from those
two rows the bulk divergence sits at solver tolerance.
"""

import filecmp
import math

import numpy as np
import pytest

from qnsch import (RunConfig, converge, default_levels, init_scenario, run,
                   run_selftest, solve_timestep)
from qnsch.diagnostics import divergence_field
from qnsch.physics import FluidPair, density_of, double_well, g_avg, r_avg

TOL_SOLVER = 1e-7


def _verdict(num, name, ok, detail):
    line = f"[acceptance {num}] {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


# ---------------------------------------------------------------------------
# shared benchmark runs

def _capillary_cfg(scheme, m, n_steps, out_dir="out"):
    """Damped capillary wave, density ratio 1:10, matched kinematic
    viscosity; periodic in x, no-slip walls in y."""
    return RunConfig.from_dict({
        "scheme": scheme,
        "grid": {"m1": m},
        "fluids": {"rho1": 1.0, "rho2": 10.0, "mu1": 1.0, "mu2": 10.0},
        "groups": {"epsilon": 0.01, "Re": 100.0, "We": 1.0, "Fr": 1.0},
        "scenario": "capillary",
        "time": {"dt": 1e-3, "t_end": n_steps * 1e-3, "report_every": 1},
        "output": {"directory": out_dir},
    })


@pytest.fixture(scope="module")
def capillary_runs():
    out = {}
    for scheme in ("primitive", "projection"):
        cfg = _capillary_cfg(scheme, 128, 500)
        state, reports = run(cfg, write_files=False)
        out[scheme] = (cfg, state, reports)
    return out


@pytest.fixture(scope="module")
def droplet_run():
    cfg = RunConfig.from_dict({
        "scheme": "primitive",
        "grid": {"m1": 128, "m2": 256, "Lx": 1.0, "Ly": 2.0},
        "fluids": {"rho1": 100.0, "rho2": 1000.0, "mu1": 1.0, "mu2": 10.0},
        "groups": {"epsilon": 0.01, "Re": 100.0, "We": 1.0, "Fr": 0.98},
        "scenario": "droplet",
        "time": {"dt": 1e-3, "t_end": 0.3, "report_every": 10},
    })
    state, reports = run(cfg, write_files=False)
    return cfg, state, reports


def _convergence_cfg(scheme):
    """Matched-density smooth-data configuration for refinement studies."""
    return RunConfig.from_dict({
        "scheme": scheme,
        "grid": {"m1": 16},
        "fluids": {"rho1": 1.0, "rho2": 1.0, "mu1": 1.0, "mu2": 1.0},
        "groups": {"epsilon": 0.1, "Re": 1.0, "We": 1.0, "Fr": 1.0},
        "scenario": "convergence",
        "time": {"dt": 1.0 / 16.0, "t_end": 1.0},
    })


# ---------------------------------------------------------------------------
# 1. operator identities

def test_01_operator_identities():
    passed, worst = run_selftest(ms=(8, 16, 32), tol=1e-12)
    worst_val = max(worst.values())
    _verdict(1, "operator identity suite", passed and worst_val <= 1e-12,
             f"max violation {worst_val:.3e} over {len(worst)} identities, "
             f"m in (8, 16, 32), walls/periodic/channel boundaries")


# ---------------------------------------------------------------------------
# 2. secant identities

def test_02_secant_identities():
    rng = np.random.default_rng(987654321)
    n = 1_000_000
    a = rng.uniform(-0.25, 1.25, n)
    b = rng.uniform(-0.25, 1.25, n)
    Fa, Fb = double_well(a)[0], double_well(b)[0]
    g = g_avg(a, b)
    # normalize by the operand magnitude (quartic terms), not by the
    # possibly cancelling difference itself
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)) ** 4)
    viol_g = float(np.max(np.abs(Fa - Fb - g * (a - b)) / scale))

    fl = FluidPair(1.0, 10.0, 1.0, 10.0)
    ar = rng.uniform(0.0, 1.0, n)
    br = rng.uniform(0.0, 1.0, n)
    ra, rb = density_of(ar, fl), density_of(br, fl)
    r = r_avg(ar, br, fl)
    viol_r = float(np.max(np.abs(ra - rb - r * (ar - br)) / (ra + rb)))

    ok = viol_g <= 1e-13 and viol_r <= 1e-13
    _verdict(2, "secant identities", ok,
             f"double-well {viol_g:.3e}, density {viol_r:.3e} "
             f"over {n} pairs each")


# ---------------------------------------------------------------------------
# 3. mass conservation / 4. energy dissipation

@pytest.mark.slow
def test_03_mass_conservation(capillary_runs):
    details = []
    ok = True
    for scheme, (cfg, _, reports) in capillary_runs.items():
        m_rho = np.array([r.mass_rho for r in reports])
        m_rhoc = np.array([r.mass_rhoc for r in reports])
        step = float(np.max(np.abs(np.diff(m_rho)))) / abs(m_rho[0])
        cum = float(np.max(np.abs(m_rho - m_rho[0]))) / abs(m_rho[0])
        comp = float(np.max(np.abs(m_rhoc - m_rhoc[0]))) / abs(m_rhoc[0])
        bound = 1e-10 if scheme == "primitive" else 1e-8
        ok = ok and step <= bound and cum <= bound and comp <= 1e-8
        details.append(f"{scheme}: step {step:.2e}, total {cum:.2e}, "
                       f"component {comp:.2e}")
    _verdict(3, "mass conservation over 500 capillary steps", ok,
             "; ".join(details))


@pytest.mark.slow
def test_04_energy_dissipation(capillary_runs):
    details = []
    ok = True
    for scheme, (cfg, _, reports) in capillary_runs.items():
        deltas = np.array([r.energy_delta for r in reports[1:]])
        slack = 10.0 * cfg.mg.tol * max(
            1.0, max(abs(r.energy) for r in reports))
        worst = float(np.max(deltas))
        ok = ok and worst <= slack
        details.append(f"{scheme}: max energy increment {worst:.2e} "
                       f"(slack {slack:.1e})")
    _verdict(4, "energy monotonically non-increasing", ok,
             "; ".join(details))


# ---------------------------------------------------------------------------
# 5. convergence rates

@pytest.mark.slow
@pytest.mark.parametrize("scheme", ["primitive", "projection"])
def test_05_convergence_rates(scheme):
    rows = converge(_convergence_cfg(scheme), default_levels(4))
    errs = [r[2] for r in rows]
    rates = [r[3] for r in rows if r[3] is not None]
    ok = (all(e1 > e2 for e1, e2 in zip(errs, errs[1:]))
          and all(r1 < r2 for r1, r2 in zip(rates, rates[1:]))
          and 1.7 <= rates[-1] <= 2.3)
    _verdict(5, f"{scheme} refinement study", ok,
             "errors " + " -> ".join(f"{e:.3e}" for e in errs)
             + ", rates " + ", ".join(f"{r:.2f}" for r in rates))


# ---------------------------------------------------------------------------
# 6. quasi-incompressibility locality

@pytest.mark.slow
def test_06_bulk_divergence(droplet_run):
    """The mass-averaged velocity is solenoidal only up to the mobility
    flux, so its discrete divergence should be negligible wherever the
    mixture is pure, i.e. in every cell with c(1-c) < 1e-4.

    Known limitation, asserted anyway: the regularized mobility keeps a
    floor of sqrt(eps) in pure phases, so the hydrostatic pressure
    gradient drives a uniform seepage flux m*grad(p) down each column.
    The zero-flux wall edges (required for exact mass conservation and
    the energy law) truncate that flux, which deposits a divergence of
    about alpha^2/Pe * sqrt(eps) * M*rho/(Fr*h) in the two
    wall-adjacent rows -- about 1e-4 here, orders of magnitude above
    solver tolerance.  Away from those two rows the bulk divergence is
    at solver-noise level, which the detail line reports separately.
    """
    cfg, state, _ = droplet_run
    div = divergence_field(state)[1:-1, 1:-1]
    c = state.c[1:-1, 1:-1]
    bulk = c * (1.0 - c) < 1e-4
    bulk_max = float(np.max(np.abs(div[bulk])))
    inner = bulk.copy()
    inner[:, 0] = inner[:, -1] = False      # drop the wall-adjacent rows
    inner_max = float(np.max(np.abs(div[inner])))
    gr = cfg.groups
    fl = cfg.fluids
    wall_pred = (gr.alpha ** 2 / gr.Pe * math.sqrt(gr.epsilon)
                 * gr.M * fl.rho2 / (gr.Fr * cfg.grid.h))
    iface_max = float(np.max(np.abs(div)))
    ok = bulk.any() and bulk_max <= 10.0 * cfg.mg.tol
    _verdict(6, "divergence confined to the interface band", ok,
             f"bulk max {bulk_max:.2e} over {int(bulk.sum())} cells "
             f"(wall seepage layer, predicted {wall_pred:.2e}); "
             f"bulk max away from walls {inner_max:.2e}, "
             f"global max {iface_max:.2e}")


# ---------------------------------------------------------------------------
# 7. scheme cross-check

def _one_step(scheme, dt):
    """Single matched-density step from a smooth interface profile.

    The grid is deliberately coarse (m=16) and the capillary forcing
    mild (We=10) so that dt times the stiffest operator mode is small
    for the whole dt triple; otherwise the splitting difference is
    contaminated by first-order boundary-layer-in-time transients and
    the second-order agreement only emerges at much smaller dt.
    """
    cfg = RunConfig.from_dict({
        "scheme": scheme,
        "grid": {"m1": 16},
        "fluids": {"rho1": 1.0, "rho2": 1.0, "mu1": 1.0, "mu2": 1.0},
        "groups": {"epsilon": 0.1, "Re": 100.0, "We": 10.0, "Fr": 1.0},
        "scenario": "capillary",
        "time": {"dt": dt, "t_end": dt},
        "multigrid": {"tol": 1e-12, "max_cycles": 400},
    })
    state = init_scenario(cfg)
    state, info = solve_timestep(state, cfg.params(), cfg.mg)
    assert info.converged
    return cfg, state


@pytest.mark.slow
def test_07_scheme_cross_check():
    diffs = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        cfg, sp = _one_step("primitive", dt)
        _, sq = _one_step("projection", dt)
        h = cfg.grid.h
        d2 = 0.0
        for a, b in ((sp.u, sq.u), (sp.v, sq.v), (sp.c, sq.c)):
            d2 += h * h * float(np.sum((a[1:-1, 1:-1] - b[1:-1, 1:-1]) ** 2))
        diffs.append(math.sqrt(d2))
    orders = [math.log2(d1 / d2) for d1, d2 in zip(diffs, diffs[1:])]
    ok = all(o >= 1.8 for o in orders)
    _verdict(7, "primitive/projection difference is O(dt^2)", ok,
             "diffs " + " -> ".join(f"{d:.3e}" for d in diffs)
             + ", observed orders " + ", ".join(f"{o:.2f}" for o in orders))


# ---------------------------------------------------------------------------
# 8. solver robustness

@pytest.mark.slow
def test_08_solver_robustness(capillary_runs):
    details = []
    ok = True
    # (a) every accepted benchmark step converged within the cycle budget
    for scheme, (cfg, _, reports) in capillary_runs.items():
        worst = max(r.cycles for r in reports[1:])
        ok = ok and worst < cfg.mg.max_cycles
        details.append(f"{scheme} max {worst} cycles")
    # (b) V-cycle contraction factor after cycle 2 at m=64
    for scheme in ("primitive", "projection"):
        cfg = _capillary_cfg(scheme, 64, 1)
        state = init_scenario(cfg)
        _, info = solve_timestep(state, cfg.params(), cfg.mg)
        hist = info.history
        factors = [hist[i + 1] / hist[i] for i in range(2, len(hist) - 1)]
        worst_f = max(factors) if factors else 0.0
        ok = ok and info.converged and worst_f <= 0.5
        details.append(f"{scheme} m=64 contraction {worst_f:.2f}")
    # (c) mesh-independent cycle counts: m=32 -> m=128 grows <= 50%
    for scheme, (_, _, reports) in capillary_runs.items():
        cfg32 = _capillary_cfg(scheme, 32, 1)
        state = init_scenario(cfg32)
        _, info32 = solve_timestep(state, cfg32.params(), cfg32.mg)
        c32, c128 = info32.cycles, reports[1].cycles
        ok = ok and c128 <= 1.5 * c32
        details.append(f"{scheme} cycles m=32:{c32} m=128:{c128}")
    _verdict(8, "multigrid robustness", ok, "; ".join(details))


# ---------------------------------------------------------------------------
# 9. determinism

@pytest.mark.slow
@pytest.mark.parametrize("scheme", ["primitive", "projection"])
def test_09_determinism(scheme, tmp_path):
    paths = []
    for tag in ("a", "b"):
        cfg = _capillary_cfg(scheme, 64, 5, out_dir=str(tmp_path / tag))
        run(cfg)
        paths.append(tmp_path / tag / cfg.csv_name)
    identical = filecmp.cmp(paths[0], paths[1], shallow=False)
    _verdict(9, f"{scheme} benchmark reruns byte-identical", identical,
             f"{paths[0].stat().st_size} bytes compared")
