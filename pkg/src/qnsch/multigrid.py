"""Nonlinear FAS multigrid solver for the implicit time step.

Each time step solves the coupled nonlinear system with full
approximation scheme (FAS) V-cycles.  The smoother is a red-black
two-stage sweep:

* a nonlinear Gauss-Seidel pass on the phase/chemical-potential pair
  (2x2 Newton per cell, vectorized over each color class — the pair's
  stencil has radius one, so same-color cells decouple exactly);
* for the primitive scheme, a Vanka box pass updating the four edge
  velocities and the cell pressure together through a 5x5 local solve
  whose Jacobian is assembled analytically from the frozen old-time
  coefficients;
* for the projection scheme, the four-step sequence: predictor box
  update (4x4, pressure absent), scalar pressure relaxation on the
  quasi-incompressibility equation with the corrected velocity
  substituted in, then the explicit projection update of the velocity.

Transfers are 2-child/4-child averaging restriction and bilinear
prolongation (with matching coincident-line edge variants); the
coarsest level is relaxed with extra smoother sweeps instead of a
direct solve.  The pressure mean is pinned to zero after every cycle
(it only ever appears differentiated).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .grid import (BcSet, CellField, EwField, GridSpec, NsField, PERIODIC,
                   fill_ghost)
from . import operators as ops
from .physics import density_of
from .physics import double_well, g_avg, r_avg
from .schemes import (PRIMITIVE, PROJECTION, Residual, SchemeParams, State,
                      StepCoeffs, _cfill, _mask_wall_rows,
                      _mobility_laplacian, _viscous, _weighted_laplacian,
                      ch_advection_flux, gradc_squared, momentum_advection,
                      residual_primitive, residual_projection,
                      surface_tension_force)

__all__ = [
    "MgConfig", "MgHierarchy", "SolveInfo", "solve_timestep",
    "restrict_cell", "restrict_ew", "restrict_ns",
    "prolong_cell", "prolong_ew", "prolong_ns",
]


@dataclass(frozen=True)
class MgConfig:
    """Multigrid controls; defaults are solid for all benchmark runs."""

    n_levels: Optional[int] = None      # None: coarsen while possible
    pre_smooths: int = 2
    post_smooths: int = 2
    coarse_sweeps: int = 20
    tol: float = 1e-7
    max_cycles: int = 200
    newton_iters: int = 5
    newton_tol: float = 1e-10
    min_coarse: int = 4

    def __post_init__(self):
        for name in ("pre_smooths", "post_smooths", "coarse_sweeps",
                     "max_cycles", "newton_iters", "min_coarse"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.tol <= 0 or self.newton_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class SolveInfo:
    cycles: int
    residual_norm: float
    history: list
    converged: bool


# ---------------------------------------------------------------------------
# Inter-grid transfers

def restrict_cell(f: np.ndarray, gf: GridSpec) -> np.ndarray:
    """Full weighting: coarse cell = mean of its four fine children."""
    m1c, m2c = gf.m1 // 2, gf.m2 // 2
    out = np.zeros((m1c + 2, m2c + 2))
    fi = f[1:-1, 1:-1]
    out[1:-1, 1:-1] = 0.25 * (fi[0::2, 0::2] + fi[1::2, 0::2]
                              + fi[0::2, 1::2] + fi[1::2, 1::2])
    return out


def restrict_ew(f: np.ndarray, gf: GridSpec) -> np.ndarray:
    """Coarse EW edge = mean of the two coincident fine edges above it."""
    m1c, m2c = gf.m1 // 2, gf.m2 // 2
    out = np.zeros((m1c + 3, m2c + 2))
    out[1:m1c + 2, 1:m2c + 1] = 0.5 * (f[1:gf.m1 + 2:2, 1:gf.m2 + 1:2]
                                       + f[1:gf.m1 + 2:2, 2:gf.m2 + 2:2])
    return out


def restrict_ns(f: np.ndarray, gf: GridSpec) -> np.ndarray:
    m1c, m2c = gf.m1 // 2, gf.m2 // 2
    out = np.zeros((m1c + 2, m2c + 3))
    out[1:m1c + 1, 1:m2c + 2] = 0.5 * (f[1:gf.m1 + 1:2, 1:gf.m2 + 2:2]
                                       + f[2:gf.m1 + 2:2, 1:gf.m2 + 2:2])
    return out


def prolong_cell(c: np.ndarray, gc: GridSpec, gf: GridSpec) -> np.ndarray:
    """Bilinear interpolation of a ghost-filled coarse cell field."""
    out = np.zeros((gf.m1 + 2, gf.m2 + 2))
    cc = c[1:-1, 1:-1]
    w = 1.0 / 16.0
    out[1:gf.m1 + 1:2, 1:gf.m2 + 1:2] = w * (
        9 * cc + 3 * c[0:-2, 1:-1] + 3 * c[1:-1, 0:-2] + c[0:-2, 0:-2])
    out[2:gf.m1 + 2:2, 1:gf.m2 + 1:2] = w * (
        9 * cc + 3 * c[2:, 1:-1] + 3 * c[1:-1, 0:-2] + c[2:, 0:-2])
    out[1:gf.m1 + 1:2, 2:gf.m2 + 2:2] = w * (
        9 * cc + 3 * c[0:-2, 1:-1] + 3 * c[1:-1, 2:] + c[0:-2, 2:])
    out[2:gf.m1 + 2:2, 2:gf.m2 + 2:2] = w * (
        9 * cc + 3 * c[2:, 1:-1] + 3 * c[1:-1, 2:] + c[2:, 2:])
    return out


def prolong_ew(u: np.ndarray, gc: GridSpec, gf: GridSpec) -> np.ndarray:
    """EW edges: linear interpolation along the coincident vertical lines,
    then averaging of the two neighboring lines for the in-between fine
    edges (coarse ghosts supply the wrap/wall extension)."""
    m1c, m2c = gc.m1, gc.m2
    lo = 0.75 * u[:, 1:m2c + 1] + 0.25 * u[:, 0:m2c]
    hi = 0.75 * u[:, 1:m2c + 1] + 0.25 * u[:, 2:m2c + 2]
    t = np.zeros((m1c + 3, gf.m2))
    t[:, 0::2] = lo
    t[:, 1::2] = hi
    out = np.zeros((gf.m1 + 3, gf.m2 + 2))
    out[1:gf.m1 + 2:2, 1:-1] = t[1:m1c + 2]
    out[2:gf.m1 + 1:2, 1:-1] = 0.5 * (t[1:m1c + 1] + t[2:m1c + 2])
    return out


def prolong_ns(v: np.ndarray, gc: GridSpec, gf: GridSpec) -> np.ndarray:
    m1c, m2c = gc.m1, gc.m2
    lo = 0.75 * v[1:m1c + 1, :] + 0.25 * v[0:m1c, :]
    hi = 0.75 * v[1:m1c + 1, :] + 0.25 * v[2:m1c + 2, :]
    t = np.zeros((gf.m1, m2c + 3))
    t[0::2, :] = lo
    t[1::2, :] = hi
    out = np.zeros((gf.m1 + 2, gf.m2 + 3))
    out[1:-1, 1:gf.m2 + 2:2] = t[:, 1:m2c + 2]
    out[1:-1, 2:gf.m2 + 1:2] = 0.5 * (t[:, 1:m2c + 1] + t[:, 2:m2c + 2])
    return out


# ---------------------------------------------------------------------------
# Per-level bookkeeping

_CELL_EQS = ("mass", "phase", "chem")
_RESTRICT = {"momx": restrict_ew, "momy": restrict_ns, "projx": restrict_ew,
             "projy": restrict_ns, "mass": restrict_cell,
             "phase": restrict_cell, "chem": restrict_cell}


class Level:
    """One multigrid level: grid, frozen old-time data, rhs, iterate."""

    def __init__(self, grid: GridSpec, old: State, p: SchemeParams):
        self.grid = grid
        self.old = old
        self.coeffs = StepCoeffs(old, p)
        self.x: Optional[State] = None
        self.rhs: dict[str, np.ndarray] = {}
        m1, m2 = grid.m1, grid.m2
        ii, jj = np.meshgrid(np.arange(1, m1 + 1), np.arange(1, m2 + 1),
                             indexing="ij")
        self.colors = [(ii[(ii + jj) % 2 == k], jj[(ii + jj) % 2 == k])
                       for k in (0, 1)]
        # new-time density at edges, refreshed whenever c changes
        self.Ax_rho1 = self.coeffs.Ax_rho.copy()
        self.Ay_rho1 = self.coeffs.Ay_rho.copy()
        self._mob_edge_sums(p)

    def refresh_rho_new(self, p: SchemeParams):
        g = self.grid
        rho1 = _cfill(density_of(self.x.c, p.fluids), g, p.bc)
        self.Ax_rho1 = ops.avg_ce_x(rho1, g)
        self.Ay_rho1 = ops.avg_ce_y(rho1, g)

    def _mob_edge_sums(self, p: SchemeParams):
        """Active-edge mobility sums for the pressure diagonal."""
        g = self.grid
        m1, m2 = g.m1, g.m2
        axm, aym = self.coeffs.Ax_mob, self.coeffs.Ay_mob
        act_w = np.ones((m1, m2))
        act_e = np.ones((m1, m2))
        act_s = np.ones((m1, m2))
        act_n = np.ones((m1, m2))
        if p.bc.cell_x != PERIODIC:
            act_w[0, :] = 0.0
            act_e[-1, :] = 0.0
        if p.bc.cell_y != PERIODIC:
            act_s[:, 0] = 0.0
            act_n[:, -1] = 0.0
        self.mob_diag = (act_e * axm[2:-1, 1:-1] + act_w * axm[1:-2, 1:-1]
                         + act_n * aym[1:-1, 2:-1] + act_s * aym[1:-1, 1:-2])
        self.act = (act_e, act_w, act_n, act_s)


def _residual_of(lvl: Level, p: SchemeParams) -> Residual:
    if p.scheme == PRIMITIVE:
        return residual_primitive(lvl.old, lvl.x, p, lvl.coeffs)
    return residual_projection(lvl.old, lvl.x, p, lvl.coeffs)


def _defect(lvl: Level, p: SchemeParams) -> dict:
    """f - N(x) per equation (rhs defaults to zero on the finest level)."""
    fields = _residual_of(lvl, p).fields()
    out = {}
    for k, arr in fields.items():
        r = lvl.rhs.get(k)
        out[k] = (r - arr) if r is not None else -arr
    return out


def _defect_norm(lvl: Level, p: SchemeParams) -> float:
    return max(float(np.max(np.abs(a))) for a in _defect(lvl, p).values())


# ---------------------------------------------------------------------------
# Cahn-Hilliard pair smoother (nonlinear red-black Gauss-Seidel)

def _chem_eval(lvl: Level, p: SchemeParams, rho_new: np.ndarray,
               lhs_rho: np.ndarray) -> np.ndarray:
    """Chemical-potential residual reusing the cached old-time halves."""
    g = lvl.grid
    x, old, co, gr = lvl.x, lvl.old, lvl.coeffs, p.groups
    k1 = gr.M * gr.eta / (gr.epsilon * gr.We)
    k2 = gr.epsilon * gr.eta * gr.M / (2.0 * gr.We)
    k3 = gr.epsilon * gr.eta * gr.M / gr.We
    rho_half = 0.5 * (rho_new + co.rho_n)
    F_half = 0.5 * (double_well(x.c)[0] + co.F_n)
    gradc2_half = 0.5 * (gradc_squared(x.c, g) + co.gradc2_n)
    gsec = g_avg(x.c, old.c)
    rsec = r_avg(x.c, old.c, p.fluids)
    c_half = 0.5 * (x.c + old.c)
    r = (lhs_rho * x.mu_bar
         - k1 * (rho_half * gsec + F_half * rsec)
         - k2 * gradc2_half * rsec
         + k3 * _weighted_laplacian(rho_half, c_half, g))
    r[0, :] = r[-1, :] = 0.0
    r[:, 0] = r[:, -1] = 0.0
    return r


def _ch_residuals(lvl: Level, p: SchemeParams, flux_fixed, lap_p_fixed):
    """Phase and chemical residuals minus their FAS right-hand sides."""
    g = lvl.grid
    x, old, coeffs, gr = lvl.x, lvl.old, lvl.coeffs, p.groups
    lap_mu = _mobility_laplacian(coeffs, x.mu_bar)
    rho1 = _cfill(density_of(x.c, p.fluids), g, p.bc)
    if p.scheme == PRIMITIVE:
        r_phase = (rho1 * (x.c - old.c) / p.dt + flux_fixed
                   - lap_mu / gr.Pe - (gr.alpha / gr.Pe) * lap_p_fixed)
        r_chem = _chem_eval(lvl, p, rho1, rho1)
    else:
        flux = ch_advection_flux(rho1, x.c, x.u, x.v, g)
        r_phase = (coeffs.rho_n * (x.c - old.c) / p.dt + flux
                   - lap_mu / gr.Pe - (gr.alpha / gr.Pe) * lap_p_fixed)
        r_chem = _chem_eval(lvl, p, rho1, coeffs.rho_n)
    r_phase[0, :] = r_phase[-1, :] = 0.0
    r_phase[:, 0] = r_phase[:, -1] = 0.0
    if "phase" in lvl.rhs:
        r_phase = r_phase - lvl.rhs["phase"]
        r_chem = r_chem - lvl.rhs["chem"]
    return r_phase, r_chem


def _ch_sweep(lvl: Level, p: SchemeParams, cfg: MgConfig):
    g = lvl.grid
    x = lvl.x
    gr = p.groups
    bc = p.bc
    if p.scheme == PRIMITIVE:
        flux_fixed = ch_advection_flux(lvl.coeffs.rho_n, lvl.coeffs.c_n,
                                       x.u, x.v, g)
    else:
        flux_fixed = None
    lap_p_fixed = _mobility_laplacian(lvl.coeffs, x.p_bar)
    delta = 1e-6

    def fill_c():
        fill_ghost(CellField(g, x.c), bc)

    def fill_mu():
        fill_ghost(CellField(g, x.mu_bar), bc)

    for ci, cj in lvl.colors:
        J = None
        for _ in range(cfg.newton_iters):
            rp, rc = _ch_residuals(lvl, p, flux_fixed, lap_p_fixed)
            if J is None:
                x.c[ci, cj] += delta
                fill_c()
                rp1, rc1 = _ch_residuals(lvl, p, flux_fixed, lap_p_fixed)
                x.c[ci, cj] -= 2 * delta
                fill_c()
                rp2, rc2 = _ch_residuals(lvl, p, flux_fixed, lap_p_fixed)
                x.c[ci, cj] += delta
                fill_c()
                j11 = (rp1[ci, cj] - rp2[ci, cj]) / (2 * delta)
                j21 = (rc1[ci, cj] - rc2[ci, cj]) / (2 * delta)
                # both equations are linear in mu_bar, so that Jacobian
                # column is exact: d(lap_mu)/dmu at the cell is the
                # (negative) sum of active edge mobilities.
                j12 = lvl.mob_diag[ci - 1, cj - 1] / (gr.Pe * g.h * g.h)
                if p.scheme == PRIMITIVE:
                    j22 = density_of(x.c[ci, cj], p.fluids)
                else:
                    j22 = lvl.coeffs.rho_n[ci, cj]
                det = j11 * j22 - j12 * j21
                bad = np.abs(det) < 1e-300
                det = np.where(bad, 1.0, det)
                J = (j11, j12, j21, j22, det, bad)
            j11, j12, j21, j22, det, bad = J
            bp = rp[ci, cj]
            bchem = rc[ci, cj]
            dc = (j22 * bp - j12 * bchem) / det
            dmu = (j11 * bchem - j21 * bp) / det
            dc = np.where(bad, 0.0, np.clip(dc, -0.5, 0.5))
            dmu = np.where(bad, 0.0, dmu)
            x.c[ci, cj] -= dc
            x.mu_bar[ci, cj] -= dmu
            fill_c()
            fill_mu()
            if max(np.max(np.abs(dc)), np.max(np.abs(dmu))) < cfg.newton_tol:
                break


def _primitive_flow_residuals(lvl: Level, p: SchemeParams):
    """Momentum and quasi-incompressibility residuals only (the box
    smoother never needs the CH pair); new-time edge densities come from
    the level cache refreshed at sweep start."""
    g = lvl.grid
    co, x, gr, dt = lvl.coeffs, lvl.x, p.groups, p.dt
    adv_x, adv_y = momentum_advection(co, x.u, x.v)
    visc_x, visc_y, gd_x, gd_y = _viscous(co, p.bc, x.u, x.v)
    stx, sty = surface_tension_force(co.rho_n, x.mu_bar, co.c_n, g)
    rmx = (co.Ax_rho * (x.u - co.u_n) / dt + adv_x
           + 0.5 * (lvl.Ax_rho1 - co.Ax_rho) / dt * x.u
           + ops.dif_ce_x(x.p_bar, g) / gr.M - stx / gr.M
           - visc_x / gr.Re - gd_x / (3.0 * gr.Re))
    rmy = (co.Ay_rho * (x.v - co.v_n) / dt + adv_y
           + 0.5 * (lvl.Ay_rho1 - co.Ay_rho) / dt * x.v
           + ops.dif_ce_y(x.p_bar, g) / gr.M - sty / gr.M
           - visc_y / gr.Re - gd_y / (3.0 * gr.Re)
           + co.Ay_rho / gr.Fr)
    _mask_wall_rows(rmx, rmy, p.bc)
    lap_mu = _mobility_laplacian(co, x.mu_bar)
    lap_p = _mobility_laplacian(co, x.p_bar)
    rms = (ops.dif_ec_x(x.u, g) + ops.dif_ec_y(x.v, g)
           - (gr.alpha / gr.Pe) * lap_mu - (gr.alpha ** 2 / gr.Pe) * lap_p)
    rms[0, :] = rms[-1, :] = 0.0
    rms[:, 0] = rms[:, -1] = 0.0
    return rmx, rmy, rms


def _predictor_residuals(lvl: Level, p: SchemeParams):
    """Intermediate-velocity momentum residuals for the projection box."""
    co, x, gr, dt = lvl.coeffs, lvl.x, p.groups, p.dt
    ut, vt = x.u_tilde, x.v_tilde
    adv_x, adv_y = momentum_advection(co, ut, vt)
    visc_x, visc_y, gd_x, gd_y = _viscous(co, p.bc, ut, vt)
    rmx = (co.Ax_rho * (ut - co.u_n) / dt + adv_x
           + 0.5 * (lvl.Ax_rho1 - co.Ax_rho) / dt * ut
           - visc_x / gr.Re - gd_x / (3.0 * gr.Re))
    rmy = (co.Ay_rho * (vt - co.v_n) / dt + adv_y
           + 0.5 * (lvl.Ay_rho1 - co.Ay_rho) / dt * vt
           - visc_y / gr.Re - gd_y / (3.0 * gr.Re)
           + lvl.Ay_rho1 / gr.Fr)
    _mask_wall_rows(rmx, rmy, p.bc)
    return rmx, rmy


# ---------------------------------------------------------------------------
# Vanka box smoother (primitive) / predictor box (projection)

def _box_jacobian_parts(lvl: Level, p: SchemeParams):
    """Edge-aligned coefficient arrays for the analytic box Jacobians."""
    g = lvl.grid
    co = lvl.coeffs
    gr = p.groups
    h, dt = g.h, p.dt
    m1, m2 = g.m1, g.m2
    Re3 = 4.0 / (3.0 * gr.Re)   # 1/Re + 1/(3Re)

    # --- x-momentum rows, on the EW edge layout (interior block) ---
    cuW = co.cu[:-1, 1:-1]
    cuE = co.cu[1:, 1:-1]
    muW = co.mu_n[:-1, 1:-1]
    muE = co.mu_n[1:, 1:-1]
    wxlo = co.wx[:, :-1]
    wxhi = co.wx[:, 1:]
    muvlo = co.mu_vert[:, :-1]
    muvhi = co.mu_vert[:, 1:]
    mdn = np.zeros((m1 + 1, m2))
    mup = np.zeros((m1 + 1, m2))
    if p.bc.vel_y != PERIODIC:
        mdn[:, 0] = 1.0
        mup[:, -1] = 1.0
    diagx = np.zeros(EwField.shape_for(g))
    diagx[1:-1, 1:-1] = (
        co.Ax_rho[1:-1, 1:-1] / dt
        + 0.5 * (lvl.Ax_rho1 - co.Ax_rho)[1:-1, 1:-1] / dt
        + co.skew_x[1:-1, 1:-1]
        + (cuW - cuE) / (2 * h)
        + (wxlo * (1 + mdn) - wxhi * (1 + mup)) / (2 * h)
        + (muE + muW) / (gr.Re * h * h)
        + (muvhi * (1 + mup) + muvlo * (1 + mdn)) / (gr.Re * h * h)
        + (muE + muW) / (3 * gr.Re * h * h))
    # coupling of the E-row to the W-edge and vice versa (same mu_i)
    xlo = np.zeros(EwField.shape_for(g))   # d momx@e / d u_(e-1)
    xhi = np.zeros(EwField.shape_for(g))   # d momx@e / d u_(e+1)
    xlo[1:-1, 1:-1] = -cuW / (2 * h) - Re3 * muW / (h * h)
    xhi[1:-1, 1:-1] = cuE / (2 * h) - Re3 * muE / (h * h)
    # cross coupling to d_y v inside the grad-div term
    gdW = np.zeros(EwField.shape_for(g))   # mu of the cell west of the edge
    gdE = np.zeros(EwField.shape_for(g))
    gdW[1:-1, 1:-1] = muW / (3 * gr.Re * h * h)
    gdE[1:-1, 1:-1] = muE / (3 * gr.Re * h * h)

    # --- y-momentum rows, on the NS edge layout ---
    cvS = co.cv[1:-1, :-1]
    cvN = co.cv[1:-1, 1:]
    muS = co.mu_n[1:-1, :-1]
    muN = co.mu_n[1:-1, 1:]
    wylo = co.wy[:-1, :]
    wyhi = co.wy[1:, :]
    mvlo = co.mu_vert[:-1, :]
    mvhi = co.mu_vert[1:, :]
    mlf = np.zeros((m1, m2 + 1))
    mrt = np.zeros((m1, m2 + 1))
    if p.bc.vel_x != PERIODIC:
        mlf[0, :] = 1.0
        mrt[-1, :] = 1.0
    diagy = np.zeros(NsField.shape_for(g))
    diagy[1:-1, 1:-1] = (
        co.Ay_rho[1:-1, 1:-1] / dt
        + 0.5 * (lvl.Ay_rho1 - co.Ay_rho)[1:-1, 1:-1] / dt
        + co.skew_y[1:-1, 1:-1]
        + (cvS - cvN) / (2 * h)
        + (wylo * (1 + mlf) - wyhi * (1 + mrt)) / (2 * h)
        + (muN + muS) / (gr.Re * h * h)
        + (mvhi * (1 + mrt) + mvlo * (1 + mlf)) / (gr.Re * h * h)
        + (muN + muS) / (3 * gr.Re * h * h))
    ylo = np.zeros(NsField.shape_for(g))
    yhi = np.zeros(NsField.shape_for(g))
    ylo[1:-1, 1:-1] = -cvS / (2 * h) - Re3 * muS / (h * h)
    yhi[1:-1, 1:-1] = cvN / (2 * h) - Re3 * muN / (h * h)
    gdS = np.zeros(NsField.shape_for(g))
    gdN = np.zeros(NsField.shape_for(g))
    gdS[1:-1, 1:-1] = muS / (3 * gr.Re * h * h)
    gdN[1:-1, 1:-1] = muN / (3 * gr.Re * h * h)

    return dict(diagx=diagx, xlo=xlo, xhi=xhi, gdW=gdW, gdE=gdE,
                diagy=diagy, ylo=ylo, yhi=yhi, gdS=gdS, gdN=gdN)


def _box_constraints(lvl: Level, p: SchemeParams, ci, cj):
    """Constrained-slot flags for [uE, uW, vN, vS] of each color box."""
    m1, m2 = lvl.grid.m1, lvl.grid.m2
    cons = np.zeros((ci.size, 4), dtype=bool)
    if p.bc.vel_x != PERIODIC:
        cons[:, 0] = ci == m1
        cons[:, 1] = ci == 1
    if p.bc.vel_y != PERIODIC:
        cons[:, 2] = cj == m2
        cons[:, 3] = cj == 1
    return cons


def _apply_constraints(J, b, cons):
    for k in range(cons.shape[1]):
        rows = cons[:, k]
        if not rows.any():
            continue
        J[rows, k, :] = 0.0
        J[rows, :, k] = 0.0
        J[rows, k, k] = 1.0
        b[rows, k] = 0.0


def _vanka_sweep(lvl: Level, p: SchemeParams):
    """Primitive scheme: coupled 5x5 box updates, red-black order."""
    g = lvl.grid
    x = lvl.x
    gr = p.groups
    h = g.h
    x.fill_ghosts(p.bc)
    lvl.refresh_rho_new(p)
    parts = _box_jacobian_parts(lvl, p)
    pd = (gr.alpha ** 2 / gr.Pe) * lvl.mob_diag / (h * h)
    for ci, cj in lvl.colors:
        fmx, fmy, fms = _primitive_flow_residuals(lvl, p)
        rmx = fmx - lvl.rhs.get("momx", 0.0)
        rmy = fmy - lvl.rhs.get("momy", 0.0)
        rms = fms - lvl.rhs.get("mass", 0.0)
        n = ci.size
        J = np.zeros((n, 5, 5))
        b = np.empty((n, 5))
        b[:, 0] = -rmx[ci + 1, cj]
        b[:, 1] = -rmx[ci, cj]
        b[:, 2] = -rmy[ci, cj + 1]
        b[:, 3] = -rmy[ci, cj]
        b[:, 4] = -rms[ci, cj]
        J[:, 0, 0] = parts["diagx"][ci + 1, cj]
        J[:, 0, 1] = parts["xlo"][ci + 1, cj]
        J[:, 0, 2] = parts["gdW"][ci + 1, cj]
        J[:, 0, 3] = -parts["gdW"][ci + 1, cj]
        J[:, 0, 4] = -1.0 / (gr.M * h)
        J[:, 1, 1] = parts["diagx"][ci, cj]
        J[:, 1, 0] = parts["xhi"][ci, cj]
        J[:, 1, 2] = -parts["gdE"][ci, cj]
        J[:, 1, 3] = parts["gdE"][ci, cj]
        J[:, 1, 4] = 1.0 / (gr.M * h)
        J[:, 2, 2] = parts["diagy"][ci, cj + 1]
        J[:, 2, 3] = parts["ylo"][ci, cj + 1]
        J[:, 2, 0] = parts["gdS"][ci, cj + 1]
        J[:, 2, 1] = -parts["gdS"][ci, cj + 1]
        J[:, 2, 4] = -1.0 / (gr.M * h)
        J[:, 3, 3] = parts["diagy"][ci, cj]
        J[:, 3, 2] = parts["yhi"][ci, cj]
        J[:, 3, 0] = -parts["gdN"][ci, cj]
        J[:, 3, 1] = parts["gdN"][ci, cj]
        J[:, 3, 4] = 1.0 / (gr.M * h)
        J[:, 4, 0] = 1.0 / h
        J[:, 4, 1] = -1.0 / h
        J[:, 4, 2] = 1.0 / h
        J[:, 4, 3] = -1.0 / h
        J[:, 4, 4] = pd[ci - 1, cj - 1]
        cons = _box_constraints(lvl, p, ci, cj)
        _apply_constraints(J, b, cons)
        d = np.linalg.solve(J, b[:, :, None])[:, :, 0]
        x.u[ci + 1, cj] += d[:, 0]
        x.u[ci, cj] += d[:, 1]
        x.v[ci, cj + 1] += d[:, 2]
        x.v[ci, cj] += d[:, 3]
        x.p_bar[ci, cj] += d[:, 4]
        x.fill_ghosts(p.bc)


def _predictor_sweep(lvl: Level, p: SchemeParams):
    """Projection scheme step 2: 4x4 box update of the intermediate
    velocity (pressure and surface tension absent from the predictor)."""
    g = lvl.grid
    x = lvl.x
    x.fill_ghosts(p.bc)
    lvl.refresh_rho_new(p)
    parts = _box_jacobian_parts(lvl, p)
    for ci, cj in lvl.colors:
        fmx, fmy = _predictor_residuals(lvl, p)
        rmx = fmx - lvl.rhs.get("momx", 0.0)
        rmy = fmy - lvl.rhs.get("momy", 0.0)
        n = ci.size
        J = np.zeros((n, 4, 4))
        b = np.empty((n, 4))
        b[:, 0] = -rmx[ci + 1, cj]
        b[:, 1] = -rmx[ci, cj]
        b[:, 2] = -rmy[ci, cj + 1]
        b[:, 3] = -rmy[ci, cj]
        J[:, 0, 0] = parts["diagx"][ci + 1, cj]
        J[:, 0, 1] = parts["xlo"][ci + 1, cj]
        J[:, 0, 2] = parts["gdW"][ci + 1, cj]
        J[:, 0, 3] = -parts["gdW"][ci + 1, cj]
        J[:, 1, 1] = parts["diagx"][ci, cj]
        J[:, 1, 0] = parts["xhi"][ci, cj]
        J[:, 1, 2] = -parts["gdE"][ci, cj]
        J[:, 1, 3] = parts["gdE"][ci, cj]
        J[:, 2, 2] = parts["diagy"][ci, cj + 1]
        J[:, 2, 3] = parts["ylo"][ci, cj + 1]
        J[:, 2, 0] = parts["gdS"][ci, cj + 1]
        J[:, 2, 1] = -parts["gdS"][ci, cj + 1]
        J[:, 3, 3] = parts["diagy"][ci, cj]
        J[:, 3, 2] = parts["yhi"][ci, cj]
        J[:, 3, 0] = -parts["gdN"][ci, cj]
        J[:, 3, 1] = parts["gdN"][ci, cj]
        cons = _box_constraints(lvl, p, ci, cj)
        _apply_constraints(J, b, cons)
        d = np.linalg.solve(J, b[:, :, None])[:, :, 0]
        x.u_tilde[ci + 1, cj] += d[:, 0]
        x.u_tilde[ci, cj] += d[:, 1]
        x.v_tilde[ci, cj + 1] += d[:, 2]
        x.v_tilde[ci, cj] += d[:, 3]
        x.fill_ghosts(p.bc)


def _projected_velocity(lvl: Level, p: SchemeParams):
    """Velocity satisfying the pressure-correction equation exactly for
    the current p_bar, c, mu_bar, u_tilde (projection step 4)."""
    g = lvl.grid
    x = lvl.x
    gr = p.groups
    rho1 = _cfill(density_of(x.c, p.fluids), g, p.bc)
    stx, sty = surface_tension_force(rho1, x.mu_bar, x.c, g)
    rpx = lvl.rhs.get("projx", 0.0)
    rpy = lvl.rhs.get("projy", 0.0)
    gx = ops.dif_ce_x(x.p_bar, g)
    gy = ops.dif_ce_y(x.p_bar, g)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = x.u_tilde + p.dt / lvl.Ax_rho1 * (rpx + (stx - gx) / gr.M)
        v = x.v_tilde + p.dt / lvl.Ay_rho1 * (rpy + (sty - gy) / gr.M)
    u[~np.isfinite(u)] = 0.0
    v[~np.isfinite(v)] = 0.0
    x.u[...] = u
    x.v[...] = v
    x.fill_ghosts(p.bc)   # re-imposes wall-normal zeros


def _pressure_sweep(lvl: Level, p: SchemeParams, cfg: MgConfig):
    """Projection step 3: scalar relaxation of quasi-incompressibility
    with the corrected velocity substituted as a function of pressure."""
    g = lvl.grid
    x = lvl.x
    gr = p.groups
    h = g.h
    act_e, act_w, act_n, act_s = lvl.act
    inv_ax = np.zeros_like(lvl.Ax_rho1)
    inv_ay = np.zeros_like(lvl.Ay_rho1)
    np.divide(1.0, lvl.Ax_rho1, out=inv_ax, where=lvl.Ax_rho1 != 0)
    np.divide(1.0, lvl.Ay_rho1, out=inv_ay, where=lvl.Ay_rho1 != 0)
    diag = (p.dt / (gr.M * h * h)) * (
        act_e * inv_ax[2:-1, 1:-1] + act_w * inv_ax[1:-2, 1:-1]
        + act_n * inv_ay[1:-1, 2:-1] + act_s * inv_ay[1:-1, 1:-2])
    diag = diag + (gr.alpha ** 2 / gr.Pe) * lvl.mob_diag / (h * h)
    rhs_mass = lvl.rhs.get("mass", 0.0)
    for ci, cj in lvl.colors:
        _projected_velocity(lvl, p)
        lap_mu = _mobility_laplacian(lvl.coeffs, x.mu_bar)
        lap_p = _mobility_laplacian(lvl.coeffs, x.p_bar)
        r = (ops.dif_ec_x(x.u, g) + ops.dif_ec_y(x.v, g)
             - (gr.alpha / gr.Pe) * lap_mu
             - (gr.alpha ** 2 / gr.Pe) * lap_p - rhs_mass)
        x.p_bar[ci, cj] -= r[ci, cj] / diag[ci - 1, cj - 1]
        fill_ghost(CellField(g, x.p_bar), p.bc)
    _projected_velocity(lvl, p)


def _smooth(lvl: Level, p: SchemeParams, cfg: MgConfig, sweeps: int):
    for _ in range(sweeps):
        _ch_sweep(lvl, p, cfg)
        if p.scheme == PRIMITIVE:
            _vanka_sweep(lvl, p)
        else:
            lvl.refresh_rho_new(p)
            _predictor_sweep(lvl, p)
            _pressure_sweep(lvl, p, cfg)


# ---------------------------------------------------------------------------
# Hierarchy and V-cycle

def _restrict_state(x: State, gf: GridSpec, gc: GridSpec, bc: BcSet) -> State:
    proj = x.u_tilde is not None
    out = State(
        grid=gc,
        c=restrict_cell(x.c, gf),
        mu_bar=restrict_cell(x.mu_bar, gf),
        p_bar=restrict_cell(x.p_bar, gf),
        u=restrict_ew(x.u, gf),
        v=restrict_ns(x.v, gf),
        u_tilde=restrict_ew(x.u_tilde, gf) if proj else None,
        v_tilde=restrict_ns(x.v_tilde, gf) if proj else None,
        time=x.time,
    )
    return out.fill_ghosts(bc)


class MgHierarchy:
    """Grid hierarchy with frozen old-time data on every level."""

    def __init__(self, old: State, p: SchemeParams, cfg: MgConfig):
        grids = [old.grid]
        g = old.grid
        while (g.m1 % 2 == 0 and g.m2 % 2 == 0
               and g.m1 // 2 >= cfg.min_coarse and g.m2 // 2 >= cfg.min_coarse
               and (cfg.n_levels is None or len(grids) < cfg.n_levels)):
            g = g.coarsen()
            grids.append(g)
        olds = [old.copy().fill_ghosts(p.bc)]
        for k in range(1, len(grids)):
            olds.append(_restrict_state(olds[k - 1], grids[k - 1], grids[k],
                                        p.bc))
        self.levels = [Level(gr, st, p) for gr, st in zip(grids, olds)]

    def vcycle(self, k: int, p: SchemeParams, cfg: MgConfig):
        lvl = self.levels[k]
        if k == len(self.levels) - 1:
            _smooth(lvl, p, cfg, cfg.coarse_sweeps)
            return
        _smooth(lvl, p, cfg, cfg.pre_smooths)

        nxt = self.levels[k + 1]
        defect = _defect(lvl, p)
        gf, gc = lvl.grid, nxt.grid
        xc = _restrict_state(lvl.x, gf, gc, p.bc)
        nxt.x = xc.copy().fill_ghosts(p.bc)
        nxt.refresh_rho_new(p)
        coarse_n = _residual_of(nxt, p).fields()
        nxt.rhs = {key: coarse_n[key] + _RESTRICT[key](defect[key], gf)
                   for key in coarse_n}
        self.vcycle(k + 1, p, cfg)

        for name, pro in (("c", prolong_cell), ("mu_bar", prolong_cell),
                          ("p_bar", prolong_cell), ("u", prolong_ew),
                          ("v", prolong_ns), ("u_tilde", prolong_ew),
                          ("v_tilde", prolong_ns)):
            base = getattr(lvl.x, name)
            if base is None:
                continue
            corr = getattr(nxt.x, name) - getattr(xc, name)
            corr = fill_ghost(
                {prolong_cell: CellField, prolong_ew: EwField,
                 prolong_ns: NsField}[pro](gc, corr), p.bc).data
            base += pro(corr, gc, gf)
        lvl.x.fill_ghosts(p.bc)
        lvl.refresh_rho_new(p)
        _smooth(lvl, p, cfg, cfg.post_smooths)


def solve_timestep(old: State, p: SchemeParams,
                   cfg: MgConfig | None = None,
                   guess: State | None = None) -> tuple[State, SolveInfo]:
    """Advance one implicit step with FAS V-cycles; returns the new state
    and convergence info (initial defect first in the history).

    ``guess`` optionally seeds the iteration (e.g. a time-extrapolated
    state); the converged answer does not depend on it, only the cycle
    count does.
    """
    if cfg is None:
        cfg = MgConfig()
    hier = MgHierarchy(old, p, cfg)
    fine = hier.levels[0]
    x = old.copy() if guess is None else guess.copy()
    if p.scheme == PROJECTION:
        if x.u_tilde is None:
            x.u_tilde = x.u.copy()
            x.v_tilde = x.v.copy()
        else:
            x.u_tilde[...] = x.u
            x.v_tilde[...] = x.v
    x.fill_ghosts(p.bc)
    fine.x = x
    fine.refresh_rho_new(p)

    history = [_defect_norm(fine, p)]
    converged = history[0] <= cfg.tol
    cycles = 0
    while not converged and cycles < cfg.max_cycles:
        hier.vcycle(0, p, cfg)
        cycles += 1
        x.p_bar[1:-1, 1:-1] -= np.mean(x.p_bar[1:-1, 1:-1])
        x.fill_ghosts(p.bc)
        fine.refresh_rho_new(p)
        history.append(_defect_norm(fine, p))
        converged = history[-1] <= cfg.tol
    x.time = old.time + p.dt
    return x, SolveInfo(cycles=cycles, residual_norm=history[-1],
                        history=history, converged=converged)
