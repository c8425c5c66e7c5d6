"""Fully discrete residuals of the two-phase flow schemes.

Two time-stepping formulations share one state layout:

* the primitive scheme solves velocity, pressure, phase and chemical
  potential as one coupled implicit system;
* the projection scheme predicts an intermediate velocity without
  pressure, then corrects it through a pressure/surface-tension
  projection.

Both use the secant-averaged nonlinearities from :mod:`qnsch.physics`
plus two special stencils (``ch_advection_flux`` with outward-neighbor
density weights, and the cross-paired ``surface_tension_force``) chosen
so that global mixture mass is conserved and the discrete energy is
non-increasing to machine/solver precision, not merely to truncation
order.

Residual sign convention: residual = LHS - RHS of each equation as
written, so a solved state gives zero.  Rows on wall-constrained
velocity edges are zeroed (the boundary condition replaces the
equation there).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .grid import (BcSet, CellField, EwField, GridSpec, NsField, PERIODIC,
                   fill_ghost)
from . import operators as ops
from .physics import (FluidPair, NondimGroups, density_of, double_well,
                      g_avg, mobility_reg, r_avg, viscosity_of)

__all__ = [
    "State", "Residual", "SchemeParams", "StepCoeffs",
    "ch_advection_flux", "surface_tension_force", "momentum_advection",
    "residual_primitive", "residual_projection", "half_time_fields",
    "gradc_squared",
]

PRIMITIVE = "primitive"
PROJECTION = "projection"


@dataclass(frozen=True)
class SchemeParams:
    """Everything fixed over a run: fluids, groups, step size, scheme, BCs."""

    fluids: FluidPair
    groups: NondimGroups
    dt: float
    scheme: str = PRIMITIVE
    bc: BcSet = field(default_factory=BcSet.walls)

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.scheme not in (PRIMITIVE, PROJECTION):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        # alpha stored in the groups must match the fluid pair
        if abs(self.groups.alpha - self.fluids.alpha) > 1e-14 * (
                1 + abs(self.fluids.alpha)):
            raise ValueError(
                f"groups.alpha={self.groups.alpha} inconsistent with "
                f"fluid pair alpha={self.fluids.alpha}"
            )


@dataclass
class State:
    """Unknowns at one time level (raw arrays in field layout)."""

    grid: GridSpec
    c: np.ndarray
    mu_bar: np.ndarray
    p_bar: np.ndarray
    u: np.ndarray
    v: np.ndarray
    u_tilde: Optional[np.ndarray] = None
    v_tilde: Optional[np.ndarray] = None
    time: float = 0.0

    @classmethod
    def zeros(cls, grid: GridSpec, *, projection: bool = False,
              time: float = 0.0) -> "State":
        cs = CellField.shape_for(grid)
        es = EwField.shape_for(grid)
        ns = NsField.shape_for(grid)
        return cls(
            grid=grid,
            c=np.zeros(cs), mu_bar=np.zeros(cs), p_bar=np.zeros(cs),
            u=np.zeros(es), v=np.zeros(ns),
            u_tilde=np.zeros(es) if projection else None,
            v_tilde=np.zeros(ns) if projection else None,
            time=time,
        )

    def copy(self) -> "State":
        return State(
            grid=self.grid,
            c=self.c.copy(), mu_bar=self.mu_bar.copy(),
            p_bar=self.p_bar.copy(),
            u=self.u.copy(), v=self.v.copy(),
            u_tilde=None if self.u_tilde is None else self.u_tilde.copy(),
            v_tilde=None if self.v_tilde is None else self.v_tilde.copy(),
            time=self.time,
        )

    def fill_ghosts(self, bc: BcSet) -> "State":
        g = self.grid
        for arr in (self.c, self.mu_bar, self.p_bar):
            fill_ghost(CellField(g, arr), bc)
        fill_ghost(EwField(g, self.u), bc)
        fill_ghost(NsField(g, self.v), bc)
        if self.u_tilde is not None:
            fill_ghost(EwField(g, self.u_tilde), bc)
        if self.v_tilde is not None:
            fill_ghost(NsField(g, self.v_tilde), bc)
        return self

    def chemical_potential(self, alpha: float) -> np.ndarray:
        """Recover the unshifted chemical potential mu_c = mu_bar + alpha p_bar."""
        return self.mu_bar + alpha * self.p_bar


@dataclass
class Residual:
    """One residual field per governing equation."""

    r_momx: np.ndarray
    r_momy: np.ndarray
    r_mass: np.ndarray
    r_phase: np.ndarray
    r_chem: np.ndarray
    r_projx: Optional[np.ndarray] = None
    r_projy: Optional[np.ndarray] = None

    def fields(self):
        out = {"momx": self.r_momx, "momy": self.r_momy,
               "mass": self.r_mass, "phase": self.r_phase,
               "chem": self.r_chem}
        if self.r_projx is not None:
            out["projx"] = self.r_projx
            out["projy"] = self.r_projy
        return out

    def max_norm(self) -> float:
        return max(float(np.max(np.abs(a))) for a in self.fields().values())


def _cfill(arr: np.ndarray, grid: GridSpec, bc: BcSet) -> np.ndarray:
    """Fill ghost ring of a raw cell-shaped array in place."""
    fill_ghost(CellField(grid, arr), bc)
    return arr


def gradc_squared(c: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Cell-centered |grad c|^2: per axis, the mean of the two adjacent
    squared edge differences."""
    gx = ops.dif_ce_x(c, grid)
    gy = ops.dif_ce_y(c, grid)
    return ops.avg_ec_x(gx * gx, grid) + ops.avg_ec_y(gy * gy, grid)


def ch_advection_flux(rho: np.ndarray, c: np.ndarray, u: np.ndarray,
                      v: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Phase advection rho u . grad c with outward-neighbor density.

    At cell (i,j) the east flux is weighted by rho_{i+1,j} and the west
    flux by rho_{i-1,j}; this pairing is what telescopes against the
    secant identity rho_{i+1}-rho_i = r*(c_{i+1}-c_i) in the global mass
    balance and must not be "simplified" to a centered weight.
    """
    h = grid.h
    out = np.zeros(CellField.shape_for(grid))
    cc = c[1:-1, 1:-1]
    out[1:-1, 1:-1] = 0.5 * (
        rho[2:, 1:-1] * (c[2:, 1:-1] - cc) / h * u[2:-1, 1:-1]
        + rho[:-2, 1:-1] * (cc - c[:-2, 1:-1]) / h * u[1:-2, 1:-1]
        + rho[1:-1, 2:] * (c[1:-1, 2:] - cc) / h * v[1:-1, 2:-1]
        + rho[1:-1, :-2] * (cc - c[1:-1, :-2]) / h * v[1:-1, 1:-2]
    )
    return out


def surface_tension_force(rho: np.ndarray, mu_bar: np.ndarray,
                          c: np.ndarray, grid: GridSpec):
    """Edge surface-tension force with cross-paired density/potential.

    x-component at edge (i+1/2,j):
    (rho_{i+1,j} mu_{i,j} + rho_{i,j} mu_{i+1,j})/2 * (c_{i+1,j}-c_{i,j})/h.
    The crossed indices make this exactly dual to ``ch_advection_flux``
    under the edge/cell inner products, which is how the surface-tension
    work cancels the chemical transport term in the energy balance.
    """
    h = grid.h
    fx = np.zeros(EwField.shape_for(grid))
    fy = np.zeros(NsField.shape_for(grid))
    fx[1:-1, 1:-1] = (0.5 * (rho[1:, 1:-1] * mu_bar[:-1, 1:-1]
                             + rho[:-1, 1:-1] * mu_bar[1:, 1:-1])
                      * (c[1:, 1:-1] - c[:-1, 1:-1]) / h)
    fy[1:-1, 1:-1] = (0.5 * (rho[1:-1, 1:] * mu_bar[1:-1, :-1]
                             + rho[1:-1, :-1] * mu_bar[1:-1, 1:])
                      * (c[1:-1, 1:] - c[1:-1, :-1]) / h)
    return fx, fy


class StepCoeffs:
    """Old-time coefficient fields frozen for one implicit solve.

    Everything the residuals need from the previous time level is
    evaluated once here (mixture properties, advecting mass fluxes,
    skew divergence terms, edge/vertex viscosities and mobilities) so
    that smoother sweeps and repeated residual calls touch only the
    new-time unknowns.
    """

    def __init__(self, old: State, p: SchemeParams):
        g = old.grid
        bc = p.bc
        self.grid = g
        self.bc = bc
        self.c_n = old.c
        self.u_n = old.u
        self.v_n = old.v
        self.rho_n = _cfill(density_of(old.c, p.fluids), g, bc)
        self.mu_n = _cfill(viscosity_of(old.c, p.fluids), g, bc)
        mob = _cfill(mobility_reg(old.c, p.groups.epsilon), g, bc)
        self.F_n = double_well(old.c)[0]
        self.gradc2_n = gradc_squared(old.c, g)

        # advecting mass fluxes: cell-centered streamwise, vertex cross
        self.cu = _cfill(self.rho_n * ops.avg_ec_x(old.u, g), g, bc)
        self.cv = _cfill(self.rho_n * ops.avg_ec_y(old.v, g), g, bc)
        rho_v = ops.avg_cv(self.rho_n, g)
        self.wx = rho_v * ops.avg_ev_x(old.v, g)
        self.wy = rho_v * ops.avg_ev_y(old.u, g)
        # skew (half-divergence) coefficients on the velocity edges
        self.skew_x = 0.5 * (ops.dif_ce_x(self.cu, g)
                             + ops.dif_ve_y(self.wx, g))
        self.skew_y = 0.5 * (ops.dif_ve_x(self.wy, g)
                             + ops.dif_ce_y(self.cv, g))

        self.Ax_rho = ops.avg_ce_x(self.rho_n, g)
        self.Ay_rho = ops.avg_ce_y(self.rho_n, g)
        self.mu_vert = ops.avg_cv(self.mu_n, g)
        self.Ax_mob = ops.avg_ce_x(mob, g)
        self.Ay_mob = ops.avg_ce_y(mob, g)


def momentum_advection(coeffs: StepCoeffs, u_t: np.ndarray, v_t: np.ndarray):
    """Convective plus skew-symmetrizing transport of the target velocity
    by the frozen old-time mass flux."""
    g = coeffs.grid
    px = _cfill(coeffs.cu * ops.dif_ec_x(u_t, g), g, coeffs.bc)
    py = _cfill(coeffs.cv * ops.dif_ec_y(v_t, g), g, coeffs.bc)
    adv_x = (ops.avg_ce_x(px, g)
             + ops.avg_ve_y(coeffs.wx * ops.dif_ev_y(u_t, g), g)
             + coeffs.skew_x * u_t)
    adv_y = (ops.avg_ve_x(coeffs.wy * ops.dif_ev_x(v_t, g), g)
             + ops.avg_ce_y(py, g)
             + coeffs.skew_y * v_t)
    return adv_x, adv_y


def _viscous(coeffs: StepCoeffs, bc: BcSet, u: np.ndarray, v: np.ndarray):
    """div(mu grad u) on edges, plus the (1/3) grad(mu div u) pieces."""
    g = coeffs.grid
    fxx = _cfill(coeffs.mu_n * ops.dif_ec_x(u, g), g, bc)
    fyy = _cfill(coeffs.mu_n * ops.dif_ec_y(v, g), g, bc)
    visc_x = (ops.dif_ce_x(fxx, g)
              + ops.dif_ve_y(coeffs.mu_vert * ops.dif_ev_y(u, g), g))
    visc_y = (ops.dif_ve_x(coeffs.mu_vert * ops.dif_ev_x(v, g), g)
              + ops.dif_ce_y(fyy, g))
    div = _cfill(coeffs.mu_n * (ops.dif_ec_x(u, g) + ops.dif_ec_y(v, g)),
                 g, bc)
    gd_x = ops.dif_ce_x(div, g)
    gd_y = ops.dif_ce_y(div, g)
    return visc_x, visc_y, gd_x, gd_y


def _mobility_laplacian(coeffs: StepCoeffs, phi: np.ndarray):
    """div(A m(c_old) grad phi) at cells (phi ghosts already filled)."""
    g = coeffs.grid
    return (ops.dif_ec_x(coeffs.Ax_mob * ops.dif_ce_x(phi, g), g)
            + ops.dif_ec_y(coeffs.Ay_mob * ops.dif_ce_y(phi, g), g))


def _weighted_laplacian(w: np.ndarray, phi: np.ndarray, grid: GridSpec):
    """div(A w grad phi) at cells for a cell-centered weight w."""
    return (ops.dif_ec_x(ops.avg_ce_x(w, grid) * ops.dif_ce_x(phi, grid), grid)
            + ops.dif_ec_y(ops.avg_ce_y(w, grid) * ops.dif_ce_y(phi, grid), grid))


def half_time_fields(old: State, new: State, fluids: FluidPair):
    """Temporal means of density, double-well energy, and |grad c|^2."""
    g = old.grid
    rho_half = 0.5 * (density_of(new.c, fluids) + density_of(old.c, fluids))
    F_half = 0.5 * (double_well(new.c)[0] + double_well(old.c)[0])
    gradc2_half = 0.5 * (gradc_squared(new.c, g) + gradc_squared(old.c, g))
    return rho_half, F_half, gradc2_half


def _mask_wall_rows(r_ew: np.ndarray, r_ns: np.ndarray, bc: BcSet):
    """Zero residual rows on wall-constrained edges (BC replaces them)."""
    if bc.vel_x != PERIODIC:
        r_ew[1, :] = 0.0
        r_ew[-2, :] = 0.0
    if bc.vel_y != PERIODIC:
        r_ns[:, 1] = 0.0
        r_ns[:, -2] = 0.0


def _chem_residual(lhs_rho: np.ndarray, new: State, old: State,
                   p: SchemeParams, g: GridSpec):
    """Shared chemical-potential equation; lhs_rho is the density
    weighting mu_bar on the left side (new-time for primitive, old-time
    for projection)."""
    gr = p.groups
    k1 = gr.M * gr.eta / (gr.epsilon * gr.We)
    k2 = gr.epsilon * gr.eta * gr.M / (2.0 * gr.We)
    k3 = gr.epsilon * gr.eta * gr.M / gr.We
    rho_half, F_half, gradc2_half = half_time_fields(old, new, p.fluids)
    rho_half = _cfill(rho_half, g, p.bc)
    gsec = g_avg(new.c, old.c)
    rsec = r_avg(new.c, old.c, p.fluids)
    c_half = _cfill(0.5 * (new.c + old.c), g, p.bc)
    r = (lhs_rho * new.mu_bar
         - k1 * (rho_half * gsec + F_half * rsec)
         - k2 * gradc2_half * rsec
         + k3 * _weighted_laplacian(rho_half, c_half, g))
    r[0, :] = r[-1, :] = 0.0
    r[:, 0] = r[:, -1] = 0.0
    return r


def residual_primitive(old: State, new: State, p: SchemeParams,
                       coeffs: StepCoeffs | None = None) -> Residual:
    """Residuals of the coupled primitive scheme at the new iterate."""
    g = old.grid
    gr = p.groups
    bc = p.bc
    dt = p.dt
    if coeffs is None:
        coeffs = StepCoeffs(old, p)
    new.fill_ghosts(bc)

    rho_new = _cfill(density_of(new.c, p.fluids), g, bc)
    Ax_rho_new = ops.avg_ce_x(rho_new, g)
    Ay_rho_new = ops.avg_ce_y(rho_new, g)

    adv_x, adv_y = momentum_advection(coeffs, new.u, new.v)
    visc_x, visc_y, gd_x, gd_y = _viscous(coeffs, bc, new.u, new.v)
    stx, sty = surface_tension_force(coeffs.rho_n, new.mu_bar, coeffs.c_n, g)

    r_momx = (coeffs.Ax_rho * (new.u - coeffs.u_n) / dt + adv_x
              + 0.5 * (Ax_rho_new - coeffs.Ax_rho) / dt * new.u
              + ops.dif_ce_x(new.p_bar, g) / gr.M - stx / gr.M
              - visc_x / gr.Re - gd_x / (3.0 * gr.Re))
    r_momy = (coeffs.Ay_rho * (new.v - coeffs.v_n) / dt + adv_y
              + 0.5 * (Ay_rho_new - coeffs.Ay_rho) / dt * new.v
              + ops.dif_ce_y(new.p_bar, g) / gr.M - sty / gr.M
              - visc_y / gr.Re - gd_y / (3.0 * gr.Re)
              + coeffs.Ay_rho / gr.Fr)
    _mask_wall_rows(r_momx, r_momy, bc)

    lap_mu = _mobility_laplacian(coeffs, new.mu_bar)
    lap_p = _mobility_laplacian(coeffs, new.p_bar)
    div_u = ops.dif_ec_x(new.u, g) + ops.dif_ec_y(new.v, g)
    alpha = gr.alpha
    r_mass = div_u - (alpha / gr.Pe) * lap_mu - (alpha ** 2 / gr.Pe) * lap_p
    r_phase = (rho_new * (new.c - old.c) / dt
               + ch_advection_flux(coeffs.rho_n, coeffs.c_n, new.u, new.v, g)
               - lap_mu / gr.Pe - (alpha / gr.Pe) * lap_p)
    r_chem = _chem_residual(rho_new, new, old, p, g)
    for r in (r_mass, r_phase):
        r[0, :] = r[-1, :] = 0.0
        r[:, 0] = r[:, -1] = 0.0
    return Residual(r_momx, r_momy, r_mass, r_phase, r_chem)


def residual_projection(old: State, new: State, p: SchemeParams,
                        coeffs: StepCoeffs | None = None) -> Residual:
    """Residuals of the projection scheme (predictor, correction,
    pressure, phase, chemical potential) at the new iterate."""
    if new.u_tilde is None or new.v_tilde is None:
        raise ValueError("projection state needs intermediate velocities")
    g = old.grid
    gr = p.groups
    bc = p.bc
    dt = p.dt
    if coeffs is None:
        coeffs = StepCoeffs(old, p)
    new.fill_ghosts(bc)

    rho_new = _cfill(density_of(new.c, p.fluids), g, bc)
    Ax_rho_new = ops.avg_ce_x(rho_new, g)
    Ay_rho_new = ops.avg_ce_y(rho_new, g)

    ut, vt = new.u_tilde, new.v_tilde
    adv_x, adv_y = momentum_advection(coeffs, ut, vt)
    visc_x, visc_y, gd_x, gd_y = _viscous(coeffs, bc, ut, vt)

    r_momx = (coeffs.Ax_rho * (ut - coeffs.u_n) / dt + adv_x
              + 0.5 * (Ax_rho_new - coeffs.Ax_rho) / dt * ut
              - visc_x / gr.Re - gd_x / (3.0 * gr.Re))
    r_momy = (coeffs.Ay_rho * (vt - coeffs.v_n) / dt + adv_y
              + 0.5 * (Ay_rho_new - coeffs.Ay_rho) / dt * vt
              - visc_y / gr.Re - gd_y / (3.0 * gr.Re)
              + Ay_rho_new / gr.Fr)
    _mask_wall_rows(r_momx, r_momy, bc)

    stx, sty = surface_tension_force(rho_new, new.mu_bar, new.c, g)
    r_projx = (Ax_rho_new * (new.u - ut) / dt
               + ops.dif_ce_x(new.p_bar, g) / gr.M - stx / gr.M)
    r_projy = (Ay_rho_new * (new.v - vt) / dt
               + ops.dif_ce_y(new.p_bar, g) / gr.M - sty / gr.M)
    _mask_wall_rows(r_projx, r_projy, bc)

    lap_mu = _mobility_laplacian(coeffs, new.mu_bar)
    lap_p = _mobility_laplacian(coeffs, new.p_bar)
    div_u = ops.dif_ec_x(new.u, g) + ops.dif_ec_y(new.v, g)
    alpha = gr.alpha
    r_mass = div_u - (alpha / gr.Pe) * lap_mu - (alpha ** 2 / gr.Pe) * lap_p
    r_phase = (coeffs.rho_n * (new.c - old.c) / dt
               + ch_advection_flux(rho_new, new.c, new.u, new.v, g)
               - lap_mu / gr.Pe - (alpha / gr.Pe) * lap_p)
    r_chem = _chem_residual(coeffs.rho_n, new, old, p, g)
    for r in (r_mass, r_phase):
        r[0, :] = r[-1, :] = 0.0
        r[:, 0] = r[:, -1] = 0.0
    return Residual(r_momx, r_momy, r_mass, r_phase, r_chem,
                    r_projx, r_projy)
