"""Built-in verification suite.

Re-checks the structural identities the solver's conservation and
energy-stability claims rest on — summation-by-parts dualities of every
operator pairing, the advection/mass-flux identity, the surface-tension
duality, and the algebraic secant identities — on random fields over
several grid sizes and boundary families.  Runs through the public
operator entry points, so any corruption of a stencil shows up as an
identity violation.
"""

from __future__ import annotations

import numpy as np

from .grid import (BcSet, CellField, EwField, GridSpec, NsField, fill_ghost)
from . import operators as ops
from .physics import (FluidPair, NondimGroups, density_of, double_well,
                      eta_capillary, g_avg, r_avg)
from .schemes import (PRIMITIVE, SchemeParams, State, StepCoeffs,
                      ch_advection_flux, momentum_advection,
                      surface_tension_force)

__all__ = ["run_selftest", "selftest_report", "TOLERANCE"]

TOLERANCE = 1e-12
_FLUIDS = FluidPair(1.0, 10.0, 1.0, 10.0)

_BC_FAMILIES = {
    "walls": BcSet.walls(),
    "periodic": BcSet.periodic(),
    "channel": BcSet.channel(),
}


def _rel(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


def _fields(g: GridSpec, bc: BcSet, rng):
    def cell():
        a = np.zeros(CellField.shape_for(g))
        a[1:-1, 1:-1] = rng.normal(size=(g.m1, g.m2))
        return fill_ghost(CellField(g, a), bc).data

    def ew():
        a = np.zeros(EwField.shape_for(g))
        a[1:-1, 1:-1] = rng.normal(size=(g.m1 + 1, g.m2))
        return fill_ghost(EwField(g, a), bc).data

    def ns():
        a = np.zeros(NsField.shape_for(g))
        a[1:-1, 1:-1] = rng.normal(size=(g.m1, g.m2 + 1))
        return fill_ghost(NsField(g, a), bc).data

    return cell, ew, ns


def _cf(arr, g, bc):
    return fill_ghost(CellField(g, arr), bc).data


def _checks(g: GridSpec, bc: BcSet, rng):
    """Yield (name, violation) for one random draw."""
    cell, ew, ns = _fields(g, bc, rng)
    phi, psi, zeta = cell(), cell(), cell()
    mu = _cf(np.exp(0.2 * cell()), g, bc)        # positive weight
    u, gamma = ew(), ew()
    v, omega = ns(), ns()

    yield ("grad_div_duality_x",
           _rel(ops.inner_cell(phi, ops.dif_ec_x(u, g)),
                -ops.inner_ew(ops.dif_ce_x(phi, g), u, g)))
    yield ("grad_div_duality_y",
           _rel(ops.inner_cell(phi, ops.dif_ec_y(v, g)),
                -ops.inner_ns(ops.dif_ce_y(phi, g), v, g)))

    yield ("weighted_laplacian_duality_x",
           _rel(ops.inner_cell(zeta, ops.dif_ec_x(
                    ops.avg_ce_x(mu, g) * ops.dif_ce_x(psi, g), g)),
                -ops.inner_ew(ops.avg_ce_x(mu, g) * ops.dif_ce_x(psi, g),
                              ops.dif_ce_x(zeta, g), g)))
    yield ("weighted_laplacian_duality_y",
           _rel(ops.inner_cell(zeta, ops.dif_ec_y(
                    ops.avg_ce_y(mu, g) * ops.dif_ce_y(psi, g), g)),
                -ops.inner_ns(ops.avg_ce_y(mu, g) * ops.dif_ce_y(psi, g),
                              ops.dif_ce_y(zeta, g), g)))

    yield ("viscous_normal_duality_x",
           _rel(ops.inner_ew(ops.dif_ce_x(
                    _cf(mu * ops.dif_ec_x(u, g), g, bc), g), gamma, g),
                -ops.inner_cell(mu * ops.dif_ec_x(u, g), ops.dif_ec_x(gamma, g))))
    yield ("viscous_normal_duality_y",
           _rel(ops.inner_ns(ops.dif_ce_y(
                    _cf(mu * ops.dif_ec_y(v, g), g, bc), g), omega, g),
                -ops.inner_cell(mu * ops.dif_ec_y(v, g), ops.dif_ec_y(omega, g))))

    muv = ops.avg_cv(mu, g)
    yield ("viscous_vertex_duality_x",
           _rel(ops.inner_ew(ops.dif_ve_y(muv * ops.dif_ev_y(u, g), g),
                             gamma, g),
                -ops.inner_vertex(muv * ops.dif_ev_y(u, g),
                                  ops.dif_ev_y(gamma, g), g)))
    yield ("viscous_vertex_duality_y",
           _rel(ops.inner_ns(ops.dif_ve_x(muv * ops.dif_ev_x(v, g), g),
                             omega, g),
                -ops.inner_vertex(muv * ops.dif_ev_x(v, g),
                                  ops.dif_ev_x(omega, g), g)))

    yield ("grad_div_cross_duality_x",
           _rel(ops.inner_ew(ops.dif_ce_x(
                    _cf(mu * ops.dif_ec_y(v, g), g, bc), g), gamma, g),
                -ops.inner_cell(mu * ops.dif_ec_y(v, g), ops.dif_ec_x(gamma, g))))
    yield ("grad_div_cross_duality_y",
           _rel(ops.inner_ns(ops.dif_ce_y(
                    _cf(mu * ops.dif_ec_x(u, g), g, bc), g), omega, g),
                -ops.inner_cell(mu * ops.dif_ec_x(u, g), ops.dif_ec_y(omega, g))))

    # skew-symmetric advection (aggregates the four skew pairings)
    eps = 0.05
    groups = NondimGroups.asymptotic(
        Re=10.0, We=1.0, Fr=1.0, epsilon=eps,
        eta=eta_capillary(_FLUIDS.rho1, _FLUIDS.rho2)).with_alpha_of(_FLUIDS)
    p = SchemeParams(fluids=_FLUIDS, groups=groups, dt=1e-3,
                     scheme=PRIMITIVE, bc=bc)
    old = State.zeros(g)
    old.c[1:-1, 1:-1] = rng.uniform(0.05, 0.95, size=(g.m1, g.m2))
    old.u[...] = u
    old.v[...] = v
    old.fill_ghosts(bc)
    coeffs = StepCoeffs(old, p)
    adv_x, adv_y = momentum_advection(coeffs, gamma, omega)
    total = ops.inner_ew(adv_x, gamma, g) + ops.inner_ns(adv_y, omega, g)
    scale = max(1.0, ops.inner_ew(np.abs(adv_x), np.abs(gamma), g))
    yield ("momentum_advection_skew", abs(total) / scale)

    rho = _cf(density_of(old.c, _FLUIDS), g, bc)
    flux = ch_advection_flux(rho, old.c, u, v, g)
    lhs = ops.inner_cell(flux, -_FLUIDS.alpha * rho)
    rhs = (ops.inner_ew(u, ops.dif_ce_x(rho, g), g)
           + ops.inner_ns(v, ops.dif_ce_y(rho, g), g))
    yield ("advection_mass_identity", _rel(lhs, rhs))

    fx, fy = surface_tension_force(rho, psi, old.c, g)
    lhs = ops.inner_ew(fx, u, g) + ops.inner_ns(fy, v, g)
    rhs = ops.inner_cell(ch_advection_flux(rho, old.c, u, v, g), psi)
    yield ("surface_tension_duality", _rel(lhs, rhs))


def _algebraic_checks(rng, n=200_000):
    a = rng.uniform(-0.2, 1.2, size=n)
    b = rng.uniform(-0.2, 1.2, size=n)
    fa, fb = double_well(a)[0], double_well(b)[0]
    g_err = np.max(np.abs(fa - fb - g_avg(a, b) * (a - b))
                   / np.maximum(1.0, np.abs(fa - fb)))
    ra = density_of(np.clip(a, 0.0, 1.0), _FLUIDS)
    rb = density_of(np.clip(b, 0.0, 1.0), _FLUIDS)
    r = r_avg(np.clip(a, 0.0, 1.0), np.clip(b, 0.0, 1.0), _FLUIDS)
    r_err = np.max(np.abs(ra - rb - r * (np.clip(a, 0, 1) - np.clip(b, 0, 1)))
                   / np.maximum(1.0, np.abs(ra - rb)))
    yield ("double_well_secant_identity", float(g_err))
    yield ("density_secant_identity", float(r_err))


def run_selftest(ms=(8, 16, 32), seed=20260826, tol=TOLERANCE):
    """Run the full identity suite; returns (passed, results) where
    results maps identity name -> max violation observed."""
    rng = np.random.default_rng(seed)
    worst: dict[str, float] = {}
    for m in ms:
        g = GridSpec(m, m, 1.0 / m)
        for fam, bc in _BC_FAMILIES.items():
            for name, viol in _checks(g, bc, rng):
                key = f"{name}"
                worst[key] = max(worst.get(key, 0.0), viol)
    for name, viol in _algebraic_checks(rng):
        worst[name] = max(worst.get(name, 0.0), viol)
    passed = all(v <= tol for v in worst.values())
    return passed, worst


def selftest_report(ms=(8, 16, 32), seed=20260826, tol=TOLERANCE):
    """Run the suite and return (passed, formatted report text)."""
    passed, worst = run_selftest(ms, seed, tol)
    lines = []
    for name in sorted(worst):
        status = "ok  " if worst[name] <= tol else "FAIL"
        lines.append(f"{status} {name:35s} max violation {worst[name]:.3e}")
    lines.append(f"selftest: {'PASS' if passed else 'FAIL'} "
                 f"({len(worst)} identities, tol {tol:.1e})")
    return passed, "\n".join(lines)
