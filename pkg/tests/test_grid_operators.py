"""Adjointness / summation-by-parts identities for the staggered operators.

Each identity is checked on random fields against brute-force double-sum
oracles written as explicit index loops, independent of the vectorized
slice implementations, for both the wall (Neumann cells + no-slip
velocity) and fully periodic boundary families.
"""

import numpy as np
import pytest

from qnsch.grid import BcSet, CellField, EwField, GridSpec, NsField, fill_ghost
from qnsch import operators as ops

TOL = 1e-12
SIZES = [8, 16, 32]
BC_FAMILIES = {
    "walls": BcSet.walls(),
    "periodic": BcSet.periodic(),
    "channel": BcSet.channel(),
}


def grid_of(m):
    return GridSpec(m, m, 1.0 / m)


def rand_cell(grid, bc, rng):
    f = CellField(grid)
    f.interior = rng.standard_normal((grid.m1, grid.m2))
    return fill_ghost(f, bc).data


def rand_ew(grid, bc, rng):
    f = EwField(grid)
    f.physical = rng.standard_normal((grid.m1 + 1, grid.m2))
    return fill_ghost(f, bc).data


def rand_ns(grid, bc, rng):
    f = NsField(grid)
    f.physical = rng.standard_normal((grid.m1, grid.m2 + 1))
    return fill_ghost(f, bc).data


def cell_like(arr, grid, bc):
    """Wrap a raw cell-shaped product array and fill its ghosts."""
    return fill_ghost(CellField(grid, arr), bc).data


# ---- brute-force inner-product oracles (explicit loops) -------------------

def ip_cell(phi, psi, m):
    s = 0.0
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            s += phi[i, j] * psi[i, j]
    return s


def ip_ew(f, g, m, weight=None):
    s = 0.0
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            t = 0.5 * (f[i + 1, j] * g[i + 1, j] + f[i, j] * g[i, j])
            if weight is not None:
                t *= weight[i, j]
            s += t
    return s


def ip_ns(f, g, m, weight=None):
    s = 0.0
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            t = 0.5 * (f[i, j + 1] * g[i, j + 1] + f[i, j] * g[i, j])
            if weight is not None:
                t *= weight[i, j]
            s += t
    return s


def ip_vc(f, g, m, weight=None):
    """Vertex product averaged to cells; optional cell weight."""
    s = 0.0
    for i in range(1, m + 1):
        for j in range(1, m + 1):
            t = 0.25 * (f[i, j] * g[i, j] + f[i - 1, j] * g[i - 1, j]
                        + f[i, j - 1] * g[i, j - 1]
                        + f[i - 1, j - 1] * g[i - 1, j - 1])
            if weight is not None:
                t *= weight[i, j]
            s += t
    return s


def check(lhs, rhs, *scales):
    scale = max(1.0, abs(lhs), abs(rhs), *(abs(s) for s in scales))
    assert abs(lhs - rhs) <= TOL * scale, f"{lhs} vs {rhs}"


@pytest.fixture(params=SIZES, ids=lambda m: f"m{m}")
def m(request):
    return request.param


@pytest.fixture(params=list(BC_FAMILIES), ids=str)
def bc(request):
    return BC_FAMILIES[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20260826)


# ---- gradient/divergence duality ------------------------------------------

def test_grad_div_duality_x(m, bc, rng):
    # [D_x phi, u]_ew = -(phi, d_x u)_2
    g = grid_of(m)
    phi = rand_cell(g, bc, rng)
    u = rand_ew(g, bc, rng)
    lhs = ip_ew(ops.dif_ce_x(phi, g), u, m)
    rhs = -ip_cell(phi, ops.dif_ec_x(u, g), m)
    check(lhs, rhs)


def test_grad_div_duality_y(m, bc, rng):
    g = grid_of(m)
    phi = rand_cell(g, bc, rng)
    v = rand_ns(g, bc, rng)
    lhs = ip_ns(ops.dif_ce_y(phi, g), v, m)
    rhs = -ip_cell(phi, ops.dif_ec_y(v, g), m)
    check(lhs, rhs)


# ---- skew advection pairs --------------------------------------------------

def test_skew_advection_streamwise_x(m, bc, rng):
    # [A_x(phi a_x u d_x gam), gam]_ew + [gam/2 D_x(phi a_x u), gam]_ew = 0
    g = grid_of(m)
    phi = rand_cell(g, bc, rng)
    u = rand_ew(g, bc, rng)
    gam = rand_ew(g, bc, rng)
    p = cell_like(phi * ops.avg_ec_x(u, g) * ops.dif_ec_x(gam, g), g, bc)
    pt = cell_like(phi * ops.avg_ec_x(u, g), g, bc)
    t1 = ip_ew(ops.avg_ce_x(p, g), gam, m)
    t2 = ip_ew(0.5 * gam * ops.dif_ce_x(pt, g), gam, m)
    check(t1 + t2, 0.0, t1, t2)


def test_skew_advection_streamwise_y(m, bc, rng):
    g = grid_of(m)
    phi = rand_cell(g, bc, rng)
    v = rand_ns(g, bc, rng)
    om = rand_ns(g, bc, rng)
    p = cell_like(phi * ops.avg_ec_y(v, g) * ops.dif_ec_y(om, g), g, bc)
    pt = cell_like(phi * ops.avg_ec_y(v, g), g, bc)
    t1 = ip_ns(ops.avg_ce_y(p, g), om, m)
    t2 = ip_ns(0.5 * om * ops.dif_ce_y(pt, g), om, m)
    check(t1 + t2, 0.0, t1, t2)


def test_skew_advection_cross_x(m, bc, rng):
    # vertex-coupled pair for the u equation:
    # [Avg_y(A phi A_x v D_y u), u]_ew + [u/2 Dif_y(A phi A_x v), u]_ew = 0
    g = grid_of(m)
    phi = rand_cell(g, bc, rng)
    u = rand_ew(g, bc, rng)
    v = rand_ns(g, bc, rng)
    w = ops.avg_cv(phi, g) * ops.avg_ev_x(v, g)
    t1 = ip_ew(ops.avg_ve_y(w * ops.dif_ev_y(u, g), g), u, m)
    t2 = ip_ew(0.5 * u * ops.dif_ve_y(w, g), u, m)
    check(t1 + t2, 0.0, t1, t2)


def test_skew_advection_cross_y(m, bc, rng):
    g = grid_of(m)
    phi = rand_cell(g, bc, rng)
    u = rand_ew(g, bc, rng)
    v = rand_ns(g, bc, rng)
    w = ops.avg_cv(phi, g) * ops.avg_ev_y(u, g)
    t1 = ip_ns(ops.avg_ve_x(w * ops.dif_ev_x(v, g), g), v, m)
    t2 = ip_ns(0.5 * v * ops.dif_ve_x(w, g), v, m)
    check(t1 + t2, 0.0, t1, t2)


# ---- weighted Laplacian dualities -----------------------------------------

def test_viscous_normal_duality_x(m, bc, rng):
    # [D_x(phi d_x u), gam]_ew = -(phi d_x u, d_x gam)_2
    g = grid_of(m)
    phi = rand_cell(g, bc, rng)
    u = rand_ew(g, bc, rng)
    gam = rand_ew(g, bc, rng)
    p = cell_like(phi * ops.dif_ec_x(u, g), g, bc)
    lhs = ip_ew(ops.dif_ce_x(p, g), gam, m)
    rhs = -ip_cell(p, ops.dif_ec_x(gam, g), m)
    check(lhs, rhs)


def test_viscous_normal_duality_y(m, bc, rng):
    g = grid_of(m)
    phi = rand_cell(g, bc, rng)
    v = rand_ns(g, bc, rng)
    om = rand_ns(g, bc, rng)
    p = cell_like(phi * ops.dif_ec_y(v, g), g, bc)
    lhs = ip_ns(ops.dif_ce_y(p, g), om, m)
    rhs = -ip_cell(p, ops.dif_ec_y(om, g), m)
    check(lhs, rhs)


def test_viscous_vertex_duality_x(m, bc, rng):
    # [Dif_y(A phi D_y u), gam]_ew = -<phi D_y u, D_y gam>_vc
    g = grid_of(m)
    phi = rand_cell(g, bc, rng)
    u = rand_ew(g, bc, rng)
    gam = rand_ew(g, bc, rng)
    w = ops.avg_cv(phi, g) * ops.dif_ev_y(u, g)
    lhs = ip_ew(ops.dif_ve_y(w, g), gam, m)
    rhs = -ip_vc(ops.dif_ev_y(u, g), ops.dif_ev_y(gam, g), m, weight=phi)
    check(lhs, rhs)


def test_viscous_vertex_duality_y(m, bc, rng):
    g = grid_of(m)
    phi = rand_cell(g, bc, rng)
    v = rand_ns(g, bc, rng)
    om = rand_ns(g, bc, rng)
    w = ops.avg_cv(phi, g) * ops.dif_ev_x(v, g)
    lhs = ip_ns(ops.dif_ve_x(w, g), om, m)
    rhs = -ip_vc(ops.dif_ev_x(v, g), ops.dif_ev_x(om, g), m, weight=phi)
    check(lhs, rhs)


def test_grad_div_cross_duality_x(m, bc, rng):
    # [D_x(phi d_y v), u]_ew = -(phi d_y v, d_x u)_2
    g = grid_of(m)
    phi = rand_cell(g, bc, rng)
    u = rand_ew(g, bc, rng)
    v = rand_ns(g, bc, rng)
    p = cell_like(phi * ops.dif_ec_y(v, g), g, bc)
    lhs = ip_ew(ops.dif_ce_x(p, g), u, m)
    rhs = -ip_cell(p, ops.dif_ec_x(u, g), m)
    check(lhs, rhs)


def test_grad_div_cross_duality_y(m, bc, rng):
    g = grid_of(m)
    phi = rand_cell(g, bc, rng)
    u = rand_ew(g, bc, rng)
    v = rand_ns(g, bc, rng)
    p = cell_like(phi * ops.dif_ec_x(u, g), g, bc)
    lhs = ip_ns(ops.dif_ce_y(p, g), v, m)
    rhs = -ip_cell(p, ops.dif_ec_y(v, g), m)
    check(lhs, rhs)


def test_weighted_cell_laplacian_duality_x(m, bc, rng):
    # (d_x(A_x phi D_x psi), zeta)_2 = -[phi D_x psi, D_x zeta]_ew
    g = grid_of(m)
    phi = rand_cell(g, bc, rng)
    psi = rand_cell(g, bc, rng)
    zeta = rand_cell(g, bc, rng)
    flux = ops.avg_ce_x(phi, g) * ops.dif_ce_x(psi, g)
    lhs = ip_cell(ops.dif_ec_x(flux, g), zeta, m)
    rhs = -ip_ew(ops.dif_ce_x(psi, g), ops.dif_ce_x(zeta, g), m, weight=phi)
    check(lhs, rhs)


def test_weighted_cell_laplacian_duality_y(m, bc, rng):
    g = grid_of(m)
    phi = rand_cell(g, bc, rng)
    psi = rand_cell(g, bc, rng)
    zeta = rand_cell(g, bc, rng)
    flux = ops.avg_ce_y(phi, g) * ops.dif_ce_y(psi, g)
    lhs = ip_cell(ops.dif_ec_y(flux, g), zeta, m)
    rhs = -ip_ns(ops.dif_ce_y(psi, g), ops.dif_ce_y(zeta, g), m, weight=phi)
    check(lhs, rhs)


# ---- inner products and norms against spec'd values -----------------------

def test_inner_cell_counts_cells():
    g = grid_of(8)
    one = np.ones(CellField.shape_for(g))
    assert ops.inner_cell(one, one) == 64.0


def test_inner_ew_all_ones():
    g = grid_of(8)
    one = np.ones(EwField.shape_for(g))
    assert ops.inner_ew(one, one, g) == 64.0


def test_inner_vertex_single_spike():
    # one interior vertex set to 2, adjacent to 4 interior cells:
    # sum over those cells of (1/4)*4 = 4
    g = grid_of(8)
    f = np.zeros((9, 9))
    f[4, 4] = 2.0
    assert ops.inner_vertex(f, f, g) == 4.0


def test_divergence_norm_expansion(m, bc, rng):
    g = grid_of(m)
    phi = np.abs(rand_cell(g, bc, rng)) + 0.1
    phi = cell_like(phi, g, bc)
    u = rand_ew(g, bc, rng)
    v = rand_ns(g, bc, rng)
    n2 = ops.norm_weighted_div(phi, u, v, g) ** 2
    div = ops.dif_ec_x(u, g) + ops.dif_ec_y(v, g)
    direct = g.h ** 2 * ip_cell(phi * div, div, m)
    check(n2, direct)


def test_norm_cell_matches_direct(m, bc, rng):
    g = grid_of(m)
    phi = rand_cell(g, bc, rng)
    direct = np.sqrt(g.h ** 2 * ip_cell(phi, phi, m))
    check(ops.norm_cell(phi, g), direct)


def test_norm_rejects_negative_weight():
    g = grid_of(8)
    w = -np.ones(CellField.shape_for(g))
    u = np.zeros(EwField.shape_for(g))
    v = np.zeros(NsField.shape_for(g))
    with pytest.raises(ValueError):
        ops.norm_weighted_vel(w, u, v, g)


# ---- structural properties -------------------------------------------------

def test_averages_nonexpansive(m, bc, rng):
    g = grid_of(m)
    phi = rand_cell(g, bc, rng)
    u = rand_ew(g, bc, rng)
    v = rand_ns(g, bc, rng)
    mx = np.max(np.abs(phi))
    assert np.max(np.abs(ops.avg_ce_x(phi, g))) <= mx
    assert np.max(np.abs(ops.avg_ce_y(phi, g))) <= mx
    assert np.max(np.abs(ops.avg_cv(phi, g))) <= mx
    assert np.max(np.abs(ops.avg_ec_x(u, g))) <= np.max(np.abs(u))
    assert np.max(np.abs(ops.avg_ec_y(v, g))) <= np.max(np.abs(v))
    assert np.max(np.abs(ops.avg_ev_x(v, g))) <= np.max(np.abs(v))
    assert np.max(np.abs(ops.avg_ev_y(u, g))) <= np.max(np.abs(u))


def test_fill_ghost_idempotent(m, bc, rng):
    g = grid_of(m)
    for mk in (rand_cell, rand_ew, rand_ns):
        arr = mk(g, bc, rng)
        kind = {rand_cell: CellField, rand_ew: EwField, rand_ns: NsField}[mk]
        again = fill_ghost(kind(g, arr.copy()), bc).data
        assert np.array_equal(arr, again)


def test_differences_annihilate_constants(m, bc):
    g = grid_of(m)
    phi = fill_ghost(CellField(g, np.full(CellField.shape_for(g), 3.5)), bc).data
    assert np.all(ops.dif_ce_x(phi, g) == 0.0)
    assert np.all(ops.dif_ce_y(phi, g) == 0.0)
    # constant edge fields (walls break constancy only through ghosts,
    # restrict to periodic for the edge check)
    if bc.vel_x == "periodic" and bc.vel_y == "periodic":
        u = fill_ghost(EwField(g, np.full(EwField.shape_for(g), 2.0)), bc).data
        v = fill_ghost(NsField(g, np.full(NsField.shape_for(g), 2.0)), bc).data
        assert np.all(ops.dif_ec_x(u, g) == 0.0)
        assert np.all(ops.dif_ec_y(v, g) == 0.0)
        assert np.all(ops.dif_ev_y(u, g) == 0.0)
        assert np.all(ops.dif_ev_x(v, g) == 0.0)


def test_stagger_dispatch_routes():
    g = grid_of(8)
    u = np.ones(EwField.shape_for(g))
    out = ops.stagger_avg("ew", "cell", "x", u, g)
    assert out.shape == CellField.shape_for(g)
    with pytest.raises(ValueError):
        ops.stagger_diff("cell", "vertex", "xy", u, g)


def test_bcset_rejects_mixed_periodicity():
    with pytest.raises(ValueError):
        BcSet(cell_x="periodic", cell_y="neumann", vel_x="noslip", vel_y="noslip")


def test_gridspec_validates():
    with pytest.raises(ValueError):
        GridSpec(1, 8, 0.1)
    with pytest.raises(ValueError):
        GridSpec.from_extent(8, 8, 1.0, 2.0)
