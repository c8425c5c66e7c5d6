"""Difference and averaging operators on the staggered grid.

Every operator is a plain function mapping raw ndarrays between the four
staggering locations (cell centers, east-west edges, north-south edges,
vertices), using the array layouts documented in :mod:`qnsch.grid`.
Inputs must have their ghost layer populated (via ``fill_ghost``) before
the call; outputs are written on the full array with ghost entries left
at zero, so callers re-fill ghosts when an output is fed into another
ghost-reading stencil.

All two-point averages and differences carry the 1/h factor on the
differences only; the four-point cell-to-vertex average ``avg_cv`` is an
unweighted mean.

Naming: ``avg``/``dif`` plus a location code,
``ec`` edge-to-center, ``ce`` center-to-edge, ``cv`` center-to-vertex,
``ev`` edge-to-vertex, ``ve`` vertex-to-edge, and the axis the two-point
stencil straddles.
"""

from __future__ import annotations

import numpy as np

from .grid import CellField, EwField, GridSpec, NsField, VertexField

__all__ = [
    "avg_ec_x", "dif_ec_x", "avg_ec_y", "dif_ec_y",
    "avg_ce_x", "dif_ce_x", "avg_ce_y", "dif_ce_y",
    "avg_cv",
    "avg_ev_x", "dif_ev_x", "avg_ev_y", "dif_ev_y",
    "avg_ve_x", "dif_ve_x", "avg_ve_y", "dif_ve_y",
    "stagger_avg", "stagger_diff",
    "inner_cell", "inner_ew", "inner_ns", "inner_vertex",
    "norm_cell", "norm_weighted_grad_cell", "norm_weighted_vel",
    "norm_weighted_grad_vel", "norm_weighted_div",
]


# ---------------------------------------------------------------------------
# Edge -> center (consume one ghost-free pair per interior cell)

def avg_ec_x(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    """EW-edge field to cell centers: mean of the two flanking u edges."""
    out = np.zeros(CellField.shape_for(grid))
    out[1:-1, 1:-1] = 0.5 * (u[2:-1, 1:-1] + u[1:-2, 1:-1])
    return out


def dif_ec_x(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    """EW-edge field to cell centers: (u_east - u_west)/h."""
    out = np.zeros(CellField.shape_for(grid))
    out[1:-1, 1:-1] = (u[2:-1, 1:-1] - u[1:-2, 1:-1]) / grid.h
    return out


def avg_ec_y(v: np.ndarray, grid: GridSpec) -> np.ndarray:
    out = np.zeros(CellField.shape_for(grid))
    out[1:-1, 1:-1] = 0.5 * (v[1:-1, 2:-1] + v[1:-1, 1:-2])
    return out


def dif_ec_y(v: np.ndarray, grid: GridSpec) -> np.ndarray:
    out = np.zeros(CellField.shape_for(grid))
    out[1:-1, 1:-1] = (v[1:-1, 2:-1] - v[1:-1, 1:-2]) / grid.h
    return out


# ---------------------------------------------------------------------------
# Center -> edge (read one ghost cell at domain-boundary edges)

def avg_ce_x(phi: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Cell field to EW edges, including the two wall-coincident columns."""
    out = np.zeros(EwField.shape_for(grid))
    out[1:-1, 1:-1] = 0.5 * (phi[1:, 1:-1] + phi[:-1, 1:-1])
    return out


def dif_ce_x(phi: np.ndarray, grid: GridSpec) -> np.ndarray:
    out = np.zeros(EwField.shape_for(grid))
    out[1:-1, 1:-1] = (phi[1:, 1:-1] - phi[:-1, 1:-1]) / grid.h
    return out


def avg_ce_y(phi: np.ndarray, grid: GridSpec) -> np.ndarray:
    out = np.zeros(NsField.shape_for(grid))
    out[1:-1, 1:-1] = 0.5 * (phi[1:-1, 1:] + phi[1:-1, :-1])
    return out


def dif_ce_y(phi: np.ndarray, grid: GridSpec) -> np.ndarray:
    out = np.zeros(NsField.shape_for(grid))
    out[1:-1, 1:-1] = (phi[1:-1, 1:] - phi[1:-1, :-1]) / grid.h
    return out


# ---------------------------------------------------------------------------
# Center -> vertex (4-point mean; reads ghosts at boundary vertices)

def avg_cv(phi: np.ndarray, grid: GridSpec) -> np.ndarray:
    out = 0.25 * (phi[1:, 1:] + phi[:-1, 1:] + phi[1:, :-1] + phi[:-1, :-1])
    return out


# ---------------------------------------------------------------------------
# NS edge -> vertex (two-point in x) and EW edge -> vertex (two-point in y)

def avg_ev_x(v: np.ndarray, grid: GridSpec) -> np.ndarray:
    """NS-edge field to vertices: x-mean of the two straddling v edges."""
    return 0.5 * (v[1:, 1:-1] + v[:-1, 1:-1])


def dif_ev_x(v: np.ndarray, grid: GridSpec) -> np.ndarray:
    return (v[1:, 1:-1] - v[:-1, 1:-1]) / grid.h


def avg_ev_y(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    """EW-edge field to vertices: y-mean of the two straddling u edges."""
    return 0.5 * (u[1:-1, 1:] + u[1:-1, :-1])


def dif_ev_y(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    return (u[1:-1, 1:] - u[1:-1, :-1]) / grid.h


# ---------------------------------------------------------------------------
# Vertex -> edge (interior edges only; boundary/ghost entries stay zero)

def avg_ve_x(f: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Vertex field to NS edges: x-mean of the two flanking vertices."""
    out = np.zeros(NsField.shape_for(grid))
    out[1:-1, 1:-1] = 0.5 * (f[1:, :] + f[:-1, :])
    return out


def dif_ve_x(f: np.ndarray, grid: GridSpec) -> np.ndarray:
    out = np.zeros(NsField.shape_for(grid))
    out[1:-1, 1:-1] = (f[1:, :] - f[:-1, :]) / grid.h
    return out


def avg_ve_y(f: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Vertex field to EW edges: y-mean of the two flanking vertices."""
    out = np.zeros(EwField.shape_for(grid))
    out[1:-1, 1:-1] = 0.5 * (f[:, 1:] + f[:, :-1])
    return out


def dif_ve_y(f: np.ndarray, grid: GridSpec) -> np.ndarray:
    out = np.zeros(EwField.shape_for(grid))
    out[1:-1, 1:-1] = (f[:, 1:] - f[:, :-1]) / grid.h
    return out


# ---------------------------------------------------------------------------
# Dispatch by (source, destination, axis) for callers that select stencils
# programmatically.

_AVG = {
    ("ew", "cell", "x"): avg_ec_x,
    ("ns", "cell", "y"): avg_ec_y,
    ("cell", "ew", "x"): avg_ce_x,
    ("cell", "ns", "y"): avg_ce_y,
    ("cell", "vertex", "xy"): avg_cv,
    ("ns", "vertex", "x"): avg_ev_x,
    ("ew", "vertex", "y"): avg_ev_y,
    ("vertex", "ns", "x"): avg_ve_x,
    ("vertex", "ew", "y"): avg_ve_y,
}

_DIF = {
    ("ew", "cell", "x"): dif_ec_x,
    ("ns", "cell", "y"): dif_ec_y,
    ("cell", "ew", "x"): dif_ce_x,
    ("cell", "ns", "y"): dif_ce_y,
    ("ns", "vertex", "x"): dif_ev_x,
    ("ew", "vertex", "y"): dif_ev_y,
    ("vertex", "ns", "x"): dif_ve_x,
    ("vertex", "ew", "y"): dif_ve_y,
}


def stagger_avg(src: str, dst: str, axis: str, data: np.ndarray, grid: GridSpec):
    """Two-point (or four-point, for cell->vertex) mean between locations."""
    try:
        op = _AVG[(src, dst, axis)]
    except KeyError:
        raise ValueError(f"no averaging stencil {src}->{dst} along {axis!r}") from None
    return op(data, grid)


def stagger_diff(src: str, dst: str, axis: str, data: np.ndarray, grid: GridSpec):
    """Two-point difference (divided by h) between staggering locations."""
    try:
        op = _DIF[(src, dst, axis)]
    except KeyError:
        raise ValueError(f"no difference stencil {src}->{dst} along {axis!r}") from None
    return op(data, grid)


# ---------------------------------------------------------------------------
# Inner products.  All are unweighted sums over interior cells of
# cell-centered aggregates; the h^2 measure enters only in the norms.

def inner_cell(phi: np.ndarray, psi: np.ndarray) -> float:
    """Sum of phi*psi over interior cells."""
    return float(np.sum(phi[1:-1, 1:-1] * psi[1:-1, 1:-1]))


def inner_ew(u: np.ndarray, gamma: np.ndarray, grid: GridSpec,
             weight: np.ndarray | None = None) -> float:
    """EW-edge product summed through cell centers.

    Averages u*gamma from the flanking edges to each interior cell,
    optionally multiplying by a cell-centered ``weight`` there.
    """
    s = avg_ec_x(u * gamma, grid)
    if weight is not None:
        s = s * weight
    return float(np.sum(s[1:-1, 1:-1]))


def inner_ns(v: np.ndarray, omega: np.ndarray, grid: GridSpec,
             weight: np.ndarray | None = None) -> float:
    s = avg_ec_y(v * omega, grid)
    if weight is not None:
        s = s * weight
    return float(np.sum(s[1:-1, 1:-1]))


def inner_vertex(f: np.ndarray, g: np.ndarray, grid: GridSpec) -> float:
    """Vertex product 4-point-averaged back to interior cells and summed."""
    fg = f * g
    s = 0.25 * (fg[1:, 1:] + fg[:-1, 1:] + fg[1:, :-1] + fg[:-1, :-1])
    return float(np.sum(s))


# ---------------------------------------------------------------------------
# Norms (with the h^2 cell measure).

def _check_weight(w: np.ndarray, label: str):
    if np.any(w[1:-1, 1:-1] < 0):
        raise ValueError(f"negative {label} weight in norm")


def norm_cell(phi: np.ndarray, grid: GridSpec) -> float:
    """L2 norm of a cell field: sqrt(h^2 * sum phi^2)."""
    return float(grid.h * np.sqrt(inner_cell(phi, phi)))


def norm_weighted_grad_cell(psi: np.ndarray, phi: np.ndarray, grid: GridSpec) -> float:
    """|| sqrt(psi) grad phi || with edge-staggered gradient components.

    psi is cell-centered and averaged onto each edge family.
    """
    _check_weight(psi, "cell")
    gx = dif_ce_x(phi, grid)
    gy = dif_ce_y(phi, grid)
    wx = avg_ce_x(psi, grid)
    wy = avg_ce_y(psi, grid)
    sx = inner_ew(gx, wx * gx, grid)
    sy = inner_ns(gy, wy * gy, grid)
    return float(grid.h * np.sqrt(sx + sy))


def norm_weighted_vel(phi: np.ndarray, u: np.ndarray, v: np.ndarray,
                      grid: GridSpec) -> float:
    """|| sqrt(phi) (u, v) || over both edge families."""
    _check_weight(phi, "cell")
    wx = avg_ce_x(phi, grid)
    wy = avg_ce_y(phi, grid)
    su = inner_ew(u, wx * u, grid)
    sv = inner_ns(v, wy * v, grid)
    return float(grid.h * np.sqrt(su + sv))


def norm_weighted_grad_vel(phi: np.ndarray, u: np.ndarray, v: np.ndarray,
                           grid: GridSpec) -> float:
    """|| sqrt(phi) grad(u, v) ||: all four staggered velocity-gradient
    pieces (du/dx and dv/dy at cells, du/dy and dv/dx at vertices)."""
    _check_weight(phi, "cell")
    dxu = dif_ec_x(u, grid)
    dyv = dif_ec_y(v, grid)
    phiv = avg_cv(phi, grid)
    dyu = dif_ev_y(u, grid)
    dxv = dif_ev_x(v, grid)
    s = inner_cell(phi * dxu, dxu) + inner_cell(phi * dyv, dyv)
    s += inner_vertex(phiv * dyu, dyu, grid) + inner_vertex(phiv * dxv, dxv, grid)
    return float(grid.h * np.sqrt(s))


def norm_weighted_div(phi: np.ndarray, u: np.ndarray, v: np.ndarray,
                      grid: GridSpec) -> float:
    """|| sqrt(phi) div(u, v) || expanded as the cell-centered square
    (du/dx)^2 + 2 du/dx dv/dy + (dv/dy)^2."""
    _check_weight(phi, "cell")
    dxu = dif_ec_x(u, grid)
    dyv = dif_ec_y(v, grid)
    s = (inner_cell(phi * dxu, dxu)
         + 2.0 * inner_cell(phi * dxu, dyv)
         + inner_cell(phi * dyv, dyv))
    return float(grid.h * np.sqrt(max(s, 0.0)))
