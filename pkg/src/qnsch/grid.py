"""Staggered (MAC) grid containers and ghost-cell boundary logic.

Index conventions (the single place where the half-integer notation of the
staggered grid is mapped to zero-based array indices):

* Cells: physical cell (i, j) for i in 1..m1, j in 1..m2 sits at
  x_i = (i - 1/2) h, y_j = (j - 1/2) h.  A ``CellField`` array has shape
  (m1 + 2, m2 + 2); index [i, j] holds cell (i, j), so index 0 and m + 1
  are the ghost ring.

* East-west edges: edge (i + 1/2, j) sits at x = i h.  An ``EwField``
  array has shape (m1 + 3, m2 + 2); edge (i + 1/2, j) is stored at
  [i + 1, j].  Physical edges are i in 0..m1, j in 1..m2, i.e. array
  [1..m1+1, 1..m2]; [0, :] and [m1+2, :] are ghost edges past the
  domain, [:, 0] and [:, m2+1] are tangential ghost rows.

* North-south edges: edge (i, j + 1/2) at y = j h, stored at [i, j + 1]
  in an array of shape (m1 + 2, m2 + 3); physical edges are array
  [1..m1, 1..m2+1].

* Vertices: vertex (i + 1/2, j + 1/2) for i in 0..m1, j in 0..m2 is
  stored at [i, j] in a (m1 + 1, m2 + 1) array.  Vertex fields carry no
  ghosts; boundary-adjacent vertex expressions are assembled from cell
  and edge ghosts.

Ghost depth is exactly one layer everywhere; every stencil in the solver
reads at most one ghost.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GridSpec",
    "BcSet",
    "CellField",
    "EwField",
    "NsField",
    "VertexField",
    "fill_ghost",
]


class BcConfigError(ValueError):
    """Inconsistent boundary-condition configuration."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform rectangular grid: m1 x m2 cells of spacing h."""

    m1: int
    m2: int
    h: float

    def __post_init__(self):
        if self.m1 < 2 or self.m2 < 2:
            raise ValueError(f"need at least 2x2 cells, got {self.m1}x{self.m2}")
        if self.h <= 0:
            raise ValueError(f"mesh spacing must be positive, got {self.h}")

    @classmethod
    def from_extent(cls, m1: int, m2: int, Lx: float, Ly: float) -> "GridSpec":
        h = Lx / m1
        if abs(m2 * h - Ly) > 4 * np.finfo(float).eps * max(abs(Ly), 1.0):
            raise ValueError(
                f"anisotropic spacing: Lx/m1 = {h} but Ly/m2 = {Ly / m2}"
            )
        return cls(m1, m2, h)

    @property
    def Lx(self) -> float:
        return self.m1 * self.h

    @property
    def Ly(self) -> float:
        return self.m2 * self.h

    def cell_centers(self):
        """(x, y) meshgrid of interior cell centers, shape (m1, m2)."""
        x = (np.arange(1, self.m1 + 1) - 0.5) * self.h
        y = (np.arange(1, self.m2 + 1) - 0.5) * self.h
        return np.meshgrid(x, y, indexing="ij")

    def coarsen(self) -> "GridSpec":
        if self.m1 % 2 or self.m2 % 2:
            raise ValueError(f"cannot halve {self.m1}x{self.m2}")
        return GridSpec(self.m1 // 2, self.m2 // 2, 2 * self.h)


# Boundary condition keywords
NEUMANN = "neumann"
PERIODIC = "periodic"
NOSLIP = "noslip"
NORMAL_ZERO = "normal_zero"

_CELL_BCS = (NEUMANN, PERIODIC)
_VEL_BCS = (NOSLIP, NORMAL_ZERO, PERIODIC)


@dataclass(frozen=True)
class BcSet:
    """Per-axis boundary conditions for cell-centered and edge fields.

    Periodicity applies jointly to cell and edge fields in an axis, so a
    periodic cell BC with a wall velocity BC (or vice versa) is rejected.
    """

    cell_x: str = NEUMANN
    cell_y: str = NEUMANN
    vel_x: str = NOSLIP
    vel_y: str = NOSLIP

    def __post_init__(self):
        for name, val, ok in (
            ("cell_x", self.cell_x, _CELL_BCS),
            ("cell_y", self.cell_y, _CELL_BCS),
            ("vel_x", self.vel_x, _VEL_BCS),
            ("vel_y", self.vel_y, _VEL_BCS),
        ):
            if val not in ok:
                raise BcConfigError(f"{name}={val!r} not in {ok}")
        for axis, c, v in (("x", self.cell_x, self.vel_x), ("y", self.cell_y, self.vel_y)):
            if (c == PERIODIC) != (v == PERIODIC):
                raise BcConfigError(
                    f"axis {axis}: periodic must apply jointly to cell and "
                    f"velocity fields (got cell={c}, velocity={v})"
                )

    @classmethod
    def periodic(cls) -> "BcSet":
        return cls(PERIODIC, PERIODIC, PERIODIC, PERIODIC)

    @classmethod
    def walls(cls) -> "BcSet":
        return cls(NEUMANN, NEUMANN, NOSLIP, NOSLIP)

    @classmethod
    def channel(cls) -> "BcSet":
        """Periodic in x, no-slip walls at the bottom/top."""
        return cls(PERIODIC, NEUMANN, PERIODIC, NOSLIP)

    def with_normal_zero(self) -> "BcSet":
        """Variant with wall velocity BCs relaxed to zero normal component."""
        sub = lambda v: NORMAL_ZERO if v == NOSLIP else v
        return BcSet(self.cell_x, self.cell_y, sub(self.vel_x), sub(self.vel_y))


class _Field:
    """Base for grid fields: an ndarray plus the grid it lives on."""

    __slots__ = ("grid", "data")

    def __init__(self, grid: GridSpec, data: np.ndarray | None = None):
        self.grid = grid
        if data is None:
            data = np.zeros(self.shape_for(grid))
        else:
            data = np.asarray(data, dtype=float)
            if data.shape != self.shape_for(grid):
                raise ValueError(
                    f"{type(self).__name__} on {grid.m1}x{grid.m2} grid needs "
                    f"shape {self.shape_for(grid)}, got {data.shape}"
                )
        self.data = data

    def copy(self):
        return type(self)(self.grid, self.data.copy())

    def __repr__(self):
        return f"{type(self).__name__}({self.grid.m1}x{self.grid.m2})"


class CellField(_Field):
    """Scalar unknown at cell centers with a one-cell ghost ring."""

    @staticmethod
    def shape_for(grid):
        return (grid.m1 + 2, grid.m2 + 2)

    @property
    def interior(self) -> np.ndarray:
        return self.data[1:-1, 1:-1]

    @interior.setter
    def interior(self, values):
        self.data[1:-1, 1:-1] = values


class EwField(_Field):
    """x-velocity component on east-west (vertical) cell edges."""

    @staticmethod
    def shape_for(grid):
        return (grid.m1 + 3, grid.m2 + 2)

    @property
    def physical(self) -> np.ndarray:
        """Edges (i+1/2, j), i = 0..m1, j = 1..m2 (walls included)."""
        return self.data[1:-1, 1:-1]

    @physical.setter
    def physical(self, values):
        self.data[1:-1, 1:-1] = values


class NsField(_Field):
    """y-velocity component on north-south (horizontal) cell edges."""

    @staticmethod
    def shape_for(grid):
        return (grid.m1 + 2, grid.m2 + 3)

    @property
    def physical(self) -> np.ndarray:
        return self.data[1:-1, 1:-1]

    @physical.setter
    def physical(self, values):
        self.data[1:-1, 1:-1] = values


class VertexField(_Field):
    """Values at cell vertices (i+1/2, j+1/2), i = 0..m1, j = 0..m2."""

    @staticmethod
    def shape_for(grid):
        return (grid.m1 + 1, grid.m2 + 1)


def _fill_cell(f: CellField, bc: BcSet) -> None:
    d = f.data
    if bc.cell_x == NEUMANN:
        d[0, :] = d[1, :]
        d[-1, :] = d[-2, :]
    else:  # periodic
        d[0, :] = d[-2, :]
        d[-1, :] = d[1, :]
    if bc.cell_y == NEUMANN:
        d[:, 0] = d[:, 1]
        d[:, -1] = d[:, -2]
    else:
        d[:, 0] = d[:, -2]
        d[:, -1] = d[:, 1]


def _fill_ew(f: EwField, bc: BcSet) -> None:
    d = f.data
    # x: the normal direction for u
    if bc.vel_x == PERIODIC:
        # edge m1+1/2 is the same physical edge as 1/2
        d[-2, :] = d[1, :]
        d[0, :] = d[-3, :]
        d[-1, :] = d[2, :]
    else:
        # wall-coincident normal components vanish; ghost edges are
        # antisymmetric about the wall edge
        d[1, :] = 0.0
        d[-2, :] = 0.0
        d[0, :] = -d[2, :]
        d[-1, :] = -d[-3, :]
    # y: the tangential direction
    if bc.vel_y == PERIODIC:
        d[:, 0] = d[:, -2]
        d[:, -1] = d[:, 1]
    else:
        # antisymmetric tangential ghost: the wall edge-to-center average
        # of u vanishes
        d[:, 0] = -d[:, 1]
        d[:, -1] = -d[:, -2]


def _fill_ns(f: NsField, bc: BcSet) -> None:
    d = f.data
    if bc.vel_y == PERIODIC:
        d[:, -2] = d[:, 1]
        d[:, 0] = d[:, -3]
        d[:, -1] = d[:, 2]
    else:
        d[:, 1] = 0.0
        d[:, -2] = 0.0
        d[:, 0] = -d[:, 2]
        d[:, -1] = -d[:, -3]
    if bc.vel_x == PERIODIC:
        d[0, :] = d[-2, :]
        d[-1, :] = d[1, :]
    else:
        d[0, :] = -d[1, :]
        d[-1, :] = -d[-2, :]


def fill_ghost(f, bc: BcSet):
    """Populate the ghost layer of ``f`` in place; returns ``f``.

    Cell fields get mirror (Neumann) or wrap (periodic) ghosts; edge
    fields get zero wall-normal components with antisymmetric ghosts, or
    periodic wrap.  Idempotent.
    """
    if isinstance(f, CellField):
        _fill_cell(f, bc)
    elif isinstance(f, EwField):
        _fill_ew(f, bc)
    elif isinstance(f, NsField):
        _fill_ns(f, bc)
    elif isinstance(f, VertexField):
        pass  # vertex fields carry no ghosts
    else:
        raise TypeError(f"cannot fill ghosts of {type(f).__name__}")
    return f
