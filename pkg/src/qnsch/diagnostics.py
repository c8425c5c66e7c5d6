"""Certified run observables: masses, energy, divergence, and the
scenario metrics (capillary amplitude, rising velocity, interface tips).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import GridSpec
from . import operators as ops
from .physics import density_of, double_well
from .schemes import SchemeParams, State

__all__ = [
    "StepReport", "discrete_energy", "total_masses", "divergence_field",
    "rising_velocity", "capillary_amplitude", "interface_tips",
    "convergence_rates", "MetricError",
]


class MetricError(RuntimeError):
    """A scenario metric could not be extracted from the state."""


@dataclass
class StepReport:
    """One diagnostics row, emitted every report interval."""

    time: float
    mass_rho: float
    mass_rhoc: float
    energy: float
    energy_delta: float
    max_div: float
    cycles: int
    metric: Optional[float] = None


def discrete_energy(s: State, p: SchemeParams) -> float:
    """Total discrete energy: kinetic + interfacial gradient + bulk
    double-well + gravitational potential."""
    g = s.grid
    gr = p.groups
    rho = density_of(s.c, p.fluids)
    kinetic = 0.5 * ops.norm_weighted_vel(rho, s.u, s.v, g) ** 2
    grad = (gr.epsilon * gr.eta / (2.0 * gr.We)) * \
        ops.norm_weighted_grad_cell(rho, s.c, g) ** 2
    bulk = (gr.eta * g.h ** 2 / (gr.epsilon * gr.We)) * \
        ops.inner_cell(rho, double_well(s.c)[0])
    y = (np.arange(g.m2 + 2) - 0.5) * g.h
    potential = (g.h ** 2 / gr.Fr) * ops.inner_cell(rho, y[None, :]
                                                    * np.ones_like(rho))
    return kinetic + grad + bulk + potential


def total_masses(s: State, p: SchemeParams) -> tuple[float, float]:
    """Discrete integrals of density and component density (h^2 measure)."""
    h2 = s.grid.h ** 2
    rho = density_of(s.c, p.fluids)
    return (h2 * ops.inner_cell(rho, np.ones_like(rho)),
            h2 * ops.inner_cell(rho, s.c))


def divergence_field(s: State) -> np.ndarray:
    """Cell-centered discrete divergence d_x u + d_y v."""
    g = s.grid
    return ops.dif_ec_x(s.u, g) + ops.dif_ec_y(s.v, g)


def rising_velocity(s: State) -> float:
    """Concentration-weighted mean vertical velocity."""
    g = s.grid
    vc = ops.avg_ec_y(s.v, g)
    denom = ops.inner_cell(s.c, np.ones_like(s.c))
    if denom <= 0.0:
        raise MetricError("rising velocity undefined: total c is zero")
    return ops.inner_cell(vc, s.c) / denom


def _crossings(c: np.ndarray, grid: GridSpec, level: float = 0.5):
    """Interpolated y of the c=level crossing, one value per column."""
    m1, m2 = grid.m1, grid.m2
    ys = np.empty(m1)
    for k in range(m1):
        col = c[k + 1, 1:m2 + 1]
        sign = col - level
        idx = np.nonzero((sign[:-1] == 0) | (sign[:-1] * sign[1:] < 0))[0]
        if idx.size == 0:
            raise MetricError(f"no c={level} crossing in column {k}")
        j = idx[0]
        y0 = (j + 0.5) * grid.h
        frac = (level - col[j]) / (col[j + 1] - col[j])
        ys[k] = y0 + frac * grid.h
    return ys


def capillary_amplitude(s: State, y_rest: float = 0.5) -> float:
    """Interface displacement from rest at the column nearest x=0."""
    ys = _crossings(s.c, s.grid)
    return ys[0] - y_rest


def interface_tips(s: State) -> tuple[float, float]:
    """(highest, lowest) interpolated interface height over all columns."""
    ys = _crossings(s.c, s.grid)
    return float(np.max(ys)), float(np.min(ys))


def convergence_rates(errors) -> list[float]:
    """log2 ratios of successive errors (order estimates)."""
    e = np.asarray(errors, dtype=float)
    if np.any(e <= 0):
        raise ValueError("errors must be positive")
    return list(np.log2(e[:-1] / e[1:]))
