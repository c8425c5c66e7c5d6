"""Staggered-grid finite difference solver for quasi-incompressible
two-phase Navier-Stokes/Cahn-Hilliard flow with variable density and
viscosity.

Layers:

* :mod:`qnsch.grid` / :mod:`qnsch.operators` — staggered (MAC) fields,
  ghost-cell boundary handling, averaging/difference operators, and the
  discrete inner products/norms whose summation-by-parts structure the
  conservation and energy laws rest on.
* :mod:`qnsch.physics` — constitutive mixture laws and nondimensional
  groups.
* :mod:`qnsch.schemes` — the fully discrete primitive-variable and
  projection time steppers, expressed as residual evaluations.
* :mod:`qnsch.multigrid` — nonlinear FAS V-cycle solver with red-black
  box smoothers.
* :mod:`qnsch.diagnostics`, :mod:`qnsch.scenarios`, :mod:`qnsch.runner`,
  :mod:`qnsch.output`, :mod:`qnsch.cli` — observables, benchmark
  scenarios, the time loop, file output, and the command line.
"""

from .grid import BcSet, GridSpec
from .physics import FluidPair, NondimGroups, eta_capillary
from .schemes import (PRIMITIVE, PROJECTION, SchemeParams, State,
                      residual_primitive, residual_projection)
from .multigrid import MgConfig, SolveInfo, solve_timestep
from .diagnostics import (StepReport, discrete_energy, divergence_field,
                          total_masses)
from .scenarios import RunConfig, init_scenario
from .runner import converge, default_levels, run
from .selftest import run_selftest

__version__ = "1.0.0"

__all__ = [
    "BcSet", "GridSpec", "FluidPair", "NondimGroups", "eta_capillary",
    "PRIMITIVE", "PROJECTION", "SchemeParams", "State",
    "residual_primitive", "residual_projection",
    "MgConfig", "SolveInfo", "solve_timestep",
    "StepReport", "discrete_energy", "divergence_field", "total_masses",
    "RunConfig", "init_scenario", "converge", "default_levels", "run",
    "run_selftest", "__version__",
]
