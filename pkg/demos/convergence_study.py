"""Cauchy convergence study: second-order accuracy in space and time.

Starting from the smooth field c = cos(2*pi*x) + cos(2*pi*y) with
matched densities, the run is repeated on a refinement schedule where
the mesh doubles and the time step quarters.  Each solution is compared
against the next finer one (prolonged to the fine grid), so no exact
solution is needed; the observed rates approach 2.

Usage: python demos/convergence_study.py [primitive|projection] [levels]
The default two levels take a few minutes on one core; a third adds an
m=64 run (tens of minutes) and a fourth an m=128 run (hours).
"""

import sys

from qnsch import RunConfig, converge, default_levels

scheme = sys.argv[1] if len(sys.argv) > 1 else "primitive"
n_levels = int(sys.argv[2]) if len(sys.argv) > 2 else 2

cfg = RunConfig.from_dict({
    "scheme": scheme,
    "grid": {"m1": 16},
    "fluids": {"rho1": 1.0, "rho2": 1.0, "mu1": 1.0, "mu2": 1.0},
    "groups": {"epsilon": 0.1, "Re": 1.0, "We": 1.0, "Fr": 1.0},
    "scenario": "convergence",
    "time": {"dt": 1.0 / 16.0, "t_end": 1.0},
})

rows = converge(cfg, default_levels(n_levels))

print(f"\n{scheme} scheme, T = {cfg.t_end}")
print(f"{'grids':>12} {'error':>12} {'rate':>6}")
for m_coarse, m_fine, err, rate in rows:
    rate_s = f"{rate:6.2f}" if rate is not None else "     -"
    print(f"{m_coarse:>5} ->{m_fine:>4} {err:12.4e} {rate_s}")
