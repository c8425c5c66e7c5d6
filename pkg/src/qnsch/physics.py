"""Constitutive laws for the two-fluid mixture and nondimensional groups.

All functions accept scalars or ndarrays of the phase variable c (c = 1
in fluid 1, c = 0 in fluid 2) and are pure.  The mixture density and
viscosity follow the harmonic closure rho1*rho2/((rho2-rho1)c + rho1),
whose derivative satisfies rho' = -alpha rho^2 with
alpha = (rho2-rho1)/(rho1*rho2).  The secant-averaged nonlinearities
``g_avg`` and ``r_avg`` satisfy exact difference identities,

    F(c1) - F(c0) = g_avg(c1, c0) * (c1 - c0),
    rho(c1) - rho(c0) = r_avg(c1, c0) * (c1 - c0),

which are what make the discrete energy law and mass conservation hold
to machine precision rather than to truncation order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "FluidPair", "NondimGroups",
    "density_of", "viscosity_of", "mobility_reg", "double_well",
    "g_avg", "r_avg", "eta_capillary", "nondimensionalize",
]


class MixtureDomainError(ValueError):
    """Phase value outside the domain of a constitutive function."""


@dataclass(frozen=True)
class FluidPair:
    """Component densities and viscosities (fluid 1 is c = 1)."""

    rho1: float
    rho2: float
    mu1: float = 1.0
    mu2: float = 1.0

    def __post_init__(self):
        for name in ("rho1", "rho2", "mu1", "mu2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def alpha(self) -> float:
        return (self.rho2 - self.rho1) / (self.rho1 * self.rho2)


@dataclass(frozen=True)
class NondimGroups:
    """Dimensionless parameters of the flow problem.

    M plays the role of a squared Mach number for the chemical field;
    the asymptotic scaling ties M = epsilon and Pe = 1/epsilon.
    """

    Re: float
    We: float
    Fr: float
    M: float
    Pe: float
    epsilon: float
    eta: float
    alpha: float = 0.0

    def __post_init__(self):
        for name in ("Re", "We", "Fr", "M", "Pe", "epsilon", "eta"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @classmethod
    def asymptotic(cls, *, Re, We, Fr, epsilon, eta, alpha=0.0) -> "NondimGroups":
        """Groups with the interface-limit scaling M = eps, Pe = 1/eps."""
        return cls(Re=Re, We=We, Fr=Fr, M=epsilon, Pe=1.0 / epsilon,
                   epsilon=epsilon, eta=eta, alpha=alpha)

    def with_alpha_of(self, fluids: FluidPair) -> "NondimGroups":
        return replace(self, alpha=fluids.alpha)


def _harmonic(c, v1, v2, label):
    c = np.asarray(c, dtype=float)
    denom = (v2 - v1) * c + v1
    if np.any(denom <= 0):
        bad = np.asarray(c)[np.asarray(denom) <= 0]
        raise MixtureDomainError(
            f"{label} undefined: nonpositive denominator at c = {bad.flat[0]}"
        )
    out = v1 * v2 / denom
    return out if out.ndim else float(out)


def density_of(c, fluids: FluidPair):
    """Mixture density rho(c) = rho1 rho2 / ((rho2 - rho1)c + rho1)."""
    return _harmonic(c, fluids.rho1, fluids.rho2, "density")


def viscosity_of(c, fluids: FluidPair):
    """Mixture viscosity, same harmonic form with mu1, mu2."""
    return _harmonic(c, fluids.mu1, fluids.mu2, "viscosity")


def mobility_reg(c, epsilon: float):
    """Regularized degenerate mobility sqrt(c^2 (1-c)^2 + epsilon)."""
    if epsilon <= 0:
        raise ValueError(f"mobility regularization must be positive, got {epsilon}")
    c = np.asarray(c, dtype=float)
    out = np.sqrt((c * (1.0 - c)) ** 2 + epsilon)
    return out if out.ndim else float(out)


def double_well(c):
    """Double-well potential F(c) = c^2(c-1)^2/4 and its derivative f."""
    c = np.asarray(c, dtype=float)
    F = 0.25 * (c * (c - 1.0)) ** 2
    f = c * (c - 1.0) * (c - 0.5)
    if F.ndim:
        return F, f
    return float(F), float(f)


def g_avg(c_new, c_old):
    """Secant average of f: (F(c_new)-F(c_old))/(c_new-c_old), in the
    polynomial form that is exact for coincident arguments."""
    c_new = np.asarray(c_new, dtype=float)
    c_old = np.asarray(c_old, dtype=float)
    out = 0.25 * (c_new * (c_new - 1.0) + c_old * (c_old - 1.0)) * (c_new + c_old - 1.0)
    return out if out.ndim else float(out)


def r_avg(c_new, c_old, fluids: FluidPair):
    """Secant average of rho': -alpha rho(c_new) rho(c_old)."""
    out = -fluids.alpha * density_of(c_new, fluids) * density_of(c_old, fluids)
    if np.ndim(out):
        return out
    return float(out)


def eta_capillary(rho1: float, rho2: float) -> float:
    """Surface-energy calibration constant for unequal densities."""
    if rho1 <= 0 or rho2 <= 0:
        raise ValueError("densities must be positive")
    if rho1 == rho2:
        raise MixtureDomainError(
            "eta calibration degenerates for matched densities; supply eta directly"
        )
    num = (rho2 - rho1) ** 3
    den = (2.0 * np.sqrt(2.0) * rho1 * rho2
           * (rho2 ** 2 - rho1 ** 2 - 2.0 * rho1 * rho2 * np.log(rho2 / rho1)))
    return float(num / den)


def nondimensionalize(*, L, U, rho, mu_l, mu_c, sigma, g, eps_dim,
                      mobility=1.0) -> dict:
    """Dimensionless groups from characteristic scales.

    Returns a dict of the raw group values; scenario builders that take
    groups directly bypass this entirely.
    """
    scales = dict(L=L, U=U, rho=rho, mu_l=mu_l, mu_c=mu_c, sigma=sigma,
                  g=g, eps_dim=eps_dim, mobility=mobility)
    for name, val in scales.items():
        if val <= 0:
            raise ValueError(f"characteristic scale {name} must be positive, got {val}")
    return {
        "M": U ** 2 / mu_c,
        "We": rho * U ** 2 * L / sigma,
        "Re": rho * L * U / mu_l,
        "Fr": U ** 2 / (g * L),
        "Pe": rho * U * L / (mobility * mu_c),
        "epsilon": eps_dim / L,
    }
