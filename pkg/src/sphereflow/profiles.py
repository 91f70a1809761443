"""Named initial-data families used by the CLI and the test-suite."""

from __future__ import annotations

import numpy as np

from .solver import _cumulative_mass

FAMILIES = ("constant", "velocity", "polynomial-bump")


def initial_profiles(family: str, R: float, amplitude: float, rho_ref: float = 1.0):
    """``(rho0, u0)`` callables of ``r`` for a named family.

    * ``constant``:         rho0 = rho_ref, u0 = 0 (static equilibrium)
    * ``velocity``:         rho0 = rho_ref, u0 = A r (R - r)
    * ``polynomial-bump``:  rho0 = rho_ref (1 + A (1 - (r/R)^2)^2), u0 = A r (R - r)
    """
    A = float(amplitude)
    if family == "constant":
        return (lambda r: np.full_like(np.asarray(r, dtype=float), rho_ref)), (
            lambda r: np.zeros_like(np.asarray(r, dtype=float))
        )
    if family == "velocity":
        return (lambda r: np.full_like(np.asarray(r, dtype=float), rho_ref)), (
            lambda r: A * r * (R - r)
        )
    if family == "polynomial-bump":
        return (lambda r: rho_ref * (1.0 + A * (1.0 - (r / R) ** 2) ** 2)), (
            lambda r: A * r * (R - r)
        )
    raise ValueError(f"unknown profile family {family!r}; choose from {FAMILIES}")


def shell_bump(R: float):
    """Smooth bump centred at mid-radius, flat at the center."""
    return lambda r: np.exp(-(((r - 0.5 * R) / (0.2 * R)) ** 2))


def mass_preserving_perturbation(rho0, R: float, N: int, delta: float, bump=None, fine: int = 8192):
    """``rho0 (1 + delta (b - b_mean))`` with ``b_mean`` chosen so the mass is unchanged.

    ``b_mean`` uses the same piecewise-linear product quadrature as
    :func:`sphereflow.solver.init`, so both runs get the same ``M0``
    to roundoff.
    """
    bump = bump or shell_bump(R)
    rf = np.linspace(0.0, R, fine + 1)
    base = np.asarray(rho0(rf), dtype=float) * np.ones_like(rf)
    b = np.asarray(bump(rf), dtype=float)
    b_mean = _cumulative_mass(rf, base * b, N)[-1] / _cumulative_mass(rf, base, N)[-1]

    def perturbed(r):
        return np.asarray(rho0(r), dtype=float) * (1.0 + delta * (bump(r) - b_mean))

    return perturbed, fine
