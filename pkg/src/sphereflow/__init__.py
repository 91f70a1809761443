"""Radially symmetric compressible Navier-Stokes: sharp gradient bounds,
a Lagrangian solver and run-time checks of its exact identities."""

from .radial import RadialGrid, RadialProfile, divergence, lp_norm, over_r, radial_derivative
from .solver import GasParams, LagrangianState, init, step
from .density import Trajectory, psi_factors, verify_representation
from .uniqueness import gronwall_check, pressure_lipschitz_check, twin_run

__version__ = "0.1.0"
