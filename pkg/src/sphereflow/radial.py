"""Radial grids, weighted quadrature and radial differential operators.

A radially symmetric field on the ball ``B_R`` in ``N`` dimensions is stored
as its profile ``f(r)`` sampled at the nodes ``0 = r_0 < ... < r_K = R``.
Integrals carry the surface factor ``omega_N = N |B_1|`` and the Jacobian
``r**(N-1)``.

Quadrature is a product rule: the profile is interpolated linearly on each
cell and the weight ``r**(N-1)`` is integrated exactly against it (Gauss-
Legendre on each cell for ``|f|**p``, closed form for moments).  Constant and
linear profiles are therefore integrated without error.  Derivatives come
from a cubic spline through the nodes.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gamma as _gamma_fn, pi

import numpy as np
from scipy.interpolate import CubicSpline

MIN_INTERVALS = 16

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def omega(N: int) -> float:
    """Surface constant ``N |B_1|`` (2*pi for N=2, 4*pi for N=3)."""
    if N < 1:
        raise ValueError(f"dimension must be >= 1, got {N}")
    return N * pi ** (N / 2) / _gamma_fn(N / 2 + 1)


@dataclass(frozen=True, eq=False)
class RadialGrid:
    nodes: np.ndarray
    N: int

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1:
            raise ValueError("grid nodes must be one-dimensional")
        if self.N not in (2, 3):
            raise ValueError(f"dimension N must be 2 or 3, got {self.N}")
        if nodes.size - 1 < MIN_INTERVALS:
            raise ValueError(
                f"grid needs at least {MIN_INTERVALS} intervals, got {nodes.size - 1}"
            )
        if nodes[0] != 0.0:
            raise ValueError("first grid node must be exactly 0")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("grid nodes must be strictly increasing")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def R(self) -> float:
        return float(self.nodes[-1])

    @property
    def K(self) -> int:
        """Number of intervals."""
        return self.nodes.size - 1

    @property
    def omega(self) -> float:
        return omega(self.N)

    @classmethod
    def uniform(cls, K: int, R: float = 1.0, N: int = 3) -> "RadialGrid":
        nodes = np.linspace(0.0, R, K + 1)
        nodes[-1] = R
        return cls(nodes, N)

    def sample(self, fn) -> "RadialProfile":
        """Profile of the callable ``fn`` evaluated at the nodes."""
        return RadialProfile(self, np.asarray(fn(self.nodes), dtype=float) * np.ones_like(self.nodes))


@dataclass(frozen=True, eq=False)
class RadialProfile:
    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != self.grid.nodes.shape:
            raise ValueError(
                f"profile has {values.size} values for {self.grid.nodes.size} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("profile values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values) -> "RadialProfile":
        return RadialProfile(self.grid, values)

    def __mul__(self, c: float) -> "RadialProfile":
        return self.with_values(self.values * c)

    __rmul__ = __mul__


def _check_center_zero(u: RadialProfile) -> None:
    scale = max(1.0, float(np.max(np.abs(u.values))))
    if abs(u.values[0]) > 1e-10 * scale:
        raise ValueError(
            f"radial velocity must vanish at r=0, got u(0)={u.values[0]:.3e}"
        )


def radial_derivative(u: RadialProfile) -> np.ndarray:
    """``u_r`` at the nodes from the not-a-knot cubic spline through ``u``.

    Exact for cubics (so for ``u = r`` and ``u = r^2``) on any grid.
    """
    return CubicSpline(u.r, u.values).derivative()(u.r)


def over_r(u: RadialProfile, du: np.ndarray | None = None) -> np.ndarray:
    """``u/r`` at the nodes, with the limit ``u'(0)`` at the center."""
    _check_center_zero(u)
    if du is None:
        du = radial_derivative(u)
    out = np.empty_like(u.values)
    out[1:] = u.values[1:] / u.r[1:]
    out[0] = du[0]
    return out


def divergence(u: RadialProfile) -> RadialProfile:
    """Divergence ``u_r + (N-1) u/r`` of the field ``u(r) x/|x|``."""
    du = radial_derivative(u)
    F = du + (u.grid.N - 1) * over_r(u, du)
    return u.with_values(F)


def _cell_quadrature(grid: RadialGrid, values: np.ndarray, p: float) -> float:
    r = grid.nodes
    a, b = r[:-1], r[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    # (cells, gauss points)
    s = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    t = (s - a[:, None]) / (b - a)[:, None]
    f = values[:-1, None] * (1.0 - t) + values[1:, None] * t
    integrand = np.abs(f) ** p * s ** (grid.N - 1)
    return float(np.sum(half[:, None] * _GL_WEIGHTS[None, :] * integrand))


def lp_norm(f: RadialProfile, p: float) -> float:
    """``L^p(B_R)`` norm of the radial function ``f``.

    ``p = inf`` gives the maximum of ``|f|`` over the nodes.
    """
    if p < 1:
        raise ValueError(f"exponent p must be >= 1, got {p}")
    if np.isinf(p):
        return float(np.max(np.abs(f.values)))
    integral = _cell_quadrature(f.grid, f.values, p)
    return (f.grid.omega * integral) ** (1.0 / p)


def _cell_moments(r: np.ndarray, F: np.ndarray, N: int) -> np.ndarray:
    """Exact ``int_{r_i}^{r_{i+1}} s^(N-1) F_lin(s) ds`` for each cell."""
    a, b = r[:-1], r[1:]
    slope = np.diff(F) / (b - a)
    c0 = F[:-1] - slope * a
    return c0 * (b**N - a**N) / N + slope * (b ** (N + 1) - a ** (N + 1)) / (N + 1)


def cumulative_moment(F: RadialProfile) -> np.ndarray:
    """``int_0^{r_k} s^(N-1) F ds`` at every node ``r_k``."""
    out = np.zeros_like(F.values)
    out[1:] = np.cumsum(_cell_moments(F.r, F.values, F.grid.N))
    return out


def moment_integral(F: RadialProfile, r: float) -> float:
    """``int_0^r s^(N-1) F(s) ds`` for any ``r`` in ``[0, R]``."""
    nodes = F.r
    if not (0.0 <= r <= nodes[-1]):
        raise ValueError(f"radius {r} outside [0, {nodes[-1]}]")
    k = int(np.searchsorted(nodes, r, side="right")) - 1
    k = min(k, nodes.size - 2)
    total = float(np.sum(_cell_moments(nodes[: k + 1], F.values[: k + 1], F.grid.N)))
    # partial cell [r_k, r]
    a, b = nodes[k], nodes[k + 1]
    Fr = F.values[k] + (F.values[k + 1] - F.values[k]) * (r - a) / (b - a)
    total += float(
        _cell_moments(np.array([a, r]), np.array([F.values[k], Fr]), F.grid.N)[0]
    ) if r > a else 0.0
    return total
