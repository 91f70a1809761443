"""Spherically symmetric isentropic Navier-Stokes in Lagrangian mass coordinates.

Unknowns live on a fixed uniform mass grid ``y_j = j dm``, ``j = 0..J``:

* ``v`` (specific volume) and the pressure ``p = a v**-gamma`` on the cells,
* ``u`` (velocity) and ``r`` (radius) on the nodes, ``u_0 = u_J = 0``.

With ``w = r**(N-1)`` the scheme discretises

    v_t = (w u)_y,        u_t = w (kappa (w u)_y / v - p)_y,

taking the viscous term implicitly (one tridiagonal solve per step) and
the pressure explicitly.  Radii are rebuilt every step from the geometric
identity ``r_j**N = N * sum_{c<j} v_c dm``.

For the default Lie step the discrete energy obeys

    E^{n+1} - E^n = -kappa sum (dv)^2/(dt v) dm - sum |du|^2 dm/2
                    + sum [e(v^{n+1}) - e(v^n) + p^n dv] dm,

so it is non-increasing whenever ``dt <= 2 kappa / (rho c^2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded

from .radial import RadialGrid, RadialProfile, divergence, lp_norm, omega
from .sharp import gradient_eigenvalues, verify_linfty_bounds

DEFAULT_CFL = 0.4


class SolverError(RuntimeError):
    """A step could not be taken (stability, positivity or linear solve)."""


class StabilityError(SolverError):
    pass


class PositivityError(SolverError):
    pass


@dataclass(frozen=True)
class GasParams:
    a: float
    gamma: float
    mu: float
    lam: float

    def __post_init__(self):
        if not self.a >= 0:
            raise ValueError(f"pressure constant a must be >= 0, got {self.a}")
        if not self.gamma > 1:
            raise ValueError(f"adiabatic exponent gamma must be > 1, got {self.gamma}")
        if not self.mu > 0:
            raise ValueError(f"shear viscosity mu must be > 0, got {self.mu}")
        if not self.kappa > 0:
            raise ValueError(f"kappa = 2 mu + lambda must be > 0, got {self.kappa}")

    @property
    def kappa(self) -> float:
        return 2.0 * self.mu + self.lam

    def check_dimension(self, N: int) -> None:
        if self.mu + 0.5 * N * self.lam < 0:
            raise ValueError(
                f"mu + (N/2) lambda must be >= 0, got {self.mu + 0.5 * N * self.lam} for N={N}"
            )

    def pressure(self, v):
        return self.a * np.asarray(v, dtype=float) ** (-self.gamma)

    def internal_energy(self, v):
        """Potential energy per unit mass ``a rho^(gamma-1)/(gamma-1)``."""
        return self.a * np.asarray(v, dtype=float) ** (1.0 - self.gamma) / (self.gamma - 1.0)

    def sound_speed(self, v):
        return np.sqrt(self.a * self.gamma * np.asarray(v, dtype=float) ** (1.0 - self.gamma))


@dataclass(frozen=True, eq=False)
class LagrangianState:
    t: float
    N: int
    dm: float
    v: np.ndarray
    u: np.ndarray
    r: np.ndarray
    # max |r_raw - r| between the integrated and the rebuilt radii of the last step
    projection_gap: float = 0.0

    def __post_init__(self):
        for name in ("v", "u", "r"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.u.shape != self.r.shape or self.v.size != self.r.size - 1:
            raise ValueError("expected J cells for v and J+1 nodes for u and r")

    @property
    def J(self) -> int:
        return self.v.size

    @property
    def M0(self) -> float:
        return self.J * self.dm

    @property
    def R(self) -> float:
        return float(self.r[-1])

    @property
    def rho(self) -> np.ndarray:
        return 1.0 / self.v

    @property
    def mass_nodes(self) -> np.ndarray:
        return self.dm * np.arange(self.J + 1)

    def validate(self, R: float | None = None, tol: float = 1e-10) -> None:
        if not np.all(np.isfinite(self.v)) or not np.all(np.isfinite(self.u)):
            raise SolverError("non-finite state")
        if np.any(self.v <= 0):
            j = int(np.argmin(self.v))
            raise PositivityError(f"specific volume not positive in cell {j}: {self.v[j]:.3e}")
        if self.r[0] != 0.0 or np.any(np.diff(self.r) <= 0):
            raise SolverError("radii must start at 0 and increase strictly")
        if self.u[0] != 0.0 or self.u[-1] != 0.0:
            raise SolverError("velocity must vanish at the center and at the wall")
        if geometric_defect(self) > tol:
            raise SolverError(f"geometric consistency violated: {geometric_defect(self):.3e}")
        if R is not None and abs(self.r[-1] - R) > 1e-8 * R:
            raise SolverError(f"wall drifted: r_J={self.r[-1]!r}, R={R!r}")

    def radial_grid(self) -> RadialGrid:
        return RadialGrid(self.r, self.N)

    def velocity_profile(self) -> RadialProfile:
        return RadialProfile(self.radial_grid(), self.u)

    def node_density(self) -> np.ndarray:
        """Density at the nodes: reciprocal of the mean neighbouring volume."""
        v = self.v
        vn = np.empty(self.J + 1)
        vn[1:-1] = 0.5 * (v[:-1] + v[1:])
        vn[0], vn[-1] = v[0], v[-1]
        return 1.0 / vn


def radii_from_volume(v: np.ndarray, dm: float, N: int) -> np.ndarray:
    r = np.zeros(v.size + 1)
    r[1:] = (N * dm * np.cumsum(v)) ** (1.0 / N)
    return r


def geometric_defect(state: LagrangianState) -> float:
    """``max_j |r_j^N - N sum_{c<j} v_c dm|`` relative to ``R^N``."""
    vol = np.concatenate([[0.0], np.cumsum(state.v)]) * state.N * state.dm
    return float(np.max(np.abs(state.r**state.N - vol)) / state.r[-1] ** state.N)


def cell_divergence(state: LagrangianState) -> np.ndarray:
    """``rho (r^(N-1) u)_y`` on the cells."""
    flux = state.r ** (state.N - 1) * state.u
    return np.diff(flux) / (state.dm * state.v)


# -- initialisation -------------------------------------------------------

def _as_samples(f, r: np.ndarray) -> np.ndarray:
    if isinstance(f, RadialProfile):
        return np.interp(r, f.r, f.values)
    if callable(f):
        return np.asarray(f(r), dtype=float) * np.ones_like(r)
    return np.full_like(r, float(f))


def _cumulative_mass(r: np.ndarray, rho: np.ndarray, N: int) -> np.ndarray:
    a, b = r[:-1], r[1:]
    s = np.diff(rho) / (b - a)
    c0 = rho[:-1] - s * a
    cell = c0 * (b**N - a**N) / N + s * (b ** (N + 1) - a ** (N + 1)) / (N + 1)
    return np.concatenate([[0.0], np.cumsum(cell)])


def init(rho0, u0, R: float, N: int, params: GasParams, J: int, fine: int | None = None) -> LagrangianState:
    """Lagrangian state for initial density ``rho0`` and velocity ``u0``.

    ``rho0`` and ``u0`` may be :class:`RadialProfile` instances, callables of
    ``r`` or constants.  Callables are resolved on a fine radial grid
    (``fine`` intervals) whose piecewise-linear density is integrated
    exactly; node radii solve ``mass(r_j) = j M0 / J``.
    """
    if N not in (2, 3):
        raise ValueError(f"dimension N must be 2 or 3, got {N}")
    if J < 16:
        raise ValueError(f"need at least 16 cells, got {J}")
    params.check_dimension(N)
    if isinstance(rho0, RadialProfile):
        rf = rho0.r
    else:
        K = fine or max(8192, 64 * J)
        rf = np.linspace(0.0, R, K + 1)
        rf[-1] = R
    rho_f = _as_samples(rho0, rf)
    if not np.all(rho_f > 0):
        raise ValueError("initial density must be uniformly positive (no vacuum)")
    cum = _cumulative_mass(rf, rho_f, N)
    M0 = float(cum[-1])
    dm = M0 / J

    targets = dm * np.arange(1, J)
    k = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, rf.size - 2)
    a, b = rf[k], rf[k + 1]
    s = (rho_f[k + 1] - rho_f[k]) / (b - a)
    c0 = rho_f[k] - s * a
    need = targets - cum[k]
    # start from linear interpolation in r^N, then Newton on the exact cell mass
    frac = need / (cum[k + 1] - cum[k])
    x = (a**N + frac * (b**N - a**N)) ** (1.0 / N)
    for _ in range(8):
        m = c0 * (x**N - a**N) / N + s * (x ** (N + 1) - a ** (N + 1)) / (N + 1)
        x = np.clip(x - (m - need) / ((c0 + s * x) * x ** (N - 1)), a, b)
    r_nodes = np.concatenate([[0.0], x, [R]])
    v = (np.diff(r_nodes**N) / N) / dm

    u_nodes = _as_samples(u0, r_nodes)
    scale = max(1.0, float(np.max(np.abs(u_nodes))))
    if abs(u_nodes[0]) > 1e-10 * scale or abs(u_nodes[-1]) > 1e-10 * scale:
        raise ValueError("initial velocity must vanish at r=0 and r=R")
    u_nodes[0] = u_nodes[-1] = 0.0

    state = LagrangianState(0.0, N, dm, v, u_nodes, radii_from_volume(v, dm, N))
    state.validate()
    return state


# -- time stepping --------------------------------------------------------

def stable_dt(state: LagrangianState, params: GasParams, cfl: float = DEFAULT_CFL) -> float:
    """Acoustic limit ``cfl * min(dr / c)`` over the cells.

    With ``a = 0`` it is ``cfl * min(dr) / max|u|`` (infinite at rest).
    """
    c = params.sound_speed(state.v)
    dr = np.diff(state.r)
    with np.errstate(divide="ignore"):
        local = np.where(c > 0, dr / np.where(c > 0, c, 1.0), np.inf)
    dt = cfl * float(np.min(local))
    if not np.isfinite(dt):
        # pressureless gas: the viscous solve is implicit, so only node transport limits dt
        umax = float(np.max(np.abs(state.u)))
        dt = cfl * float(np.min(dr)) / umax if umax > 0 else np.inf
    return dt


def _kick(u, w, p, dt, dm):
    out = u.copy()
    out[1:-1] -= dt * w[1:-1] * np.diff(p) / dm
    return out


def _viscous_solve(rhs, w, v, kappa, dt, dm):
    alpha = dt * kappa * w[1:-1] / dm**2
    inv_left = 1.0 / v[:-1]
    inv_right = 1.0 / v[1:]
    wi = w[1:-1]
    n = wi.size
    ab = np.zeros((3, n))
    ab[1] = 1.0 + alpha * wi * (inv_left + inv_right)
    ab[0, 1:] = -alpha[:-1] * w[2:-1] * inv_right[:-1]
    ab[2, :-1] = -alpha[1:] * w[1:-2] * inv_left[1:]
    try:
        sol = solve_banded((1, 1), ab, rhs[1:-1])
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverError(f"tridiagonal solve failed: {exc}") from exc
    out = np.zeros_like(rhs)
    out[1:-1] = sol
    return out


def _check_positive(v: np.ndarray, t: float) -> np.ndarray:
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        j = int(np.argmin(np.where(np.isfinite(v), v, -np.inf)))
        raise PositivityError(f"specific volume lost positivity in cell {j} at t={t:.6g}")
    return v


def step(
    state: LagrangianState,
    params: GasParams,
    dt: float,
    splitting: str = "lie",
    cfl: float = DEFAULT_CFL,
    check_stability: bool = True,
) -> LagrangianState:
    """Advance one step; the input state is left untouched.

    ``splitting="lie"`` (first order) kicks with ``p^n`` and then solves the
    viscous part backward-Euler with the geometry frozen at ``t^n``.
    ``"strang"`` (second order) puts half pressure kicks with ``p^n`` and
    ``p^{n+1}`` around an implicit-midpoint viscous/volume update taken at
    a predicted midpoint geometry.
    """
    if dt <= 0:
        raise ValueError(f"time step must be positive, got {dt}")
    if check_stability:
        limit = stable_dt(state, params, cfl)
        if dt > limit * (1 + 1e-12):
            raise StabilityError(f"dt={dt:.3e} exceeds stability limit {limit:.3e}")
    N, dm = state.N, state.dm
    w = state.r ** (N - 1)
    v = state.v
    p = params.pressure(v)

    if splitting == "lie":
        u_star = _kick(state.u, w, p, dt, dm)
        u_new = _viscous_solve(u_star, w, v, params.kappa, dt, dm)
        v_new = _check_positive(v + dt * np.diff(w * u_new) / dm, state.t + dt)
        u_drift = u_new
        r_new = radii_from_volume(v_new, dm, N)
    elif splitting == "strang":
        u_a = _kick(state.u, w, p, 0.5 * dt, dm)
        # midpoint geometry predicted from the kicked velocity
        v_mid = _check_positive(v + 0.5 * dt * np.diff(w * u_a) / dm, state.t + 0.5 * dt)
        w_mid = radii_from_volume(v_mid, dm, N) ** (N - 1)
        u_bar = _viscous_solve(u_a, w_mid, v_mid, params.kappa, 0.5 * dt, dm)
        v_new = _check_positive(v + dt * np.diff(w_mid * u_bar) / dm, state.t + dt)
        r_new = radii_from_volume(v_new, dm, N)
        u_new = _kick(2.0 * u_bar - u_a, r_new ** (N - 1), params.pressure(v_new), 0.5 * dt, dm)
        u_drift = u_bar
    else:
        raise ValueError(f"unknown splitting {splitting!r}")

    r_raw = state.r + dt * u_drift
    return LagrangianState(
        state.t + dt, N, dm, v_new, u_new, r_new,
        projection_gap=float(np.max(np.abs(r_raw - r_new))),
    )


# -- diagnostics ----------------------------------------------------------

def energy(state: LagrangianState, params: GasParams) -> float:
    """``sum (u^2/2 + a rho^(gamma-1)/(gamma-1)) dm`` (no omega_N factor)."""
    kinetic = 0.5 * np.sum(state.u[1:-1] ** 2) * state.dm
    potential = np.sum(params.internal_energy(state.v)) * state.dm
    return float(kinetic + potential)


def viscous_dissipation(
    before: LagrangianState, after: LagrangianState, params: GasParams, midpoint: bool = False
) -> float:
    """``dt * kappa * sum D^2 v dm`` for one step, ``D = dv / (dt v)``.

    ``v`` is the start-of-step volume (Lie) or the step average (``midpoint``).
    """
    dt = after.t - before.t
    dv = after.v - before.v
    v = 0.5 * (before.v + after.v) if midpoint else before.v
    return float(params.kappa * np.sum(dv**2 / v) * before.dm / dt)


@dataclass
class DiagnosticsRecord:
    t: float
    E: float
    Phi: float
    beta: float
    div_sup: float
    grad_sup: float
    P_l2: float
    P_l6: float
    G_l2: float
    rho_min: float
    rho_max: float
    sharp_lower_margin: float
    sharp_upper_margin: float
    vol_constraint_err: float
    repr_residual: float = 0.0
    grad_l2: float = field(default=0.0, repr=False)
    sharp_ok: bool = field(default=True, repr=False)

    COLUMNS = (
        "t", "E", "Phi", "beta", "div_sup", "grad_sup", "P_l2", "P_l6", "G_l2",
        "rho_min", "rho_max", "sharp_lower_margin", "sharp_upper_margin",
        "vol_constraint_err", "repr_residual",
    )

    def row(self) -> list[float]:
        return [getattr(self, c) for c in self.COLUMNS]


def cell_norm(state: LagrangianState, f: np.ndarray, p: float) -> float:
    """``L^p(B_R)`` norm of a cell-wise constant field (cell volume = v dm)."""
    f = np.abs(np.asarray(f, dtype=float))
    if np.isinf(p):
        return float(np.max(f))
    return float((omega(state.N) * np.sum(f**p * state.v) * state.dm) ** (1.0 / p))


def effective_flux(state: LagrangianState, params: GasParams) -> RadialProfile:
    """``G = kappa div U - P`` at the node radii."""
    F = divergence(state.velocity_profile())
    P = params.pressure(1.0 / state.node_density())
    return F.with_values(params.kappa * F.values - P)


def diagnostics(state: LagrangianState, params: GasParams, R: float | None = None) -> DiagnosticsRecord:
    N = state.N
    u = state.velocity_profile()
    du, ur = gradient_eigenvalues(u)
    F = du + (N - 1) * ur
    grad_frob = u.with_values(np.sqrt(du**2 + (N - 1) * ur**2))
    grad_l2 = lp_norm(grad_frob, 2)
    P = params.pressure(state.v)
    P_l2 = cell_norm(state, P, 2)
    G = effective_flux(state, params)
    lower, upper = verify_linfty_bounds(u)
    rho = state.rho
    R_wall = state.r[-1] if R is None else R
    vol_target = R_wall**N / N
    beta = P_l2**2 + grad_l2**2
    return DiagnosticsRecord(
        t=state.t,
        E=energy(state, params),
        Phi=1.0 + float(np.max(rho)) + beta,
        beta=beta,
        div_sup=float(np.max(np.abs(F))),
        grad_sup=float(np.max(np.maximum(np.abs(du), np.abs(ur)))),
        P_l2=P_l2,
        P_l6=cell_norm(state, P, 6),
        G_l2=lp_norm(G, 2),
        rho_min=float(np.min(rho)),
        rho_max=float(np.max(rho)),
        sharp_lower_margin=lower.margin,
        sharp_upper_margin=upper.margin,
        vol_constraint_err=float(abs(np.sum(state.v) * state.dm - vol_target) / vol_target),
        grad_l2=grad_l2,
        sharp_ok=lower.satisfied and upper.satisfied,
    )


def with_velocity(state: LagrangianState, u: np.ndarray) -> LagrangianState:
    return replace(state, u=np.asarray(u, dtype=float))
