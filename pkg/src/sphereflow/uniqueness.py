"""Two solutions side by side: difference norms and a discrete Gronwall check.

With ``Lam = v1 - v2`` and ``Theta = u1 - u2`` on the shared mass grid,

    y_k = ||Lam||^2 + ||Theta||^2          (L^2(dy), no omega_N)

should obey ``y_{k+1} <= y_k (1 + dt C lam_k)`` with
``lam_k = 1 + ||(r^(N-1) u^2)_y||_inf^2`` measured on run 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import Trajectory
from .profiles import mass_preserving_perturbation
from .solver import (
    DEFAULT_CFL,
    GasParams,
    LagrangianState,
    SolverError,
    init,
    stable_dt,
    step,
)


class TwinRunError(SolverError):
    def __init__(self, run: int, cause: Exception):
        super().__init__(f"run {run} aborted: {cause}")
        self.run = run


@dataclass(frozen=True)
class DiffRecord:
    t: float
    lam_norm2: float
    theta_norm2: float
    flux_diff_norm2: float
    # running int_0^t lam ds (trapezoid); y(t) <= y(0) exp(C gronwall_rhs)
    gronwall_rhs: float
    # lam at this record, 1 + ||(r^(N-1) u^2)_y||_inf^2 of run 2
    lam: float = 1.0

    COLUMNS = ("t", "lam_norm2", "theta_norm2", "flux_diff_norm2", "gronwall_rhs")

    def __post_init__(self):
        vals = (self.lam_norm2, self.theta_norm2, self.flux_diff_norm2, self.gronwall_rhs)
        if not all(np.isfinite(x) and x >= 0 for x in vals):
            raise ValueError(f"diff record at t={self.t} has negative or non-finite entries")

    @property
    def y(self) -> float:
        return self.lam_norm2 + self.theta_norm2

    def row(self) -> list[float]:
        return [getattr(self, c) for c in self.COLUMNS]


def _flux(state: LagrangianState) -> np.ndarray:
    return state.r ** (state.N - 1) * state.u


def lambda_rate(state: LagrangianState) -> float:
    """``1 + ||(r^(N-1) u^2)_y||_inf^2`` on the cells."""
    g = np.diff(_flux(state) * state.u) / state.dm
    return 1.0 + float(np.max(np.abs(g))) ** 2


def diff_record(s1: LagrangianState, s2: LagrangianState, lam_integral: float) -> DiffRecord:
    dm = s2.dm
    lam = s1.v - s2.v
    theta = s1.u - s2.u
    dflux = np.diff(_flux(s1) - _flux(s2)) / dm
    return DiffRecord(
        t=s2.t,
        lam_norm2=float(np.sum(lam**2) * dm),
        theta_norm2=float(np.sum(theta[1:-1] ** 2) * dm),
        flux_diff_norm2=float(np.sum(dflux**2) * dm),
        gronwall_rhs=lam_integral,
        lam=lambda_rate(s2),
    )


@dataclass
class TwinRun:
    traj1: Trajectory
    traj2: Trajectory
    records: list[DiffRecord]

    @property
    def v_min(self) -> float:
        return min(float(np.min(s.v)) for tr in (self.traj1, self.traj2) for s in tr.states)

    @property
    def v_max(self) -> float:
        return max(float(np.max(s.v)) for tr in (self.traj1, self.traj2) for s in tr.states)

    @property
    def sup_diff(self) -> float:
        """``sup_t (||Lam|| + ||Theta||)``."""
        return max(np.sqrt(r.lam_norm2) + np.sqrt(r.theta_norm2) for r in self.records)

    @property
    def lambda_integral(self) -> float:
        return self.records[-1].gronwall_rhs


def twin_states(
    rho0, u0, R: float, N: int, params: GasParams, J: int, delta: float, bump=None
) -> tuple[LagrangianState, LagrangianState]:
    """Base state and a mass-preserving density perturbation of it."""
    pert, fine = mass_preserving_perturbation(rho0, R, N, delta, bump=bump)
    return init(rho0, u0, R, N, params, J, fine=fine), init(pert, u0, R, N, params, J, fine=fine)


def twin_run(
    s1: LagrangianState,
    s2: LagrangianState,
    params: GasParams,
    t_end: float,
    *,
    cfl: float = DEFAULT_CFL,
    splitting: str = "lie",
) -> TwinRun:
    """Advance both states with one shared ``dt`` sequence, recording differences."""
    if s1.J != s2.J or s1.N != s2.N:
        raise ValueError("twin runs need the same grid size and dimension")
    for i, s in enumerate((s1, s2), start=1):
        if not (np.all(np.isfinite(s.v)) and np.all(s.v > 0)):
            raise ValueError(f"run {i}: initial density is not bounded above and below")
    t1, t2 = Trajectory.start(s1, params), Trajectory.start(s2, params)
    records = [diff_record(s1, s2, 0.0)]
    integral = 0.0
    while s2.t < t_end * (1 - 1e-14):
        dt = min(stable_dt(s1, params, cfl), stable_dt(s2, params, cfl), t_end - s2.t)
        new = []
        for i, s in enumerate((s1, s2), start=1):
            try:
                new.append(step(s, params, dt, splitting=splitting, cfl=cfl))
            except SolverError as exc:
                raise TwinRunError(i, exc) from exc
        integral += 0.5 * dt * (records[-1].lam + lambda_rate(new[1]))
        s1, s2 = new
        t1.append(s1)
        t2.append(s2)
        records.append(diff_record(s1, s2, integral))
    return TwinRun(t1, t2, records)


@dataclass(frozen=True)
class GronwallReport:
    C: float
    passed: bool
    bound: float
    y_final: float
    eps_ok: bool
    C_eps: float | None
    C_lambda: float
    reason: str = ""


def gronwall_check(
    records: list[DiffRecord],
    eps: float,
    C_eps: float | None = None,
    *,
    kappa: float | None = None,
    v_max: float | None = None,
) -> GronwallReport:
    """Smallest ``C`` with ``y_{k+1} <= y_k (1 + dt_k C lam_k)`` for every step.

    ``C_eps`` caps the admissible constant (fail if the fit exceeds it).
    ``eps`` must satisfy ``2 eps < kappa / v_max`` when both are given, so the
    dissipation ``kappa int |(r^(N-1) Theta)_y|^2 / v`` absorbs the eps terms.
    ``C_lambda`` is the fitted constant of the volume-difference estimate
    ``d/dt ||Lam||^2 / 2 <= eps ||(r^(N-1) Theta)_y||^2 + C ||Lam||^2``
    (Young's inequality gives ``1 / (4 eps)``).
    """
    if len(records) < 2:
        raise ValueError("gronwall_check needs at least two records")
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    eps_ok = True
    if kappa is not None and v_max is not None:
        eps_ok = 2.0 * eps < kappa / v_max

    C = 0.0
    C_lam = 0.0
    reason = ""
    for a, b in zip(records[:-1], records[1:]):
        dt = b.t - a.t
        if a.y == 0.0:
            if b.y > 0.0:
                C = np.inf
                reason = f"difference appeared from zero at t={b.t:.6g}"
                break
            continue
        C = max(C, (b.y / a.y - 1.0) / (dt * a.lam))
        if a.lam_norm2 > 0:
            growth = 0.5 * (b.lam_norm2 - a.lam_norm2) / dt - eps * b.flux_diff_norm2
            C_lam = max(C_lam, growth / a.lam_norm2)

    y0, yK = records[0].y, records[-1].y
    with np.errstate(over="ignore"):
        bound = y0 * float(np.exp(C * records[-1].gronwall_rhs)) if np.isfinite(C) else np.inf
    passed = bool(np.isfinite(C) and eps_ok)
    if passed and C_eps is not None and C > C_eps:
        passed = False
        reason = f"fitted C={C:.4g} exceeds C_eps={C_eps:.4g}"
    if not eps_ok:
        reason = f"eps={eps} too large for dissipation kappa/v_max={kappa / v_max:.4g}"
    return GronwallReport(float(C), passed, float(bound), float(yK), eps_ok, C_eps, float(C_lam), reason)


@dataclass(frozen=True)
class LipschitzReport:
    constant: float
    max_lhs: float
    min_slack: float
    witness_cell: int
    passed: bool


def pressure_lipschitz_check(v1, v2, params: GasParams, v_min: float | None = None) -> LipschitzReport:
    """``|p(v1) - p(v2)| <= a gamma v_min^(-gamma-1) |v1 - v2|`` cell by cell.

    ``v1``, ``v2`` are arrays or states; ``v_min`` defaults to the smallest
    volume in either.
    """
    v1 = np.asarray(getattr(v1, "v", v1), dtype=float)
    v2 = np.asarray(getattr(v2, "v", v2), dtype=float)
    if v1.shape != v2.shape:
        raise ValueError("volume arrays differ in shape")
    lo = float(min(np.min(v1), np.min(v2)))
    if v_min is None:
        v_min = lo
    if not 0 < v_min <= lo * (1 + 1e-14):
        raise ValueError(f"v_min={v_min} is not a lower bound for both states (min {lo})")
    C = params.a * params.gamma * v_min ** (-params.gamma - 1.0)
    p1, p2 = params.pressure(v1), params.pressure(v2)
    lhs = np.abs(p1 - p2)
    rhs = C * np.abs(v1 - v2)
    # allow for rounding in evaluating p(v1) and p(v2)
    slack = rhs * (1 + 1e-12) + 8 * np.finfo(float).eps * np.maximum(p1, p2) - lhs
    j = int(np.argmin(slack))
    return LipschitzReport(float(C), float(np.max(lhs)), float(slack[j]), j, bool(np.all(slack >= 0)))
