"""Time loop, run-time invariant checks and refinement studies."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .density import Trajectory, verify_representation, verify_volume_constraint
from .solver import (
    DEFAULT_CFL,
    DiagnosticsRecord,
    GasParams,
    LagrangianState,
    SolverError,
    diagnostics,
    energy,
    geometric_defect,
    init,
    stable_dt,
    step,
    viscous_dissipation,
)

log = logging.getLogger(__name__)

ENERGY_STEP_TOL = 1e-8
VOLUME_TOL = 1e-8
GEOMETRY_TOL = 1e-10
WALL_TOL = 1e-8
REPR_TOL = 1e-3


@dataclass
class RunResult:
    traj: Trajectory
    records: list[DiagnosticsRecord]
    energies: np.ndarray
    dissipation: np.ndarray
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def energy_defect(self) -> np.ndarray:
        """Per-step ``E^{n+1} - E^n + viscous dissipation``; zero in the continuum."""
        return np.diff(self.energies) + self.dissipation

    @property
    def total_energy_drift(self) -> float:
        return float(np.sum(np.abs(self.energy_defect)))

    def fail(self, name: str, detail: str) -> None:
        if name not in {f.split(":")[0] for f in self.failures}:
            self.failures.append(f"{name}: {detail}")


def run(
    state0: LagrangianState,
    params: GasParams,
    t_end: float,
    *,
    cfl: float = DEFAULT_CFL,
    n_steps: int | None = None,
    splitting: str = "lie",
    output_interval: float | None = None,
    R: float | None = None,
    monitor_representation: bool = True,
) -> RunResult:
    """Integrate to ``t_end`` and check the hard invariants after every step.

    With ``n_steps`` the step is the fixed ``t_end / n_steps`` (it must
    satisfy the stability limit); otherwise the acoustic limit is used.
    A diagnostics record is produced at ``t = 0``, every
    ``output_interval`` and at ``t_end``.
    """
    R = state0.r[-1] if R is None else R
    traj = Trajectory.start(state0, params)
    E0 = energy(state0, params)
    energies = [E0]
    dissipation = []
    records: list[DiagnosticsRecord] = []
    result = RunResult(traj, records, np.array([]), np.array([]))

    def record(state: LagrangianState, k: int) -> None:
        rec = diagnostics(state, params, R=R)
        if monitor_representation:
            rep = verify_representation(traj, k, is_index=True)
            rec.repr_residual = max(rep.factorization_residual, rep.closed_form_residual)
            if rec.repr_residual > REPR_TOL:
                result.fail("representation", f"residual {rec.repr_residual:.3e} at t={state.t:.6g}")
        if not rec.sharp_ok:
            result.fail("sharp_bound", f"gradient bound violated at t={state.t:.6g}")
        records.append(rec)

    record(state0, 0)
    next_out = output_interval if output_interval else np.inf
    fixed_dt = t_end / n_steps if n_steps else None
    state = state0
    k = 0
    while state.t < t_end * (1 - 1e-14):
        if fixed_dt is not None:
            dt = min(fixed_dt, t_end - state.t)
        else:
            dt = min(stable_dt(state, params, cfl), t_end - state.t)
        try:
            new = step(state, params, dt, splitting=splitting, cfl=cfl, check_stability=fixed_dt is None)
        except SolverError as exc:
            result.fail("solver", str(exc))
            break
        k += 1
        traj.append(new)
        E = energy(new, params)
        dissipation.append(viscous_dissipation(state, new, params, midpoint=splitting == "strang"))
        if E - energies[-1] > ENERGY_STEP_TOL * E0:
            result.fail("energy", f"energy rose by {E - energies[-1]:.3e} at t={new.t:.6g}")
        energies.append(E)

        vol = verify_volume_constraint(new, R, VOLUME_TOL)
        if not vol.satisfied:
            result.fail("volume", f"relative error {vol.rel_error:.3e} at t={new.t:.6g}")
        if geometric_defect(new) > GEOMETRY_TOL:
            result.fail("geometry", f"defect {geometric_defect(new):.3e} at t={new.t:.6g}")
        if abs(new.r[-1] - R) > WALL_TOL * R:
            result.fail("wall", f"|r_J - R| = {abs(new.r[-1] - R):.3e} at t={new.t:.6g}")
        state = new

        done = state.t >= t_end * (1 - 1e-14)
        if state.t >= next_out * (1 - 1e-12) or done:
            record(state, k)
            while next_out <= state.t * (1 + 1e-12):
                next_out += output_interval if output_interval else np.inf
    result.energies = np.array(energies)
    result.dissipation = np.array(dissipation)
    log.debug("run finished at t=%g after %d steps", state.t, k)
    return result


# -- refinement ----------------------------------------------------------

def restrict_cells(fine: np.ndarray, factor: int) -> np.ndarray:
    """Average groups of ``factor`` cells (equal masses)."""
    return fine.reshape(-1, factor).mean(axis=1)


def restrict_nodes(fine: np.ndarray, factor: int) -> np.ndarray:
    return fine[::factor]


def l2_mass(diff: np.ndarray, dm: float) -> float:
    return float(np.sqrt(np.sum(diff**2) * dm))


@dataclass
class ConvergenceStudy:
    """``err_*``: successive differences; ``ref_*``: distance to the finest run."""

    J: list[int]
    n_steps: list[int]
    err_v: list[float]
    err_u: list[float]
    ref_v: list[float] = field(default_factory=list)
    ref_u: list[float] = field(default_factory=list)

    @property
    def order_v(self) -> float:
        return float(np.log2(self.err_v[0] / self.err_v[1]))

    @property
    def order_u(self) -> float:
        return float(np.log2(self.err_u[0] / self.err_u[1]))

    @property
    def ref_order_v(self) -> float:
        return float(np.log2(self.ref_v[0] / self.ref_v[1]))

    @property
    def ref_order_u(self) -> float:
        return float(np.log2(self.ref_u[0] / self.ref_u[1]))

    def table(self) -> list[tuple]:
        rows = []
        for i in range(len(self.err_v)):
            rows.append((self.J[i], self.n_steps[i], self.err_v[i], self.err_u[i]))
        return rows


def self_convergence(
    rho0,
    u0,
    R: float,
    N: int,
    params: GasParams,
    J: int,
    t_end: float,
    *,
    cfl: float = DEFAULT_CFL,
    splitting: str = "lie",
    levels: int = 3,
) -> ConvergenceStudy:
    """Runs at ``(J, dt), (2J, dt/2), ..., (2^(levels-1) J, ...)``.

    Successive differences and distances to the finest run, restricted to
    the coarser mass grid, are measured in ``L^2(dy)``; orders are
    ``log2(e_0 / e_1)``.
    """
    base = init(rho0, u0, R, N, params, J)
    # 10% below the coarse acoustic limit; cells halve with each level, so n doubles
    n0 = max(1, int(np.ceil(t_end / (0.9 * stable_dt(base, params, cfl)))))
    sols = []
    Js, ns = [], []
    for lvl in range(levels):
        Jl = J * 2**lvl
        nl = n0 * 2**lvl
        s0 = init(rho0, u0, R, N, params, Jl)
        res = run(s0, params, t_end, n_steps=nl, splitting=splitting, monitor_representation=False)
        if not res.ok:
            raise SolverError(f"refinement level {lvl} failed: {res.failures}")
        sols.append(res.traj.final)
        Js.append(Jl)
        ns.append(nl)
    err_v, err_u, ref_v, ref_u = [], [], [], []
    finest = sols[-1]
    for lvl in range(levels - 1):
        c, f = sols[lvl], sols[lvl + 1]
        err_v.append(l2_mass(c.v - restrict_cells(f.v, 2), c.dm))
        err_u.append(l2_mass(c.u - restrict_nodes(f.u, 2), c.dm))
        k = 2 ** (levels - 1 - lvl)
        ref_v.append(l2_mass(c.v - restrict_cells(finest.v, k), c.dm))
        ref_u.append(l2_mass(c.u - restrict_nodes(finest.u, k), c.dm))
    return ConvergenceStudy(Js, ns, err_v, err_u, ref_v, ref_u)
