"""Density representation along a computed trajectory.

Integrating ``kappa (log rho)_ty`` over ``(0,t) x (0,y)`` gives

    rho(t,y)/rho(t,0) = rho0(y)/rho0(0) * Psi1 * Psi2 * Psi3

with

    Psi1 = exp( int_0^y [(r^(1-N) u)(0,z) - (r^(1-N) u)(t,z)] dz / kappa )
    Psi2 = exp( int_0^t [p(s,0) - p(s,y)] ds / kappa )
    Psi3 = exp( -int_0^t int_0^y (N-1) u^2 / r^N dz ds / kappa ),

and, eliminating the pressure integral,

    rho = P U / (1 + (a gamma/kappa) int_0^t (P U)^gamma ds)^(1/gamma),
    P(t) = rho(t,0)/rho0(0) exp(int_0^t p(s,0) ds / kappa),  U = rho0 Psi1 Psi3.

The "center" ``y = 0`` is the first cell, so every ``y``-integral runs over
the nodes ``1..k`` between cell centers and never touches ``r = 0``.  Time
integrals are trapezoid sums accumulated step by step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .solver import (
    GasParams,
    LagrangianState,
    cell_divergence,
    effective_flux,
    energy,
)
from .radial import omega

__all__ = [
    "Trajectory",
    "PsiFactors",
    "effective_flux",
    "psi_factors",
    "verify_representation",
    "verify_volume_constraint",
    "density_bound_monitor",
    "pressure_l6_monitor",
]


def _inv_weight_u(state: LagrangianState) -> np.ndarray:
    """``r^(1-N) u`` at the nodes (0 at the center, where it is never used)."""
    out = np.zeros_like(state.u)
    out[1:] = state.u[1:] / state.r[1:] ** (state.N - 1)
    return out


def _centrifugal(state: LagrangianState) -> np.ndarray:
    out = np.zeros_like(state.u)
    out[1:] = (state.N - 1) * state.u[1:] ** 2 / state.r[1:] ** state.N
    return out


def _prefix_over_nodes(node_vals: np.ndarray, dm: float) -> np.ndarray:
    """``sum_{j=1..k} node_vals[j] dm`` for each cell ``k = 0..J-1``."""
    out = np.zeros(node_vals.shape[:-1] + (node_vals.shape[-1] - 1,))
    out[..., 1:] = np.cumsum(node_vals[..., 1:-1], axis=-1) * dm
    return out


@dataclass
class Trajectory:
    """Time-ordered states plus the running time integrals.

    Accumulators are stored after every step, so any recorded time can
    be queried.  Per recorded step ``k``:

    * ``int_p[k]``     ``int_0^t p ds`` per cell
    * ``int_cf[k]``    ``int_0^t (N-1) u^2/r^N ds`` per node
    * ``int_PU[k]``    ``int_0^t (P U)^gamma ds`` per cell
    * ``sup_U[k]``     ``sup`` of ``U`` over ``[0,t] x [0,M0]``
    """

    params: GasParams
    states: list[LagrangianState] = field(default_factory=list)
    int_p: list[np.ndarray] = field(default_factory=list)
    int_cf: list[np.ndarray] = field(default_factory=list)
    int_PU: list[np.ndarray] = field(default_factory=list)
    sup_U: list[float] = field(default_factory=list)
    inf_U: list[float] = field(default_factory=list)

    @classmethod
    def start(cls, state: LagrangianState, params: GasParams) -> "Trajectory":
        traj = cls(params)
        J = state.J
        traj.states.append(state)
        traj.int_p.append(np.zeros(J))
        traj.int_cf.append(np.zeros(J + 1))
        traj.int_PU.append(np.zeros(J))
        U0 = state.rho
        traj.sup_U.append(float(np.max(U0)))
        traj.inf_U.append(float(np.min(U0)))
        traj._last_PU = U0.copy()
        return traj

    def __len__(self):
        return len(self.states)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.states])

    @property
    def initial(self) -> LagrangianState:
        return self.states[0]

    @property
    def final(self) -> LagrangianState:
        return self.states[-1]

    def append(self, state: LagrangianState) -> None:
        prev = self.states[-1]
        dt = state.t - prev.t
        if not dt > 0:
            raise ValueError("trajectory times must increase strictly")
        P = self.params
        self.states.append(state)
        self.int_p.append(self.int_p[-1] + 0.5 * dt * (P.pressure(prev.v) + P.pressure(state.v)))
        self.int_cf.append(self.int_cf[-1] + 0.5 * dt * (_centrifugal(prev) + _centrifugal(state)))
        k = len(self.states) - 1
        PU = self._PU(k)
        g = P.gamma
        self.int_PU.append(self.int_PU[-1] + 0.5 * dt * (self._last_PU**g + PU**g))
        self._last_PU = PU
        U = self._U(k)
        self.sup_U.append(max(self.sup_U[-1], float(np.max(U))))
        self.inf_U.append(min(self.inf_U[-1], float(np.min(U))))

    def index(self, t: float | int, *, is_index: bool = False) -> int:
        """Index of the recorded time ``t`` (or ``t`` itself if ``is_index``)."""
        n = len(self.states)
        if is_index or isinstance(t, (int, np.integer)) and not isinstance(t, bool):
            k = int(t)
            if not -n <= k < n:
                raise IndexError(f"step {k} outside trajectory of {n} states")
            return k % n
        times = self.times
        k = int(np.argmin(np.abs(times - t)))
        if abs(times[k] - t) > 1e-12 * max(1.0, abs(t)):
            raise ValueError(f"t={t} is not a recorded time (range {times[0]}..{times[-1]})")
        return k

    # factor pieces, vectorised over cells
    def _log_psi(self, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        kappa = self.params.kappa
        s0, s = self.states[0], self.states[k]
        dm = s.dm
        log1 = _prefix_over_nodes(_inv_weight_u(s0) - _inv_weight_u(s), dm) / kappa
        Ip = self.int_p[k]
        log2 = (Ip[0] - Ip) / kappa
        log3 = -_prefix_over_nodes(self.int_cf[k], dm) / kappa
        return log1, log2, log3

    def _P(self, k: int) -> float:
        s0, s = self.states[0], self.states[k]
        return float(s.rho[0] / s0.rho[0] * np.exp(self.int_p[k][0] / self.params.kappa))

    def _U(self, k: int) -> np.ndarray:
        log1, _, log3 = self._log_psi(k)
        return self.states[0].rho * np.exp(log1 + log3)

    def _PU(self, k: int) -> np.ndarray:
        return self._P(k) * self._U(k)

    def reintegrate(self) -> dict[str, np.ndarray]:
        """Final accumulators recomputed from the stored states in one pass."""
        P = self.params
        t = self.times
        press = np.array([P.pressure(s.v) for s in self.states])
        cf = np.array([_centrifugal(s) for s in self.states])
        PU = np.array([self._PU(k) for k in range(len(self.states))])
        trap = lambda f: np.trapezoid(f, t, axis=0)  # noqa: E731
        return {"int_p": trap(press), "int_cf": trap(cf), "int_PU": trap(PU**P.gamma)}

    def audit(self) -> float:
        """Largest relative gap between running and re-integrated accumulators."""
        fresh = self.reintegrate()
        worst = 0.0
        for name, ref in fresh.items():
            run = getattr(self, name)[-1]
            scale = max(float(np.max(np.abs(ref))), 1e-300)
            worst = max(worst, float(np.max(np.abs(run - ref))) / scale)
        return worst


@dataclass(frozen=True)
class PsiFactors:
    psi1: np.ndarray | float
    psi2: np.ndarray | float
    psi3: np.ndarray | float

    @property
    def product(self):
        return self.psi1 * self.psi2 * self.psi3


def _select(arr, cell):
    return arr if cell is None else float(arr[cell])


def psi_factors(traj: Trajectory, t, cell: int | None = None, *, is_index: bool = False) -> PsiFactors:
    """Three exponential factors at recorded time ``t`` for cell ``cell``.

    ``cell=None`` returns arrays over every cell.
    """
    k = traj.index(t, is_index=is_index)
    if cell is not None and not 0 <= cell < traj.initial.J:
        raise IndexError(f"cell {cell} outside 0..{traj.initial.J - 1}")
    logs = traj._log_psi(k)
    return PsiFactors(*(_select(np.exp(x), cell) for x in logs))


@dataclass(frozen=True)
class RepresentationReport:
    t: float
    P: float
    U: np.ndarray
    rho: np.ndarray
    factorized: np.ndarray
    closed_form: np.ndarray
    factorization_residual: float
    closed_form_residual: float
    forms_gap: float


def verify_representation(traj: Trajectory, t, *, is_index: bool = False) -> RepresentationReport:
    """Compare the solver density with both representation formulas.

    Residuals are max over cells of ``|rho - formula| / rho``.  ``forms_gap``
    compares the two formulas with each other.
    """
    k = traj.index(t, is_index=is_index)
    params = traj.params
    s0, s = traj.initial, traj.states[k]
    psi = psi_factors(traj, k, is_index=True)
    factorized = s.rho[0] / s0.rho[0] * s0.rho * psi.product
    Pk = traj._P(k)
    U = traj._U(k)
    denom = (1.0 + params.a * params.gamma / params.kappa * traj.int_PU[k]) ** (1.0 / params.gamma)
    closed = Pk * U / denom
    rho = s.rho
    return RepresentationReport(
        t=s.t,
        P=Pk,
        U=U,
        rho=rho,
        factorized=factorized,
        closed_form=closed,
        factorization_residual=float(np.max(np.abs(rho - factorized) / rho)),
        closed_form_residual=float(np.max(np.abs(rho - closed) / rho)),
        forms_gap=float(np.max(np.abs(factorized - closed) / factorized)),
    )


@dataclass(frozen=True)
class VolumeReport:
    total: float
    target: float
    rel_error: float
    satisfied: bool


def verify_volume_constraint(state: LagrangianState, R: float | None = None, tol: float = 1e-8) -> VolumeReport:
    """``sum v dm`` against the ball volume ``R^N / N`` (no omega_N)."""
    R = state.r[-1] if R is None else R
    target = R**state.N / state.N
    total = float(np.sum(state.v) * state.dm)
    err = abs(total - target) / target
    return VolumeReport(total, target, err, bool(err <= tol))


@dataclass(frozen=True)
class DensityBoundReport:
    t: float
    rho_max: float
    P: float
    sup_U: float
    bound: float
    satisfied: bool
    gronwall_rhs: float


def density_bound_monitor(traj: Trajectory, t, *, is_index: bool = False, tol: float | None = None) -> DensityBoundReport:
    """``max rho(t,.) <= P(t) sup_{[0,t] x [0,M0]} U``.

    The discrete inequality inherits the representation residual, which is
    used as the tolerance unless ``tol`` is given.  ``gronwall_rhs`` is the
    Gronwall-type bound on ``P(t)`` with every generic constant set to 1.
    """
    k = traj.index(t, is_index=is_index)
    s = traj.states[k]
    params = traj.params
    Pk = traj._P(k)
    supU, infU = traj.sup_U[k], traj.inf_U[k]
    bound = Pk * supU
    if tol is None:
        tol = 1e-12 + 2.0 * verify_representation(traj, k, is_index=True).factorization_residual
    rho_max = float(np.max(s.rho))
    s0 = traj.initial
    E0 = energy(s0, params)
    M0 = s0.M0
    g = params.gamma
    gronwall = (
        (E0 / M0) ** (1.0 / (g - 1.0))
        / infU
        * np.exp(s.t * (supU / infU) ** g)
    )
    return DensityBoundReport(
        t=s.t,
        rho_max=rho_max,
        P=Pk,
        sup_U=supU,
        bound=bound,
        satisfied=bool(rho_max <= bound * (1.0 + tol)),
        gronwall_rhs=float(gronwall),
    )


@dataclass(frozen=True)
class PressureL6Report:
    times: np.ndarray
    l6_pow6: np.ndarray
    majorant: np.ndarray
    constant: float
    satisfied: bool
    transport_residual: float


def _l6_pieces(state: LagrangianState, params: GasParams):
    P = params.pressure(state.v)
    vol = omega(state.N) * state.v * state.dm
    D = cell_divergence(state)
    return (
        float(np.sum(P**6 * vol)),
        float(np.sum(P**6 * np.abs(D) * vol)),
        float(np.sum(P**6 * D * vol)),
        float(np.max(P)) ** 12,
    )


def pressure_l6_monitor(traj: Trajectory, rtol: float = 1e-10) -> PressureL6Report:
    """Track ``||P||_6^6`` against ``||P0||_6^6 + C int ||P||_inf^12 ds``.

    ``C = (6 gamma - 1) max_t int P^6 |div u| dx / ||P||_inf^12`` is the
    measured coupling.  The transport residual is the trapezoid defect of
    ``d/dt int P^6 = -(6 gamma - 1) int P^6 div u`` over the run, relative
    to the largest rate magnitude (0 when the run is static).
    """
    if len(traj) < 2:
        raise ValueError("need a trajectory with at least two states")
    params = traj.params
    k6 = 6.0 * params.gamma - 1.0
    pieces = np.array([_l6_pieces(s, params) for s in traj.states])
    l6, coupling, signed, pinf12 = pieces.T
    t = traj.times
    C = k6 * float(np.max(coupling / pinf12))
    dt = np.diff(t)
    integral = np.concatenate([[0.0], np.cumsum(0.5 * dt * (pinf12[:-1] + pinf12[1:]))])
    majorant = l6[0] + C * integral
    ok = bool(np.all(l6 <= majorant * (1.0 + rtol)))
    rate = np.diff(l6) / dt
    predicted = -k6 * 0.5 * (signed[:-1] + signed[1:])
    scale = float(np.max(np.abs(predicted)))
    resid = float(np.max(np.abs(rate - predicted)) / scale) if scale > 0 else 0.0
    return PressureL6Report(t, l6, majorant, C, ok, resid)
