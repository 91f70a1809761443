"""Gradient bounds for radially symmetric vector fields.

For ``U = u(r) x/r`` the Jacobian is ``u_r P + (u/r)(I - P)`` with ``P`` the
radial projector, so its spectral norm at a point is ``max(|u_r|, |u/r|)``.
The checks below compare that norm with the divergence, both in ``L^inf``
and pointwise against ``L^p`` norms of the divergence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .radial import (
    RadialGrid,
    RadialProfile,
    lp_norm,
    over_r,
    radial_derivative,
)

ATOL = 1e-9
RTOL = 1e-7


@dataclass(frozen=True)
class EstimateReport:
    lhs: float
    rhs: float
    margin: float
    satisfied: bool
    witness_radius: float

    @property
    def ratio(self) -> float:
        if self.rhs == 0.0:
            return 0.0 if self.lhs == 0.0 else np.inf
        return self.lhs / self.rhs


def _tolerance(lhs, rhs):
    return ATOL + RTOL * np.maximum(np.abs(lhs), np.abs(rhs))


def _report(lhs: np.ndarray, rhs: np.ndarray, radii: np.ndarray) -> EstimateReport:
    """Collapse nodewise ``lhs <= rhs`` checks into the node closest to failing."""
    lhs = np.atleast_1d(np.asarray(lhs, dtype=float))
    rhs = np.atleast_1d(np.asarray(rhs, dtype=float))
    slack = rhs - lhs + _tolerance(lhs, rhs)
    k = int(np.argmin(slack))
    return EstimateReport(
        lhs=float(lhs[k]),
        rhs=float(rhs[k]),
        margin=float(rhs[k] - lhs[k]),
        satisfied=bool(slack[k] >= 0.0),
        witness_radius=float(np.atleast_1d(radii)[k]),
    )


def gradient_eigenvalues(u: RadialProfile) -> tuple[np.ndarray, np.ndarray]:
    """Nodewise ``(u_r, u/r)``: the radial and tangential eigenvalues of grad U."""
    du = radial_derivative(u)
    return du, over_r(u, du)


def gradient_sup_norm(u: RadialProfile) -> float:
    du, ur = gradient_eigenvalues(u)
    return float(np.max(np.maximum(np.abs(du), np.abs(ur))))


def verify_linfty_bounds(u: RadialProfile) -> tuple[EstimateReport, EstimateReport]:
    """Check ``|div U|_inf / N <= |grad U|_inf <= (2 + 1/N) |div U|_inf``.

    Returns ``(lower, upper)``; each report is phrased as ``lhs <= rhs``.
    """
    N = u.grid.N
    du, ur = gradient_eigenvalues(u)
    F = du + (N - 1) * ur
    grad_pt = np.maximum(np.abs(du), np.abs(ur))
    grad_sup = float(np.max(grad_pt))
    div_sup = float(np.max(np.abs(F)))
    r = u.r
    lower = EstimateReport(
        lhs=div_sup / N,
        rhs=grad_sup,
        margin=grad_sup - div_sup / N,
        satisfied=bool(grad_sup - div_sup / N >= -_tolerance(div_sup / N, grad_sup)),
        witness_radius=float(r[int(np.argmax(np.abs(F)))]),
    )
    c_up = 2.0 + 1.0 / N
    upper = EstimateReport(
        lhs=grad_sup,
        rhs=c_up * div_sup,
        margin=c_up * div_sup - grad_sup,
        satisfied=bool(c_up * div_sup - grad_sup >= -_tolerance(grad_sup, c_up * div_sup)),
        witness_radius=float(r[int(np.argmax(grad_pt))]),
    )
    return lower, upper


def pointwise_lp_bound(u: RadialProfile, p: float) -> tuple[EstimateReport, EstimateReport]:
    """Pointwise bounds on ``|u/r|`` and ``|u_r|`` by ``|div U|_{L^p}``, r > 0.

    ``p = inf`` is delegated to :func:`verify_linfty_bounds`.
    """
    if np.isinf(p):
        return verify_linfty_bounds(u)
    if p < 1:
        raise ValueError(f"exponent p must be >= 1, got {p}")
    N = u.grid.N
    du, ur = gradient_eigenvalues(u)
    F_norm = lp_norm(u.with_values(du + (N - 1) * ur), p)
    r = u.r[1:]
    k = (1.0 / N) ** (1.0 - 1.0 / p) * r ** (-N / p) * u.grid.omega ** (-1.0 / p)
    over = _report(np.abs(ur[1:]), k * F_norm, r)
    radial = _report(np.abs(du[1:]), (1.0 + (N - 1) * k) * F_norm, r)
    return over, radial


def reconstruct_u_from_div(F: RadialProfile) -> RadialProfile:
    """Invert the divergence: ``u(r) = r^(1-N) int_0^r s^(N-1) F ds``, ``u(0)=0``.

    The moment is the exact antiderivative of the cubic spline through
    ``r^(N-1) F``, which matches the spline derivative used by the divergence.
    """
    N = F.grid.N
    r = F.r
    m = CubicSpline(r, r ** (N - 1) * F.values).antiderivative()(r)
    u = np.zeros_like(m)
    u[1:] = m[1:] / F.r[1:] ** (N - 1)
    return F.with_values(u)


def random_profiles(
    count: int,
    grid: RadialGrid,
    seed: int = 0,
    max_modes: int = 5,
) -> list[RadialProfile]:
    """Seeded smooth profiles with ``u(0) = u(R) = 0``.

    Each profile sums up to ``max_modes`` terms, either ``sin(k pi r/R)`` or
    ``(r/R)^j (1 - r/R)``, with normal random amplitudes.
    """
    rng = np.random.default_rng(seed)
    x = grid.nodes / grid.R
    out = []
    for _ in range(count):
        n_modes = int(rng.integers(1, max_modes + 1))
        vals = np.zeros_like(x)
        for _ in range(n_modes):
            amp = rng.normal()
            if rng.random() < 0.5:
                vals += amp * np.sin(int(rng.integers(1, 6)) * np.pi * x)
            else:
                vals += amp * x ** int(rng.integers(1, 5)) * (1.0 - x)
        vals[0] = 0.0
        vals[-1] = 0.0
        out.append(RadialProfile(grid, vals))
    return out


def corpus_summary(profiles, ps=(2.0, 6.0)) -> dict:
    """Run every check over a corpus; returns failure counts and extreme ratios.

    ``lp_over_r_failures`` and ``lp_radial_failures`` count profiles failing
    the ``|u/r|`` and the ``|u_r|`` line of the pointwise bound for some ``p``.
    """
    ratios = []
    linf_fail = lp_a_fail = lp_b_fail = 0
    for u in profiles:
        lower, upper = verify_linfty_bounds(u)
        linf_fail += not (lower.satisfied and upper.satisfied)
        div_sup = lower.lhs * u.grid.N
        if div_sup > 0:
            ratios.append(upper.lhs / div_sup)
        reports = [pointwise_lp_bound(u, p) for p in ps]
        lp_a_fail += not all(a.satisfied for a, _ in reports)
        lp_b_fail += not all(b.satisfied for _, b in reports)
    return {
        "count": len(profiles),
        "linf_failures": linf_fail,
        "lp_over_r_failures": lp_a_fail,
        "lp_radial_failures": lp_b_fail,
        "linf_ok": linf_fail == 0,
        "lp_ok": lp_a_fail == 0 and lp_b_fail == 0,
        "min_ratio": float(min(ratios)) if ratios else float("nan"),
        "max_ratio": float(max(ratios)) if ratios else float("nan"),
    }
