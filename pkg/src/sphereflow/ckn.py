"""Caffarelli-Kohn-Nirenberg weighted interpolation inequality.

    || |x|^gamma u ||_{L^r} <= C || |x|^alpha Du ||_{L^p}^a  || |x|^beta u ||_{L^q}^{1-a}

``feasibility`` checks the exponent relations under which a finite ``C``
exists (any dimension).  ``empirical_ratio`` and ``sup_ratio_over_corpus``
estimate ``C`` from below on the half line ``(0, L]`` (``n = 1`` only).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EQ_TOL = 1e-12

BALANCE = "balance"
SIGMA_LOW = "sigma_low"
SIGMA_HIGH = "sigma_high"
CONSTRAINTS = "constraints"
CONDITIONS = (BALANCE, SIGMA_LOW, SIGMA_HIGH, CONSTRAINTS)


@dataclass(frozen=True)
class CknParams:
    n: int
    p: float
    q: float
    r: float
    a: float
    alpha: float
    beta: float
    sigma: float
    gamma: float

    def __post_init__(self):
        vals = (self.p, self.q, self.r, self.a, self.alpha, self.beta, self.sigma, self.gamma)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("CKN exponents must be finite")

    @classmethod
    def density_instance(cls) -> "CknParams":
        """Exponents used for the ``L^6`` bound on the effective flux (n = 1)."""
        return cls(n=1, p=2, q=2, r=6, a=2 / 3, alpha=1, beta=1, sigma=1 / 2, gamma=2 / 3)


@dataclass(frozen=True)
class FeasibilityVerdict:
    violated_conditions: tuple[str, ...] = field(default_factory=tuple)

    @property
    def feasible(self) -> bool:
        return not self.violated_conditions

    def __str__(self):
        if self.feasible:
            return "feasible"
        return "infeasible: " + ", ".join(self.violated_conditions)


def _close(x: float, y: float) -> bool:
    return abs(x - y) <= EQ_TOL * max(1.0, abs(x), abs(y))


def feasibility(params: CknParams) -> FeasibilityVerdict:
    P = params
    grad_level = 1 / P.p + (P.alpha - 1) / P.n
    base_level = 1 / P.q + P.beta / P.n
    target_level = 1 / P.r + P.gamma / P.n if P.r > 0 else np.inf

    violated = []
    if not (P.r > 0 and _close(target_level, P.a * grad_level + (1 - P.a) * base_level)):
        violated.append(BALANCE)
    gap = P.alpha - P.sigma
    if P.a > 0 and gap < -EQ_TOL:
        violated.append(SIGMA_LOW)
    if P.a > 0 and P.r > 0 and _close(grad_level, target_level) and gap > 1 + EQ_TOL:
        violated.append(SIGMA_HIGH)

    constraints_ok = (
        P.n >= 1
        and P.p >= 1
        and P.q >= 1
        and P.r > 0
        and 0 <= P.a <= 1
        and grad_level > 0
        and base_level > 0
        and target_level > 0
        and _close(P.gamma, P.a * P.sigma + (1 - P.a) * P.beta)
    )
    if not constraints_ok:
        violated.append(CONSTRAINTS)
    return FeasibilityVerdict(tuple(violated))


class UndefinedRatioError(ValueError):
    """The right-hand side of the inequality vanishes for this test function."""


def _derivative(u: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order central differences; second order in the two end cells."""
    du = np.gradient(u, h, edge_order=2)
    du[2:-2] = (u[:-4] - 8 * u[1:-3] + 8 * u[3:-1] - u[4:]) / (12 * h)
    return du


def _weighted_norm(x, w_exp, f, p, h):
    # Trapezoid on a uniform grid; test functions vanish near both ends.
    return (h * np.sum(x**w_exp * np.abs(f) ** p)) ** (1.0 / p)


def half_line_grid(L: float, M: int) -> np.ndarray:
    """``M`` uniform points ``L/M, 2L/M, ..., L`` covering ``(0, L]``."""
    return L * np.arange(1, M + 1) / M


def empirical_ratio(
    params: CknParams,
    x: np.ndarray,
    u: np.ndarray,
    du: np.ndarray | None = None,
    support_tol: float = 1e-8,
) -> float:
    """LHS / RHS of the inequality for one test function on a uniform grid."""
    if params.n != 1:
        raise ValueError("empirical ratios are implemented for n = 1 only")
    verdict = feasibility(params)
    if not verdict.feasible:
        raise ValueError(f"infeasible exponents ({verdict})")
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    h = x[1] - x[0]
    if not np.allclose(np.diff(x), h, rtol=1e-9, atol=0.0) or x[0] <= 0:
        raise ValueError("grid must be uniform on (0, L]")
    peak = np.max(np.abs(u))
    if peak == 0.0:
        raise UndefinedRatioError("test function is identically zero")
    edge = max(2, x.size // 100)
    if max(np.max(np.abs(u[:edge])), np.max(np.abs(u[-edge:]))) > support_tol * peak:
        raise ValueError("test function must vanish near both ends of the grid")
    if du is None:
        du = _derivative(u, h)

    P = params
    lhs = _weighted_norm(x, P.gamma * P.r, u, P.r, h)
    grad = _weighted_norm(x, P.alpha * P.p, du, P.p, h)
    base = _weighted_norm(x, P.beta * P.q, u, P.q, h)
    rhs = (grad**P.a if P.a > 0 else 1.0) * (base ** (1 - P.a) if P.a < 1 else 1.0)
    if rhs == 0.0:
        raise UndefinedRatioError("right-hand side vanishes")
    return float(lhs / rhs)


def sup_ratio_over_corpus(params: CknParams, x: np.ndarray, corpus) -> float:
    """Largest ratio over the corpus: a lower estimate of the best constant.

    ``corpus`` is an iterable of callables ``f(x)`` or of sampled arrays.
    Members with an undefined ratio are skipped.
    """
    best = -np.inf
    n_ok = 0
    for member in corpus:
        u = member(x) if callable(member) else member
        try:
            ratio = empirical_ratio(params, x, u)
        except UndefinedRatioError:
            continue
        best = max(best, ratio)
        n_ok += 1
    if n_ok == 0:
        raise UndefinedRatioError("every corpus member has an undefined ratio")
    return float(best)


def gaussian_bump(center: float = 1.0, sharpness: float = 50.0):
    return lambda x: np.exp(-sharpness * (x - center) ** 2)


def dilate(fn, lam: float):
    """``x -> fn(lam * x)``."""
    return lambda x: fn(lam * x)


def random_corpus(count: int, seed: int = 0, L: float = 2.0) -> list:
    """Seeded test functions: sums of Gaussian bumps times low-degree polynomials.

    Bumps are centered in the middle half of ``(0, L]`` and narrow enough
    to vanish (below 1e-8 relative) near both ends.
    """
    rng = np.random.default_rng(seed)
    corpus = []
    for _ in range(count):
        terms = []
        for _ in range(int(rng.integers(1, 4))):
            c = rng.uniform(0.3 * L, 0.7 * L)
            w = rng.uniform(0.025, 0.045) * L
            deg = int(rng.integers(0, 3))
            coef = rng.normal(size=deg + 1)
            terms.append((c, w, coef))

        def member(x, terms=tuple(terms)):
            out = np.zeros_like(x, dtype=float)
            for c, w, coef in terms:
                s = (x - c) / w
                out += np.polynomial.polynomial.polyval(s, coef) * np.exp(-0.5 * s**2)
            return out

        corpus.append(member)
    return corpus


def single_condition_violations(count: int, seed: int = 0) -> list[tuple[CknParams, str]]:
    """Seeded exponent sets that each break exactly one condition.

    Cycles through the four condition tags; the returned tag is the one
    the set was built to violate.
    """
    rng = np.random.default_rng(seed)
    base = CknParams.density_instance()
    out = []
    for i in range(count):
        tag = CONDITIONS[i % len(CONDITIONS)]
        eps = float(rng.uniform(0.05, 0.5))
        if tag == BALANCE:
            P = CknParams(**{**base.__dict__, "r": base.r * (1 + eps)})
        elif tag == CONSTRAINTS:
            # sigma only enters gamma = a sigma + (1-a) beta and alpha - sigma >= 0
            P = CknParams(**{**base.__dict__, "sigma": base.sigma - eps})
        elif tag == SIGMA_LOW:
            # n=1, a=1/2, p=q=1, beta=1: balance forces r = 2/(1-eps)
            sigma = 1 + eps
            P = CknParams(
                n=1, p=1, q=1, r=2 / (1 - eps), a=0.5, alpha=1.0, beta=1.0,
                sigma=sigma, gamma=0.5 * sigma + 0.5,
            )
        else:
            # a=1 puts the balance on the equality branch; alpha - sigma = 1 + eps
            sigma = 1 - eps
            P = CknParams(
                n=1, p=2, q=2, r=1 / (0.5 + eps), a=1.0, alpha=2.0, beta=0.0,
                sigma=sigma, gamma=sigma,
            )
        out.append((P, tag))
    return out
