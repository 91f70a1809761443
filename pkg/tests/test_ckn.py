import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sphereflow import ckn
from sphereflow.ckn import CknParams, feasibility

INSTANCE = CknParams.density_instance()
X = ckn.half_line_grid(2.0, 4000)


def test_density_instance_feasible():
    v = feasibility(INSTANCE)
    assert v.feasible
    assert str(v) == "feasible"


def test_gamma_one_breaks_balance():
    P = CknParams(**{**INSTANCE.__dict__, "gamma": 1.0})
    v = feasibility(P)
    assert ckn.BALANCE in v.violated_conditions
    # 1/r + gamma/n = 7/6 against the required 5/6
    assert 1 / 6 + 1 == pytest.approx(7 / 6)
    assert not v.feasible


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(1, 4),
    q=st.floats(1, 8),
    beta=st.floats(0, 2),
    offset=st.floats(0.01, 2),
)
def test_a_zero_identity_case_feasible(n, q, beta, offset):
    # valid alpha keeps 1/p + (alpha - 1)/n positive
    alpha = 1 - n / 2 + offset
    P = CknParams(n=n, p=2, q=q, r=q, a=0.0, alpha=alpha, beta=beta, sigma=alpha, gamma=beta)
    assert feasibility(P).feasible


def test_single_condition_violations_tagged():
    cases = ckn.single_condition_violations(50, seed=0)
    assert len(cases) == 50
    for P, tag in cases:
        assert feasibility(P).violated_conditions == (tag,)


def test_gaussian_ratio_regression():
    u = ckn.gaussian_bump()(X)
    assert ckn.empirical_ratio(INSTANCE, X, u) == pytest.approx(0.4391329753, rel=1e-8)


def test_ratio_dilation_invariant():
    g = ckn.gaussian_bump()
    r1 = ckn.empirical_ratio(INSTANCE, X, g(X))
    r2 = ckn.empirical_ratio(INSTANCE, X, ckn.dilate(g, 2.0)(X))
    assert r2 == pytest.approx(r1, rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(c=st.floats(1e-3, 1e3))
def test_ratio_homogeneous(c):
    u = ckn.gaussian_bump()(X)
    assert ckn.empirical_ratio(INSTANCE, X, c * u) == pytest.approx(ckn.empirical_ratio(INSTANCE, X, u), rel=1e-10)


def test_ratio_with_analytic_derivative():
    u = ckn.gaussian_bump()(X)
    du = -100 * (X - 1) * u
    assert ckn.empirical_ratio(INSTANCE, X, u, du=du) == pytest.approx(
        ckn.empirical_ratio(INSTANCE, X, u), rel=1e-8
    )


def test_ratio_errors():
    with pytest.raises(ckn.UndefinedRatioError):
        ckn.empirical_ratio(INSTANCE, X, np.zeros_like(X))
    with pytest.raises(ValueError):
        ckn.empirical_ratio(INSTANCE, X, np.exp(-X))  # does not vanish at 0
    with pytest.raises(ValueError):
        ckn.empirical_ratio(CknParams(**{**INSTANCE.__dict__, "gamma": 1.0}), X, ckn.gaussian_bump()(X))
    with pytest.raises(ValueError):
        ckn.empirical_ratio(CknParams(**{**INSTANCE.__dict__, "n": 2}), X, ckn.gaussian_bump()(X))


def test_sup_over_singleton_is_member_ratio():
    g = ckn.gaussian_bump()
    assert ckn.sup_ratio_over_corpus(INSTANCE, X, [g]) == ckn.empirical_ratio(INSTANCE, X, g(X))


def test_sup_ratio_unchanged_by_dilates():
    corpus = ckn.random_corpus(20, seed=5)
    dilates = [ckn.dilate(f, 1.5) for f in corpus]
    # dilated members live on (0, L/1.5]; keep them away from the grid ends
    kept = [d for d in dilates if np.max(np.abs(d(X)[-40:])) < 1e-8 * np.max(np.abs(d(X)))]
    a = ckn.sup_ratio_over_corpus(INSTANCE, X, corpus)
    b = ckn.sup_ratio_over_corpus(INSTANCE, X, corpus + kept)
    assert b == pytest.approx(a, rel=1e-4)


def test_sup_ratio_all_undefined():
    with pytest.raises(ckn.UndefinedRatioError):
        ckn.sup_ratio_over_corpus(INSTANCE, X, [np.zeros_like(X)])
