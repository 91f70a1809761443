import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sphereflow.radial import RadialGrid, RadialProfile, divergence
from sphereflow.sharp import (
    corpus_summary,
    gradient_sup_norm,
    pointwise_lp_bound,
    random_profiles,
    reconstruct_u_from_div,
    verify_linfty_bounds,
)


def test_identity_field_gradient():
    g = RadialGrid.uniform(64, 1.0, 3)
    assert gradient_sup_norm(g.sample(lambda r: r)) == pytest.approx(1.0, abs=1e-13)


def test_zero_field_gradient():
    g = RadialGrid.uniform(64, 1.0, 3)
    assert gradient_sup_norm(g.sample(lambda r: 0 * r)) == 0.0


def test_gradient_against_dense_sampling():
    g = RadialGrid.uniform(256, 1.0, 3)
    got = gradient_sup_norm(g.sample(lambda r: r * (1 - r)))
    r = np.linspace(1e-9, 1, 200001)
    oracle = np.max(np.maximum(np.abs(1 - 2 * r), np.abs(1 - r)))
    assert got == pytest.approx(oracle, abs=1e-9)


@pytest.mark.parametrize("N", [2, 3])
def test_lower_bound_attained_by_identity(N):
    g = RadialGrid.uniform(64, 2.0, N)
    lower, upper = verify_linfty_bounds(g.sample(lambda r: r))
    assert lower.ratio == pytest.approx(1.0, abs=1e-12)
    assert lower.satisfied and upper.satisfied


def test_zero_field_bounds_trivial():
    g = RadialGrid.uniform(32, 1.0, 2)
    for rep in verify_linfty_bounds(g.sample(lambda r: 0 * r)) + pointwise_lp_bound(g.sample(lambda r: 0 * r), 2):
        assert rep.satisfied and rep.lhs == 0 and rep.rhs == 0


@pytest.mark.parametrize("N", [2, 3])
@pytest.mark.parametrize("p", [2.0, 6.0])
def test_pointwise_equality_case(N, p):
    R = 1.3
    g = RadialGrid.uniform(64, R, N)
    over, _ = pointwise_lp_bound(g.sample(lambda r: r), p)
    # |u/r| = 1 everywhere; the bound is tight at the wall
    assert over.witness_radius == pytest.approx(R)
    assert over.rhs == pytest.approx(1.0, abs=1e-9)


def test_pointwise_bound_inf_delegates():
    g = RadialGrid.uniform(64, 1.0, 3)
    u = g.sample(lambda r: np.sin(np.pi * r))
    assert pointwise_lp_bound(u, np.inf) == verify_linfty_bounds(u)


def test_radial_line_counterexample():
    # u = r^m (1 - r), N = 2, p = 2: u_r(1) = -1 exceeds the claimed bound
    g = RadialGrid.uniform(4096, 1.0, 2)
    _, radial = pointwise_lp_bound(g.sample(lambda r: r**32 * (1 - r)), 2)
    assert not radial.satisfied
    assert radial.witness_radius == pytest.approx(1.0)


class TestReconstruction:
    def test_constant_divergence(self):
        g = RadialGrid.uniform(64, 1.0, 3)
        u = reconstruct_u_from_div(g.sample(lambda r: 3 + 0 * r))
        assert np.allclose(u.values, g.nodes, atol=1e-14)

    def test_zero(self):
        g = RadialGrid.uniform(64, 1.0, 3)
        assert np.all(reconstruct_u_from_div(g.sample(lambda r: 0 * r)).values == 0)

    @pytest.mark.parametrize("N", [2, 3])
    def test_round_trip_at_least_second_order(self, N):
        errs = []
        for K in (64, 128, 256):
            g = RadialGrid.uniform(K, 1.0, N)
            u = g.sample(lambda r: np.sin(np.pi * r) * r)
            back = reconstruct_u_from_div(divergence(u))
            errs.append(np.max(np.abs(back.values - u.values)))
        assert np.log2(errs[0] / errs[1]) >= 2
        assert np.log2(errs[1] / errs[2]) >= 2


@settings(max_examples=40, deadline=None)
@given(
    coeffs=st.lists(st.floats(-5, 5), min_size=1, max_size=5),
    N=st.sampled_from([2, 3]),
    R=st.floats(0.2, 5.0),
)
def test_linfty_bounds_hold_for_polynomial_fields(coeffs, N, R):
    g = RadialGrid.uniform(128, R, N)
    x = g.nodes / R
    vals = sum(c * x ** (k + 1) for k, c in enumerate(coeffs)) * (1 - x)
    lower, upper = verify_linfty_bounds(RadialProfile(g, vals))
    assert lower.satisfied and upper.satisfied


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), N=st.sampled_from([2, 3]))
def test_over_r_line_holds(seed, N):
    g = RadialGrid.uniform(128, 1.0, N)
    (u,) = random_profiles(1, g, seed=seed)
    for p in (2.0, 6.0):
        over, _ = pointwise_lp_bound(u, p)
        assert over.satisfied


def test_random_profiles_deterministic():
    g = RadialGrid.uniform(64, 1.0, 3)
    a = random_profiles(5, g, seed=7)
    b = random_profiles(5, g, seed=7)
    assert all(np.array_equal(x.values, y.values) for x, y in zip(a, b))
    assert all(x.values[0] == 0 and x.values[-1] == 0 for x in a)


def test_corpus_summary_ratio_window():
    g = RadialGrid.uniform(128, 1.0, 3)
    s = corpus_summary(random_profiles(100, g, seed=3))
    assert s["linf_failures"] == 0
    assert 1 / 3 - 1e-12 <= s["min_ratio"] <= s["max_ratio"] <= 2 + 1 / 3


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**31), c=st.floats(1e-3, 1e3), sign=st.sampled_from([-1, 1]))
def test_ratios_scale_invariant(seed, c, sign):
    g = RadialGrid.uniform(64, 1.0, 3)
    (u,) = random_profiles(1, g, seed=seed)
    cu = u * (sign * c)
    for a, b in zip(verify_linfty_bounds(u) + pointwise_lp_bound(u, 2), verify_linfty_bounds(cu) + pointwise_lp_bound(cu, 2)):
        assert b.ratio == pytest.approx(a.ratio, rel=1e-12)
