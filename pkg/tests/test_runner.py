import numpy as np
import pytest

from sphereflow.profiles import initial_profiles, mass_preserving_perturbation
from sphereflow.runner import restrict_cells, run, self_convergence
from sphereflow.solver import GasParams, init


def test_run_reports_no_failures(perturbed_run):
    assert perturbed_run.ok, perturbed_run.failures
    assert [round(r.t, 12) for r in perturbed_run.records][0] == 0.0
    assert perturbed_run.records[-1].t == pytest.approx(0.2)


def test_output_interval_spacing(perturbed_run):
    t = np.array([r.t for r in perturbed_run.records])
    assert len(t) == 5  # 0, ~0.05, ~0.1, ~0.15, 0.2
    assert np.all(np.diff(t) > 0.04)


def test_energy_non_increasing(perturbed_run):
    E = perturbed_run.energies
    assert np.all(np.diff(E) <= 1e-8 * E[0])


def test_energy_defect_small(perturbed_run):
    assert perturbed_run.total_energy_drift < 1e-9 * perturbed_run.energies[0]


def test_fixed_step_count(gas):
    s0 = init(1.0, lambda r: 1e-3 * r * (1 - r), 1.0, 3, gas, 32)
    res = run(s0, gas, 0.05, n_steps=40)
    assert len(res.traj) == 41
    assert np.allclose(np.diff(res.traj.times), 0.05 / 40)


def test_restrict_cells():
    assert np.array_equal(restrict_cells(np.array([1.0, 3.0, 5.0, 7.0]), 2), [2.0, 6.0])


def test_mass_preserving_perturbation_keeps_mass():
    rho0, _ = initial_profiles("constant", 1.0, 0.0)
    pert, fine = mass_preserving_perturbation(rho0, 1.0, 3, 0.1)
    P = GasParams(1, 1.4, 1, 0)
    a = init(rho0, 0.0, 1.0, 3, P, 64, fine=fine)
    b = init(pert, 0.0, 1.0, 3, P, 64, fine=fine)
    assert b.M0 == pytest.approx(a.M0, rel=1e-14)
    assert not np.allclose(a.v, b.v)


def test_self_convergence_first_order(gas):
    rho0, u0 = initial_profiles("polynomial-bump", 1.0, 0.1)
    study = self_convergence(rho0, u0, 1.0, 3, gas, 32, 0.1)
    assert study.order_v >= 0.9
    assert study.order_u >= 0.9
    assert [row[0] for row in study.table()] == [32, 64]


def test_unknown_profile_family():
    with pytest.raises(ValueError):
        initial_profiles("gaussian", 1.0, 0.1)
