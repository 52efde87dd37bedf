"""
Tests for the fixed-interval solvers: long-time limits, runtime checks,
the comparison sandwich and Dirichlet steady states.
"""

import numpy as np
import pytest

from nsir.ibvp import (
    DIRICHLET, Extinct, FieldState, comparison_for, constant_init, envelope_check, existence_check, mass_series,
    perturbed_init, simulate_dirichlet, simulate_neumann, sine_init, tilde_N, verify_bounds,
)
from nsir.kernel import build_kernel
from nsir.kinetics import equilibria
from nsir.shared.errors import CFLViolation, ConfigInvalid
from nsir.shared.grid import Grid1D
from nsir.shared.models import KernelSpec, ModelParams

DIRICHLET_KERNEL = KernelSpec(family="TopHat", width=0.5, normalization="SinkhornSymmetric")


@pytest.fixture
def uniform(small_grid):
    return build_kernel(KernelSpec(), small_grid)


def _dirichlet_params(k):
    return ModelParams(a=2.0, beta=1.0, b=1.0, gamma=0.5, k=k, d=0.01)


# ============================================================================
# Neumann
# ============================================================================

def test_disease_free_state_attracts_below_threshold(params_extinct, small_grid, uniform):
    traj = simulate_neumann(params_extinct, uniform, perturbed_init(params_extinct, small_grid), T=60.0)
    assert traj.sup_distance(equilibria(params_extinct).E1) < 1e-3


def test_endemic_state_attracts_above_threshold(params_endemic, small_grid, uniform):
    traj = simulate_neumann(params_endemic, uniform, perturbed_init(params_endemic, small_grid), T=200.0)
    assert traj.sup_distance(equilibria(params_endemic).E2) < 1e-3
    assert traj.t[-1] == pytest.approx(200.0)


def test_runtime_checks_pass_on_a_regular_run(params_endemic, small_grid, uniform):
    traj = simulate_neumann(params_endemic, uniform, perturbed_init(params_endemic, small_grid), T=20.0)
    bounds = verify_bounds(traj)
    assert bounds.passed, bounds.failed()
    assert [c.name for c in bounds.checks] == ["positivity", "bound_M", "n_reduction"]
    sandwich = envelope_check(traj)
    assert sandwich.passed, sandwich.failed()


def test_constant_data_follow_the_comparison_system(params_endemic, small_grid, uniform):
    traj = simulate_neumann(params_endemic, uniform, constant_init(0.6, 0.2, 0.1, small_grid), T=5.0)
    comparison = comparison_for(traj)
    assert comparison.method == "euler"
    report = envelope_check(traj, comparison)
    deviation = next(c for c in report.checks if c.name == "constant_data_deviation")
    assert deviation.passed
    assert deviation.value < 1e-10


def test_mass_of_constant_data(params_endemic, small_grid, uniform):
    traj = simulate_neumann(params_endemic, uniform, constant_init(0.6, 0.2, 0.1, small_grid), T=1.0)
    mass = mass_series(traj)
    assert mass[0] == pytest.approx(0.9 * small_grid.length)
    assert mass.shape == traj.t.shape


def test_steady_detection_stops_early(params_extinct, small_grid, uniform):
    traj = simulate_neumann(params_extinct, uniform, perturbed_init(params_extinct, small_grid), T=500.0,
                            stop_at_steady=True)
    assert traj.converged
    assert traj.t[-1] < 500.0


def test_step_above_diffusion_limit_is_rejected(params_endemic, small_grid, uniform):
    with pytest.raises(CFLViolation):
        simulate_neumann(params_endemic, uniform, perturbed_init(params_endemic, small_grid), T=1.0, dt=0.01)


def test_positivity_violation_is_reported(params_endemic, small_grid, uniform):
    zigzag = 0.3 * (-1.0) ** np.arange(small_grid.n)
    init = FieldState(0.0, 0.5 + zigzag, 0.4 + zigzag, np.zeros(small_grid.n), small_grid)
    traj = simulate_neumann(params_endemic, uniform, init, T=0.04, dt=0.02, strict=False)
    report = verify_bounds(traj)
    assert not report.passed
    assert "positivity" in [c.name for c in report.failed()]


def test_neumann_needs_positive_infected(params_endemic, small_grid, uniform):
    with pytest.raises(ConfigInvalid):
        simulate_neumann(params_endemic, uniform, constant_init(1.0, 0.0, 0.0, small_grid), T=1.0)


# ============================================================================
# Dirichlet
# ============================================================================

def test_dirichlet_needs_vanishing_boundary_values(params_endemic, small_grid, uniform):
    with pytest.raises(ConfigInvalid):
        simulate_dirichlet(params_endemic, uniform, constant_init(0.5, 0.1, 0.0, small_grid), T=1.0)


def test_dirichlet_run_keeps_zero_ends_and_bounds(small_grid):
    p = _dirichlet_params(5.0)
    kernel = build_kernel(DIRICHLET_KERNEL, small_grid)
    traj = simulate_dirichlet(p, kernel, sine_init(0.8, 0.2, small_grid), T=5.0)
    assert traj.boundary == DIRICHLET
    assert np.all(traj.S[:, 0] == 0.0) and np.all(traj.I[:, -1] == 0.0)
    assert verify_bounds(traj).passed


def test_tilde_N_is_extinct_on_short_intervals():
    p = ModelParams(a=2.0, beta=1.0, b=1.0, gamma=0.5, k=5.0, d=1.0)
    assert isinstance(tilde_N(p, Grid1D(-1.0, 1.0, 41)), Extinct)


def test_tilde_N_is_positive_below_the_carrying_level():
    p = _dirichlet_params(5.0)
    grid = Grid1D(-1.0, 1.0, 41)
    N = tilde_N(p, grid)
    assert N[0] == 0.0 and N[-1] == 0.0
    assert np.all(N[1:-1] > 0)
    assert np.max(N) <= p.N_star + 1e-10
    assert N[grid.n // 2] == pytest.approx(p.N_star, abs=0.05)


def test_existence_prediction_matches_time_marching():
    grid = Grid1D(-1.0, 1.0, 41)
    kernel = build_kernel(DIRICHLET_KERNEL, grid)
    report = existence_check(_dirichlet_params(5.0), kernel, grid)
    assert report.exists_predicted
    assert report.agrees_with_prediction
    assert report.pairwise_agreement < 1e-4
    assert len(report.runs) == 3


def test_extinction_prediction_matches_time_marching():
    grid = Grid1D(-1.0, 1.0, 41)
    kernel = build_kernel(DIRICHLET_KERNEL, grid)
    report = existence_check(_dirichlet_params(0.5), kernel, grid)
    assert not report.exists_predicted
    assert report.lambda1_nonlocal_check > 0
    assert report.agrees_with_prediction
    assert report.empirical_exists is False


def test_prediction_without_probe_runs():
    grid = Grid1D(-1.0, 1.0, 41)
    kernel = build_kernel(DIRICHLET_KERNEL, grid)
    report = existence_check(_dirichlet_params(5.0), kernel, grid, runs=False)
    assert report.runs == []
    assert report.empirical_exists is None
