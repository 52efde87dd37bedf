"""
Tests for principal eigenvalues, R02 and the critical length.
"""

import math

import numpy as np
import pytest

from nsir.kernel import build_kernel
from nsir.shared.errors import BracketFailure, ConfigInvalid, NsirError, PreconditionViolated, UnsupportedKernel
from nsir.shared.grid import Grid1D
from nsir.shared.models import KernelSpec
from nsir.spectral import (
    EigenProblem, critical_length, dense_eigenvalue, interior_operator, lambda1_local, lambda1_on_interval,
    principal_eigenvalue, r02, rayleigh_quotient, richardson_ratio,
)

TOP_HAT = KernelSpec(family="TopHat", width=0.5, normalization="None")


def _problem(n, c1=5.0, c2=2.5, d=1.0, length=2.0, spec=TOP_HAT):
    grid = Grid1D.centered(length, n)
    return EigenProblem(d=d, c1=c1, c2=c2, grid=grid, kernel=build_kernel(spec, grid))


def test_local_operator_matches_discrete_closed_form():
    n, d, c2, length = 201, 1.0, 2.5, 2.0
    grid = Grid1D.centered(length, n)
    result = principal_eigenvalue(EigenProblem(d=d, c1=0.0, c2=c2, grid=grid))
    h = grid.spacing
    exact_discrete = c2 + 4.0 * d / h ** 2 * math.sin(math.pi * h / (2.0 * length)) ** 2
    assert result.lambda1 == pytest.approx(exact_discrete, abs=1e-8)
    assert result.lambda1 == pytest.approx(d * math.pi ** 2 / length ** 2 + c2, abs=1e-3)


def test_local_operator_converges_at_second_order():
    values = [principal_eigenvalue(_problem(n, c1=0.0)).lambda1 for n in (101, 201, 401)]
    assert 3.5 <= richardson_ratio(values) <= 4.5


def test_shift_identity():
    base = principal_eigenvalue(_problem(101, c2=2.5)).lambda1
    shifted = principal_eigenvalue(_problem(101, c2=2.5 + 1.3)).lambda1
    assert shifted == pytest.approx(base + 1.3, abs=1e-10)


def test_iterative_matches_dense_oracle():
    p = _problem(401)
    assert principal_eigenvalue(p).lambda1 == pytest.approx(dense_eigenvalue(p), abs=1e-8)


@pytest.mark.slow
def test_iterative_matches_dense_oracle_on_the_finest_grid():
    p = _problem(2001, spec=KernelSpec())
    assert p.grid.left == -1.0 and p.grid.right == 1.0
    result = principal_eigenvalue(p)
    assert result.lambda1 == pytest.approx(dense_eigenvalue(p), abs=1e-8)
    assert result.residual < result.tolerance


def test_eigenfunction_is_positive_and_vanishes_at_the_ends():
    result = principal_eigenvalue(_problem(81))
    assert result.phi[0] == 0.0 and result.phi[-1] == 0.0
    assert np.all(result.interior > 0)
    assert np.max(result.phi) == pytest.approx(1.0)


def test_rayleigh_quotient_of_eigenfunction_is_lambda1():
    p = _problem(161)
    assert np.allclose(interior_operator(p), interior_operator(p).T)
    result = principal_eigenvalue(p)
    assert rayleigh_quotient(result.phi, p) == pytest.approx(result.lambda1, abs=1e-8)


def test_rayleigh_quotient_rejects_nonzero_boundary_values():
    p = _problem(41)
    with pytest.raises(PreconditionViolated):
        rayleigh_quotient(np.ones(p.grid.n), p)


def test_rayleigh_quotient_never_falls_below_lambda1():
    p = _problem(121)
    lam = principal_eigenvalue(p).lambda1
    rng = np.random.default_rng(11)
    x = p.grid.nodes
    bump = np.cos(0.5 * np.pi * x)
    for _ in range(50):
        trial = np.zeros(p.grid.n)
        trial[1:-1] = rng.normal(size=p.grid.n - 2)
        assert rayleigh_quotient(trial, p) >= lam - 1e-10
        smooth = bump * (1.0 + 0.5 * rng.uniform(-1.0, 1.0) * x)
        smooth[0] = smooth[-1] = 0.0
        assert rayleigh_quotient(smooth, p) >= lam - 1e-10


def test_precondition_errors_are_solver_errors():
    assert issubclass(PreconditionViolated, NsirError)
    with pytest.raises(PreconditionViolated):
        interior_operator(EigenProblem(d=1.0, c1=5.0, c2=2.5, grid=Grid1D.centered(2.0, 41)))


def test_threshold_equivalence_at_random_points():
    rng = np.random.default_rng(7)
    for _ in range(100):
        c1 = float(rng.uniform(0.1, 10.0))
        c2 = float(rng.uniform(0.1, 5.0))
        length = float(rng.uniform(0.5, 5.0))
        interval = (-0.5 * length, 0.5 * length)
        ratio = r02(c1, c2, interval, TOP_HAT, n=81)
        lam = lambda1_on_interval(c1, c2, interval, TOP_HAT, n=81)
        assert np.sign(1.0 - ratio) == np.sign(lam)


def test_r02_needs_positive_coefficients():
    with pytest.raises(ConfigInvalid):
        r02(0.0, 1.0, (-1.0, 1.0), TOP_HAT)


def test_lambda1_decreases_with_length():
    values = [lambda1_on_interval(5.0, 2.5, (-0.5 * L, 0.5 * L), TOP_HAT, n=121) for L in (1.0, 1.5, 2.0, 2.5, 3.0)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_lambda1_is_monotone_in_the_coefficients():
    interval = (-1.0, 1.0)
    by_c1 = [lambda1_on_interval(c1, 2.5, interval, TOP_HAT, n=121) for c1 in (1.0, 3.0, 5.0, 7.0)]
    assert all(b < a for a, b in zip(by_c1, by_c1[1:]))
    by_c2 = [lambda1_on_interval(5.0, c2, interval, TOP_HAT, n=121) for c2 in (0.5, 1.5, 2.5, 3.5)]
    assert all(b > a for a, b in zip(by_c2, by_c2[1:]))


def test_critical_length_approaches_local_limit_for_narrow_kernel():
    spec = KernelSpec(family="TruncatedGaussian", width=0.05, normalization="None")
    l_star = critical_length(5.0, 2.5, spec, tol=1e-4, d=1.0)
    local = math.pi / math.sqrt(2.5)
    assert abs(l_star - local) <= 0.1 * local


def test_lambda1_changes_sign_at_critical_length():
    l_star = critical_length(5.0, 2.5, TOP_HAT, tol=1e-5)
    assert lambda1_on_interval(5.0, 2.5, (-0.45 * l_star, 0.45 * l_star), TOP_HAT, n=201) > 0
    assert lambda1_on_interval(5.0, 2.5, (-0.55 * l_star, 0.55 * l_star), TOP_HAT, n=201) < 0


def test_critical_length_is_stable_under_tolerance():
    coarse = critical_length(5.0, 2.5, TOP_HAT, tol=1e-3)
    fine = critical_length(5.0, 2.5, TOP_HAT, tol=1e-5)
    assert abs(coarse - fine) < 1e-3


def test_lambda1_vanishes_at_critical_length():
    tol = 1e-5
    l_star = critical_length(5.0, 2.5, TOP_HAT, tol=tol)
    assert abs(lambda1_on_interval(5.0, 2.5, Grid1D.centered(l_star, 101), TOP_HAT)) < tol


def test_critical_length_rejects_subcritical_coefficients():
    with pytest.raises(BracketFailure):
        critical_length(1.0, 2.0, TOP_HAT)


def test_critical_length_needs_translation_invariant_kernel():
    with pytest.raises(UnsupportedKernel):
        critical_length(5.0, 2.5, KernelSpec())


def test_lambda1_local_closed_form_and_grid_function_agree():
    grid = Grid1D(0.0, 2.0, 201)
    closed = lambda1_local(-1.0, 1.0, grid)
    assert closed == pytest.approx(math.pi ** 2 / 4.0 - 1.0)
    numeric = lambda1_local(np.full(grid.n, -1.0), 1.0, grid)
    assert numeric == pytest.approx(closed, abs=1e-3)
