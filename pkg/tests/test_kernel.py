"""
Tests for the discrete nonlocal operators: normalization modes, the
normalization report and operator application.
"""

from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import quad

from nsir.kernel import apply_nonlocal, build_kernel, check_normalization, convolution_profile, normalization_check
from nsir.shared.errors import DimensionMismatch, NsirError, PreconditionViolated
from nsir.shared.grid import Grid1D
from nsir.shared.models import KernelSpec


def test_uniform_rows_and_columns_integrate_to_one(small_grid):
    K = build_kernel(KernelSpec(), small_grid)
    report = K.normalization_report
    assert report.max_row_deviation < 1e-12
    assert report.max_column_deviation < 1e-12
    assert report.symmetric
    assert report.strictly_positive


def test_uniform_maps_constants_to_constants(small_grid):
    K = build_kernel(KernelSpec(), small_grid)
    v = apply_nonlocal(K, np.full(small_grid.n, 0.7))
    assert np.allclose(v, 0.7, atol=1e-14)


def test_column_stochastic_normalizes_weighted_columns():
    grid = Grid1D(0.0, 1.0, 41)
    K = build_kernel(KernelSpec(family="TopHat", width=0.3, normalization="ColumnStochastic"), grid)
    assert K.normalization_report.max_column_deviation < 1e-12
    col = grid.weights @ K.density
    assert np.allclose(col, 1.0, atol=1e-12)


def test_sinkhorn_symmetric_is_symmetric_with_unit_rows():
    grid = Grid1D(-1.0, 1.0, 41)
    K = build_kernel(KernelSpec(family="TopHat", width=0.5, normalization="SinkhornSymmetric"), grid)
    report = K.normalization_report
    assert report.symmetric
    assert report.max_asymmetry < 1e-12
    assert report.max_row_deviation < 1e-9
    assert report.sinkhorn_sweeps >= 1


def test_unnormalized_convolution_loses_mass_near_the_ends():
    grid = Grid1D(-1.0, 1.0, 81)
    K = build_kernel(KernelSpec(family="TruncatedGaussian", width=0.25, normalization="None"), grid)
    rows = K.samples.sum(axis=1)
    assert rows[0] < 0.6
    assert rows[grid.n // 2] == pytest.approx(1.0, abs=1e-3)


def test_under_resolved_kernel_is_flagged(small_grid):
    K = build_kernel(KernelSpec(family="TopHat", width=0.01), small_grid)
    assert K.normalization_report.under_resolved


@pytest.mark.parametrize("family,width", [("TopHat", 0.4), ("TruncatedGaussian", 0.25)])
def test_convolution_profile_has_unit_mass(family, width):
    J, reach = convolution_profile(KernelSpec(family=family, width=width))
    mass, _ = quad(lambda u: float(J(u)), -reach, reach, points=[0.0], limit=200)
    assert mass == pytest.approx(1.0, abs=1e-6)
    assert float(J(1.01 * reach)) == 0.0


def test_uniform_has_no_convolution_profile():
    with pytest.raises(PreconditionViolated):
        convolution_profile(KernelSpec())


def test_apply_rejects_wrong_length(small_grid):
    K = build_kernel(KernelSpec(), small_grid)
    with pytest.raises(DimensionMismatch):
        apply_nonlocal(K, np.ones(small_grid.n + 1))


def test_check_normalization_reproduces_build_report():
    grid = Grid1D(-1.0, 1.0, 31)
    K = build_kernel(KernelSpec(family="TopHat", width=0.5, normalization="SinkhornSymmetric"), grid)
    assert check_normalization(K) == K.normalization_report


@pytest.mark.parametrize("family,normalization,names", [
    ("Uniform", "None", {"column_deviation", "asymmetry"}),
    ("TopHat", "ColumnStochastic", {"column_deviation"}),
    ("TopHat", "SinkhornSymmetric", {"row_deviation", "asymmetry"}),
    ("TruncatedGaussian", "None", {"asymmetry"}),
])
def test_normalization_check_passes_for_each_mode(family, normalization, names):
    grid = Grid1D(-1.0, 1.0, 41)
    K = build_kernel(KernelSpec(family=family, width=0.5, normalization=normalization), grid)
    check = normalization_check(K)
    assert check.report == "normalization"
    assert {c.name for c in check.checks} == names
    assert check.passed, [c.name for c in check.failed()]
    assert check.kernel == K.normalization_report


def test_normalization_check_flags_a_drifted_kernel(small_grid):
    K = build_kernel(KernelSpec(), small_grid)
    drifted = replace(K, density=K.density * 1.01)
    check = normalization_check(drifted)
    assert [c.name for c in check.failed()] == ["column_deviation"]
    assert check.failed()[0].value == pytest.approx(0.01, rel=1e-6)
    assert check.kernel.max_column_deviation == pytest.approx(0.01, rel=1e-6)


def test_precondition_error_is_a_solver_error():
    with pytest.raises(NsirError):
        convolution_profile(KernelSpec())
