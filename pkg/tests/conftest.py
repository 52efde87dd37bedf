"""
Shared fixtures: reference parameter points, small grids and an isolated
output root for harness runs.
"""

import pytest

from nsir.shared.config import OUTPUT_ROOT_ENV
from nsir.shared.grid import Grid1D
from nsir.shared.models import KernelSpec, ModelParams


@pytest.fixture
def params_extinct():
    """R01 = 0.8"""
    return ModelParams(a=2.0, beta=1.0, b=1.0, gamma=0.5, k=2.0, d=1.0)


@pytest.fixture
def params_endemic():
    """R01 = 2, a > gamma; E2 = (0.5, 0.4, 0.1)"""
    return ModelParams(a=2.0, beta=1.0, b=1.0, gamma=0.5, k=5.0, d=1.0)


@pytest.fixture
def params_front():
    """Vanishing point for the free-boundary problem (mu small)"""
    return ModelParams(a=2.0, beta=1.0, b=1.0, gamma=0.5, k=5.0, d=1.0, h0=0.3, mu=0.01)


@pytest.fixture
def gaussian_kernel():
    return KernelSpec(family="TruncatedGaussian", width=0.25, normalization="None")


@pytest.fixture
def small_grid():
    return Grid1D(-1.0, 1.0, 21)


@pytest.fixture
def output_root(tmp_path, monkeypatch):
    root = tmp_path / "runs"
    monkeypatch.setenv(OUTPUT_ROOT_ENV, str(root))
    return root
