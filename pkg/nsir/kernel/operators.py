"""
Kernel - Discrete Nonlocal Infection Operators

Handles:
- Sampling kernel densities P(x, y) on a uniform grid (Uniform, TopHat, TruncatedGaussian)
- Normalization (column-stochastic, symmetric Sinkhorn scaling, none)
- Applying the operator v_i = sum_j P_ij w_j u_j with trapezoid weights w
- Reporting normalization quality
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy.special import erf

from ..shared.errors import DimensionMismatch, PreconditionViolated, SinkhornNonConvergence
from ..shared.grid import Grid1D
from ..shared.models import (
    CheckResult, KernelFamily, KernelSpec, Normalization, NormalizationCheck, NormalizationReport,
)

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
SINKHORN_TOL = 1e-10
NORMALIZATION_TOL = 1e-8
SINKHORN_MAX_SWEEPS = 100_000
GAUSSIAN_TRUNCATION = 5.0


# ============================================================================
# Kernel Matrix
# ============================================================================

@dataclass(frozen=True)
class KernelMatrix:
    """Discretized operator: samples = density * weights (column-wise)"""
    samples: np.ndarray
    density: np.ndarray
    weights: np.ndarray
    grid: Grid1D
    spec: KernelSpec
    normalization_report: NormalizationReport

    @property
    def symmetric(self) -> bool:
        return self.normalization_report.symmetric

    @property
    def n(self) -> int:
        return self.grid.n

    def interior(self) -> np.ndarray:
        """Samples restricted to interior nodes (Dirichlet problems)"""
        return self.samples[1:-1, 1:-1]


# ============================================================================
# Convolution Profiles
# ============================================================================

def convolution_profile(spec: KernelSpec) -> Tuple[Callable[[np.ndarray], np.ndarray], float]:
    """
    Even profile J with P(x, y) = J(x - y) and its support radius

    Args:
        spec: TopHat or TruncatedGaussian kernel specification

    Returns:
        Tuple of (vectorized J, reach) where J vanishes for |u| > reach

    Raises:
        PreconditionViolated: If the family is not a convolution family
    """
    width = float(spec.width)
    if spec.family == KernelFamily.TOP_HAT:
        height = 1.0 / (2.0 * width)

        def top_hat(u: np.ndarray) -> np.ndarray:
            u = np.asarray(u, dtype=float)
            return np.where(np.abs(u) <= width, height, 0.0)

        return top_hat, width

    if spec.family == KernelFamily.TRUNCATED_GAUSSIAN:
        reach = GAUSSIAN_TRUNCATION * width
        scale = 1.0 / (width * math.sqrt(2.0 * math.pi) * float(erf(GAUSSIAN_TRUNCATION / math.sqrt(2.0))))

        def gaussian(u: np.ndarray) -> np.ndarray:
            u = np.asarray(u, dtype=float)
            return np.where(np.abs(u) <= reach, scale * np.exp(-0.5 * (u / width) ** 2), 0.0)

        return gaussian, reach

    raise PreconditionViolated(f"{spec.family.value} is not a convolution family")


def sample_density(spec: KernelSpec, grid: Grid1D) -> np.ndarray:
    """Raw kernel density P(x_i, x_j) before normalization"""
    if spec.family == KernelFamily.UNIFORM:
        return np.full((grid.n, grid.n), 1.0 / grid.length)
    profile, _ = convolution_profile(spec)
    x = grid.nodes
    return profile(np.subtract.outer(x, x))


# ============================================================================
# Normalization
# ============================================================================

def _column_normalize(P: np.ndarray, w: np.ndarray) -> np.ndarray:
    col = w @ P
    if np.any(col <= 0):
        raise SinkhornNonConvergence("column-stochastic scaling hit an all-zero column")
    return P / col[np.newaxis, :]


def _sinkhorn_symmetric(P: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, int]:
    """
    Symmetric scaling D P D with unit row integrals sum_j (DPD)_ij w_j = 1

    Returns:
        Tuple of (scaled symmetric density, sweeps used)

    Raises:
        SinkhornNonConvergence: Zero rows, non-finite iterates or sweep cap hit
    """
    P = 0.5 * (P + P.T)
    if np.any(P @ w <= 0):
        raise SinkhornNonConvergence("kernel sample has an all-zero row; symmetric scaling is undefined")

    d = np.ones(P.shape[0])
    for sweep in range(1, SINKHORN_MAX_SWEEPS + 1):
        r = d * (P @ (w * d))
        if not np.all(np.isfinite(r)) or np.any(r <= 0):
            raise SinkhornNonConvergence(f"non-finite row integrals at sweep {sweep}")
        if np.max(np.abs(r - 1.0)) < SINKHORN_TOL:
            scaled = d[:, np.newaxis] * P * d[np.newaxis, :]
            return 0.5 * (scaled + scaled.T), sweep
        d = d / np.sqrt(r)

    raise SinkhornNonConvergence(
        f"row integrals still off by {np.max(np.abs(r - 1.0)):.3e} after {SINKHORN_MAX_SWEEPS} sweeps")


def _report(P: np.ndarray, w: np.ndarray, spec: KernelSpec, grid: Grid1D, sweeps: int = 0) -> NormalizationReport:
    asym = float(np.max(np.abs(P - P.T))) if P.size else 0.0
    under = spec.family != KernelFamily.UNIFORM and spec.width < grid.spacing
    return NormalizationReport(
        max_column_deviation=float(np.max(np.abs(w @ P - 1.0))),
        max_row_deviation=float(np.max(np.abs(P @ w - 1.0))),
        max_asymmetry=asym,
        symmetric=asym < SYMMETRY_TOL,
        strictly_positive=bool(np.all(P > 0)),
        under_resolved=bool(under),
        normalization=spec.normalization.value,
        sinkhorn_sweeps=sweeps,
    )


# ============================================================================
# Operations
# ============================================================================

def build_kernel(spec: KernelSpec, grid: Grid1D) -> KernelMatrix:
    """
    Build the discrete nonlocal operator on a grid

    Args:
        spec: Kernel family, width and normalization
        grid: Uniform grid of the interval

    Returns:
        KernelMatrix whose application approximates the integral of P(x,y)u(y) by the trapezoid rule

    Raises:
        SinkhornNonConvergence: If symmetric scaling fails
    """
    w = grid.weights
    P = sample_density(spec, grid)
    sweeps = 0

    if spec.normalization == Normalization.COLUMN_STOCHASTIC:
        P = _column_normalize(P, w)
    elif spec.normalization == Normalization.SINKHORN_SYMMETRIC:
        P, sweeps = _sinkhorn_symmetric(P, w)

    report = _report(P, w, spec, grid, sweeps)
    if report.under_resolved:
        logger.warning("kernel under-resolved: width %.3g < grid spacing %.3g", spec.width, grid.spacing)

    return KernelMatrix(
        samples=P * w[np.newaxis, :],
        density=P,
        weights=w.copy(),
        grid=grid,
        spec=spec,
        normalization_report=report,
    )


def apply_nonlocal(K: KernelMatrix, u: np.ndarray) -> np.ndarray:
    """v_i = sum_j K_ij u_j"""
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.shape[0] != K.n:
        raise DimensionMismatch(f"grid function of shape {u.shape} does not match kernel grid with n={K.n}")
    return K.samples @ u


def check_normalization(K: KernelMatrix) -> NormalizationReport:
    """Recompute the normalization report from the stored matrix"""
    return _report(K.density, K.weights, K.spec, K.grid, K.normalization_report.sinkhorn_sweeps)


def normalization_check(K: KernelMatrix, tol: float = NORMALIZATION_TOL) -> NormalizationCheck:
    """
    Pass / fail checks for the normalization a kernel claims

    Column integrals are checked for the Uniform family and column-stochastic
    scaling, row integrals for Sinkhorn scaling, and symmetry for every mode
    except column-stochastic scaling (which breaks it).

    Args:
        K: Kernel matrix
        tol: Admissible deviation of row / column integrals from one

    Returns:
        NormalizationCheck with the raw NormalizationReport under `kernel`
    """
    raw = check_normalization(K)
    mode = K.spec.normalization
    checks = []
    if mode == Normalization.COLUMN_STOCHASTIC or (mode == Normalization.NONE and K.spec.family == KernelFamily.UNIFORM):
        checks.append(CheckResult(name="column_deviation", passed=raw.max_column_deviation <= tol,
                                  value=raw.max_column_deviation, limit=tol, detail="max_j |sum_i w_i P_ij - 1|"))
    if mode == Normalization.SINKHORN_SYMMETRIC:
        checks.append(CheckResult(name="row_deviation", passed=raw.max_row_deviation <= tol,
                                  value=raw.max_row_deviation, limit=tol, detail="max_i |sum_j P_ij w_j - 1|"))
    if mode != Normalization.COLUMN_STOCHASTIC:
        checks.append(CheckResult(name="asymmetry", passed=raw.max_asymmetry < SYMMETRY_TOL,
                                  value=raw.max_asymmetry, limit=SYMMETRY_TOL, detail="max |P_ij - P_ji|"))
    return NormalizationCheck(checks=checks, kernel=raw)
