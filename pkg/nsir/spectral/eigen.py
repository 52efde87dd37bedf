"""
Spectral - Principal Eigenpairs of Nonlocal Dirichlet Operators

Discretizes -d phi'' - c1 P[phi] + c2 phi on the interior nodes of a uniform
grid and extracts the principal (Perron) eigenpair by shifted inverse
iteration. A dense eigendecomposition serves as oracle.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.linalg import eig, eigh, lu_factor, lu_solve

from ..kernel.operators import KernelMatrix
from ..shared.errors import (
    DimensionMismatch, NonConvergence, NonPositiveEigenfunction, PreconditionViolated, ZeroFunction,
)
from ..shared.grid import Grid1D

logger = logging.getLogger(__name__)

Coefficient = Union[float, np.ndarray]

EIGEN_TOL = 1e-10
EIGEN_MAX_ITER = 10_000
SHIFT_REFRESH = 5
SHIFT_MARGIN = 1e-8


# ============================================================================
# Domain Types
# ============================================================================

@dataclass
class EigenProblem:
    """-d phi'' - c1 P[phi] + c2 phi = lambda phi, phi = 0 at both ends"""
    d: float
    c1: Coefficient
    c2: Coefficient
    grid: Grid1D
    kernel: Optional[KernelMatrix] = None

    def interior_coefficient(self, c: Coefficient) -> np.ndarray:
        m = self.grid.n - 2
        arr = np.asarray(c, dtype=float)
        if arr.ndim == 0:
            return np.full(m, float(arr))
        if arr.shape == (self.grid.n,):
            return arr[1:-1].copy()
        if arr.shape == (m,):
            return arr.copy()
        raise DimensionMismatch(f"coefficient of shape {arr.shape} does not match grid with n={self.grid.n}")


@dataclass
class EigenResult:
    lambda1: float
    phi: np.ndarray
    residual: float
    iterations: int
    tolerance: float
    grid: Grid1D

    @property
    def interior(self) -> np.ndarray:
        return self.phi[1:-1]


# ============================================================================
# Operator Assembly
# ============================================================================

def interior_operator(p: EigenProblem) -> np.ndarray:
    """
    Dense interior matrix A = d T / h^2 - diag(c1) K_int + diag(c2)

    Raises:
        PreconditionViolated: Fewer than two interior nodes, or c1 != 0 without a kernel
        DimensionMismatch: Kernel grid differs from the problem grid
    """
    n = p.grid.n
    if n < 4:
        raise PreconditionViolated(f"need at least 2 interior nodes, got n={n}")
    m = n - 2
    h = p.grid.spacing
    c1 = p.interior_coefficient(p.c1)
    c2 = p.interior_coefficient(p.c2)

    diffusion = p.d / h ** 2
    A = np.zeros((m, m))
    idx = np.arange(m)
    A[idx, idx] = 2.0 * diffusion + c2
    A[idx[:-1], idx[:-1] + 1] = -diffusion
    A[idx[1:], idx[1:] - 1] = -diffusion

    if np.any(c1 != 0.0):
        if p.kernel is None:
            raise PreconditionViolated("nonzero c1 requires a kernel")
        if not p.kernel.grid.same_as(p.grid):
            raise DimensionMismatch("kernel grid does not match the eigenproblem grid")
        A -= c1[:, np.newaxis] * p.kernel.interior()
    return A


def is_symmetric(A: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(A))))
    return float(np.max(np.abs(A - A.T))) <= 1e-14 * scale


def _gershgorin_lower(A: np.ndarray) -> float:
    off = np.sum(np.abs(A), axis=1) - np.abs(np.diag(A))
    return float(np.min(np.diag(A) - off))


def _collatz_shift(A: np.ndarray, phi: np.ndarray) -> float:
    """Shift strictly below lambda1 from the Collatz-Wielandt lower bound"""
    if np.all(phi > 0):
        lb = float(np.min((A @ phi) / phi))
    else:
        lb = _gershgorin_lower(A)
    return lb - SHIFT_MARGIN * max(1.0, abs(lb))


# ============================================================================
# Operations
# ============================================================================

def principal_eigenvalue(p: EigenProblem, tol: float = EIGEN_TOL,
                         max_iter: int = EIGEN_MAX_ITER) -> EigenResult:
    """
    Principal eigenpair by shifted inverse iteration

    The shift is refreshed every few iterations from the Collatz-Wielandt
    bound of the current iterate, which keeps A - shift*I a nonsingular
    M-matrix so every iterate stays positive.

    The Rayleigh quotient of the current iterate is the reported lambda1 but
    is not used as the shift. For a positive iterate min(A phi / phi) never
    exceeds lambda1, so the shift stays below the principal eigenvalue and
    inverse iteration cannot lock onto a higher eigenvalue. A Rayleigh shift
    may land on either side of lambda1 (the operator is not symmetric under
    column-stochastic scaling), and within rounding of lambda1 the LU factors
    are numerically singular. The lower bound tightens as phi converges.

    Args:
        p: Eigenvalue problem
        tol: Residual tolerance; raised to 64*eps*||A|| when that is larger
        max_iter: Iteration cap

    Returns:
        EigenResult with phi sup-normalized to 1 and zero boundary values

    Raises:
        NonConvergence: Iteration cap reached
        NonPositiveEigenfunction: Converged vector is not positive
    """
    A = interior_operator(p)
    m = A.shape[0]
    norm_inf = float(np.max(np.sum(np.abs(A), axis=1)))
    tol_used = max(tol, 64.0 * np.finfo(float).eps * norm_inf)

    phi = np.sin(np.pi * np.arange(1, m + 1) / (m + 1))
    identity = np.eye(m)
    lam = float(phi @ A @ phi / (phi @ phi))
    residual = np.inf
    lu = None

    for it in range(1, max_iter + 1):
        if (it - 1) % SHIFT_REFRESH == 0:
            shift = _collatz_shift(A, phi)
            lu = lu_factor(A - shift * identity)
        y = lu_solve(lu, phi)
        peak = y[np.argmax(np.abs(y))]
        if peak == 0 or not np.all(np.isfinite(y)):
            raise NonConvergence(f"inverse iteration broke down at iteration {it}")
        phi = y / peak
        lam = float(phi @ A @ phi / (phi @ phi))
        residual = float(np.max(np.abs(A @ phi - lam * phi)) / np.max(np.abs(phi)))
        if residual < tol_used:
            break
    else:
        raise NonConvergence(
            f"residual {residual:.3e} above {tol_used:.3e} after {max_iter} iterations")

    if np.any(phi <= 0):
        raise NonPositiveEigenfunction(
            f"eigenvector has {int(np.sum(phi <= 0))} non-positive interior entries")

    full = np.zeros(p.grid.n)
    full[1:-1] = phi
    logger.debug("lambda1=%.12g residual=%.2e iterations=%d", lam, residual, it)
    return EigenResult(lambda1=lam, phi=full, residual=residual, iterations=it,
                       tolerance=tol_used, grid=p.grid)


def dense_eigenvalue(p: EigenProblem) -> float:
    """Oracle: smallest eigenvalue from a dense decomposition"""
    A = interior_operator(p)
    if is_symmetric(A):
        return float(eigh(A, eigvals_only=True, subset_by_index=[0, 0])[0])
    values = eig(A, right=False)
    return float(np.min(values.real))


def rayleigh_quotient(phi: np.ndarray, p: EigenProblem) -> float:
    """
    Discrete form d*int(phi')^2 - iint c1 P phi phi + int c2 phi^2 at ||phi||_2 = 1

    Args:
        phi: Grid function on all nodes (vanishing at the ends) or on interior nodes
        p: Eigenvalue problem

    Raises:
        ZeroFunction: phi has zero discrete L2 norm
    """
    phi = np.asarray(phi, dtype=float)
    n = p.grid.n
    if phi.shape == (n,):
        scale = max(1.0, float(np.max(np.abs(phi))))
        if abs(phi[0]) > 1e-12 * scale or abs(phi[-1]) > 1e-12 * scale:
            raise PreconditionViolated("trial function must vanish at boundary nodes")
        phi = phi[1:-1]
    elif phi.shape != (n - 2,):
        raise DimensionMismatch(f"trial function of shape {phi.shape} does not match grid with n={n}")

    norm2 = float(phi @ phi)
    if norm2 == 0.0:
        raise ZeroFunction("trial function vanishes identically")
    A = interior_operator(p)
    return float(phi @ A @ phi) / norm2
