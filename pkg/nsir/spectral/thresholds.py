"""
Spectral - Threshold Quantities

Handles:
- R02, the generalized Rayleigh ratio whose comparison with 1 matches the sign of lambda1
- Critical length l* by bisection on the interval length
- Local principal eigenvalue lambda1(q) of -d phi'' + q phi
- Mesh-convergence (Richardson) ratio
"""

from __future__ import annotations

import logging
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import eig, eigh

from ..kernel.operators import build_kernel
from ..shared.errors import BracketFailure, ConfigInvalid, InconsistentThreshold, UnsupportedKernel
from ..shared.grid import Grid1D
from ..shared.models import KernelSpec
from .eigen import EigenProblem, is_symmetric, principal_eigenvalue

logger = logging.getLogger(__name__)

Interval = Union[Tuple[float, float], Grid1D]

MIN_NODES = 101
MAX_NODES = 2001
MAX_EXPANSIONS = 10
MAX_REFINEMENTS = 60


def _grid_for(interval: Interval, n: int) -> Grid1D:
    if isinstance(interval, Grid1D):
        return interval
    left, right = interval
    return Grid1D(float(left), float(right), int(n))


def lambda1_on_interval(c1: float, c2: float, interval: Interval, kernel_spec: KernelSpec,
                        d: float = 1.0, n: int = 201) -> float:
    """lambda1(c1, c2, I) for constant coefficients"""
    grid = _grid_for(interval, n)
    kernel = build_kernel(kernel_spec, grid)
    return principal_eigenvalue(EigenProblem(d=d, c1=c1, c2=c2, grid=grid, kernel=kernel)).lambda1


def r02(c1: float, c2: float, interval: Interval, kernel_spec: KernelSpec,
        d: float = 1.0, n: int = 201, check: bool = True) -> float:
    """
    Sup of c1 <P phi, phi> / (d ||phi'||^2 + c2 ||phi||^2) over the discrete space

    Args:
        c1: Nonlocal coefficient (> 0)
        c2: Local coefficient (> 0)
        interval: (left, right) or a Grid1D
        kernel_spec: Kernel used on the interval
        d: Diffusivity
        n: Nodes when interval is a tuple
        check: Verify sign(1 - R02) == sign(lambda1)

    Returns:
        float: R02

    Raises:
        InconsistentThreshold: Sign relation violated (discretization too coarse)
    """
    if c1 <= 0:
        raise ConfigInvalid(f"c1={c1} must be > 0", "c1")
    if c2 <= 0:
        raise ConfigInvalid(f"c2={c2} must be > 0", "c2")

    grid = _grid_for(interval, n)
    kernel = build_kernel(kernel_spec, grid)
    m = grid.n - 2
    h = grid.spacing

    B = c1 * kernel.interior()
    C = np.zeros((m, m))
    idx = np.arange(m)
    C[idx, idx] = 2.0 * d / h ** 2 + c2
    C[idx[:-1], idx[:-1] + 1] = -d / h ** 2
    C[idx[1:], idx[1:] - 1] = -d / h ** 2

    if is_symmetric(B):
        value = float(eigh(B, C, eigvals_only=True, subset_by_index=[m - 1, m - 1])[0])
    else:
        value = float(np.max(eig(B, C, right=False).real))

    if check:
        lam = principal_eigenvalue(EigenProblem(d=d, c1=c1, c2=c2, grid=grid, kernel=kernel)).lambda1
        lam_tol = 1e-8 * max(1.0, abs(c1) + abs(c2))
        if abs(lam) > lam_tol and abs(value - 1.0) > 1e-9 and (value > 1.0) != (lam < 0.0):
            raise InconsistentThreshold(
                f"R02={value:.12g} but lambda1={lam:.12g} on ({grid.left}, {grid.right})")
    return value


def _nodes_for_length(length: float, width: float) -> int:
    return int(min(MAX_NODES, max(MIN_NODES, math.ceil(4.0 * length / width) + 1)))


def critical_length(c1: float, c2: float, kernel_spec: KernelSpec, tol: float = 1e-6,
                    d: float = 1.0) -> float:
    """
    Interval length l* where lambda1(c1, c2, (-l*/2, l*/2)) changes sign

    Bisection on the length; lambda1 decreases strictly as the interval grows.
    The search starts from [4 h, L] with L = 100 sqrt(d / (c1 - c2)) and
    h = L / (MAX_NODES - 1), the spacing of the finest grid on L; L doubles
    up to MAX_EXPANSIONS times while lambda1(L) >= 0.

    While the bracket is wider than tol the node count follows the length
    (about four nodes per kernel width, at least MIN_NODES). Once it is
    narrower, the node count is frozen at the value of one bracket end so
    lambda1 is continuous in the length, and bisection goes on until
    |lambda1(l*)| < tol as well.

    Args:
        c1: Nonlocal coefficient
        c2: Local coefficient
        kernel_spec: Translation-invariant kernel (TopHat / TruncatedGaussian, normalization None)
        tol: Bracket width and eigenvalue tolerance
        d: Diffusivity

    Returns:
        float: l*

    Raises:
        UnsupportedKernel: Kernel is not translation invariant
        BracketFailure: lambda1 keeps one sign on the searched range
    """
    if not kernel_spec.translation_invariant:
        raise UnsupportedKernel(
            "critical length needs a convolution kernel without renormalization", "kernel")
    if c1 <= c2:
        raise BracketFailure(f"c1={c1} <= c2={c2}: lambda1 > 0 for every length")

    def lam(length: float, n: Optional[int] = None) -> float:
        n = n or _nodes_for_length(length, kernel_spec.width)
        return lambda1_on_interval(c1, c2, Grid1D.centered(length, n), kernel_spec, d=d)

    hi = 100.0 * math.sqrt(d / max(c1 - c2, 1e-6))
    lo = 4.0 * hi / (MAX_NODES - 1)

    if lam(lo) <= 0:
        raise BracketFailure(f"lambda1 already non-positive at the smallest length {lo:.4g}")

    lam_hi = lam(hi)
    expansions = 0
    while lam_hi >= 0:
        if expansions >= MAX_EXPANSIONS:
            raise BracketFailure(f"lambda1 stays non-negative up to length {hi:.4g}")
        lo, hi = hi, 2.0 * hi
        lam_hi = lam(hi)
        expansions += 1

    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if lam(mid) > 0:
            lo = mid
        else:
            hi = mid

    for n in (_nodes_for_length(hi, kernel_spec.width), _nodes_for_length(lo, kernel_spec.width)):
        lam_lo, lam_hi = lam(lo, n), lam(hi, n)
        if lam_lo > 0 > lam_hi:
            break
    else:
        # sign change sits inside a node-count step; keep the closer end
        l_star = lo if abs(lam_lo) <= abs(lam_hi) else hi
        logger.warning("l*=%.10g found at a resolution step, |lambda1|=%.3e", l_star, min(abs(lam_lo), abs(lam_hi)))
        return l_star

    mid = 0.5 * (lo + hi)
    lam_mid = lam(mid, n)
    for _ in range(MAX_REFINEMENTS):
        if abs(lam_mid) < tol:
            break
        if lam_mid > 0:
            lo = mid
        else:
            hi = mid
        mid = 0.5 * (lo + hi)
        lam_mid = lam(mid, n)
    else:
        logger.warning("|lambda1(l*)|=%.3e still above tol=%.1e after %d refinements",
                       abs(lam_mid), tol, MAX_REFINEMENTS)
    logger.debug("l*=%.10g for c1=%g c2=%g d=%g (n=%d, lambda1=%.3e)", mid, c1, c2, d, n, lam_mid)
    return mid


def lambda1_local(q: Union[float, np.ndarray], d: float, interval: Interval, n: int = 201) -> float:
    """
    Principal eigenvalue of -d phi'' + q phi with Dirichlet ends

    Constant q uses the closed form d pi^2 / L^2 + q; a grid function q uses the FD eigensolver.
    """
    grid = _grid_for(interval, np.asarray(q).size if np.ndim(q) else n)
    if np.ndim(q) == 0:
        return d * math.pi ** 2 / grid.length ** 2 + float(q)
    return principal_eigenvalue(EigenProblem(d=d, c1=0.0, c2=np.asarray(q, dtype=float), grid=grid)).lambda1


def richardson_ratio(values: Sequence[float]) -> float:
    """(v1 - v2) / (v2 - v3) for three successive halvings of the spacing"""
    v1, v2, v3 = (float(v) for v in values)
    return (v1 - v2) / (v2 - v3)
