"""
IBVP - Dirichlet Steady States

Handles:
- The positive steady state N~ of -d N'' = (a - beta) N - b N^2, N = 0 at both ends
- Existence prediction for positive steady states from two principal eigenvalues
- Multi-start time marching to compare the prediction with what the dynamics do
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from ..kernel.operators import KernelMatrix
from ..shared.errors import NewtonStall
from ..shared.grid import Grid1D
from ..shared.models import FieldSnapshot, ModelParams, SteadyReport, SteadyRun
from ..spectral.eigen import EigenProblem, principal_eigenvalue
from ..spectral.thresholds import lambda1_local
from .solver import DIRICHLET, FieldState, logistic_step, simulate_dirichlet, sine_init

logger = logging.getLogger(__name__)

NEWTON_MAX_ITER = 100
NEWTON_MIN_DAMPING = 1.0 / 1024
MARCH_MAX_STEPS = 2_000_000
EXTINCTION_LEVEL = 1e-6
EXISTENCE_HORIZON = 300.0


@dataclass(frozen=True)
class Extinct:
    """No positive steady state: lambda1(beta - a) >= 0"""
    lambda1: float


# ============================================================================
# N~
# ============================================================================

def _residual(p: ModelParams, N: np.ndarray, h: float) -> np.ndarray:
    """-d N'' - (a-beta) N + b N^2 on interior nodes (N includes the zero ends)"""
    lap = (N[2:] - 2.0 * N[1:-1] + N[:-2]) / h ** 2
    inner = N[1:-1]
    return -p.d * lap - p.growth * inner + p.b * inner ** 2


def _newton(p: ModelParams, grid: Grid1D, tol: float) -> np.ndarray:
    h = grid.spacing
    m = grid.n - 2
    N = np.zeros(grid.n)
    N[1:-1] = p.N_star * np.sin(np.pi * (grid.nodes[1:-1] - grid.left) / grid.length)
    F = _residual(p, N, h)
    norm = float(np.max(np.abs(F)))
    off = -p.d / h ** 2 * np.ones(m - 1)

    for it in range(1, NEWTON_MAX_ITER + 1):
        if norm < tol:
            return N
        diag = 2.0 * p.d / h ** 2 - p.growth + 2.0 * p.b * N[1:-1]
        J = sp.diags([off, diag, off], [-1, 0, 1], format="csc")
        delta = spsolve(J, -F)
        if not np.all(np.isfinite(delta)):
            raise NewtonStall(f"singular Jacobian at iteration {it}")

        damping = 1.0
        while damping >= NEWTON_MIN_DAMPING:
            trial = N.copy()
            trial[1:-1] += damping * delta
            F_trial = _residual(p, trial, h)
            norm_trial = float(np.max(np.abs(F_trial)))
            if np.all(trial[1:-1] > 0) and norm_trial < norm:
                break
            damping *= 0.5
        else:
            raise NewtonStall(f"no damped step reduces the residual {norm:.3e} at iteration {it}")
        N, F, norm = trial, F_trial, norm_trial
        logger.debug("Newton iteration %d: residual %.3e damping %.3g", it, norm, damping)

    if norm < tol:
        return N
    raise NewtonStall(f"residual {norm:.3e} above {tol:.1e} after {NEWTON_MAX_ITER} iterations")


def march_tilde_N(p: ModelParams, grid: Grid1D, tol: float = 1e-10,
                  max_steps: int = MARCH_MAX_STEPS) -> np.ndarray:
    """
    Steady state of the Dirichlet logistic equation by explicit time marching

    Raises:
        NewtonStall: Residual still above tol after max_steps (both solvers failed)
    """
    h = grid.spacing
    N = np.full(grid.n, p.N_star)
    N[0] = N[-1] = 0.0
    dt = 0.9 / (2.0 * p.d / h ** 2 + p.growth + 2.0 * p.b * p.N_star)
    for _ in range(max_steps):
        N_new = logistic_step(p, N, h, dt, DIRICHLET)
        change = float(np.max(np.abs(N_new - N))) / dt
        N = N_new
        if change < tol:
            return N
    raise NewtonStall(f"time marching did not reach residual {tol:.1e} in {max_steps} steps")


def tilde_N(p: ModelParams, grid: Grid1D, tol: float = 1e-10) -> Union[np.ndarray, Extinct]:
    """
    Positive Dirichlet steady state of the logistic equation

    Args:
        p: Model parameters
        grid: Interval grid (end values are 0)
        tol: Sup-norm residual tolerance

    Returns:
        Grid function N~ (zero at the ends) or Extinct when lambda1(beta - a) >= 0

    Raises:
        NewtonStall: Newton and the time-marching fallback both failed
    """
    lam = lambda1_local(p.beta - p.a, p.d, grid)
    if lam >= 0:
        return Extinct(lambda1=lam)
    try:
        return _newton(p, grid, tol)
    except NewtonStall as e:
        logger.warning("Newton failed (%s); falling back to time marching", e)
        return march_tilde_N(p, grid, tol)


# ============================================================================
# Existence Check
# ============================================================================

def _start_data(p: ModelParams, grid: Grid1D) -> List[tuple]:
    base = p.N_star
    x = (grid.nodes - grid.left) / grid.length
    skew = np.sin(np.pi * x) * (1.0 + 0.5 * x)
    skew[0] = skew[-1] = 0.0
    return [
        ("sine_high", sine_init(0.8 * base, 0.2 * base, grid)),
        ("sine_low", sine_init(0.3 * base, 0.05 * base, grid)),
        ("skewed", FieldState(0.0, 0.5 * base * skew, 0.5 * base * skew, np.zeros(grid.n), grid)),
    ]


def existence_check(p: ModelParams, kernel: KernelMatrix, grid: Optional[Grid1D] = None,
                    T: float = EXISTENCE_HORIZON, runs: bool = True) -> SteadyReport:
    """
    Predict and probe existence of a positive Dirichlet steady state

    Prediction: lambda1(beta - a) < 0 and lambda1 of -d phi'' - k N~ P[phi] + (gamma + beta + b N~) phi
    is negative. The dynamics are then marched from three positive initial data.

    Args:
        p: Model parameters
        kernel: Symmetric kernel on the grid
        grid: Defaults to the kernel grid
        T: Horizon of each probe run
        runs: Skip the probe runs when False

    Returns:
        SteadyReport
    """
    grid = grid or kernel.grid
    if not kernel.symmetric:
        logger.warning("existence prediction assumes a symmetric kernel; got asymmetry %.2e",
                       kernel.normalization_report.max_asymmetry)

    lam_local = lambda1_local(p.beta - p.a, p.d, grid)
    N_tilde = tilde_N(p, grid)
    if isinstance(N_tilde, Extinct):
        N_tilde = np.zeros(grid.n)

    problem = EigenProblem(d=p.d, c1=p.k * N_tilde, c2=p.gamma + p.beta + p.b * N_tilde,
                           grid=grid, kernel=kernel)
    lam_nonlocal = principal_eigenvalue(problem).lambda1
    predicted = lam_local < 0 and lam_nonlocal < 0
    logger.info("existence check: lambda1(beta-a)=%.6g lambda1(P,N~)=%.6g predicted=%s",
                lam_local, lam_nonlocal, predicted)

    report = SteadyReport(
        converged=False, residual=math.inf,
        lambda1_local_check=lam_local, lambda1_nonlocal_check=lam_nonlocal,
        exists_predicted=predicted,
    )
    if not runs:
        return report

    finals = []
    for label, init in _start_data(p, grid):
        traj = simulate_dirichlet(p, kernel, init, T, stop_at_steady=True)
        final = traj.final
        I_max = float(np.max(final.I))
        report.runs.append(SteadyRun(
            label=label, converged=traj.converged, t_final=final.t, residual=traj.residual,
            I_max=I_max, positive=I_max > EXTINCTION_LEVEL,
        ))
        finals.append(final)

    first = finals[0]
    report.final = FieldSnapshot(t=first.t, x=grid.nodes.tolist(), S=first.S.tolist(),
                                 I=first.I.tolist(), R=first.R.tolist())
    report.converged = all(r.converged for r in report.runs)
    report.residual = max(r.residual for r in report.runs)
    report.pairwise_agreement = max(
        float(max(np.max(np.abs(u.S - v.S)), np.max(np.abs(u.I - v.I)), np.max(np.abs(u.R - v.R))))
        for i, u in enumerate(finals) for v in finals[i + 1:]
    )
    report.empirical_exists = all(r.positive for r in report.runs)
    report.agrees_with_prediction = (
        report.empirical_exists == predicted
        and (predicted or not any(r.positive for r in report.runs))
    )
    return report
