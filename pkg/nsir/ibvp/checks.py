"""
IBVP - Runtime Invariant Checks

Handles:
- Positivity and the global bound S + I + R <= M along a trajectory
- The N-reduction: recorded S + I + R against an independent scalar logistic run
- The comparison sandwich between a Neumann run and the comparison ODE system

Every check reports; none raises on a violation.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from ..kinetics.comparison import ComparisonState, ComparisonTrajectory, solve_comparison_system
from ..shared.errors import ConfigInvalid
from ..shared.models import CheckReport, CheckResult, ModelParams
from .solver import NEUMANN, Trajectory, logistic_step

logger = logging.getLogger(__name__)

POSITIVITY_TOL = 1e-12
BOUND_TOL = 1e-10
REDUCTION_TOL = 1e-12
CONSTANT_DATA_TOL = 1e-10


def _worst(value: float) -> float:
    return float(value) if np.isfinite(value) else float("inf")


def scalar_reduction(trajectory: Trajectory, p: Optional[ModelParams] = None) -> np.ndarray:
    """Scalar logistic PDE integrated with the run's grid, dt and closure, at the recorded steps"""
    p = p or trajectory.params
    h = trajectory.grid.spacing
    N = trajectory.N[0].copy()
    out = np.empty_like(trajectory.N)
    out[0] = N
    row = 1
    for step in range(1, int(trajectory.steps[-1]) + 1):
        N = logistic_step(p, N, h, trajectory.dt, trajectory.boundary)
        if row < len(trajectory.steps) and trajectory.steps[row] == step:
            out[row] = N
            row += 1
    return out


def verify_bounds(trajectory: Trajectory, p: Optional[ModelParams] = None) -> CheckReport:
    """
    Check positivity, the M-bound and the N-reduction identity of a run

    Args:
        trajectory: Neumann or Dirichlet trajectory
        p: Parameters (defaults to the run's)

    Returns:
        CheckReport with checks positivity, bound_M and n_reduction
    """
    p = p or trajectory.params
    finite = bool(np.all(np.isfinite(trajectory.S)) and np.all(np.isfinite(trajectory.I))
                  and np.all(np.isfinite(trajectory.R)))

    low = min(trajectory.min_value, float(np.min([trajectory.S.min(), trajectory.I.min(), trajectory.R.min()])))
    low = low if np.isfinite(low) and finite else -float("inf")
    positivity = CheckResult(
        name="positivity", passed=bool(low >= -POSITIVITY_TOL), value=low, limit=-POSITIVITY_TOL,
        detail="" if low >= -POSITIVITY_TOL else "a component went negative (step too large?)",
    )

    init = trajectory.initial
    M = max(float(np.max(init.S + init.I + init.R)), p.N_star)
    peak = max(trajectory.max_N, float(np.max(trajectory.N)))
    peak = peak if np.isfinite(peak) and finite else float("inf")
    bound = CheckResult(
        name="bound_M", passed=bool(peak <= M + BOUND_TOL), value=peak, limit=M + BOUND_TOL,
        detail=f"M = max(sup N0, (a-beta)/b) = {M:.17g}",
    )

    reference = scalar_reduction(trajectory, p)
    scale = max(float(np.max(np.abs(reference))), np.finfo(float).tiny)
    deviation = _worst(np.max(np.abs(trajectory.N - reference)) / scale) if finite else float("inf")
    reduction = CheckResult(
        name="n_reduction", passed=bool(deviation <= REDUCTION_TOL), value=deviation, limit=REDUCTION_TOL,
        detail="relative to the largest scalar value",
    )

    report = CheckReport(report="verify_bounds", checks=[positivity, bound, reduction])
    for c in report.failed():
        logger.warning("verify_bounds: %s failed (value=%s limit=%s)", c.name, c.value, c.limit)
    return report


# ============================================================================
# Comparison Sandwich
# ============================================================================

def _is_constant(u: np.ndarray) -> bool:
    return float(np.max(u) - np.min(u)) == 0.0


def comparison_for(trajectory: Trajectory, method: Optional[str] = None) -> ComparisonTrajectory:
    """
    Comparison system started from the extremes of the run's initial data, stepped with the run's dt

    Spatially constant data use the Euler variant so both schemes coincide.

    Raises:
        ConfigInvalid: Dirichlet run or initial data without a positive minimum
    """
    if trajectory.boundary != NEUMANN:
        raise ConfigInvalid("the comparison sandwich applies to Neumann runs", "model")
    init = trajectory.initial
    N0, V0, I0 = init.N, init.S + init.I, init.I
    if min(N0.min(), V0.min(), I0.min()) <= 0:
        raise ConfigInvalid("comparison system needs positive initial minima", "init")
    if method is None:
        method = "euler" if all(_is_constant(u) for u in (init.S, init.I, init.R)) else "rk4"
    state = ComparisonState(Vbar=float(V0.max()), Vunder=float(V0.min()),
                            Ibar=float(I0.max()), Iunder=float(I0.min()), t=init.t)
    T = float(trajectory.t[-1] - trajectory.t[0])
    return solve_comparison_system(trajectory.params, state, (float(N0.max()), float(N0.min())),
                                   T=T, dt=trajectory.dt, record_every=1, method=method)


def envelope_check(trajectory: Trajectory, comparison: Optional[ComparisonTrajectory] = None,
                   tol: Optional[float] = None) -> CheckReport:
    """
    Check g - tol <= N <= f + tol, Vunder - tol <= S + I <= Vbar + tol and Iunder - tol <= I <= Ibar + tol

    Args:
        trajectory: Neumann trajectory
        comparison: Comparison trajectory; built with comparison_for when omitted
        tol: Default 1e-6 + 10 dt

    Returns:
        CheckReport with checks N_sandwich, V_sandwich, I_sandwich (and
        constant_data_deviation for spatially constant data)
    """
    comparison = comparison or comparison_for(trajectory)
    tol = 1e-6 + 10.0 * trajectory.dt if tol is None else tol
    t_rel = trajectory.t - trajectory.t[0]

    def at(series: np.ndarray) -> np.ndarray:
        return np.interp(t_rel, comparison.t, series)[:, np.newaxis]

    f, g = at(comparison.f), at(comparison.g)
    Vbar, Vunder = at(comparison.states[:, 0]), at(comparison.states[:, 1])
    Ibar, Iunder = at(comparison.states[:, 2]), at(comparison.states[:, 3])
    N, V, I = trajectory.N, trajectory.S + trajectory.I, trajectory.I

    checks = []
    for name, u, lower, upper in (("N_sandwich", N, g, f), ("V_sandwich", V, Vunder, Vbar),
                                  ("I_sandwich", I, Iunder, Ibar)):
        excess = _worst(max(np.max(lower - u), np.max(u - upper)))
        checks.append(CheckResult(name=name, passed=bool(excess <= tol), value=excess, limit=tol,
                                  detail="largest excursion outside the comparison envelope"))

    if comparison.method == "euler":
        deviation = _worst(max(np.max(np.abs(N - f)), np.max(np.abs(N - g)),
                               np.max(np.abs(V - Vbar)), np.max(np.abs(V - Vunder)),
                               np.max(np.abs(I - Ibar)), np.max(np.abs(I - Iunder))))
        checks.append(CheckResult(name="constant_data_deviation", passed=bool(deviation < CONSTANT_DATA_TOL),
                                  value=deviation, limit=CONSTANT_DATA_TOL,
                                  detail="PDE against the Euler comparison system"))

    report = CheckReport(report="envelope_check", checks=checks)
    for c in report.failed():
        logger.warning("envelope_check: %s failed (value=%s limit=%s)", c.name, c.value, c.limit)
    return report
