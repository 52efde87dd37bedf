"""
IBVP - Method-of-Lines Solver on a Fixed Interval

Handles:
- Neumann problem (mirror ghost nodes) and Dirichlet problem (boundary rows pinned to 0)
- Forward Euler in time, central second differences, explicit reaction and nonlocal term
- Initial-data builders and the total-mass series

Explicit treatment keeps the summed scheme for N = S + I + R identical to the
scalar logistic scheme, which the bound checks rely on.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..kernel.operators import KernelMatrix
from ..kinetics.equilibria import equilibria
from ..shared.errors import CFLViolation, ConfigInvalid, DimensionMismatch, PositivityLoss
from ..shared.grid import Grid1D
from ..shared.models import ModelParams

logger = logging.getLogger(__name__)

NEUMANN = "neumann"
DIRICHLET = "dirichlet"

CFL_SAFETY = 0.9
REACTION_SAFETY = 0.2
DEFAULT_RECORDS = 400
STEADY_TOL = 1e-8
STEADY_WINDOW = 100
POSITIVITY_FLOOR = -1e-12


# ============================================================================
# Domain Types
# ============================================================================

@dataclass
class FieldState:
    t: float
    S: np.ndarray
    I: np.ndarray
    R: np.ndarray
    grid: Grid1D

    def __post_init__(self):
        for name in ("S", "I", "R"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (self.grid.n,):
                raise DimensionMismatch(f"{name} has shape {arr.shape}, grid has n={self.grid.n}")
            setattr(self, name, arr)

    @property
    def N(self) -> np.ndarray:
        return self.S + self.I + self.R

    def copy(self) -> "FieldState":
        return FieldState(self.t, self.S.copy(), self.I.copy(), self.R.copy(), self.grid)


@dataclass
class Trajectory:
    """Recorded states of one run; row i of S/I/R belongs to t[i] and steps[i]"""
    t: np.ndarray
    steps: np.ndarray
    S: np.ndarray
    I: np.ndarray
    R: np.ndarray
    grid: Grid1D
    params: ModelParams
    boundary: str
    dt: float
    n_steps: int
    min_value: float = 0.0
    max_N: float = 0.0
    converged: bool = False
    residual: float = math.inf
    extra: dict = field(default_factory=dict)

    @property
    def N(self) -> np.ndarray:
        return self.S + self.I + self.R

    def state(self, i: int) -> FieldState:
        return FieldState(float(self.t[i]), self.S[i].copy(), self.I[i].copy(), self.R[i].copy(), self.grid)

    @property
    def initial(self) -> FieldState:
        return self.state(0)

    @property
    def final(self) -> FieldState:
        return self.state(-1)

    def sup_distance(self, target) -> float:
        """max over nodes of |(S, I, R)(T) - target| for a constant target triple"""
        S_t, I_t, R_t = target
        return float(max(np.max(np.abs(self.S[-1] - S_t)),
                         np.max(np.abs(self.I[-1] - I_t)),
                         np.max(np.abs(self.R[-1] - R_t))))


# ============================================================================
# Discrete Operators
# ============================================================================

def laplacian(u: np.ndarray, h: float, boundary: str) -> np.ndarray:
    """Second difference; Neumann closes with u_{-1} = u_1, Dirichlet leaves the end rows at 0"""
    lap = np.empty_like(u)
    lap[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h ** 2
    if boundary == NEUMANN:
        lap[0] = 2.0 * (u[1] - u[0]) / h ** 2
        lap[-1] = 2.0 * (u[-2] - u[-1]) / h ** 2
    else:
        lap[0] = 0.0
        lap[-1] = 0.0
    return lap


def bound_M(p: ModelParams, init: FieldState) -> float:
    """max(sup N0, (a - beta)/b)"""
    return max(float(np.max(init.N)), p.N_star)


def stable_dt(p: ModelParams, grid: Grid1D, M: float, kernel_rowmax: float = 1.0) -> float:
    """
    Largest default step keeping the explicit update a nonnegative combination

    min(0.2 / (a + gamma + k M rho), 0.9 / (2d/h^2 + beta + gamma + bM + k M rho)),
    rho the largest row sum of the kernel; never above 0.9 h^2 / (2d).
    """
    h = grid.spacing
    pressure = p.k * M * max(1.0, kernel_rowmax)
    reaction = REACTION_SAFETY / (p.a + p.gamma + pressure)
    combined = CFL_SAFETY / (2.0 * p.d / h ** 2 + p.beta + p.gamma + p.b * M + pressure)
    return min(reaction, combined, cfl_limit(p, grid))


def cfl_limit(p: ModelParams, grid: Grid1D) -> float:
    return CFL_SAFETY * grid.spacing ** 2 / (2.0 * p.d)


def _step(p: ModelParams, K: np.ndarray, S, I, R, h: float, dt: float, boundary: str):
    N = S + I + R
    pressure = p.k * (K @ I) * S
    loss = p.beta + p.b * N
    S_new = S + dt * (p.d * laplacian(S, h, boundary) + p.a * N - p.beta * S - p.b * N * S - pressure)
    I_new = I + dt * (p.d * laplacian(I, h, boundary) + pressure - (p.gamma + loss) * I)
    R_new = R + dt * (p.d * laplacian(R, h, boundary) + p.gamma * I - loss * R)
    if boundary == DIRICHLET:
        for u in (S_new, I_new, R_new):
            u[0] = 0.0
            u[-1] = 0.0
    return S_new, I_new, R_new


def logistic_step(p: ModelParams, N: np.ndarray, h: float, dt: float, boundary: str) -> np.ndarray:
    """One explicit step of N_t = d N_xx + (a - beta) N - b N^2"""
    N_new = N + dt * (p.d * laplacian(N, h, boundary) + p.a * N - p.beta * N - p.b * N * N)
    if boundary == DIRICHLET:
        N_new[0] = 0.0
        N_new[-1] = 0.0
    return N_new


# ============================================================================
# Time Marching
# ============================================================================

def _simulate(p: ModelParams, kernel: KernelMatrix, init: FieldState, T: float, dt: Optional[float],
              boundary: str, record_every: int = 0, stop_at_steady: bool = False,
              strict: bool = True) -> Trajectory:
    grid = init.grid
    if not kernel.grid.same_as(grid):
        raise DimensionMismatch("kernel grid does not match the initial-data grid")
    if T <= 0:
        raise ConfigInvalid(f"T={T} must be positive", "numerics.T")

    h = grid.spacing
    K = kernel.samples
    M = bound_M(p, init)
    rowmax = float(np.max(K.sum(axis=1)))
    limit = cfl_limit(p, grid)

    if dt is None:
        dt = stable_dt(p, grid, M, rowmax)
    elif strict and dt > limit:
        raise CFLViolation(f"dt={dt:.4g} exceeds the diffusion limit 0.9 h^2/(2d) = {limit:.4g}")

    n_steps = max(1, int(math.ceil(T / dt - 1e-9)))
    if record_every <= 0:
        record_every = max(1, n_steps // DEFAULT_RECORDS)

    logger.info("%s run: n=%d dt=%.4g steps=%d M=%.4g", boundary, grid.n, dt, n_steps, M)

    S, I, R = init.S.copy(), init.I.copy(), init.R.copy()
    times, steps, Ss, Is, Rs = [init.t], [0], [S.copy()], [I.copy()], [R.copy()]
    min_value = float(min(S.min(), I.min(), R.min()))
    max_N = float(np.max(S + I + R))
    quiet_steps = 0
    residual = math.inf
    converged = False
    progress_every = max(1, n_steps // 10)
    step = 0

    for step in range(1, n_steps + 1):
        S_new, I_new, R_new = _step(p, K, S, I, R, h, dt, boundary)

        low = float(min(S_new.min(), I_new.min(), R_new.min()))
        if strict and not low >= POSITIVITY_FLOOR:
            raise PositivityLoss(f"value {low:.3e} at step {step} (t={init.t + step * dt:.6g}); reduce dt")
        min_value = min(min_value, low) if np.isfinite(low) else -math.inf
        max_N = max(max_N, float(np.max(S_new + I_new + R_new)))

        residual = float(max(np.max(np.abs(S_new - S)), np.max(np.abs(I_new - I)),
                             np.max(np.abs(R_new - R)))) / dt
        S, I, R = S_new, I_new, R_new

        quiet_steps = quiet_steps + 1 if residual < STEADY_TOL else 0
        if quiet_steps >= STEADY_WINDOW:
            converged = True

        stop = stop_at_steady and converged
        if step % record_every == 0 or step == n_steps or stop:
            times.append(init.t + step * dt)
            steps.append(step)
            Ss.append(S.copy())
            Is.append(I.copy())
            Rs.append(R.copy())

        if step % progress_every == 0:
            logger.debug("t=%.4g (%d%%) residual=%.3e maxI=%.4g", init.t + step * dt,
                         100 * step // n_steps, residual, float(np.max(I)))
        if stop:
            logger.info("steady state reached at t=%.6g", init.t + step * dt)
            break

    return Trajectory(
        t=np.array(times), steps=np.array(steps), S=np.array(Ss), I=np.array(Is), R=np.array(Rs),
        grid=grid, params=p, boundary=boundary, dt=dt, n_steps=step,
        min_value=min_value, max_N=max_N, converged=converged, residual=residual,
        extra={"M": M},
    )


def simulate_neumann(p: ModelParams, kernel: KernelMatrix, init: FieldState, T: float,
                     dt: Optional[float] = None, record_every: int = 0,
                     stop_at_steady: bool = False, strict: bool = True) -> Trajectory:
    """
    Solve the Neumann problem on the kernel's grid

    Args:
        p: Model parameters
        kernel: Row-stochastic kernel (Uniform or normalized) on the run grid
        init: Initial state with S0, I0 > 0
        T: Horizon
        dt: Time step; default from stable_dt
        record_every: Steps between recorded states (0: about 400 records)
        stop_at_steady: Stop once the steady-state detector fires
        strict: Raise on CFL / positivity violations (False lets test fixtures observe them)

    Returns:
        Trajectory

    Raises:
        CFLViolation: dt above 0.9 h^2 / (2d)
        PositivityLoss: A component went negative
    """
    if strict and (np.any(init.S <= 0) or np.any(init.I <= 0)):
        raise ConfigInvalid("Neumann initial data need S0 > 0 and I0 > 0 on the closed interval", "init")
    if kernel.normalization_report.max_row_deviation > 1e-8:
        logger.warning("kernel rows do not integrate to 1 (deviation %.2e); constant states are not fixed points",
                       kernel.normalization_report.max_row_deviation)
    return _simulate(p, kernel, init, T, dt, NEUMANN, record_every, stop_at_steady, strict)


def simulate_dirichlet(p: ModelParams, kernel: KernelMatrix, init: FieldState, T: float,
                       dt: Optional[float] = None, record_every: int = 0,
                       stop_at_steady: bool = False, strict: bool = True) -> Trajectory:
    """
    Solve the Dirichlet problem; boundary nodes stay at 0

    Raises:
        ConfigInvalid: Initial data do not vanish at the boundary nodes
        CFLViolation, PositivityLoss: As for simulate_neumann
    """
    for name in ("S", "I", "R"):
        u = getattr(init, name)
        if abs(u[0]) > 1e-12 or abs(u[-1]) > 1e-12:
            raise ConfigInvalid(f"{name}0 must vanish at the boundary nodes", "init")
    return _simulate(p, kernel, init, T, dt, DIRICHLET, record_every, stop_at_steady, strict)


# ============================================================================
# Initial Data
# ============================================================================

def constant_init(S: float, I: float, R: float, grid: Grid1D) -> FieldState:
    ones = np.ones(grid.n)
    return FieldState(0.0, S * ones, I * ones, R * ones, grid)


def perturbed_init(p: ModelParams, grid: Grid1D, amplitude: float = 0.2) -> FieldState:
    """
    Endemic (or disease-free) levels times 1 + amplitude*cos(pi (x - left) / L), R0 = 0

    Without an endemic equilibrium the levels are (N*, 0.1 N*).
    """
    eq = equilibria(p)
    if eq.E2 is not None:
        S_level, I_level = eq.E2[0], eq.E2[1]
    else:
        S_level, I_level = p.N_star, 0.1 * p.N_star
    bump = 1.0 + amplitude * np.cos(np.pi * (grid.nodes - grid.left) / grid.length)
    return FieldState(0.0, S_level * bump, I_level * bump, np.zeros(grid.n), grid)


def sine_init(S_level: float, I_level: float, grid: Grid1D, R_level: float = 0.0) -> FieldState:
    """Profiles proportional to sin(pi (x - left) / L), vanishing at both ends"""
    shape = np.sin(np.pi * (grid.nodes - grid.left) / grid.length)
    shape[0] = shape[-1] = 0.0
    return FieldState(0.0, S_level * shape, I_level * shape, R_level * shape, grid)


def mass_series(trajectory: Trajectory) -> np.ndarray:
    """Trapezoid integral of N at every recorded time"""
    return trajectory.N @ trajectory.grid.weights
