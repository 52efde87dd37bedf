"""
Stefan - Front-Fixing Solver for the Free-Boundary Problem

The line is truncated to [-L, L] and split into three patches that follow the
fronts: [-L, g(t)], [g(t), h(t)] and [h(t), L]. Each patch keeps a fixed number
of nodes mapped affinely from xi in [0, 1], and neighbouring patches share
the front nodes. S lives on every node; I and R live on the middle patch and
vanish at the fronts and outside.

Handles:
- Node-following explicit updates (central diffusion, upwind advection from node motion)
- Nonlocal infection pressure by trapezoid quadrature over [g, h]
- Front speeds from one-sided second-order differences of I
- Adaptive step, early stop on a span target, domain and collision guards
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, List, Optional, Sequence

import numpy as np

from ..kernel.operators import convolution_profile
from ..shared.errors import CFLViolation, ConfigInvalid, DomainOverrun, FrontCollision, UnsupportedKernel
from ..shared.models import KernelSpec, ModelParams
from ..spectral.thresholds import critical_length, r02

logger = logging.getLogger(__name__)

STEP_SAFETY = 0.9
MAX_DT = 0.05
DEFAULT_RECORDS = 1000
COLLISION_CELLS = 3
EVEN_TOL = 1e-14


# ============================================================================
# Domain Types
# ============================================================================

@dataclass
class FreeBoundaryInit:
    """S0 on the line, I0 on (-h0, h0) with I0(+-h0) = 0; R0 = 0"""
    S0: Callable[[np.ndarray], np.ndarray]
    I0: Callable[[np.ndarray], np.ndarray]
    h0: float
    label: str = "custom"

    def sup_S0(self, L: float, samples: int = 4001) -> float:
        return float(np.max(self.S0(np.linspace(-L, L, samples))))

    def sup_I0(self, samples: int = 4001) -> float:
        return float(np.max(self.I0(np.linspace(-self.h0, self.h0, samples))))

    def is_even(self, L: float, samples: int = 401) -> bool:
        """S0 and I0 agree at x and -x (up to rounding)"""
        x = np.linspace(0.0, L, samples)
        xi = np.linspace(0.0, self.h0, samples)
        S_gap = np.max(np.abs(self.S0(x) - self.S0(-x)))
        I_gap = np.max(np.abs(self.I0(xi) - self.I0(-xi)))
        scale = max(1.0, self.sup_S0(L), self.sup_I0())
        return bool(max(S_gap, I_gap) <= EVEN_TOL * scale)


def cosine_bump_init(h0: float, S_level: float, I_amp: float) -> FreeBoundaryInit:
    """S0 constant, I0 = I_amp cos(pi x / (2 h0)) on [-h0, h0]"""
    if S_level <= 0 or I_amp <= 0:
        raise ConfigInvalid("cosine bump needs positive S_level and I_amp", "init")

    def S0(x: np.ndarray) -> np.ndarray:
        return np.full(np.shape(x), float(S_level))

    def I0(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.where(np.abs(x) < h0, I_amp * np.cos(0.5 * np.pi * x / h0), 0.0)

    return FreeBoundaryInit(S0=S0, I0=I0, h0=h0, label="cosine_bump")


def tilted_init(init: FreeBoundaryInit, tilt: float) -> FreeBoundaryInit:
    """I0(x) (1 + tilt x / h0): same support and front values, no longer even when tilt != 0"""
    if not -1.0 < tilt < 1.0:
        raise ConfigInvalid(f"tilt={tilt} must lie in (-1, 1) to keep I0 positive", "init.noise")
    base_I0, h0 = init.I0, init.h0

    def I0(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return base_I0(x) * (1.0 + tilt * x / h0)

    return FreeBoundaryInit(S0=init.S0, I0=I0, h0=h0, label=f"{init.label}+tilt")


@dataclass(frozen=True)
class CompositeGrid:
    inner_nodes: int
    outer_nodes: int
    L: float

    @property
    def ig(self) -> int:
        """Index of the left front node"""
        return self.outer_nodes - 1

    @property
    def ih(self) -> int:
        """Index of the right front node"""
        return self.outer_nodes + self.inner_nodes - 2

    @property
    def size(self) -> int:
        return 2 * self.outer_nodes + self.inner_nodes - 2

    @property
    def inner(self) -> slice:
        return slice(self.ig, self.ih + 1)

    @cached_property
    def xi_outer(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.outer_nodes)

    @cached_property
    def xi_inner(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.inner_nodes)

    def nodes(self, g: float, h: float) -> np.ndarray:
        L, xo, xi = self.L, self.xi_outer, self.xi_inner
        return np.concatenate([-L + xo * (g + L), (g + xi * (h - g))[1:], (h + xo * (L - h))[1:]])

    def velocities(self, g_prime: float, h_prime: float) -> np.ndarray:
        xo, xi = self.xi_outer, self.xi_inner
        return np.concatenate([xo * g_prime, ((1.0 - xi) * g_prime + xi * h_prime)[1:],
                               ((1.0 - xo) * h_prime)[1:]])


@dataclass
class FrontState:
    t: float
    g: float
    h: float
    x: np.ndarray
    S: np.ndarray
    I: np.ndarray
    R: np.ndarray
    grid: CompositeGrid

    @property
    def span(self) -> float:
        return self.h - self.g

    @property
    def I_m(self) -> np.ndarray:
        """I on the reference grid xi in [0, 1]"""
        return self.I[self.grid.inner]

    @property
    def R_m(self) -> np.ndarray:
        return self.R[self.grid.inner]

    @property
    def xi(self) -> np.ndarray:
        return self.grid.xi_inner


@dataclass
class FrontTrajectory:
    t: np.ndarray
    g: np.ndarray
    h: np.ndarray
    g_prime: np.ndarray
    h_prime: np.ndarray
    max_I: np.ndarray
    snapshots: List[FrontState]
    params: ModelParams
    kernel_spec: KernelSpec
    L_dom: float
    A_bound: float
    max_N: float
    min_S: float
    min_I: float
    max_asymmetry: float
    monotone: bool
    steps: int
    stop_reason: str = "horizon"
    extra: dict = field(default_factory=dict)

    @property
    def final(self) -> FrontState:
        return self.snapshots[-1]

    @property
    def span(self) -> np.ndarray:
        return self.h - self.g


# ============================================================================
# Discrete Operators on the Composite Grid
# ============================================================================

def _laplacian(u: np.ndarray, dx: np.ndarray) -> np.ndarray:
    lap = np.empty_like(u)
    hl, hr = dx[:-1], dx[1:]
    lap[1:-1] = 2.0 * ((u[2:] - u[1:-1]) / hr - (u[1:-1] - u[:-2]) / hl) / (hl + hr)
    lap[0] = 2.0 * (u[1] - u[0]) / dx[0] ** 2
    lap[-1] = 2.0 * (u[-2] - u[-1]) / dx[-1] ** 2
    return lap


def _advection(u: np.ndarray, v: np.ndarray, dx: np.ndarray) -> np.ndarray:
    """v u_x upwinded in the direction each node moves"""
    slope = np.diff(u) / dx
    fwd = np.append(slope, 0.0)
    bwd = np.insert(slope, 0, 0.0)
    return np.where(v > 0, v * fwd, v * bwd)


def _rate_bound(v: np.ndarray, dx: np.ndarray, d: float) -> np.ndarray:
    diffusion = np.empty(v.size)
    diffusion[1:-1] = 2.0 * d / (dx[:-1] * dx[1:])
    diffusion[0] = 2.0 * d / dx[0] ** 2
    diffusion[-1] = 2.0 * d / dx[-1] ** 2
    h_up = np.where(v > 0, np.append(dx, np.inf), np.insert(dx, 0, np.inf))
    return diffusion + np.abs(v) / h_up


# ============================================================================
# Solver
# ============================================================================

class _FrontModel:
    """Per-run constants and the operations one step needs"""

    def __init__(self, p: ModelParams, kernel_spec: KernelSpec, grid: CompositeGrid):
        self.p = p
        self.grid = grid
        self.J, self.reach = convolution_profile(kernel_spec)

    def pressure(self, x: np.ndarray, I: np.ndarray, g: float, h: float) -> np.ndarray:
        """P[I] at every node; I vanishes outside [g, h]"""
        grid = self.grid
        x_in = x[grid.inner]
        w = np.full(grid.inner_nodes, (h - g) / (grid.inner_nodes - 1))
        w[0] = w[-1] = 0.5 * w[1]
        P = np.zeros_like(x)
        near = (x >= g - self.reach) & (x <= h + self.reach)
        P[near] = self.J(np.subtract.outer(x[near], x_in)) @ (w * I[grid.inner])
        return P

    def speeds(self, I: np.ndarray, g: float, h: float):
        """(g', h') = -mu I_x at the fronts, one-sided second order"""
        grid, mu = self.grid, self.p.mu
        delta = (h - g) / (grid.inner_nodes - 1)
        ig, ih = grid.ig, grid.ih
        g_prime = -mu * (4.0 * I[ig + 1] - I[ig + 2]) / (2.0 * delta)
        h_prime = mu * (4.0 * I[ih - 1] - I[ih - 2]) / (2.0 * delta)
        return min(g_prime, 0.0), max(h_prime, 0.0)


def simulate_free_boundary(p: ModelParams, kernel_spec: KernelSpec, init: FreeBoundaryInit, T: float,
                           inner_nodes: int = 41, outer_nodes: int = 81, L_dom: Optional[float] = None,
                           dt: Optional[float] = None, max_dt: float = MAX_DT,
                           record_interval: Optional[float] = None, snapshot_times: Sequence[float] = (),
                           stop_span: Optional[float] = None) -> FrontTrajectory:
    """
    Solve the free-boundary problem up to T

    Args:
        p: Model parameters (mu is the front coefficient)
        kernel_spec: TopHat or TruncatedGaussian kernel without renormalization
        init: Initial data satisfying I0 > 0 on (-h0, h0), I0(+-h0) = 0
        T: Horizon
        inner_nodes: Nodes on [g, h]
        outer_nodes: Nodes on each outer patch
        L_dom: Truncated half-line; default max(20 h0, 10)
        dt: Fixed step (raises CFLViolation when above the stability bound); default adaptive
        max_dt: Cap on the adaptive step
        record_interval: Time between front records; default T / 1000
        snapshot_times: Times at which full fields are stored (t = 0 and the end always are)
        stop_span: Stop once h - g reaches this value

    Returns:
        FrontTrajectory

    Raises:
        UnsupportedKernel: Kernel is not a plain convolution
        FrontCollision: Initial span below three mean grid cells
        DomainOverrun: A front came within the kernel reach of +-L_dom
        CFLViolation: Fixed dt above the stability bound
    """
    if not kernel_spec.translation_invariant:
        raise UnsupportedKernel("free-boundary runs need a convolution kernel with normalization None", "kernel")
    if T <= 0:
        raise ConfigInvalid(f"T={T} must be positive", "numerics.T")
    if inner_nodes < 5 or outer_nodes < 3:
        raise ConfigInvalid("need at least 5 inner and 3 outer nodes", "numerics.inner_nodes")

    h0 = init.h0
    L = float(L_dom) if L_dom is not None else max(20.0 * h0, 10.0)
    grid = CompositeGrid(inner_nodes, outer_nodes, L)
    model = _FrontModel(p, kernel_spec, grid)
    reach = model.reach
    if L - reach <= h0:
        raise ConfigInvalid(f"L_dom={L} must exceed h0 + kernel reach = {h0 + reach}", "numerics.L_dom")
    mean_cell = 2.0 * L / (grid.size - 1)
    if 2.0 * h0 < COLLISION_CELLS * mean_cell:
        raise FrontCollision(f"initial span {2 * h0:.4g} below {COLLISION_CELLS} grid cells ({mean_cell:.4g} each)")

    g, h = -h0, h0
    x = grid.nodes(g, h)
    S = np.asarray(init.S0(x), dtype=float).copy()
    I = np.zeros(grid.size)
    I[grid.inner] = init.I0(x[grid.inner])
    I[: grid.ig + 1] = 0.0
    I[grid.ih:] = 0.0
    R = np.zeros(grid.size)
    if np.any(S <= 0) or np.any(I[grid.ig + 1: grid.ih] <= 0):
        raise ConfigInvalid("initial data need S0 > 0 on the line and I0 > 0 inside (-h0, h0)", "init")

    A = max(init.sup_S0(L) + init.sup_I0(), p.N_star)
    record_interval = record_interval or T / DEFAULT_RECORDS
    pending_snapshots = sorted(s for s in snapshot_times if 0 < s < T)
    interior = np.zeros(grid.size, dtype=bool)
    interior[grid.ig + 1: grid.ih] = True

    logger.info("free-boundary run: mu=%.4g h0=%.4g L=%.4g nodes=%d T=%.4g", p.mu, h0, L, grid.size, T)

    rec_t, rec_g, rec_h, rec_gp, rec_hp, rec_I = [], [], [], [], [], []
    snapshots: List[FrontState] = [FrontState(0.0, g, h, x.copy(), S.copy(), I.copy(), R.copy(), grid)]
    next_record = 0.0
    max_N = float(np.max(S + I + R))
    min_S, min_I = float(S.min()), float(I.min())
    max_asym = abs(g + h)
    monotone = True
    stop_reason = "horizon"
    t = 0.0
    steps = 0
    next_progress = 0.1 * T

    while t < T * (1.0 - 1e-12):
        g_prime, h_prime = model.speeds(I, g, h)
        if t >= next_record:
            rec_t.append(t); rec_g.append(g); rec_h.append(h)
            rec_gp.append(g_prime); rec_hp.append(h_prime); rec_I.append(float(np.max(I)))
            next_record += record_interval
        if pending_snapshots and t >= pending_snapshots[0]:
            pending_snapshots.pop(0)
            snapshots.append(FrontState(t, g, h, x.copy(), S.copy(), I.copy(), R.copy(), grid))

        dx = np.diff(x)
        v = grid.velocities(g_prime, h_prime)
        P = model.pressure(x, I, g, h)
        N = S + I + R
        reaction = p.beta + p.gamma + 2.0 * p.b * float(np.max(N)) + p.k * float(np.max(P))
        limit = STEP_SAFETY / float(np.max(_rate_bound(v, dx, p.d) + reaction))
        if dt is not None:
            if dt > limit * (1.0 + 1e-12):
                raise CFLViolation(f"dt={dt:.4g} exceeds the stability bound {limit:.4g} at t={t:.6g}")
            step_dt = dt
        else:
            step_dt = min(limit, max_dt)
        step_dt = min(step_dt, T - t)

        loss = p.beta + p.b * N
        infection = p.k * P * S
        S_new = S + step_dt * (p.d * _laplacian(S, dx) + p.a * N - loss * S - infection + _advection(S, v, dx))
        I_new = I + step_dt * (p.d * _laplacian(I, dx) + infection - (p.gamma + loss) * I + _advection(I, v, dx))
        R_new = R + step_dt * (p.d * _laplacian(R, dx) + p.gamma * I - loss * R + _advection(R, v, dx))
        I_new[~interior] = 0.0
        R_new[~interior] = 0.0

        g_new = g + step_dt * g_prime
        h_new = h + step_dt * h_prime
        monotone = monotone and g_new <= g and h_new >= h
        S, I, R, g, h = S_new, I_new, R_new, g_new, h_new
        t += step_dt
        steps += 1
        x = grid.nodes(g, h)

        max_N = max(max_N, float(np.max(S + I + R)))
        min_S = min(min_S, float(S.min()))
        min_I = min(min_I, float(I.min()))
        max_asym = max(max_asym, abs(g + h))

        if h >= L - reach or g <= -(L - reach):
            raise DomainOverrun(
                f"front reached [{g:.4g}, {h:.4g}] at t={t:.6g}; kernel reach {reach:.3g} meets L_dom={L:.4g}")
        if t >= next_progress:
            logger.debug("t=%.4g (%d%%) g=%.6g h=%.6g maxI=%.4g", t, int(100 * t / T), g, h, float(np.max(I)))
            next_progress += 0.1 * T
        if stop_span is not None and h - g >= stop_span:
            stop_reason = "span"
            logger.info("span %.4g reached stop target %.4g at t=%.6g", h - g, stop_span, t)
            break

    g_prime, h_prime = model.speeds(I, g, h)
    rec_t.append(t); rec_g.append(g); rec_h.append(h)
    rec_gp.append(g_prime); rec_hp.append(h_prime); rec_I.append(float(np.max(I)))
    snapshots.append(FrontState(t, g, h, x.copy(), S.copy(), I.copy(), R.copy(), grid))

    return FrontTrajectory(
        t=np.array(rec_t), g=np.array(rec_g), h=np.array(rec_h),
        g_prime=np.array(rec_gp), h_prime=np.array(rec_hp), max_I=np.array(rec_I),
        snapshots=snapshots, params=p, kernel_spec=kernel_spec, L_dom=L, A_bound=A,
        max_N=max_N, min_S=min_S, min_I=min_I, max_asymmetry=max_asym, monotone=monotone,
        steps=steps, stop_reason=stop_reason,
    )


def global_bound_ok(trajectory: FrontTrajectory, tol: float = 1e-8) -> bool:
    """S + I + R <= A + tol over every step"""
    return trajectory.max_N <= trajectory.A_bound + tol


def l_star_for(p: ModelParams, kernel_spec: KernelSpec, tol: float = 1e-6) -> float:
    """Critical length for c1 = k(a-beta)/b, c2 = a + gamma"""
    return critical_length(p.k * p.N_star, p.a + p.gamma, kernel_spec, tol=tol, d=p.d)


def r02_initial(p: ModelParams, kernel_spec: KernelSpec, n: int = 201) -> float:
    """R02(k(a-beta)/b, a + gamma, (-h0, h0))"""
    return r02(p.k * p.N_star, p.a + p.gamma, (-p.h0, p.h0), kernel_spec, d=p.d, n=n)


def span_at(trajectory: FrontTrajectory, t: float) -> float:
    return float(np.interp(t, trajectory.t, trajectory.span))
