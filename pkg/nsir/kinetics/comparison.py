"""
Kinetics - Comparison ODE System and Lyapunov Diagnostic

The four-component system bounds V = S + I and I of the Neumann problem
from above and below:

    Vbar'   = a f - gamma Iunder - (beta + b g) Vbar
    Vunder' = a g - gamma Ibar   - (beta + b f) Vunder
    Ibar'   = k Ibar (Vbar - Ibar)     - (gamma + beta + b g) Ibar
    Iunder' = k Iunder (Vunder - Iunder) - (gamma + beta + b f) Iunder

with f, g the logistic envelopes started from max / min of N0.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..shared.errors import NonpositiveI, PreconditionViolated, StepSizeTooLarge
from ..shared.models import ModelParams
from .equilibria import Equilibria, logistic_envelope

logger = logging.getLogger(__name__)

MAX_HALVINGS = 10


# ============================================================================
# Domain Types
# ============================================================================

@dataclass(frozen=True)
class ComparisonState:
    Vbar: float
    Vunder: float
    Ibar: float
    Iunder: float
    t: float = 0.0

    def as_tuple(self) -> Tuple[float, float, float, float]:
        return (self.Vbar, self.Vunder, self.Ibar, self.Iunder)


@dataclass
class ComparisonTrajectory:
    t: np.ndarray
    states: np.ndarray   # (n_records, 4): Vbar, Vunder, Ibar, Iunder
    f: np.ndarray
    g: np.ndarray
    dt: float
    method: str

    def state(self, i: int) -> ComparisonState:
        Vb, Vu, Ib, Iu = (float(v) for v in self.states[i])
        return ComparisonState(Vb, Vu, Ib, Iu, float(self.t[i]))

    @property
    def final(self) -> ComparisonState:
        return self.state(-1)


# ============================================================================
# Right-hand side
# ============================================================================

def _rhs(p: ModelParams, y, f: float, g: float):
    Vb, Vu, Ib, Iu = y
    a, beta, b, k, gam = p.a, p.beta, p.b, p.k, p.gamma
    return (
        a * f - gam * Iu - (beta + b * g) * Vb,
        a * g - gam * Ib - (beta + b * f) * Vu,
        k * Ib * (Vb - Ib) - (gam + beta + b * g) * Ib,
        k * Iu * (Vu - Iu) - (gam + beta + b * f) * Iu,
    )


def default_dt(p: ModelParams, cap: float) -> float:
    """1e-3 * min(1 / (a + gamma + k*cap), 1)"""
    return 1e-3 * min(1.0 / (p.a + p.gamma + p.k * cap), 1.0)


def _rk4_step(p, y, t, dt, envelopes):
    f0, g0 = envelopes
    fa, ga = logistic_envelope(f0, p, t), logistic_envelope(g0, p, t)
    fm, gm = logistic_envelope(f0, p, t + 0.5 * dt), logistic_envelope(g0, p, t + 0.5 * dt)
    fb, gb = logistic_envelope(f0, p, t + dt), logistic_envelope(g0, p, t + dt)
    k1 = _rhs(p, y, fa, ga)
    k2 = _rhs(p, tuple(yi + 0.5 * dt * ki for yi, ki in zip(y, k1)), fm, gm)
    k3 = _rhs(p, tuple(yi + 0.5 * dt * ki for yi, ki in zip(y, k2)), fm, gm)
    k4 = _rhs(p, tuple(yi + dt * ki for yi, ki in zip(y, k3)), fb, gb)
    return tuple(yi + dt / 6.0 * (a + 2.0 * b + 2.0 * c + d)
                 for yi, a, b, c, d in zip(y, k1, k2, k3, k4))


# ============================================================================
# Operations
# ============================================================================

def solve_comparison_system(p: ModelParams, init: ComparisonState, envelopes: Tuple[float, float],
                            T: float, dt: Optional[float] = None, record_every: int = 1,
                            method: str = "rk4") -> ComparisonTrajectory:
    """
    Integrate the comparison system

    Args:
        p: Model parameters
        init: Positive initial state
        envelopes: (f0, g0) with f0 >= g0 > 0
        T: Horizon
        dt: Step; default 1e-3 * min(1/(a+gamma+k*cap), 1)
        record_every: Steps between recorded states
        method: "rk4" (closed-form envelopes) or "euler" (envelopes also Euler-integrated)

    Returns:
        ComparisonTrajectory

    Raises:
        StepSizeTooLarge: Positivity lost after halving the step 10 times
        PreconditionViolated: Envelopes, initial state or method not admissible
    """
    f0, g0 = float(envelopes[0]), float(envelopes[1])
    if not (f0 >= g0 > 0):
        raise PreconditionViolated(f"envelopes must satisfy f0 >= g0 > 0, got ({f0}, {g0})")
    y = init.as_tuple()
    if min(y) <= 0:
        raise PreconditionViolated(f"initial comparison state must be positive, got {y}")
    if method not in ("rk4", "euler"):
        raise PreconditionViolated(f"unknown method {method!r}")

    cap = max(max(y), f0, p.N_star)
    dt = float(dt) if dt is not None else default_dt(p, cap)
    n_steps = max(1, int(math.ceil(T / dt - 1e-9)))
    record_every = max(1, int(record_every))

    times, states, fs, gs = [0.0], [y], [f0], [g0]
    t = 0.0
    f_e, g_e = f0, g0
    r = p.growth

    for step in range(1, n_steps + 1):
        if method == "euler":
            y_new = tuple(yi + dt * ki for yi, ki in zip(y, _rhs(p, y, f_e, g_e)))
            f_e = f_e + dt * (r - p.b * f_e) * f_e
            g_e = g_e + dt * (r - p.b * g_e) * g_e
            if min(y_new) <= 0:
                raise StepSizeTooLarge(f"Euler step dt={dt:.3g} lost positivity at t={t:.6g}")
            y = y_new
            t = step * dt
        else:
            h = dt
            for _ in range(MAX_HALVINGS + 1):
                y_new = y
                t_sub = t
                n_sub = int(round(dt / h))
                for _ in range(n_sub):
                    y_new = _rk4_step(p, y_new, t_sub, h, (f0, g0))
                    t_sub += h
                if min(y_new) > 0:
                    break
                h *= 0.5
            else:
                raise StepSizeTooLarge(f"positivity lost at t={t:.6g} even with dt={h * 2:.3g}")
            y = y_new
            t = step * dt

        if step % record_every == 0 or step == n_steps:
            times.append(t)
            states.append(y)
            if method == "euler":
                fs.append(f_e)
                gs.append(g_e)
            else:
                fs.append(logistic_envelope(f0, p, t))
                gs.append(logistic_envelope(g0, p, t))

    return ComparisonTrajectory(
        t=np.array(times), states=np.array(states), f=np.array(fs), g=np.array(gs),
        dt=dt, method=method,
    )


def lyapunov_weight(p: ModelParams, trajectory: ComparisonTrajectory) -> float:
    """10 (a + b + gamma + k) (1 + max component)^2 over the recorded trajectory"""
    peak = float(np.max(trajectory.states))
    return 10.0 * (p.a + p.b + p.gamma + p.k) * (1.0 + peak) ** 2


def lyapunov_F(s: ComparisonState, eq: Equilibria, lambda_weight: float, p: ModelParams,
               t: Optional[float] = None) -> float:
    """
    F = 1/2 (Vbar-V*)^2 + 1/2 (Vunder-V*)^2 + gamma/k [G(Ibar) + G(Iunder)] + lambda e^{-(a-beta) t}

    with G(s) = (s - I*) - I* ln(s / I*).

    Raises:
        NonpositiveI: Ibar or Iunder is not positive
        PreconditionViolated: No endemic equilibrium
    """
    if eq.E2 is None:
        raise PreconditionViolated("Lyapunov functional needs the endemic equilibrium (R01 > 1)")
    if s.Ibar <= 0 or s.Iunder <= 0:
        raise NonpositiveI(f"Ibar={s.Ibar}, Iunder={s.Iunder} must be positive")
    t = s.t if t is None else t
    V_star, I_star = eq.V_star, eq.I_star

    def G(x: float) -> float:
        return (x - I_star) - I_star * math.log(x / I_star)

    return (0.5 * (s.Vbar - V_star) ** 2 + 0.5 * (s.Vunder - V_star) ** 2
            + p.gamma / p.k * (G(s.Ibar) + G(s.Iunder))
            + lambda_weight * math.exp(-p.growth * t))


def lyapunov_series(trajectory: ComparisonTrajectory, eq: Equilibria, lambda_weight: float,
                    p: ModelParams) -> np.ndarray:
    return np.array([lyapunov_F(trajectory.state(i), eq, lambda_weight, p) for i in range(len(trajectory.t))])


def lyapunov_descent(trajectory: ComparisonTrajectory, eq: Equilibria, p: ModelParams,
                     t_min: float = 1.0, lambda_weight: Optional[float] = None) -> float:
    """Worst per-record increase F(t_{n+1}) - F(t_n) for t_n >= t_min (<= 0 means descent)"""
    weight = lyapunov_weight(p, trajectory) if lambda_weight is None else lambda_weight
    F = lyapunov_series(trajectory, eq, weight, p)
    mask = trajectory.t[:-1] >= t_min
    if not np.any(mask):
        return 0.0
    return float(np.max(np.diff(F)[mask]))
