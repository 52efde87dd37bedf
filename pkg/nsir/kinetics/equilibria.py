"""
Kinetics - Equilibria, Reproduction Number and Logistic Envelopes

Closed forms for the spatially homogeneous problem:
- R01 = k(a-beta) / (b(a+gamma))
- E0, E1 and the endemic equilibrium E2 (present iff R01 > 1)
- Exact logistic solutions bounding the total population
- Margin of the quadratic form that controls the Lyapunov derivative
"""

from __future__ import annotations

import math
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from ..shared.errors import PreconditionViolated
from ..shared.models import ModelParams


Triple = Tuple[float, float, float]


class Equilibria(BaseModel):
    E0: Triple = Field(default=(0.0, 0.0, 0.0), description="Extinction state")
    E1: Triple = Field(description="Disease-free state ((a-beta)/b, 0, 0)")
    E2: Optional[Triple] = Field(default=None, description="Endemic state (S*, I*, R*) when R01 > 1")
    N_star: float = Field(description="(a-beta)/b")
    R01: float

    @property
    def V_star(self) -> Optional[float]:
        """S* + I*"""
        if self.E2 is None:
            return None
        return self.E2[0] + self.E2[1]

    @property
    def I_star(self) -> Optional[float]:
        return None if self.E2 is None else self.E2[1]


def r01(p: ModelParams) -> float:
    """Basic reproduction number k(a-beta) / (b(a+gamma))"""
    return p.k * p.growth / (p.b * (p.a + p.gamma))


def equilibria(p: ModelParams) -> Equilibria:
    """Closed-form equilibria; E2 omitted when R01 <= 1"""
    R01 = r01(p)
    N_star = p.N_star
    E2 = None
    if R01 > 1.0:
        excess = p.k * p.growth - p.b * (p.a + p.gamma)
        denom = p.b * p.k * (p.a + p.gamma)
        S = (p.a + p.gamma) / p.k
        I = p.a * excess / denom
        R = p.gamma * excess / denom
        E2 = (S, I, R)
    return Equilibria(E1=(N_star, 0.0, 0.0), E2=E2, N_star=N_star, R01=R01)


def logistic_envelope(n0: float, p: ModelParams, t):
    """
    Exact solution of u' = (a - beta - b u) u with u(0) = n0

    Args:
        n0: Initial value (> 0)
        p: Model parameters
        t: Time (scalar or array)

    Returns:
        Envelope value(s) with the shape of t
    """
    if n0 <= 0:
        raise PreconditionViolated(f"n0={n0} must be positive")
    r = p.growth
    t_arr = np.asarray(t, dtype=float)
    value = r * n0 / (p.b * n0 + (r - p.b * n0) * np.exp(-r * t_arr))
    return float(value) if value.ndim == 0 else value


def quadratic_form(p: ModelParams) -> np.ndarray:
    """
    Symmetric matrix Q with dF/dt <= -z^T Q z near E2

    z = (Vbar - V*, Vunder - V*, Ibar - I*, Iunder - I*), envelopes at N*.
    """
    a, g = p.a, p.gamma
    h = 0.5 * g
    return np.array([
        [a, 0.0, -h, h],
        [0.0, a, h, -h],
        [-h, h, g, 0.0],
        [h, -h, 0.0, g],
    ])


def quadratic_form_margin(p: ModelParams) -> float:
    """Smallest eigenvalue of Q; positive exactly when a > gamma"""
    return float(np.linalg.eigvalsh(quadratic_form(p))[0])


def quadratic_form_margin_closed(p: ModelParams) -> float:
    """(a + gamma - sqrt((a - gamma)^2 + 4 gamma^2)) / 2"""
    a, g = p.a, p.gamma
    return 0.5 * (a + g - math.sqrt((a - g) ** 2 + 4.0 * g * g))
