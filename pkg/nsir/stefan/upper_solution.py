"""
Stefan - Upper-Solution Certificate for Vanishing at Small mu

Builds sigma(t) = 1 + 2 delta - delta e^{-delta t}, s(t) = h0 sigma(t) and
Ibar(t, x) = A e^{-delta t} phi(x / sigma(t)), phi the principal eigenfunction
with c1 = k((a-beta)/b + eps), c2 = gamma + beta on (-h0, h0), and samples the
three inequalities that make (Ibar, -s, s) an upper solution:

- the differential inequality for I on |x| < s(t)
- the front inequality s' >= -mu0 Ibar_x(t, s(t))
- the initial ordering Ibar(0, x) >= I0(x) on [-h0, h0]
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from ..kernel.operators import build_kernel, convolution_profile
from ..shared.errors import EigenvaluePositivityFailure, PreconditionViolated, UnsupportedKernel
from ..shared.grid import Grid1D
from ..shared.models import CheckResult, KernelSpec, ModelParams, UpperSolutionReport
from ..spectral.eigen import EigenProblem, principal_eigenvalue
from .solver import FreeBoundaryInit

logger = logging.getLogger(__name__)

AMPLITUDE_MARGIN = 1.1


def upper_solution_check(p: ModelParams, kernel_spec: KernelSpec, init: FreeBoundaryInit,
                         delta: float = 0.05, A_amp: Optional[float] = None, eps: float = 0.3,
                         n_space: int = 200, n_time: int = 200,
                         T_check: Optional[float] = None) -> UpperSolutionReport:
    """
    Construct the upper solution and report the slack of each inequality

    Args:
        p: Model parameters (h0 is the initial half-span)
        kernel_spec: Convolution kernel
        init: Initial data (I0 is compared against the upper solution)
        delta: Growth parameter of sigma, in (0, 1/2)
        A_amp: Amplitude; default 1.1 times the smallest admissible one
        eps: Margin on the susceptible level in c1
        n_space: Space samples (eigen grid nodes)
        n_time: Time samples t_j = T_check j / n_time, j = 1..n_time
        T_check: Sampled horizon; default 10 / delta

    Returns:
        UpperSolutionReport with mu0 = h0 delta^2 (1 + delta) / (A |phi'(+-h0)|)

    Raises:
        EigenvaluePositivityFailure: lambda_eps <= 0
        PreconditionViolated: delta outside (0, 1/2)
    """
    if not kernel_spec.translation_invariant:
        raise UnsupportedKernel("upper solution needs a convolution kernel with normalization None", "kernel")
    if not 0 < delta < 0.5:
        raise PreconditionViolated(f"delta={delta} must lie in (0, 1/2)")

    h0, d = init.h0, p.d
    c = p.k * p.N_star
    c_eps = p.k * (p.N_star + eps)
    c2 = p.gamma + p.beta

    grid = Grid1D(-h0, h0, n_space)
    kernel = build_kernel(kernel_spec, grid)
    eig = principal_eigenvalue(EigenProblem(d=d, c1=c_eps, c2=c2, grid=grid, kernel=kernel))
    lam = eig.lambda1
    if lam <= 0:
        raise EigenvaluePositivityFailure(f"lambda_eps={lam:.6g} <= 0 at h0={h0}, eps={eps}")

    z = grid.nodes
    w = grid.weights
    phi = eig.phi
    dphi = np.gradient(phi, grid.spacing, edge_order=2)
    # phi'' from the eigen relation, valid up to the end nodes
    d2phi = -(lam * phi + c_eps * (kernel.samples @ phi) - c2 * phi) / d
    slope = float(max(abs(dphi[0]), abs(dphi[-1])))

    def phi_at(y: np.ndarray) -> np.ndarray:
        return np.interp(y, z, phi, left=0.0, right=0.0)

    x0 = np.linspace(-h0, h0, n_space)
    I0 = np.asarray(init.I0(x0), dtype=float)
    phi0 = phi_at(x0 / (1.0 + delta))
    A_min = float(np.max(I0 / phi0))
    A = AMPLITUDE_MARGIN * A_min if A_amp is None else float(A_amp)
    mu0 = h0 * delta ** 2 * (1.0 + delta) / (A * slope)

    T_check = 10.0 / delta if T_check is None else T_check
    times = T_check * np.arange(1, n_time + 1) / n_time
    sigma = 1.0 + 2.0 * delta - delta * np.exp(-delta * times)
    sigma_dot = delta ** 2 * np.exp(-delta * times)

    J, _ = convolution_profile(kernel_spec)
    diff = np.subtract.outer(z, z)
    slack_pde = np.inf
    for sg, sgd in zip(sigma, sigma_dot):
        pressure = sg * (J(sg * diff) @ (w * phi))
        residual = (-delta * phi - dphi * z * sgd / sg - d * d2phi / sg ** 2
                    - c * pressure + c2 * phi)
        slack_pde = min(slack_pde, float(np.min(residual)))

    decay = np.exp(-delta * times)
    s_dot = h0 * sigma_dot
    front_gradient = A * decay * slope / sigma
    slack_front = float(np.min(s_dot - mu0 * front_gradient))
    slack_initial = float(np.min(A * phi0 - I0))

    checks = [
        CheckResult(name="pde_inequality", passed=slack_pde > 0, value=slack_pde, limit=0.0,
                    detail="min of the differential residual divided by A e^{-delta t}"),
        CheckResult(name="front_inequality", passed=slack_front > 0, value=slack_front, limit=0.0,
                    detail="min of s' - mu0 |Ibar_x(t, +-s)|"),
        CheckResult(name="initial_ordering", passed=slack_initial >= 0, value=slack_initial, limit=0.0,
                    detail=f"A={A:.6g}, smallest admissible A={A_min:.6g}"),
    ]
    logger.info("upper solution: lambda_eps=%.6g A=%.4g mu0=%.4g slacks pde=%.3e front=%.3e initial=%.3e",
                lam, A, mu0, slack_pde, slack_front, slack_initial)
    return UpperSolutionReport(
        lambda_eps=lam, eps=eps, delta=delta, A_amp=A, A_min=A_min, phi_slope=slope, mu0=mu0,
        slack_pde=slack_pde, slack_front=slack_front, slack_initial=slack_initial,
        n_space=n_space, n_time=n_time, checks=checks,
    )
