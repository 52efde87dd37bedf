"""
Stefan - Spreading / Vanishing Classification and the mu Bracket

Handles:
- Finite-horizon verdicts from span, span growth rate and the infected peak
- Automatic horizon doubling on Undecided verdicts
- Bisection on mu between a Vanishing and a Spreading probe
"""

from __future__ import annotations

import logging
from typing import Callable, List, Optional, Tuple

from ..shared.errors import BracketInvalid, UndecidedProbe
from ..shared.models import Classification, KernelSpec, ModelParams, MuBracket, MuProbe, Verdict
from .solver import FreeBoundaryInit, FrontTrajectory, l_star_for, simulate_free_boundary, span_at

logger = logging.getLogger(__name__)

EPS_I = 1e-6
TOL_RATE = 1e-5
SPAN_TOL = 0.05
MAX_DOUBLINGS = 4
MAX_BISECTIONS = 60


def classify(trajectory: FrontTrajectory, l_star: float, tol: float = SPAN_TOL,
             eps_I: float = EPS_I, tol_rate: float = TOL_RATE,
             r02_initial: Optional[float] = None) -> Classification:
    """
    Verdict of a finished run

    Vanishing: span rate < tol_rate, final span <= l* + tol and max I < eps_I.
    Spreading: final span > l* + tol, span rate > 10 tol_rate and max I > eps_I.
    Otherwise Undecided.

    Args:
        trajectory: Completed run
        l_star: Critical length used for the span test
        tol: Span tolerance
        eps_I: Extinction level of I
        tol_rate: Span-rate tolerance (length / time)
        r02_initial: Stored in the result when known

    Returns:
        Classification
    """
    t_final = float(trajectory.t[-1])
    final_span = float(trajectory.span[-1])
    window = 0.1 * t_final
    if window > 0:
        span_rate = (final_span - span_at(trajectory, t_final - window)) / window
    else:
        span_rate = 0.0
    I_max = float(trajectory.max_I[-1])

    if span_rate < tol_rate and final_span <= l_star + tol and I_max < eps_I:
        verdict = Verdict.VANISHING
    elif final_span > l_star + tol and span_rate > 10.0 * tol_rate and I_max > eps_I:
        verdict = Verdict.SPREADING
    else:
        verdict = Verdict.UNDECIDED

    logger.info("mu=%.6g: %s (span=%.6g rate=%.3e maxI=%.3e l*=%.6g)", trajectory.params.mu,
                verdict.value, final_span, span_rate, I_max, l_star)
    return Classification(
        verdict=verdict, final_span=final_span, span_rate=span_rate, I_max_final=I_max,
        l_star_used=l_star, r02_initial=r02_initial, t_final=t_final,
        mu=trajectory.params.mu,
    )


def classify_with_horizon(run: Callable[[float], FrontTrajectory], l_star: float, T: float,
                          max_doublings: int = MAX_DOUBLINGS, **classify_kwargs) -> Classification:
    """
    Classify run(T), doubling T on Undecided up to max_doublings times

    Args:
        run: Callable producing a trajectory for a given horizon
        l_star: Critical length
        T: First horizon
        max_doublings: Horizon doublings allowed
    """
    horizon = T
    for attempt in range(max_doublings + 1):
        result = classify(run(horizon), l_star, **classify_kwargs)
        if result.verdict != Verdict.UNDECIDED:
            return result
        if attempt < max_doublings:
            logger.info("Undecided at T=%.4g; doubling the horizon", horizon)
            horizon *= 2.0
    return result


def default_probe(p: ModelParams, kernel_spec: KernelSpec, init: FreeBoundaryInit, T: float,
                  l_star: Optional[float] = None, max_doublings: int = MAX_DOUBLINGS,
                  stop_span_factor: Optional[float] = 3.0, **simulate_kwargs) -> Callable[[float], Classification]:
    """Probe mu -> Classification built on simulate_free_boundary with horizon doubling"""
    l_star = l_star_for(p, kernel_spec) if l_star is None else l_star
    stop_span = None if stop_span_factor is None else stop_span_factor * l_star

    def probe(mu: float) -> Classification:
        pm = p.with_(mu=mu)

        def run(horizon: float) -> FrontTrajectory:
            return simulate_free_boundary(pm, kernel_spec, init, horizon, stop_span=stop_span, **simulate_kwargs)

        return classify_with_horizon(run, l_star, T, max_doublings=max_doublings)

    return probe


def _monotone(probes: List[MuProbe]) -> bool:
    """Sorted by mu, verdicts switch from Vanishing to Spreading at most once"""
    seen_spreading = False
    for probe in sorted(probes, key=lambda q: q.mu):
        if probe.verdict == Verdict.SPREADING:
            seen_spreading = True
        elif probe.verdict == Verdict.VANISHING and seen_spreading:
            return False
    return True


def critical_mu(p: ModelParams, kernel_spec: KernelSpec, init: FreeBoundaryInit,
                bracket: Tuple[float, float], tol: float, T: float,
                probe: Optional[Callable[[float], Classification]] = None,
                max_iter: int = MAX_BISECTIONS, **probe_kwargs) -> MuBracket:
    """
    Bisect on mu between a Vanishing and a Spreading probe

    Args:
        p: Model parameters (mu is overridden by the probes)
        kernel_spec: Convolution kernel
        init: Free-boundary initial data
        bracket: (mu_lo, mu_hi) with mu_lo < mu_hi
        tol: Stop when mu_hi - mu_lo < tol
        T: Probe horizon
        probe: mu -> Classification; default simulates with horizon doubling
        max_iter: Bisection cap

    Returns:
        MuBracket with every probe recorded

    Raises:
        BracketInvalid: Endpoints do not classify Vanishing / Spreading
        UndecidedProbe: A probe stayed Undecided after all horizon doublings
    """
    mu_lo, mu_hi = float(bracket[0]), float(bracket[1])
    if not 0 < mu_lo < mu_hi:
        raise BracketInvalid(f"bracket ({mu_lo}, {mu_hi}) must satisfy 0 < mu_lo < mu_hi")
    probe = probe or default_probe(p, kernel_spec, init, T, **probe_kwargs)
    probes: List[MuProbe] = []

    def evaluate(mu: float) -> Verdict:
        result = probe(mu)
        probes.append(MuProbe(mu=mu, verdict=result.verdict, final_span=result.final_span, t_final=result.t_final))
        return result.verdict

    lo_verdict = evaluate(mu_lo)
    hi_verdict = evaluate(mu_hi)
    for mu, verdict in ((mu_lo, lo_verdict), (mu_hi, hi_verdict)):
        if verdict == Verdict.UNDECIDED:
            raise UndecidedProbe(mu)
    if lo_verdict != Verdict.VANISHING or hi_verdict != Verdict.SPREADING:
        raise BracketInvalid(
            f"mu_lo={mu_lo} classified {lo_verdict.value}, mu_hi={mu_hi} classified {hi_verdict.value}")

    iterations = 0
    while mu_hi - mu_lo >= tol and iterations < max_iter:
        mid = 0.5 * (mu_lo + mu_hi)
        verdict = evaluate(mid)
        iterations += 1
        if verdict == Verdict.UNDECIDED:
            raise UndecidedProbe(mid)
        if verdict == Verdict.VANISHING:
            mu_lo = mid
        else:
            mu_hi = mid
        logger.info("mu bracket [%.6g, %.6g] after %d bisections", mu_lo, mu_hi, iterations)

    return MuBracket(mu_lo=mu_lo, mu_hi=mu_hi, probes=probes, monotone=_monotone(probes), iterations=iterations)
