"""
Harness - Single Run Dispatch

Handles:
- Building grids, kernels and initial data from a validated RunConfig
- Dispatching to the Neumann / Dirichlet / free-boundary / eigen / threshold solvers
- Writing CSV tables and JSON reports into the run directory
- Returning a RunSummary (results, wall time, failed checks)
"""

import logging
import os
import time
from typing import Any, Dict, List, Optional

import numpy as np

from ..ibvp import (
    DIRICHLET, FieldState, comparison_for, constant_init, envelope_check, existence_check,
    mass_series, perturbed_init, simulate_dirichlet, simulate_neumann, sine_init, tilde_N, verify_bounds,
)
from ..ibvp.steady import Extinct
from ..kernel import build_kernel, normalization_check
from ..kinetics import equilibria, lyapunov_descent, lyapunov_series, lyapunov_weight, r01
from ..shared.config import get_run_path
from ..shared.errors import BracketFailure, ConfigInvalid
from ..shared.grid import Grid1D
from ..shared.io import write_csv, write_json
from ..shared.models import CheckReport, CheckResult, ModelKind, RunConfig, RunSummary
from ..spectral import (
    EigenProblem, critical_length, dense_eigenvalue, lambda1_on_interval, principal_eigenvalue, r02,
)
from ..stefan import (
    FreeBoundaryInit, classify_with_horizon, cosine_bump_init, critical_mu, global_bound_ok,
    l_star_for, r02_initial, simulate_free_boundary, tilted_init, upper_solution_check,
)

logger = logging.getLogger(__name__)

LYAPUNOV_TOL = 1e-10
SYMMETRY_TOL = 1e-10
FRONT_BOUND_TOL = 1e-8


# ============================================================================
# Helpers
# ============================================================================

class _Artifacts:
    """Writes into one run directory, honouring the configured formats"""

    def __init__(self, directory: str, formats: List[str]):
        self.directory = directory
        self.formats = set(formats)
        os.makedirs(directory, exist_ok=True)

    def csv(self, filename: str, header, rows) -> None:
        if 'csv' in self.formats:
            write_csv(os.path.join(self.directory, filename), header, rows)

    def json(self, filename: str, payload: Any) -> None:
        if 'json' in self.formats:
            write_json(os.path.join(self.directory, filename), payload)


def run_directory(config: RunConfig) -> str:
    return config.outputs.directory or get_run_path(config.name)


def _grid(config: RunConfig) -> Grid1D:
    nm = config.numerics
    return Grid1D(nm.left, nm.right, nm.n)


def _with_noise(state: FieldState, config: RunConfig) -> FieldState:
    spec = config.init
    if spec.noise <= 0:
        return state
    rng = np.random.default_rng(spec.seed)
    n = state.grid.n
    S = state.S * (1.0 + spec.noise * rng.uniform(-1.0, 1.0, n))
    I = state.I * (1.0 + spec.noise * rng.uniform(-1.0, 1.0, n))
    return FieldState(state.t, S, I, state.R.copy(), state.grid)


def fixed_interval_init(config: RunConfig, grid: Grid1D) -> FieldState:
    """Initial data for the Neumann / Dirichlet solvers from the init section"""
    p, spec = config.params, config.init
    eq = equilibria(p)
    dirichlet = config.model == ModelKind.DIRICHLET

    if dirichlet:
        if spec.profile in ('constant', 'equilibrium', 'cosine_bump'):
            raise ConfigInvalid(f"profile '{spec.profile}' does not vanish at the boundary", 'init.profile')
        S_level = spec.S_level or 0.8 * p.N_star
        I_level = spec.I_level or 0.2 * p.N_star
        state = sine_init(S_level, I_level, grid)
    elif spec.profile == 'perturbed':
        state = perturbed_init(p, grid, spec.amplitude)
    elif spec.profile == 'constant':
        state = constant_init(spec.S_level or p.N_star, spec.I_level or 0.1 * p.N_star, 0.0, grid)
    elif spec.profile == 'equilibrium':
        if eq.E2 is None:
            raise ConfigInvalid("no endemic equilibrium to start from (R01 <= 1)", 'init.profile')
        state = constant_init(*eq.E2, grid)
    else:
        raise ConfigInvalid(f"profile '{spec.profile}' is not available on a fixed interval", 'init.profile')
    return _with_noise(state, config)


def free_boundary_init(config: RunConfig) -> FreeBoundaryInit:
    p, spec = config.params, config.init
    if spec.profile not in ('cosine_bump', 'perturbed'):
        raise ConfigInvalid(f"profile '{spec.profile}' is not available for free-boundary runs", 'init.profile')
    S_level = spec.S_level or 0.8 * p.N_star
    I_amp = spec.I_level or spec.amplitude * p.N_star
    init = cosine_bump_init(p.h0, S_level, I_amp)
    if spec.noise <= 0:
        return init
    # seeded tilt with magnitude in [noise/2, noise]
    rng = np.random.default_rng(spec.seed)
    tilt = spec.noise * rng.uniform(0.5, 1.0) * rng.choice([-1.0, 1.0])
    return tilted_init(init, float(tilt))


def _rows_at(trajectory, times: List[float]) -> List[int]:
    if not times:
        return list(range(len(trajectory.t)))
    picks = {int(np.argmin(np.abs(trajectory.t - s))) for s in times}
    picks.update({0, len(trajectory.t) - 1})
    return sorted(picks)


def _field_rows(trajectory, indices: List[int]):
    x = trajectory.grid.nodes
    for i in indices:
        t = trajectory.t[i]
        for j in range(x.size):
            yield (t, x[j], trajectory.S[i, j], trajectory.I[i, j], trajectory.R[i, j])


def _summary(config: RunConfig, start: float, directory: str, results: Dict[str, Any],
             reports: List[CheckReport]) -> RunSummary:
    failed = [f"{r.report}.{c.name}" for r in reports for c in r.failed()]
    return RunSummary(
        name=config.name, model=config.model.value, wall_time=time.perf_counter() - start,
        directory=directory, results=results, checks_passed=not failed, failed_checks=failed,
    )


# ============================================================================
# Fixed Interval
# ============================================================================

def _run_neumann(config: RunConfig, out: _Artifacts) -> tuple:
    p, nm = config.params, config.numerics
    grid = _grid(config)
    kernel = build_kernel(config.kernel, grid)
    init = fixed_interval_init(config, grid)
    traj = simulate_neumann(p, kernel, init, nm.T, dt=nm.dt, record_every=nm.record_every,
                            stop_at_steady=nm.stop_at_steady)

    reports = [normalization_check(kernel), verify_bounds(traj)]
    comparison = comparison_for(traj)
    reports.append(envelope_check(traj, comparison))

    eq = equilibria(p)
    F_column = [None] * len(comparison.t)
    if eq.E2 is not None:
        weight = lyapunov_weight(p, comparison)
        F_column = lyapunov_series(comparison, eq, weight, p).tolist()
        if p.a > p.gamma:
            worst = lyapunov_descent(comparison, eq, p, t_min=1.0, lambda_weight=weight)
            reports.append(CheckReport(report="lyapunov", checks=[CheckResult(
                name="lyapunov_descent", passed=worst <= LYAPUNOV_TOL, value=worst, limit=LYAPUNOV_TOL,
                detail=f"largest increase of F after t=1 (lambda={weight:.6g})")]))

    out.csv("trajectory.csv", ["t", "x", "S", "I", "R"],
            _field_rows(traj, _rows_at(traj, config.outputs.snapshot_times)))
    picks = sorted({int(np.argmin(np.abs(comparison.t - s))) for s in traj.t})
    out.csv("comparison.csv", ["t", "Vbar", "Vunder", "Ibar", "Iunder", "f", "g", "F"],
            ((comparison.t[i], *comparison.states[i], comparison.f[i], comparison.g[i], F_column[i])
             for i in picks))
    mass = mass_series(traj)
    out.csv("mass.csv", ["t", "mass"], zip(traj.t, mass))
    for r in reports:
        out.json(f"{r.report}.json", r)

    results = {
        "R01": r01(p), "t_final": float(traj.t[-1]), "dt": traj.dt, "steps": traj.n_steps,
        "converged": traj.converged, "residual": traj.residual,
        "sup_distance_E1": traj.sup_distance(eq.E1),
        "sup_distance_E2": traj.sup_distance(eq.E2) if eq.E2 is not None else None,
        "S_max_final": float(traj.S[-1].max()), "I_max_final": float(traj.I[-1].max()),
        "R_max_final": float(traj.R[-1].max()), "mass_final": float(mass[-1]),
    }
    return results, reports


def _run_dirichlet(config: RunConfig, out: _Artifacts) -> tuple:
    p, nm = config.params, config.numerics
    grid = _grid(config)
    kernel = build_kernel(config.kernel, grid)
    normalization = normalization_check(kernel)
    out.json("normalization.json", normalization)

    if config.dirichlet.task == 'existence':
        report = existence_check(p, kernel, grid, T=nm.T)
        out.json("steady_report.json", report)
        if report.final is not None:
            out.csv("steady_state.csv", ["x", "S", "I", "R"],
                    zip(report.final.x, report.final.S, report.final.I, report.final.R))
        results = {
            "exists_predicted": report.exists_predicted,
            "empirical_exists": report.empirical_exists,
            "agrees_with_prediction": report.agrees_with_prediction,
            "lambda1_local": report.lambda1_local_check,
            "lambda1_nonlocal": report.lambda1_nonlocal_check,
            "pairwise_agreement": report.pairwise_agreement,
        }
        check = CheckReport(report="existence", checks=[CheckResult(
            name="prediction_agreement", passed=bool(report.agrees_with_prediction),
            detail="time-marched outcome against the eigenvalue prediction")])
        out.json("existence.json", check)
        return results, [normalization, check]

    init = fixed_interval_init(config, grid)
    traj = simulate_dirichlet(p, kernel, init, nm.T, dt=nm.dt, record_every=nm.record_every,
                              stop_at_steady=nm.stop_at_steady)
    reports = [normalization, verify_bounds(traj)]
    out.json("verify_bounds.json", reports[1])
    out.csv("trajectory.csv", ["t", "x", "S", "I", "R"],
            _field_rows(traj, _rows_at(traj, config.outputs.snapshot_times)))
    mass = mass_series(traj)
    out.csv("mass.csv", ["t", "mass"], zip(traj.t, mass))

    N_tilde = tilde_N(p, grid)
    extinct = isinstance(N_tilde, Extinct)
    results = {
        "t_final": float(traj.t[-1]), "dt": traj.dt, "steps": traj.n_steps, "boundary": DIRICHLET,
        "mass_final": float(mass[-1]), "extinct_predicted": extinct,
        "S_max_final": float(traj.S[-1].max()), "I_max_final": float(traj.I[-1].max()),
        "R_max_final": float(traj.R[-1].max()),
        "N_tilde_distance": None if extinct else float(np.max(np.abs(traj.N[-1] - N_tilde))),
    }
    return results, reports


# ============================================================================
# Free Boundary
# ============================================================================

def _front_invariants(traj, even: bool) -> CheckReport:
    checks = [CheckResult(name="front_monotonicity", passed=traj.monotone,
                          detail="g nonincreasing and h nondecreasing at every step")]
    if even:
        checks.append(CheckResult(name="symmetry", passed=traj.max_asymmetry < SYMMETRY_TOL,
                                  value=traj.max_asymmetry, limit=SYMMETRY_TOL,
                                  detail="max |g + h| for even data and an even kernel"))
    checks += [
        CheckResult(name="global_bound", passed=global_bound_ok(traj, FRONT_BOUND_TOL), value=traj.max_N,
                    limit=traj.A_bound + FRONT_BOUND_TOL, detail="S + I + R <= A"),
        CheckResult(name="positivity", passed=traj.min_S > 0 and traj.min_I >= -1e-12, value=traj.min_I,
                    limit=-1e-12),
    ]
    return CheckReport(report="free_boundary_invariants", checks=checks)


def _run_stefan(config: RunConfig, out: _Artifacts) -> tuple:
    p, nm, st = config.params, config.numerics, config.stefan
    init = free_boundary_init(config)
    sim_kwargs = dict(inner_nodes=nm.inner_nodes, outer_nodes=nm.outer_nodes, L_dom=nm.L_dom, dt=nm.dt)

    if st.task == 'upper_solution':
        report = upper_solution_check(p, config.kernel, init, delta=st.delta, A_amp=st.A_amp, eps=st.eps)
        out.json("upper_solution.json", report)
        results = {"lambda_eps": report.lambda_eps, "mu0": report.mu0, "A_amp": report.A_amp,
                   "A_min": report.A_min, "slack_pde": report.slack_pde,
                   "slack_front": report.slack_front, "slack_initial": report.slack_initial}
        return results, [CheckReport(report="upper_solution", checks=report.checks)]

    l_star = l_star_for(p, config.kernel)
    stop_span = None if nm.stop_span_factor is None else nm.stop_span_factor * l_star

    if st.task == 'critical_mu':
        bracket = critical_mu(p, config.kernel, init, st.mu_bracket, st.mu_tol, nm.T, l_star=l_star,
                              max_doublings=st.max_doublings, stop_span_factor=nm.stop_span_factor,
                              **sim_kwargs)
        out.json("mu_bracket.json", bracket)
        out.csv("mu_probes.csv", ["mu", "verdict", "final_span", "t_final"],
                ((q.mu, q.verdict.value, q.final_span, q.t_final) for q in bracket.probes))
        results = {"mu_lo": bracket.mu_lo, "mu_hi": bracket.mu_hi, "width": bracket.width,
                   "monotone": bracket.monotone, "iterations": bracket.iterations, "l_star": l_star}
        check = CheckReport(report="mu_bracket", checks=[CheckResult(
            name="monotone_verdicts", passed=bracket.monotone, detail="Vanishing below, Spreading above")])
        return results, [check]

    last = {}

    def run(horizon: float):
        last['trajectory'] = simulate_free_boundary(
            p, config.kernel, init, horizon, stop_span=stop_span,
            snapshot_times=config.outputs.snapshot_times, **sim_kwargs)
        return last['trajectory']

    result = classify_with_horizon(run, l_star, nm.T, max_doublings=st.max_doublings)
    traj = last['trajectory']
    r02_value = r02_initial(p, config.kernel, n=nm.eigen_n)
    result.r02_initial = r02_value

    out.csv("fronts.csv", ["t", "g", "h", "h_prime", "minus_g_prime", "max_I"],
            zip(traj.t, traj.g, traj.h, traj.h_prime, -traj.g_prime, traj.max_I))
    out.csv("fields.csv", ["t", "x", "S", "I", "R"],
            ((snap.t, snap.x[j], snap.S[j], snap.I[j], snap.R[j])
             for snap in traj.snapshots for j in range(snap.x.size)))
    out.json("classification.json", {"verdict": result.verdict, "final_span": result.final_span,
                                     "span_rate": result.span_rate, "I_max_final": result.I_max_final,
                                     "l_star": l_star, "r02": r02_value, "mu": p.mu, "t_final": result.t_final})
    invariants = _front_invariants(traj, init.is_even(traj.L_dom))
    out.json("free_boundary_invariants.json", invariants)

    final = traj.final
    near = np.abs(final.x) <= 2.0 * p.h0
    results = {
        "verdict": result.verdict.value, "final_span": result.final_span, "span_rate": result.span_rate,
        "I_max_final": result.I_max_final, "l_star": l_star, "r02": r02_value, "mu": p.mu,
        "t_final": result.t_final, "stop_reason": traj.stop_reason, "steps": traj.steps,
        "S_deviation_near_origin": float(np.max(np.abs(final.S[near] - p.N_star))),
        "max_asymmetry": traj.max_asymmetry, "max_N": traj.max_N, "A_bound": traj.A_bound,
    }
    return results, [invariants]


# ============================================================================
# Spectral
# ============================================================================

def _run_eigen(config: RunConfig, out: _Artifacts) -> tuple:
    ev = config.eigen
    d = ev.d or config.params.d
    grid = Grid1D.centered(ev.length, config.numerics.eigen_n)
    kernel = build_kernel(config.kernel, grid)
    problem = EigenProblem(d=d, c1=ev.c1, c2=ev.c2, grid=grid, kernel=kernel)
    result = principal_eigenvalue(problem)
    results: Dict[str, Any] = {"lambda1": result.lambda1, "residual": result.residual,
                               "iterations": result.iterations, "length": ev.length, "d": d,
                               "n": grid.n, "r02": None, "l_star": None}
    if ev.oracle:
        results["lambda1_dense"] = dense_eigenvalue(problem)
    if ev.c1 > 0 and ev.c2 > 0:
        results["r02"] = r02(ev.c1, ev.c2, grid, config.kernel, d=d)
    if config.kernel.translation_invariant and ev.c1 > ev.c2:
        try:
            results["l_star"] = critical_length(ev.c1, ev.c2, config.kernel, tol=ev.tol, d=d)
        except BracketFailure as e:
            logger.warning("no critical length: %s", e)
    if ev.dump_eigenfunction:
        out.csv("eigenfunction.csv", ["x", "phi"], zip(grid.nodes, result.phi))
    normalization = normalization_check(kernel)
    out.json("normalization.json", normalization)
    out.json("eigen.json", results)
    return results, [normalization]


def _run_thresholds(config: RunConfig, out: _Artifacts) -> tuple:
    ev = config.eigen
    d = ev.d or config.params.d
    l_star = critical_length(ev.c1, ev.c2, config.kernel, tol=ev.tol, d=d)
    results = {
        "l_star": l_star, "c1": ev.c1, "c2": ev.c2, "d": d,
        "lambda1": lambda1_on_interval(ev.c1, ev.c2, (-0.5 * ev.length, 0.5 * ev.length),
                              config.kernel, d=d, n=config.numerics.eigen_n),
        "r02_at_length": r02(ev.c1, ev.c2, (-0.5 * ev.length, 0.5 * ev.length), config.kernel,
                             d=d, n=config.numerics.eigen_n),
    }
    out.json("thresholds.json", results)
    return results, []


_DISPATCH = {
    ModelKind.NEUMANN: _run_neumann,
    ModelKind.DIRICHLET: _run_dirichlet,
    ModelKind.STEFAN: _run_stefan,
    ModelKind.EIGEN: _run_eigen,
    ModelKind.THRESHOLDS: _run_thresholds,
}


def run(config: RunConfig, directory: Optional[str] = None) -> RunSummary:
    """
    Execute one validated configuration and write its artifacts

    Args:
        config: Run configuration
        directory: Output directory; default outputs.directory or <output root>/<name>

    Returns:
        RunSummary (also written to summary.json)

    Raises:
        ConfigInvalid: Inconsistent settings found at dispatch
        NsirError: Solver errors propagate with their context
    """
    start = time.perf_counter()
    directory = directory or run_directory(config)
    out = _Artifacts(directory, config.outputs.formats)
    logger.info("run '%s' (%s) -> %s", config.name, config.model.value, directory)
    out.json("config.json", config)

    results, reports = _DISPATCH[config.model](config, out)
    summary = _summary(config, start, directory, results, reports)
    write_json(os.path.join(directory, "summary.json"), summary)
    return summary
