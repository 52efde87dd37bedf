"""
Tests for the free-boundary solver, the spreading / vanishing verdicts,
the mu bisection and the upper-solution certificate.
"""

from types import SimpleNamespace

import numpy as np
import pytest

from nsir.shared.errors import (
    BracketInvalid, CFLViolation, ConfigInvalid, EigenvaluePositivityFailure, FrontCollision, NsirError,
    PreconditionViolated, UndecidedProbe, UnsupportedKernel,
)
from nsir.shared.models import Classification, KernelSpec, ModelParams, Verdict
from nsir.stefan import (
    classify, classify_with_horizon, cosine_bump_init, critical_mu, global_bound_ok, l_star_for, r02_initial,
    simulate_free_boundary, tilted_init, upper_solution_check,
)

DESK = dict(inner_nodes=21, outer_nodes=61)


@pytest.fixture
def init(params_front):
    return cosine_bump_init(params_front.h0, 0.8, 0.2)


@pytest.fixture
def l_star(params_front, gaussian_kernel):
    return l_star_for(params_front, gaussian_kernel)


def _fake_run(t_final, span, max_I, mu=1.0):
    t = np.linspace(0.0, t_final, 101)
    return SimpleNamespace(t=t, span=np.full(t.size, span) if np.isscalar(span) else span,
                           max_I=np.full(t.size, max_I), params=SimpleNamespace(mu=mu))


# ============================================================================
# Solver
# ============================================================================

def test_small_mu_vanishes(params_front, gaussian_kernel, init, l_star):
    traj = simulate_free_boundary(params_front, gaussian_kernel, init, T=6.0, **DESK)
    result = classify(traj, l_star)
    assert result.verdict == Verdict.VANISHING
    assert result.final_span <= l_star + 0.05
    assert result.I_max_final < 1e-6
    final = traj.final
    near = np.abs(final.x) <= 2.0 * params_front.h0
    assert np.max(np.abs(final.S[near] - params_front.N_star)) < 1e-2


def test_free_boundary_invariants(params_front, gaussian_kernel, init):
    traj = simulate_free_boundary(params_front, gaussian_kernel, init, T=2.0, **DESK)
    assert traj.monotone
    assert traj.max_asymmetry < 1e-10
    assert global_bound_ok(traj)
    assert traj.min_S > 0
    assert np.all(np.diff(traj.h) >= 0) and np.all(np.diff(traj.g) <= 0)


def test_even_and_tilted_initial_data(params_front, gaussian_kernel, init):
    assert init.is_even(10.0)
    tilted = tilted_init(init, 0.3)
    assert not tilted.is_even(10.0)
    assert tilted.I0(np.array([-init.h0, init.h0])) == pytest.approx([0.0, 0.0])
    traj = simulate_free_boundary(params_front, gaussian_kernel, tilted, T=0.5, **DESK)
    assert traj.max_asymmetry > 1e-10
    assert traj.monotone
    with pytest.raises(ConfigInvalid):
        tilted_init(init, 1.0)


def test_large_mu_spreads(params_front, gaussian_kernel, init, l_star):
    p = params_front.with_(mu=100.0)
    traj = simulate_free_boundary(p, gaussian_kernel, init, T=20.0, stop_span=3.0 * l_star, **DESK)
    assert traj.stop_reason == "span"
    result = classify(traj, l_star)
    assert result.verdict == Verdict.SPREADING
    assert result.final_span > l_star


def test_wide_initial_interval_spreads(gaussian_kernel, l_star):
    p = ModelParams(a=2.0, beta=1.0, b=1.0, gamma=0.5, k=5.0, d=1.0, h0=2.0, mu=1.0)
    assert 2.0 * p.h0 > l_star
    traj = simulate_free_boundary(p, gaussian_kernel, cosine_bump_init(p.h0, 0.8, 0.2), T=50.0,
                                  stop_span=3.0 * l_star, **DESK)
    assert classify(traj, l_star).verdict == Verdict.SPREADING
    assert traj.final.I.max() > 1e-3


def test_r02_on_the_initial_interval(params_front, gaussian_kernel):
    assert r02_initial(params_front, gaussian_kernel, n=101) < 1.0
    wide = params_front.with_(k=8.0, h0=1.0)
    assert r02_initial(wide, gaussian_kernel, n=101) >= 1.0


def test_r02_above_one_on_the_initial_interval_spreads(params_front, gaussian_kernel):
    p = params_front.with_(k=8.0, h0=1.0, mu=1.0)
    assert r02_initial(p, gaussian_kernel, n=101) >= 1.0
    l_star = l_star_for(p, gaussian_kernel)
    traj = simulate_free_boundary(p, gaussian_kernel, cosine_bump_init(p.h0, 0.8, 0.2), T=50.0,
                                  stop_span=3.0 * l_star, **DESK)
    assert classify(traj, l_star).verdict == Verdict.SPREADING
    assert traj.final.I.max() > 1e-3


def test_snapshots_at_requested_times(params_front, gaussian_kernel, init):
    traj = simulate_free_boundary(params_front, gaussian_kernel, init, T=1.0, snapshot_times=[0.5], **DESK)
    times = [snap.t for snap in traj.snapshots]
    assert times[0] == 0.0
    assert times[-1] == pytest.approx(1.0)
    assert any(abs(t - 0.5) < 0.01 for t in times)
    assert traj.final.I_m.size == DESK["inner_nodes"]


def test_rejects_kernel_without_translation_invariance(params_front, init):
    with pytest.raises(UnsupportedKernel):
        simulate_free_boundary(params_front, KernelSpec(), init, T=1.0)


def test_rejects_unresolved_initial_interval(params_front, gaussian_kernel):
    with pytest.raises(FrontCollision):
        simulate_free_boundary(params_front, gaussian_kernel, cosine_bump_init(0.01, 0.8, 0.2), T=1.0, **DESK)


def test_rejects_fixed_step_above_stability_bound(params_front, gaussian_kernel, init):
    with pytest.raises(CFLViolation):
        simulate_free_boundary(params_front, gaussian_kernel, init, T=1.0, dt=0.1, **DESK)


# ============================================================================
# Verdicts
# ============================================================================

def test_classify_undecided_when_span_stalls_with_infection():
    result = classify(_fake_run(10.0, 0.5, 1e-3), l_star=1.0)
    assert result.verdict == Verdict.UNDECIDED


def test_horizon_doubles_on_undecided():
    horizons = []

    def run(T):
        horizons.append(T)
        return _fake_run(T, 0.5, 1e-3)

    result = classify_with_horizon(run, l_star=1.0, T=5.0, max_doublings=3)
    assert result.verdict == Verdict.UNDECIDED
    assert horizons == [5.0, 10.0, 20.0, 40.0]


def _threshold_probe(mu_c):
    def probe(mu):
        verdict = Verdict.VANISHING if mu < mu_c else Verdict.SPREADING
        return Classification(verdict=verdict, final_span=1.0, span_rate=0.0, I_max_final=0.0,
                              l_star_used=1.0, t_final=1.0, mu=mu)
    return probe


def test_critical_mu_bracket(params_front, gaussian_kernel, init):
    bracket = critical_mu(params_front, gaussian_kernel, init, (0.01, 10.0), tol=0.01, T=1.0,
                          probe=_threshold_probe(1.234))
    assert bracket.mu_lo < 1.234 <= bracket.mu_hi
    assert bracket.width < 0.01
    assert bracket.monotone
    assert len(bracket.probes) == bracket.iterations + 2


def test_critical_mu_on_the_solver(params_front, gaussian_kernel, init, l_star):
    bracket = critical_mu(params_front, gaussian_kernel, init, (0.01, 100.0), tol=25.0, T=0.01,
                          l_star=l_star, max_doublings=10, **DESK)
    assert bracket.width < 25.0
    assert bracket.iterations == 2
    assert bracket.monotone
    low, high = bracket.probes[0], bracket.probes[1]
    assert low.verdict == Verdict.VANISHING and high.verdict == Verdict.SPREADING
    # I cannot fall below the extinction level by t = 0.01, so the horizon was doubled
    assert low.t_final >= 0.02 - 1e-12
    assert all(q.verdict != Verdict.UNDECIDED for q in bracket.probes)


def test_critical_mu_rejects_bracket_without_transition(params_front, gaussian_kernel, init):
    with pytest.raises(BracketInvalid):
        critical_mu(params_front, gaussian_kernel, init, (0.01, 0.1), tol=0.01, T=1.0,
                    probe=_threshold_probe(1.234))
    with pytest.raises(BracketInvalid):
        critical_mu(params_front, gaussian_kernel, init, (1.0, 0.5), tol=0.01, T=1.0,
                    probe=_threshold_probe(1.234))


def test_critical_mu_reports_undecided_probe(params_front, gaussian_kernel, init):
    def probe(mu):
        verdict = Verdict.VANISHING if mu < 1.0 else Verdict.SPREADING if mu > 5.0 else Verdict.UNDECIDED
        return Classification(verdict=verdict, final_span=1.0, span_rate=0.0, I_max_final=0.0,
                              l_star_used=1.0, t_final=1.0, mu=mu)

    with pytest.raises(UndecidedProbe) as excinfo:
        critical_mu(params_front, gaussian_kernel, init, (0.5, 10.0), tol=0.01, T=1.0, probe=probe)
    assert 1.0 <= excinfo.value.mu <= 5.0


# ============================================================================
# Upper Solution
# ============================================================================

def test_upper_solution_certificate(params_front, gaussian_kernel, init, l_star):
    report = upper_solution_check(params_front, gaussian_kernel, init, delta=0.05)
    assert report.lambda_eps > 0
    assert report.passed, [c.name for c in report.checks if not c.passed]
    assert report.slack_pde > 0 and report.slack_front > 0 and report.slack_initial >= 0
    assert report.A_amp == pytest.approx(1.1 * report.A_min)

    p = params_front.with_(mu=0.5 * report.mu0)
    traj = simulate_free_boundary(p, gaussian_kernel, init, T=6.0, **DESK)
    assert classify(traj, l_star).verdict == Verdict.VANISHING


def test_upper_solution_needs_positive_eigenvalue(gaussian_kernel):
    p = ModelParams(a=2.0, beta=1.0, b=1.0, gamma=0.5, k=5.0, d=1.0, h0=3.0, mu=0.01)
    with pytest.raises(EigenvaluePositivityFailure):
        upper_solution_check(p, gaussian_kernel, cosine_bump_init(p.h0, 0.8, 0.2))


def test_upper_solution_rejects_delta_outside_the_unit_half(params_front, gaussian_kernel, init):
    for delta in (0.0, 0.5, 0.7):
        with pytest.raises(PreconditionViolated) as excinfo:
            upper_solution_check(params_front, gaussian_kernel, init, delta=delta)
        assert isinstance(excinfo.value, NsirError)
