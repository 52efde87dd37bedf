"""
Free-boundary problem

Front-fixing solver, spreading / vanishing classification, mu brackets and
the upper-solution certificate for vanishing.
"""

from .solver import (
    FreeBoundaryInit, CompositeGrid, FrontState, FrontTrajectory,
    cosine_bump_init, simulate_free_boundary, global_bound_ok, l_star_for, r02_initial, span_at, tilted_init,
)
from .classify import classify, classify_with_horizon, critical_mu, default_probe
from .upper_solution import upper_solution_check

__all__ = [
    'FreeBoundaryInit', 'CompositeGrid', 'FrontState', 'FrontTrajectory',
    'cosine_bump_init', 'simulate_free_boundary', 'global_bound_ok', 'l_star_for', 'r02_initial', 'span_at',
    'tilted_init',
    'classify', 'classify_with_horizon', 'critical_mu', 'default_probe',
    'upper_solution_check',
]
