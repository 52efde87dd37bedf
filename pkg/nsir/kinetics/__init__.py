"""
Spatially homogeneous kinetics

Closed-form equilibria, the logistic envelopes and the comparison ODE system
that sandwiches the Neumann problem, plus its Lyapunov diagnostic.
"""

from .equilibria import (
    Equilibria, r01, equilibria, logistic_envelope,
    quadratic_form, quadratic_form_margin, quadratic_form_margin_closed,
)
from .comparison import (
    ComparisonState, ComparisonTrajectory, solve_comparison_system, default_dt,
    lyapunov_weight, lyapunov_F, lyapunov_series, lyapunov_descent,
)

__all__ = [
    'Equilibria', 'r01', 'equilibria', 'logistic_envelope',
    'quadratic_form', 'quadratic_form_margin', 'quadratic_form_margin_closed',
    'ComparisonState', 'ComparisonTrajectory', 'solve_comparison_system', 'default_dt',
    'lyapunov_weight', 'lyapunov_F', 'lyapunov_series', 'lyapunov_descent',
]
