"""
Fixed-interval initial boundary value problems

Neumann and Dirichlet solvers, the Dirichlet steady states and the runtime
checks of positivity, boundedness, N-reduction and the comparison sandwich.
"""

from .solver import (
    FieldState, Trajectory, simulate_neumann, simulate_dirichlet,
    constant_init, perturbed_init, sine_init, mass_series, stable_dt, laplacian,
    NEUMANN, DIRICHLET,
)
from .steady import Extinct, tilde_N, march_tilde_N, existence_check
from .checks import verify_bounds, envelope_check, comparison_for, scalar_reduction

__all__ = [
    'FieldState', 'Trajectory', 'simulate_neumann', 'simulate_dirichlet',
    'constant_init', 'perturbed_init', 'sine_init', 'mass_series', 'stable_dt', 'laplacian',
    'NEUMANN', 'DIRICHLET',
    'Extinct', 'tilde_N', 'march_tilde_N', 'existence_check',
    'verify_bounds', 'envelope_check', 'comparison_for', 'scalar_reduction',
]
