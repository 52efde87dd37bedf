"""Principal eigenvalues, R02 and the critical length"""

from .eigen import (
    EigenProblem, EigenResult, principal_eigenvalue, dense_eigenvalue,
    rayleigh_quotient, interior_operator, is_symmetric,
)
from .thresholds import (
    r02, critical_length, lambda1_local, lambda1_on_interval, richardson_ratio,
)

__all__ = [
    'EigenProblem', 'EigenResult', 'principal_eigenvalue', 'dense_eigenvalue',
    'rayleigh_quotient', 'interior_operator', 'is_symmetric',
    'r02', 'critical_length', 'lambda1_local', 'lambda1_on_interval', 'richardson_ratio',
]
