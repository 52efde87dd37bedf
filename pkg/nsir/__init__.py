"""
Nonlocal SIR Lab
Numerical experiments for a reaction-diffusion SIR model with nonlocal
infection: fixed-interval problems, free boundaries and their thresholds.
"""

__version__ = "0.1.0"
