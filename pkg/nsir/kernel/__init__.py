"""Discrete nonlocal infection operators"""

from .operators import (
    KernelMatrix, build_kernel, apply_nonlocal, check_normalization, normalization_check,
    convolution_profile, sample_density,
)

__all__ = [
    'KernelMatrix', 'build_kernel', 'apply_nonlocal', 'check_normalization', 'normalization_check',
    'convolution_profile', 'sample_density',
]
