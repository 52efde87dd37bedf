"""
Shared utilities and models for the nonlocal SIR laboratory

This module contains common functionality used across all solver modules:
- Pydantic models and configuration structures
- Exception hierarchy
- Uniform grids with trapezoid weights
- CSV / JSON artifact writers
"""

from .models import (
    ModelParams, KernelSpec, KernelFamily, Normalization,
    NormalizationReport, CheckResult, CheckReport, NormalizationCheck,
    SteadyReport, SteadyRun, FieldSnapshot,
    Verdict, Classification, MuProbe, MuBracket, UpperSolutionReport,
    ModelKind, Numerics, InitSpec, EigenSettings, DirichletSettings, StefanSettings,
    OutputSpec, RunConfig, SweepConfig, ValueRange, Reducer, RunSummary,
)
from .grid import Grid1D
from . import config, errors

__all__ = [
    # Models
    'ModelParams', 'KernelSpec', 'KernelFamily', 'Normalization',
    'NormalizationReport', 'CheckResult', 'CheckReport', 'NormalizationCheck',
    'SteadyReport', 'SteadyRun', 'FieldSnapshot',
    'Verdict', 'Classification', 'MuProbe', 'MuBracket', 'UpperSolutionReport',
    'ModelKind', 'Numerics', 'InitSpec', 'EigenSettings', 'DirichletSettings', 'StefanSettings',
    'OutputSpec', 'RunConfig', 'SweepConfig', 'ValueRange', 'Reducer', 'RunSummary',
    # Grid
    'Grid1D',
    # Configuration / errors
    'config', 'errors',
]
