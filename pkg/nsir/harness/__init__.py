"""
Experiment harness
Presets and YAML configs, single runs, sweeps and check aggregation.
"""

from .presets import (
    load_presets, list_presets, load_run_config, load_sweep_config, build_run_config,
    build_sweep_config, preset_config, apply_overrides, parse_override,
)
from .runner import run, run_directory
from .sweep import run_sweep, sweep_values, REDUCER_COLUMNS
from .report import aggregate, exit_code, find_check_reports

__all__ = [
    'load_presets', 'list_presets', 'load_run_config', 'load_sweep_config', 'build_run_config',
    'build_sweep_config', 'preset_config', 'apply_overrides', 'parse_override',
    'run', 'run_directory',
    'run_sweep', 'sweep_values', 'REDUCER_COLUMNS',
    'aggregate', 'exit_code', 'find_check_reports',
]
