"""
Centralized Configuration for Package Paths
Provides consistent path resolution for presets, environment and run outputs
"""

import os
from typing import List

from dotenv import load_dotenv


# ============================================================================
# ROOT DIRECTORIES
# ============================================================================

# Package root directory (parent of shared/)
PACKAGE_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# Repository root (parent of the package)
REPO_ROOT = os.path.dirname(PACKAGE_ROOT)

# Config directory
CONFIG_DIR = os.path.join(PACKAGE_ROOT, 'config')
ENV_FILE = os.path.join(CONFIG_DIR, '.env')


# ============================================================================
# YAML CONFIGURATION FILES
# ============================================================================

# Shipped scenario presets
PRESETS_YAML = os.path.join(CONFIG_DIR, 'presets.yaml')


# ============================================================================
# ENVIRONMENT
# ============================================================================

OUTPUT_ROOT_ENV = 'NSIR_OUTPUT_ROOT'
WORKERS_ENV = 'NSIR_WORKERS'

DEFAULT_OUTPUT_ROOT = os.path.join(REPO_ROOT, 'runs')


def load_env() -> bool:
    """
    Load environment variables from config/.env if the file exists

    Returns:
        bool: True when a .env file was found and loaded
    """
    if not os.path.exists(ENV_FILE):
        return False
    load_dotenv(ENV_FILE)
    return True


def get_output_root() -> str:
    """Output root: NSIR_OUTPUT_ROOT when set, else <repo>/runs"""
    return os.environ.get(OUTPUT_ROOT_ENV) or DEFAULT_OUTPUT_ROOT


def get_default_workers() -> int:
    """Sweep worker count: NSIR_WORKERS when set, else available parallelism"""
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


# ============================================================================
# DIRECTORY INITIALIZATION
# ============================================================================

def initialize_directories() -> None:
    """
    Create the output root if it doesn't exist
    Called by the CLI on startup
    """
    os.makedirs(get_output_root(), exist_ok=True)


# ============================================================================
# PATH HELPERS
# ============================================================================

def get_run_path(*parts: str) -> str:
    """Get full path below the output root"""
    return os.path.join(get_output_root(), *parts)


# ============================================================================
# VALIDATION
# ============================================================================

def validate_paths() -> List[str]:
    """
    Validate that all critical paths exist
    Returns list of missing paths
    """
    missing = []

    if not os.path.exists(CONFIG_DIR):
        missing.append(CONFIG_DIR)

    if not os.path.exists(PRESETS_YAML):
        missing.append(PRESETS_YAML)

    return missing


# ============================================================================
# AUTO-INITIALIZATION
# ============================================================================

# Environment overrides (output root, worker count) are read on import
load_env()
