"""
Harness - Configuration Loading

Handles:
- Shipped scenario presets (config/presets.yaml)
- YAML run / sweep files that name a preset and override any field
- Dotted `path=value` overrides from the command line
- Mapping pydantic validation errors to ConfigInvalid with the field path
"""

import copy
import os
from typing import Any, Dict, Iterable, List, Optional, Tuple

import yaml
from pydantic import ValidationError

from ..shared.config import PRESETS_YAML
from ..shared.errors import ConfigInvalid
from ..shared.models import RunConfig, SweepConfig


# ============================================================================
# YAML helpers
# ============================================================================

def load_yaml(path: str) -> Dict[str, Any]:
    """Load a YAML mapping; missing or malformed files raise ConfigInvalid"""
    if not os.path.exists(path):
        raise ConfigInvalid(f"config file not found: {path}")
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigInvalid(f"cannot parse {path}: {e}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigInvalid(f"{path} must contain a mapping at the top level")
    return data


def load_presets(path: Optional[str] = None) -> Dict[str, Dict[str, Any]]:
    """All shipped presets keyed by name"""
    data = load_yaml(path or PRESETS_YAML)
    presets = data.get('presets', data)
    return {str(name): body for name, body in presets.items()}


def list_presets(path: Optional[str] = None) -> List[Tuple[str, str]]:
    """(name, description) pairs in file order"""
    return [(name, str(body.get('description', ''))) for name, body in load_presets(path).items()]


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def set_dotted(data: Dict[str, Any], path: str, value: Any) -> Dict[str, Any]:
    """Set data[a][b][c] = value for path 'a.b.c', creating sections as needed"""
    keys = path.split('.')
    node = data
    for key in keys[:-1]:
        child = node.get(key)
        if child is None:
            child = node[key] = {}
        elif not isinstance(child, dict):
            raise ConfigInvalid(f"'{key}' is not a section", path)
        node = child
    node[keys[-1]] = value
    return data


def parse_override(text: str) -> Tuple[str, Any]:
    """'params.k=5' -> ('params.k', 5); values are parsed as YAML scalars"""
    if '=' not in text:
        raise ConfigInvalid(f"override '{text}' must look like path=value")
    path, raw = text.split('=', 1)
    path = path.strip()
    if not path:
        raise ConfigInvalid(f"override '{text}' has an empty path")
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as e:
        raise ConfigInvalid(f"cannot parse value of '{text}': {e}", path)
    return path, value


def apply_overrides(data: Dict[str, Any], overrides: Iterable[str]) -> Dict[str, Any]:
    data = copy.deepcopy(data)
    for text in overrides:
        path, value = parse_override(text)
        set_dotted(data, path, value)
    return data


# ============================================================================
# Validation
# ============================================================================

def config_error(e: ValidationError, prefix: str = '') -> ConfigInvalid:
    """First validation error as ConfigInvalid naming its dotted field path"""
    first = e.errors()[0]
    loc = '.'.join(str(part) for part in first.get('loc', ()))
    path = '.'.join(part for part in (prefix, loc) if part) or None
    return ConfigInvalid(first.get('msg', str(e)), path)


def resolve_preset(data: Dict[str, Any], presets: Optional[Dict[str, Dict[str, Any]]] = None) -> Dict[str, Any]:
    """Merge the named preset under the given fields"""
    name = data.get('preset')
    if not name:
        return data
    presets = presets if presets is not None else load_presets()
    if name not in presets:
        raise ConfigInvalid(f"unknown preset '{name}' (available: {', '.join(presets)})", 'preset')
    body = {k: v for k, v in presets[name].items() if k != 'description'}
    merged = deep_merge(body, data)
    merged.setdefault('name', name)
    return merged


def build_run_config(data: Dict[str, Any], overrides: Iterable[str] = (),
                     presets: Optional[Dict[str, Dict[str, Any]]] = None) -> RunConfig:
    """
    Validate a run configuration mapping

    Raises:
        ConfigInvalid: Unknown preset or a field that fails validation (path in the message)
    """
    data = apply_overrides(data, overrides)
    data = resolve_preset(data, presets)
    try:
        return RunConfig(**data)
    except ValidationError as e:
        raise config_error(e)


def load_run_config(path: str, overrides: Iterable[str] = ()) -> RunConfig:
    return build_run_config(load_yaml(path), overrides)


def preset_config(name: str, overrides: Iterable[str] = ()) -> RunConfig:
    return build_run_config({'preset': name}, overrides)


def build_sweep_config(data: Dict[str, Any], overrides: Iterable[str] = (),
                       presets: Optional[Dict[str, Dict[str, Any]]] = None) -> SweepConfig:
    data = apply_overrides(data, overrides)
    base = resolve_preset(dict(data.get('base') or {}), presets)
    data = dict(data, base=base)
    try:
        config = SweepConfig(**data)
    except ValidationError as e:
        raise config_error(e)
    return config


def load_sweep_config(path: str, overrides: Iterable[str] = ()) -> SweepConfig:
    return build_sweep_config(load_yaml(path), overrides)
