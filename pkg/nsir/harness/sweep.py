"""
Harness - Parameter Sweeps

Handles:
- Expanding a value list / range over one dotted config field
- Running every point (process pool or inline) into point_NNN directories
- Reducing each point to a fixed set of columns and writing a tidy sweep.csv
"""

import logging
import os
from multiprocessing import Pool
from typing import Any, Dict, List, Tuple

import numpy as np
from pydantic import ValidationError

from ..shared.config import get_default_workers, get_run_path
from ..shared.errors import ConfigInvalid, NsirError
from ..shared.io import write_csv, write_json
from ..shared.models import Reducer, RunConfig, SweepConfig, ValueRange
from .presets import config_error, set_dotted
from .runner import run

logger = logging.getLogger(__name__)

REDUCER_COLUMNS = {
    Reducer.CLASSIFICATION: ["verdict", "final_span", "l_star"],
    Reducer.TERMINAL_STATE: ["S_max_final", "I_max_final", "R_max_final"],
    Reducer.LAMBDA1: ["lambda1"],
}

CAPACITY_FOLLOWS_B = ('params.a', 'params.beta', 'params.b')


def sweep_values(config: SweepConfig) -> List[float]:
    """Concrete axis values; they must be strictly monotone"""
    values = config.values
    if isinstance(values, ValueRange):
        if values.spacing == "log":
            if values.lo <= 0 or values.hi <= 0:
                raise ConfigInvalid("log spacing needs positive bounds", "values")
            points = np.geomspace(values.lo, values.hi, values.count)
        else:
            points = np.linspace(values.lo, values.hi, values.count)
        values = [float(v) for v in points]
    values = [float(v) for v in values]
    if not values:
        raise ConfigInvalid("sweep needs at least one value", "values")
    steps = np.diff(values)
    if steps.size and not (np.all(steps > 0) or np.all(steps < 0)):
        raise ConfigInvalid("sweep values must be strictly monotone", "values")
    return values


def _check_axis(base: Dict[str, Any], axis: str) -> None:
    node: Any = base
    for key in axis.split('.'):
        if not isinstance(node, dict) or key not in node:
            raise ConfigInvalid(f"'{axis}' is not a field of the base configuration", "axis")
        node = node[key]
    if node is not None and (isinstance(node, bool) or not isinstance(node, (int, float))):
        raise ConfigInvalid(f"'{axis}' is not a numeric field", "axis")


def point_config(base: Dict[str, Any], axis: str, value: float, name: str) -> RunConfig:
    data = dict(base, name=name, outputs=dict(base.get('outputs') or {}, directory=None),
                params=dict(base['params']))
    # b and M_cap are tied through a - beta; the swept one wins
    if axis in CAPACITY_FOLLOWS_B:
        data['params']['M_cap'] = None
    elif axis == 'params.M_cap':
        data['params']['b'] = None
    data = set_dotted(data, axis, value)
    try:
        return RunConfig(**data)
    except ValidationError as e:
        raise config_error(e)


def reduce_results(reducer: Reducer, results: Dict[str, Any]) -> List[Any]:
    return [results.get(column) for column in REDUCER_COLUMNS[reducer]]


def _run_point(task: Tuple[Dict[str, Any], str, float, str, str, str]) -> Dict[str, Any]:
    """Worker entry point; errors are reported, never raised"""
    base, axis, value, name, directory, reducer = task
    try:
        config = point_config(base, axis, value, name)
        summary = run(config, directory=directory)
        return {"value": value, "row": reduce_results(Reducer(reducer), summary.results),
                "checks_passed": summary.checks_passed, "error": ""}
    except (NsirError, ValueError, FloatingPointError) as e:
        logger.warning("sweep point %s=%s failed: %s", axis, value, e)
        return {"value": value, "row": [None] * len(REDUCER_COLUMNS[Reducer(reducer)]),
                "checks_passed": False, "error": f"{type(e).__name__}: {e}"}


def run_sweep(config: SweepConfig, directory: str = None, workers: int = None) -> List[Dict[str, Any]]:
    """
    Run every sweep point and write sweep.csv

    Args:
        config: Validated sweep configuration
        directory: Sweep directory; default <output root>/<name>
        workers: Pool size; default config.workers, then NSIR_WORKERS / available parallelism

    Returns:
        One record per point in axis order (value, row, checks_passed, error)

    Raises:
        ConfigInvalid: Non-monotone values or an axis that is not a numeric field
    """
    values = sweep_values(config)
    base = config.base.model_dump(mode="json")
    _check_axis(base, config.axis)
    directory = directory or get_run_path(config.name)
    os.makedirs(directory, exist_ok=True)
    workers = workers or config.workers or get_default_workers()
    workers = max(1, min(workers, len(values)))

    tasks = [
        (base, config.axis, value, f"{config.name}_{i:03d}",
         os.path.join(directory, f"point_{i:03d}"), config.reducer.value)
        for i, value in enumerate(values)
    ]
    logger.info("sweep '%s': %d points over %s, %d worker(s)", config.name, len(tasks), config.axis, workers)

    if workers == 1:
        records = [_run_point(task) for task in tasks]
    else:
        with Pool(processes=workers) as pool:
            records = pool.map(_run_point, tasks)

    header = [config.axis] + REDUCER_COLUMNS[config.reducer] + ["checks_passed", "error"]
    write_csv(os.path.join(directory, "sweep.csv"), header,
              ([r["value"], *r["row"], r["checks_passed"], r["error"]] for r in records))
    write_json(os.path.join(directory, "sweep.json"), {"config": config, "points": records})
    failed = sum(1 for r in records if r["error"])
    logger.info("sweep '%s' done: %d/%d points succeeded", config.name, len(records) - failed, len(records))
    return records
