"""
Hyperparameter sweep over the standard scenario
"""
import itertools
import logging
from typing import Dict, List, Sequence

import yaml

from files import write_csv

from .config import ALIASES
from .errors import ConfigError
from .loop import EditRunner
from .scenarios import load_scenario, scenario_evidence

logger = logging.getLogger(__name__)

GRID_USAGE = (
    "grid file must map parameter names to non-empty value lists, e.g. "
    "{loss_leakage_w: [0, 0.5]}; names: " + ", ".join(sorted(ALIASES)) + " or dotted config paths"
)


def load_grid(path) -> Dict[str, list]:
    with open(path, encoding="utf-8") as f:
        try:
            grid = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: {e}. {GRID_USAGE}") from e
    return validate_grid(grid)


def validate_grid(grid) -> Dict[str, list]:
    if not isinstance(grid, dict) or not grid:
        raise ConfigError(f"empty grid. {GRID_USAGE}")
    for key, values in grid.items():
        if not isinstance(values, list) or not values:
            raise ConfigError(f"grid entry '{key}' has no values. {GRID_USAGE}")
    return grid


async def run_sweep(grid: Dict[str, list], scenario_name: str = "toy", seed: int = 0) -> List[dict]:
    """One toy edit per grid point (full product, grid order); rows carry the point plus metrics"""
    grid = validate_grid(grid)
    scenario = load_scenario(scenario_name, seed)
    evidences = scenario_evidence(scenario)
    keys = list(grid)
    rows = []
    for values in itertools.product(*(grid[k] for k in keys)):
        point = dict(zip(keys, values))
        config = scenario.config.with_overrides(point)
        report = await EditRunner(config).run(
            scenario.scene, scenario.cameras, evidences, scenario.target_ids, scenario.spec.target_color
        )
        logger.info(f"Sweep point {point}: target error {report.target_color_error:.4f}, leakage {report.leakage:.4f}")
        rows.append({**point, "target_color_error": report.target_color_error, "leakage": report.leakage})
    return rows


def save_sweep(rows: List[dict], keys: Sequence[str], path):
    return write_csv(path, list(keys) + ["target_color_error", "leakage"], rows)
