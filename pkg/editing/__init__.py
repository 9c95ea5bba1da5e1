"""
Gated edit optimization: configuration, scenarios, the round loop and sweeps
"""
from .config import (
    AblationSettings,
    EditConfig,
    FusionSettings,
    GateSettings,
    LossSettings,
    PrototypeSettings,
    TransportSettings,
)
from .errors import AllViewsEmptyError, ConfigError, EditError, IdMismatchError
from .loop import EditReport, EditRunner, GateStats, leakage_metric, run_edit
from .reports import save_edit_outputs
from .scenarios import (
    SCENARIOS,
    Scenario,
    load_scenario,
    random_scenario,
    scenario_evidence,
    single_scenario,
    toy_scenario,
)
from .sweep import load_grid, run_sweep, save_sweep

__all__ = [
    "EditConfig",
    "PrototypeSettings",
    "TransportSettings",
    "FusionSettings",
    "GateSettings",
    "LossSettings",
    "AblationSettings",
    "EditRunner",
    "EditReport",
    "GateStats",
    "run_edit",
    "leakage_metric",
    "save_edit_outputs",
    "Scenario",
    "toy_scenario",
    "single_scenario",
    "random_scenario",
    "SCENARIOS",
    "load_scenario",
    "scenario_evidence",
    "load_grid",
    "run_sweep",
    "save_sweep",
    "EditError",
    "AllViewsEmptyError",
    "IdMismatchError",
    "ConfigError",
]
