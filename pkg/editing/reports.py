"""
Edit outputs - report JSON, loss-trace CSV and the final scene
"""
import logging
from pathlib import Path

from files import write_csv, write_json
from gating import LOSS_COLUMNS
from scene import save_scene

from .config import EditConfig
from .loop import EditReport

logger = logging.getLogger(__name__)

REPORT_NAME = "edit_report.json"
TRACE_NAME = "loss_trace.csv"
SCENE_NAME = "final_scene.json"


def save_edit_outputs(report: EditReport, config: EditConfig, out_dir) -> Path:
    out = Path(out_dir)
    payload = report.to_dict()
    payload["config"] = config.to_dict()
    write_json(out / REPORT_NAME, payload)
    write_csv(out / TRACE_NAME, LOSS_COLUMNS, report.trace)
    save_scene(report.final_scene, out / SCENE_NAME)
    return out
