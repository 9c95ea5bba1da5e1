"""
Transport dumps - dense problems and solutions per view
"""
import logging
from typing import List, Optional

from files import read_json, write_json

from .errors import TransportProblemError
from .problem import TransportProblem, TransportSolution

logger = logging.getLogger(__name__)


def save_transport(problems: List[Optional[TransportProblem]], solutions: List[Optional[TransportSolution]], path):
    """Skipped views are kept as null entries so view indices stay aligned"""
    views = [
        {"view": v, "problem": p and p.to_dict(), "solution": s and s.to_dict()}
        for v, (p, s) in enumerate(zip(problems, solutions))
    ]
    return write_json(path, {"views": views})


def load_problem(path) -> TransportProblem:
    """A single problem, or the first view of a transport dump"""
    record = read_json(path)
    if isinstance(record, dict) and "views" in record:
        if not record["views"]:
            raise TransportProblemError(f"{path}: transport dump holds no views")
        record = record["views"][0]["problem"]
    return TransportProblem.from_dict(record)


def _views(path) -> List[dict]:
    record = read_json(path)
    if not isinstance(record, dict) or not isinstance(record.get("views"), list):
        raise TransportProblemError(f"{path}: expected a transport dump with a 'views' array")
    return record["views"]


def load_problems(path) -> List[Optional[TransportProblem]]:
    return [None if v.get("problem") is None else TransportProblem.from_dict(v["problem"]) for v in _views(path)]


def load_solutions(path) -> List[Optional[TransportSolution]]:
    return [None if v.get("solution") is None else TransportSolution.from_dict(v["solution"]) for v in _views(path)]
