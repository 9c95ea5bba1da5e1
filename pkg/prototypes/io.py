"""
Prototype dumps - one JSON array per view
"""
from typing import List

from files import read_json, write_json

from .errors import PrototypeError
from .model import Prototype


def save_prototypes(prototypes: List[Prototype], path):
    return write_json(path, [p.to_dict() for p in prototypes])


def load_prototypes(path) -> List[Prototype]:
    records = read_json(path)
    if not isinstance(records, list):
        raise PrototypeError(f"{path}: prototype dump must be a JSON array")
    try:
        return [Prototype.from_dict(r) for r in records]
    except (KeyError, TypeError, ValueError) as e:
        raise PrototypeError(f"{path}: malformed prototype record: {e}") from e
