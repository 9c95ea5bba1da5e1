"""
File helpers shared by every stage - atomic writes and JSON/CSV dumps
"""
import csv
import io
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Iterable, List, Mapping, Sequence

logger = logging.getLogger(__name__)


def write_bytes_atomic(path, data: bytes) -> Path:
    """Write bytes to a temp file next to `path`, then rename it into place"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path


def write_text_atomic(path, text: str) -> Path:
    return write_bytes_atomic(path, text.encode("utf-8"))


def write_json(path, payload) -> Path:
    """Dump JSON with stable formatting so identical inputs give identical bytes"""
    path = write_text_atomic(path, json.dumps(payload, indent=2, ensure_ascii=False) + "\n")
    logger.info(f"Wrote {path}")
    return path


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def write_csv(path, columns: Sequence[str], rows: Iterable[Mapping]) -> Path:
    """Write rows (dicts keyed by column name) as CSV"""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({c: row[c] for c in columns})
    path = write_text_atomic(path, buffer.getvalue())
    logger.info(f"Wrote {path}")
    return path


def read_csv(path) -> List[dict]:
    with open(path, encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))
