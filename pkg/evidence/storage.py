"""
Evidence storage - one directory per view: raw rasters, JSON headers, manifest and camera
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from files import read_json, write_bytes_atomic, write_json
from scene import Camera, load_camera, save_camera

from .errors import EvidenceError, EvidenceFormatError
from .model import EditedViewEvidence

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
CAMERA_NAME = "camera.json"

# field name -> (on-disk dtype, numpy little-endian dtype)
FIELDS: Dict[str, Tuple[str, str]] = {
    "edited_image": ("f32", "<f4"),
    "attention": ("f32", "<f4"),
    "semantic_features": ("f32", "<f4"),
    "appearance_features": ("f32", "<f4"),
    "mask": ("u8", "u1"),
}
PLANAR_FIELDS = ("attention", "mask")


def _store_raster(directory: Path, name: str, raster: np.ndarray):
    dtype, numpy_dtype = FIELDS[name]
    data = np.asarray(raster)
    height, width = data.shape[:2]
    channels = 1 if data.ndim == 2 else data.shape[2]
    header = {"height": height, "width": width, "channels": channels, "dtype": dtype, "field": name}
    write_bytes_atomic(directory / f"{name}.bin", np.ascontiguousarray(data, dtype=numpy_dtype).tobytes(order="C"))
    write_json(directory / f"{name}.json", header)


def _load_raster(directory: Path, name: str) -> np.ndarray:
    header_path = directory / f"{name}.json"
    payload_path = directory / f"{name}.bin"
    try:
        header = read_json(header_path)
        payload = payload_path.read_bytes()
    except FileNotFoundError as e:
        raise EvidenceFormatError(f"{directory}: missing raster file {e.filename}") from e

    expected_dtype, numpy_dtype = FIELDS[name]
    if header.get("field") != name or header.get("dtype") != expected_dtype:
        raise EvidenceFormatError(f"{header_path}: header does not describe a {expected_dtype} '{name}' raster")
    try:
        height, width, channels = int(header["height"]), int(header["width"]), int(header["channels"])
    except (KeyError, TypeError, ValueError) as e:
        raise EvidenceFormatError(f"{header_path}: malformed header: {e}") from e

    values = np.frombuffer(payload, dtype=numpy_dtype)
    if values.size != height * width * channels or len(payload) != values.nbytes:
        raise EvidenceFormatError(
            f"{payload_path}: shape mismatch, header says {height}x{width}x{channels} "
            f"but payload holds {len(payload)} bytes"
        )
    shape = (height, width) if name in PLANAR_FIELDS else (height, width, channels)
    raster = values.reshape(shape).astype(np.float32 if expected_dtype == "f32" else np.uint8)
    return raster.astype(bool) if name == "mask" else raster


def store_evidence(evidence: EditedViewEvidence, path, camera: Optional[Camera] = None) -> Path:
    """Write every present raster plus a manifest listing them (and the camera file, if given)"""
    directory = Path(path)
    directory.mkdir(parents=True, exist_ok=True)
    fields = [name for name in FIELDS if getattr(evidence, name) is not None]
    for name in fields:
        _store_raster(directory, name, getattr(evidence, name))
    manifest = {"fields": fields, "camera": None}
    if camera is not None:
        save_camera(camera, directory / CAMERA_NAME)
        manifest["camera"] = CAMERA_NAME
    write_json(directory / MANIFEST_NAME, manifest)
    return directory


def load_evidence(path) -> EditedViewEvidence:
    directory = Path(path)
    try:
        manifest = read_json(directory / MANIFEST_NAME)
    except FileNotFoundError as e:
        raise EvidenceFormatError(f"{directory}: no {MANIFEST_NAME}") from e
    fields = manifest.get("fields") if isinstance(manifest, dict) else None
    if not isinstance(fields, list) or any(name not in FIELDS for name in fields):
        raise EvidenceFormatError(f"{directory}: manifest must list fields among {sorted(FIELDS)}")
    missing = [name for name in FIELDS if name != "mask" and name not in fields]
    if missing:
        raise EvidenceFormatError(f"{directory}: manifest is missing required fields {missing}")

    rasters = {name: _load_raster(directory, name) for name in fields}
    shapes = {r.shape[:2] for r in rasters.values()}
    if len(shapes) != 1:
        raise EvidenceFormatError(f"{directory}: rasters disagree on image size {sorted(shapes)}")
    try:
        return EditedViewEvidence(**rasters)
    except EvidenceError as e:
        raise EvidenceFormatError(f"{directory}: {e}") from e


def load_view_bundle(path) -> Tuple[EditedViewEvidence, Camera]:
    """Evidence plus the camera its manifest points to"""
    directory = Path(path)
    evidence = load_evidence(directory)
    camera_name = read_json(directory / MANIFEST_NAME).get("camera")
    if not camera_name:
        raise EvidenceFormatError(f"{directory}: manifest names no camera file")
    camera = load_camera(directory / camera_name)
    if (camera.height, camera.width) != evidence.shape:
        raise EvidenceFormatError(
            f"{directory}: camera is {camera.width}x{camera.height}, rasters are {evidence.shape[1]}x{evidence.shape[0]}"
        )
    return evidence, camera


class EvidenceStorage:
    """Evidence for a multi-view edit, laid out as <root>/view_<index>/"""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def view_dir(self, view_index: int) -> Path:
        return self.root / f"view_{view_index:03d}"

    def save(self, view_index: int, evidence: EditedViewEvidence, camera: Camera) -> Path:
        directory = store_evidence(evidence, self.view_dir(view_index), camera)
        logger.info(f"Evidence for view {view_index} saved to {directory}")
        return directory

    def load(self, view_index: int) -> Tuple[EditedViewEvidence, Camera]:
        return load_view_bundle(self.view_dir(view_index))

    def views(self) -> List[int]:
        indices = []
        for child in sorted(self.root.glob("view_*")):
            if (child / MANIFEST_NAME).exists():
                indices.append(int(child.name.split("_", 1)[1]))
        return indices

    def load_all(self) -> Tuple[List[EditedViewEvidence], List[Camera]]:
        bundles = [self.load(i) for i in self.views()]
        if not bundles:
            raise EvidenceFormatError(f"{self.root}: no view directories with a manifest")
        return [b[0] for b in bundles], [b[1] for b in bundles]
