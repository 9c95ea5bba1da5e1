"""
Scene and camera files - JSON records as described in the file formats section of the README
"""
import logging
from typing import List

import numpy as np

from files import read_json, write_json
from .errors import SceneError, SceneFormatError
from .model import Camera, Gaussian

logger = logging.getLogger(__name__)


def gaussian_to_dict(g: Gaussian) -> dict:
    return {
        "id": g.id,
        "center": g.center.tolist(),
        "covariance": g.covariance.reshape(-1).tolist(),
        "color": g.color.tolist(),
        "opacity": g.opacity,
        "semantic_latent": g.semantic_latent.tolist(),
        "original_color": g.original_color.tolist(),
    }


def gaussian_from_dict(record: dict) -> Gaussian:
    try:
        covariance = np.asarray(record["covariance"], dtype=np.float64)
        if covariance.size != 9:
            raise SceneFormatError(f"Gaussian {record.get('id')}: covariance needs 9 values, got {covariance.size}")
        return Gaussian(
            id=record["id"],
            center=record["center"],
            covariance=covariance.reshape(3, 3),
            color=record["color"],
            opacity=record["opacity"],
            semantic_latent=record["semantic_latent"],
            original_color=record.get("original_color", record["color"]),
        )
    except KeyError as e:
        raise SceneFormatError(f"Gaussian record is missing key {e}") from e
    except (TypeError, ValueError) as e:
        if isinstance(e, SceneError):
            raise
        raise SceneFormatError(f"Gaussian record {record.get('id')} is malformed: {e}") from e


def camera_to_dict(camera: Camera) -> dict:
    return {
        "rotation": camera.rotation.reshape(-1).tolist(),
        "translation": camera.translation.tolist(),
        "focal": camera.focal.tolist(),
        "principal_point": camera.principal_point.tolist(),
        "width": camera.width,
        "height": camera.height,
    }


def camera_from_dict(record: dict) -> Camera:
    try:
        rotation = np.asarray(record["rotation"], dtype=np.float64)
        if rotation.size != 9:
            raise SceneFormatError(f"camera rotation needs 9 values, got {rotation.size}")
        return Camera(
            rotation=rotation.reshape(3, 3),
            translation=record["translation"],
            focal=record["focal"],
            principal_point=record["principal_point"],
            width=record["width"],
            height=record["height"],
        )
    except KeyError as e:
        raise SceneFormatError(f"camera record is missing key {e}") from e
    except (TypeError, ValueError) as e:
        if isinstance(e, SceneError):
            raise
        raise SceneFormatError(f"camera record is malformed: {e}") from e


def load_scene(path) -> List[Gaussian]:
    records = read_json(path)
    if not isinstance(records, list):
        raise SceneFormatError(f"{path}: scene file must hold a JSON array of Gaussians")
    scene = [gaussian_from_dict(r) for r in records]
    ids = [g.id for g in scene]
    if len(set(ids)) != len(ids):
        raise SceneFormatError(f"{path}: duplicate Gaussian ids")
    logger.info(f"Loaded {len(scene)} Gaussians from {path}")
    return scene


def save_scene(scene: List[Gaussian], path):
    return write_json(path, [gaussian_to_dict(g) for g in scene])


def load_camera(path) -> Camera:
    record = read_json(path)
    if not isinstance(record, dict):
        raise SceneFormatError(f"{path}: camera file must hold a JSON object")
    return camera_from_dict(record)


def save_camera(camera: Camera, path):
    return write_json(path, camera_to_dict(camera))
