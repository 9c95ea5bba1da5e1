"""
Scene primitives - Gaussians, pinhole cameras and projection
"""
import dataclasses
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .errors import InvalidCameraError, InvalidGaussianError

DEPTH_EPSILON = 1e-6
ORTHONORMAL_TOLERANCE = 1e-9


def _vector(value, size: int, name: str, error=InvalidGaussianError) -> np.ndarray:
    array = np.asarray(value, dtype=np.float64)
    if array.shape != (size,):
        raise error(f"{name} must have shape ({size},), got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise error(f"{name} must be finite")
    return array


@dataclass(frozen=True, eq=False)
class Gaussian:
    """One scene primitive.

    Geometry (center, covariance) and opacity stay frozen while editing;
    color and semantic_latent are the optimized parameters, original_color is
    the snapshot taken before editing begins.
    """
    id: int
    center: np.ndarray
    covariance: np.ndarray
    color: np.ndarray
    opacity: float
    semantic_latent: np.ndarray
    original_color: np.ndarray

    def __post_init__(self):
        set_field = object.__setattr__
        set_field(self, "id", int(self.id))
        set_field(self, "center", _vector(self.center, 3, "center"))
        set_field(self, "color", _vector(self.color, 3, "color"))
        set_field(self, "original_color", _vector(self.original_color, 3, "original_color"))

        latent = np.asarray(self.semantic_latent, dtype=np.float64)
        if latent.ndim != 1 or latent.size == 0 or not np.all(np.isfinite(latent)):
            raise InvalidGaussianError(f"Gaussian {self.id}: semantic_latent must be a finite non-empty vector")
        set_field(self, "semantic_latent", latent)

        covariance = np.asarray(self.covariance, dtype=np.float64)
        if covariance.shape != (3, 3) or not np.all(np.isfinite(covariance)):
            raise InvalidGaussianError(f"Gaussian {self.id}: covariance must be a finite 3x3 matrix")
        scale = max(1.0, float(np.abs(covariance).max()))
        if not np.allclose(covariance, covariance.T, rtol=0.0, atol=1e-9 * scale):
            raise InvalidGaussianError(f"Gaussian {self.id}: covariance is not symmetric")
        if np.linalg.eigvalsh(covariance).min() <= 0.0:
            raise InvalidGaussianError(f"Gaussian {self.id}: covariance is not positive definite")
        set_field(self, "covariance", covariance)

        opacity = float(self.opacity)
        if not 0.0 < opacity < 1.0:
            raise InvalidGaussianError(f"Gaussian {self.id}: opacity must lie in (0,1), got {opacity}")
        set_field(self, "opacity", opacity)

        for name in ("color", "original_color"):
            value = getattr(self, name)
            if value.min() < 0.0 or value.max() > 1.0:
                raise InvalidGaussianError(f"Gaussian {self.id}: {name} must lie in [0,1]")

    @property
    def latent_dim(self) -> int:
        return self.semantic_latent.size

    def with_appearance(self, color=None, semantic_latent=None) -> "Gaussian":
        """Copy with new color and/or semantic latent; geometry is untouched"""
        changes = {}
        if color is not None:
            changes["color"] = color
        if semantic_latent is not None:
            changes["semantic_latent"] = semantic_latent
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True, eq=False)
class Camera:
    """Pinhole camera: x_cam = R x_world + t, image x to the right, y down, depth along +z"""
    rotation: np.ndarray
    translation: np.ndarray
    focal: np.ndarray
    principal_point: np.ndarray
    width: int
    height: int

    def __post_init__(self):
        set_field = object.__setattr__
        rotation = np.asarray(self.rotation, dtype=np.float64)
        if rotation.shape != (3, 3) or not np.all(np.isfinite(rotation)):
            raise InvalidCameraError("rotation must be a finite 3x3 matrix")
        if np.abs(rotation.T @ rotation - np.eye(3)).max() > ORTHONORMAL_TOLERANCE:
            raise InvalidCameraError("rotation is not orthonormal")
        set_field(self, "rotation", rotation)
        set_field(self, "translation", _vector(self.translation, 3, "translation", InvalidCameraError))
        set_field(self, "focal", _vector(self.focal, 2, "focal", InvalidCameraError))
        set_field(self, "principal_point", _vector(self.principal_point, 2, "principal_point", InvalidCameraError))
        if int(self.width) < 1 or int(self.height) < 1:
            raise InvalidCameraError(f"image size must be positive, got {self.width}x{self.height}")
        set_field(self, "width", int(self.width))
        set_field(self, "height", int(self.height))

    @classmethod
    def look_at(
        cls,
        eye: Sequence[float],
        target: Sequence[float],
        focal: float,
        width: int,
        height: int,
        up: Sequence[float] = (0.0, 1.0, 0.0),
    ) -> "Camera":
        """Camera at `eye` looking at `target`, world `up` mapped to image up"""
        eye = np.asarray(eye, dtype=np.float64)
        forward = np.asarray(target, dtype=np.float64) - eye
        forward /= np.linalg.norm(forward)
        right = np.cross(forward, np.asarray(up, dtype=np.float64))
        norm = np.linalg.norm(right)
        if norm < 1e-12:
            raise InvalidCameraError("up vector is parallel to the viewing direction")
        right /= norm
        down = np.cross(forward, right)
        rotation = np.stack([right, down, forward])
        return cls(
            rotation=rotation,
            translation=-rotation @ eye,
            focal=(focal, focal),
            principal_point=((width - 1) / 2.0, (height - 1) / 2.0),
            width=width,
            height=height,
        )

    @property
    def diagonal(self) -> float:
        return float(np.hypot(self.width, self.height))

    def to_camera_frame(self, point) -> np.ndarray:
        return self.rotation @ np.asarray(point, dtype=np.float64) + self.translation


def project(camera: Camera, point, depth_epsilon: float = DEPTH_EPSILON) -> Optional[np.ndarray]:
    """Pinhole projection of a world point to pixel coordinates (x, y).

    Returns None when the point is behind the camera (depth <= depth_epsilon);
    such Gaussians never become visible.
    """
    x, y, z = camera.to_camera_frame(point)
    if z <= depth_epsilon:
        return None
    fx, fy = camera.focal
    cx, cy = camera.principal_point
    return np.array([fx * x / z + cx, fy * y / z + cy])


def scene_by_id(scene: Iterable[Gaussian]) -> Dict[int, Gaussian]:
    """Index a scene by Gaussian id, rejecting duplicates"""
    index: Dict[int, Gaussian] = {}
    for g in scene:
        if g.id in index:
            raise InvalidGaussianError(f"duplicate Gaussian id {g.id}")
        index[g.id] = g
    return index


def snapshot_colors(scene: Iterable[Gaussian]) -> List[Gaussian]:
    """Copy of the scene with original_color set to the current color"""
    return [dataclasses.replace(g, original_color=g.color.copy()) for g in scene]
