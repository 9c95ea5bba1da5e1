"""
Scene presets - the standard toy grid, its camera arc, and random desk-scale scenes
"""
import itertools
from typing import List, Tuple

import numpy as np

from .model import Camera, Gaussian

SEMANTIC_DIM = 16
TOY_IMAGE_SIZE = 32
TOY_FOCAL = 48.0
TOY_RADIUS = 5.0
TOY_HEIGHT = 2.0
TOY_ARC_DEGREES = (-35.0, 10.0, 55.0)
TOY_STD = 0.3
TOY_OPACITY = 0.85

# One base color per grid column (x = -1, 0, 1); the x = 1 column is the edit target
TOY_COLUMN_COLORS = ((0.2, 0.6, 0.3), (0.7, 0.6, 0.2), (0.3, 0.4, 0.7))
TOY_TARGET_COLUMN = 2


def object_direction(index: int, dim: int = SEMANTIC_DIM) -> np.ndarray:
    direction = np.zeros(dim)
    direction[index % dim] = 1.0
    return direction


def toy_target_semantic(dim: int = SEMANTIC_DIM) -> np.ndarray:
    """Edited semantics of the target object: its own direction tilted toward a new one"""
    semantic = object_direction(0, dim) + 0.5 * object_direction(3, dim)
    return semantic / np.linalg.norm(semantic)


def toy_scene(dim: int = SEMANTIC_DIM) -> List[Gaussian]:
    """12 Gaussians on a 3 x 2 x 2 grid; ids 8..11 (the x = 1 column) form the target object.

    Semantic latents point along one direction per column (target column along
    axis 0, the others along axes 1 and 2) with a small fixed per-Gaussian tilt.
    """
    rng = np.random.default_rng(20240611)
    column_objects = (1, 2, 0)
    scene = []
    for gid, (ix, y, z) in enumerate(itertools.product(range(3), (-0.5, 0.5), (-0.5, 0.5))):
        latent = object_direction(column_objects[ix], dim) + 0.1 * rng.standard_normal(dim)
        latent /= np.linalg.norm(latent)
        color = np.array(TOY_COLUMN_COLORS[ix]) + 0.05 * (y + z)
        scene.append(Gaussian(
            id=gid,
            center=(ix - 1.0, y, z),
            covariance=np.eye(3) * TOY_STD ** 2,
            color=color,
            opacity=TOY_OPACITY,
            semantic_latent=latent,
            original_color=color,
        ))
    return scene


def toy_target_ids() -> Tuple[int, ...]:
    return tuple(range(4 * TOY_TARGET_COLUMN, 4 * TOY_TARGET_COLUMN + 4))


def toy_cameras(size: int = TOY_IMAGE_SIZE) -> List[Camera]:
    """Three cameras on a 90 degree arc around the vertical axis, looking slightly down"""
    cameras = []
    for degrees in TOY_ARC_DEGREES:
        theta = np.deg2rad(degrees)
        eye = (TOY_RADIUS * np.sin(theta), TOY_HEIGHT, TOY_RADIUS * np.cos(theta))
        cameras.append(Camera.look_at(eye, (0.0, 0.0, 0.0), TOY_FOCAL, size, size))
    return cameras


def random_scene(
    n: int,
    seed: int,
    dim: int = SEMANTIC_DIM,
    spread: float = 0.8,
) -> List[Gaussian]:
    """Random Gaussians around the origin, sized to cover a few pixels in `random_cameras`"""
    rng = np.random.default_rng(seed)
    scene = []
    for gid in range(n):
        basis = rng.standard_normal((3, 3)) * 0.12
        covariance = basis @ basis.T + np.eye(3) * 0.01
        color = rng.uniform(0.05, 0.95, 3)
        scene.append(Gaussian(
            id=gid,
            center=rng.uniform(-spread, spread, 3),
            covariance=covariance,
            color=color,
            opacity=float(rng.uniform(0.3, 0.9)),
            semantic_latent=rng.standard_normal(dim),
            original_color=rng.uniform(0.05, 0.95, 3),
        ))
    return scene


def random_cameras(views: int, size: int, seed: int) -> List[Camera]:
    rng = np.random.default_rng(seed)
    cameras = []
    for _ in range(views):
        theta = rng.uniform(-0.6, 0.6)
        eye = (4.0 * np.sin(theta), rng.uniform(-0.5, 0.5), 4.0 * np.cos(theta))
        cameras.append(Camera.look_at(eye, (0.0, 0.0, 0.0), size * 1.2, size, size))
    return cameras
