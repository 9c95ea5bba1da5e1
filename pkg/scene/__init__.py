"""
Gaussian scene model: primitives, cameras, projection and the point-splat renderer
"""
from .errors import InvalidCameraError, InvalidGaussianError, SceneError, SceneFormatError
from .io import (
    camera_from_dict,
    camera_to_dict,
    gaussian_from_dict,
    gaussian_to_dict,
    load_camera,
    load_scene,
    save_camera,
    save_scene,
)
from .model import Camera, Gaussian, project, scene_by_id, snapshot_colors
from .render import (
    FOOTPRINT_MIN,
    Footprint,
    RenderOutput,
    composite,
    footprint_raster,
    render_view,
)

__all__ = [
    "Camera",
    "Gaussian",
    "Footprint",
    "RenderOutput",
    "FOOTPRINT_MIN",
    "project",
    "render_view",
    "composite",
    "footprint_raster",
    "scene_by_id",
    "snapshot_colors",
    "load_scene",
    "save_scene",
    "load_camera",
    "save_camera",
    "gaussian_to_dict",
    "gaussian_from_dict",
    "camera_to_dict",
    "camera_from_dict",
    "SceneError",
    "InvalidGaussianError",
    "InvalidCameraError",
    "SceneFormatError",
]
