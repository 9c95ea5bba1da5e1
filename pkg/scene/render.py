"""
Point-splat renderer - EWA footprints with front-to-back alpha compositing
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Sequence, Tuple

import numpy as np

from .model import DEPTH_EPSILON, Camera, Gaussian

logger = logging.getLogger(__name__)

FOOTPRINT_MIN = 1e-4
WEIGHT_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class Footprint:
    """Sparse per-pixel weights of one Gaussian in one view.

    `weights` are the composited contributions kappa(p) (transmittance times
    splat weight); `raw` are the un-occluded splat weights alpha * G(p).
    """
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    raw: np.ndarray

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    @property
    def raw_mass(self) -> float:
        return float(self.raw.sum())


@dataclass(frozen=True, eq=False)
class RenderOutput:
    image: np.ndarray
    footprints: Dict[int, Footprint]
    visibility: Dict[int, float]
    visible_ids: Tuple[int, ...]
    projections: Dict[int, np.ndarray]
    depth_order: Tuple[int, ...]

    @property
    def height(self) -> int:
        return self.image.shape[0]

    @property
    def width(self) -> int:
        return self.image.shape[1]


def splat_covariance(camera: Camera, gaussian: Gaussian) -> Tuple[np.ndarray, float]:
    """Image-plane covariance J R Sigma R^T J^T and camera depth of the center"""
    x, y, z = camera.to_camera_frame(gaussian.center)
    fx, fy = camera.focal
    jacobian = np.array([
        [fx / z, 0.0, -fx * x / (z * z)],
        [0.0, fy / z, -fy * y / (z * z)],
    ])
    world_to_image = jacobian @ camera.rotation
    return world_to_image @ gaussian.covariance @ world_to_image.T, z


def _splat(camera: Camera, gaussian: Gaussian, grid_x: np.ndarray, grid_y: np.ndarray):
    """Dense raw weights alpha * exp(-1/2 d^T S^-1 d) over the image, floored"""
    cov2d, depth = splat_covariance(camera, gaussian)
    fx, fy = camera.focal
    cx, cy = camera.principal_point
    x, y, _ = camera.to_camera_frame(gaussian.center)
    mean = np.array([fx * x / depth + cx, fy * y / depth + cy])

    inv = np.linalg.inv(cov2d)
    dx = grid_x - mean[0]
    dy = grid_y - mean[1]
    q = inv[0, 0] * dx * dx + 2.0 * inv[0, 1] * dx * dy + inv[1, 1] * dy * dy
    raw = gaussian.opacity * np.exp(-0.5 * q)
    raw[raw < WEIGHT_FLOOR] = 0.0
    return raw, mean, depth


def render_view(
    scene: Sequence[Gaussian],
    camera: Camera,
    footprint_min: float = FOOTPRINT_MIN,
    depth_epsilon: float = DEPTH_EPSILON,
) -> RenderOutput:
    """Render one view and record per-Gaussian contributions and visibility.

    Gaussians are composited front to back (depth ascending, ties by id).
    Gaussians behind the camera or with total splat weight below
    `footprint_min` are left out of the composite entirely.
    """
    height, width = camera.height, camera.width
    grid_y, grid_x = np.mgrid[0:height, 0:width].astype(np.float64)

    candidates = []
    for g in scene:
        if camera.to_camera_frame(g.center)[2] <= depth_epsilon:
            continue
        raw, mean, depth = _splat(camera, g, grid_x, grid_y)
        if raw.sum() < footprint_min:
            continue
        candidates.append((depth, g.id, g, raw, mean))
    candidates.sort(key=lambda item: (item[0], item[1]))

    transmittance = np.ones((height, width))
    footprints: Dict[int, Footprint] = {}
    visibility: Dict[int, float] = {}
    projections: Dict[int, np.ndarray] = {}
    order = []
    for _, gid, g, raw, mean in candidates:
        rows, cols = np.nonzero(raw)
        splat = raw[rows, cols]
        kappa = transmittance[rows, cols] * splat
        transmittance[rows, cols] *= 1.0 - splat
        nu = min(1.0, max(0.0, float(kappa.sum() / splat.sum())))
        if nu <= 0.0:
            continue
        footprints[gid] = Footprint(rows=rows, cols=cols, weights=kappa, raw=splat)
        visibility[gid] = nu
        projections[gid] = mean
        order.append(gid)

    colors = {g.id: g.color for g in scene if g.id in footprints}
    render = RenderOutput(
        image=np.zeros((height, width, 3)),
        footprints=footprints,
        visibility=visibility,
        visible_ids=tuple(sorted(footprints)),
        projections=projections,
        depth_order=tuple(order),
    )
    object.__setattr__(render, "image", composite(render, colors))
    logger.debug(f"Rendered {len(order)} of {len(scene)} Gaussians at {width}x{height}")
    return render


def composite(render: RenderOutput, colors: Mapping[int, np.ndarray]) -> np.ndarray:
    """Image sum_i kappa_i(p) c_i for the render's (fixed) geometry and opacities.

    Accumulates in depth order so that recoloring with the render's own colors
    reproduces `render.image` bit for bit.
    """
    image = np.zeros((render.height, render.width, 3))
    for gid in render.depth_order:
        fp = render.footprints[gid]
        image[fp.rows, fp.cols] += fp.weights[:, None] * np.asarray(colors[gid], dtype=np.float64)[None, :]
    return image


def footprint_raster(render: RenderOutput, ids: Iterable[int], field: str = "raw") -> np.ndarray:
    """Dense H x W sum of the given Gaussians' footprint weights ("raw" or "weights")"""
    raster = np.zeros((render.height, render.width))
    for gid in sorted(set(ids)):
        fp = render.footprints.get(gid)
        if fp is None:
            continue
        raster[fp.rows, fp.cols] += getattr(fp, field)
    return raster
