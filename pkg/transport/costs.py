"""
Source/target measures and the geometric + semantic + appearance cost
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from prototypes import Prototype
from scene import Camera, Gaussian, RenderOutput, project, scene_by_id

from .errors import NoVisibleGaussiansError, TransportProblemError, ZeroFootprintError
from .problem import TransportProblem

logger = logging.getLogger(__name__)

APPEARANCE_METRICS = ("cosine", "squared_l2")
DESCRIPTOR_EPSILON = 1e-8


@dataclass(frozen=True)
class CostWeights:
    lambda_geo: float = 1.0
    lambda_sem: float = 1.0
    lambda_app: float = 0.5
    appearance_metric: str = "cosine"  # cosine | squared_l2
    delta: float = 1e-8  # cosine stabilizer

    def __post_init__(self):
        lambdas = (self.lambda_geo, self.lambda_sem, self.lambda_app)
        if min(lambdas) < 0.0 or max(lambdas) <= 0.0:
            raise TransportProblemError(f"cost weights must be nonnegative with one positive, got {lambdas}")
        if self.appearance_metric not in APPEARANCE_METRICS:
            raise TransportProblemError(
                f"appearance_metric must be one of {APPEARANCE_METRICS}, got {self.appearance_metric!r}"
            )
        if self.delta <= 0.0:
            raise TransportProblemError("delta must be positive")


def source_masses(render: RenderOutput, scene: Sequence[Gaussian]) -> Tuple[Tuple[int, ...], np.ndarray]:
    """a_i proportional to visibility times opacity over the visible Gaussians"""
    if not render.visible_ids:
        raise NoVisibleGaussiansError("no Gaussian is visible in this view")
    index = scene_by_id(scene)
    ids = render.visible_ids
    raw = np.array([render.visibility[i] * index[i].opacity for i in ids])
    return ids, raw / raw.sum()


def gaussian_appearance_descriptor(
    render: RenderOutput,
    appearance_features: np.ndarray,
    gaussian_id: int,
    epsilon: float = DESCRIPTOR_EPSILON,
) -> np.ndarray:
    """Footprint-weighted mean of the appearance raster, L2-normalized"""
    footprint = render.footprints.get(gaussian_id)
    if footprint is None or footprint.mass <= 0.0:
        raise ZeroFootprintError(f"Gaussian {gaussian_id} has no footprint in this view")
    features = np.asarray(appearance_features, dtype=np.float64)[footprint.rows, footprint.cols]
    mean = footprint.weights @ features / footprint.mass
    return mean / np.sqrt(mean @ mean + epsilon * epsilon)


def _cosine_distance(x: np.ndarray, y: np.ndarray, delta: float) -> np.ndarray:
    """1 - <x_i, y_j> / (||x_i|| ||y_j|| + delta) for every row pair"""
    norms = np.linalg.norm(x, axis=1)[:, None] * np.linalg.norm(y, axis=1)[None, :]
    return 1.0 - (x @ y.T) / (norms + delta)


def cost_matrix(
    scene: Sequence[Gaussian],
    camera: Camera,
    render: RenderOutput,
    prototypes: List[Prototype],
    appearance_features: np.ndarray,
    weights: CostWeights,
    ids: Sequence[int] = None,
) -> np.ndarray:
    """C_im over visible Gaussians (rows, in `ids` order) and prototypes (columns).

    Pixel offsets are divided by the image diagonal before squaring.
    """
    if not prototypes:
        raise TransportProblemError("no prototypes to transport onto")
    ids = tuple(render.visible_ids if ids is None else ids)
    if not ids:
        raise NoVisibleGaussiansError("no Gaussian is visible in this view")
    index = scene_by_id(scene)
    n, m = len(ids), len(prototypes)
    cost = np.zeros((n, m))

    if weights.lambda_geo > 0.0:
        positions = np.stack([p.position for p in prototypes])
        projected = np.stack([project(camera, index[i].center) for i in ids]) / camera.diagonal
        offsets = projected[:, None, :] - positions[None, :, :] / camera.diagonal
        cost += weights.lambda_geo * np.sum(offsets * offsets, axis=2)

    if weights.lambda_sem > 0.0:
        latents = np.stack([index[i].semantic_latent for i in ids])
        semantics = np.stack([p.semantic for p in prototypes])
        if latents.shape[1] != semantics.shape[1]:
            raise TransportProblemError(
                f"semantic latent dim {latents.shape[1]} differs from prototype semantic dim {semantics.shape[1]}"
            )
        cost += weights.lambda_sem * _cosine_distance(latents, semantics, weights.delta)

    if weights.lambda_app > 0.0:
        descriptors = np.stack([gaussian_appearance_descriptor(render, appearance_features, i) for i in ids])
        appearance = np.stack([p.appearance for p in prototypes])
        if weights.appearance_metric == "cosine":
            term = _cosine_distance(descriptors, appearance, weights.delta)
        else:
            diff = descriptors[:, None, :] - appearance[None, :, :]
            term = np.sum(diff * diff, axis=2)
        cost += weights.lambda_app * term

    # rounding can push a perfect cosine match a hair below zero
    return np.maximum(cost, 0.0)


def build_transport_problem(
    scene: Sequence[Gaussian],
    camera: Camera,
    render: RenderOutput,
    prototypes: List[Prototype],
    appearance_features: np.ndarray,
    weights: CostWeights,
    epsilon: float = 0.05,
    tau_source: float = 1.0,
    tau_target: float = 1.0,
) -> TransportProblem:
    """Measures, cost and prototype semantics for one view, zero masses dropped"""
    ids, a = source_masses(render, scene)
    cost = cost_matrix(scene, camera, render, prototypes, appearance_features, weights, ids)
    return TransportProblem.build(
        cost=cost,
        source_mass=a,
        target_mass=np.array([p.mass for p in prototypes]),
        epsilon=epsilon,
        tau_source=tau_source,
        tau_target=tau_target,
        gaussian_ids=ids,
        target_semantics=np.stack([p.semantic for p in prototypes]),
    )
