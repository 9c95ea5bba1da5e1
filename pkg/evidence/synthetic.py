"""
Synthetic edited-view evidence - stands in for a 2D diffusion editor.

Appearance descriptor (fixed, per pixel, computed on the edited image with
edge replication):
    [0:3]  mean color of the 3x3 patch
    [3:6]  per-channel gradient magnitude sqrt(gx^2 + gy^2), central differences
    [6:]   zeros up to appearance_dim
"""
import logging
from typing import Sequence

import numpy as np
from scipy import ndimage

from scene import FOOTPRINT_MIN, Camera, Gaussian, composite, footprint_raster, render_view
from scene.model import scene_by_id
from scene.render import RenderOutput

from .errors import EvidenceError, NoVisibleTargetError
from .model import EditedViewEvidence, EditSpec

logger = logging.getLogger(__name__)

# SeedSequence spawn key separating evidence noise from other seeded streams
EVIDENCE_STREAM = 1


def appearance_descriptor(image: np.ndarray, dim: int) -> np.ndarray:
    """H x W x dim local descriptor of an RGB image"""
    image = np.asarray(image, dtype=np.float64)
    mean = ndimage.uniform_filter(image, size=(3, 3, 1), mode="nearest")
    padded = np.pad(image, ((1, 1), (1, 1), (0, 0)), mode="edge")
    gx = 0.5 * (padded[1:-1, 2:] - padded[1:-1, :-2])
    gy = 0.5 * (padded[2:, 1:-1] - padded[:-2, 1:-1])
    gradient = np.sqrt(gx * gx + gy * gy)
    height, width = image.shape[:2]
    descriptor = np.zeros((height, width, dim))
    descriptor[:, :, 0:3] = mean
    descriptor[:, :, 3:6] = gradient
    return descriptor


def _spill(image: np.ndarray, footprint: np.ndarray, spec: EditSpec) -> np.ndarray:
    """Blend a blurred halo of the target footprint toward the target color"""
    halo = ndimage.gaussian_filter(footprint, sigma=spec.spill_radius, mode="constant")
    peak = halo.max()
    if peak <= 0.0:
        return image
    weight = spec.spill_strength * (halo / peak)
    return (1.0 - weight[:, :, None]) * image + weight[:, :, None] * spec.target_color[None, None, :]


def generate_synthetic_evidence(
    scene: Sequence[Gaussian],
    camera: Camera,
    spec: EditSpec,
    view_index: int = 0,
    render: RenderOutput = None,
) -> EditedViewEvidence:
    """Render the view and build the evidence a 2D editor would produce for `spec`.

    Noise is drawn from a stream keyed on (seed, view_index), so views can be
    generated in any order or in parallel.
    """
    index = scene_by_id(scene)
    unknown = sorted(spec.target_region - set(index))
    if unknown:
        raise EvidenceError(f"target ids not in scene: {unknown}")
    if render is None:
        render = render_view(scene, camera)

    visible = sorted(i for i in spec.target_region if i in render.footprints)
    if not visible:
        raise NoVisibleTargetError(f"view {view_index}: none of {sorted(spec.target_region)} is visible")

    colors = {
        gid: (spec.target_color if gid in spec.target_region else index[gid].color)
        for gid in render.depth_order
    }
    edited = composite(render, colors)
    footprint = footprint_raster(render, visible, field="raw")
    if spec.spill_strength > 0.0:
        edited = _spill(edited, footprint, spec)
    edited = np.clip(edited, 0.0, 1.0)

    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, EVIDENCE_STREAM, view_index]))
    attention = footprint
    if spec.attention_noise_sigma > 0.0:
        attention = np.maximum(footprint + rng.normal(0.0, spec.attention_noise_sigma, footprint.shape), 0.0)

    inside = footprint > FOOTPRINT_MIN
    height, width = footprint.shape
    semantic_dim = spec.target_semantic.size
    semantics = np.zeros((height, width, semantic_dim))
    semantics[inside] = spec.target_semantic
    if spec.feature_noise_sigma > 0.0:
        noise = rng.normal(0.0, spec.feature_noise_sigma, (height, width, semantic_dim))
        semantics[inside] += noise[inside]

    evidence = EditedViewEvidence(
        edited_image=edited,
        attention=attention,
        semantic_features=semantics,
        appearance_features=appearance_descriptor(edited, spec.appearance_dim),
        mask=inside if spec.with_mask else None,
    )
    logger.debug(
        f"View {view_index}: {len(visible)} visible targets, attention mass {float(evidence.attention.sum()):.4f}"
    )
    return evidence
