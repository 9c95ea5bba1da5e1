"""
Prompt-aware prototype extraction - attention normalization, support, clustering, aggregation
"""
import logging
from typing import List, Optional

import numpy as np
from scipy import ndimage

from evidence import EditedViewEvidence

from .clustering import MAX_LLOYD_ITERS, cluster_support, pixel_weights
from .errors import AllZeroAttentionError, EmptySupportError, PrototypeError, ZeroRegionAttentionError
from .model import Prototype, SupportPartition

logger = logging.getLogger(__name__)

ATTENTION_EPSILON = 1e-8
NORM_EPSILON = 1e-8


def normalize_attention(attention: np.ndarray, epsilon: float = ATTENTION_EPSILON) -> np.ndarray:
    """A(p) / (max A + epsilon)"""
    attention = np.asarray(attention, dtype=np.float64)
    if attention.size == 0 or not np.all(np.isfinite(attention)) or attention.min() < 0.0:
        raise PrototypeError("attention must be finite and nonnegative")
    peak = attention.max()
    if peak <= 0.0:
        raise AllZeroAttentionError("attention is zero everywhere")
    return attention / (peak + epsilon)


def extract_support(
    normalized: np.ndarray,
    threshold: float = 0.3,
    mask: Optional[np.ndarray] = None,
    min_component: int = 4,
) -> np.ndarray:
    """Pixels with normalized attention >= threshold (inside `mask`), minus small
    4-connected components. Returns N x 2 (x, y) coordinates in row-major order.
    """
    if not 0.0 < threshold < 1.0:
        raise PrototypeError(f"support threshold must lie in (0,1), got {threshold}")
    support = np.asarray(normalized) >= threshold
    if mask is not None:
        support &= np.asarray(mask, dtype=bool)

    labels, components = ndimage.label(support)
    if components and min_component > 1:
        sizes = np.bincount(labels.ravel())
        small = np.flatnonzero(sizes < min_component)
        support &= ~np.isin(labels, small[small > 0])

    rows, cols = np.nonzero(support)
    if rows.size == 0:
        raise EmptySupportError(f"no pixel survives threshold {threshold} and min component {min_component}")
    return np.stack([cols, rows], axis=1)


def _unit(vector: np.ndarray, epsilon: float) -> np.ndarray:
    return vector / np.sqrt(vector @ vector + epsilon * epsilon)


def build_prototypes(
    partition: SupportPartition,
    normalized: np.ndarray,
    semantic_features: np.ndarray,
    appearance_features: np.ndarray,
    normalize_mass: bool = True,
    semantic_epsilon: float = NORM_EPSILON,
    appearance_epsilon: float = NORM_EPSILON,
) -> List[Prototype]:
    """Attention-weighted centroid, semantic and appearance means per region.

    Masses are region attention over support attention (they sum to one) unless
    `normalize_mass` is off, in which case the raw region attention is kept.
    """
    pixels = partition.pixels
    weights = pixel_weights(pixels, normalized)
    semantics = np.asarray(semantic_features, dtype=np.float64)[pixels[:, 1], pixels[:, 0]]
    appearance = np.asarray(appearance_features, dtype=np.float64)[pixels[:, 1], pixels[:, 0]]
    points = pixels.astype(np.float64)

    regions = partition.regions()
    totals = np.array([weights[idx].sum() for idx in regions])
    for m, (idx, total) in enumerate(zip(regions, totals)):
        if idx.size == 0 or total <= 0.0:
            raise ZeroRegionAttentionError(f"region {m} has no attention mass")
    support_total = totals.sum()

    prototypes = []
    for idx, total in zip(regions, totals):
        w = weights[idx]
        prototypes.append(Prototype(
            position=w @ points[idx] / total,
            semantic=_unit(w @ semantics[idx] / total, semantic_epsilon),
            mass=float(total / support_total) if normalize_mass else float(total),
            appearance=_unit(w @ appearance[idx] / total, appearance_epsilon),
            pixel_count=int(idx.size),
        ))
    return prototypes


def pixel_prototypes(
    pixels: np.ndarray,
    normalized: np.ndarray,
    semantic_features: np.ndarray,
    appearance_features: np.ndarray,
    normalize_mass: bool = True,
) -> List[Prototype]:
    """One prototype per support pixel (the run without prototype compression)"""
    pixels = np.asarray(pixels)
    partition = SupportPartition(
        pixels=pixels,
        labels=np.arange(pixels.shape[0]),
        centers=pixels.astype(np.float64),
    )
    return build_prototypes(partition, normalized, semantic_features, appearance_features, normalize_mass)


def extract_prototypes(
    evidence: EditedViewEvidence,
    count: int = 32,
    threshold: float = 0.3,
    min_component: int = 4,
    max_lloyd_iters: int = MAX_LLOYD_ITERS,
    seed: int = 0,
    view_index: int = 0,
    normalize_mass: bool = True,
    per_pixel: bool = False,
) -> List[Prototype]:
    """Full per-view pipeline from evidence to prototypes"""
    normalized = normalize_attention(evidence.attention)
    pixels = extract_support(normalized, threshold, evidence.mask, min_component)
    if per_pixel:
        prototypes = pixel_prototypes(
            pixels, normalized, evidence.semantic_features, evidence.appearance_features, normalize_mass
        )
    else:
        partition = cluster_support(pixels, normalized, count, seed, max_lloyd_iters, view_index)
        prototypes = build_prototypes(
            partition, normalized, evidence.semantic_features, evidence.appearance_features, normalize_mass
        )
    logger.info(f"View {view_index}: {len(prototypes)} prototypes from {pixels.shape[0]} support pixels")
    return prototypes
