"""
Confidence-weighted k-means over support pixels (k-means++ seeding, Lloyd iteration)
"""
import logging

import numpy as np
from scipy.spatial.distance import cdist

from .errors import PrototypeError, TooFewPixelsError
from .model import SupportPartition

logger = logging.getLogger(__name__)

MAX_LLOYD_ITERS = 50
CLUSTER_STREAM = 2


def pixel_weights(pixels: np.ndarray, attention: np.ndarray) -> np.ndarray:
    return np.asarray(attention, dtype=np.float64)[pixels[:, 1], pixels[:, 0]]


def clustering_objective(points: np.ndarray, weights: np.ndarray, labels: np.ndarray, centers: np.ndarray) -> float:
    """sum_p w(p) ||xi(p) - mu_label(p)||^2"""
    diff = points - centers[labels]
    return float(np.sum(weights * np.einsum("ij,ij->i", diff, diff)))


def weighted_means(points: np.ndarray, weights: np.ndarray, labels: np.ndarray, count: int, fallback=None) -> np.ndarray:
    """Attention-weighted mean per cluster; clusters without weight keep `fallback`"""
    totals = np.bincount(labels, weights=weights, minlength=count)
    sums = np.stack(
        [np.bincount(labels, weights=weights * points[:, k], minlength=count) for k in range(points.shape[1])],
        axis=1,
    )
    centers = sums / np.where(totals > 0, totals, 1.0)[:, None]
    if fallback is not None:
        centers[totals <= 0] = fallback[totals <= 0]
    return centers


def kmeans_plus_plus(points: np.ndarray, weights: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Weighted k-means++: next center drawn with probability proportional to w(p) d(p)^2"""
    n = points.shape[0]
    probabilities = weights / weights.sum() if weights.sum() > 0 else np.full(n, 1.0 / n)
    chosen = [int(rng.choice(n, p=probabilities))]
    closest = cdist(points, points[chosen[0]][None, :], "sqeuclidean")[:, 0]
    for _ in range(1, count):
        potential = weights * closest
        total = potential.sum()
        if total > 0:
            candidate = int(rng.choice(n, p=potential / total))
        else:
            # every point already sits on a center
            candidate = int(np.argmax(closest))
        chosen.append(candidate)
        closest = np.minimum(closest, cdist(points, points[candidate][None, :], "sqeuclidean")[:, 0])
    return points[chosen].astype(np.float64)


def _reseed_empty(points, weights, labels, centers, distances):
    """Move the highest-residual point into each empty cluster"""
    count = centers.shape[0]
    for m in range(count):
        if np.any(labels == m):
            continue
        sizes = np.bincount(labels, minlength=count)
        residual = weights * distances[np.arange(len(labels)), labels]
        residual[sizes[labels] <= 1] = -np.inf
        p = int(np.argmax(residual))
        labels[p] = m
        centers[m] = points[p]
        distances[:, m] = np.sum((points - points[p]) ** 2, axis=1)
    return labels, centers


def cluster_support(
    pixels: np.ndarray,
    attention: np.ndarray,
    count: int,
    seed: int = 0,
    max_iters: int = MAX_LLOYD_ITERS,
    view_index: int = 0,
) -> SupportPartition:
    """Partition support pixels into `count` regions minimizing the attention-weighted
    within-region squared distance. Ties in assignment go to the lower center index.
    """
    pixels = np.asarray(pixels)
    if count < 1:
        raise PrototypeError(f"prototype count must be positive, got {count}")
    if pixels.shape[0] < count:
        raise TooFewPixelsError(f"support has {pixels.shape[0]} pixels, fewer than {count} prototypes")

    points = pixels.astype(np.float64)
    weights = pixel_weights(pixels, attention)
    rng = np.random.default_rng(np.random.SeedSequence([seed, CLUSTER_STREAM, view_index]))
    centers = kmeans_plus_plus(points, weights, count, rng)

    labels = None
    history = []
    for iteration in range(max_iters + 1):
        distances = cdist(points, centers, "sqeuclidean")
        new_labels = np.argmin(distances, axis=1)
        new_labels, centers = _reseed_empty(points, weights, new_labels, centers, distances)
        history.append(clustering_objective(points, weights, new_labels, centers))
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        if iteration == max_iters:
            logger.debug(f"Lloyd iteration stopped at the cap of {max_iters}")
            break
        centers = weighted_means(points, weights, labels, count, centers)

    centers = weighted_means(points, weights, labels, count, centers)
    history.append(clustering_objective(points, weights, labels, centers))
    return SupportPartition(pixels=pixels, labels=labels, centers=centers, objective_history=tuple(history))
