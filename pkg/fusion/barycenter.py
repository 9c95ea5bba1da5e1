"""
Canonical edit field - confidence weights and the closed-form anchored barycenter
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from scene import Gaussian
from transport import TransportSolution

from .errors import FusionError, NoValidViewsError, ViewMismatchError

logger = logging.getLogger(__name__)

WEIGHT_DELTA = 1e-8


def fusion_weights(support_masses: Mapping[int, float], delta: float = WEIGHT_DELTA) -> Dict[int, float]:
    """omega_v = w_v / (sum w + delta) over views with w_v > 0, renormalized to sum one"""
    positive = {v: float(w) for v, w in support_masses.items() if w > 0.0}
    if not positive:
        raise NoValidViewsError("no view has positive support mass")
    total = sum(positive.values())
    raw = {v: w / (total + delta) for v, w in positive.items()}
    norm = sum(raw.values())
    return {v: w / norm for v, w in sorted(raw.items())}


def canonical_target(
    weights: Mapping[int, float],
    targets: Mapping[int, np.ndarray],
    latent: np.ndarray,
    rho: float,
) -> np.ndarray:
    """z* = (sum_v omega_v y_v + rho s) / (sum_v omega_v + rho)"""
    latent = np.asarray(latent, dtype=np.float64)
    total = sum(weights.values()) + rho
    if total <= 0.0:
        raise FusionError("fusion weights plus rho must be positive")
    numerator = rho * latent
    for v, w in weights.items():
        numerator = numerator + w * np.asarray(targets[v], dtype=np.float64)
    return numerator / total


def stability_gap(
    weights: Mapping[int, float],
    targets: Mapping[int, np.ndarray],
    perturbed_targets: Mapping[int, np.ndarray],
    latent: np.ndarray,
    perturbed_latent: np.ndarray,
    rho: float,
) -> Tuple[float, float]:
    """Distance between the two canonical targets and its upper bound"""
    if set(targets) != set(weights) or set(perturbed_targets) != set(weights):
        raise ViewMismatchError(
            f"views differ: weights {sorted(weights)}, targets {sorted(targets)}, perturbed {sorted(perturbed_targets)}"
        )
    z = canonical_target(weights, targets, latent, rho)
    z_tilde = canonical_target(weights, perturbed_targets, perturbed_latent, rho)
    spread = sum(
        w * np.linalg.norm(np.asarray(targets[v]) - np.asarray(perturbed_targets[v])) for v, w in weights.items()
    )
    spread += rho * np.linalg.norm(np.asarray(latent) - np.asarray(perturbed_latent))
    return float(np.linalg.norm(z - z_tilde)), float(spread / (sum(weights.values()) + rho))


def ema_update(previous: Optional[np.ndarray], target: np.ndarray, momentum: float) -> np.ndarray:
    """m * previous + (1 - m) * target; the first call returns the target"""
    if previous is None:
        return np.array(target, dtype=np.float64, copy=True)
    return momentum * previous + (1.0 - momentum) * target


@dataclass(frozen=True, eq=False)
class FusedTarget:
    valid_views: Tuple[int, ...]
    weights: Dict[int, float]
    canonical_target: np.ndarray


@dataclass(frozen=True, eq=False)
class CanonicalField:
    """Per-Gaussian fused semantic targets. Gaussians without valid views keep their latent."""
    entries: Dict[int, FusedTarget]
    rho: float
    # view -> Gaussian id -> y_i^v, kept for gating and reports
    view_targets: Dict[int, Dict[int, np.ndarray]] = field(default_factory=dict, repr=False)

    @property
    def ids(self) -> Tuple[int, ...]:
        return tuple(sorted(self.entries))

    def target(self, gaussian_id: int) -> np.ndarray:
        return self.entries[gaussian_id].canonical_target

    def targets(self, ids: Sequence[int]) -> np.ndarray:
        return np.stack([self.target(i) for i in ids])

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "gaussians": [
                {
                    "id": i,
                    "valid_views": list(e.valid_views),
                    "weights": {str(v): w for v, w in e.weights.items()},
                    "canonical_target": e.canonical_target.tolist(),
                }
                for i, e in sorted(self.entries.items())
            ],
        }


def support_by_gaussian(solutions: Sequence[Optional[TransportSolution]]) -> Dict[int, Dict[int, float]]:
    """Gaussian id -> view -> support mass w_i^v, for every Gaussian some view sees"""
    support: Dict[int, Dict[int, float]] = {}
    for v, solution in enumerate(solutions):
        if solution is None:
            continue
        for row, gid in enumerate(solution.gaussian_ids):
            support.setdefault(gid, {})[v] = float(solution.support_mass[row])
    return support


def fuse_views(
    scene: Sequence[Gaussian],
    solutions: Sequence[Optional[TransportSolution]],
    rho: float = 0.1,
    delta: float = WEIGHT_DELTA,
) -> CanonicalField:
    """Fuse per-view semantic targets into one canonical target per Gaussian.

    `solutions` is indexed by view; None marks a view skipped this round.
    """
    if rho < 0.0:
        raise FusionError(f"rho must be nonnegative, got {rho}")
    view_targets: Dict[int, Dict[int, np.ndarray]] = {}
    for v, solution in enumerate(solutions):
        if solution is None:
            continue
        view_targets[v] = {gid: solution.semantic_target[row] for row, gid in enumerate(solution.gaussian_ids)}
    support = support_by_gaussian(solutions)

    entries: Dict[int, FusedTarget] = {}
    unsupported = 0
    for g in scene:
        try:
            weights = fusion_weights(support.get(g.id, {}), delta)
        except NoValidViewsError:
            unsupported += 1
            entries[g.id] = FusedTarget((), {}, g.semantic_latent.copy())
            continue
        targets = {v: view_targets[v][g.id] for v in weights}
        entries[g.id] = FusedTarget(tuple(weights), weights, canonical_target(weights, targets, g.semantic_latent, rho))
    if unsupported:
        logger.warning(f"{unsupported} Gaussians have no valid view and keep their current latent")
    return CanonicalField(entries=entries, rho=rho, view_targets=view_targets)
