"""
Edit losses (image, semantic, transport, leakage) and their analytic gradients.

Geometry and opacity are frozen, so every image is linear in the colors through
the render's compositing weights; the canonical targets and transport plans are
constants within a step.
"""
import logging
from dataclasses import asdict, dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple

import numpy as np

from fusion import CanonicalField
from scene import Gaussian, RenderOutput, composite
from transport import TransportSolution

from .errors import GatingError, MissingRenderError
from .gates import GateState, gated_target

logger = logging.getLogger(__name__)

LEAK_NORMS = ("l1", "squared_l2")
IMAGE_REDUCTIONS = ("sum", "mean")
SEMANTIC_MODES = ("weighted", "gated_target")
LOSS_COLUMNS = ("step", "l_img", "l_sem", "l_uot", "l_leak", "total")


@dataclass(frozen=True)
class LossWeights:
    image: float = 1.0
    semantic: float = 1.0
    transport: float = 0.01
    leakage: float = 0.5

    def __post_init__(self):
        if min(self.image, self.semantic, self.transport, self.leakage) < 0.0:
            raise GatingError("loss weights must be nonnegative")


@dataclass(frozen=True)
class LossReport:
    l_img: float
    l_sem: float
    l_uot: float
    l_leak: float
    total: float
    weights: LossWeights

    def as_row(self, step: int) -> dict:
        return {"step": step, "l_img": self.l_img, "l_sem": self.l_sem, "l_uot": self.l_uot,
                "l_leak": self.l_leak, "total": self.total}

    def to_dict(self) -> dict:
        data = asdict(self)
        data["weights"] = asdict(self.weights)
        return data


@dataclass(frozen=True, eq=False)
class LossGradients:
    semantic: Dict[int, np.ndarray]
    color: Dict[int, np.ndarray]


def semantic_targets(
    scene: Sequence[Gaussian],
    gates: Mapping[int, GateState],
    field: CanonicalField,
    mode: str = "weighted",
) -> Dict[int, Tuple[float, np.ndarray]]:
    """Per Gaussian (weight, target) for the semantic term.

    weighted:      gamma ||s - z*||^2
    gated_target:  ||s - (gamma z* + (1 - gamma) s)||^2, target frozen from this scene
    """
    if mode not in SEMANTIC_MODES:
        raise GatingError(f"semantic mode must be one of {SEMANTIC_MODES}, got {mode!r}")
    targets = {}
    for g in scene:
        gate = _gate(gates, g.id)
        canonical = field.target(g.id) if g.id in field.entries else g.semantic_latent
        if mode == "weighted":
            targets[g.id] = (gate, canonical)
        else:
            targets[g.id] = (1.0, gated_target(gate, canonical, g.semantic_latent))
    return targets


def _gate(gates: Mapping[int, GateState], gaussian_id: int) -> float:
    state = gates.get(gaussian_id)
    return 1.0 if state is None else state.gate


def _check_views(renders: Sequence[Optional[RenderOutput]], edited_images: Sequence[np.ndarray]):
    if len(renders) != len(edited_images):
        raise MissingRenderError(f"{len(renders)} renders for {len(edited_images)} edited images")
    for v, (render, image) in enumerate(zip(renders, edited_images)):
        if render is None:
            raise MissingRenderError(f"view {v} has edited evidence but no render")
        if render.image.shape != np.shape(image):
            raise MissingRenderError(f"view {v}: render {render.image.shape} vs edited image {np.shape(image)}")


def _image_residuals(scene, renders, edited_images):
    colors = {g.id: g.color for g in scene}
    for render, edited in zip(renders, edited_images):
        yield render, composite(render, colors) - np.asarray(edited, dtype=np.float64)


def compute_losses(
    scene: Sequence[Gaussian],
    renders: Sequence[RenderOutput],
    edited_images: Sequence[np.ndarray],
    gates: Mapping[int, GateState],
    field: CanonicalField,
    solutions: Sequence[Optional[TransportSolution]],
    weights: LossWeights,
    leak_norm: str = "l1",
    image_reduction: str = "sum",
    targets: Optional[Mapping[int, Tuple[float, np.ndarray]]] = None,
) -> LossReport:
    """All four loss terms for the current scene.

    The image term is the per-view L1 photometric error, summed over pixels
    (image_reduction="sum") or averaged ("mean"), then summed over views.
    """
    _check_options(leak_norm, image_reduction)
    _check_views(renders, edited_images)
    targets = semantic_targets(scene, gates, field) if targets is None else targets

    l_img = 0.0
    for render, residual in _image_residuals(scene, renders, edited_images):
        error = float(np.abs(residual).sum())
        l_img += error / (render.height * render.width) if image_reduction == "mean" else error

    l_sem = 0.0
    l_leak = 0.0
    for g in scene:
        weight, target = targets[g.id]
        diff = g.semantic_latent - target
        l_sem += weight * float(diff @ diff)
        drift = g.color - g.original_color
        leak = float(np.abs(drift).sum()) if leak_norm == "l1" else float(drift @ drift)
        l_leak += (1.0 - _gate(gates, g.id)) * leak

    l_uot = float(sum(s.objective for s in solutions if s is not None))
    total = weights.image * l_img + weights.semantic * l_sem + weights.transport * l_uot + weights.leakage * l_leak
    return LossReport(l_img=l_img, l_sem=l_sem, l_uot=l_uot, l_leak=l_leak, total=total, weights=weights)


def loss_gradients(
    scene: Sequence[Gaussian],
    renders: Sequence[RenderOutput],
    edited_images: Sequence[np.ndarray],
    gates: Mapping[int, GateState],
    field: CanonicalField,
    weights: LossWeights,
    leak_norm: str = "l1",
    image_reduction: str = "sum",
    targets: Optional[Mapping[int, Tuple[float, np.ndarray]]] = None,
    include_leakage: bool = True,
) -> LossGradients:
    """Gradients of the weighted total with respect to every latent and color.

    The L1 terms use the subgradient sign(0) = 0; the transport term contributes nothing.
    With include_leakage=False the leak term is left out of the color gradient,
    for callers that apply it through leak_prox instead.
    """
    _check_options(leak_norm, image_reduction)
    _check_views(renders, edited_images)
    targets = semantic_targets(scene, gates, field) if targets is None else targets

    color = {g.id: np.zeros(3) for g in scene}
    for render, residual in _image_residuals(scene, renders, edited_images):
        scale = weights.image / (render.height * render.width) if image_reduction == "mean" else weights.image
        signs = np.sign(residual)
        for gid, fp in render.footprints.items():
            color[gid] += scale * (fp.weights @ signs[fp.rows, fp.cols])

    semantic = {}
    for g in scene:
        weight, target = targets[g.id]
        semantic[g.id] = 2.0 * weights.semantic * weight * (g.semantic_latent - target)
        if not include_leakage:
            continue
        drift = g.color - g.original_color
        open_share = 1.0 - _gate(gates, g.id)
        leak = np.sign(drift) if leak_norm == "l1" else 2.0 * drift
        color[g.id] = color[g.id] + weights.leakage * open_share * leak
    return LossGradients(semantic=semantic, color=color)


def leak_prox(color, original_color, strength: float, leak_norm: str = "l1") -> np.ndarray:
    """Proximal map of strength * leak(c - c0) evaluated at `color`.

    l1 soft-thresholds every component of the drift toward zero without crossing it;
    squared_l2 shrinks the drift by 1 / (1 + 2 strength).
    """
    if leak_norm not in LEAK_NORMS:
        raise GatingError(f"leak norm must be one of {LEAK_NORMS}, got {leak_norm!r}")
    if strength < 0.0:
        raise GatingError(f"prox strength must be nonnegative, got {strength}")
    original = np.asarray(original_color, dtype=np.float64)
    drift = np.asarray(color, dtype=np.float64) - original
    if leak_norm == "l1":
        drift = np.sign(drift) * np.maximum(np.abs(drift) - strength, 0.0)
    else:
        drift = drift / (1.0 + 2.0 * strength)
    return original + drift


def _check_options(leak_norm: str, image_reduction: str):
    if leak_norm not in LEAK_NORMS:
        raise GatingError(f"leak norm must be one of {LEAK_NORMS}, got {leak_norm!r}")
    if image_reduction not in IMAGE_REDUCTIONS:
        raise GatingError(f"image reduction must be one of {IMAGE_REDUCTIONS}, got {image_reduction!r}")
