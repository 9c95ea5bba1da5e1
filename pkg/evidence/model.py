"""
Edited-view evidence and the synthetic edit specification
"""
from dataclasses import dataclass, field
from typing import FrozenSet, Optional

import numpy as np
import yaml

from .errors import EvidenceError


@dataclass(frozen=True, eq=False)
class EditedViewEvidence:
    """Per-view evidence: edited image, attention, semantic and appearance rasters, optional mask.

    Rasters are held as float64; storage writes them as float32.
    """
    edited_image: np.ndarray
    attention: np.ndarray
    semantic_features: np.ndarray
    appearance_features: np.ndarray
    mask: Optional[np.ndarray] = None

    def __post_init__(self):
        image = np.asarray(self.edited_image, dtype=np.float64)
        if image.ndim != 3 or image.shape[2] != 3:
            raise EvidenceError(f"edited_image must be H x W x 3, got {image.shape}")
        height, width = image.shape[:2]
        attention = np.asarray(self.attention, dtype=np.float64)
        if attention.shape != (height, width):
            raise EvidenceError(f"attention must be {height} x {width}, got {attention.shape}")
        if not np.all(np.isfinite(attention)) or attention.min() < 0.0:
            raise EvidenceError("attention must be finite and nonnegative")
        if attention.max() <= 0.0:
            raise EvidenceError("attention is zero everywhere")
        for name in ("semantic_features", "appearance_features"):
            raster = np.asarray(getattr(self, name), dtype=np.float64)
            if raster.ndim != 3 or raster.shape[:2] != (height, width):
                raise EvidenceError(f"{name} must be {height} x {width} x d, got {raster.shape}")
            object.__setattr__(self, name, raster)
        object.__setattr__(self, "edited_image", image)
        object.__setattr__(self, "attention", attention)
        if self.mask is not None:
            mask = np.asarray(self.mask, dtype=bool)
            if mask.shape != (height, width):
                raise EvidenceError(f"mask must be {height} x {width}, got {mask.shape}")
            object.__setattr__(self, "mask", mask)

    @property
    def shape(self):
        return self.attention.shape

    @property
    def semantic_dim(self) -> int:
        return self.semantic_features.shape[2]

    @property
    def appearance_dim(self) -> int:
        return self.appearance_features.shape[2]


@dataclass(frozen=True, eq=False)
class EditSpec:
    """What the synthetic editor does to a view.

    spill_strength / spill_radius tint a blurred halo around the target toward
    target_color, the way 2D editors bleed outside the object.
    """
    target_region: FrozenSet[int]
    target_semantic: np.ndarray
    target_color: np.ndarray
    attention_noise_sigma: float = 0.0
    feature_noise_sigma: float = 0.0
    seed: int = 0
    appearance_dim: int = 8
    with_mask: bool = False
    spill_strength: float = 0.0
    spill_radius: float = 2.0

    def __post_init__(self):
        region = frozenset(int(i) for i in self.target_region)
        if not region:
            raise EvidenceError("target_region must not be empty")
        object.__setattr__(self, "target_region", region)
        object.__setattr__(self, "target_semantic", np.asarray(self.target_semantic, dtype=np.float64))
        color = np.asarray(self.target_color, dtype=np.float64)
        if color.shape != (3,) or color.min() < 0.0 or color.max() > 1.0:
            raise EvidenceError("target_color must be a 3-vector in [0,1]")
        object.__setattr__(self, "target_color", color)
        if self.attention_noise_sigma < 0 or self.feature_noise_sigma < 0:
            raise EvidenceError("noise sigmas must be nonnegative")
        if self.appearance_dim < 6:
            raise EvidenceError("appearance_dim must be at least 6 (mean color + gradient magnitudes)")
        if not 0.0 <= self.spill_strength <= 1.0 or self.spill_radius <= 0:
            raise EvidenceError("spill_strength must lie in [0,1] and spill_radius be positive")

    def to_dict(self) -> dict:
        return {
            "target_region": sorted(self.target_region),
            "target_semantic": self.target_semantic.tolist(),
            "target_color": self.target_color.tolist(),
            "attention_noise_sigma": self.attention_noise_sigma,
            "feature_noise_sigma": self.feature_noise_sigma,
            "seed": self.seed,
            "appearance_dim": self.appearance_dim,
            "with_mask": self.with_mask,
            "spill_strength": self.spill_strength,
            "spill_radius": self.spill_radius,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EditSpec":
        try:
            return cls(**data)
        except TypeError as e:
            raise EvidenceError(f"invalid edit spec: {e}") from e

    @classmethod
    def load(cls, path) -> "EditSpec":
        """Load an edit spec from a YAML or JSON file"""
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
        if not isinstance(data, dict):
            raise EvidenceError(f"{path}: edit spec must be a mapping")
        return cls.from_dict(data)
