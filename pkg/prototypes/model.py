"""
Prototype types - support partitions and prompt-aware prototypes
"""
from dataclasses import dataclass
from typing import List

import numpy as np


@dataclass(frozen=True, eq=False)
class SupportPartition:
    """Support pixels split into disjoint regions.

    pixels: N x 2 integer (x, y) coordinates, row-major order
    labels: region index per pixel
    centers: M x 2 region centers in pixel coordinates
    objective_history: weighted clustering objective after seeding and after every assignment
    """
    pixels: np.ndarray
    labels: np.ndarray
    centers: np.ndarray
    objective_history: tuple = ()

    @property
    def count(self) -> int:
        return self.centers.shape[0]

    def region(self, m: int) -> np.ndarray:
        """Indices into `pixels` of region m"""
        return np.flatnonzero(self.labels == m)

    def regions(self) -> List[np.ndarray]:
        return [self.region(m) for m in range(self.count)]


@dataclass(frozen=True, eq=False)
class Prototype:
    position: np.ndarray  # (x, y) pixel coordinates
    semantic: np.ndarray  # unit norm
    mass: float
    appearance: np.ndarray  # unit norm
    pixel_count: int

    def to_dict(self) -> dict:
        return {
            "position": self.position.tolist(),
            "semantic": self.semantic.tolist(),
            "mass": self.mass,
            "appearance": self.appearance.tolist(),
            "pixel_count": self.pixel_count,
        }

    @classmethod
    def from_dict(cls, record: dict) -> "Prototype":
        return cls(
            position=np.asarray(record["position"], dtype=np.float64),
            semantic=np.asarray(record["semantic"], dtype=np.float64),
            mass=float(record["mass"]),
            appearance=np.asarray(record["appearance"], dtype=np.float64),
            pixel_count=int(record["pixel_count"]),
        )
