"""
Prompt-aware prototypes: compress a view's dense edit evidence into a few weighted regions
"""
from .clustering import cluster_support, clustering_objective, kmeans_plus_plus
from .errors import (
    AllZeroAttentionError,
    EmptySupportError,
    PrototypeError,
    TooFewPixelsError,
    ZeroRegionAttentionError,
)
from .extraction import (
    build_prototypes,
    extract_prototypes,
    extract_support,
    normalize_attention,
    pixel_prototypes,
)
from .io import load_prototypes, save_prototypes
from .model import Prototype, SupportPartition

__all__ = [
    "Prototype",
    "SupportPartition",
    "normalize_attention",
    "extract_support",
    "cluster_support",
    "clustering_objective",
    "kmeans_plus_plus",
    "build_prototypes",
    "pixel_prototypes",
    "extract_prototypes",
    "save_prototypes",
    "load_prototypes",
    "PrototypeError",
    "AllZeroAttentionError",
    "EmptySupportError",
    "TooFewPixelsError",
    "ZeroRegionAttentionError",
]
