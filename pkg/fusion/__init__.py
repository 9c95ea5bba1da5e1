"""
Canonical fusion of view-wise semantic targets
"""
from .barycenter import (
    CanonicalField,
    FusedTarget,
    canonical_target,
    ema_update,
    fuse_views,
    fusion_weights,
    stability_gap,
    support_by_gaussian,
)
from .errors import FusionError, NoValidViewsError, ViewMismatchError
from .variance import VARIANCE_COLUMNS, VarianceRow, save_variance_table, variance_experiment

__all__ = [
    "CanonicalField",
    "FusedTarget",
    "fusion_weights",
    "canonical_target",
    "stability_gap",
    "ema_update",
    "fuse_views",
    "support_by_gaussian",
    "variance_experiment",
    "save_variance_table",
    "VarianceRow",
    "VARIANCE_COLUMNS",
    "FusionError",
    "NoValidViewsError",
    "ViewMismatchError",
]
