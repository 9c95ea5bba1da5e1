"""
Edited-view evidence: bundle type, synthetic generator and raster storage
"""
from .errors import EvidenceError, EvidenceFormatError, NoVisibleTargetError
from .model import EditedViewEvidence, EditSpec
from .storage import EvidenceStorage, load_evidence, load_view_bundle, store_evidence
from .synthetic import appearance_descriptor, generate_synthetic_evidence

__all__ = [
    "EditedViewEvidence",
    "EditSpec",
    "EvidenceStorage",
    "generate_synthetic_evidence",
    "appearance_descriptor",
    "store_evidence",
    "load_evidence",
    "load_view_bundle",
    "EvidenceError",
    "EvidenceFormatError",
    "NoVisibleTargetError",
]
