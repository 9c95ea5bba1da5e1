"""
Evidence errors
"""


class EvidenceError(ValueError):
    """Base error for edited-view evidence"""
    pass


class NoVisibleTargetError(EvidenceError):
    """No Gaussian of the edit target is visible in the camera"""
    pass


class EvidenceFormatError(EvidenceError):
    """Raster header, payload size or manifest does not match"""
    pass
