"""
Prototype extraction errors
"""


class PrototypeError(ValueError):
    """Base error for prototype extraction"""
    pass


class AllZeroAttentionError(PrototypeError):
    """Attention map has no positive value"""
    pass


class EmptySupportError(PrototypeError):
    """Nothing survives thresholding, masking and the component filter"""
    pass


class TooFewPixelsError(PrototypeError):
    """Support holds fewer pixels than requested prototypes"""
    pass


class ZeroRegionAttentionError(PrototypeError):
    """A region has no attention mass to aggregate with"""
    pass
