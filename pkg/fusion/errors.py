"""
Fusion errors
"""


class FusionError(ValueError):
    """Base error for canonical fusion"""
    pass


class NoValidViewsError(FusionError):
    """No view gives the Gaussian positive support"""
    pass


class ViewMismatchError(FusionError):
    """Two sides of a comparison do not cover the same views"""
    pass
