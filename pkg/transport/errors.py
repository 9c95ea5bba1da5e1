"""
Transport errors
"""


class TransportError(ValueError):
    """Base error for view-wise unbalanced transport"""
    pass


class NoVisibleGaussiansError(TransportError):
    """No Gaussian is visible in the view"""
    pass


class ZeroFootprintError(TransportError):
    """Gaussian has no footprint mass to average appearance over"""
    pass


class TransportProblemError(TransportError):
    """Problem shapes or parameters are invalid"""
    pass


class NumericalOverflowError(TransportError):
    """Scaling potentials left the finite range"""
    pass
