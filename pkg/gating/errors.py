"""
Gating and loss errors
"""


class GatingError(ValueError):
    """Base error for residual gating and losses"""
    pass


class ViewMismatchError(GatingError):
    """Per-view quantities do not cover the same views"""
    pass


class MissingRenderError(GatingError):
    """A view with edited evidence has no render"""
    pass
