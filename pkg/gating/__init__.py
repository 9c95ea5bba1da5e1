"""
Residual gating and the gated edit losses
"""
from .errors import GatingError, MissingRenderError, ViewMismatchError
from .gates import GateState, compute_gates, edit_gate, gated_target, residuals_and_gate
from .losses import (
    LOSS_COLUMNS,
    LossGradients,
    LossReport,
    LossWeights,
    compute_losses,
    leak_prox,
    loss_gradients,
    semantic_targets,
)

__all__ = [
    "GateState",
    "LossWeights",
    "LossReport",
    "LossGradients",
    "LOSS_COLUMNS",
    "edit_gate",
    "residuals_and_gate",
    "gated_target",
    "compute_gates",
    "semantic_targets",
    "compute_losses",
    "loss_gradients",
    "leak_prox",
    "GatingError",
    "ViewMismatchError",
    "MissingRenderError",
]
