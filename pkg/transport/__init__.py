"""
View-wise entropic unbalanced transport from visible Gaussians to edit prototypes
"""
from .costs import (
    CostWeights,
    build_transport_problem,
    cost_matrix,
    gaussian_appearance_descriptor,
    source_masses,
)
from .errors import (
    NoVisibleGaussiansError,
    NumericalOverflowError,
    TransportError,
    TransportProblemError,
    ZeroFootprintError,
)
from .io import load_problem, load_problems, load_solutions, save_transport
from .problem import TransportProblem, TransportSolution
from .solver import generalized_kl, solve_uot, topk_mask, uot_gradient, uot_objective

__all__ = [
    "CostWeights",
    "TransportProblem",
    "TransportSolution",
    "source_masses",
    "gaussian_appearance_descriptor",
    "cost_matrix",
    "build_transport_problem",
    "solve_uot",
    "uot_objective",
    "uot_gradient",
    "generalized_kl",
    "topk_mask",
    "save_transport",
    "load_problem",
    "load_problems",
    "load_solutions",
    "TransportError",
    "NoVisibleGaussiansError",
    "ZeroFootprintError",
    "TransportProblemError",
    "NumericalOverflowError",
]
