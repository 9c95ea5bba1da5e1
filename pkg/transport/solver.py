"""
Entropic unbalanced transport solved by log-domain Sinkhorn scaling
"""
import logging
from typing import Optional, Tuple

import numpy as np
from scipy.special import logsumexp, rel_entr

from .errors import NumericalOverflowError, TransportProblemError
from .problem import TransportProblem, TransportSolution

logger = logging.getLogger(__name__)

MAX_ITERS = 30
TOLERANCE = 1e-7
SEMANTIC_EPSILON = 1e-8


def generalized_kl(x: np.ndarray, y: np.ndarray) -> float:
    """sum x log(x/y) - x + y, with 0 log 0 = 0"""
    return float(np.sum(rel_entr(x, y) - x + y))


def uot_objective(plan: np.ndarray, problem: TransportProblem) -> float:
    """<C,T> + eps KL(T || a b^T) + tau_s KL(T1 || a) + tau_t KL(T^T 1 || b)"""
    plan = np.asarray(plan, dtype=np.float64)
    if plan.shape != problem.shape:
        raise TransportProblemError(f"plan shape {plan.shape} does not match problem shape {problem.shape}")
    if plan.min() < 0.0:
        raise TransportProblemError("plan must be nonnegative")
    a, b = problem.source_mass, problem.target_mass
    return (
        float(np.sum(problem.cost * plan))
        + problem.epsilon * generalized_kl(plan, np.outer(a, b))
        + problem.tau_source * generalized_kl(plan.sum(axis=1), a)
        + problem.tau_target * generalized_kl(plan.sum(axis=0), b)
    )


def uot_gradient(plan: np.ndarray, problem: TransportProblem) -> np.ndarray:
    """Gradient of uot_objective at a strictly positive plan"""
    a, b = problem.source_mass, problem.target_mass
    return (
        problem.cost
        + problem.epsilon * np.log(plan / np.outer(a, b))
        + problem.tau_source * np.log(plan.sum(axis=1) / a)[:, None]
        + problem.tau_target * np.log(plan.sum(axis=0) / b)[None, :]
    )


def topk_mask(cost: np.ndarray, k: int) -> np.ndarray:
    """Per prototype (column), keep the k lowest-cost Gaussians; ties go to the lower row"""
    n = cost.shape[0]
    if k >= n:
        return np.ones(cost.shape, dtype=bool)
    order = np.argsort(cost, axis=0, kind="stable")[:k]
    mask = np.zeros(cost.shape, dtype=bool)
    mask[order, np.arange(cost.shape[1])[None, :]] = True
    return mask


def _lse(values: np.ndarray, axis: int) -> Tuple[np.ndarray, np.ndarray]:
    """logsumexp along axis plus a flag for lines with at least one finite entry"""
    admissible = np.isfinite(values).any(axis=axis)
    safe = np.where(np.isfinite(values), values, -np.inf)
    out = np.full(admissible.shape, -np.inf)
    if admissible.any():
        with np.errstate(divide="ignore"):
            full = logsumexp(safe, axis=axis)
        out[admissible] = full[admissible]
    return out, admissible


def solve_uot(
    problem: TransportProblem,
    max_iters: int = MAX_ITERS,
    tolerance: float = TOLERANCE,
    top_k: Optional[int] = None,
    init: Optional[Tuple[np.ndarray, np.ndarray]] = None,
    semantic_epsilon: float = SEMANTIC_EPSILON,
) -> TransportSolution:
    """Unbalanced Sinkhorn on K = a b^T exp(-C/eps), alternating

        log u <- tau_s/(tau_s+eps) (log a - lse_j(log K + log v))
        log v <- tau_t/(tau_t+eps) (log b - lse_i(log K + log u))

    until the largest change in log u, log v drops below `tolerance`.
    Non-convergence is reported through `converged`, not raised.
    """
    a, b = problem.source_mass, problem.target_mass
    eps = problem.epsilon
    lam_s = problem.tau_source / (problem.tau_source + eps)
    lam_t = problem.tau_target / (problem.tau_target + eps)

    log_k = np.log(a)[:, None] + np.log(b)[None, :] - problem.cost / eps
    if top_k is not None:
        if top_k < 1:
            raise TransportProblemError(f"top_k must be positive, got {top_k}")
        log_k = np.where(topk_mask(problem.cost, top_k), log_k, -np.inf)

    if max_iters < 1:
        raise TransportProblemError(f"max_iters must be positive, got {max_iters}")
    n, m = problem.shape
    if init is None:
        log_u, log_v = np.zeros(n), np.zeros(m)
    else:
        log_u = np.asarray(init[0], dtype=np.float64).copy()
        log_v = np.asarray(init[1], dtype=np.float64).copy()
        if log_u.shape != (n,) or log_v.shape != (m,):
            raise TransportProblemError("initial scalings do not match the problem shape")

    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        row_lse, rows_ok = _lse(log_k + log_v[None, :], axis=1)
        new_u = np.where(rows_ok, lam_s * (np.log(a) - row_lse), 0.0)
        col_lse, cols_ok = _lse(log_k + new_u[:, None], axis=0)
        new_v = np.where(cols_ok, lam_t * (np.log(b) - col_lse), 0.0)
        if not (np.all(np.isfinite(new_u)) and np.all(np.isfinite(new_v))):
            raise NumericalOverflowError(f"scaling potentials overflowed at iteration {iterations}")
        change = max(np.abs(new_u - log_u).max(), np.abs(new_v - log_v).max())
        log_u, log_v = new_u, new_v
        if change < tolerance:
            converged = True
            break

    with np.errstate(over="raise"):
        try:
            plan = np.exp(log_k + log_u[:, None] + log_v[None, :])
        except FloatingPointError as e:
            raise NumericalOverflowError("transport plan overflowed") from e
    if not converged:
        logger.warning(f"Unbalanced Sinkhorn did not converge in {max_iters} iterations (last change {change:.3e})")

    support_mass = plan.sum(axis=1)
    if problem.target_semantics is not None:
        semantic_target = (plan @ problem.target_semantics) / (support_mass + semantic_epsilon)[:, None]
    else:
        semantic_target = np.zeros((n, 0))
    return TransportSolution(
        plan=plan,
        objective=uot_objective(plan, problem),
        iterations=iterations,
        support_mass=support_mass,
        semantic_target=semantic_target,
        converged=converged,
        gaussian_ids=problem.gaussian_ids,
        log_u=log_u,
        log_v=log_v,
    )
