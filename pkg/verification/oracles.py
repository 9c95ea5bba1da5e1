"""
Independent reference solvers used to cross-check the closed forms and Sinkhorn
"""
import logging
from typing import Tuple

import numpy as np

from transport import TransportProblem, uot_gradient, uot_objective

logger = logging.getLogger(__name__)


def eg_uot_oracle(
    problem: TransportProblem,
    rng: np.random.Generator,
    starts: int = 5,
    max_iters: int = 1000,
    gradient_tolerance: float = 1e-10,
) -> float:
    """Best objective of exponentiated-gradient descent T <- T exp(-eta G) over random starts.

    Each step backtracks (Armijo) from an adaptively grown step size; a start
    stops when ||T * G|| drops below `gradient_tolerance` or at `max_iters`.
    """
    a, b = problem.source_mass, problem.target_mass
    best = np.inf
    for _ in range(starts):
        plan = np.outer(a, b) * rng.uniform(0.2, 2.0, problem.shape)
        value = uot_objective(plan, problem)
        eta = 1.0
        for _ in range(max_iters):
            grad = uot_gradient(plan, problem)
            norm = float(np.linalg.norm(plan * grad))
            if norm < gradient_tolerance:
                break
            decrease = float(np.sum(plan * grad * grad))
            while eta > 1e-12:
                candidate = plan * np.exp(-np.clip(eta * grad, -50.0, 50.0))
                candidate_value = uot_objective(candidate, problem)
                if candidate_value <= value - 1e-4 * eta * decrease:
                    break
                eta *= 0.5
            else:
                break
            plan, value = candidate, candidate_value
            eta *= 1.5
        best = min(best, value)
    return best


def gd_barycenter_oracle(
    weights: np.ndarray,
    targets: np.ndarray,
    latent: np.ndarray,
    rho: float,
    gradient_tolerance: float = 1e-12,
    max_iters: int = 10000,
) -> np.ndarray:
    """Minimize sum_v omega_v ||z - y_v||^2 + rho ||z - s||^2 by gradient descent from zero.

    The Hessian is 2 (sum omega + rho) I, so the fixed step 1 / (2 L) with
    L = 2 (sum omega + rho) halves the distance to the minimizer on every iteration.
    """
    weights = np.asarray(weights, dtype=np.float64)
    lipschitz = 2.0 * (float(weights.sum()) + rho)
    if lipschitz <= 0.0:
        raise ValueError("barycenter objective needs positive total weight or rho")

    def gradient(z):
        return 2.0 * (weights @ (z[None, :] - targets) + rho * (z - latent))

    step = 0.5 / lipschitz
    z = np.zeros(targets.shape[1])
    for _ in range(max_iters):
        grad = gradient(z)
        if np.linalg.norm(grad) < gradient_tolerance:
            break
        z = z - step * grad
    else:
        logger.warning(f"Barycenter oracle stopped at max_iters={max_iters}, gradient norm {np.linalg.norm(grad):.3e}")
    return z


def exhaustive_two_partition(points: np.ndarray, weights: np.ndarray) -> Tuple[float, np.ndarray]:
    """Minimum weighted within-cluster sum of squares over every split into two non-empty clusters"""
    n = points.shape[0]
    # the first point is pinned to cluster 0 to skip mirrored labelings
    codes = np.arange(2 ** (n - 1), dtype=np.int64)
    labels = ((codes[:, None] >> np.arange(n - 1)) & 1).astype(bool)
    labels = np.concatenate([np.zeros((labels.shape[0], 1), dtype=bool), labels], axis=1)
    labels = labels[labels.any(axis=1)]

    sq = np.sum(points * points, axis=1)

    def cost(w0, w1, w2):
        return w2 - np.sum(w1 * w1, axis=1) / np.where(w0 > 0, w0, 1.0)

    member = labels.astype(np.float64)
    w0 = member @ weights
    w1 = member @ (weights[:, None] * points)
    w2 = member @ (weights * sq)
    # cluster 0 is the complement of the members
    totals = cost(w0, w1, w2) + cost(weights.sum() - w0, weights @ points - w1, weights @ sq - w2)
    best = int(np.argmin(totals))
    return float(totals[best]), labels[best].astype(int)
