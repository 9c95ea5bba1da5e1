"""
Transport residuals and edit gates
"""
import logging
from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence

import numpy as np

from fusion import CanonicalField
from scene import Gaussian
from transport import TransportProblem, TransportSolution

from .errors import GatingError, ViewMismatchError

logger = logging.getLogger(__name__)

GATE_DELTA = 1e-12
RESIDUAL_MODES = ("clip-then-aggregate", "aggregate-then-clip")


@dataclass(frozen=True)
class GateState:
    view_residuals: Dict[int, float]
    aggregated_residual: float
    gate: float
    tau_r: float


def edit_gate(residual, tau_r: float, delta: float = GATE_DELTA):
    """exp(-r / (tau_r + delta)); equals 1 exactly at r = 0"""
    if tau_r <= 0.0:
        raise GatingError(f"tau_r must be positive, got {tau_r}")
    return np.exp(-np.asarray(residual, dtype=np.float64) / (tau_r + delta))


def residuals_and_gate(
    source_mass: Mapping[int, float],
    support_mass: Mapping[int, float],
    weights: Mapping[int, float],
    tau_r: float,
    mode: str = "clip-then-aggregate",
    delta: float = GATE_DELTA,
) -> GateState:
    """Residual of unabsorbed source mass over views, and its gate.

    clip-then-aggregate: r = sum_v omega_v [a_v - w_v]_+
    aggregate-then-clip: r = [sum_v omega_v a_v - sum_v omega_v w_v]_+
    """
    if mode not in RESIDUAL_MODES:
        raise GatingError(f"residual mode must be one of {RESIDUAL_MODES}, got {mode!r}")
    if set(source_mass) != set(support_mass) or not set(weights) <= set(source_mass):
        raise ViewMismatchError(
            f"views differ: source {sorted(source_mass)}, support {sorted(support_mass)}, weights {sorted(weights)}"
        )
    view_residuals = {v: max(0.0, float(source_mass[v] - support_mass[v])) for v in sorted(source_mass)}
    if mode == "clip-then-aggregate":
        residual = sum(w * view_residuals[v] for v, w in weights.items())
    else:
        residual = max(0.0, sum(w * (source_mass[v] - support_mass[v]) for v, w in weights.items()))
    residual = float(residual)
    return GateState(
        view_residuals=view_residuals,
        aggregated_residual=residual,
        gate=float(edit_gate(residual, tau_r, delta)),
        tau_r=tau_r,
    )


def gated_target(gate: float, canonical: np.ndarray, latent: np.ndarray) -> np.ndarray:
    """gamma z* + (1 - gamma) s"""
    return gate * np.asarray(canonical, dtype=np.float64) + (1.0 - gate) * np.asarray(latent, dtype=np.float64)


def compute_gates(
    scene: Sequence[Gaussian],
    problems: Sequence[Optional[TransportProblem]],
    solutions: Sequence[Optional[TransportSolution]],
    field: CanonicalField,
    tau_r: float,
    mode: str = "clip-then-aggregate",
    delta: float = GATE_DELTA,
) -> Dict[int, GateState]:
    """Gate for every Gaussian in the scene.

    Gaussians without valid views use uniform weights over the views they are
    visible in; a Gaussian visible nowhere is left fully open.
    """
    if len(problems) != len(solutions):
        raise ViewMismatchError(f"{len(problems)} problems for {len(solutions)} solutions")
    source: Dict[int, Dict[int, float]] = {}
    support: Dict[int, Dict[int, float]] = {}
    for v, (problem, solution) in enumerate(zip(problems, solutions)):
        if problem is None or solution is None:
            continue
        if problem.gaussian_ids != solution.gaussian_ids:
            raise ViewMismatchError(f"view {v}: problem and solution rows differ")
        for row, gid in enumerate(problem.gaussian_ids):
            source.setdefault(gid, {})[v] = float(problem.source_mass[row])
            support.setdefault(gid, {})[v] = float(solution.support_mass[row])

    gates: Dict[int, GateState] = {}
    for g in scene:
        views = source.get(g.id)
        if not views:
            gates[g.id] = GateState({}, 0.0, 1.0, tau_r)
            continue
        weights = field.entries[g.id].weights if g.id in field.entries else {}
        if not weights:
            weights = {v: 1.0 / len(views) for v in sorted(views)}
        gates[g.id] = residuals_and_gate(views, support[g.id], weights, tau_r, mode, delta)
    return gates
