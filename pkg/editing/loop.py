"""
Edit loop - render, extract, transport, fuse, gate and step the scene, round by round
"""
import asyncio
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from evidence import EditedViewEvidence
from fusion import CanonicalField, FusedTarget, ema_update, fuse_views
from gating import (
    GateState,
    LossReport,
    compute_gates,
    compute_losses,
    leak_prox,
    loss_gradients,
    semantic_targets,
)
from prototypes import EmptySupportError, Prototype, extract_prototypes
from scene import Camera, Gaussian, RenderOutput, render_view, scene_by_id
from transport import TransportProblem, TransportSolution, build_transport_problem, solve_uot

from .config import EditConfig
from .errors import AllViewsEmptyError, EditError, IdMismatchError

logger = logging.getLogger(__name__)


def leakage_metric(
    scene_before: Sequence[Gaussian],
    scene_after: Sequence[Gaussian],
    target_ids: Sequence[int],
    target_color: Optional[np.ndarray] = None,
) -> Tuple[float, float]:
    """(target_error, leakage).

    target_error: mean ||c_after - target_color|| over targets (||c_after - c_before|| without a color)
    leakage:      mean ||c_after - c_before|| over non-targets
    """
    before = scene_by_id(scene_before)
    after = scene_by_id(scene_after)
    if set(before) != set(after):
        raise IdMismatchError(f"scenes hold different ids: {sorted(set(before) ^ set(after))}")
    targets = set(int(i) for i in target_ids)
    if not targets <= set(before):
        raise IdMismatchError(f"target ids not in scene: {sorted(targets - set(before))}")

    target_errors = []
    leaks = []
    for gid in sorted(before):
        shift = after[gid].color - before[gid].color
        if gid in targets:
            reference = shift if target_color is None else after[gid].color - np.asarray(target_color)
            target_errors.append(float(np.linalg.norm(reference)))
        else:
            leaks.append(float(np.linalg.norm(shift)))
    target_error = float(np.mean(target_errors)) if target_errors else 0.0
    leakage = float(np.mean(leaks)) if leaks else 0.0
    return target_error, leakage


@dataclass(frozen=True)
class GateStats:
    round: int
    target_min: float
    target_mean: float
    target_max: float
    nontarget_min: float
    nontarget_mean: float
    nontarget_max: float


@dataclass(eq=False)
class EditReport:
    trace: List[dict]
    final_scene: List[Gaussian]
    initial_target_color_error: float
    target_color_error: float
    leakage: float
    gate_stats: List[GateStats] = field(default_factory=list)
    skipped_views: List[Tuple[int, int]] = field(default_factory=list)  # (round, view)

    def to_dict(self) -> dict:
        return {
            "initial_target_color_error": self.initial_target_color_error,
            "target_color_error": self.target_color_error,
            "leakage": self.leakage,
            "steps": len(self.trace) - 1,
            "final_losses": self.trace[-1] if self.trace else None,
            "gate_stats": [g.__dict__ for g in self.gate_stats],
            "skipped_views": [list(s) for s in self.skipped_views],
        }


def _gate_stats(round_index: int, gates: Dict[int, GateState], target_ids: Sequence[int]) -> GateStats:
    targets = set(target_ids)
    inside = [s.gate for gid, s in gates.items() if gid in targets] or [float("nan")]
    outside = [s.gate for gid, s in gates.items() if gid not in targets] or [float("nan")]
    return GateStats(
        round=round_index,
        target_min=float(np.min(inside)),
        target_mean=float(np.mean(inside)),
        target_max=float(np.max(inside)),
        nontarget_min=float(np.min(outside)),
        nontarget_mean=float(np.mean(outside)),
        nontarget_max=float(np.max(outside)),
    )


class EditRunner:
    """Runs the gated edit optimization for one scene and its per-view evidence"""

    def __init__(self, config: EditConfig):
        self.config = config

    def extract(self, evidence: EditedViewEvidence, view: int) -> Optional[List[Prototype]]:
        """Prototypes for one view with the configured settings; None on empty support"""
        cfg = self.config
        settings = cfg.prototypes
        try:
            return extract_prototypes(
                evidence if settings.use_mask else _without_mask(evidence),
                count=settings.count,
                threshold=settings.threshold,
                min_component=settings.min_component,
                max_lloyd_iters=settings.max_lloyd_iters,
                seed=cfg.seed,
                view_index=view,
                normalize_mass=settings.normalize_mass,
                per_pixel=not cfg.ablation.use_prototypes,
            )
        except EmptySupportError as e:
            logger.warning(f"View {view} has no usable edit support: {e}")
            return None

    def transport(
        self,
        scene: List[Gaussian],
        camera: Camera,
        render: RenderOutput,
        prototypes: List[Prototype],
        evidence: EditedViewEvidence,
    ) -> Tuple[TransportProblem, TransportSolution]:
        """Build and solve one view's transport problem"""
        cfg = self.config
        transport = cfg.transport
        tau_source, tau_target = transport.tau_source, transport.tau_target
        if cfg.ablation.balanced_transport:
            tau_source = tau_target = cfg.ablation.balanced_tau
        problem = build_transport_problem(
            scene, camera, render, prototypes, evidence.appearance_features, transport.cost_weights(),
            epsilon=transport.epsilon, tau_source=tau_source, tau_target=tau_target,
        )
        return problem, solve_uot(problem, transport.max_iters, transport.tolerance, transport.top_k)

    def _view_stage(
        self,
        scene: List[Gaussian],
        camera: Camera,
        evidence: EditedViewEvidence,
        view: int,
    ) -> Tuple[RenderOutput, Optional[TransportProblem], Optional[TransportSolution]]:
        """Render, prototypes and transport for one view; (render, None, None) on empty support"""
        render = render_view(scene, camera)
        prototypes = self.extract(evidence, view)
        if not prototypes:
            return render, None, None
        problem, solution = self.transport(scene, camera, render, prototypes, evidence)
        return render, problem, solution

    async def run(
        self,
        scene: Sequence[Gaussian],
        cameras: Sequence[Camera],
        evidences: Sequence[EditedViewEvidence],
        target_ids: Sequence[int] = (),
        target_color: Optional[np.ndarray] = None,
    ) -> EditReport:
        cfg = self.config
        if not cameras or len(cameras) != len(evidences):
            raise EditError(f"need one evidence bundle per camera, got {len(cameras)} cameras and {len(evidences)}")
        for v, (camera, evidence) in enumerate(zip(cameras, evidences)):
            if evidence.shape != (camera.height, camera.width):
                raise EditError(f"view {v}: evidence {evidence.shape} does not match camera {camera.width}x{camera.height}")

        initial = list(scene)
        current = list(scene)
        edited_images = [e.edited_image for e in evidences]
        weights = cfg.losses.weights(cfg.ablation.leak_suppression)
        initial_error, _ = leakage_metric(initial, initial, target_ids, target_color)

        ema: Dict[int, np.ndarray] = {}
        trace: List[dict] = []
        gate_history: List[GateStats] = []
        skipped: List[Tuple[int, int]] = []
        step = 0
        renders = field_ = gates = targets = solutions = None

        for round_index in range(cfg.rounds):
            snapshot = list(current)
            stages = await asyncio.gather(*[
                asyncio.to_thread(self._view_stage, snapshot, camera, evidence, v)
                for v, (camera, evidence) in enumerate(zip(cameras, evidences))
            ])
            renders = [s[0] for s in stages]
            problems = [s[1] for s in stages]
            solutions = [s[2] for s in stages]
            skipped.extend((round_index, v) for v, p in enumerate(problems) if p is None)
            if all(p is None for p in problems):
                raise AllViewsEmptyError(f"round {round_index}: every view has empty prototype support")

            fused = fuse_views(snapshot, solutions, cfg.fusion.rho, cfg.fusion.delta)
            for gid, entry in fused.entries.items():
                ema[gid] = ema_update(ema.get(gid), entry.canonical_target, cfg.fusion.ema_momentum)
            field_ = CanonicalField(
                entries={gid: FusedTarget(e.valid_views, e.weights, ema[gid]) for gid, e in fused.entries.items()},
                rho=fused.rho,
                view_targets=fused.view_targets,
            )

            if cfg.ablation.leak_suppression:
                gates = compute_gates(
                    snapshot, problems, solutions, fused, cfg.gates.tau_r, cfg.gates.mode, cfg.gates.delta
                )
            else:
                gates = {g.id: GateState({}, 0.0, 1.0, cfg.gates.tau_r) for g in snapshot}
            gate_history.append(_gate_stats(round_index, gates, target_ids))
            targets = semantic_targets(snapshot, gates, field_, cfg.gates.semantic_mode)

            for _ in range(cfg.steps_per_round):
                report = self._losses(current, renders, edited_images, gates, field_, solutions, weights, targets)
                trace.append(report.as_row(step))
                current = self._step(current, renders, edited_images, gates, field_, weights, targets)
                step += 1
            round_end = self._losses(current, renders, edited_images, gates, field_, solutions, weights, targets)
            logger.info(
                f"Round {round_index + 1}/{cfg.rounds}: total loss {round_end.total:.6f}, "
                f"target gate mean {gate_history[-1].target_mean:.4f}, non-target gate mean {gate_history[-1].nontarget_mean:.4f}"
            )

        final = self._losses(current, renders, edited_images, gates, field_, solutions, weights, targets)
        trace.append(final.as_row(step))
        target_error, leakage = leakage_metric(initial, current, target_ids, target_color)
        logger.info(f"Edit finished after {step} steps: target error {target_error:.4f}, leakage {leakage:.4f}")
        return EditReport(
            trace=trace,
            final_scene=current,
            initial_target_color_error=initial_error,
            target_color_error=target_error,
            leakage=leakage,
            gate_stats=gate_history,
            skipped_views=skipped,
        )

    def _losses(self, scene, renders, edited_images, gates, field_, solutions, weights, targets) -> LossReport:
        losses = self.config.losses
        return compute_losses(
            scene, renders, edited_images, gates, field_, solutions, weights,
            leak_norm=losses.leak_norm, image_reduction=losses.image_reduction, targets=targets,
        )

    def _step(self, scene, renders, edited_images, gates, field_, weights, targets) -> List[Gaussian]:
        """One forward-backward update: gradient step on image and semantic terms,
        proximal step on the leak term, colors clamped to [0,1]"""
        losses = self.config.losses
        grads = loss_gradients(
            scene, renders, edited_images, gates, field_, weights,
            leak_norm=losses.leak_norm, image_reduction=losses.image_reduction, targets=targets,
            include_leakage=False,
        )
        eta = self.config.step_size
        stepped = []
        for g in scene:
            state = gates.get(g.id)
            open_share = 0.0 if state is None else 1.0 - state.gate
            color = leak_prox(
                g.color - eta * grads.color[g.id], g.original_color,
                eta * weights.leakage * open_share, losses.leak_norm,
            )
            stepped.append(g.with_appearance(
                color=np.clip(color, 0.0, 1.0),
                semantic_latent=g.semantic_latent - eta * grads.semantic[g.id],
            ))
        return stepped


def _without_mask(evidence: EditedViewEvidence) -> EditedViewEvidence:
    return EditedViewEvidence(
        edited_image=evidence.edited_image,
        attention=evidence.attention,
        semantic_features=evidence.semantic_features,
        appearance_features=evidence.appearance_features,
    )


def run_edit(
    scene: Sequence[Gaussian],
    cameras: Sequence[Camera],
    evidences: Sequence[EditedViewEvidence],
    config: EditConfig,
    target_ids: Sequence[int] = (),
    target_color: Optional[np.ndarray] = None,
) -> EditReport:
    """Blocking entry point; inside an event loop await EditRunner(config).run(...) instead"""
    return asyncio.run(EditRunner(config).run(scene, cameras, evidences, target_ids, target_color))
