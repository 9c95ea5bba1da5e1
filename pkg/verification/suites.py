"""
Verification suites - executable checks of the solver, fusion, gating and edit properties
"""
import logging
import time
from typing import Callable, Dict, List

import numpy as np

from editing import EditRunner, scenario_evidence, toy_scenario
from evidence import EditedViewEvidence
from fusion import (
    CanonicalField,
    FusedTarget,
    canonical_target,
    fusion_weights,
    stability_gap,
    variance_experiment,
)
from gating import GateState, LossWeights, compute_losses, edit_gate, loss_gradients, residuals_and_gate
from prototypes import cluster_support, clustering_objective, extract_prototypes
from scene import render_view
from scene.presets import random_cameras, random_scene
from transport import TransportProblem, solve_uot

from .oracles import eg_uot_oracle, exhaustive_two_partition, gd_barycenter_oracle
from .report import ExperimentReport

logger = logging.getLogger(__name__)

STRICT_ITERS = 200000
STRICT_TOLERANCE = 1e-10


def random_problem(rng: np.random.Generator) -> TransportProblem:
    n, m = (int(k) for k in rng.integers(2, 17, size=2))
    return TransportProblem(
        cost=rng.uniform(0.0, 1.0, (n, m)),
        source_mass=rng.uniform(0.1, 1.0, n) / n,
        target_mass=rng.uniform(0.1, 1.0, m) / m,
        epsilon=float(rng.choice([0.01, 0.05, 0.2])),
        tau_source=float(rng.choice([0.5, 1.0, 5.0])),
        tau_target=float(rng.choice([0.5, 1.0, 5.0])),
        gaussian_ids=tuple(range(n)),
    )


def uot_optimality(seed: int, problems: int = 50) -> ExperimentReport:
    report = ExperimentReport("uot-optimality")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 101]))
    worst = -np.inf
    unconverged = 0
    for _ in range(problems):
        problem = random_problem(rng)
        solution = solve_uot(problem, STRICT_ITERS, STRICT_TOLERANCE)
        unconverged += not solution.converged
        oracle = eg_uot_oracle(problem, rng)
        worst = max(worst, (solution.objective - oracle) / abs(oracle))
    report.check("solver objective <= oracle (relative excess)", worst <= 1e-4, worst, 1e-4)
    report.check("all solves converged", unconverged == 0, unconverged, 0)
    return report


def uot_uniqueness(seed: int, problems: int = 50) -> ExperimentReport:
    report = ExperimentReport("uot-uniqueness")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 102]))
    worst = 0.0
    for _ in range(problems):
        problem = random_problem(rng)
        n, m = problem.shape
        first = solve_uot(problem, STRICT_ITERS, STRICT_TOLERANCE)
        second = solve_uot(problem, STRICT_ITERS, STRICT_TOLERANCE, init=(rng.normal(size=n), rng.normal(size=m)))
        worst = max(worst, float(np.abs(first.plan - second.plan).max()))
    report.check("plan max-abs difference across initializations", worst < 1e-6, worst, 1e-6)
    return report


def fusion_closed_form(seed: int, instances: int = 100, dim: int = 16) -> ExperimentReport:
    report = ExperimentReport("fusion-closed-form")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 103]))
    worst = 0.0
    for k in range(instances):
        views = int(rng.integers(1, 9))
        rho = (0.0, 0.1, 1.0)[k % 3]
        weights = fusion_weights({v: float(w) for v, w in enumerate(rng.uniform(0.05, 1.0, views))})
        targets = rng.normal(size=(views, dim))
        latent = rng.normal(size=dim)
        z = canonical_target(weights, dict(enumerate(targets)), latent, rho)
        oracle = gd_barycenter_oracle(np.array([weights[v] for v in range(views)]), targets, latent, rho)
        worst = max(worst, float(np.abs(z - oracle).max()))
    report.check("closed form vs gradient descent (max deviation)", worst < 1e-8, worst, 1e-8)
    return report


def stability_bound(seed: int, trials: int = 1000, dim: int = 16) -> ExperimentReport:
    report = ExperimentReport("stability-bound")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 104]))
    violations = 0
    worst = -np.inf
    for _ in range(trials):
        views = int(rng.integers(1, 9))
        weights = fusion_weights({v: float(w) for v, w in enumerate(rng.uniform(0.05, 1.0, views))})
        rho = float(rng.choice([0.0, 0.1, 1.0, 10.0]))
        targets = {v: rng.normal(size=dim) for v in weights}
        perturbed = {v: y + rng.normal(scale=rng.uniform(0.0, 1.0), size=dim) for v, y in targets.items()}
        latent = rng.normal(size=dim)
        gap, bound = stability_gap(weights, targets, perturbed, latent, latent + rng.normal(size=dim), rho)
        worst = max(worst, gap - bound)
        violations += gap > bound + 1e-12
    report.check("bound violations beyond 1e-12", violations == 0, violations, 0, f"(max gap - bound {worst:.3e})")

    d = rng.normal(size=dim)
    weights = {0: 0.3, 1: 0.7}
    targets = {0: rng.normal(size=dim), 1: rng.normal(size=dim)}
    shifted = {v: y + d for v, y in targets.items()}
    latent = rng.normal(size=dim)
    gap, bound = stability_gap(weights, targets, shifted, latent, latent, 1.0)
    report.check("colinear perturbation attains the bound (gap/bound)", gap / bound >= 0.999, gap / bound, 0.999)
    return report


def variance_rate(seed: int, trials: int = 10000) -> ExperimentReport:
    report = ExperimentReport("variance-rate")
    for row in variance_experiment((1, 2, 4, 8, 16), sigma=1.0, trials=trials, rho=0.0, seed=seed):
        ratio = row.mse_times_v_over_sigma2
        report.check(f"|V|={row.num_views}: MSE*|V|/sigma^2 in [0.9, 1.1]", 0.9 <= ratio <= 1.1, ratio, 0.1)
        band = 4.0 * row.sigma / np.sqrt(row.trials * row.num_views)
        report.check(f"|V|={row.num_views}: mean deviation within CLT band", row.mean_deviation <= band,
                     row.mean_deviation, band)
    noiseless = variance_experiment((1, 4, 16), sigma=0.0, trials=100, rho=0.0, seed=seed)
    worst = max(r.mse for r in noiseless)
    report.check("sigma = 0 gives zero MSE", worst == 0.0, worst, 0.0)
    return report


def gate_properties(seed: int, pairs: int = 1000) -> ExperimentReport:
    report = ExperimentReport("gate-properties")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 106]))
    at_zero = float(edit_gate(0.0, 0.1))
    report.check("gate(0) == 1 exactly", at_zero == 1.0, at_zero, 0.0)

    failures = 0
    for _ in range(pairs):
        r1, r2 = np.sort(rng.uniform(0.0, 1.0, 2))
        tau = rng.uniform(0.05, 1.0)
        if r1 == r2:
            continue
        failures += not edit_gate(r1, tau) > edit_gate(r2, tau)
    report.check("strictly decreasing in r", failures == 0, failures, 0)

    failures = 0
    for _ in range(pairs):
        r = rng.uniform(1e-3, 1.0)
        tau1, tau2 = np.sort(rng.uniform(0.05, 1.0, 2))
        failures += not edit_gate(r, tau1) <= edit_gate(r, tau2)
    report.check("non-decreasing in tau_r for r > 0", failures == 0, failures, 0)

    state = residuals_and_gate({0: 0.4}, {0: 0.1}, {0: 1.0}, tau_r=0.1)
    error = abs(state.gate - np.exp(-3.0))
    report.check("single view a=0.4, w=0.1, tau=0.1 gives exp(-3)", error < 1e-9, error, 1e-9)
    return report


def _gradient_problem(seed: int):
    rng = np.random.default_rng(np.random.SeedSequence([seed, 107]))
    scene = random_scene(16, seed)
    cameras = random_cameras(2, 16, seed)
    renders = [render_view(scene, c) for c in cameras]
    edited = [rng.uniform(0.0, 1.0, (16, 16, 3)) for _ in cameras]
    gates = {g.id: GateState({}, 0.0, float(rng.uniform(0.05, 1.0)), 0.1) for g in scene}
    field_ = CanonicalField(
        entries={g.id: FusedTarget((0,), {0: 1.0}, rng.normal(size=g.latent_dim)) for g in scene},
        rho=0.1,
    )
    return scene, renders, edited, gates, field_


def gradient_check(seed: int, h: float = 1e-5) -> ExperimentReport:
    """Central differences of the total loss against the analytic gradient"""
    report = ExperimentReport("gradient-check")
    scene, renders, edited, gates, field_ = _gradient_problem(seed)
    weights = LossWeights()

    def total(candidate):
        return compute_losses(candidate, renders, edited, gates, field_, [], weights).total

    analytic = loss_gradients(scene, renders, edited, gates, field_, weights)
    numeric_s, analytic_s, numeric_c, analytic_c = [], [], [], []
    for k, g in enumerate(scene):
        for j in range(g.latent_dim):
            step = np.zeros(g.latent_dim)
            step[j] = h
            plus = scene[:k] + [g.with_appearance(semantic_latent=g.semantic_latent + step)] + scene[k + 1:]
            minus = scene[:k] + [g.with_appearance(semantic_latent=g.semantic_latent - step)] + scene[k + 1:]
            numeric_s.append((total(plus) - total(minus)) / (2 * h))
        analytic_s.extend(analytic.semantic[g.id])
        for j in range(3):
            step = np.zeros(3)
            step[j] = h
            plus = scene[:k] + [_shift_color(g, step)] + scene[k + 1:]
            minus = scene[:k] + [_shift_color(g, -step)] + scene[k + 1:]
            numeric_c.append((total(plus) - total(minus)) / (2 * h))
        analytic_c.extend(analytic.color[g.id])

    for name, numeric, exact, tolerance in (
        ("semantic latents", numeric_s, analytic_s, 1e-4),
        ("colors through the renderer", numeric_c, analytic_c, 1e-3),
    ):
        numeric, exact = np.asarray(numeric), np.asarray(exact)
        error = float(np.linalg.norm(numeric - exact) / max(np.linalg.norm(exact), 1e-30))
        report.check(f"relative gradient error, {name}", error < tolerance, error, tolerance)
    return report


def _shift_color(g, step):
    return g.with_appearance(color=g.color + step)


def prototype_properties(seed: int) -> ExperimentReport:
    report = ExperimentReport("prototype-properties")
    scenario = toy_scenario(seed)
    evidences = scenario_evidence(scenario)

    worst_mass = 0.0
    worst_scale = 0.0
    for v, evidence in enumerate(evidences):
        base = extract_prototypes(evidence, count=4, seed=seed, view_index=v)
        worst_mass = max(worst_mass, abs(sum(p.mass for p in base) - 1.0))
        scaled_evidence = EditedViewEvidence(
            edited_image=evidence.edited_image,
            attention=evidence.attention * 8.0,
            semantic_features=evidence.semantic_features,
            appearance_features=evidence.appearance_features,
        )
        scaled = extract_prototypes(scaled_evidence, count=4, seed=seed, view_index=v)
        for p, q in zip(base, scaled):
            worst_scale = max(worst_scale, float(np.abs(p.position - q.position).max()), abs(p.mass - q.mass))
        if len(base) != len(scaled):
            worst_scale = np.inf
    report.check("prototype masses sum to one", worst_mass <= 1e-9, worst_mass, 1e-9)
    report.check("attention scale leaves centroids and masses unchanged", worst_scale <= 1e-7, worst_scale, 1e-7)

    rng = np.random.default_rng(np.random.SeedSequence([seed, 108]))
    blob_a = np.array([(x, y) for x in range(2, 4) for y in range(2, 7)])
    blob_b = np.array([(x, y) for x in range(14, 16) for y in range(9, 14)])
    pixels = np.concatenate([blob_a, blob_b])
    attention = np.zeros((16, 18))
    attention[pixels[:, 1], pixels[:, 0]] = rng.uniform(0.3, 1.0, len(pixels))
    partition = cluster_support(pixels, attention, 2, seed=seed)
    weights = attention[pixels[:, 1], pixels[:, 0]]
    achieved = clustering_objective(pixels.astype(float), weights, partition.labels, partition.centers)
    optimum, _ = exhaustive_two_partition(pixels.astype(float), weights)
    gap = abs(achieved - optimum) / optimum
    report.check("two-blob clustering matches exhaustive optimum (relative)", gap <= 1e-9, gap, 1e-9)
    history = np.diff(partition.objective_history)
    report.check("Lloyd objective non-increasing", bool(np.all(history <= 1e-12)), float(history.max(initial=0.0)), 1e-12)
    return report


async def leakage_ablation(seed: int) -> ExperimentReport:
    """Toy edit with and without the leakage penalty"""
    report = ExperimentReport("leakage-ablation")
    scenario = toy_scenario(seed)
    evidences = scenario_evidence(scenario)
    results = {}
    for leakage in (0.0, 0.5):
        config = scenario.config.with_overrides({"losses.leakage": leakage})
        results[leakage] = await EditRunner(config).run(
            scenario.scene, scenario.cameras, evidences, scenario.target_ids, scenario.spec.target_color
        )
    off, on = results[0.0], results[0.5]
    reduction = 1.0 - on.leakage / off.leakage if off.leakage > 0 else 0.0
    report.check("non-target leakage reduced by >= 50%", reduction >= 0.5, reduction, 0.5,
                 f"(leakage {off.leakage:.4f} -> {on.leakage:.4f})")
    ratio = on.target_color_error / off.target_color_error if off.target_color_error > 0 else 1.0
    report.check("target color error within 1.3x", ratio <= 1.3, ratio, 1.3,
                 f"(error {off.target_color_error:.4f} -> {on.target_color_error:.4f})")
    return report


SUITES: Dict[str, Callable] = {
    "uot-optimality": uot_optimality,
    "uot-uniqueness": uot_uniqueness,
    "fusion-closed-form": fusion_closed_form,
    "stability-bound": stability_bound,
    "variance-rate": variance_rate,
    "gate-properties": gate_properties,
    "gradient-check": gradient_check,
    "prototype-properties": prototype_properties,
    "leakage-ablation": leakage_ablation,
}
SUITE_NAMES = tuple(SUITES) + ("all",)


async def run_suite(name: str, seed: int = 0) -> List[ExperimentReport]:
    """Run one suite (or every suite for "all"), timing each"""
    if name not in SUITE_NAMES:
        raise ValueError(f"unknown suite '{name}', expected one of {', '.join(SUITE_NAMES)}")
    names = list(SUITES) if name == "all" else [name]
    reports = []
    for suite in names:
        started = time.perf_counter()
        result = SUITES[suite](seed)
        if hasattr(result, "__await__"):
            result = await result
        result.seconds = time.perf_counter() - started
        logger.info(f"Suite {suite}: {'pass' if result.passed else 'FAIL'} in {result.seconds:.2f}s")
        reports.append(result)
    return reports
