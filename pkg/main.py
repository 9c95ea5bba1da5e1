"""
splat-edit - multi-view semantic transport for editing Gaussian scenes
Command-line entry point: scene and evidence generation, per-stage runs,
the gated edit loop, verification suites and hyperparameter sweeps
"""
import argparse
import asyncio
import dataclasses
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import yaml

from config import config
from editing import (
    SCENARIOS,
    EditConfig,
    EditRunner,
    load_grid,
    load_scenario,
    random_scenario,
    run_sweep,
    save_edit_outputs,
    save_sweep,
)
from evidence import EditSpec, EvidenceStorage, generate_synthetic_evidence
from files import write_json, write_text_atomic
from fusion import fuse_views, save_variance_table, variance_experiment
from gating import compute_gates
from prototypes import load_prototypes, save_prototypes
from scene import load_camera, load_scene, render_view, save_camera, save_scene
from transport import load_problem, load_problems, load_solutions, save_transport, solve_uot
from verification import SUITE_NAMES, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2

# ValueError covers every package error hierarchy and malformed JSON
INPUT_ERRORS = (ValueError, OSError, yaml.YAMLError)

SCENE_NAME = "scene.json"
SPEC_NAME = "edit_spec.json"
CONFIG_NAME = "edit_config.yaml"
TRANSPORT_NAME = "transport.json"
FIELD_NAME = "canonical_field.json"


def parse_args(argv=None):
    parser = argparse.ArgumentParser(
        description="Edit Gaussian scenes from per-view 2D edits via unbalanced semantic transport"
    )
    parser.add_argument("--seed", type=int, default=None,
                        help=f"Random seed (default: config file seed, else SPLAT_EDIT_SEED={config['seed']})")
    parser.add_argument("--threads", type=int, default=config["threads"],
                        help=f"Worker threads for per-view work (default: {config['threads']})")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("generate-scene", help="Write a preset scene, its cameras, edit spec and config")
    p.add_argument("--preset", choices=sorted(SCENARIOS), default="toy")
    p.add_argument("--gaussians", type=int, default=16, help="Gaussians in the random preset (default: 16)")
    p.add_argument("--views", type=int, default=2, help="Cameras in the random preset (default: 2)")
    p.add_argument("--size", type=int, default=16, help="Image size of the random preset (default: 16)")
    p.add_argument("--out", default=None, help="Output directory")

    p = commands.add_parser("generate-evidence", help="Render synthetic per-view edit evidence")
    p.add_argument("--scene", required=True)
    p.add_argument("--cameras", nargs="+", required=True, help="Camera JSON files, one per view")
    p.add_argument("--spec", required=True, help="Edit spec (YAML or JSON)")
    p.add_argument("--out", default=None, help="Evidence directory")

    p = commands.add_parser("extract-prototypes", help="Prototypes per evidence view")
    p.add_argument("--evidence-dir", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None, help="Prototype directory")

    p = commands.add_parser("solve-transport", help="Per-view transport problems and solutions")
    p.add_argument("--scene")
    p.add_argument("--evidence-dir")
    p.add_argument("--prototypes", help="Prototype directory written by extract-prototypes")
    p.add_argument("--problem", help="Solve one transport problem JSON instead")
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None, help="Transport dump (or solution JSON with --problem)")

    p = commands.add_parser("fuse", help="Canonical targets and gates from a transport dump")
    p.add_argument("--scene", required=True)
    p.add_argument("--transport", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--out", default=None)

    p = commands.add_parser("edit", help="Run the gated edit loop")
    p.add_argument("--scene", required=True)
    p.add_argument("--evidence-dir", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--spec", default=None, help="Edit spec, for target metrics in the report")
    p.add_argument("--out", default=None, help="Output directory")

    p = commands.add_parser("verify", help="Run verification suites")
    p.add_argument("--suite", choices=SUITE_NAMES, default="all")
    p.add_argument("--out", default=None, help="Write the reports as JSON")

    p = commands.add_parser("sweep", help="Toy edit per point of a hyperparameter grid")
    p.add_argument("--grid", required=True, help="YAML or JSON mapping of parameter -> values")
    p.add_argument("--preset", choices=sorted(SCENARIOS), default="toy")
    p.add_argument("--out", default=None, help="CSV file")

    p = commands.add_parser("variance", help="Monte Carlo MSE table of the fused target")
    p.add_argument("--views", type=int, nargs="+", default=[1, 2, 4, 8, 16])
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--out", default=None, help="CSV file")

    return parser.parse_args(argv)


def _seed(args) -> int:
    return config["seed"] if args.seed is None else args.seed


def _out(args, default_name: str) -> Path:
    return Path(args.out) if args.out else Path(config["output_dir"]) / default_name


def _edit_config(args) -> EditConfig:
    cfg = EditConfig.load(args.config) if args.config else EditConfig(seed=_seed(args))
    if args.seed is not None:
        cfg = cfg.with_overrides({"seed": args.seed})
    return cfg


def _prototype_file(directory: Path, view: int) -> Path:
    return directory / f"view_{view:03d}.json"


async def generate_scene(args) -> int:
    if args.preset == "random":
        scenario = random_scenario(_seed(args), args.gaussians, args.views, args.size)
    else:
        scenario = load_scenario(args.preset, _seed(args))
    out = _out(args, "scene")
    save_scene(scenario.scene, out / SCENE_NAME)
    for v, camera in enumerate(scenario.cameras):
        save_camera(camera, out / f"camera_{v:03d}.json")
    write_json(out / SPEC_NAME, scenario.spec.to_dict())
    write_text_atomic(out / CONFIG_NAME, yaml.safe_dump(scenario.config.to_dict(), sort_keys=False))
    print(f"Scene '{scenario.name}': {len(scenario.scene)} Gaussians, {len(scenario.cameras)} cameras -> {out}")
    return EXIT_OK


async def generate_evidence(args) -> int:
    scene = load_scene(args.scene)
    cameras = [load_camera(path) for path in args.cameras]
    spec = EditSpec.load(args.spec)
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    evidences = await asyncio.gather(*[
        asyncio.to_thread(generate_synthetic_evidence, scene, camera, spec, v)
        for v, camera in enumerate(cameras)
    ])
    storage = EvidenceStorage(_out(args, "evidence"))
    for v, (evidence, camera) in enumerate(zip(evidences, cameras)):
        storage.save(v, evidence, camera)
    print(f"Evidence for {len(cameras)} views -> {storage.root}")
    return EXIT_OK


async def extract_prototypes(args) -> int:
    runner = EditRunner(_edit_config(args))
    evidences, _ = EvidenceStorage(args.evidence_dir).load_all()
    results = await asyncio.gather(*[
        asyncio.to_thread(runner.extract, evidence, v) for v, evidence in enumerate(evidences)
    ])
    out = _out(args, "prototypes")
    for v, prototypes in enumerate(results):
        # an empty array marks a view without usable support
        save_prototypes(prototypes or [], _prototype_file(out, v))
        print(f"View {v}: {len(prototypes or [])} prototypes")
    return EXIT_OK


async def solve_transport(args) -> int:
    cfg = _edit_config(args)
    if args.problem:
        problem = load_problem(args.problem)
        settings = cfg.transport
        solution = solve_uot(problem, settings.max_iters, settings.tolerance, settings.top_k)
        print(f"Solved {problem.shape[0]}x{problem.shape[1]} problem: objective {solution.objective:.6f}, "
              f"{solution.iterations} iterations, converged {solution.converged}")
        if args.out:
            write_json(args.out, solution.to_dict())
        return EXIT_OK

    missing = [flag for flag, value in (("--scene", args.scene), ("--evidence-dir", args.evidence_dir),
                                        ("--prototypes", args.prototypes)) if not value]
    if missing:
        raise ValueError(f"solve-transport needs {', '.join(missing)} (or --problem)")
    scene = load_scene(args.scene)
    evidences, cameras = EvidenceStorage(args.evidence_dir).load_all()
    runner = EditRunner(cfg)

    def view_stage(v):
        prototypes = load_prototypes(_prototype_file(Path(args.prototypes), v))
        if not prototypes:
            logger.warning(f"View {v} has no prototypes and is skipped")
            return None, None
        render = render_view(scene, cameras[v])
        return runner.transport(scene, cameras[v], render, prototypes, evidences[v])

    results = await asyncio.gather(*[asyncio.to_thread(view_stage, v) for v in range(len(cameras))])
    problems = [r[0] for r in results]
    solutions = [r[1] for r in results]
    for v, solution in enumerate(solutions):
        if solution is not None:
            print(f"View {v}: objective {solution.objective:.6f}, {solution.iterations} iterations, "
                  f"absorbed mass {solution.support_mass.sum():.4f}")
    save_transport(problems, solutions, _out(args, TRANSPORT_NAME))
    return EXIT_OK


async def fuse(args) -> int:
    cfg = _edit_config(args)
    scene = load_scene(args.scene)
    problems = load_problems(args.transport)
    solutions = load_solutions(args.transport)
    field_ = fuse_views(scene, solutions, cfg.fusion.rho, cfg.fusion.delta)
    gates = compute_gates(scene, problems, solutions, field_, cfg.gates.tau_r, cfg.gates.mode, cfg.gates.delta)
    payload = field_.to_dict()
    payload["gates"] = [
        {"id": gid, "residual": state.aggregated_residual, "gate": state.gate}
        for gid, state in sorted(gates.items())
    ]
    write_json(_out(args, FIELD_NAME), payload)
    supported = sum(1 for e in field_.entries.values() if e.valid_views)
    print(f"Fused {supported}/{len(scene)} Gaussians from {sum(s is not None for s in solutions)} views")
    return EXIT_OK


async def edit(args) -> int:
    cfg = _edit_config(args)
    scene = load_scene(args.scene)
    evidences, cameras = EvidenceStorage(args.evidence_dir).load_all()
    target_ids, target_color = (), None
    if args.spec:
        spec = EditSpec.load(args.spec)
        target_ids, target_color = tuple(sorted(spec.target_region)), spec.target_color
    report = await EditRunner(cfg).run(scene, cameras, evidences, target_ids, target_color)
    out = save_edit_outputs(report, cfg, _out(args, "edit"))
    print(f"Edit done in {len(report.trace) - 1} steps: total loss {report.trace[-1]['total']:.6f}")
    if target_ids:
        print(f"  target color error {report.initial_target_color_error:.4f} -> {report.target_color_error:.4f}")
        print(f"  non-target leakage {report.leakage:.4f}")
    print(f"  outputs in {out}")
    return EXIT_OK


async def verify(args) -> int:
    reports = await run_suite(args.suite, _seed(args))
    for report in reports:
        print("\n".join(report.summary_lines()))
    passed = all(r.passed for r in reports)
    if args.out:
        write_json(args.out, {"seed": _seed(args), "passed": passed, "reports": [r.to_dict() for r in reports]})
    print(f"\n=== {sum(r.passed for r in reports)}/{len(reports)} suites passed ===")
    return EXIT_OK if passed else EXIT_CHECK_FAILED


async def sweep(args) -> int:
    grid = load_grid(args.grid)
    rows = await run_sweep(grid, args.preset, _seed(args))
    path = save_sweep(rows, list(grid), _out(args, "sweep.csv"))
    for row in rows:
        print(json.dumps(row))
    print(f"{len(rows)} grid points -> {path}")
    return EXIT_OK


async def variance(args) -> int:
    rows = await asyncio.to_thread(
        variance_experiment, args.views, args.sigma, args.trials, args.rho, _seed(args)
    )
    for row in rows:
        print(f"|V|={row.num_views:3d}  mse {row.mse:.5f}  mse*|V|/sigma^2 {row.mse_times_v_over_sigma2:.4f}  "
              f"bias^2 {row.bias_squared:.5f}")
    save_variance_table(rows, _out(args, "variance.csv"))
    return EXIT_OK


COMMANDS = {
    "generate-scene": generate_scene,
    "generate-evidence": generate_evidence,
    "extract-prototypes": extract_prototypes,
    "solve-transport": solve_transport,
    "fuse": fuse,
    "edit": edit,
    "verify": verify,
    "sweep": sweep,
    "variance": variance,
}


async def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, config["log_level"], logging.INFO),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )
    if args.threads < 1:
        logger.error(f"--threads must be positive, got {args.threads}")
        return EXIT_INPUT_ERROR
    asyncio.get_running_loop().set_default_executor(ThreadPoolExecutor(max_workers=args.threads))

    try:
        return await COMMANDS[args.command](args)
    except INPUT_ERRORS as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(asyncio.run(main()))
