"""
Standard edit scenarios - the toy scene bundled with its edit and config overrides
"""
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from evidence import EditedViewEvidence, EditSpec, generate_synthetic_evidence
from scene import Camera, Gaussian
from scene.presets import (
    SEMANTIC_DIM,
    TOY_IMAGE_SIZE,
    random_cameras,
    random_scene,
    toy_cameras,
    toy_scene,
    toy_target_ids,
    toy_target_semantic,
)

from .config import EditConfig
from .errors import ConfigError

TOY_TARGET_COLOR = (0.9, 0.2, 0.1)
TOY_APPEARANCE_DIM = 8
TOY_SPILL = 0.6
SINGLE_TARGET_ID = 11  # top front Gaussian of the target column, visible in every toy view
RANDOM_TARGET_STREAM = 3

# summed L1 image term brought to per-pixel scale
TOY_IMAGE_WEIGHT = 1.0 / (TOY_IMAGE_SIZE * TOY_IMAGE_SIZE)

# source masses are about 1/12 per Gaussian, so residuals live on that scale
TOY_OVERRIDES = {
    "rounds": 4,
    "steps_per_round": 50,
    "prototypes.count": 4,
    "gates.tau_r": 0.01,
    "losses.image": TOY_IMAGE_WEIGHT,
}


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    scene: List[Gaussian]
    cameras: List[Camera]
    spec: EditSpec
    config: EditConfig

    @property
    def target_ids(self) -> Tuple[int, ...]:
        return tuple(sorted(self.spec.target_region))


def toy_config(seed: int = 0) -> EditConfig:
    return EditConfig(seed=seed).with_overrides(TOY_OVERRIDES)


def toy_scenario(seed: int = 0) -> Scenario:
    """12 Gaussians, 4 targets, 3 views; the 2D edit bleeds into neighbors"""
    return Scenario(
        name="toy",
        scene=toy_scene(SEMANTIC_DIM),
        cameras=toy_cameras(),
        spec=EditSpec(
            target_region=frozenset(toy_target_ids()),
            target_semantic=toy_target_semantic(SEMANTIC_DIM),
            target_color=np.array(TOY_TARGET_COLOR),
            seed=seed,
            appearance_dim=TOY_APPEARANCE_DIM,
            spill_strength=TOY_SPILL,
        ),
        config=toy_config(seed),
    )


def single_scenario(seed: int = 0) -> Scenario:
    """Toy scene with one target Gaussian and clean evidence"""
    return Scenario(
        name="single",
        scene=toy_scene(SEMANTIC_DIM),
        cameras=toy_cameras(),
        spec=EditSpec(
            target_region=frozenset({SINGLE_TARGET_ID}),
            target_semantic=toy_target_semantic(SEMANTIC_DIM),
            target_color=np.array(TOY_TARGET_COLOR),
            seed=seed,
            appearance_dim=TOY_APPEARANCE_DIM,
        ),
        config=toy_config(seed),
    )


def random_scenario(seed: int = 0, gaussians: int = 16, views: int = 2, size: int = 16) -> Scenario:
    """Random small scene; the first quarter of the ids is the edit target"""
    rng = np.random.default_rng(np.random.SeedSequence([seed, RANDOM_TARGET_STREAM]))
    semantic = rng.standard_normal(SEMANTIC_DIM)
    return Scenario(
        name="random",
        scene=random_scene(gaussians, seed),
        cameras=random_cameras(views, size, seed),
        spec=EditSpec(
            target_region=frozenset(range(max(1, gaussians // 4))),
            target_semantic=semantic / np.linalg.norm(semantic),
            target_color=np.array(TOY_TARGET_COLOR),
            seed=seed,
            appearance_dim=TOY_APPEARANCE_DIM,
        ),
        config=EditConfig(seed=seed).with_overrides({"prototypes.count": 4}),
    )


SCENARIOS = {"toy": toy_scenario, "single": single_scenario, "random": random_scenario}


def load_scenario(name: str, seed: int = 0) -> Scenario:
    try:
        return SCENARIOS[name](seed)
    except KeyError:
        raise ConfigError(f"unknown scenario '{name}', expected one of {sorted(SCENARIOS)}") from None


def scenario_evidence(scenario: Scenario) -> List[EditedViewEvidence]:
    """Synthetic evidence for every camera of the scenario"""
    return [
        generate_synthetic_evidence(scenario.scene, camera, scenario.spec, view_index=v)
        for v, camera in enumerate(scenario.cameras)
    ]
