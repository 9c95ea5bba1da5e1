"""
Edit configuration - YAML/JSON loader and dataclasses
"""
import dataclasses
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import yaml

from gating import LossWeights
from gating.gates import RESIDUAL_MODES
from gating.losses import IMAGE_REDUCTIONS, LEAK_NORMS, SEMANTIC_MODES
from transport import CostWeights, TransportError

from .errors import ConfigError

# Sweep grid names -> dotted config paths
ALIASES = {
    "beta_sem": "transport.lambda_sem",
    "lambda_sem": "transport.lambda_sem",
    "loss_leakage_w": "losses.leakage",
    "lambda_leak": "losses.leakage",
    "epsilon": "transport.epsilon",
    "tau_r": "gates.tau_r",
    "rho": "fusion.rho",
}


@dataclass
class PrototypeSettings:
    count: int = 32  # M_v
    threshold: float = 0.3  # delta_a
    min_component: int = 4  # pixels
    max_lloyd_iters: int = 50
    normalize_mass: bool = True
    use_mask: bool = True

    def __post_init__(self):
        if self.count < 1 or self.min_component < 1 or self.max_lloyd_iters < 1:
            raise ConfigError("prototype count, min_component and max_lloyd_iters must be positive")
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError(f"prototypes.threshold must lie in (0,1), got {self.threshold}")


@dataclass
class TransportSettings:
    epsilon: float = 0.05
    tau_source: float = 1.0
    tau_target: float = 1.0
    max_iters: int = 30
    tolerance: float = 1e-7
    top_k: Optional[int] = None  # per prototype; None solves dense
    lambda_geo: float = 1.0
    lambda_sem: float = 1.0
    lambda_app: float = 0.5
    appearance_metric: str = "cosine"  # cosine | squared_l2
    delta: float = 1e-8

    def __post_init__(self):
        if min(self.epsilon, self.tau_source, self.tau_target, self.tolerance) <= 0.0:
            raise ConfigError("transport epsilon, taus and tolerance must be positive")
        if self.max_iters < 1 or (self.top_k is not None and self.top_k < 1):
            raise ConfigError("transport max_iters and top_k must be positive")
        try:
            self.cost_weights()
        except TransportError as e:
            raise ConfigError(str(e)) from e

    def cost_weights(self) -> CostWeights:
        return CostWeights(
            lambda_geo=self.lambda_geo,
            lambda_sem=self.lambda_sem,
            lambda_app=self.lambda_app,
            appearance_metric=self.appearance_metric,
            delta=self.delta,
        )


@dataclass
class FusionSettings:
    rho: float = 0.1
    delta: float = 1e-8
    ema_momentum: float = 0.9

    def __post_init__(self):
        if self.rho < 0.0 or self.delta <= 0.0:
            raise ConfigError("fusion rho must be nonnegative and delta positive")
        if not 0.0 <= self.ema_momentum < 1.0:
            raise ConfigError(f"fusion.ema_momentum must lie in [0,1), got {self.ema_momentum}")


@dataclass
class GateSettings:
    tau_r: float = 0.1
    mode: str = "clip-then-aggregate"  # clip-then-aggregate | aggregate-then-clip
    delta: float = 1e-12
    semantic_mode: str = "weighted"  # weighted | gated_target

    def __post_init__(self):
        if self.tau_r <= 0.0:
            raise ConfigError(f"gates.tau_r must be positive, got {self.tau_r}")
        if self.mode not in RESIDUAL_MODES:
            raise ConfigError(f"gates.mode must be one of {RESIDUAL_MODES}")
        if self.semantic_mode not in SEMANTIC_MODES:
            raise ConfigError(f"gates.semantic_mode must be one of {SEMANTIC_MODES}")


@dataclass
class LossSettings:
    image: float = 1.0
    semantic: float = 1.0
    transport: float = 0.01
    leakage: float = 0.5
    leak_norm: str = "l1"  # l1 | squared_l2
    image_reduction: str = "sum"  # sum | mean

    def __post_init__(self):
        if min(self.image, self.semantic, self.transport, self.leakage) < 0.0:
            raise ConfigError("loss weights must be nonnegative")
        if self.leak_norm not in LEAK_NORMS:
            raise ConfigError(f"losses.leak_norm must be one of {LEAK_NORMS}")
        if self.image_reduction not in IMAGE_REDUCTIONS:
            raise ConfigError(f"losses.image_reduction must be one of {IMAGE_REDUCTIONS}")

    def weights(self, leak_suppression: bool = True) -> LossWeights:
        return LossWeights(
            image=self.image,
            semantic=self.semantic,
            transport=self.transport,
            leakage=self.leakage if leak_suppression else 0.0,
        )


@dataclass
class AblationSettings:
    leak_suppression: bool = True
    use_prototypes: bool = True
    balanced_transport: bool = False
    balanced_tau: float = 1e4

    def __post_init__(self):
        if self.balanced_tau <= 0.0:
            raise ConfigError("ablation.balanced_tau must be positive")


SECTIONS = {
    "prototypes": PrototypeSettings,
    "transport": TransportSettings,
    "fusion": FusionSettings,
    "gates": GateSettings,
    "losses": LossSettings,
    "ablation": AblationSettings,
}


@dataclass
class EditConfig:
    """Every hyperparameter of an edit run"""
    rounds: int = 4
    steps_per_round: int = 50
    step_size: float = 0.05
    seed: int = 0
    prototypes: PrototypeSettings = field(default_factory=PrototypeSettings)
    transport: TransportSettings = field(default_factory=TransportSettings)
    fusion: FusionSettings = field(default_factory=FusionSettings)
    gates: GateSettings = field(default_factory=GateSettings)
    losses: LossSettings = field(default_factory=LossSettings)
    ablation: AblationSettings = field(default_factory=AblationSettings)

    def __post_init__(self):
        if self.rounds < 1:
            raise ConfigError(f"rounds must be at least 1, got {self.rounds}")
        if self.steps_per_round < 0:
            raise ConfigError(f"steps_per_round must be nonnegative, got {self.steps_per_round}")
        if self.step_size <= 0.0:
            raise ConfigError(f"step_size must be positive, got {self.step_size}")

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "EditConfig":
        data = dict(data or {})
        top_level = {f.name for f in dataclasses.fields(cls)} - set(SECTIONS)
        unknown = set(data) - top_level - set(SECTIONS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = {k: v for k, v in data.items() if k in top_level}
        for name, section_cls in SECTIONS.items():
            section = data.get(name) or {}
            if not isinstance(section, dict):
                raise ConfigError(f"config section '{name}' must be a mapping")
            allowed = {f.name for f in dataclasses.fields(section_cls)}
            unknown = set(section) - allowed
            if unknown:
                raise ConfigError(f"unknown keys in '{name}': {sorted(unknown)}")
            try:
                kwargs[name] = section_cls(**section)
            except TypeError as e:
                raise ConfigError(f"config section '{name}': {e}") from e
        try:
            return cls(**kwargs)
        except TypeError as e:
            raise ConfigError(str(e)) from e

    @classmethod
    def load(cls, path: str) -> "EditConfig":
        """Load configuration from a YAML or JSON file"""
        with open(path, encoding="utf-8") as f:
            try:
                data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise ConfigError(f"{path}: {e}") from e
        if data is not None and not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a mapping")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def with_overrides(self, overrides: Dict[str, Any]) -> "EditConfig":
        """Copy with dotted-path (or alias) overrides, e.g. {"losses.leakage": 0.0}"""
        data = self.to_dict()
        for key, value in overrides.items():
            path = ALIASES.get(key, key).split(".")
            target = data
            for part in path[:-1]:
                if not isinstance(target.get(part), dict):
                    raise ConfigError(f"unknown config path '{key}'")
                target = target[part]
            if path[-1] not in target:
                raise ConfigError(f"unknown config path '{key}'")
            target[path[-1]] = value
        return EditConfig.from_dict(data)
