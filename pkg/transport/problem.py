"""
Transport problem and solution types, with JSON dumps for debugging
"""
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import TransportProblemError


def _array(value, ndim: int, name: str) -> np.ndarray:
    try:
        array = np.asarray(value, dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise TransportProblemError(f"{name} is not numeric: {e}") from e
    if array.ndim != ndim:
        raise TransportProblemError(f"{name} must be {ndim}-dimensional, got shape {array.shape}")
    return array


@dataclass(frozen=True, eq=False)
class TransportProblem:
    """One view's unbalanced transport problem.

    Rows are visible Gaussians (gaussian_ids), columns are the prototypes kept
    after dropping zero-mass entries (prototype_index points back into the
    view's prototype list). target_semantics holds the kept prototypes'
    semantic descriptors when semantic targets are wanted.
    """
    cost: np.ndarray
    source_mass: np.ndarray
    target_mass: np.ndarray
    epsilon: float
    tau_source: float
    tau_target: float
    gaussian_ids: Tuple[int, ...]
    prototype_index: Tuple[int, ...] = ()
    target_semantics: Optional[np.ndarray] = None

    def __post_init__(self):
        cost = _array(self.cost, 2, "cost")
        a = _array(self.source_mass, 1, "source_mass")
        b = _array(self.target_mass, 1, "target_mass")
        n, m = cost.shape
        if a.size != n or b.size != m:
            raise TransportProblemError(
                f"cost shape {cost.shape} does not match source mass ({a.size}) and target mass ({b.size})"
            )
        if n == 0 or m == 0:
            raise TransportProblemError("transport problem is empty")
        if not np.all(np.isfinite(cost)) or cost.min() < 0.0:
            raise TransportProblemError("cost must be finite and nonnegative")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))) or a.min() <= 0.0 or b.min() <= 0.0:
            raise TransportProblemError("source and target masses must be finite and strictly positive")
        for name in ("epsilon", "tau_source", "tau_target"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value <= 0.0:
                raise TransportProblemError(f"{name} must be positive, got {value}")
            object.__setattr__(self, name, value)
        ids = tuple(int(i) for i in self.gaussian_ids)
        if len(ids) != n:
            raise TransportProblemError(f"{len(ids)} gaussian ids for {n} cost rows")
        index = tuple(int(j) for j in self.prototype_index) or tuple(range(m))
        if len(index) != m:
            raise TransportProblemError(f"{len(index)} prototype indices for {m} cost columns")
        if self.target_semantics is not None:
            semantics = _array(self.target_semantics, 2, "target_semantics")
            if semantics.shape[0] != m:
                raise TransportProblemError(f"{semantics.shape[0]} target semantics for {m} cost columns")
            object.__setattr__(self, "target_semantics", semantics)
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "source_mass", a)
        object.__setattr__(self, "target_mass", b)
        object.__setattr__(self, "gaussian_ids", ids)
        object.__setattr__(self, "prototype_index", index)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.cost.shape

    @classmethod
    def build(
        cls,
        cost,
        source_mass,
        target_mass,
        epsilon: float,
        tau_source: float,
        tau_target: float,
        gaussian_ids: Sequence[int],
        target_semantics=None,
    ) -> "TransportProblem":
        """Construct after discarding zero-mass sources and targets"""
        cost = _array(cost, 2, "cost")
        a = _array(source_mass, 1, "source_mass")
        b = _array(target_mass, 1, "target_mass")
        if cost.shape != (a.size, b.size):
            raise TransportProblemError(f"cost shape {cost.shape} does not match masses ({a.size}, {b.size})")
        rows = np.flatnonzero(a > 0.0)
        cols = np.flatnonzero(b > 0.0)
        ids = [int(gaussian_ids[i]) for i in rows]
        semantics = None if target_semantics is None else _array(target_semantics, 2, "target_semantics")[cols]
        return cls(
            cost=cost[np.ix_(rows, cols)],
            source_mass=a[rows],
            target_mass=b[cols],
            epsilon=epsilon,
            tau_source=tau_source,
            tau_target=tau_target,
            gaussian_ids=tuple(ids),
            prototype_index=tuple(int(j) for j in cols),
            target_semantics=semantics,
        )

    def with_taus(self, tau_source: float, tau_target: float) -> "TransportProblem":
        return TransportProblem(
            cost=self.cost,
            source_mass=self.source_mass,
            target_mass=self.target_mass,
            epsilon=self.epsilon,
            tau_source=tau_source,
            tau_target=tau_target,
            gaussian_ids=self.gaussian_ids,
            prototype_index=self.prototype_index,
            target_semantics=self.target_semantics,
        )

    def to_dict(self) -> dict:
        return {
            "cost": self.cost.tolist(),
            "source_mass": self.source_mass.tolist(),
            "target_mass": self.target_mass.tolist(),
            "epsilon": self.epsilon,
            "tau_source": self.tau_source,
            "tau_target": self.tau_target,
            "gaussian_ids": list(self.gaussian_ids),
            "prototype_index": list(self.prototype_index),
            "target_semantics": None if self.target_semantics is None else self.target_semantics.tolist(),
        }

    @classmethod
    def from_dict(cls, record: dict) -> "TransportProblem":
        if not isinstance(record, dict):
            raise TransportProblemError("transport problem must be a JSON object")
        try:
            cost = _array(record["cost"], 2, "cost")
            return cls(
                cost=cost,
                source_mass=record["source_mass"],
                target_mass=record["target_mass"],
                epsilon=record.get("epsilon", 0.05),
                tau_source=record.get("tau_source", 1.0),
                tau_target=record.get("tau_target", 1.0),
                gaussian_ids=record.get("gaussian_ids", list(range(cost.shape[0]))),
                prototype_index=record.get("prototype_index", ()),
                target_semantics=record.get("target_semantics"),
            )
        except KeyError as e:
            raise TransportProblemError(f"transport problem is missing key {e}") from e


@dataclass(frozen=True, eq=False)
class TransportSolution:
    plan: np.ndarray
    objective: float
    iterations: int
    support_mass: np.ndarray
    semantic_target: np.ndarray
    converged: bool
    gaussian_ids: Tuple[int, ...] = ()
    # log scaling potentials, usable as a warm start
    log_u: np.ndarray = field(default=None, repr=False)
    log_v: np.ndarray = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "plan": self.plan.tolist(),
            "objective": self.objective,
            "iterations": self.iterations,
            "converged": self.converged,
            "gaussian_ids": list(self.gaussian_ids),
            "support_mass": self.support_mass.tolist(),
            "semantic_target": self.semantic_target.tolist(),
        }

    @classmethod
    def from_dict(cls, record: dict) -> "TransportSolution":
        if not isinstance(record, dict):
            raise TransportProblemError("transport solution must be a JSON object")
        try:
            plan = _array(record["plan"], 2, "plan")
            semantic_target = _array(record["semantic_target"], 2, "semantic_target")
            support_mass = _array(record["support_mass"], 1, "support_mass")
            ids = tuple(int(i) for i in record["gaussian_ids"])
        except KeyError as e:
            raise TransportProblemError(f"transport solution is missing key {e}") from e
        if support_mass.size != plan.shape[0] or len(ids) != plan.shape[0] or semantic_target.shape[0] != plan.shape[0]:
            raise TransportProblemError(f"transport solution rows disagree with plan shape {plan.shape}")
        return cls(
            plan=plan,
            objective=float(record["objective"]),
            iterations=int(record["iterations"]),
            support_mass=support_mass,
            semantic_target=semantic_target,
            converged=bool(record["converged"]),
            gaussian_ids=ids,
        )
