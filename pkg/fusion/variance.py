"""
Variance of the fused target under independent view noise
"""
import logging
from dataclasses import asdict, dataclass
from typing import List, Sequence

import numpy as np

from files import write_csv

from .errors import FusionError

logger = logging.getLogger(__name__)

VARIANCE_STREAM = 5
VARIANCE_COLUMNS = (
    "num_views",
    "trials",
    "sigma",
    "mse",
    "mse_times_v_over_sigma2",
    "mean_deviation",
    "rho",
    "bias_squared",
    "variance",
)


@dataclass(frozen=True)
class VarianceRow:
    num_views: int
    trials: int
    sigma: float
    mse: float
    mse_times_v_over_sigma2: float
    mean_deviation: float
    rho: float
    bias_squared: float
    variance: float


def variance_experiment(
    num_views_list: Sequence[int] = (1, 2, 4, 8, 16),
    sigma: float = 1.0,
    trials: int = 10000,
    rho: float = 0.0,
    seed: int = 0,
    dim: int = 16,
    anchor_offset: float = 1.0,
) -> List[VarianceRow]:
    """Monte Carlo over y_v = y_true + xi_v with E||xi||^2 = sigma^2 and uniform weights.

    Errors are accumulated relative to y_true, so sigma = 0 with rho = 0 gives
    exactly zero. For rho > 0 the anchor sits `anchor_offset` away from y_true.
    """
    if trials < 1 or sigma < 0.0 or rho < 0.0:
        raise FusionError("trials must be positive and sigma, rho nonnegative")
    rows = []
    for num_views in num_views_list:
        if num_views < 1:
            raise FusionError(f"num_views must be positive, got {num_views}")
        rng = np.random.default_rng(np.random.SeedSequence([seed, VARIANCE_STREAM, num_views]))
        direction = rng.normal(size=dim)
        anchor_error = anchor_offset * direction / np.linalg.norm(direction)
        noise = rng.normal(0.0, sigma / np.sqrt(dim), size=(trials, num_views, dim))

        weight = 1.0 / num_views
        numerator = weight * noise.sum(axis=1)
        if rho > 0.0:
            numerator = numerator + rho * anchor_error
        errors = numerator / (1.0 + rho)  # z* - y_true per trial

        mse = float(np.mean(np.sum(errors * errors, axis=1)))
        mean_error = errors.mean(axis=0)
        centered = errors - mean_error
        row = VarianceRow(
            num_views=int(num_views),
            trials=int(trials),
            sigma=float(sigma),
            mse=mse,
            mse_times_v_over_sigma2=mse * num_views / sigma ** 2 if sigma > 0 else float("nan"),
            mean_deviation=float(np.linalg.norm(mean_error)),
            rho=float(rho),
            bias_squared=float(mean_error @ mean_error),
            variance=float(np.mean(np.sum(centered * centered, axis=1))),
        )
        logger.info(f"|V|={num_views}: mse {row.mse:.5f}, mse*|V|/sigma^2 {row.mse_times_v_over_sigma2:.4f}")
        rows.append(row)
    return rows


def save_variance_table(rows: List[VarianceRow], path):
    return write_csv(path, VARIANCE_COLUMNS, [asdict(r) for r in rows])
