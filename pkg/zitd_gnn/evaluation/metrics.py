"""
Evaluation metrics for multi-step risk forecasts.

Every function accepts (N, p) arrays or stacks of windows (W, N, p); roads
are always the second-to-last axis and steps the last. A metric with no
defined value (MAPE without positive targets, hit rate without crashes)
is reported as None.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from zitd_gnn.constants import HIT_RATE_FRACTION, ZERO_THRESHOLD
from zitd_gnn.errors import ContractError, ShapeError

logger = logging.getLogger(__name__)

METRIC_NAMES = ("mae", "mape", "rmse", "mpiw", "picp", "zr", "acc_hr")


@dataclass(frozen=True)
class MetricsConfig:
    zero_threshold: float = ZERO_THRESHOLD
    hit_rate_fraction: float = HIT_RATE_FRACTION

    def __post_init__(self):
        if not 0.0 < self.zero_threshold < 1.0:
            raise ContractError("zero_threshold must lie in (0, 1)")
        if not 0.0 < self.hit_rate_fraction <= 1.0:
            raise ContractError("hit_rate_fraction must lie in (0, 1]")


class PointMetrics(NamedTuple):
    mae: float
    mape: float | None
    rmse: float


class IntervalMetrics(NamedTuple):
    mpiw: float
    picp: float


def _same_shape(op: str, *arrays: np.ndarray) -> None:
    if len({a.shape for a in arrays}) != 1:
        raise ShapeError(op, *(a.shape for a in arrays))


def point_metrics(y, y_hat) -> PointMetrics:
    """
    MAE and RMSE over all cells; MAPE over cells with y > 0 only.
    """
    y, y_hat = np.asarray(y, dtype=np.float64), np.asarray(y_hat, dtype=np.float64)
    _same_shape("point_metrics", y, y_hat)
    err = y_hat - y
    positive = y > 0
    mape = float(np.mean(np.abs(err[positive]) / y[positive])) if positive.any() else None
    return PointMetrics(
        mae=float(np.mean(np.abs(err))),
        mape=mape,
        rmse=float(np.sqrt(np.mean(err * err))),
    )


def interval_metrics(y, lower, upper) -> IntervalMetrics:
    """
    MPIW = mean(U - L); PICP = share of cells with L <= y <= U.

    The containment test uses the observed value, inclusive at both ends.
    """
    y, lower, upper = (np.asarray(a, dtype=np.float64) for a in (y, lower, upper))
    _same_shape("interval_metrics", y, lower, upper)
    if (lower > upper).any():
        raise ContractError("interval_metrics needs L <= U everywhere")
    inside = (y >= lower) & (y <= upper)
    return IntervalMetrics(mpiw=float(np.mean(upper - lower)), picp=float(np.mean(inside)))


def zero_rate(y, p0, threshold: float = ZERO_THRESHOLD) -> float:
    """Share of all cells where y = 0 and the predicted zero mass exceeds ``threshold``."""
    if not 0.0 < threshold < 1.0:
        raise ContractError("threshold must lie in (0, 1)")
    y, p0 = np.asarray(y, dtype=np.float64), np.asarray(p0, dtype=np.float64)
    _same_shape("zero_rate", y, p0)
    return float(np.mean((y == 0.0) & (p0 > threshold)))


def _step_rows(a: np.ndarray) -> np.ndarray:
    # one row of N roads per (window, step)
    return np.moveaxis(a, -2, -1).reshape(-1, a.shape[-2])


def acc_hit_rate(y, y_hat, fraction: float = HIT_RATE_FRACTION) -> float | None:
    """
    Share of crash cells captured by the top ceil(fraction * N) roads.

    Roads are ranked per step by predicted risk, ties by road index. Steps
    without any crash are skipped; the per-step shares are averaged.
    """
    if not 0.0 < fraction <= 1.0:
        raise ContractError("fraction must lie in (0, 1]")
    y, y_hat = np.asarray(y, dtype=np.float64), np.asarray(y_hat, dtype=np.float64)
    _same_shape("acc_hit_rate", y, y_hat)
    if y.ndim < 2:
        raise ShapeError("acc_hit_rate", y.shape)
    n = y.shape[-2]
    k = max(1, math.ceil(fraction * n - 1e-9))
    roads = np.arange(n)
    scores = []
    for truth, pred in zip(_step_rows(y), _step_rows(y_hat)):
        crashes = truth > 0
        if not crashes.any():
            continue
        top = np.lexsort((roads, -pred))[:k]
        scores.append(crashes[top].sum() / crashes.sum())
    return float(np.mean(scores)) if scores else None


@dataclass
class MetricReport:
    """
    Overall metrics plus the same metrics per horizon step.

    ``per_step[name][j]`` is computed over every window and road at step j.
    """

    mae: float
    mape: float | None
    rmse: float
    mpiw: float
    picp: float
    zr: float
    acc_hr: float | None
    per_step: dict[str, list[float | None]] = field(default_factory=dict)
    n_cells: int = 0

    def __post_init__(self):
        if self.rmse < self.mae - 1e-12:
            raise ContractError(f"RMSE {self.rmse} below MAE {self.mae}")
        for name in ("picp", "zr", "acc_hr"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise ContractError(f"{name}={value} outside [0, 1]")

    def overall(self) -> dict[str, float | None]:
        return {name: getattr(self, name) for name in METRIC_NAMES}

    def to_dict(self) -> dict:
        return asdict(self)


def _metrics(y, y_hat, lower, upper, p0, cfg: MetricsConfig) -> dict[str, float | None]:
    point = point_metrics(y, y_hat)
    interval = interval_metrics(y, lower, upper)
    return {
        "mae": point.mae,
        "mape": point.mape,
        "rmse": point.rmse,
        "mpiw": interval.mpiw,
        "picp": interval.picp,
        "zr": zero_rate(y, p0, cfg.zero_threshold),
        "acc_hr": acc_hit_rate(y, y_hat, cfg.hit_rate_fraction),
    }


def metric_report(y, y_hat, lower, upper, p0, cfg: MetricsConfig = MetricsConfig()) -> MetricReport:
    """
    Compute all seven metrics overall and per step.

    Args:
        y: Observed risk, (N, p) or (W, N, p).
        y_hat: Point forecasts.
        lower: Interval lower bounds.
        upper: Interval upper bounds.
        p0: Predicted zero mass.
        cfg: Zero threshold and hit-rate fraction.
    """
    arrays = [np.asarray(a, dtype=np.float64) for a in (y, y_hat, lower, upper, p0)]
    _same_shape("metric_report", *arrays)
    if arrays[0].ndim == 2:
        arrays = [a[None] for a in arrays]
    overall = _metrics(*arrays, cfg)
    per_step: dict[str, list[float | None]] = {name: [] for name in METRIC_NAMES}
    for j in range(arrays[0].shape[-1]):
        step = _metrics(*(a[..., j:j + 1] for a in arrays), cfg)
        for name in METRIC_NAMES:
            per_step[name].append(step[name])
    if overall["mape"] is None:
        logger.warning("MAPE undefined: no positive targets")
    return MetricReport(**overall, per_step=per_step, n_cells=int(arrays[0].size))


def baseline_report(y, y_hat, cfg: MetricsConfig = MetricsConfig()) -> MetricReport:
    """
    Metrics for a point-only forecaster such as the historical average.

    Its interval is the degenerate [y_hat, y_hat] and a cell counts as a
    predicted zero exactly when y_hat = 0.
    """
    y_hat = np.asarray(y_hat, dtype=np.float64)
    return metric_report(y, y_hat, y_hat, y_hat, (y_hat == 0.0).astype(np.float64), cfg)
