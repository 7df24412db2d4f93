"""
Turn decoded parameter fields into point forecasts, intervals and zero
probabilities.
"""

import logging
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
import pandas as pd

from zitd_gnn.constants import DEFAULT_SEED, INTERVAL_SAMPLES, LOWER_QUANTILE, UPPER_QUANTILE
from zitd_gnn.core.tensor import no_grad
from zitd_gnn.data.dataset import Dataset
from zitd_gnn.data.windows import Window
from zitd_gnn.distributions.zitd import (
    CdfBisection,
    IntervalMethod,
    MonteCarlo,
    zitd_interval,
    zitd_zero_mass,
)
from zitd_gnn.errors import ContractError, DataError
from zitd_gnn.model.decoder import FIELD_NAMES, ZitdField
from zitd_gnn.model.network import StzitdNetwork

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntervalConfig:
    """Quantile levels and how they are extracted."""

    lower: float = LOWER_QUANTILE
    upper: float = UPPER_QUANTILE
    method: Literal["monte_carlo", "cdf_bisection"] = "monte_carlo"
    samples: int = INTERVAL_SAMPLES
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not 0.0 < self.lower < self.upper < 1.0:
            raise ContractError(f"need 0 < lower < upper < 1, got ({self.lower}, {self.upper})")
        if self.method not in ("monte_carlo", "cdf_bisection"):
            raise ContractError(f"unknown interval method {self.method!r}")
        if self.samples < 1:
            raise ContractError("samples must be positive")

    def method_for(self, road: int, time_slot: int) -> IntervalMethod:
        if self.method == "cdf_bisection":
            return CdfBisection()
        return MonteCarlo(self.samples, np.random.SeedSequence([self.seed, road, time_slot]))


@dataclass
class PredictionSet:
    """
    Per-cell predictions, each array shaped (W, N, p).

    ``time_slots`` is (W, p): the absolute slot of every window step.
    ``params`` is (W, N, p, 4): the decoded (pi, mu, phi, rho) per cell.
    ``y_true`` is None for forecasts beyond the data.
    """

    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    p0: np.ndarray
    time_slots: np.ndarray
    y_true: np.ndarray | None = None
    params: np.ndarray | None = None

    def __post_init__(self):
        shape = self.mean.shape
        if self.params is not None and self.params.shape != (*shape, len(FIELD_NAMES)):
            raise ContractError(f"params has shape {self.params.shape}, expected {(*shape, 4)}")
        for name in ("lower", "upper", "p0"):
            if getattr(self, name).shape != shape:
                raise ContractError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        if self.y_true is not None and self.y_true.shape != shape:
            raise ContractError(f"y_true has shape {self.y_true.shape}, expected {shape}")
        if (self.lower > self.upper).any():
            raise ContractError("interval with L > U")
        if (self.mean < 0).any() or (self.p0 < 0).any() or (self.p0 > 1).any():
            raise ContractError("mean must be >= 0 and P0 must lie in [0, 1]")

    @property
    def n_windows(self) -> int:
        return self.mean.shape[0]

    def to_frame(self) -> pd.DataFrame:
        """Long table: window, road, step, time_slot, mean, L, U, P0[, pi, mu, phi, rho][, y_true]."""
        w, n, p = self.mean.shape
        win, road, step = np.meshgrid(np.arange(w), np.arange(n), np.arange(p), indexing="ij")
        frame = pd.DataFrame(
            {
                "window": win.ravel(),
                "road": road.ravel(),
                "step": step.ravel(),
                "time_slot": self.time_slots[win, step].ravel(),
                "mean": self.mean.ravel(),
                "L": self.lower.ravel(),
                "U": self.upper.ravel(),
                "P0": self.p0.ravel(),
            }
        )
        if self.params is not None:
            for k, name in enumerate(FIELD_NAMES):
                frame[name] = self.params[..., k].ravel()
        if self.y_true is not None:
            frame["y_true"] = self.y_true.ravel()
        return frame


def predict_field(
    field: ZitdField,
    time_slots: Sequence[int],
    cfg: IntervalConfig = IntervalConfig(),
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Point estimate (1 - pi) mu, interval (L, U) and P(y = 0) for every cell.

    Returns:
        mean, lower, upper, p0, each (N, p).
    """
    values = field.stacked()
    n, p, _ = values.shape
    if len(time_slots) != p:
        raise ContractError(f"{len(time_slots)} time slots for a horizon of {p}")
    mean = (1.0 - values[..., 0]) * values[..., 1]
    lower, upper, p0 = np.zeros((n, p)), np.zeros((n, p)), np.zeros((n, p))
    for i in range(n):
        for j in range(p):
            z = field.cell(i, j)
            p0[i, j] = zitd_zero_mass(z)
            lower[i, j], upper[i, j] = zitd_interval(
                z, cfg.lower, cfg.upper, cfg.method_for(i, int(time_slots[j]))
            )
    return mean, lower, upper, p0


def _run(network: StzitdNetwork, x: np.ndarray, y_hist: np.ndarray, data: Dataset) -> ZitdField:
    network.eval()
    with no_grad():
        return network(x, y_hist, data.graph).detach()


def predict_windows(
    network: StzitdNetwork,
    data: Dataset,
    windows: Sequence[Window],
    cfg: IntervalConfig = IntervalConfig(),
) -> PredictionSet:
    """
    Predict every window and attach the observed targets.

    Args:
        network: Trained network.
        data: Dataset with features already standardised.
        windows: Windows whose targets lie inside the data.
        cfg: Interval settings.

    Raises:
        DataError: If there are no windows.
    """
    if not windows:
        raise DataError("no windows to predict; the block is too short for history + horizon")
    parts: list[tuple[np.ndarray, ...]] = []
    truths, slots, params = [], [], []
    for w in windows:
        x, y_hist, y_target = data.window_arrays(w)
        field = _run(network, x, y_hist, data)
        parts.append(predict_field(field, w.targets, cfg))
        params.append(field.stacked())
        truths.append(y_target)
        slots.append(np.asarray(w.targets))
    mean, lower, upper, p0 = (np.stack(arrays) for arrays in zip(*parts))
    return PredictionSet(
        mean, lower, upper, p0, np.stack(slots), np.stack(truths), params=np.stack(params)
    )


def forecast(
    network: StzitdNetwork,
    data: Dataset,
    history: int,
    cfg: IntervalConfig = IntervalConfig(),
) -> PredictionSet:
    """
    Forecast the p slots after the end of the data from its last t slots.

    Returns:
        A single-window PredictionSet without ``y_true``.
    """
    t_total = data.n_slots
    if t_total < history:
        raise DataError(f"need at least {history} slots to forecast, got {t_total}")
    inputs = range(t_total - history, t_total)
    targets = range(t_total, t_total + network.horizon)
    x, y_hist, _ = data.window_arrays(Window(inputs, range(t_total, t_total)))
    field = _run(network, x, y_hist, data)
    mean, lower, upper, p0 = predict_field(field, targets, cfg)
    logger.info("forecast for slots %d..%d", targets.start, targets.stop - 1)
    return PredictionSet(
        mean[None],
        lower[None],
        upper[None],
        p0[None],
        np.asarray(targets)[None],
        params=field.stacked()[None],
    )
