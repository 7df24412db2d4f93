"""
Crash records, the risk-score tensor Y and the feature tensor X.
"""

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from zitd_gnn.constants import SEVERITY_WEIGHTS
from zitd_gnn.errors import DataError


@dataclass(frozen=True)
class CrashRecord:
    """Crash counts by severity (minor, serious, fatal) on one road in one slot."""

    road: int
    time: int
    counts: tuple[int, int, int]

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise DataError(f"negative crash count in {self}")


@dataclass(frozen=True)
class ScoreRecord:
    """A precomputed risk score for one road and slot."""

    road: int
    time: int
    score: float


@dataclass(frozen=True)
class RiskTensor:
    """Nonnegative risk scores, shape (N, T)."""

    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2:
            raise DataError(f"risk tensor must be 2-D, got shape {self.values.shape}")
        if (self.values < 0).any() or not np.isfinite(self.values).all():
            raise DataError("risk scores must be finite and nonnegative")

    @property
    def n_roads(self) -> int:
        return self.values.shape[0]

    @property
    def n_slots(self) -> int:
        return self.values.shape[1]

    def zero_fraction(self) -> float:
        return float(np.mean(self.values == 0.0))


@dataclass(frozen=True)
class FeatureTensor:
    """
    Road features X of shape (N, T, d).

    ``mean`` and ``std`` are the per-feature standardisation statistics when
    the tensor has been standardised, otherwise None.
    """

    values: np.ndarray
    mean: np.ndarray | None = field(default=None)
    std: np.ndarray | None = field(default=None)

    def __post_init__(self):
        if self.values.ndim != 3:
            raise DataError(f"feature tensor must be 3-D, got shape {self.values.shape}")
        if not np.isfinite(self.values).all():
            raise DataError("features must be finite")

    @property
    def n_features(self) -> int:
        return self.values.shape[2]


def _check_cell(record, n_roads: int, n_slots: int) -> None:
    if not (0 <= record.road < n_roads and 0 <= record.time < n_slots):
        raise DataError(f"record {record} lies outside {n_roads} roads x {n_slots} slots")


def compute_risk_scores(
    records: Iterable[CrashRecord],
    weights: Sequence[float] = SEVERITY_WEIGHTS,
    n_roads: int = 0,
    n_slots: int = 0,
) -> RiskTensor:
    """
    Severity-weighted crash risk y_it = sum_l count_l * weight_l.

    Args:
        records: Crash records; several records for one cell accumulate.
        weights: Weights for (minor, serious, fatal).
        n_roads: N.
        n_slots: T.

    Raises:
        DataError: If a record falls outside the N x T grid.
    """
    if len(weights) != 3:
        raise DataError(f"expected three severity weights, got {len(weights)}")
    values = np.zeros((n_roads, n_slots))
    w = np.asarray(weights, dtype=np.float64)
    for record in records:
        _check_cell(record, n_roads, n_slots)
        values[record.road, record.time] += float(np.dot(record.counts, w))
    return RiskTensor(values)


def risk_from_scores(records: Iterable[ScoreRecord], n_roads: int, n_slots: int) -> RiskTensor:
    """Place precomputed scores on the grid, summing repeats."""
    values = np.zeros((n_roads, n_slots))
    for record in records:
        _check_cell(record, n_roads, n_slots)
        if record.score < 0:
            raise DataError(f"negative risk score in {record}")
        values[record.road, record.time] += record.score
    return RiskTensor(values)


def standardize(features: FeatureTensor, train_slots: range) -> FeatureTensor:
    """
    z-score every feature with statistics from the training slots only.

    Constant features get unit scale so they map to zero.
    """
    block = features.values[:, train_slots.start:train_slots.stop, :]
    mean = block.mean(axis=(0, 1))
    std = block.std(axis=(0, 1))
    std = np.where(std > 0, std, 1.0)
    return FeatureTensor((features.values - mean) / std, mean=mean, std=std)
