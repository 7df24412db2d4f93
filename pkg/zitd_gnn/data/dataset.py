"""
A loaded or generated dataset: graph, features and risk scores.
"""

from dataclasses import dataclass, replace

import numpy as np

from zitd_gnn.data.graph import RoadGraph
from zitd_gnn.data.risk import FeatureTensor, RiskTensor, standardize
from zitd_gnn.data.windows import DatasetSplit, Window
from zitd_gnn.errors import DataError


@dataclass(frozen=True)
class Dataset:
    """Graph, features X (N, T, d) and risk Y (N, T) over the same roads and slots."""

    graph: RoadGraph
    features: FeatureTensor
    risk: RiskTensor

    def __post_init__(self):
        n, t = self.risk.values.shape
        if self.features.values.shape[:2] != (n, t):
            raise DataError(
                f"features cover {self.features.values.shape[:2]} but risk covers {(n, t)}"
            )
        if self.graph.n_roads != n:
            raise DataError(f"graph has {self.graph.n_roads} roads but data has {n}")

    @property
    def n_roads(self) -> int:
        return self.risk.n_roads

    @property
    def n_slots(self) -> int:
        return self.risk.n_slots

    @property
    def n_features(self) -> int:
        return self.features.n_features

    def standardized(self, split: DatasetSplit) -> "Dataset":
        """Return a copy with features z-scored on the training block."""
        return replace(self, features=standardize(self.features, split.train))

    def window_arrays(self, window: Window) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Slice one window.

        Returns:
            X history (N, t, d), Y history (N, t), Y targets (N, p).
        """
        s, e = window.inputs.start, window.inputs.stop
        ts, te = window.targets.start, window.targets.stop
        return (
            self.features.values[:, s:e, :],
            self.risk.values[:, s:e],
            self.risk.values[:, ts:te],
        )
