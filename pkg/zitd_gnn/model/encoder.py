"""
Spatiotemporal encoder: GRU over each road's history, then two GAT layers.
"""

from dataclasses import dataclass

import numpy as np

from zitd_gnn.constants import (
    DEFAULT_HEADS,
    DEFAULT_HIDDEN,
    DEFAULT_SPATIAL_HIDDEN,
    LEAKY_SLOPE,
)
from zitd_gnn.core.module import Module
from zitd_gnn.core.tensor import Tensor
from zitd_gnn.data.graph import RoadGraph
from zitd_gnn.errors import ContractError, ShapeError
from zitd_gnn.model.gat import GatWeights, gat_layer
from zitd_gnn.model.gru import GruWeights, gru_encode


@dataclass(frozen=True)
class EncoderConfig:
    """
    Encoder sizes.

    Attributes:
        hidden: F, the GRU width.
        spatial_hidden: F', the GAT head width.
        heads: M, attention heads per layer.
        leaky_slope: Negative slope inside the attention scores.
        dropout: Drop probability between the GAT layers in training mode.
    """

    hidden: int = DEFAULT_HIDDEN
    spatial_hidden: int = DEFAULT_SPATIAL_HIDDEN
    heads: int = DEFAULT_HEADS
    leaky_slope: float = LEAKY_SLOPE
    dropout: float = 0.0

    def __post_init__(self):
        if min(self.hidden, self.spatial_hidden, self.heads) < 1:
            raise ContractError("hidden, spatial_hidden and heads must be positive")
        if not self.leaky_slope > 0.0:
            raise ContractError("leaky_slope must be positive")
        if not 0.0 <= self.dropout < 1.0:
            raise ContractError("dropout must lie in [0, 1)")


class StEncoder(Module):
    """GRU weights plus the two-layer GAT stack."""

    def __init__(self, n_features: int, config: EncoderConfig, rng: np.random.Generator):
        self.config = config
        self.gru = GruWeights(n_features, config.hidden, rng)
        self.gat = GatWeights(
            config.hidden, config.spatial_hidden, config.heads, rng, config.leaky_slope
        )

    def forward(
        self,
        x_window,
        y_window,
        graph: RoadGraph,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        return encode(x_window, y_window, graph, self, self.config, rng)


def _dropout(z: Tensor, rate: float, rng: np.random.Generator) -> Tensor:
    keep = (rng.random(z.shape) >= rate).astype(np.float64)
    return z * (keep / (1.0 - rate))


def encode(
    x_window,
    y_window,
    graph: RoadGraph,
    weights: StEncoder,
    config: EncoderConfig,
    rng: np.random.Generator | None = None,
) -> Tensor:
    """
    Z = gat_layer(average, gat_layer(concat, gru_encode(X, Y))).

    Args:
        x_window: Features, (N, t, d).
        y_window: Risk history, (N, t).
        graph: Road graph with N roads.
        weights: Encoder weights.
        config: Encoder sizes and dropout.
        rng: Source of dropout masks; dropout is skipped without one or
            outside training mode.

    Returns:
        The spatiotemporal embedding, (N, F').
    """
    temporal = gru_encode(x_window, y_window, weights.gru)
    if temporal.shape[0] != graph.n_roads:
        raise ShapeError("encode", temporal.shape, (graph.n_roads,))
    first, second = weights.gat.layers
    z = gat_layer(temporal, graph, first, "concat")
    if config.dropout > 0.0 and weights.training and rng is not None:
        z = _dropout(z, config.dropout, rng)
    return gat_layer(z, graph, second, "average")
