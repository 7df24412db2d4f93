"""
Spatial encoder: multi-head graph attention over the road graph.

Neighbourhoods always include the road itself, so isolated roads attend
to themselves with weight one.
"""

from typing import Literal

import numpy as np

from zitd_gnn.constants import LEAKY_SLOPE
from zitd_gnn.core.module import Module, xavier_uniform
from zitd_gnn.core.tensor import Parameter, Tensor, as_tensor, concat, masked_softmax
from zitd_gnn.data.graph import RoadGraph
from zitd_gnn.errors import ContractError, ShapeError

Mode = Literal["concat", "average"]


class GatHead(Module):
    """Projection W_a (F_in x F') and attention vector a (2F' x 1) of one head."""

    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        self.out_dim = out_dim
        self.W_a = Parameter(xavier_uniform(in_dim, out_dim, rng), "W_a")
        self.attention = Parameter(xavier_uniform(2 * out_dim, 1, rng), "attention")

    def forward(self, z: Tensor, graph: RoadGraph, slope: float = LEAKY_SLOPE) -> Tensor:
        return gat_attention(z, graph, self, slope)


class GatLayer(Module):
    """M heads combined by concatenation or by averaging."""

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        n_heads: int,
        mode: Mode,
        rng: np.random.Generator,
        slope: float = LEAKY_SLOPE,
    ):
        if mode not in ("concat", "average"):
            raise ContractError(f"unknown GAT mode {mode!r}")
        self.mode = mode
        self.slope = slope
        self.in_dim = in_dim
        self.heads = [GatHead(in_dim, out_dim, rng) for _ in range(n_heads)]

    @property
    def out_width(self) -> int:
        width = self.heads[0].out_dim
        return width * len(self.heads) if self.mode == "concat" else width

    def forward(self, z: Tensor, graph: RoadGraph) -> Tensor:
        return gat_layer(z, graph, self, self.mode)


class GatWeights(Module):
    """
    Two attention layers: F -> M*F' (concat), then M*F' -> F' (average).
    """

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        n_heads: int,
        rng: np.random.Generator,
        slope: float = LEAKY_SLOPE,
    ):
        first = GatLayer(in_dim, out_dim, n_heads, "concat", rng, slope)
        second = GatLayer(first.out_width, out_dim, n_heads, "average", rng, slope)
        self.layers = [first, second]

    def forward(self, z: Tensor, graph: RoadGraph) -> Tensor:
        for layer in self.layers:
            z = layer(z, graph)
        return z


def _project(z: Tensor, head: GatHead, graph: RoadGraph, slope: float) -> tuple[Tensor, Tensor]:
    if z.ndim != 2 or z.shape[1] != head.W_a.shape[0]:
        raise ShapeError("gat", z.shape, head.W_a.shape)
    if z.shape[0] != graph.n_roads:
        raise ShapeError("gat", z.shape, (graph.n_roads, graph.n_roads))
    projected = z @ head.W_a
    f = head.out_dim
    source = projected @ head.attention[:f]
    target = projected @ head.attention[f:]
    scores = (source + target.T).leaky_relu(slope)
    return masked_softmax(scores, graph.neighbourhood_mask(), axis=1), projected


def gat_attention(z, graph: RoadGraph, head: GatHead, slope: float = LEAKY_SLOPE) -> Tensor:
    """
    Attention coefficients alpha_ij for one head.

    alpha_ij = softmax_j over N(i) of LeakyReLU(a^T [W_a z_i || W_a z_j]),
    with N(i) = {j : A_ij = 1} plus i.

    Returns:
        An (N, N) matrix; rows sum to one, entries outside N(i) are zero.
    """
    alpha, _ = _project(as_tensor(z), head, graph, slope)
    return alpha


def gat_layer(z, graph: RoadGraph, layer: GatLayer, mode: Mode | None = None) -> Tensor:
    """
    Apply one multi-head attention layer.

    concat: z_i = ||_m sigmoid(sum_j alpha^m_ij W^m z_j), width M*F'.
    average: z_i = sigmoid(mean_m sum_j alpha^m_ij W^m z_j), width F'.
    """
    mode = mode or layer.mode
    z = as_tensor(z)
    messages = []
    for head in layer.heads:
        alpha, projected = _project(z, head, graph, layer.slope)
        messages.append(alpha @ projected)
    if mode == "concat":
        return concat([m.sigmoid() for m in messages], axis=1)
    if mode == "average":
        total = messages[0]
        for m in messages[1:]:
            total = total + m
        return (total * (1.0 / len(messages))).sigmoid()
    raise ContractError(f"unknown GAT mode {mode!r}")
