"""
Temporal encoder: a GRU run independently along each road's history.
"""

import numpy as np

from zitd_gnn.core.module import Module, xavier_uniform
from zitd_gnn.core.tensor import Parameter, Tensor, as_tensor, concat
from zitd_gnn.errors import ContractError, ShapeError


class GruWeights(Module):
    """
    Gate weights mapping [h_{t-1}, X_t, Y_t] (width F + d + 1) to F.

    Args:
        n_features: d.
        hidden: F.
        rng: Generator for Xavier initialisation; biases start at zero.
    """

    def __init__(self, n_features: int, hidden: int, rng: np.random.Generator):
        in_dim = hidden + n_features + 1
        self.n_features = n_features
        self.hidden = hidden
        self.W_r = Parameter(xavier_uniform(in_dim, hidden, rng), "W_r")
        self.W_u = Parameter(xavier_uniform(in_dim, hidden, rng), "W_u")
        self.W_c = Parameter(xavier_uniform(in_dim, hidden, rng), "W_c")
        self.b_r = Parameter(np.zeros(hidden), "b_r")
        self.b_u = Parameter(np.zeros(hidden), "b_u")
        self.b_c = Parameter(np.zeros(hidden), "b_c")

    def forward(self, x_window, y_window) -> Tensor:
        return gru_encode(x_window, y_window, self)


def gru_cell(x_t, y_t, h_prev, w: GruWeights) -> Tensor:
    """
    One GRU step for a batch of roads.

    r = sigmoid([h, x, y] W_r + b_r), u = sigmoid([h, x, y] W_u + b_u),
    h~ = tanh([r * h, x, y] W_c + b_c), h' = (1 - u) * h + u * h~.

    Args:
        x_t: Features, (N, d) or a single d-vector.
        y_t: Risk, (N,) / (N, 1) or a scalar.
        h_prev: Previous hidden state, (N, F) or an F-vector.
        w: Gate weights.

    Returns:
        The new hidden state with the same leading shape as ``h_prev``.
    """
    x_t, y_t, h_prev = as_tensor(x_t), as_tensor(y_t), as_tensor(h_prev)
    single = h_prev.ndim == 1
    if single:
        x_t = x_t.reshape(1, -1)
        y_t = y_t.reshape(1, 1)
        h_prev = h_prev.reshape(1, -1)
    elif y_t.ndim == 1:
        y_t = y_t.reshape(-1, 1)
    if x_t.shape[1] != w.n_features or h_prev.shape[1] != w.hidden:
        raise ShapeError("gru_cell", x_t.shape, h_prev.shape, w.W_r.shape)
    if not (x_t.shape[0] == y_t.shape[0] == h_prev.shape[0]):
        raise ShapeError("gru_cell", x_t.shape, y_t.shape, h_prev.shape)

    joint = concat([h_prev, x_t, y_t], axis=1)
    reset = (joint @ w.W_r + w.b_r).sigmoid()
    update = (joint @ w.W_u + w.b_u).sigmoid()
    candidate = (concat([reset * h_prev, x_t, y_t], axis=1) @ w.W_c + w.b_c).tanh()
    h = (1.0 - update) * h_prev + update * candidate
    return h.reshape(-1) if single else h


def gru_encode(x_window, y_window, w: GruWeights) -> Tensor:
    """
    Run the GRU over t slots from h_0 = 0 and return the last state Z_T.

    Args:
        x_window: Features, (N, t, d).
        y_window: Risk scores, (N, t).
        w: Gate weights.

    Returns:
        Z_T of shape (N, F).
    """
    x = np.asarray(x_window.values if isinstance(x_window, Tensor) else x_window, dtype=np.float64)
    y = np.asarray(y_window.values if isinstance(y_window, Tensor) else y_window, dtype=np.float64)
    if x.ndim != 3 or y.shape != x.shape[:2]:
        raise ShapeError("gru_encode", x.shape, y.shape)
    n_roads, steps, _ = x.shape
    if steps == 0:
        raise ContractError("gru_encode needs a nonempty window")
    h = Tensor(np.zeros((n_roads, w.hidden)))
    for s in range(steps):
        h = gru_cell(x[:, s, :], y[:, s:s + 1], h, w)
    return h
