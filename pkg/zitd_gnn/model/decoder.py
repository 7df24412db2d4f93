"""
Parameter decoders: the embedding Z is mapped to (pi, mu, phi, rho) per
road and horizon step.
"""

import logging
from dataclasses import dataclass

import numpy as np

from zitd_gnn.constants import EPSILON, MAX_EPSILON, RELU_HEAD_BIAS
from zitd_gnn.core.module import Module, xavier_uniform
from zitd_gnn.core.tensor import Parameter, Tensor, as_tensor, no_grad
from zitd_gnn.distributions.zitd import ZitdParams
from zitd_gnn.errors import ContractError, NonFiniteError, ShapeError

logger = logging.getLogger(__name__)

FIELD_NAMES = ("pi", "mu", "phi", "rho")
RELU_HEADS = ("mu", "phi")


@dataclass(frozen=True)
class EpsilonConfig:
    """Floor added to phi and rho; 0 < epsilon <= 1e-3."""

    epsilon: float = EPSILON

    def __post_init__(self):
        if not 0.0 < self.epsilon <= MAX_EPSILON:
            raise ContractError(f"epsilon must lie in (0, {MAX_EPSILON}], got {self.epsilon}")


class DecoderWeights(Module):
    """
    One F' x p matrix and one p-vector per parameter.

    Matrices are Xavier-initialised. The mu and phi biases start at
    RELU_HEAD_BIAS, the others at zero.
    """

    def __init__(self, width: int, horizon: int, rng: np.random.Generator):
        self.width = width
        self.horizon = horizon
        for name in FIELD_NAMES:
            setattr(self, f"W_{name}", Parameter(xavier_uniform(width, horizon, rng), f"W_{name}"))
            bias = RELU_HEAD_BIAS if name in RELU_HEADS else 0.0
            setattr(self, f"b_{name}", Parameter(np.full(horizon, bias), f"b_{name}"))

    def forward(self, z: Tensor, eps: EpsilonConfig = EpsilonConfig()) -> "ZitdField":
        return decode(z, self, eps)

    def linear(self, z: Tensor, name: str) -> Tensor:
        return z @ getattr(self, f"W_{name}") + getattr(self, f"b_{name}")


@dataclass
class ZitdField:
    """
    The four parameter fields, each an (N, p) tensor.

    ``rho`` is already clamped to [1 + eps, 2 - eps].
    """

    pi: Tensor
    mu: Tensor
    phi: Tensor
    rho: Tensor

    @property
    def shape(self) -> tuple[int, int]:
        return self.pi.shape

    def stacked(self) -> np.ndarray:
        """Values as an (N, p, 4) array in (pi, mu, phi, rho) order."""
        return np.stack([getattr(self, n).values for n in FIELD_NAMES], axis=-1)

    def cell(self, road: int, step: int) -> ZitdParams:
        return ZitdParams.of(*(float(getattr(self, n).values[road, step]) for n in FIELD_NAMES))

    def detach(self) -> "ZitdField":
        return ZitdField(*(getattr(self, n).detach() for n in FIELD_NAMES))

    def check_finite(self) -> None:
        """
        Raises:
            NonFiniteError: Naming the parameter and the (road, step) cell.
        """
        for name in FIELD_NAMES:
            values = getattr(self, name).values
            bad = np.argwhere(~np.isfinite(values))
            if len(bad):
                road, step = (int(i) for i in bad[0])
                raise NonFiniteError(f"decode.{name}", (road, step), float(values[road, step]))


def decode(z, w: DecoderWeights, eps: EpsilonConfig = EpsilonConfig()) -> ZitdField:
    """
    Decode the embedding into ZITD parameters.

    pi = sigmoid(Z W_pi + b_pi), mu = ReLU(Z W_mu + b_mu),
    phi = ReLU(Z W_phi + b_phi) + eps, rho = sigmoid(Z W_rho + b_rho) + 1 + eps,
    with rho then clamped to [1 + eps, 2 - eps].

    Args:
        z: Embedding, (N, F').
        w: Decoder weights.
        eps: Floor configuration.

    Returns:
        The parameter field, (N, p) per parameter.

    Raises:
        ShapeError: If Z's width differs from the decoder's.
        NonFiniteError: If a parameter is NaN or infinite.
    """
    z = as_tensor(z)
    if z.ndim != 2 or z.shape[1] != w.width:
        raise ShapeError("decode", z.shape, (w.width, w.horizon))
    e = eps.epsilon
    pi = w.linear(z, "pi").sigmoid()
    mu = w.linear(z, "mu").relu()
    phi = w.linear(z, "phi").relu() + e
    raw_rho = w.linear(z, "rho").sigmoid() + (1.0 + e)
    rho = raw_rho.clip(1.0 + e, 2.0 - e)

    clamped = int(np.count_nonzero(raw_rho.values > 2.0 - e))
    if clamped:
        logger.debug("rho clamped to 2 - eps in %d of %d cells", clamped, raw_rho.size)

    field = ZitdField(pi, mu, phi, rho)
    field.check_finite()
    return field


def decode_values(z, w: DecoderWeights, eps: EpsilonConfig = EpsilonConfig()) -> ZitdField:
    """``decode`` without recording a graph."""
    with no_grad():
        return decode(z, w, eps).detach()
