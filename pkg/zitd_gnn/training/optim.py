"""
Adam with decoupled weight decay, plus global-norm gradient clipping.
"""

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from zitd_gnn.core.tensor import Parameter
from zitd_gnn.errors import ContractError, NonFiniteGradientError

if TYPE_CHECKING:
    from zitd_gnn.training.trainer import TrainConfig


@dataclass
class AdamState:
    """First and second moments keyed by parameter name, plus the step count."""

    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "m": {k: a.tolist() for k, a in self.m.items()},
            "v": {k: a.tolist() for k, a in self.v.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AdamState":
        return cls(
            m={k: np.asarray(a, dtype=np.float64) for k, a in data["m"].items()},
            v={k: np.asarray(a, dtype=np.float64) for k, a in data["v"].items()},
            step=int(data["step"]),
        )


def check_gradients(params: Sequence[Parameter], grads: Sequence[np.ndarray]) -> None:
    """
    Raises:
        NonFiniteGradientError: Naming the first offending parameter entry.
    """
    for p, g in zip(params, grads):
        bad = np.argwhere(~np.isfinite(g))
        if len(bad):
            raise NonFiniteGradientError(p.name or "?", tuple(int(i) for i in bad[0]))


def clip_grad_norm(grads: Sequence[np.ndarray], max_norm: float) -> tuple[list[np.ndarray], float]:
    """
    Scale gradients so their joint L2 norm is at most ``max_norm``.

    Returns:
        The (possibly scaled) gradients and the norm before clipping.
    """
    norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads))
    if norm <= max_norm or norm == 0.0:
        return list(grads), norm
    scale = max_norm / norm
    return [g * scale for g in grads], norm


def adam_step(
    params: Sequence[Parameter],
    grads: Sequence[np.ndarray],
    state: AdamState,
    cfg: "TrainConfig",
) -> AdamState:
    """
    One bias-corrected Adam update, in place.

    Parameters are first multiplied by (1 - lr * weight_decay), then moved
    by -lr * m_hat / (sqrt(v_hat) + eps).

    Raises:
        ContractError: If params and grads differ in length or shape.
        NonFiniteGradientError: Before any parameter is touched.
    """
    if len(params) != len(grads):
        raise ContractError(f"{len(params)} parameters but {len(grads)} gradients")
    check_gradients(params, grads)

    state.step += 1
    t = state.step
    b1, b2 = cfg.beta1, cfg.beta2
    lr = cfg.learning_rate
    for p, g in zip(params, grads):
        if g.shape != p.shape:
            raise ContractError(f"gradient for {p.name} has shape {g.shape}, expected {p.shape}")
        m = state.m.get(p.name, np.zeros_like(p.values))
        v = state.v.get(p.name, np.zeros_like(p.values))
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        state.m[p.name], state.v[p.name] = m, v
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        if cfg.weight_decay:
            p.values *= 1.0 - lr * cfg.weight_decay
        p.values -= lr * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)
    return state
