"""Historical-average baseline."""

import numpy as np

from zitd_gnn.data.risk import RiskTensor
from zitd_gnn.errors import ContractError


def ha_baseline(train: RiskTensor | np.ndarray, horizon: int) -> np.ndarray:
    """
    Predict each road's training-period mean risk at every horizon step.

    Args:
        train: Risk over the training block, (N, T_train).
        horizon: p.

    Returns:
        An (N, p) array, constant along the step axis.
    """
    values = train.values if isinstance(train, RiskTensor) else np.asarray(train, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] == 0:
        raise ContractError(f"training block must be a nonempty (N, T) array, got {values.shape}")
    if horizon < 1:
        raise ContractError("horizon must be positive")
    return np.repeat(values.mean(axis=1, keepdims=True), horizon, axis=1)
