"""Loss, optimiser, training loop, checkpoints and the HA baseline."""

from zitd_gnn.training.baseline import ha_baseline
from zitd_gnn.training.checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from zitd_gnn.training.loss import (
    LossConfig,
    exact_nll_field,
    nll_positive_lower_bound,
    nll_zero,
    positive_branch,
    regularization,
    total_loss,
    zero_branch,
)
from zitd_gnn.training.optim import AdamState, adam_step, check_gradients, clip_grad_norm
from zitd_gnn.training.trainer import (
    EpochRecord,
    StopDecision,
    TrainConfig,
    TrainResult,
    early_stop_check,
    evaluate_windows,
    train_loop,
)

__all__ = [
    "LossConfig",
    "nll_positive_lower_bound",
    "nll_zero",
    "positive_branch",
    "zero_branch",
    "regularization",
    "total_loss",
    "exact_nll_field",
    "AdamState",
    "adam_step",
    "check_gradients",
    "clip_grad_norm",
    "TrainConfig",
    "StopDecision",
    "EpochRecord",
    "TrainResult",
    "early_stop_check",
    "evaluate_windows",
    "train_loop",
    "Checkpoint",
    "save_checkpoint",
    "load_checkpoint",
    "ha_baseline",
]
