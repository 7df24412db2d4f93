"""
Training loop: full-graph windows, Adam, validation NLL, early stopping.

One epoch visits every training window once in a seeded order. Each step
encodes the window's history for all roads, decodes the horizon, and
minimises the summed NLL lower bound. After each epoch the mean per-cell
NLL over the validation windows decides the best checkpoint and early
stopping.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from zitd_gnn.constants import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPS,
    DEFAULT_SEED,
    EPOCHS,
    GRAD_CLIP_NORM,
    LEARNING_RATE,
    PATIENCE,
    WEIGHT_DECAY,
)
from zitd_gnn.core.tensor import backward, no_grad
from zitd_gnn.data.dataset import Dataset
from zitd_gnn.data.windows import DatasetSplit, Window, WindowConfig, split_windows
from zitd_gnn.errors import ContractError, DataError, DivergenceError, NumericError
from zitd_gnn.model.network import StzitdNetwork
from zitd_gnn.training.checkpoint import Checkpoint
from zitd_gnn.training.loss import LossConfig, total_loss
from zitd_gnn.training.optim import AdamState, adam_step, clip_grad_norm

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """
    Optimiser and schedule settings.

    ``grad_clip_norm`` of None disables clipping.
    """

    learning_rate: float = LEARNING_RATE
    weight_decay: float = WEIGHT_DECAY
    epochs: int = EPOCHS
    patience: int = PATIENCE
    seed: int = DEFAULT_SEED
    grad_clip_norm: float | None = GRAD_CLIP_NORM
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    adam_eps: float = ADAM_EPS
    batch_strategy: str = "full-window"

    def __post_init__(self):
        if not self.learning_rate > 0.0:
            raise ContractError("learning_rate must be positive")
        if self.weight_decay < 0.0:
            raise ContractError("weight_decay must be >= 0")
        if self.epochs < 1:
            raise ContractError("epochs must be at least 1")
        if not 0 <= self.patience <= self.epochs:
            raise ContractError("patience must lie in [0, epochs]")
        if self.grad_clip_norm is not None and not self.grad_clip_norm > 0.0:
            raise ContractError("grad_clip_norm must be positive or None")
        if self.batch_strategy != "full-window":
            raise ContractError(f"unsupported batch strategy {self.batch_strategy!r}")


class StopDecision(Enum):
    CONTINUE = "continue"
    STOP = "stop"


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    validation_loss: float


@dataclass
class TrainResult:
    best: Checkpoint
    history: list[EpochRecord] = field(default_factory=list)
    stopped_early: bool = False


def early_stop_check(history: Sequence[float], patience: int) -> StopDecision:
    """
    Stop iff the best validation loss occurred more than ``patience`` epochs ago.

    Ties keep the earliest occurrence, so a flat history counts as no
    improvement.
    """
    if not history:
        raise ContractError("early_stop_check needs a nonempty history")
    best = int(np.argmin(np.asarray(history, dtype=np.float64)))
    since = len(history) - 1 - best
    return StopDecision.STOP if since > patience else StopDecision.CONTINUE


def _assert_no_leak(split: DatasetSplit, windows: dict[str, list[Window]]) -> None:
    for block in ("train", "validation"):
        own = getattr(split, block)
        for w in windows[block]:
            if w.targets.start < own.start or w.targets.stop > own.stop:
                raise ContractError(f"{block} window {w} has targets outside its block")
            if w.inputs.stop > split.test.start:
                raise ContractError(f"{block} window {w} reads test slots")


def evaluate_windows(
    network: StzitdNetwork,
    data: Dataset,
    windows: Sequence[Window],
    loss_cfg: LossConfig,
) -> float:
    """Mean per-cell NLL (lower-bound objective, no regulariser) over windows."""
    if not windows:
        return math.nan
    network.eval()
    losses = []
    with no_grad():
        for w in windows:
            x, y_hist, y_target = data.window_arrays(w)
            field_ = network(x, y_hist, data.graph)
            losses.append(total_loss(y_target, field_, (), loss_cfg, reduction="mean").item())
    return float(np.mean(losses))


def train_loop(
    dataset: Dataset,
    split: DatasetSplit,
    network: StzitdNetwork,
    window_cfg: WindowConfig = WindowConfig(),
    train_cfg: TrainConfig = TrainConfig(),
    loss_cfg: LossConfig = LossConfig(),
    config_hash: str = "",
) -> TrainResult:
    """
    Train ``network`` in place and return the best checkpoint.

    Features are standardised on the training block first. The run is a
    pure function of the network's initial state, the data and the configs.

    Args:
        dataset: Graph, features and risk.
        split: Chronological blocks.
        network: Freshly initialised network.
        window_cfg: History and horizon lengths.
        train_cfg: Optimiser and schedule.
        loss_cfg: Loss settings.
        config_hash: Stored in checkpoints.

    Returns:
        The best checkpoint by validation loss and the per-epoch history.

    Raises:
        DataError: If the training block yields no windows.
        DivergenceError: If a loss or gradient becomes non-finite; carries
            the last good checkpoint.
    """
    if window_cfg.horizon != network.horizon:
        raise ContractError(f"network horizon {network.horizon} != window horizon {window_cfg.horizon}")
    data = dataset.standardized(split)
    windows = split_windows(split, window_cfg)
    if not windows["train"]:
        raise DataError(
            f"training block of {len(split.train)} slots is too short for "
            f"history {window_cfg.history} + horizon {window_cfg.horizon}"
        )
    _assert_no_leak(split, windows)
    select_on = windows["validation"] or windows["train"]
    if not windows["validation"]:
        logger.warning("no validation windows; selecting checkpoints on training loss")

    rng = np.random.default_rng(train_cfg.seed)
    params = network.parameters()
    adam = AdamState()
    history: list[EpochRecord] = []
    best: Checkpoint | None = None
    stopped_early = False

    for epoch in range(1, train_cfg.epochs + 1):
        network.train()
        order = rng.permutation(len(windows["train"]))
        step_losses = []
        for k in order:
            w = windows["train"][k]
            x, y_hist, y_target = data.window_arrays(w)
            try:
                field_ = network(x, y_hist, data.graph, rng)
                loss = total_loss(y_target, field_, params, loss_cfg)
                network.zero_grad()
                backward(loss)
                grads = [p.grad for p in params]
                if train_cfg.grad_clip_norm is not None:
                    grads, norm = clip_grad_norm(grads, train_cfg.grad_clip_norm)
                    if norm > train_cfg.grad_clip_norm:
                        logger.debug("gradient norm %.3g clipped", norm)
                adam_step(params, grads, adam, train_cfg)
            except NumericError as exc:
                logger.error("epoch %d diverged on window %s: %s", epoch, w, exc)
                raise DivergenceError(f"training diverged in epoch {epoch}: {exc}", best, history) from exc
            step_losses.append(loss.item() / y_target.size)

        train_loss = float(np.mean(step_losses))
        validation_loss = evaluate_windows(network, data, select_on, loss_cfg)
        if not math.isfinite(validation_loss):
            raise DivergenceError(f"validation loss is {validation_loss} in epoch {epoch}", best, history)
        history.append(EpochRecord(epoch, train_loss, validation_loss))
        logger.info("epoch %d: train %.6f, validation %.6f", epoch, train_loss, validation_loss)

        if best is None or validation_loss < best.validation_loss:
            best = Checkpoint.capture(network, adam, epoch, validation_loss, config_hash)

        decision = early_stop_check([r.validation_loss for r in history], train_cfg.patience)
        if decision is StopDecision.STOP and epoch < train_cfg.epochs:
            logger.info("early stop after epoch %d (best epoch %d)", epoch, best.epoch)
            stopped_early = True
            break

    return TrainResult(best, history, stopped_early)
