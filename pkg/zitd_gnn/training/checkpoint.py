"""
Versioned JSON checkpoints of the network state.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from zitd_gnn.constants import CHECKPOINT_FORMAT_VERSION
from zitd_gnn.errors import DataError
from zitd_gnn.model.network import StzitdNetwork
from zitd_gnn.training.optim import AdamState

logger = logging.getLogger(__name__)


@dataclass
class Checkpoint:
    """
    A snapshot of every named parameter plus the optimiser state.

    Attributes:
        model: Architecture description from ``StzitdNetwork.describe``.
        state: Parameter values keyed by dotted name.
        adam: Optimiser moments at the snapshot.
        epoch: 1-based epoch the snapshot was taken after.
        validation_loss: Validation NLL at that epoch.
        config_hash: Hash of the resolved run configuration.
    """

    model: dict
    state: dict[str, np.ndarray]
    adam: AdamState = field(default_factory=AdamState)
    epoch: int = 0
    validation_loss: float = math.inf
    config_hash: str = ""

    @classmethod
    def capture(
        cls,
        network: StzitdNetwork,
        adam: AdamState,
        epoch: int,
        validation_loss: float,
        config_hash: str = "",
    ) -> "Checkpoint":
        return cls(
            model=network.describe(),
            state=network.state_dict(),
            adam=AdamState.from_dict(adam.to_dict()),
            epoch=epoch,
            validation_loss=validation_loss,
            config_hash=config_hash,
        )

    def restore(self) -> StzitdNetwork:
        """Build a network with this architecture and load the weights."""
        network = StzitdNetwork.from_description(self.model)
        network.load_state_dict(self.state)
        return network.eval()


def save_checkpoint(checkpoint: Checkpoint, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "config_hash": checkpoint.config_hash,
        "epoch": checkpoint.epoch,
        "validation_loss": checkpoint.validation_loss,
        "model": checkpoint.model,
        "parameters": {name: values.tolist() for name, values in checkpoint.state.items()},
        "adam": checkpoint.adam.to_dict(),
    }
    path.write_text(json.dumps(payload))
    logger.info("checkpoint (epoch %d) written to %s", checkpoint.epoch, path)
    return path


def load_checkpoint(path: str | Path) -> Checkpoint:
    """
    Read a checkpoint written by ``save_checkpoint``.

    Raises:
        DataError: If the file is missing, unreadable or of another format version.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"checkpoint not found: {path}")
    try:
        payload = json.loads(path.read_text())
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot parse checkpoint {path}: {exc}") from None
    version = payload.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise DataError(f"checkpoint format {version} is not supported (expected {CHECKPOINT_FORMAT_VERSION})")
    try:
        return Checkpoint(
            model=payload["model"],
            state={k: np.asarray(v, dtype=np.float64) for k, v in payload["parameters"].items()},
            adam=AdamState.from_dict(payload["adam"]),
            epoch=int(payload["epoch"]),
            validation_loss=float(payload["validation_loss"]),
            config_hash=str(payload.get("config_hash", "")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"checkpoint {path} is incomplete: {exc}") from None
