"""
Chronological train/validation/test split and sliding windows.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from zitd_gnn.constants import (
    DEFAULT_HISTORY,
    DEFAULT_HORIZON,
    MIN_SERIES_LENGTH,
    SPLIT_RATIO,
)
from zitd_gnn.errors import ContractError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DatasetSplit:
    """Contiguous, ordered, disjoint slot ranges."""

    train: range
    validation: range
    test: range

    def block_of(self, slot: int) -> str:
        for name in ("train", "validation", "test"):
            if slot in getattr(self, name):
                return name
        raise ContractError(f"slot {slot} is not covered by the split")


class Window(NamedTuple):
    """Input slots [s, s+t) and target slots [s+t, s+t+p)."""

    inputs: range
    targets: range


def temporal_split(n_slots: int, ratio: Sequence[int] = SPLIT_RATIO) -> DatasetSplit:
    """
    Split T slots into chronological blocks in the given ratio.

    The first two blocks get floor(r_k T / sum(r)) slots; the test block
    takes the remainder. T=365 with 8:2:2 gives (243, 60, 62).

    Raises:
        ContractError: If T < 12 or the ratio is not three positive parts.
    """
    if n_slots < MIN_SERIES_LENGTH:
        raise ContractError(f"need at least {MIN_SERIES_LENGTH} slots, got {n_slots}")
    if len(ratio) != 3 or any(r <= 0 for r in ratio):
        raise ContractError(f"ratio must be three positive parts, got {ratio}")
    total = sum(ratio)
    n_train = (ratio[0] * n_slots) // total
    n_val = (ratio[1] * n_slots) // total
    return DatasetSplit(
        train=range(0, n_train),
        validation=range(n_train, n_train + n_val),
        test=range(n_train + n_val, n_slots),
    )


def make_windows(
    time_range: range,
    history_len: int,
    horizon: int,
    lookback_start: int | None = None,
) -> list[Window]:
    """
    Slide a (history, horizon) window over a slot range with step 1.

    Targets always stay inside ``time_range``. By default inputs do too,
    giving len(range) - t - p + 1 windows. With ``lookback_start`` the input
    history may begin as early as that slot, so a short block can still be
    forecast from the slots that precede it.

    Args:
        time_range: Contiguous slot range.
        history_len: t, input length.
        horizon: p, target length.
        lookback_start: Earliest slot inputs may use; must not exceed
            ``time_range.start``.

    Returns:
        Windows in chronological order; empty (with a warning) when the
        range is too short.
    """
    if history_len < 1 or horizon < 1:
        raise ContractError("history_len and horizon must be positive")
    if lookback_start is None:
        first = time_range.start
    else:
        if lookback_start > time_range.start:
            raise ContractError("lookback_start must not lie after the range start")
        first = max(lookback_start, time_range.start - history_len)
    last = time_range.stop - history_len - horizon
    if last < first:
        logger.warning(
            "range %s is too short for history %d + horizon %d; no windows",
            time_range, history_len, horizon,
        )
        return []
    return [
        Window(range(s, s + history_len), range(s + history_len, s + history_len + horizon))
        for s in range(first, last + 1)
    ]


@dataclass(frozen=True)
class WindowConfig:
    """History length t, horizon p and the chronological split ratio."""

    history: int = DEFAULT_HISTORY
    horizon: int = DEFAULT_HORIZON
    split_ratio: tuple[int, int, int] = SPLIT_RATIO

    def __post_init__(self):
        if self.history < 1 or self.horizon < 1:
            raise ContractError("history and horizon must be positive")
        object.__setattr__(self, "split_ratio", tuple(int(r) for r in self.split_ratio))


def split_windows(split: DatasetSplit, cfg: WindowConfig) -> dict[str, list[Window]]:
    """
    Windows for each block.

    Training windows stay inside the training block. Validation and test
    targets stay inside their block while inputs may reach back to slot 0.
    """
    return {
        "train": make_windows(split.train, cfg.history, cfg.horizon),
        "validation": make_windows(split.validation, cfg.history, cfg.horizon, lookback_start=0),
        "test": make_windows(split.test, cfg.history, cfg.horizon, lookback_start=0),
    }
