"""
Writers for metric reports, per-cell predictions and loss histories.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import pandas as pd

from zitd_gnn.evaluation.metrics import METRIC_NAMES, MetricReport
from zitd_gnn.evaluation.predict import PredictionSet

logger = logging.getLogger(__name__)


@dataclass
class EvaluationSummary:
    """Model metrics, the HA baseline on the same cells, and NLL summaries."""

    model: MetricReport
    baseline_ha: MetricReport | None = None
    nll: dict[str, float | None] = field(default_factory=dict)
    n_windows: int = 0
    block: str = "test"

    def to_dict(self) -> dict:
        out = {
            "block": self.block,
            "n_windows": self.n_windows,
            **self.model.to_dict(),
            "nll": self.nll,
        }
        if self.baseline_ha is not None:
            out["baseline_ha"] = self.baseline_ha.to_dict()
        return out


def report_rows(report: MetricReport) -> pd.DataFrame:
    """One row per step plus a final "overall" row."""
    steps = len(next(iter(report.per_step.values()), []))
    rows = [
        {"step": str(j), **{name: report.per_step[name][j] for name in METRIC_NAMES}}
        for j in range(steps)
    ]
    rows.append({"step": "overall", **report.overall()})
    return pd.DataFrame(rows, columns=["step", *METRIC_NAMES])


def write_report(summary: EvaluationSummary, out_dir: str | Path) -> dict[str, Path]:
    """Write metrics.json and metrics.csv (plus baseline_ha.csv when present)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"json": out_dir / "metrics.json", "csv": out_dir / "metrics.csv"}
    paths["json"].write_text(json.dumps(summary.to_dict(), indent=2, sort_keys=True))
    report_rows(summary.model).to_csv(paths["csv"], index=False)
    if summary.baseline_ha is not None:
        paths["baseline_csv"] = out_dir / "baseline_ha.csv"
        report_rows(summary.baseline_ha).to_csv(paths["baseline_csv"], index=False)
    logger.info("metrics written to %s", out_dir)
    return paths


def write_predictions(predictions: PredictionSet, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    predictions.to_frame().to_csv(path, index=False)
    return path


def write_loss_history(history: Sequence, path: str | Path) -> Path:
    """CSV with columns epoch, train_loss, validation_loss."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        [asdict(r) for r in history], columns=["epoch", "train_loss", "validation_loss"]
    )
    frame.to_csv(path, index=False)
    return path
