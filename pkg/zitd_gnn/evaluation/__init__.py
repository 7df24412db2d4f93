"""Predictions, metrics and report writers."""

from zitd_gnn.evaluation.metrics import (
    IntervalMetrics,
    MetricReport,
    MetricsConfig,
    PointMetrics,
    acc_hit_rate,
    baseline_report,
    interval_metrics,
    metric_report,
    point_metrics,
    zero_rate,
)
from zitd_gnn.evaluation.predict import (
    IntervalConfig,
    PredictionSet,
    forecast,
    predict_field,
    predict_windows,
)
from zitd_gnn.evaluation.report import (
    EvaluationSummary,
    report_rows,
    write_loss_history,
    write_predictions,
    write_report,
)

__all__ = [
    "MetricsConfig",
    "PointMetrics",
    "IntervalMetrics",
    "MetricReport",
    "point_metrics",
    "interval_metrics",
    "zero_rate",
    "acc_hit_rate",
    "metric_report",
    "baseline_report",
    "IntervalConfig",
    "PredictionSet",
    "predict_field",
    "predict_windows",
    "forecast",
    "EvaluationSummary",
    "report_rows",
    "write_report",
    "write_predictions",
    "write_loss_history",
]
