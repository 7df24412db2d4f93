import json

import numpy as np
import pandas as pd
import pytest

from zitd_gnn.core import Tensor
from zitd_gnn.errors import ContractError, ShapeError
from zitd_gnn.evaluation import (
    EvaluationSummary,
    IntervalConfig,
    MetricReport,
    MetricsConfig,
    PredictionSet,
    acc_hit_rate,
    baseline_report,
    interval_metrics,
    metric_report,
    point_metrics,
    predict_field,
    report_rows,
    write_loss_history,
    write_report,
    zero_rate,
)
from zitd_gnn.model import ZitdField
from zitd_gnn.training import EpochRecord


def column(values):
    """N roads at a single step."""
    return np.asarray(values, dtype=np.float64)[:, None]


class TestPointMetrics:
    def test_two_cells(self):
        m = point_metrics([0.0, 2.0], [1.0, 1.0])
        assert (m.mae, m.rmse) == (pytest.approx(1.0), pytest.approx(1.0))
        assert m.mape == pytest.approx(0.5)

    def test_mape_skips_zero_targets(self):
        assert point_metrics([0.0, 0.0], [1.0, 3.0]).mape is None

    def test_rmse_dominates_mae(self, rng):
        y, y_hat = rng.random(50), rng.random(50)
        m = point_metrics(y, y_hat)
        assert m.rmse >= m.mae

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            point_metrics([1.0, 2.0], [1.0])


class TestIntervalMetrics:
    def test_inclusive_coverage(self):
        m = interval_metrics([0.0, 1.0, 2.0], [0.0, 0.0, 2.5], [0.0, 2.0, 3.0])
        assert m.picp == pytest.approx(2.0 / 3.0)
        assert m.mpiw == pytest.approx(2.5 / 3.0)

    def test_widening_never_loses_coverage(self, rng):
        y = rng.gamma(1.0, size=40)
        lower = rng.random(40)
        upper = lower + rng.random(40)
        base = interval_metrics(y, lower, upper)
        wide = interval_metrics(y, np.maximum(lower - 0.3, 0.0), upper + 0.3)
        assert wide.picp >= base.picp
        assert wide.mpiw > base.mpiw

    def test_inverted_interval(self):
        with pytest.raises(ContractError):
            interval_metrics([1.0], [2.0], [1.0])


class TestZeroRate:
    def test_counts_confident_zeros(self):
        assert zero_rate([0.0, 0.0, 1.0], [0.9, 0.6, 0.9]) == pytest.approx(2.0 / 3.0)

    def test_monotone_in_threshold(self, rng):
        y = np.where(rng.random(100) < 0.7, 0.0, 1.0)
        p0 = rng.random(100)
        rates = [zero_rate(y, p0, t) for t in (0.1, 0.3, 0.5, 0.7, 0.9)]
        assert rates == sorted(rates, reverse=True)

    def test_threshold_bounds(self):
        with pytest.raises(ContractError):
            zero_rate([0.0], [1.0], 1.0)


class TestAccHitRate:
    Y = column([0.0, 3.0, 0.0, 0.0, 1.0])

    def test_top_ranked_road_catches_half(self):
        assert acc_hit_rate(self.Y, column([0.1, 0.9, 0.2, 0.3, 0.4])) == pytest.approx(0.5)

    def test_misses_everything(self):
        assert acc_hit_rate(self.Y, column([0.9, 0.0, 0.2, 0.3, 0.1])) == 0.0

    def test_full_fraction_catches_all(self):
        assert acc_hit_rate(self.Y, column([0.9, 0.0, 0.2, 0.3, 0.1]), fraction=1.0) == 1.0

    def test_ties_break_by_road_index(self):
        assert acc_hit_rate(column([2.0, 0.0, 0.0, 0.0, 0.0]), np.zeros((5, 1))) == 1.0
        assert acc_hit_rate(column([0.0, 0.0, 0.0, 0.0, 2.0]), np.zeros((5, 1))) == 0.0

    def test_invariant_under_monotone_transform(self, rng):
        y = np.where(rng.random((20, 4)) < 0.5, 0.0, rng.gamma(1.0, size=(20, 4)))
        y_hat = rng.random((20, 4))
        assert acc_hit_rate(y, y_hat) == pytest.approx(acc_hit_rate(y, np.exp(3.0 * y_hat)))

    def test_steps_without_crashes_are_skipped(self):
        y = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]])
        assert acc_hit_rate(y, np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]), fraction=0.3) == 1.0

    def test_no_crashes_is_undefined(self):
        assert acc_hit_rate(np.zeros((4, 2)), np.ones((4, 2))) is None

    def test_needs_a_road_axis(self):
        with pytest.raises(ShapeError):
            acc_hit_rate([1.0, 0.0], [0.5, 0.5])


class TestMetricReport:
    @pytest.fixture
    def cells(self, rng):
        shape = (3, 6, 2)
        y = np.where(rng.random(shape) < 0.6, 0.0, rng.gamma(2.0, size=shape))
        y_hat = rng.random(shape)
        lower = np.zeros(shape)
        upper = y_hat * 3.0
        p0 = rng.random(shape)
        return y, y_hat, lower, upper, p0

    def test_overall_and_per_step(self, cells):
        report = metric_report(*cells)
        assert report.n_cells == 36
        assert set(report.overall()) == {"mae", "mape", "rmse", "mpiw", "picp", "zr", "acc_hr"}
        assert len(report.per_step["mae"]) == 2
        y, y_hat = cells[0], cells[1]
        assert report.per_step["mae"][1] == pytest.approx(np.abs(y_hat[..., 1] - y[..., 1]).mean())
        assert report.mae == pytest.approx(np.mean(report.per_step["mae"]))

    def test_single_window_matches_stack(self, cells):
        single = [a[0] for a in cells]
        assert metric_report(*single).overall() == metric_report(*(a[:1] for a in cells)).overall()

    def test_undefined_metrics_are_none(self, caplog):
        zeros = np.zeros((4, 2))
        report = metric_report(zeros, zeros, zeros, zeros, np.ones((4, 2)))
        assert report.mape is None
        assert report.acc_hr is None
        assert report.zr == 1.0
        assert "MAPE undefined" in caplog.text

    def test_rejects_inconsistent_values(self):
        with pytest.raises(ContractError):
            MetricReport(mae=2.0, mape=None, rmse=1.0, mpiw=0.0, picp=1.0, zr=0.0, acc_hr=None)

    def test_baseline_uses_degenerate_intervals(self):
        y = np.array([[0.0, 1.0], [2.0, 0.0]])
        y_hat = np.array([[0.0, 1.0], [1.0, 1.0]])
        report = baseline_report(y, y_hat)
        assert report.mpiw == 0.0
        assert report.picp == pytest.approx(0.5)
        assert report.zr == pytest.approx(0.25)

    def test_config_validation(self):
        with pytest.raises(ContractError):
            MetricsConfig(hit_rate_fraction=0.0)


class TestReports:
    @pytest.fixture
    def summary(self):
        y = np.array([[0.0, 1.0], [2.0, 0.0], [0.0, 0.5]])
        y_hat = np.array([[0.2, 0.8], [1.5, 0.1], [0.0, 0.3]])
        model = metric_report(y, y_hat, np.zeros_like(y), y_hat * 2.0, np.full_like(y, 0.6))
        return EvaluationSummary(model, baseline_report(y, np.ones_like(y)), {"lower_bound": 1.2}, 1)

    def test_rows(self, summary):
        rows = report_rows(summary.model)
        assert list(rows["step"]) == ["0", "1", "overall"]
        assert list(rows.columns) == ["step", "mae", "mape", "rmse", "mpiw", "picp", "zr", "acc_hr"]

    def test_write_report(self, summary, tmp_path):
        paths = write_report(summary, tmp_path / "out")
        payload = json.loads(paths["json"].read_text())
        assert payload["block"] == "test"
        assert payload["nll"] == {"lower_bound": 1.2}
        assert payload["baseline_ha"]["mpiw"] == 0.0
        assert len(pd.read_csv(paths["csv"])) == 3
        assert paths["baseline_csv"].exists()

    def test_write_loss_history(self, tmp_path):
        path = write_loss_history([EpochRecord(1, 2.0, 2.5), EpochRecord(2, 1.5, 2.2)], tmp_path / "h.csv")
        frame = pd.read_csv(path)
        assert list(frame.columns) == ["epoch", "train_loss", "validation_loss"]
        assert frame["validation_loss"].tolist() == [2.5, 2.2]


def constant_field(pi, shape=(2, 3)):
    return ZitdField(
        Tensor(np.full(shape, pi)),
        Tensor(np.full(shape, 1.0)),
        Tensor(np.full(shape, 1.0)),
        Tensor(np.full(shape, 1.5)),
    )


class TestPredictField:
    def test_heavy_inflation_gives_empty_interval(self):
        mean, lower, upper, p0 = predict_field(constant_field(0.96), [10, 11, 12], IntervalConfig(samples=200))
        np.testing.assert_allclose(mean, 0.04)
        assert not lower.any() and not upper.any()
        assert (p0 >= 0.96).all()

    def test_intervals_bracket_mean(self):
        mean, lower, upper, p0 = predict_field(constant_field(0.0), [0, 1, 2], IntervalConfig(samples=500))
        assert (lower <= upper).all()
        assert (upper > 0).all()
        np.testing.assert_allclose(p0, np.exp(-2.0))

    def test_is_seeded_per_cell(self):
        cfg = IntervalConfig(samples=300, seed=8)
        first = predict_field(constant_field(0.2), [4, 5, 6], cfg)
        second = predict_field(constant_field(0.2), [4, 5, 6], cfg)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a, b)

    def test_slot_count_must_match_horizon(self):
        with pytest.raises(ContractError):
            predict_field(constant_field(0.5), [0, 1])


class TestPredictionSet:
    def test_frame_columns(self):
        shape = (2, 3, 2)
        preds = PredictionSet(
            mean=np.ones(shape),
            lower=np.zeros(shape),
            upper=np.full(shape, 2.0),
            p0=np.full(shape, 0.5),
            time_slots=np.array([[5, 6], [6, 7]]),
            y_true=np.zeros(shape),
        )
        frame = preds.to_frame()
        assert list(frame.columns) == ["window", "road", "step", "time_slot", "mean", "L", "U", "P0", "y_true"]
        assert len(frame) == 12
        assert frame.loc[(frame.window == 1) & (frame.step == 1), "time_slot"].unique().tolist() == [7]

    def test_frame_carries_decoded_parameters(self):
        shape = (1, 2, 3)
        params = np.stack(
            [np.full(shape, 0.9), np.arange(6.0).reshape(shape), np.full(shape, 2.0), np.full(shape, 1.4)],
            axis=-1,
        )
        preds = PredictionSet(
            mean=0.1 * params[..., 1],
            lower=np.zeros(shape),
            upper=np.ones(shape),
            p0=np.full(shape, 0.9),
            time_slots=np.array([[3, 4, 5]]),
            y_true=np.zeros(shape),
            params=params,
        )
        frame = preds.to_frame()
        assert list(frame.columns) == [
            "window", "road", "step", "time_slot", "mean", "L", "U", "P0",
            "pi", "mu", "phi", "rho", "y_true",
        ]
        row = frame[(frame.road == 1) & (frame.step == 2)].iloc[0]
        assert row["mu"] == 5.0
        assert row["mean"] == pytest.approx(0.5)
        assert (frame["rho"] == 1.4).all()

    def test_rejects_misshaped_parameters(self):
        shape = (1, 2, 3)
        with pytest.raises(ContractError):
            PredictionSet(
                np.ones(shape), np.zeros(shape), np.ones(shape), np.zeros(shape),
                np.zeros((1, 3)), params=np.zeros((1, 2, 3, 3)),
            )

    def test_rejects_inverted_interval(self):
        shape = (1, 1, 1)
        with pytest.raises(ContractError):
            PredictionSet(np.ones(shape), np.ones(shape), np.zeros(shape), np.zeros(shape), np.zeros((1, 1)))
