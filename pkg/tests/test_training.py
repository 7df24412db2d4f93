import json
import math

import numpy as np
import pytest

from zitd_gnn.core import Parameter
from zitd_gnn.data import RiskTensor, SynthConfig, WindowConfig, synth_generate, temporal_split
from zitd_gnn.errors import ContractError, DataError, NonFiniteGradientError
from zitd_gnn.model import StzitdNetwork
from zitd_gnn.training import (
    AdamState,
    Checkpoint,
    StopDecision,
    TrainConfig,
    adam_step,
    clip_grad_norm,
    early_stop_check,
    ha_baseline,
    load_checkpoint,
    save_checkpoint,
    train_loop,
)

TINY_WINDOWS = WindowConfig(history=4, horizon=2)


def param(values, name="w"):
    return Parameter(np.asarray(values, dtype=np.float64), name)


class TestAdam:
    def test_first_step_moves_by_learning_rate(self):
        p = param([1.0, -2.0])
        adam_step([p], [np.array([0.5, -3.0])], AdamState(), TrainConfig(weight_decay=0.0))
        np.testing.assert_allclose(p.values, [0.99, -1.99], atol=1e-8)

    def test_zero_gradient_leaves_parameters(self):
        p = param([1.0, 2.0])
        adam_step([p], [np.zeros(2)], AdamState(), TrainConfig(weight_decay=0.0))
        np.testing.assert_array_equal(p.values, [1.0, 2.0])

    def test_weight_decay_is_decoupled(self):
        p = param([1.0])
        adam_step([p], [np.zeros(1)], AdamState(), TrainConfig(learning_rate=0.01, weight_decay=0.01))
        assert p.values[0] == pytest.approx(0.9999)

    def test_step_counter_and_moments(self):
        p = param([0.0], "layer.w")
        state = adam_step([p], [np.array([1.0])], AdamState(), TrainConfig())
        adam_step([p], [np.array([1.0])], state, TrainConfig())
        assert state.step == 2
        assert set(state.m) == {"layer.w"}

    def test_non_finite_gradient_is_rejected_before_update(self):
        a, b = param([1.0], "a"), param([2.0, 3.0], "b")
        with pytest.raises(NonFiniteGradientError) as info:
            adam_step([a, b], [np.array([0.1]), np.array([0.0, np.nan])], AdamState(), TrainConfig())
        assert info.value.parameter == "b"
        assert info.value.index == (1,)
        np.testing.assert_array_equal(a.values, [1.0])

    def test_length_mismatch(self):
        with pytest.raises(ContractError):
            adam_step([param([1.0])], [], AdamState(), TrainConfig())

    def test_state_dict_round_trip(self):
        state = AdamState({"w": np.array([0.1, 0.2])}, {"w": np.array([0.3, 0.4])}, 7)
        restored = AdamState.from_dict(json.loads(json.dumps(state.to_dict())))
        assert restored.step == 7
        np.testing.assert_array_equal(restored.v["w"], [0.3, 0.4])


class TestClipping:
    def test_scales_to_max_norm(self):
        grads, norm = clip_grad_norm([np.array([3.0]), np.array([4.0])], 1.0)
        assert norm == pytest.approx(5.0)
        np.testing.assert_allclose(np.concatenate(grads), [0.6, 0.8])

    def test_small_gradients_untouched(self):
        grads, norm = clip_grad_norm([np.array([0.3, 0.4])], 5.0)
        assert norm == pytest.approx(0.5)
        np.testing.assert_array_equal(grads[0], [0.3, 0.4])


class TestEarlyStopping:
    @pytest.mark.parametrize(
        "history,patience,expected",
        [
            ([3.0, 2.0, 2.5, 2.6], 2, StopDecision.CONTINUE),
            ([3.0, 2.0, 2.5, 2.6, 2.7], 2, StopDecision.STOP),
            ([1.0, 1.0, 1.0], 1, StopDecision.STOP),
            ([5.0, 4.0, 3.0], 0, StopDecision.CONTINUE),
            ([1.0], 0, StopDecision.CONTINUE),
        ],
    )
    def test_decision(self, history, patience, expected):
        assert early_stop_check(history, patience) is expected

    def test_empty_history(self):
        with pytest.raises(ContractError):
            early_stop_check([], 3)


class TestTrainConfig:
    def test_defaults(self):
        cfg = TrainConfig()
        assert (cfg.learning_rate, cfg.weight_decay, cfg.epochs, cfg.patience) == (0.01, 0.01, 20, 10)
        assert cfg.grad_clip_norm == 5.0

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"learning_rate": 0.0},
            {"weight_decay": -1.0},
            {"epochs": 0},
            {"epochs": 3, "patience": 4},
            {"grad_clip_norm": 0.0},
            {"batch_strategy": "mini-batch"},
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ContractError):
            TrainConfig(**kwargs)


class TestBaseline:
    def test_row_means(self):
        forecast = ha_baseline(RiskTensor(np.array([[0.0, 0.0, 3.0], [1.0, 1.0, 1.0]])), 4)
        assert forecast.shape == (2, 4)
        np.testing.assert_allclose(forecast[0], 1.0)
        np.testing.assert_allclose(forecast[1], 1.0)

    def test_all_zero_road(self):
        np.testing.assert_array_equal(ha_baseline(np.zeros((3, 5)), 2), np.zeros((3, 2)))

    def test_empty_block(self):
        with pytest.raises(ContractError):
            ha_baseline(np.zeros((3, 0)), 2)


class TestCheckpoint:
    def test_round_trip_restores_weights(self, toy_network, tmp_path):
        state = AdamState({"decoder.b_pi": np.ones(2)}, {"decoder.b_pi": np.ones(2)}, 3)
        ckpt = Checkpoint.capture(toy_network, state, epoch=4, validation_loss=1.25, config_hash="abc")
        path = save_checkpoint(ckpt, tmp_path / "nested" / "checkpoint.json")

        loaded = load_checkpoint(path)
        assert (loaded.epoch, loaded.validation_loss, loaded.config_hash) == (4, 1.25, "abc")
        assert loaded.adam.step == 3

        restored = loaded.restore()
        assert not restored.training
        for name, values in toy_network.state_dict().items():
            np.testing.assert_array_equal(restored.state_dict()[name], values)

    def test_capture_is_a_snapshot(self, toy_network):
        ckpt = Checkpoint.capture(toy_network, AdamState(), 1, 0.5)
        toy_network.decoder.b_mu.values[:] = 9.0
        assert not (ckpt.state["decoder.b_mu"] == 9.0).any()

    def test_version_mismatch(self, toy_network, tmp_path):
        path = save_checkpoint(Checkpoint.capture(toy_network, AdamState(), 1, 0.5), tmp_path / "c.json")
        payload = json.loads(path.read_text())
        payload["format_version"] = 99
        path.write_text(json.dumps(payload))
        with pytest.raises(DataError, match="format"):
            load_checkpoint(path)

    def test_missing_and_corrupt(self, tmp_path):
        with pytest.raises(DataError):
            load_checkpoint(tmp_path / "absent.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(DataError):
            load_checkpoint(bad)


def fresh_network(n_features, small_encoder):
    return StzitdNetwork(n_features, TINY_WINDOWS.horizon, small_encoder, seed=11)


class TestTrainLoop:
    def test_is_deterministic(self, tiny_synthetic, small_encoder):
        data = tiny_synthetic.dataset
        split = temporal_split(data.n_slots)
        cfg = TrainConfig(epochs=2, patience=2, seed=4)

        first = train_loop(data, split, fresh_network(3, small_encoder), TINY_WINDOWS, cfg)
        second = train_loop(data, split, fresh_network(3, small_encoder), TINY_WINDOWS, cfg)

        assert first.history == second.history
        for name, values in first.best.state.items():
            np.testing.assert_array_equal(second.best.state[name], values)

    def test_best_checkpoint_has_lowest_validation_loss(self, tiny_synthetic, small_encoder):
        data = tiny_synthetic.dataset
        result = train_loop(
            data, temporal_split(data.n_slots), fresh_network(3, small_encoder),
            TINY_WINDOWS, TrainConfig(epochs=3, patience=3),
        )
        assert len(result.history) == 3
        losses = [r.validation_loss for r in result.history]
        assert result.best.validation_loss == min(losses)
        assert result.best.epoch == 1 + losses.index(min(losses))
        assert all(math.isfinite(r.train_loss) for r in result.history)

    def test_horizon_mismatch(self, tiny_synthetic, small_encoder):
        data = tiny_synthetic.dataset
        network = StzitdNetwork(3, 5, small_encoder)
        with pytest.raises(ContractError):
            train_loop(data, temporal_split(data.n_slots), network, TINY_WINDOWS, TrainConfig(epochs=1, patience=0))

    def test_short_training_block(self, tiny_synthetic, small_encoder):
        data = tiny_synthetic.dataset
        with pytest.raises(DataError):
            train_loop(
                data, temporal_split(data.n_slots), fresh_network(3, small_encoder),
                WindowConfig(history=30, horizon=2), TrainConfig(epochs=1, patience=0),
            )

    @pytest.mark.slow
    def test_loss_decreases(self, tiny_synthetic, small_encoder):
        data = tiny_synthetic.dataset
        result = train_loop(
            data, temporal_split(data.n_slots), fresh_network(3, small_encoder),
            TINY_WINDOWS, TrainConfig(epochs=5, patience=5),
        )
        assert result.history[-1].train_loss < result.history[0].train_loss

    def test_unreached_parameters_get_no_stale_step(self, tiny_synthetic, small_encoder):
        network = SpareParameterNetwork(3, TINY_WINDOWS.horizon, small_encoder, seed=11)
        network.spare.grad = np.full(3, 5.0)
        data = tiny_synthetic.dataset
        train_loop(
            data, temporal_split(data.n_slots), network,
            TINY_WINDOWS, TrainConfig(epochs=1, patience=1, weight_decay=0.0),
        )
        np.testing.assert_array_equal(network.spare.values, np.ones(3))
        assert not network.spare.grad.any()

    @pytest.mark.slow
    def test_loss_decreases_on_default_synthetic(self):
        data = synth_generate(SynthConfig()).dataset
        assert (data.n_roads, data.n_slots) == (30, 90)
        result = train_loop(
            data, temporal_split(data.n_slots), StzitdNetwork(data.n_features),
            WindowConfig(), TrainConfig(epochs=5, patience=5),
        )
        assert len(result.history) == 5
        assert result.history[4].train_loss < result.history[0].train_loss


class SpareParameterNetwork(StzitdNetwork):
    """A network holding one parameter its forward pass never touches."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.spare = Parameter(np.ones(3), "spare")
