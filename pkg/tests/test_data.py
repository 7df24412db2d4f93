import numpy as np
import pandas as pd
import pytest

from zitd_gnn.data import (
    CrashRecord,
    FeatureTensor,
    ScoreRecord,
    SynthConfig,
    WindowConfig,
    build_graph,
    compute_risk_scores,
    load_dataset,
    make_windows,
    risk_from_scores,
    split_windows,
    standardize,
    synth_generate,
    temporal_split,
    write_synthetic,
)
from zitd_gnn.data.io import read_features
from zitd_gnn.errors import ContractError, DataError


class TestGraph:
    def test_adjacency_is_symmetric(self, path_graph):
        assert (path_graph.adjacency == path_graph.adjacency.T).all()
        assert path_graph.degree().tolist() == [1, 2, 2, 2, 1, 0]

    def test_neighbourhood_includes_self(self, path_graph):
        mask = path_graph.neighbourhood_mask()
        assert mask.diagonal().all()
        assert mask[5].sum() == 1

    @pytest.mark.parametrize("edges", [[(0, 0)], [(0, 1), (1, 0)], [(0, 7)]])
    def test_invalid_edges(self, edges):
        with pytest.raises(DataError):
            build_graph(3, edges)

    def test_permute_relabels(self, path_graph):
        perm = [5, 4, 3, 2, 1, 0]
        permuted = path_graph.permute(perm)
        np.testing.assert_array_equal(
            permuted.adjacency, path_graph.adjacency[np.ix_(perm, perm)]
        )


class TestRisk:
    def test_severity_weights(self):
        records = [CrashRecord(0, 1, (1, 1, 1)), CrashRecord(0, 1, (2, 0, 0)), CrashRecord(1, 0, (0, 0, 1))]
        risk = compute_risk_scores(records, n_roads=2, n_slots=2)
        np.testing.assert_allclose(risk.values, [[0.0, 8.0], [3.0, 0.0]])
        assert risk.zero_fraction() == 0.5

    def test_record_outside_grid(self):
        with pytest.raises(DataError):
            compute_risk_scores([CrashRecord(2, 0, (1, 0, 0))], n_roads=2, n_slots=2)

    def test_negative_counts(self):
        with pytest.raises(DataError):
            CrashRecord(0, 0, (-1, 0, 0))

    def test_negative_score(self):
        with pytest.raises(DataError):
            risk_from_scores([ScoreRecord(0, 0, -1.0)], 1, 1)

    def test_standardize_uses_training_slots(self):
        values = np.zeros((2, 4, 1))
        values[:, :2, 0] = [[1.0, 3.0], [1.0, 3.0]]
        values[:, 2:, 0] = 100.0
        out = standardize(FeatureTensor(values), range(0, 2))
        assert out.mean[0] == pytest.approx(2.0)
        np.testing.assert_allclose(out.values[:, :2, 0], [[-1.0, 1.0], [-1.0, 1.0]])


class TestWindows:
    def test_split_ratio(self):
        split = temporal_split(365)
        assert (len(split.train), len(split.validation), len(split.test)) == (243, 60, 62)
        assert split.block_of(300) == "validation"

    def test_series_too_short(self):
        with pytest.raises(ContractError):
            temporal_split(11)

    def test_window_count(self):
        windows = make_windows(range(0, 60), 14, 14)
        assert len(windows) == 33
        assert windows[0].inputs == range(0, 14)
        assert windows[-1].targets == range(46, 60)

    def test_short_range_gives_no_windows(self, caplog):
        assert make_windows(range(0, 20), 14, 14) == []
        assert "too short" in caplog.text

    def test_lookback_keeps_targets_inside(self):
        windows = make_windows(range(75, 90), 14, 14, lookback_start=0)
        assert [w.inputs.start for w in windows] == [61, 62]
        assert all(75 <= w.targets.start and w.targets.stop <= 90 for w in windows)

    def test_split_windows_on_ninety_slots(self):
        windows = split_windows(temporal_split(90), WindowConfig())
        assert {k: len(v) for k, v in windows.items()} == {"train": 33, "validation": 2, "test": 2}


class TestSynthetic:
    def test_repeatable(self):
        cfg = SynthConfig(n_roads=6, n_slots=20, seed=3)
        a, b = synth_generate(cfg), synth_generate(cfg)
        np.testing.assert_array_equal(a.dataset.risk.values, b.dataset.risk.values)
        np.testing.assert_array_equal(a.dataset.features.values, b.dataset.features.values)

    def test_shapes_and_sparsity(self):
        synthetic = synth_generate(SynthConfig())
        data = synthetic.dataset
        assert (data.n_roads, data.n_slots, data.n_features) == (30, 90, 4)
        assert 0.95 < synthetic.expected_zero_fraction < 0.98
        assert synthetic.zero_fraction > 0.9
        assert synthetic.true_params.mu.shape == (30, 90)

    def test_zero_fraction_within_three_sigma(self):
        synthetic = synth_generate(SynthConfig(road_concentration=0.0, weekly_amplitude=0.0))
        p0 = synthetic.true_params.zero_mass()
        np.testing.assert_allclose(synthetic.true_params.pi, 0.96)
        sigma = np.sqrt((p0 * (1.0 - p0)).sum()) / p0.size
        assert abs(synthetic.zero_fraction - synthetic.expected_zero_fraction) <= 3.0 * sigma

    def test_certain_zero_gives_empty_risk(self):
        synthetic = synth_generate(SynthConfig(n_roads=10, n_slots=30, pi=1.0))
        assert not synthetic.dataset.risk.values.any()
        assert synthetic.zero_fraction == synthetic.expected_zero_fraction == 1.0

    def test_propensity_varies_by_road(self):
        pi = synth_generate(SynthConfig()).true_params.pi
        by_road = (1.0 - pi).mean(axis=1)
        assert by_road.max() > 2.0 * by_road.min()
        assert (1.0 - pi).max() <= 0.9

    def test_first_feature_carries_road_attribute(self):
        synthetic = synth_generate(SynthConfig())
        propensity = (1.0 - synthetic.true_params.pi).mean(axis=1)
        u = synthetic.dataset.features.values[:, 0, 0]
        assert np.corrcoef(u, propensity)[0, 1] > 0.5

    def test_graph_is_connected_ring(self):
        graph = synth_generate(SynthConfig(n_roads=5, n_slots=12, edge_density=0.0)).dataset.graph
        assert graph.edges == ((0, 1), (1, 2), (2, 3), (3, 4))


class TestCsv:
    def test_roundtrip(self, tmp_path, tiny_synthetic):
        paths = write_synthetic(tiny_synthetic, tmp_path)
        assert set(paths) == {"edges", "crashes", "features", "true_params"}
        loaded = load_dataset(paths["edges"], paths["crashes"], paths["features"])
        original = tiny_synthetic.dataset
        np.testing.assert_allclose(loaded.risk.values, original.risk.values)
        np.testing.assert_allclose(loaded.features.values, original.features.values)
        assert loaded.graph.edges == original.graph.edges

    def test_count_schema(self, tmp_path, tiny_synthetic):
        paths = write_synthetic(tiny_synthetic, tmp_path)
        pd.DataFrame(
            {"road": [0, 1], "time_slot": [2, 3], "minor": [1, 0], "serious": [0, 1], "fatal": [0, 1]}
        ).to_csv(paths["crashes"], index=False)
        loaded = load_dataset(paths["edges"], paths["crashes"], paths["features"])
        assert loaded.risk.values[0, 2] == 1.0
        assert loaded.risk.values[1, 3] == 5.0
        assert loaded.risk.values.sum() == 6.0

    def test_missing_feature_cell(self, tmp_path):
        path = tmp_path / "features.csv"
        pd.DataFrame({"road": [0, 0, 1], "time_slot": [0, 1, 0], "f0": [1.0, 2.0, 3.0]}).to_csv(path, index=False)
        with pytest.raises(DataError):
            read_features(path)

    def test_missing_column(self, tmp_path, tiny_synthetic):
        paths = write_synthetic(tiny_synthetic, tmp_path)
        pd.DataFrame({"road": [0], "time_slot": [0]}).to_csv(paths["crashes"], index=False)
        with pytest.raises(DataError):
            load_dataset(paths["edges"], paths["crashes"], paths["features"])

    def test_header_only_features(self, tmp_path):
        path = tmp_path / "features.csv"
        path.write_text("road,time_slot,f0,f1\n")
        with pytest.raises(DataError, match="no rows"):
            read_features(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            read_features(tmp_path / "absent.csv")
