"""Road graphs, crash-risk labels, windows and synthetic data."""

from zitd_gnn.data.dataset import Dataset
from zitd_gnn.data.graph import RoadGraph, build_graph
from zitd_gnn.data.io import load_dataset, write_synthetic
from zitd_gnn.data.risk import (
    CrashRecord,
    FeatureTensor,
    RiskTensor,
    ScoreRecord,
    compute_risk_scores,
    risk_from_scores,
    standardize,
)
from zitd_gnn.data.synth import SynthConfig, SyntheticDataset, TrueParams, synth_generate
from zitd_gnn.data.windows import (
    DatasetSplit,
    Window,
    WindowConfig,
    make_windows,
    split_windows,
    temporal_split,
)

__all__ = [
    "Dataset",
    "RoadGraph",
    "build_graph",
    "load_dataset",
    "write_synthetic",
    "CrashRecord",
    "ScoreRecord",
    "FeatureTensor",
    "RiskTensor",
    "compute_risk_scores",
    "risk_from_scores",
    "standardize",
    "SynthConfig",
    "SyntheticDataset",
    "TrueParams",
    "synth_generate",
    "DatasetSplit",
    "Window",
    "WindowConfig",
    "make_windows",
    "split_windows",
    "temporal_split",
]
