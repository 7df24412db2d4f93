"""
CSV ingestion and export.

Input files:
    edges     road_a,road_b
    crashes   road,time_slot,minor,serious,fatal   (severity counts)
              road,time_slot,risk                  (precomputed scores)
    features  road,time_slot,f0..f{d-1}
"""

import logging
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from zitd_gnn.constants import SEVERITY_WEIGHTS
from zitd_gnn.data.dataset import Dataset
from zitd_gnn.data.graph import RoadGraph, build_graph
from zitd_gnn.data.risk import (
    CrashRecord,
    FeatureTensor,
    RiskTensor,
    ScoreRecord,
    compute_risk_scores,
    risk_from_scores,
)
from zitd_gnn.data.synth import SyntheticDataset
from zitd_gnn.errors import DataError

logger = logging.getLogger(__name__)

COUNT_COLUMNS = ("minor", "serious", "fatal")


def _read_csv(path: str | Path, required: Sequence[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot parse {path}: {exc}") from None
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise DataError(f"{path} is missing columns {missing}")
    if frame[list(required)].isna().any().any():
        raise DataError(f"{path} has empty cells in {list(required)}")
    return frame


def read_edges(path: str | Path) -> list[tuple[int, int]]:
    frame = _read_csv(path, ("road_a", "road_b"))
    return [(int(a), int(b)) for a, b in zip(frame["road_a"], frame["road_b"])]


def read_features(path: str | Path) -> FeatureTensor:
    """
    Pivot a long feature table into an (N, T, d) tensor.

    Raises:
        DataError: If some (road, slot) cell is missing or repeated.
    """
    frame = _read_csv(path, ("road", "time_slot"))
    feature_columns = sorted(
        (c for c in frame.columns if c.startswith("f") and c[1:].isdigit()),
        key=lambda c: int(c[1:]),
    )
    if not feature_columns:
        raise DataError(f"{path} has no f0..f{{d-1}} columns")
    if frame.empty:
        raise DataError(f"{path} has no rows")
    roads = frame["road"].to_numpy(dtype=int)
    slots = frame["time_slot"].to_numpy(dtype=int)
    if roads.min() < 0 or slots.min() < 0:
        raise DataError(f"{path} has negative road or slot indices")
    n, t = int(roads.max()) + 1, int(slots.max()) + 1
    if len(frame) != n * t or frame.duplicated(["road", "time_slot"]).any():
        raise DataError(f"{path} must list every (road, time_slot) cell exactly once")
    values = np.zeros((n, t, len(feature_columns)))
    values[roads, slots, :] = frame[feature_columns].to_numpy(dtype=np.float64)
    return FeatureTensor(values)


def read_risk(
    path: str | Path,
    n_roads: int,
    n_slots: int,
    weights: Sequence[float] = SEVERITY_WEIGHTS,
) -> RiskTensor:
    """Read either crash counts (weighted per severity) or precomputed scores."""
    frame = _read_csv(path, ("road", "time_slot"))
    if all(c in frame.columns for c in COUNT_COLUMNS):
        records = [
            CrashRecord(int(r), int(s), (int(a), int(b), int(c)))
            for r, s, a, b, c in frame[["road", "time_slot", *COUNT_COLUMNS]].itertuples(index=False)
        ]
        return compute_risk_scores(records, weights, n_roads, n_slots)
    if "risk" in frame.columns:
        records = [
            ScoreRecord(int(r), int(s), float(v))
            for r, s, v in frame[["road", "time_slot", "risk"]].itertuples(index=False)
        ]
        return risk_from_scores(records, n_roads, n_slots)
    raise DataError(f"{path} needs either {list(COUNT_COLUMNS)} or a risk column")


def load_dataset(
    edges: str | Path,
    crashes: str | Path,
    features: str | Path,
    weights: Sequence[float] = SEVERITY_WEIGHTS,
) -> Dataset:
    """Load the three input files into a Dataset sized by the feature grid."""
    feature_tensor = read_features(features)
    n, t, _ = feature_tensor.values.shape
    graph = build_graph(n, read_edges(edges))
    risk = read_risk(crashes, n, t, weights)
    logger.info("loaded %d roads x %d slots, %d edges", n, t, len(graph.edges))
    return Dataset(graph, feature_tensor, risk)


def _long_features(features: FeatureTensor) -> pd.DataFrame:
    n, t, d = features.values.shape
    roads, slots = np.meshgrid(np.arange(n), np.arange(t), indexing="ij")
    frame = pd.DataFrame({"road": roads.ravel(), "time_slot": slots.ravel()})
    for k in range(d):
        frame[f"f{k}"] = features.values[:, :, k].ravel()
    return frame


def write_edges(graph: RoadGraph, path: Path) -> None:
    pd.DataFrame(list(graph.edges), columns=["road_a", "road_b"]).to_csv(path, index=False)


def write_synthetic(synthetic: SyntheticDataset, out_dir: str | Path) -> dict[str, Path]:
    """
    Write edges.csv, crashes.csv (risk schema), features.csv and true_params.csv.

    Returns:
        Mapping of file role to written path.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data = synthetic.dataset
    paths = {
        "edges": out_dir / "edges.csv",
        "crashes": out_dir / "crashes.csv",
        "features": out_dir / "features.csv",
        "true_params": out_dir / "true_params.csv",
    }
    write_edges(data.graph, paths["edges"])

    roads, slots = np.nonzero(data.risk.values)
    pd.DataFrame(
        {"road": roads, "time_slot": slots, "risk": data.risk.values[roads, slots]}
    ).to_csv(paths["crashes"], index=False)

    _long_features(data.features).to_csv(paths["features"], index=False)

    true = synthetic.true_params
    n, t = true.pi.shape
    grid_roads, grid_slots = np.meshgrid(np.arange(n), np.arange(t), indexing="ij")
    pd.DataFrame(
        {
            "road": grid_roads.ravel(),
            "time_slot": grid_slots.ravel(),
            "pi": true.pi.ravel(),
            "mu": true.mu.ravel(),
            "phi": true.phi.ravel(),
            "rho": true.rho.ravel(),
        }
    ).to_csv(paths["true_params"], index=False)
    return paths
