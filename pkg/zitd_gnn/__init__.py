"""
crashrisk-zitd: zero-inflated Tweedie graph networks for sparse road crash risk.
"""

__version__ = "0.1.0"

from zitd_gnn.config import RunConfig, parse_config
from zitd_gnn.data import Dataset, RoadGraph, build_graph, load_dataset, synth_generate
from zitd_gnn.distributions import (
    TweedieParams,
    ZitdParams,
    sample_zitd,
    tweedie_log_density,
    zitd_interval,
    zitd_log_density,
    zitd_zero_mass,
)
from zitd_gnn.errors import (
    ConfigError,
    ContractError,
    DataError,
    NumericError,
    ShapeError,
    ZitdError,
)
from zitd_gnn.evaluation import MetricReport, PredictionSet, metric_report
from zitd_gnn.model import EncoderConfig, EpsilonConfig, StzitdNetwork, ZitdField
from zitd_gnn.training import LossConfig, TrainConfig, total_loss, train_loop

__all__ = [
    "__version__",
    # Configuration
    "RunConfig",
    "parse_config",
    # Data
    "Dataset",
    "RoadGraph",
    "build_graph",
    "load_dataset",
    "synth_generate",
    # Distributions
    "TweedieParams",
    "ZitdParams",
    "tweedie_log_density",
    "zitd_log_density",
    "zitd_zero_mass",
    "zitd_interval",
    "sample_zitd",
    # Model
    "EncoderConfig",
    "EpsilonConfig",
    "StzitdNetwork",
    "ZitdField",
    # Training
    "LossConfig",
    "TrainConfig",
    "total_loss",
    "train_loop",
    # Evaluation
    "MetricReport",
    "PredictionSet",
    "metric_report",
    # Errors
    "ZitdError",
    "ConfigError",
    "DataError",
    "ContractError",
    "ShapeError",
    "NumericError",
]
