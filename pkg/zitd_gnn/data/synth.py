"""
Synthetic road-crash datasets with known ZITD parameters per cell.

Roads carry a latent risk attribute u_i, smoothed over the road graph so
that risky roads cluster. u_i enters the features, the crash propensity
1 - pi and the Tweedie mean, so a model that reads the features can rank
roads. Crash propensity also follows a weekly cycle visible through the
day-of-week features. Targets are drawn cell by cell with ``sample_zitd``.
"""

import logging
from dataclasses import dataclass

import numpy as np

from zitd_gnn.constants import DEFAULT_SEED
from zitd_gnn.data.dataset import Dataset
from zitd_gnn.data.graph import RoadGraph, build_graph
from zitd_gnn.data.risk import FeatureTensor, RiskTensor
from zitd_gnn.distributions.zitd import ZitdParams, sample_zitd, zitd_zero_mass
from zitd_gnn.errors import ContractError

logger = logging.getLogger(__name__)

WEEK = 7
MAX_PROPENSITY = 0.9


@dataclass(frozen=True)
class SynthConfig:
    """
    Generator settings.

    The crash propensity of road i on slot t is
    1 - pi_it = (1 - pi) * w_i * g_t, capped at 0.9, where
    w_i = exp(road_concentration * u_i) and g_t = exp(weekly_amplitude *
    cos(2 pi t / 7)) are each normalised to mean one. Both spreads at 0
    give a uniform pi. The mean is
    mu_it = mu * exp(road_effect * u_i - road_effect^2 / 2
    + seasonal_amplitude * sin(2 pi t / 7)); phi and rho are uniform.
    """

    n_roads: int = 30
    n_slots: int = 90
    n_features: int = 4
    edge_density: float = 0.05
    pi: float = 0.96
    road_concentration: float = 1.5
    weekly_amplitude: float = 1.5
    smoothing_passes: int = 2
    mu: float = 1.0
    phi: float = 1.0
    rho: float = 1.5
    road_effect: float = 0.3
    seasonal_amplitude: float = 0.3
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.n_roads < 1 or self.n_slots < 1 or self.n_features < 1:
            raise ContractError("n_roads, n_slots and n_features must be positive")
        if not 0.0 <= self.edge_density <= 1.0:
            raise ContractError("edge_density must lie in [0, 1]")
        if not 0.0 <= self.pi <= 1.0:
            raise ContractError("pi must lie in [0, 1]")
        if self.road_concentration < 0.0 or self.weekly_amplitude < 0.0 or self.smoothing_passes < 0:
            raise ContractError("road_concentration, weekly_amplitude and smoothing_passes must be >= 0")


@dataclass(frozen=True)
class TrueParams:
    """Per-cell generating parameters, each of shape (N, T)."""

    pi: np.ndarray
    mu: np.ndarray
    phi: np.ndarray
    rho: np.ndarray

    def cell(self, road: int, slot: int) -> ZitdParams:
        return ZitdParams.of(
            self.pi[road, slot], self.mu[road, slot], self.phi[road, slot], self.rho[road, slot]
        )

    def zero_mass(self) -> np.ndarray:
        """P(y = 0) per cell, (N, T)."""
        n, t = self.pi.shape
        return np.array([[zitd_zero_mass(self.cell(i, s)) for s in range(t)] for i in range(n)])


@dataclass(frozen=True)
class SyntheticDataset:
    dataset: Dataset
    true_params: TrueParams
    zero_fraction: float
    expected_zero_fraction: float


def _road_attribute(graph: RoadGraph, passes: int, rng: np.random.Generator) -> np.ndarray:
    """Standard normal draws averaged over closed neighbourhoods, then standardised."""
    u = rng.standard_normal(graph.n_roads)
    closed = graph.neighbourhood_mask().astype(np.float64)
    for _ in range(passes):
        u = closed @ u / closed.sum(axis=1)
    spread = u.std()
    return (u - u.mean()) / spread if spread > 0 else np.zeros_like(u)


def _mean_one(weights: np.ndarray) -> np.ndarray:
    return weights / weights.mean()


def _features(u: np.ndarray, n_slots: int, n_features: int, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(n_slots, dtype=np.float64)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=len(u))
    columns = [np.broadcast_to(u[:, None], (len(u), n_slots))]
    columns.append(np.broadcast_to(np.sin(2.0 * np.pi * t / WEEK), (len(u), n_slots)))
    columns.append(np.broadcast_to(np.cos(2.0 * np.pi * t / WEEK), (len(u), n_slots)))
    for k in range(3, n_features):
        period = WEEK * (k - 1)
        columns.append(0.5 * u[:, None] + np.sin(2.0 * np.pi * t[None, :] / period + phase[:, None]))
    return np.stack(columns[:n_features], axis=-1).astype(np.float64)


def _propensity(config: SynthConfig, u: np.ndarray) -> np.ndarray:
    """1 - pi per cell, (N, T)."""
    road = _mean_one(np.exp(config.road_concentration * u))
    day = np.arange(WEEK)
    weekly = _mean_one(np.exp(config.weekly_amplitude * np.cos(2.0 * np.pi * day / WEEK)))
    slots = np.arange(config.n_slots) % WEEK
    propensity = (1.0 - config.pi) * road[:, None] * weekly[slots][None, :]
    capped = propensity > MAX_PROPENSITY
    if capped.any():
        logger.debug("crash propensity capped at %.2f on %d cells", MAX_PROPENSITY, int(capped.sum()))
    return np.minimum(propensity, MAX_PROPENSITY)


def synth_generate(config: SynthConfig) -> SyntheticDataset:
    """
    Generate a graph, features, risk scores and the true parameters.

    Args:
        config: Generator settings; the output is a pure function of it.

    Returns:
        The dataset with its generating parameters and zero fractions.
    """
    rng = np.random.default_rng(config.seed)
    n, t = config.n_roads, config.n_slots

    # chain keeps the graph connected; random chords add density
    edges = {(i, i + 1) for i in range(n - 1)}
    for i in range(n):
        for j in range(i + 2, n):
            if rng.random() < config.edge_density:
                edges.add((i, j))
    graph = build_graph(n, sorted(edges))

    u = _road_attribute(graph, config.smoothing_passes, rng)
    features = _features(u, t, config.n_features, rng)

    slots = np.arange(t, dtype=np.float64)
    log_mu = (
        np.log(config.mu)
        + config.road_effect * u[:, None]
        - 0.5 * config.road_effect ** 2
        + config.seasonal_amplitude * np.sin(2.0 * np.pi * slots / WEEK)[None, :]
    )
    true = TrueParams(
        pi=1.0 - _propensity(config, u),
        mu=np.exp(log_mu),
        phi=np.full((n, t), config.phi),
        rho=np.full((n, t), config.rho),
    )

    risk = np.zeros((n, t))
    for i in range(n):
        for s in range(t):
            seed = np.random.SeedSequence([config.seed, i, s])
            risk[i, s] = sample_zitd(true.cell(i, s), 1, seed)[0]

    dataset = Dataset(graph, FeatureTensor(features), RiskTensor(risk))
    zero_fraction = dataset.risk.zero_fraction()
    expected_zero = float(true.zero_mass().mean())
    logger.info(
        "synthetic data: %d roads, %d slots, %d edges, zero fraction %.4f (expected %.4f)",
        n, t, len(graph.edges), zero_fraction, expected_zero,
    )
    return SyntheticDataset(dataset, true, zero_fraction, expected_zero)
