"""Shared fixtures: tiny graphs, datasets and networks."""

import numpy as np
import pytest

from zitd_gnn.data import build_graph, synth_generate, SynthConfig
from zitd_gnn.model import EncoderConfig, StzitdNetwork


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def path_graph():
    """Five roads in a line plus an isolated sixth road."""
    return build_graph(6, [(0, 1), (1, 2), (2, 3), (3, 4)])


@pytest.fixture
def small_encoder():
    return EncoderConfig(hidden=4, spatial_hidden=3, heads=2)


@pytest.fixture
def tiny_synthetic():
    return synth_generate(SynthConfig(n_roads=8, n_slots=40, n_features=3, pi=0.6, seed=5))


@pytest.fixture
def toy_network(small_encoder):
    return StzitdNetwork(n_features=2, horizon=2, encoder_config=small_encoder, seed=3)
