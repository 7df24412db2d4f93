"""
The full network: encoder and decoder sharing one Xavier-initialised state.
"""

from dataclasses import asdict

import numpy as np

from zitd_gnn.constants import DEFAULT_HORIZON, DEFAULT_SEED
from zitd_gnn.core.module import Module
from zitd_gnn.data.graph import RoadGraph
from zitd_gnn.model.decoder import DecoderWeights, EpsilonConfig, ZitdField, decode
from zitd_gnn.model.encoder import EncoderConfig, StEncoder


class StzitdNetwork(Module):
    """
    Encoder followed by the four parameter decoders.

    Parameters are named by dotted path (``encoder.gru.W_r``,
    ``decoder.b_rho``) and those names key checkpoints.

    Args:
        n_features: d.
        horizon: p.
        encoder_config: Encoder sizes.
        eps_config: Decoder floors.
        seed: Seed of the initialisation stream.
    """

    def __init__(
        self,
        n_features: int,
        horizon: int = DEFAULT_HORIZON,
        encoder_config: EncoderConfig = EncoderConfig(),
        eps_config: EpsilonConfig = EpsilonConfig(),
        seed: int = DEFAULT_SEED,
    ):
        rng = np.random.default_rng(seed)
        self.n_features = n_features
        self.horizon = horizon
        self.encoder_config = encoder_config
        self.eps_config = eps_config
        self.encoder = StEncoder(n_features, encoder_config, rng)
        self.decoder = DecoderWeights(encoder_config.spatial_hidden, horizon, rng)
        for name, param in self.named_parameters():
            param.name = name

    def forward(
        self,
        x_window,
        y_window,
        graph: RoadGraph,
        rng: np.random.Generator | None = None,
    ) -> ZitdField:
        z = self.encoder(x_window, y_window, graph, rng)
        return decode(z, self.decoder, self.eps_config)

    def n_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def describe(self) -> dict:
        """Constructor arguments needed to rebuild this architecture."""
        return {
            "n_features": self.n_features,
            "horizon": self.horizon,
            "encoder": asdict(self.encoder_config),
            "epsilon": self.eps_config.epsilon,
        }

    @classmethod
    def from_description(cls, meta: dict, seed: int = DEFAULT_SEED) -> "StzitdNetwork":
        return cls(
            n_features=int(meta["n_features"]),
            horizon=int(meta["horizon"]),
            encoder_config=EncoderConfig(**meta["encoder"]),
            eps_config=EpsilonConfig(float(meta["epsilon"])),
            seed=seed,
        )
