"""Spatiotemporal encoder, parameter decoders and the assembled network."""

from zitd_gnn.model.decoder import (
    DecoderWeights,
    EpsilonConfig,
    ZitdField,
    decode,
    decode_values,
)
from zitd_gnn.model.encoder import EncoderConfig, StEncoder, encode
from zitd_gnn.model.gat import GatHead, GatLayer, GatWeights, gat_attention, gat_layer
from zitd_gnn.model.gru import GruWeights, gru_cell, gru_encode
from zitd_gnn.model.network import StzitdNetwork

__all__ = [
    "GruWeights",
    "gru_cell",
    "gru_encode",
    "GatHead",
    "GatLayer",
    "GatWeights",
    "gat_attention",
    "gat_layer",
    "EncoderConfig",
    "StEncoder",
    "encode",
    "DecoderWeights",
    "EpsilonConfig",
    "ZitdField",
    "decode",
    "decode_values",
    "StzitdNetwork",
]
