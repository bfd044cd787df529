"""
Multi-layer transform model: containers, encoder and decoder
"""

from deeprest.services.model.types import (
    DeepRestModel,
    EncodedImage,
    TransformLayer,
    validate_layer_chain,
)
from deeprest.services.model.encoder import (
    decode,
    downsample_residuals,
    encode,
    forward_layer,
    map_energies,
    reinflate,
    select_retained,
)

__all__ = [
    "DeepRestModel",
    "EncodedImage",
    "TransformLayer",
    "validate_layer_chain",
    "decode",
    "downsample_residuals",
    "encode",
    "forward_layer",
    "map_energies",
    "reinflate",
    "select_retained",
]
