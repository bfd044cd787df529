"""
Greedy layer-wise learning and atom display
"""

from deeprest.services.learn.training import (
    initial_transform,
    model_cost,
    train_layer,
    train_model,
)
from deeprest.services.learn.montage import atom_montage, atom_shape

__all__ = [
    "initial_transform",
    "model_cost",
    "train_layer",
    "train_model",
    "atom_montage",
    "atom_shape",
]
