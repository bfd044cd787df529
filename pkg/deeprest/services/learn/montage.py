"""
Atom montages for visual inspection of learned transforms
"""
import math
from typing import Tuple

import numpy as np

from deeprest.database.schemas import LayerConfig
from deeprest.services.model import TransformLayer
from deeprest.services.tensorpatch import Array

SEPARATOR = 255.0


def atom_shape(cfg: LayerConfig) -> Tuple[int, int]:
    """
    Display shape of one atom: a x b for 2D patches, else the smallest
    square that holds the whole atom (zero padded)
    """
    if cfg.patch.c == 1:
        return cfg.patch.a, cfg.patch.b
    side = math.isqrt(cfg.filters - 1) + 1 if cfg.filters > 1 else 1
    return side, side


def _normalize(atom: np.ndarray) -> Array:
    low, high = float(atom.min()), float(atom.max())
    # flat up to rounding
    if high - low <= 1e-12 * max(1.0, abs(high)):
        return np.full(atom.shape, 127.5)
    return (atom - low) * (255.0 / (high - low))


def atom_montage(layer: TransformLayer, cfg: LayerConfig) -> Array:
    """
    Tile every row of Omega as a small image, each min-max scaled to [0, 255],
    separated by 1-pixel lines; tiles fill a near-square grid row by row
    """
    th, tw = atom_shape(cfg)
    count = layer.filters
    cols = math.isqrt(count - 1) + 1 if count > 1 else 1
    rows = -(-count // cols)
    montage = np.full((rows * (th + 1) - 1, cols * (tw + 1) - 1), SEPARATOR)
    for k in range(count):
        tile = np.zeros(th * tw)
        tile[:cfg.filters] = _normalize(layer.omega[k])
        r, c = divmod(k, cols)
        montage[r * (th + 1):r * (th + 1) + th, c * (tw + 1):c * (tw + 1) + tw] = tile.reshape(th, tw)
    return montage
