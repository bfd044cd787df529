"""
Noise simulation and image quality
"""
import math

import numpy as np

from deeprest.core.errors import InvalidArgumentError
from deeprest.services.tensorpatch import Array

PEAK = 255.0


def add_gaussian_noise(img: np.ndarray, sigma: float, seed: int) -> Array:
    """
    Add i.i.d. N(0, sigma^2) noise from a seeded generator (no clipping)
    """
    if sigma < 0:
        raise InvalidArgumentError(f"sigma must be non-negative, got {sigma}")
    img = np.array(img, dtype=np.float64)
    if sigma == 0:
        return img
    rng = np.random.default_rng(seed)
    return img + sigma * rng.standard_normal(img.shape)


def psnr(ref: np.ndarray, test: np.ndarray) -> float:
    """
    10 log10(255^2 * H * W / ||ref - test||_F^2) in dB; inf when identical
    """
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if ref.shape != test.shape:
        raise InvalidArgumentError(f"image shapes differ: {ref.shape} vs {test.shape}")
    diff = ref - test
    err = float(np.sum(diff * diff))
    if err == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK * ref.size / err)
