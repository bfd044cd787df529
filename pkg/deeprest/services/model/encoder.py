"""
Forward (encoder) and backward (decoder) passes of the multi-layer model

Encoder, per layer l:
    Z^l = H_eta(Omega^l P^l(R^{l-1})),  R^l = Omega^l P^l(R^{l-1}) - Z^l
with R^l reduced to the layer's retained maps before feeding layer l+1.
The last layer computes Z^L only.

Decoder, from the top:
    P^L(R^{L-1}) = Omega^L^T Z^L
    P^j(R^{j-1}) = Omega^j^T Z^j + Omega^j^T R^j
each patch matrix averaged back into a volume, dropped maps restored as zeros.
"""
from typing import Optional, Sequence, Tuple

import numpy as np

from deeprest.core.errors import InvalidArgumentError
from deeprest.database.schemas import LayerConfig
from deeprest.services.model.types import DeepRestModel, EncodedImage, TransformLayer
from deeprest.services.tensorpatch import (
    Array,
    aggregate_patches,
    as_volume,
    extract_patches,
    rows_to_volume,
    volume_to_rows,
)
from deeprest.services.xformcore import hard_threshold


def forward_layer(
    vol: np.ndarray,
    layer: TransformLayer,
    cfg: LayerConfig,
    is_last: bool,
) -> Tuple[Array, Optional[Array]]:
    """
    Apply one layer to its input volume

    Returns:
        (Z, R_next): coefficient maps and, unless is_last, the full-depth
        residual volume whose map i is row i of Omega P - Z
    """
    vol = as_volume(vol)
    if vol.shape[0] != cfg.patch.c:
        raise InvalidArgumentError(
            f"input depth {vol.shape[0]} does not match patch depth {cfg.patch.c}"
        )
    if layer.filters != cfg.filters:
        raise InvalidArgumentError(
            f"transform has {layer.filters} rows but the patch length is {cfg.filters}"
        )
    transformed = layer.omega @ extract_patches(vol, cfg.patch)
    coeffs = hard_threshold(transformed, cfg.eta)
    if is_last:
        return coeffs, None
    _, height, width = vol.shape
    return coeffs, rows_to_volume(transformed - coeffs, height, width)


def map_energies(residuals: np.ndarray) -> Array:
    """
    Sum of squares of every map in a residual volume
    """
    residuals = as_volume(residuals)
    return np.einsum("dij,dij->d", residuals, residuals)


def downsample_residuals(residuals: np.ndarray, keep: int) -> Tuple[Array, Tuple[int, ...]]:
    """
    Keep the `keep` highest-energy maps (ties go to the lower index)

    Returns:
        (kept volume in ascending index order, retained indices)
    """
    residuals = as_volume(residuals)
    depth = residuals.shape[0]
    if not 1 <= keep <= depth:
        raise InvalidArgumentError(f"keep must be in [1, {depth}], got {keep}")
    # stable sort on negated energy keeps equal maps in index order
    order = np.argsort(-map_energies(residuals), kind="stable")
    retained = tuple(sorted(int(i) for i in order[:keep]))
    return residuals[list(retained)], retained


def select_retained(residuals: np.ndarray, retained: Sequence[int]) -> Array:
    """
    Reuse a stored retained-index list instead of re-ranking energies
    """
    residuals = as_volume(residuals)
    return residuals[list(retained)]


def reinflate(kept: np.ndarray, retained: Sequence[int], depth: int) -> Array:
    """
    Put retained maps back at their indices; all other maps are zero
    """
    kept = as_volume(kept)
    if kept.shape[0] != len(retained):
        raise InvalidArgumentError(
            f"{kept.shape[0]} maps supplied for {len(retained)} retained indices"
        )
    full = np.zeros((depth,) + kept.shape[1:], dtype=np.float64)
    full[list(retained)] = kept
    return full


def _check_image(img: np.ndarray, model: DeepRestModel) -> Array:
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise InvalidArgumentError(f"expected a 2D image, got shape {img.shape}")
    if img.shape != model.image_dims:
        raise InvalidArgumentError(
            f"image is {img.shape[0]}x{img.shape[1]} but the model expects "
            f"{model.image_dims[0]}x{model.image_dims[1]}"
        )
    return img


def encode(img: np.ndarray, model: DeepRestModel) -> EncodedImage:
    """
    Run the encoder; stored retained lists decide which residual maps move up
    """
    vol = as_volume(_check_image(img, model))
    coeffs = []
    dims = []
    for index, (layer, cfg) in enumerate(zip(model.layers, model.configs), start=1):
        is_last = index == model.depth
        dims.append(tuple(int(d) for d in vol.shape))
        z, residuals = forward_layer(vol, layer, cfg, is_last)
        coeffs.append(z)
        if not is_last:
            vol = select_retained(residuals, layer.retained)
    return EncodedImage(coeffs=tuple(coeffs), dims=tuple(dims))


def _check_encoding(enc: EncodedImage, model: DeepRestModel) -> None:
    if len(enc.coeffs) != model.depth or len(enc.dims) != model.depth:
        raise InvalidArgumentError(
            f"encoding has {len(enc.coeffs)} layers, model has {model.depth}"
        )
    height, width = model.image_dims
    for index, (z, dims, cfg) in enumerate(zip(enc.coeffs, enc.dims, model.configs), start=1):
        if tuple(dims) != (cfg.patch.c, height, width):
            raise InvalidArgumentError(
                f"layer {index} dims {tuple(dims)} do not match {(cfg.patch.c, height, width)}"
            )
        if np.shape(z) != (cfg.filters, height * width):
            raise InvalidArgumentError(
                f"layer {index} coefficients have shape {np.shape(z)}, "
                f"expected {(cfg.filters, height * width)}"
            )


def decode(enc: EncodedImage, model: DeepRestModel) -> Array:
    """
    Reconstruct the image from the coefficient maps of every layer
    """
    _check_encoding(enc, model)
    residual_rows: Optional[Array] = None
    vol: Optional[Array] = None
    for index in range(model.depth, 0, -1):
        layer = model.layers[index - 1]
        cfg = model.configs[index - 1]
        z = np.asarray(enc.coeffs[index - 1], dtype=np.float64)
        rhs = z if residual_rows is None else z + residual_rows
        patches = layer.omega.T @ rhs
        vol = aggregate_patches(patches, enc.dims[index - 1], cfg.patch)
        if index > 1:
            below = model.layers[index - 2]
            full = reinflate(vol, below.retained, below.filters)
            # R^{j} in row form is the 1x1xm patch matrix of the restored volume
            residual_rows = volume_to_rows(full)
    return vol[0]
