"""
Greedy layer-wise training

Each layer solves
    min ||Omega P - Z||_F^2 + eta^2 ||Z||_0  s.t.  Omega^T Omega = I
by alternating the thresholding and Procrustes updates, with all earlier
layers frozen. Layer 1 starts from the 2D DCT, later layers from identity.
"""
import time
from typing import List, Literal, Sequence, Tuple

import numpy as np

from deeprest.core.config import get_settings
from deeprest.core.errors import InvalidArgumentError
from deeprest.core.logging import get_logger
from deeprest.database.schemas import LayerConfig, LayerReport, TrainReport
from deeprest.services.model import (
    DeepRestModel,
    TransformLayer,
    downsample_residuals,
    forward_layer,
    select_retained,
    validate_layer_chain,
)
from deeprest.services.tensorpatch import Array, as_volume, extract_patches
from deeprest.services.xformcore import (
    dct2_init,
    identity_init,
    layer_cost,
    procrustes_update,
    sparse_code_layer,
    unitarity_error,
)

logger = get_logger("learn")

InitPolicy = Literal["dct", "identity"]


def train_layer(
    patches: np.ndarray,
    init: np.ndarray,
    eta: float,
    iters: int,
) -> Tuple[Array, Array, List[float]]:
    """
    Alternate Z- and Omega-updates for a fixed number of iterations

    Args:
        patches: patch matrix P (m x N)
        init: initial unitary transform (m x m)
        eta: threshold
        iters: number of alternations

    Returns:
        (Omega, Z, costs) where costs[t] is the layer cost after the
        Omega-update of alternation t
    """
    patches = np.asarray(patches, dtype=np.float64)
    omega = np.asarray(init, dtype=np.float64)
    if omega.shape != (patches.shape[0], patches.shape[0]):
        raise InvalidArgumentError(
            f"initial transform {omega.shape} does not match patch length {patches.shape[0]}"
        )
    if iters < 1:
        raise InvalidArgumentError(f"iters must be at least 1, got {iters}")

    costs: List[float] = []
    coeffs = None
    for it in range(1, iters + 1):
        coeffs = sparse_code_layer(omega, patches, eta)
        omega = procrustes_update(patches, coeffs)
        costs.append(layer_cost(omega, patches, coeffs, eta))
        logger.debug(f"[TRAIN] iter={it} | cost={costs[-1]:.6e}")
    return omega, coeffs, costs


def initial_transform(cfg: LayerConfig, layer_index: int, policy: InitPolicy) -> Array:
    """
    2D DCT for a depth-1 first layer under the "dct" policy, identity otherwise
    """
    if policy not in ("dct", "identity"):
        raise InvalidArgumentError(f"unknown init policy: {policy}")
    if policy == "dct" and layer_index == 1 and cfg.patch.c == 1:
        return dct2_init(cfg.patch.a, cfg.patch.b)
    return identity_init(cfg.filters)


def train_model(
    img: np.ndarray,
    configs: Sequence[LayerConfig],
    init_policy: InitPolicy = "dct",
) -> Tuple[DeepRestModel, TrainReport]:
    """
    Learn every layer in turn from a single image

    Residuals of a trained layer are computed with its final transform and
    freshly thresholded coefficients (exactly what the encoder produces), then
    reduced to the `keep` highest-energy maps for the next layer.
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise InvalidArgumentError(f"expected a 2D image, got shape {img.shape}")
    configs = list(configs)
    validate_layer_chain(configs)
    tol = get_settings().unitarity_tol

    started = time.perf_counter()
    report = TrainReport(image_dims=img.shape)
    layers: List[TransformLayer] = []
    vol = as_volume(img)
    penalty = 0.0

    for index, cfg in enumerate(configs, start=1):
        layer_started = time.perf_counter()
        is_last = index == len(configs)
        patches = extract_patches(vol, cfg.patch)
        init = initial_transform(cfg, index, init_policy)
        initial_cost = layer_cost(init, patches, sparse_code_layer(init, patches, cfg.eta), cfg.eta)

        omega, _, costs = train_layer(patches, init, cfg.eta, cfg.iters)
        error = unitarity_error(omega)
        if error > tol:
            logger.warning(f"[TRAIN] layer={index} | unitarity error {error:.3e} exceeds {tol:.0e}")

        # objective of the model truncated after this layer
        coeffs, residuals = forward_layer(vol, TransformLayer(omega=omega), cfg, is_last=False)
        penalty += cfg.eta ** 2 * np.count_nonzero(coeffs)
        report.cost_after_layer.append(penalty + float(np.sum(residuals ** 2)))
        retained = None
        if not is_last:
            vol, retained = downsample_residuals(residuals, cfg.keep)
        layer = TransformLayer(omega=omega, retained=retained)
        layers.append(layer)

        seconds = time.perf_counter() - layer_started
        sparsity = float(np.count_nonzero(coeffs)) / coeffs.size
        report.layers.append(LayerReport(
            layer=index,
            filters=cfg.filters,
            patch=cfg.patch,
            eta=cfg.eta,
            iters=cfg.iters,
            initial_cost=initial_cost,
            cost_trajectory=costs,
            sparsity=sparsity,
            retained=list(retained) if retained is not None else None,
            unitarity_error=error,
            seconds=seconds,
        ))
        logger.info(
            f"[TRAIN] layer={index} | filters={cfg.filters} | eta={cfg.eta:g} | iters={cfg.iters} "
            f"| cost={costs[-1]:.6e} | sparsity={sparsity:.4f} | duration={seconds:.2f}s"
        )

    report.seconds = time.perf_counter() - started
    model = DeepRestModel(layers=tuple(layers), configs=tuple(configs), image_dims=img.shape)
    return model, report


def model_cost(img: np.ndarray, model: DeepRestModel) -> float:
    """
    Multi-layer objective on an image:
    ||Omega^L P^L(R^{L-1}) - Z^L||_F^2 + sum_l eta_l^2 ||Z^l||_0
    with each R^l reduced to the model's retained maps
    """
    img = np.asarray(img, dtype=np.float64)
    if img.shape != model.image_dims:
        raise InvalidArgumentError(
            f"image is {img.shape} but the model expects {model.image_dims}"
        )
    vol = as_volume(img)
    total = 0.0
    for index, (layer, cfg) in enumerate(zip(model.layers, model.configs), start=1):
        coeffs, residuals = forward_layer(vol, layer, cfg, is_last=False)
        total += cfg.eta ** 2 * np.count_nonzero(coeffs)
        if index == model.depth:
            total += float(np.sum(residuals ** 2))
        else:
            vol = select_retained(residuals, layer.retained)
    return float(total)
