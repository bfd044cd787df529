"""
Denoising by learning a multi-layer model on the noisy image itself

Single pass: train on the noisy image, encode, decode.
Multi-pass: feed each pass's output to a fresh pass with its own sigma estimate.
"""
import time
from typing import List, Optional, Sequence, Tuple

import numpy as np

from deeprest.core.errors import InvalidArgumentError
from deeprest.core.logging import get_logger
from deeprest.database.schemas import (
    DEFAULT_DEPTHS,
    HIGH_NOISE_DEPTHS,
    HIGH_NOISE_SIGMA,
    DenoiseConfig,
    DenoiseReport,
    LayerConfig,
    PassReport,
    PatchSpec,
)
from deeprest.services.denoiser.metrics import add_gaussian_noise, psnr
from deeprest.services.learn import train_model
from deeprest.services.model import decode, encode
from deeprest.services.tensorpatch import Array

logger = get_logger("denoise")


def default_depths(sigma: float, layers: int) -> List[int]:
    """
    Default depths of layers 2..L at a noise level
    """
    schedule = HIGH_NOISE_DEPTHS if sigma >= HIGH_NOISE_SIGMA else DEFAULT_DEPTHS
    return list(schedule[:max(layers - 1, 0)])


def default_layer_configs(
    sigma: float,
    layers: int,
    patch: int = 9,
    depths: Optional[Sequence[int]] = None,
    eta_mult1: float = 3.3,
    eta_mult2: float = 3.1,
    iters: int = 100,
) -> List[LayerConfig]:
    """
    Layer schedule: patch x patch in layer 1, then 1x1xc_l layers whose
    depths follow `depths`; thresholds eta_mult1*sigma then eta_mult2*sigma
    """
    if layers < 1:
        raise InvalidArgumentError(f"layers must be at least 1, got {layers}")
    depths = list(depths or [])
    if len(depths) < layers - 1:
        raise InvalidArgumentError(f"{layers} layers need {layers - 1} depths, got {len(depths)}")
    configs = []
    for index in range(layers):
        if index == 0:
            spec = PatchSpec(a=patch, b=patch, c=1)
            eta = eta_mult1 * sigma
        else:
            spec = PatchSpec(a=1, b=1, c=depths[index - 1])
            eta = eta_mult2 * sigma
        keep = depths[index] if index < layers - 1 else None
        configs.append(LayerConfig(patch=spec, eta=eta, keep=keep, iters=iters))
    return configs


def configs_for(cfg: DenoiseConfig, sigma: Optional[float] = None) -> List[LayerConfig]:
    """
    Layer schedule of a denoising config, thresholds set from `sigma`
    (defaults to cfg.sigma); depths always follow the true noise level
    """
    return default_layer_configs(
        sigma=cfg.sigma if sigma is None else sigma,
        layers=cfg.layers,
        patch=cfg.patch,
        depths=cfg.resolved_depths(),
        eta_mult1=cfg.eta_mult1,
        eta_mult2=cfg.eta_mult2,
        iters=cfg.iters,
    )


def _run_pass(
    noisy: np.ndarray,
    configs: List[LayerConfig],
    index: int,
    sigma: float,
    clean: Optional[np.ndarray],
) -> Tuple[Array, PassReport]:
    started = time.perf_counter()
    model, _ = train_model(noisy, configs)
    enc = encode(noisy, model)
    denoised = decode(enc, model)
    result = PassReport(
        index=index,
        sigma=sigma,
        psnr=psnr(clean, denoised) if clean is not None else None,
        sparsity=list(enc.sparsity()),
        seconds=time.perf_counter() - started,
    )
    logger.info(
        f"[DENOISE] pass={index} | sigma={sigma:g} | layers={len(configs)} "
        f"| psnr={result.psnr if result.psnr is not None else 'n/a'} | duration={result.seconds:.2f}s"
    )
    return denoised, result


def denoise_single_pass(
    noisy: np.ndarray,
    cfg: DenoiseConfig,
    clean: Optional[np.ndarray] = None,
) -> Tuple[Array, DenoiseReport]:
    """
    Learn a model from the noisy image and return its decoded encoding

    Args:
        noisy: noisy image
        cfg: denoising protocol (cfg.sigma sets the thresholds)
        clean: optional reference used only for reporting PSNR
    """
    noisy = np.asarray(noisy, dtype=np.float64)
    started = time.perf_counter()
    denoised, result = _run_pass(noisy, configs_for(cfg), 1, cfg.sigma, clean)
    report = DenoiseReport(
        sigma=cfg.sigma,
        layers=cfg.layers,
        input_psnr=psnr(clean, noisy) if clean is not None else None,
        passes=[result],
        seconds=time.perf_counter() - started,
    )
    return denoised, report


def denoise_multipass(
    noisy: np.ndarray,
    cfg: DenoiseConfig,
    clean: Optional[np.ndarray] = None,
) -> Tuple[Array, DenoiseReport]:
    """
    Stack passes; pass k uses the k-th sigma estimate for its thresholds
    and denoises the output of pass k-1
    """
    noisy = np.asarray(noisy, dtype=np.float64)
    started = time.perf_counter()
    current = noisy
    results = []
    for index, sigma in enumerate(cfg.resolved_pass_sigmas(), start=1):
        current, result = _run_pass(current, configs_for(cfg, sigma), index, sigma, clean)
        results.append(result)
    report = DenoiseReport(
        sigma=cfg.sigma,
        layers=cfg.layers,
        input_psnr=psnr(clean, noisy) if clean is not None else None,
        passes=results,
        seconds=time.perf_counter() - started,
    )
    return current, report


def run_denoise_experiment(clean: np.ndarray, cfg: DenoiseConfig) -> Tuple[Array, Array, DenoiseReport]:
    """
    Simulate noise at cfg.sigma with cfg.seed, then denoise

    Returns:
        (noisy, denoised, report)
    """
    noisy = add_gaussian_noise(clean, cfg.sigma, cfg.seed)
    denoised, report = denoise_multipass(noisy, cfg, clean=clean)
    return noisy, denoised, report
