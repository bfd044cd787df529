"""
Batch denoising grid: images x noise levels x layer counts

Cells are ordered images outer, sigmas middle, layer counts inner; cell i
draws its noise with seed base_seed + i.
"""
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Sequence, Tuple

import numpy as np

from deeprest.core.logging import get_logger
from deeprest.database.schemas import DenoiseConfig, TableCell, TableReport
from deeprest.services.denoiser.metrics import add_gaussian_noise, psnr
from deeprest.services.denoiser.pipeline import denoise_multipass

logger = get_logger("table")


def _run_cell(name: str, clean: np.ndarray, cfg: DenoiseConfig) -> TableCell:
    started = time.perf_counter()
    noisy = add_gaussian_noise(clean, cfg.sigma, cfg.seed)
    denoised, _ = denoise_multipass(noisy, cfg)
    return TableCell(
        image=name,
        sigma=cfg.sigma,
        layers=cfg.layers,
        seed=cfg.seed,
        input_psnr=psnr(clean, noisy),
        psnr=psnr(clean, denoised),
        seconds=time.perf_counter() - started,
    )


def table_cells(
    images: Dict[str, np.ndarray],
    sigmas: Sequence[float],
    layers: Sequence[int],
    base: DenoiseConfig,
) -> List[Tuple[str, DenoiseConfig]]:
    """
    Per-cell configs in table order; `base` supplies everything but sigma,
    layers and seed (its depth and pass schedules are re-derived per sigma)
    """
    cells = []
    for name in images:
        for sigma in sigmas:
            for count in layers:
                cfg = DenoiseConfig.model_validate({
                    **base.model_dump(),
                    "sigma": float(sigma),
                    "layers": int(count),
                    "seed": base.seed + len(cells),
                })
                cells.append((name, cfg))
    return cells


def denoise_table(
    images: Dict[str, np.ndarray],
    sigmas: Sequence[float],
    layers: Sequence[int],
    base: DenoiseConfig,
    workers: int = 1,
) -> TableReport:
    """
    Fill the grid, optionally across a process pool; results are
    independent of the worker count
    """
    cells = table_cells(images, sigmas, layers, base)
    logger.info(f"[TABLE] cells={len(cells)} | workers={workers}")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_cell, name, images[name], cfg) for name, cfg in cells]
            results = [future.result() for future in futures]
    else:
        results = [_run_cell(name, images[name], cfg) for name, cfg in cells]
    for cell in results:
        logger.info(
            f"[TABLE] image={cell.image} | sigma={cell.sigma:g} | L={cell.layers} "
            f"| psnr={cell.psnr:.2f} | duration={cell.seconds:.2f}s"
        )
    return TableReport(sigmas=[float(s) for s in sigmas], layers=[int(n) for n in layers], cells=results)
