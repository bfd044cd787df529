"""
Denoising service module
"""

from deeprest.services.denoiser.metrics import add_gaussian_noise, psnr
from deeprest.services.denoiser.pipeline import (
    configs_for,
    default_depths,
    default_layer_configs,
    denoise_multipass,
    denoise_single_pass,
    run_denoise_experiment,
)
from deeprest.services.denoiser.table import denoise_table, table_cells

__all__ = [
    "add_gaussian_noise",
    "psnr",
    "configs_for",
    "default_depths",
    "default_layer_configs",
    "denoise_multipass",
    "denoise_single_pass",
    "run_denoise_experiment",
    "denoise_table",
    "table_cells",
]
