"""
Full-size denoising checks on the standard test images

Slow (minutes per case). Skipped unless DEEPREST_IMAGE_DIR holds barbara, boat,
man, couple and puffins as .pgm or .png.
"""
import os
from pathlib import Path

import numpy as np
import pytest

from deeprest.database.images import load_image
from deeprest.database.schemas import DenoiseConfig
from deeprest.services.denoiser import run_denoise_experiment

pytestmark = pytest.mark.slow

IMAGE_DIR = os.environ.get("DEEPREST_IMAGE_DIR")


def _image(name):
    if not IMAGE_DIR:
        pytest.skip("DEEPREST_IMAGE_DIR is not set")
    for suffix in (".pgm", ".png"):
        path = Path(IMAGE_DIR) / f"{name}{suffix}"
        if path.is_file():
            return load_image(path)
    pytest.skip(f"{name} not found in {IMAGE_DIR}")


IMAGES = ["barbara", "boat", "man", "couple", "puffins"]


@pytest.mark.parametrize("name,sigma,layers,expected,tol", [
    ("barbara", 20.0, 3, 30.91, 0.3),
    ("man", 30.0, 5, 28.01, 0.3),
    ("couple", 10.0, 5, 33.64, 0.3),
    ("barbara", 100.0, 3, 22.71, 0.4),
])
def test_reference_psnr(name, sigma, layers, expected, tol):
    """Test single-pass PSNR lands near the reference value"""
    _, _, report = run_denoise_experiment(_image(name), DenoiseConfig(sigma=sigma, layers=layers))
    assert report.output_psnr == pytest.approx(expected, abs=tol)


def test_one_layer_high_noise():
    """Test a single layer still clears 22 dB on barbara at sigma 100"""
    _, _, report = run_denoise_experiment(_image("barbara"), DenoiseConfig(sigma=100.0, layers=1))
    assert report.output_psnr > 22.0


@pytest.mark.parametrize("sigma", [10.0, 20.0, 30.0])
@pytest.mark.parametrize("name", IMAGES)
def test_three_layers_beat_one(name, sigma):
    """Test L=3 beats L=1 and L=5 does not fall behind L=3"""
    clean = _image(name)
    results = {
        layers: run_denoise_experiment(clean, DenoiseConfig(sigma=sigma, layers=layers))[2].output_psnr
        for layers in (1, 3, 5)
    }
    assert results[3] > results[1]
    assert results[5] >= results[3] - 0.05


@pytest.mark.parametrize("name", IMAGES)
def test_two_pass_beats_one_pass(name):
    """Test the two-pass scheme beats one pass at sigma 100"""
    clean = _image(name)
    _, _, single = run_denoise_experiment(clean, DenoiseConfig(sigma=100.0, layers=5))
    _, _, double = run_denoise_experiment(clean, DenoiseConfig(sigma=100.0, layers=5, passes=2))
    assert double.output_psnr > single.output_psnr
    if name == "puffins":
        assert double.output_psnr - single.output_psnr == pytest.approx(0.37, abs=0.2)


def test_full_size_determinism():
    """Test repeated runs with one seed give bit-identical output"""
    clean = _image("barbara")
    cfg = DenoiseConfig(sigma=20.0, layers=3, seed=11)
    _, first, _ = run_denoise_experiment(clean, cfg)
    _, second, _ = run_denoise_experiment(clean, cfg)
    np.testing.assert_array_equal(first, second)
