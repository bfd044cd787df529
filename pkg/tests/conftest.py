"""
Shared fixtures: seeded RNG, synthetic images, temporary data directory, test client
"""
import numpy as np
import pytest
from fastapi.testclient import TestClient

from deeprest.core.config import get_settings
from deeprest.database import cache


@pytest.fixture
def rng():
    """Seeded generator so random inputs are repeatable"""
    return np.random.default_rng(1234)


@pytest.fixture
def smooth_image():
    """32x32 image with gradients, an edge and a bright square (values in [0, 255])"""
    y, x = np.mgrid[0:32, 0:32].astype(np.float64)
    img = 60.0 + 3.0 * x + 1.5 * y
    img[:, 20:] += 40.0
    img[8:14, 6:12] = 230.0
    return np.clip(img, 0.0, 255.0)


@pytest.fixture
def temp_data_dir(tmp_path, monkeypatch):
    """Point Settings.data_dir at a temporary directory and reset the model cache"""
    data_dir = tmp_path / "data"
    monkeypatch.setenv("DEEPREST_DATA_DIR", str(data_dir))
    get_settings.cache_clear()
    monkeypatch.setattr(cache, "_model_cache", None)
    yield data_dir
    get_settings.cache_clear()


@pytest.fixture
def client(temp_data_dir):
    """Test client"""
    from deeprest.main import app
    return TestClient(app)
