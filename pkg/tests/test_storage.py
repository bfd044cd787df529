"""
Model container, encoding files, stored models and manifests
"""
import json
import logging
import struct

import numpy as np
import pytest
from scipy.stats import ortho_group

from deeprest import __version__
from deeprest.core.config import get_settings
from deeprest.core.errors import ModelFormatError, UnitarityError
from deeprest.database.cache import TTLCache, get_model_cache
from deeprest.database import storage
from deeprest.database.schemas import LayerConfig, PatchSpec, TrainReport
from deeprest.services.learn import train_model
from deeprest.services.model import DeepRestModel, TransformLayer, decode, encode


def _model(first_omega=None):
    configs = (
        LayerConfig(patch=PatchSpec(a=2, b=2, c=1), eta=3.5, keep=3, iters=7),
        LayerConfig(patch=PatchSpec(a=1, b=1, c=3), eta=2.25, iters=9),
    )
    layers = (
        TransformLayer(omega=ortho_group.rvs(4, random_state=1) if first_omega is None else first_omega,
                       retained=(0, 2, 3)),
        TransformLayer(omega=ortho_group.rvs(3, random_state=2)),
    )
    return DeepRestModel(layers=layers, configs=configs, image_dims=(6, 8))


def test_container_roundtrip_is_byte_identical():
    """Test save -> load -> save gives the same bytes and the same model"""
    model = _model()
    data = storage.serialize_model(model)
    loaded = storage.deserialize_model(data)
    assert storage.serialize_model(loaded) == data
    assert loaded.image_dims == (6, 8)
    assert loaded.configs == model.configs
    assert loaded.layers[0].retained == (0, 2, 3)
    assert loaded.layers[1].retained is None
    for a, b in zip(loaded.layers, model.layers):
        np.testing.assert_array_equal(a.omega, b.omega)


def test_container_header():
    """Test magic, version and layer count"""
    data = storage.serialize_model(_model())
    assert struct.unpack_from("<4sHHII", data) == (b"DRST", 1, 2, 6, 8)


def test_bad_magic():
    """Test a foreign file is refused"""
    data = storage.serialize_model(_model())
    with pytest.raises(ModelFormatError):
        storage.deserialize_model(b"XXXX" + data[4:])


def test_bad_version():
    """Test an unknown container version is refused"""
    data = bytearray(storage.serialize_model(_model()))
    data[4:6] = struct.pack("<H", 9)
    with pytest.raises(ModelFormatError):
        storage.deserialize_model(bytes(data))


@pytest.mark.parametrize("cut", [3, 20, 60, -1])
def test_truncated_container(cut):
    """Test truncation anywhere is detected"""
    data = storage.serialize_model(_model())
    with pytest.raises(ModelFormatError):
        storage.deserialize_model(data[:cut])


def test_trailing_bytes():
    """Test garbage after the last layer is refused"""
    with pytest.raises(ModelFormatError):
        storage.deserialize_model(storage.serialize_model(_model()) + b"\0")


def test_non_unitary_transform_rejected():
    """Test a transform far from unitary fails to load"""
    omega = np.eye(4)
    omega[0, 0] = 1.5
    with pytest.raises(UnitarityError):
        storage.deserialize_model(storage.serialize_model(_model(omega)))


def test_slightly_non_unitary_transform_warns(caplog):
    """Test small deviations load with a warning"""
    caplog.set_level(logging.WARNING, logger="deeprest")
    omega = np.eye(4)
    omega[0, 0] = 1.0 + 1e-7
    model = storage.deserialize_model(storage.serialize_model(_model(omega)))
    assert model.depth == 2
    assert any("unitarity error" in r.getMessage() for r in caplog.records)


def test_model_file_and_encoding_roundtrip(tmp_path, smooth_image):
    """Test a trained model and its codes reload to a bit-identical decode"""
    configs = [
        LayerConfig(patch=PatchSpec(a=4, b=4, c=1), eta=20.0, keep=8, iters=3),
        LayerConfig(patch=PatchSpec(a=1, b=1, c=8), eta=15.0, iters=3),
    ]
    model, _ = train_model(smooth_image, configs)
    enc = encode(smooth_image, model)
    storage.save_model(model, tmp_path / "model.drst")
    storage.save_encoding(enc, tmp_path / "codes.npz")

    loaded = storage.load_model(tmp_path / "model.drst")
    codes = storage.load_encoding(tmp_path / "codes.npz")
    assert codes.dims == enc.dims
    np.testing.assert_array_equal(decode(codes, loaded), decode(enc, model))


def test_load_missing_model(tmp_path):
    """Test a missing container raises ModelFormatError"""
    with pytest.raises(ModelFormatError):
        storage.load_model(tmp_path / "missing.drst")
    with pytest.raises(ModelFormatError):
        storage.load_encoding(tmp_path / "missing.npz")


def test_store_get_delete(temp_data_dir):
    """Test stored models persist under data_dir and are served from disk after a cache miss"""
    model = _model()
    model_id = storage.store_model(model, TrainReport(image_dims=(6, 8)))
    assert (temp_data_dir / "models" / f"{model_id}.drst").is_file()
    assert storage.get_stored_report(model_id)["image_dims"] == [6, 8]

    get_model_cache().clear()
    loaded = storage.get_stored_model(model_id)
    assert storage.serialize_model(loaded) == storage.serialize_model(model)

    assert storage.delete_stored_model(model_id) is True
    assert storage.get_stored_model(model_id) is None
    assert storage.delete_stored_model(model_id) is False


def test_make_run_dir_defaults_to_data_dir(temp_data_dir):
    """Test runs land under <data_dir>/runs"""
    run_dir = storage.make_run_dir("denoise")
    assert run_dir.is_dir()
    assert run_dir.parent == temp_data_dir / "runs"
    assert run_dir.name.startswith("denoise-")


def test_build_manifest_hashes(tmp_path):
    """Test the manifest records versions, seed and file digests"""
    src = tmp_path / "in.pgm"
    src.write_bytes(b"P5\n1 1\n255\n\x00")
    manifest = storage.build_manifest("psnr", ["psnr", str(src)], {"k": 1}, [src], [tmp_path / "absent"], seed=4)
    assert manifest.code_version == __version__
    assert manifest.numpy_version == np.__version__
    assert manifest.seed == 4
    assert manifest.inputs == {str(src): storage.sha256_file(src)}
    assert manifest.outputs == {}
    storage.write_report(tmp_path / "manifest.json", manifest)
    assert json.loads((tmp_path / "manifest.json").read_text())["command"] == "psnr"


def test_read_json_missing(tmp_path):
    """Test missing or invalid JSON reads as None"""
    assert storage.read_json(tmp_path / "missing.json") is None
    (tmp_path / "bad.json").write_text("{")
    assert storage.read_json(tmp_path / "bad.json") is None


def test_settings_from_environment(monkeypatch):
    """Test DEEPREST_ variables override defaults"""
    monkeypatch.setenv("DEEPREST_LOG_LEVEL", "debug")
    monkeypatch.setenv("DEEPREST_TABLE_WORKERS", "3")
    get_settings.cache_clear()
    try:
        settings = get_settings()
        assert settings.log_level == "DEBUG"
        assert settings.table_workers == 3
    finally:
        get_settings.cache_clear()


def test_cache_drops_expired_entries_on_set():
    """Test expired entries are removed when a new one is stored"""
    cache = TTLCache(ttl_seconds=0)
    cache.set("a", 1)
    cache.set("b", 2)
    assert len(cache) == 1
    assert cache.get("a") is None
