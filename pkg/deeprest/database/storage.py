"""
File storage for models, codes, reports and run manifests

Model container (little-endian, version 1):
    header  b"DRST" | version u16 | L u16 | height u32 | width u32
    layer   a u32 | b u32 | c u32 | eta f64 | keep i32 (-1: none) | iters u32
            | n_retained u32 | retained u32[n] | omega f64[m*m] row-major, m = a*b*c
The layout is fixed so save -> load -> save is byte-identical.
"""
import hashlib
import json
import platform
import struct
import uuid
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel

from deeprest import __version__
from deeprest.core.config import get_settings
from deeprest.core.errors import InvalidArgumentError, ModelFormatError, UnitarityError
from deeprest.core.logging import get_logger
from deeprest.database.cache import get_model_cache
from deeprest.database.schemas import LayerConfig, PatchSpec, RunManifest, TrainReport
from deeprest.services.model import DeepRestModel, EncodedImage, TransformLayer
from deeprest.services.xformcore import unitarity_error

logger = get_logger("storage")

PathLike = Union[str, Path]

MAGIC = b"DRST"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHHII")
_LAYER = struct.Struct("<IIIdiII")
_U32 = np.dtype("<u4")
_F64 = np.dtype("<f8")


def read_json(filepath: PathLike) -> Any:
    """
    Read JSON file, return None if not found or invalid
    """
    try:
        with open(filepath, "r") as f:
            return json.load(f)
    except (FileNotFoundError, json.JSONDecodeError):
        return None


def write_report(filepath: PathLike, report: BaseModel):
    """
    Write a pydantic report as indented JSON
    """
    path = Path(filepath)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2))


def sha256_file(filepath: PathLike) -> str:
    digest = hashlib.sha256()
    with open(filepath, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def make_run_dir(command: str, out_dir: Optional[PathLike] = None) -> Path:
    """
    Output directory for a run; defaults to <data_dir>/runs/<command>-<timestamp>
    """
    if out_dir is None:
        stamp = datetime.now().strftime("%Y%m%d_%H%M%S_%f")
        out_dir = get_settings().data_dir / "runs" / f"{command}-{stamp}"
    path = Path(out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


# Model container

def serialize_model(model: DeepRestModel) -> bytes:
    height, width = model.image_dims
    parts = [_HEADER.pack(MAGIC, FORMAT_VERSION, model.depth, height, width)]
    for layer, cfg in zip(model.layers, model.configs):
        retained = layer.retained or ()
        keep = cfg.keep if cfg.keep is not None else -1
        parts.append(_LAYER.pack(
            cfg.patch.a, cfg.patch.b, cfg.patch.c, cfg.eta, keep, cfg.iters, len(retained),
        ))
        parts.append(np.asarray(retained, dtype=_U32).tobytes())
        parts.append(np.ascontiguousarray(layer.omega, dtype=_F64).tobytes())
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise ModelFormatError(
                f"truncated model container: needed {size} bytes at offset {self.pos}, "
                f"{len(self.data) - self.pos} left"
            )
        chunk = self.data[self.pos:self.pos + size]
        self.pos += size
        return chunk


def deserialize_model(data: bytes) -> DeepRestModel:
    """
    Parse a container and check every transform for unitarity

    Raises:
        ModelFormatError: bad magic, version, truncation or inconsistent dimensions
        UnitarityError: a transform deviates beyond Settings.unitarity_error_tol
    """
    settings = get_settings()
    reader = _Reader(data)
    magic, version, depth, height, width = _HEADER.unpack(reader.take(_HEADER.size))
    if magic != MAGIC:
        raise ModelFormatError("not a model container (bad magic)")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported container version {version} (expected {FORMAT_VERSION})")
    if depth < 1:
        raise ModelFormatError("container holds no layers")

    layers = []
    configs = []
    for index in range(1, depth + 1):
        a, b, c, eta, keep, iters, count = _LAYER.unpack(reader.take(_LAYER.size))
        retained = np.frombuffer(reader.take(count * _U32.itemsize), dtype=_U32)
        m = a * b * c
        omega = np.frombuffer(reader.take(m * m * _F64.itemsize), dtype=_F64).reshape(m, m)
        error = unitarity_error(omega)
        if error > settings.unitarity_error_tol:
            raise UnitarityError(f"layer {index} transform is not unitary (error {error:.3e})")
        if error > settings.unitarity_warn_tol:
            logger.warning(f"[MODEL] layer={index} | unitarity error {error:.3e}")
        try:
            configs.append(LayerConfig(
                patch=PatchSpec(a=a, b=b, c=c),
                eta=eta,
                keep=None if keep < 0 else keep,
                iters=iters,
            ))
            layers.append(TransformLayer(
                omega=omega,
                retained=tuple(int(i) for i in retained) if keep >= 0 else None,
            ))
        except ValueError as e:
            raise ModelFormatError(f"layer {index}: {e}")
    if reader.pos != len(data):
        raise ModelFormatError(f"{len(data) - reader.pos} trailing bytes after the last layer")
    try:
        return DeepRestModel(layers=tuple(layers), configs=tuple(configs), image_dims=(height, width))
    except InvalidArgumentError as e:
        raise ModelFormatError(f"inconsistent model: {e}")


def save_model(model: DeepRestModel, path: PathLike):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(serialize_model(model))


def load_model(path: PathLike) -> DeepRestModel:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise ModelFormatError(f"cannot read {path}: {e}")
    return deserialize_model(data)


# Coefficient maps (exact float64 round trip)

def save_encoding(enc: EncodedImage, path: PathLike):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arrays = {f"z{index}": np.asarray(z) for index, z in enumerate(enc.coeffs)}
    with open(path, "wb") as f:
        np.savez(f, dims=np.asarray(enc.dims, dtype=np.int64), **arrays)


def load_encoding(path: PathLike) -> EncodedImage:
    try:
        with np.load(path, allow_pickle=False) as archive:
            dims = tuple(tuple(int(d) for d in row) for row in archive["dims"])
            coeffs = tuple(archive[f"z{index}"] for index in range(len(dims)))
    except (OSError, KeyError, ValueError) as e:
        raise ModelFormatError(f"cannot read coefficient maps from {path}: {e}")
    return EncodedImage(coeffs=coeffs, dims=dims)


# Stored models (HTTP surface)

def _models_dir() -> Path:
    return get_settings().data_dir / "models"


def store_model(model: DeepRestModel, report: TrainReport) -> str:
    """
    Persist a trained model under a new id and cache it
    """
    model_id = str(uuid.uuid4())
    save_model(model, _models_dir() / f"{model_id}.drst")
    write_report(_models_dir() / f"{model_id}.json", report)
    get_model_cache().set(f"model:{model_id}", model)
    return model_id


def get_stored_model(model_id: str) -> Optional[DeepRestModel]:
    """
    Stored model by id, None if unknown; uses the in-memory cache first
    """
    cache = get_model_cache()
    cache_key = f"model:{model_id}"
    cached = cache.get(cache_key)
    if cached is not None:
        return cached
    path = _models_dir() / f"{model_id}.drst"
    if not path.is_file():
        return None
    model = load_model(path)
    cache.set(cache_key, model)
    return model


def get_stored_report(model_id: str) -> Optional[Dict[str, Any]]:
    return read_json(_models_dir() / f"{model_id}.json")


def delete_stored_model(model_id: str) -> bool:
    get_model_cache().invalidate(f"model:{model_id}")
    found = False
    for suffix in (".drst", ".json"):
        path = _models_dir() / f"{model_id}{suffix}"
        if path.exists():
            path.unlink()
            found = True
    return found


def model_summary(model: DeepRestModel) -> Dict[str, Any]:
    return {
        "layers": model.depth,
        "image_dims": list(model.image_dims),
        "configs": [cfg.model_dump() for cfg in model.configs],
        "retained": [list(layer.retained) if layer.retained is not None else None for layer in model.layers],
    }


# Run manifests

def build_manifest(
    command: str,
    argv: Sequence[str],
    config: Dict[str, Any],
    inputs: Sequence[PathLike] = (),
    outputs: Sequence[PathLike] = (),
    seed: Optional[int] = None,
) -> RunManifest:
    """
    Manifest with sha256 of every existing input and output file
    """
    return RunManifest(
        command=command,
        argv=list(argv),
        config=config,
        inputs={str(p): sha256_file(p) for p in inputs if Path(p).is_file()},
        outputs={str(p): sha256_file(p) for p in outputs if Path(p).is_file()},
        seed=seed,
        code_version=__version__,
        python_version=platform.python_version(),
        numpy_version=np.__version__,
    )
