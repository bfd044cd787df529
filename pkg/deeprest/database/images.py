"""
Grayscale image IO

- PGM P2 (ASCII) and P5 (binary), maxval up to 65535, decoded to 0-255 floats
- PNG through Pillow when Settings.enable_png is set
- Color inputs (PPM, RGB/RGBA/palette PNG) are rejected
"""
import io
import re
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from deeprest.core.config import get_settings
from deeprest.core.errors import ImageFormatError, InvalidArgumentError
from deeprest.services.tensorpatch import Array

PathLike = Union[str, Path]

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
GRAY_PNG_MODES = {"L", "I", "I;16", "I;16B", "1"}
_TOKEN = re.compile(rb"#[^\n]*|[^\s#]+")


def _pgm_header(data: bytes) -> Tuple[List[bytes], int]:
    """
    Read magic, width, height, maxval (comments skipped)

    Returns:
        (tokens, offset of the raster)
    """
    tokens: List[bytes] = []
    pos = 0
    while len(tokens) < 4:
        match = _TOKEN.search(data, pos)
        if match is None:
            raise ImageFormatError("truncated PGM header")
        pos = match.end()
        if not match.group().startswith(b"#"):
            tokens.append(match.group())
    # a single whitespace byte separates the header from the raster
    return tokens, pos + 1


def decode_pgm(data: bytes) -> Array:
    magic = data[:2]
    if magic in (b"P3", b"P6"):
        raise ImageFormatError("color PPM images are not supported")
    if magic not in (b"P2", b"P5"):
        raise ImageFormatError("not a PGM file")
    tokens, offset = _pgm_header(data)
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError:
        raise ImageFormatError("malformed PGM header")
    if width < 1 or height < 1 or not 0 < maxval < 65536:
        raise ImageFormatError(f"invalid PGM dimensions {width}x{height} or maxval {maxval}")

    count = width * height
    if magic == b"P5":
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        raster = data[offset:offset + count * dtype.itemsize]
        if len(raster) < count * dtype.itemsize:
            raise ImageFormatError("truncated PGM raster")
        values = np.frombuffer(raster, dtype=dtype).astype(np.float64)
    else:
        fields = re.sub(rb"#[^\n]*", b"", data[offset - 1:]).split()
        if len(fields) < count:
            raise ImageFormatError("truncated PGM raster")
        try:
            values = np.array([int(v) for v in fields[:count]], dtype=np.float64)
        except ValueError:
            raise ImageFormatError("non-numeric PGM sample")
    if np.any(values > maxval):
        raise ImageFormatError("PGM sample exceeds maxval")
    if maxval != 255:
        values = values * (255.0 / maxval)
    return values.reshape(height, width)


def decode_png(data: bytes) -> Array:
    if not get_settings().enable_png:
        raise ImageFormatError("PNG support is disabled")
    try:
        from PIL import Image as PILImage
    except ImportError:
        raise ImageFormatError("PNG support requires Pillow")
    try:
        with PILImage.open(io.BytesIO(data)) as png:
            png.load()
            if png.mode not in GRAY_PNG_MODES:
                raise ImageFormatError(f"only grayscale PNG is supported, got mode {png.mode}")
            values = np.asarray(png, dtype=np.float64)
            if png.mode.startswith("I"):
                values = values * (255.0 / 65535.0)
            elif png.mode == "1":
                values = values * 255.0
    except ImageFormatError:
        raise
    except Exception as e:
        raise ImageFormatError(f"unreadable PNG: {e}")
    return values


def decode_image(data: bytes) -> Array:
    """
    Decode PGM or PNG bytes into a float64 image
    """
    if data.startswith(PNG_SIGNATURE):
        return decode_png(data)
    return decode_pgm(data)


def load_image(path: PathLike) -> Array:
    """
    Load a grayscale image from disk
    """
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise ImageFormatError(f"cannot read {path}: {e}")
    try:
        return decode_image(data)
    except ImageFormatError as e:
        raise ImageFormatError(f"{path}: {e}")


def to_uint8(img: np.ndarray, clamp: bool) -> np.ndarray:
    """
    Round half up to integers and optionally clamp to [0, 255]
    """
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise InvalidArgumentError(f"expected a 2D image, got shape {img.shape}")
    rounded = np.floor(img + 0.5)
    if clamp:
        rounded = np.clip(rounded, 0, 255)
    elif rounded.min() < 0 or rounded.max() > 255:
        raise InvalidArgumentError("image values fall outside [0, 255]; save with clamp enabled")
    return rounded.astype(np.uint8)


def encode_pgm(img: np.ndarray, clamp: bool = False) -> bytes:
    """
    Binary P5 bytes of an image
    """
    pixels = to_uint8(img, clamp)
    height, width = pixels.shape
    return f"P5\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes()


def save_image(img: np.ndarray, path: PathLike, clamp: bool = False) -> None:
    """
    Write an 8-bit image; .png goes through Pillow, anything else is P5 PGM
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if path.suffix.lower() == ".png":
        if not get_settings().enable_png:
            raise ImageFormatError("PNG support is disabled")
        from PIL import Image as PILImage
        PILImage.fromarray(to_uint8(img, clamp)).save(path)
        return
    path.write_bytes(encode_pgm(img, clamp))
