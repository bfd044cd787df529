"""
Utility functions for API endpoints
"""
import base64
import math
from contextlib import contextmanager
from typing import List, Optional, Union

import numpy as np
from fastapi import HTTPException, UploadFile
from pydantic import ValidationError

from deeprest.core.errors import DeepRestError, ImageFormatError, InvalidArgumentError
from deeprest.database.images import decode_image, encode_pgm


async def read_upload_image(upload: UploadFile) -> np.ndarray:
    """
    Decode an uploaded PGM/PNG file

    Raises HTTPException with 422 status if the bytes are not a grayscale image
    """
    data = await upload.read()
    try:
        return decode_image(data)
    except ImageFormatError as e:
        raise HTTPException(status_code=422, detail=f"{upload.filename}: {e}")


@contextmanager
def http_errors():
    """
    Map library errors onto HTTP status codes (400 invalid input, 422 bad
    payload, 500 anything else raised by the library)
    """
    try:
        yield
    except (InvalidArgumentError, ValidationError) as e:
        raise HTTPException(status_code=400, detail=str(e))
    except ImageFormatError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except DeepRestError as e:
        raise HTTPException(status_code=500, detail=str(e))


def parse_float_list(text: Optional[str]) -> Optional[List[float]]:
    """
    "90,20" -> [90.0, 20.0]; None or blank -> None
    """
    if text is None or not text.strip():
        return None
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise HTTPException(status_code=400, detail=f"expected comma-separated numbers, got {text!r}")


def parse_int_list(text: Optional[str]) -> Optional[List[int]]:
    """
    "49,36" -> [49, 36]; None or blank -> None; non-integers are a 400
    """
    if text is None or not text.strip():
        return None
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise HTTPException(status_code=400, detail=f"expected comma-separated integers, got {text!r}")


def pgm_base64(img: np.ndarray) -> str:
    """
    Clamped 8-bit P5 bytes, base64-encoded for JSON responses
    """
    return base64.b64encode(encode_pgm(img, clamp=True)).decode("ascii")


def json_db(value: Optional[float]) -> Union[float, str, None]:
    # JSON has no infinity
    if value is not None and math.isinf(value):
        return "inf"
    return value
