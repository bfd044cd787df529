"""
Patch extraction and aggregation with circular boundaries

Layout (frozen, model files depend on it):
- column k of a patch matrix is the patch whose top-left corner is spatial
  position k = row * width + col
- inside a column, entries run depth-major, then patch row, then patch column,
  i.e. entry (d * a + i) * b + j holds vol[d, (row + i) % H, (col + j) % W]

With stride 1 and wrap-around every voxel lies in exactly a*b patches, so
||extract_patches(v)||_F^2 = a*b*||v||_F^2.
"""
from typing import Tuple

import numpy as np
from numpy.typing import NDArray

from deeprest.core.errors import InvalidArgumentError
from deeprest.database.schemas import PatchSpec

Array = NDArray[np.float64]


def as_volume(vol: np.ndarray) -> Array:
    """
    View an image (H x W) or a volume (depth x H x W) as a float64 volume
    """
    arr = np.asarray(vol, dtype=np.float64)
    if arr.ndim == 2:
        return arr[np.newaxis]
    if arr.ndim != 3:
        raise InvalidArgumentError(f"expected a 2D image or 3D volume, got shape {arr.shape}")
    if min(arr.shape) < 1:
        raise InvalidArgumentError(f"empty volume of shape {arr.shape}")
    return arr


def _check_spec(spec: PatchSpec, dims: Tuple[int, int, int]) -> None:
    depth, height, width = dims
    if spec.c != depth:
        raise InvalidArgumentError(f"patch depth c={spec.c} does not match volume depth {depth}")
    if spec.a > height or spec.b > width:
        raise InvalidArgumentError(
            f"patch {spec.a}x{spec.b} does not fit a {height}x{width} volume"
        )


def extract_patches(vol: np.ndarray, spec: PatchSpec) -> Array:
    """
    Build the (a*b*c) x (H*W) patch matrix of a volume

    Args:
        vol: image (H x W) or volume (depth x H x W)
        spec: patch geometry, spec.c must equal the volume depth

    Returns:
        Patch matrix with one column per spatial position
    """
    vol = as_volume(vol)
    depth, height, width = vol.shape
    _check_spec(spec, vol.shape)

    blocks = np.empty((depth, spec.a, spec.b, height * width), dtype=np.float64)
    for i in range(spec.a):
        for j in range(spec.b):
            # shifted[d, y, x] = vol[d, (y + i) % H, (x + j) % W]
            shifted = np.roll(vol, shift=(-i, -j), axis=(1, 2))
            blocks[:, i, j, :] = shifted.reshape(depth, -1)
    return blocks.reshape(spec.size, height * width)


def aggregate_patches(pm: np.ndarray, target_dims: Tuple[int, int, int], spec: PatchSpec) -> Array:
    """
    Average patch entries back into a volume

    Every voxel receives exactly a*b contributions; the result is their mean.
    Offsets are accumulated in a fixed order so the output is reproducible.

    Args:
        pm: (a*b*c) x (H*W) patch matrix
        target_dims: (depth, height, width) of the output volume
        spec: patch geometry used to build pm

    Returns:
        depth x H x W volume
    """
    pm = np.asarray(pm, dtype=np.float64)
    if len(target_dims) != 3:
        raise InvalidArgumentError(f"target_dims must be (depth, height, width), got {target_dims}")
    depth, height, width = (int(d) for d in target_dims)
    _check_spec(spec, (depth, height, width))
    if pm.shape != (spec.size, height * width):
        raise InvalidArgumentError(
            f"patch matrix shape {pm.shape} does not match {(spec.size, height * width)}"
        )

    blocks = pm.reshape(depth, spec.a, spec.b, height, width)
    out = np.zeros((depth, height, width), dtype=np.float64)
    for i in range(spec.a):
        for j in range(spec.b):
            out += np.roll(blocks[:, i, j], shift=(i, j), axis=(1, 2))
    out /= spec.area
    return out


def volume_to_rows(vol: np.ndarray) -> Array:
    """
    Depth-fiber matrix of a volume: row i is map i flattened row-major
    (the 1x1xdepth patch matrix)
    """
    vol = as_volume(vol)
    return extract_patches(vol, PatchSpec(a=1, b=1, c=vol.shape[0]))


def rows_to_volume(rows: np.ndarray, height: int, width: int) -> Array:
    """
    Inverse of volume_to_rows: row i becomes an H x W map
    """
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != height * width:
        raise InvalidArgumentError(
            f"cannot reshape rows of shape {rows.shape} into {height}x{width} maps"
        )
    return rows.reshape(rows.shape[0], height, width)
