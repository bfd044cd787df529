"""
Patch extraction / aggregation tests
"""
import numpy as np
import pytest

from deeprest.core.errors import InvalidArgumentError
from deeprest.database.schemas import PatchSpec
from deeprest.services.tensorpatch import (
    aggregate_patches,
    as_volume,
    extract_patches,
    rows_to_volume,
    volume_to_rows,
)

SPECS = [
    ((1, 5, 6), PatchSpec(a=1, b=1, c=1)),
    ((1, 7, 9), PatchSpec(a=3, b=2, c=1)),
    ((1, 8, 8), PatchSpec(a=8, b=8, c=1)),
    ((4, 6, 5), PatchSpec(a=2, b=3, c=4)),
    ((9, 4, 4), PatchSpec(a=1, b=1, c=9)),
]


def test_patch_matrix_shape():
    """Test one column per pixel and a*b*c rows"""
    pm = extract_patches(np.zeros((10, 12)), PatchSpec(a=3, b=4, c=1))
    assert pm.shape == (12, 120)


def test_patch_entry_layout():
    """Test entry (d*a + i)*b + j of column y*W + x is vol[d, (y+i)%H, (x+j)%W]"""
    vol = np.arange(2 * 4 * 5, dtype=np.float64).reshape(2, 4, 5)
    spec = PatchSpec(a=2, b=3, c=2)
    pm = extract_patches(vol, spec)
    _, height, width = vol.shape
    for y in range(height):
        for x in range(width):
            for d in range(2):
                for i in range(2):
                    for j in range(3):
                        expected = vol[d, (y + i) % height, (x + j) % width]
                        assert pm[(d * 2 + i) * 3 + j, y * width + x] == expected


def test_wraparound_corner_patch():
    """Test the bottom-right patch wraps to the top-left corner"""
    img = np.arange(9, dtype=np.float64).reshape(3, 3)
    pm = extract_patches(img, PatchSpec(a=2, b=2, c=1))
    # top-left corner at (2, 2): pixels (2,2), (2,0), (0,2), (0,0)
    assert pm[:, 8].tolist() == [8.0, 6.0, 2.0, 0.0]


@pytest.mark.parametrize("dims,spec", SPECS)
def test_extract_aggregate_roundtrip(rng, dims, spec):
    """Test aggregation undoes extraction to machine precision"""
    vol = rng.standard_normal(dims)
    back = aggregate_patches(extract_patches(vol, spec), dims, spec)
    np.testing.assert_allclose(back, vol, rtol=0, atol=1e-12)


@pytest.mark.parametrize("dims,spec", SPECS)
def test_patch_energy_identity(rng, dims, spec):
    """Test ||P(v)||^2 = a*b*||v||^2"""
    vol = rng.standard_normal(dims)
    pm = extract_patches(vol, spec)
    assert np.sum(pm ** 2) == pytest.approx(spec.area * np.sum(vol ** 2), rel=1e-12)


@pytest.mark.parametrize("dims,spec", SPECS)
def test_extract_is_linear(rng, dims, spec):
    """Test P(alpha u + beta v) = alpha P(u) + beta P(v)"""
    u = rng.standard_normal(dims)
    v = rng.standard_normal(dims)
    combined = extract_patches(2.5 * u - 1.5 * v, spec)
    np.testing.assert_allclose(
        combined, 2.5 * extract_patches(u, spec) - 1.5 * extract_patches(v, spec), atol=1e-12
    )


def test_aggregate_averages_conflicting_patches():
    """Test each pixel becomes the mean of its a*b contributions"""
    spec = PatchSpec(a=2, b=1, c=1)
    pm = np.zeros((2, 4))
    # pixel 0 of a 4x1 image is row 0 of patch 0 and row 1 of patch 3
    pm[0, 0] = 4.0
    pm[1, 3] = 2.0
    out = aggregate_patches(pm, (1, 4, 1), spec)
    assert out[0, 0, 0] == pytest.approx(3.0)
    assert np.count_nonzero(out) == 1


def test_depth_mismatch_rejected():
    """Test c must equal the volume depth"""
    with pytest.raises(InvalidArgumentError):
        extract_patches(np.zeros((3, 4, 4)), PatchSpec(a=1, b=1, c=2))


def test_patch_larger_than_image_rejected():
    """Test a patch bigger than the image is refused"""
    with pytest.raises(InvalidArgumentError):
        extract_patches(np.zeros((4, 4)), PatchSpec(a=5, b=2, c=1))


def test_aggregate_shape_mismatch_rejected():
    """Test a patch matrix with the wrong column count is refused"""
    with pytest.raises(InvalidArgumentError):
        aggregate_patches(np.zeros((4, 15)), (1, 4, 4), PatchSpec(a=2, b=2, c=1))


def test_rows_volume_inverse(rng):
    """Test depth-fiber rows and volumes convert both ways"""
    vol = rng.standard_normal((5, 3, 4))
    rows = volume_to_rows(vol)
    assert rows.shape == (5, 12)
    np.testing.assert_array_equal(rows[2], vol[2].ravel())
    np.testing.assert_array_equal(rows_to_volume(rows, 3, 4), vol)


def test_rows_equal_depth_fiber_patches(rng):
    """Test the row form is the 1x1xc patch matrix"""
    vol = rng.standard_normal((6, 4, 5))
    np.testing.assert_array_equal(volume_to_rows(vol), extract_patches(vol, PatchSpec(a=1, b=1, c=6)))


def test_as_volume_rejects_vectors():
    """Test 1D input is refused"""
    with pytest.raises(InvalidArgumentError):
        as_volume(np.zeros(5))
