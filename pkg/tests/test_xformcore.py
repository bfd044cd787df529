"""
Single-layer update tests: thresholding, Procrustes, DCT initialization
"""
import itertools

import numpy as np
import pytest
from scipy.stats import ortho_group

from deeprest.core.errors import InvalidArgumentError
from deeprest.services.xformcore import (
    dct2_init,
    dct_matrix,
    hard_threshold,
    identity_init,
    layer_cost,
    procrustes_update,
    sparse_code_layer,
    unitarity_error,
)


def _brute_force_cost(values: np.ndarray, eta: float) -> float:
    """Minimum of ||X - Z||^2 + eta^2 nnz(Z) over every support of Z"""
    flat = values.ravel()
    best = np.inf
    for support in itertools.product([False, True], repeat=flat.size):
        support = np.array(support)
        cost = np.sum(flat[~support] ** 2) + eta ** 2 * np.count_nonzero(support)
        best = min(best, cost)
    return best


def test_hard_threshold_keeps_boundary():
    """Test |x| == eta is kept and |x| < eta is zeroed"""
    out = hard_threshold(np.array([[-2.0, -1.0, 0.5, 1.0, 3.0]]), 1.0)
    assert out.tolist() == [[-2.0, -1.0, 0.0, 1.0, 3.0]]


def test_hard_threshold_zero_eta_is_identity(rng):
    """Test eta = 0 changes nothing"""
    x = rng.standard_normal((4, 6))
    np.testing.assert_array_equal(hard_threshold(x, 0.0), x)


def test_hard_threshold_negative_eta_rejected():
    """Test negative thresholds are refused"""
    with pytest.raises(InvalidArgumentError):
        hard_threshold(np.zeros((2, 2)), -0.1)


@pytest.mark.parametrize("shape", [(2, 2), (3, 4), (4, 4), (2, 7)])
def test_hard_threshold_matches_support_enumeration(rng, shape):
    """Test thresholding attains the exact minimum of the sparse coding problem"""
    omega = ortho_group.rvs(shape[0], random_state=7)
    patches = rng.standard_normal(shape) * 2.0
    eta = 1.3
    coeffs = sparse_code_layer(omega, patches, eta)
    cost = layer_cost(omega, patches, coeffs, eta)
    assert cost == pytest.approx(_brute_force_cost(omega @ patches, eta), rel=1e-12, abs=1e-12)


def test_sparse_code_layer_shape_mismatch():
    """Test a transform that does not match the patch length is refused"""
    with pytest.raises(InvalidArgumentError):
        sparse_code_layer(np.eye(3), np.zeros((4, 5)), 1.0)


@pytest.mark.parametrize("m,n", [(4, 50), (9, 200), (16, 30)])
def test_procrustes_is_unitary(rng, m, n):
    """Test the update returns a unitary matrix"""
    omega = procrustes_update(rng.standard_normal((m, n)), rng.standard_normal((m, n)))
    assert unitarity_error(omega) < 1e-10


@pytest.mark.parametrize("m", [3, 6, 9])
def test_procrustes_beats_random_unitaries(rng, m):
    """Test no random unitary fits Z better than the closed-form update"""
    patches = rng.standard_normal((m, 80))
    coeffs = hard_threshold(rng.standard_normal((m, 80)) * 2.0, 1.0)
    best = np.linalg.norm(procrustes_update(patches, coeffs) @ patches - coeffs)
    for candidate in ortho_group.rvs(m, size=100, random_state=11):
        assert best <= np.linalg.norm(candidate @ patches - coeffs) + 1e-9


def test_procrustes_beats_rotation_grid(rng):
    """Test the 2x2 update against a dense grid of rotations and reflections"""
    patches = rng.standard_normal((2, 40))
    coeffs = rng.standard_normal((2, 40))
    best = np.linalg.norm(procrustes_update(patches, coeffs) @ patches - coeffs)
    for theta in np.linspace(0.0, 2.0 * np.pi, 2000, endpoint=False):
        c, s = np.cos(theta), np.sin(theta)
        for candidate in (np.array([[c, -s], [s, c]]), np.array([[c, s], [s, -c]])):
            assert best <= np.linalg.norm(candidate @ patches - coeffs) + 1e-9


def test_procrustes_recovers_exact_transform(rng):
    """Test Z = Omega P with full-rank P gives back Omega"""
    omega = ortho_group.rvs(5, random_state=3)
    patches = rng.standard_normal((5, 60))
    np.testing.assert_allclose(procrustes_update(patches, omega @ patches), omega, atol=1e-10)


def test_procrustes_rank_deficient_still_optimal(rng):
    """Test a rank-deficient cross product still yields a unitary global minimizer"""
    patches = np.zeros((4, 20))
    patches[0] = rng.standard_normal(20)
    coeffs = np.zeros((4, 20))
    coeffs[1] = rng.standard_normal(20)
    omega = procrustes_update(patches, coeffs)
    assert unitarity_error(omega) < 1e-10
    best = np.linalg.norm(omega @ patches - coeffs)
    for candidate in ortho_group.rvs(4, size=100, random_state=5):
        assert best <= np.linalg.norm(candidate @ patches - coeffs) + 1e-9


def test_procrustes_shape_mismatch():
    """Test P and Z must have the same shape"""
    with pytest.raises(InvalidArgumentError):
        procrustes_update(np.zeros((3, 4)), np.zeros((3, 5)))


def test_layer_cost_counts_nonzeros():
    """Test cost = residual energy + eta^2 * nnz"""
    omega = np.eye(2)
    patches = np.array([[3.0, 0.5], [0.0, -2.0]])
    coeffs = np.array([[3.0, 0.0], [0.0, -2.0]])
    assert layer_cost(omega, patches, coeffs, 2.0) == pytest.approx(0.25 + 4.0 * 2)


@pytest.mark.parametrize("n", [1, 2, 8, 9])
def test_dct_matrix_orthonormal(n):
    """Test the 1D DCT matrix is orthonormal with a constant first row"""
    d = dct_matrix(n)
    assert unitarity_error(d) < 1e-12
    np.testing.assert_allclose(d[0], np.full(n, 1.0 / np.sqrt(n)))


def test_dct2_init_separable():
    """Test the 2D DCT applied to a vectorized patch equals D_a X D_b^T"""
    a, b = 3, 4
    x = np.arange(a * b, dtype=np.float64).reshape(a, b) ** 1.5
    expected = dct_matrix(a) @ x @ dct_matrix(b).T
    np.testing.assert_allclose(dct2_init(a, b) @ x.ravel(), expected.ravel(), atol=1e-10)
    assert unitarity_error(dct2_init(9, 9)) < 1e-12


def test_identity_init():
    """Test identity init and its size check"""
    np.testing.assert_array_equal(identity_init(3), np.eye(3))
    with pytest.raises(InvalidArgumentError):
        identity_init(0)
