"""
Closed-form updates for a single unitary transform layer

For min ||Omega P - Z||_F^2 + eta^2 ||Z||_0  s.t.  Omega^T Omega = I:
- Z-update:     Z = H_eta(Omega P)               (hard thresholding)
- Omega-update: Omega = V U^T, U S V^T = svd(P Z^T)  (orthogonal Procrustes)
"""
import numpy as np
from numpy.typing import NDArray
from scipy import fft, linalg

from deeprest.core.errors import InvalidArgumentError

Array = NDArray[np.float64]


def _as_matrix(value: np.ndarray, name: str) -> Array:
    arr = np.asarray(value, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"{name} must be a matrix, got shape {arr.shape}")
    return arr


def hard_threshold(matrix: np.ndarray, eta: float) -> Array:
    """
    Zero every entry with magnitude strictly below eta (|x| == eta is kept)
    """
    if eta < 0:
        raise InvalidArgumentError(f"threshold must be non-negative, got {eta}")
    matrix = np.asarray(matrix, dtype=np.float64)
    return np.where(np.abs(matrix) < eta, 0.0, matrix)


def sparse_code_layer(omega: np.ndarray, patches: np.ndarray, eta: float) -> Array:
    """
    Optimal coefficient maps for a fixed transform: H_eta(Omega P)
    """
    omega = _as_matrix(omega, "omega")
    patches = _as_matrix(patches, "patches")
    if omega.shape[0] != omega.shape[1] or omega.shape[1] != patches.shape[0]:
        raise InvalidArgumentError(
            f"transform {omega.shape} cannot be applied to patches {patches.shape}"
        )
    return hard_threshold(omega @ patches, eta)


def procrustes_update(patches: np.ndarray, coeffs: np.ndarray) -> Array:
    """
    Unitary Omega minimizing ||Omega P - Z||_F

    Any full SVD of a rank-deficient P Z^T gives a global minimizer, so only
    cost and unitarity are stable across backends, not the entries.
    """
    patches = _as_matrix(patches, "patches")
    coeffs = _as_matrix(coeffs, "coeffs")
    if patches.shape != coeffs.shape:
        raise InvalidArgumentError(
            f"patches {patches.shape} and coefficient maps {coeffs.shape} differ in shape"
        )
    u, _, vt = linalg.svd(patches @ coeffs.T, full_matrices=True)
    return vt.T @ u.T


def layer_cost(omega: np.ndarray, patches: np.ndarray, coeffs: np.ndarray, eta: float) -> float:
    """
    ||Omega P - Z||_F^2 + eta^2 * nnz(Z)
    """
    residual = np.asarray(omega) @ np.asarray(patches) - np.asarray(coeffs)
    return float(np.sum(residual * residual) + eta * eta * np.count_nonzero(coeffs))


def unitarity_error(omega: np.ndarray) -> float:
    """
    Frobenius norm of Omega^T Omega - I
    """
    omega = _as_matrix(omega, "omega")
    return float(np.linalg.norm(omega.T @ omega - np.eye(omega.shape[1])))


def dct_matrix(n: int) -> Array:
    """
    Orthonormal 1D DCT-II matrix (row k is the k-th basis vector)
    """
    if n < 1:
        raise InvalidArgumentError(f"DCT size must be positive, got {n}")
    return fft.dct(np.eye(n), type=2, norm="ortho", axis=0)


def dct2_init(a: int, b: int) -> Array:
    """
    (a*b) x (a*b) orthonormal 2D DCT acting on row-major vectorized a x b patches
    """
    return np.kron(dct_matrix(a), dct_matrix(b))


def identity_init(m: int) -> Array:
    if m < 1:
        raise InvalidArgumentError(f"transform size must be positive, got {m}")
    return np.eye(m)
