"""Dense matrices, the singular value decomposition and column utilities.

Matrices are plain ``float64`` numpy arrays in C (row-major) order. Every
public function validates its inputs with :func:`as_matrix`, so NaN or Inf
never reaches LAPACK.
"""
import logging
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .exceptions import InvalidArgumentError, InvalidInputError, NumericalFailureError

logger = logging.getLogger(__name__)

DenseMatrix = npt.NDArray[np.float64]
Vector = npt.NDArray[np.float64]


def as_matrix(data, name="matrix"):
    """Return ``data`` as a finite, non-empty 2-D float64 array."""
    array = np.ascontiguousarray(data, dtype=np.float64)
    if array.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-dimensional, got shape {array.shape}")
    rows, cols = array.shape
    if rows < 1 or cols < 1:
        raise InvalidInputError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{name} contains NaN or infinite entries")
    return array


@dataclass(frozen=True)
class SVDFactors:
    """Singular triplets ``(y_i, u_i, v_i)`` sorted by decreasing ``y_i``.

    ``left_vectors`` is ``m x k`` and ``right_vectors`` is ``n x k``; column
    ``i`` of each holds ``u_i`` and ``v_i``. Within every triplet the entry of
    ``u_i`` with the largest magnitude is non-negative.
    """

    singular_values: Vector
    left_vectors: DenseMatrix
    right_vectors: DenseMatrix

    @property
    def rank(self):
        return self.singular_values.shape[0]

    @property
    def shape(self):
        return self.left_vectors.shape[0], self.right_vectors.shape[0]

    def leading(self):
        """Return the first triplet ``(y_1, u_1, v_1)``."""
        return self.singular_values[0], self.left_vectors[:, 0], self.right_vectors[:, 0]


def _lapack_svd(A):
    try:
        return np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError:
        logger.warning("gesdd did not converge on a %dx%d matrix, retrying with gesvd", *A.shape)
    try:
        return scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd")
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"SVD did not converge: {exc}") from exc


def svd(Y):
    """Thin SVD of ``Y`` with a deterministic sign convention.

    LAPACK's divide-and-conquer driver is tried first and the QR-iteration
    driver second; each caps its own sweeps internally and reports
    non-convergence, which is raised as :class:`NumericalFailureError`.
    """
    A = as_matrix(Y, "Y")
    U, s, Vt = _lapack_svd(A)
    U = np.array(U, dtype=np.float64, order="F")
    V = np.array(Vt.T, dtype=np.float64, order="F")

    # argmax returns the lowest index among equal magnitudes.
    pivots = np.argmax(np.abs(U), axis=0)
    flip = U[pivots, np.arange(U.shape[1])] < 0
    U[:, flip] *= -1.0
    V[:, flip] *= -1.0
    return SVDFactors(singular_values=np.asarray(s, dtype=np.float64), left_vectors=U, right_vectors=V)


def truncate(factors, r):
    """Rank-``r`` reconstruction ``sum_{i<=r} y_i u_i v_i^T``."""
    if not 1 <= r <= factors.rank:
        raise InvalidArgumentError(f"rank r={r} must lie in [1, {factors.rank}]")
    U = factors.left_vectors[:, :r]
    V = factors.right_vectors[:, :r]
    return np.ascontiguousarray((U * factors.singular_values[:r]) @ V.T)


def frobenius_sq(A):
    A = as_matrix(A)
    return float(np.sum(A * A))


def subspace_projector(vectors):
    """Orthogonal projector onto the span of the (orthonormal) columns of ``vectors``."""
    Q = np.asarray(vectors, dtype=np.float64)
    return Q @ Q.T


def _check_column(A, j):
    if not 0 <= j < A.shape[1]:
        raise InvalidArgumentError(f"column index {j} out of range for {A.shape[1]} columns")


def column(A, j):
    A = as_matrix(A)
    _check_column(A, j)
    return A[:, j].copy()


def column_inner(A, B, j):
    """Inner product of the ``j``-th columns of ``A`` and ``B``."""
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if A.shape != B.shape:
        raise InvalidArgumentError(f"shape mismatch: {A.shape} vs {B.shape}")
    _check_column(A, j)
    return float(np.dot(A[:, j], B[:, j]))


def column_norm(A, j):
    A = as_matrix(A)
    _check_column(A, j)
    return float(np.linalg.norm(A[:, j]))


def column_inners(A, B):
    """All column inner products ``<[A]_j, [B]_j>`` at once."""
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if A.shape != B.shape:
        raise InvalidArgumentError(f"shape mismatch: {A.shape} vs {B.shape}")
    return np.einsum("ij,ij->j", A, B)


def column_norms(A):
    """Column norms, rescaled per column so tiny or huge entries neither underflow nor overflow."""
    A = as_matrix(A)
    scale = np.max(np.abs(A), axis=0)
    scaled = A / np.where(scale > 0.0, scale, 1.0)
    return scale * np.sqrt(np.einsum("ij,ij->j", scaled, scaled))
