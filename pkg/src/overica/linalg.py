"""Dense linear-algebra primitives: flattening, Khatri-Rao products,
isometric coordinates for symmetric matrices, simplex/PSD projections,
and minimum-cost assignment.

Conventions
-----------
* ``vec`` is row-major, so that ``vec(a b^T) == khatri_rao(a, b)``.
* Symmetric p x p matrices are embedded into R^m, m = p(p+1)/2, with
  off-diagonal entries scaled by sqrt(2); the embedding is an isometry
  between the Frobenius and Euclidean inner products.
"""

import numpy as np
import scipy.optimize

from .errors import InputError, NumericalError

_SQRT2 = np.sqrt(2.0)


def symmetrize(M):
    """Return the symmetric part (M + M^T)/2 as a new array."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(f"expected a square matrix, got shape {M.shape}")
    return 0.5 * (M + M.T)


def sym_dim(p):
    """Dimension m = p(p+1)/2 of the space of symmetric p x p matrices."""
    return p * (p + 1) // 2


def sym_index_arrays(p):
    """Row/column indices of the upper triangle in embedding order.

    Order is row-major over pairs (i, j) with i <= j; shared by
    ``sym_to_coords`` / ``coords_to_sym`` and the compiled kernels.
    """
    rows, cols = np.triu_indices(p)
    return rows.astype(np.int64), cols.astype(np.int64)


def sym_to_coords(M):
    """Embed a symmetric matrix into R^{p(p+1)/2} isometrically."""
    M = np.asarray(M, dtype=float)
    p = M.shape[0]
    rows, cols = np.triu_indices(p)
    c = M[rows, cols].copy()
    c[rows != cols] *= _SQRT2
    return c


def coords_to_sym(c, p):
    """Inverse of ``sym_to_coords``."""
    c = np.asarray(c, dtype=float)
    if c.shape != (sym_dim(p),):
        raise InputError(f"expected {sym_dim(p)} coordinates for p={p}, got {c.shape}")
    rows, cols = np.triu_indices(p)
    vals = c.copy()
    vals[rows != cols] /= _SQRT2
    M = np.zeros((p, p))
    M[rows, cols] = vals
    M[cols, rows] = vals
    return M


def vec(M):
    """Row-major flattening of a p x q matrix into a vector of length pq."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise InputError(f"vec expects a matrix, got ndim={M.ndim}")
    return M.reshape(-1).copy()


def mat(v, p, q):
    """Inverse of ``vec``: reshape a length-pq vector into a p x q matrix."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size != p * q:
        raise InputError(f"cannot reshape {v.shape} into ({p}, {q})")
    return v.reshape(p, q).copy()


def khatri_rao(A, B):
    """Column-wise Kronecker product: column j is vec(A[:, j] B[:, j]^T)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise InputError(
            f"column counts differ: {A.shape[1]} vs {B.shape[1]}"
        )
    n, k = A.shape
    m = B.shape[0]
    return (A[:, None, :] * B[None, :, :]).reshape(n * m, k)


def project_simplex(v):
    """Euclidean projection onto the probability simplex.

    Sort-based O(p log p) algorithm; returns w with w >= 0, sum(w) = 1
    minimizing ||w - v||_2.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise InputError("project_simplex expects a non-empty vector")
    from . import _kernels

    return _kernels.project_simplex(v)


def project_psd_trace1(B):
    """Project a symmetric matrix onto {B >= 0, Tr(B) = 1}.

    Eigendecompose and project the eigenvalue vector onto the simplex.
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise InputError(f"expected a square matrix, got shape {B.shape}")
    if not np.allclose(B, B.T, atol=1e-10 * max(1.0, np.abs(B).max())):
        raise InputError("matrix is not symmetric")
    if not np.all(np.isfinite(B)):
        raise NumericalError("non-finite entries in projection input")
    from . import _kernels

    return _kernels.project_psd_trace1(0.5 * (B + B.T))


def hungarian(cost):
    """Permutation sigma minimizing sum_i cost[i, sigma(i)].

    Returns an integer array `perm` with `perm[i] = sigma(i)`.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise InputError(f"cost matrix must be square, got {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise InputError("cost matrix has non-finite entries")
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    perm = np.empty(cost.shape[0], dtype=np.int64)
    perm[rows] = cols
    return perm


def eigh_desc(M):
    """Symmetric eigendecomposition with eigenvalues in descending order."""
    try:
        w, V = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    return w[::-1].copy(), V[:, ::-1].copy()


def top_eigvec(M):
    """Leading eigenvector (unit norm, deterministic sign) and eigenvalue."""
    w, V = eigh_desc(M)
    v = V[:, 0]
    j = np.argmax(np.abs(v))
    if v[j] < 0:
        v = -v
    return v, w[0]
