"""
Dense Operations
================
Products used by the Galerkin projection and the dense reduced solve.
"""

import warnings

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from src.utils.errors import InvalidArgumentError, RankDeficientError

SINGULAR_RCOND = 1e-14


def _check_inner(a_shape, b_shape, what: str):
    if a_shape[-1] != b_shape[0]:
        raise InvalidArgumentError(f"{what}: inner dimensions differ, {a_shape} vs {b_shape}")


def matmul(A, B) -> np.ndarray:
    """A @ B for dense or sparse A, dense result"""
    _check_inner(A.shape, B.shape, 'matmul')
    out = A @ B
    return out.toarray() if sp.issparse(out) else np.asarray(out)


def transpose_matmul(A, B) -> np.ndarray:
    """A^T @ B, dense result"""
    _check_inner(A.shape[::-1], B.shape, 'transpose_matmul')
    out = A.T @ B
    return out.toarray() if sp.issparse(out) else np.asarray(out)


def triple_product(L: np.ndarray, A, R: np.ndarray = None) -> np.ndarray:
    """L^T A R (R defaults to L) with A sparse or dense"""
    R = L if R is None else R
    return transpose_matmul(L, matmul(A, R))


def condition_number(A) -> float:
    """2-norm condition number of a (densified) matrix"""
    dense = A.toarray() if sp.issparse(A) else np.asarray(A, dtype=np.float64)
    s = np.linalg.svd(dense, compute_uv=False)
    if s.size == 0:
        return 1.0
    if s[-1] == 0.0:
        return float('inf')
    return float(s[0] / s[-1])


def dense_lu_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """
    Dense LU with partial pivoting

    Raises:
        RankDeficientError: exactly or numerically singular matrix; the
            condition estimate is attached to the error
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or b.shape[0] != A.shape[0]:
        raise InvalidArgumentError(f"bad reduced system shapes {A.shape}, {b.shape}")
    if A.shape[0] == 0:
        return np.zeros(b.shape)
    if not np.all(np.isfinite(A)):
        raise InvalidArgumentError("reduced matrix has non-finite entries")

    with warnings.catch_warnings():
        warnings.simplefilter('ignore', scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(A)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= SINGULAR_RCOND * pivots.max():
        cond = condition_number(A)
        raise RankDeficientError(
            f"reduced matrix is singular (condition estimate {cond:.3e})", condition=cond)
    return scipy.linalg.lu_solve((lu, piv), b)
