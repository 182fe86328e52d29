"""
Sparse Solvers
==============
CSR canonicalisation, Jacobi-preconditioned conjugate gradients and the
sparse LU path used for every full-order solve.
"""

import logging
import warnings
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from src.utils.errors import InvalidArgumentError, SolverFailureError

logger = logging.getLogger(__name__)

RESIDUAL_RTOL = 1e-10


def to_csr(A) -> sp.csr_matrix:
    """CSR copy with summed duplicates and sorted column indices per row"""
    mat = sp.csr_matrix(A, dtype=np.float64, copy=True)
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


def residual_target(b: np.ndarray) -> float:
    return RESIDUAL_RTOL * max(1.0, float(np.linalg.norm(b)))


def pcg(A, b: np.ndarray, x0: Optional[np.ndarray] = None, tol: Optional[float] = None,
        max_iter: Optional[int] = None) -> Tuple[np.ndarray, int, List[float]]:
    """
    Conjugate gradients with diagonal (Jacobi) preconditioning

    Args:
        A: symmetric positive definite sparse matrix
        b: right-hand side
        x0: initial guess (zero by default)
        tol: absolute residual target, default 1e-10 * max(1, ||b||)
        max_iter: iteration cap, default 20 * n

    Returns:
        (x, iterations, preconditioned residual norms per iteration)

    Raises:
        SolverFailureError: cap reached or breakdown (non-positive curvature)
    """
    A = sp.csr_matrix(A)
    b = np.asarray(b, dtype=np.float64)
    n = A.shape[0]
    if A.shape != (n, n) or b.shape != (n,):
        raise InvalidArgumentError(f"shape mismatch: A {A.shape}, b {b.shape}")
    tol = residual_target(b) if tol is None else tol
    max_iter = 20 * n if max_iter is None else max_iter

    diag = A.diagonal()
    if np.any(diag <= 0.0):
        raise SolverFailureError("Jacobi preconditioner needs a positive diagonal")
    inv_diag = 1.0 / diag

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=np.float64)
    r = b - A @ x
    z = inv_diag * r
    d = z.copy()
    rz = float(r @ z)
    history = [float(np.sqrt(max(rz, 0.0)))]

    k = 0
    while np.linalg.norm(r) > tol:
        if k >= max_iter:
            raise SolverFailureError(f"CG reached the cap of {max_iter} iterations",
                                     residual=float(np.linalg.norm(r)))
        Ad = A @ d
        curvature = float(d @ Ad)
        if curvature <= 0.0:
            raise SolverFailureError("CG breakdown: matrix is not positive definite",
                                     residual=float(np.linalg.norm(r)))
        alpha = rz / curvature
        x += alpha * d
        r -= alpha * Ad
        z = inv_diag * r
        rz_new = float(r @ z)
        d = z + (rz_new / rz) * d
        rz = rz_new
        history.append(float(np.sqrt(max(rz, 0.0))))
        k += 1

    logger.debug("CG converged in %d iterations (n=%d)", k, n)
    return x, k, history


def lu_solve(A, b: np.ndarray) -> np.ndarray:
    """Sparse LU with partial pivoting, residual checked against the target"""
    A = sp.csc_matrix(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    try:
        lu = splu(A, permc_spec='COLAMD', diag_pivot_thresh=1.0)
        x = lu.solve(b)
    except RuntimeError as e:
        raise SolverFailureError(f"sparse LU failed: {e}")
    if not np.all(np.isfinite(x)):
        raise SolverFailureError("sparse LU produced non-finite values")
    res = float(np.linalg.norm(A @ x - b))
    if res > residual_target(b):
        raise SolverFailureError("sparse LU missed the residual target", residual=res)
    return x


def solve_sparse(A, b: np.ndarray, symmetric: bool = False) -> np.ndarray:
    """
    Solve A x = b to ||Ax - b|| <= 1e-10 * max(1, ||b||)

    With symmetric=True the SPD path (PCG) is tried first; when CG does not
    converge the system is handed to the LU path before giving up.
    """
    A = sp.csr_matrix(A)
    b = np.asarray(b, dtype=np.float64)
    if A.shape[0] != A.shape[1]:
        raise InvalidArgumentError(f"matrix must be square, got {A.shape}")
    if b.shape != (A.shape[0],):
        raise InvalidArgumentError(f"right-hand side has shape {b.shape}, expected ({A.shape[0]},)")
    if A.shape[0] == 0:
        return np.zeros(0)

    if symmetric:
        try:
            x, _, _ = pcg(A, b)
            return x
        except SolverFailureError as e:
            warnings.warn(f"CG failed ({e}); retrying with sparse LU", UserWarning)
    return lu_solve(A, b)
