"""
Symmetric Eigensolver
=====================
Cyclic Jacobi rotations for the dense POD correlation matrix.

Rotations are applied in round-robin (Brent-Luk) order: each round rotates
n/2 disjoint index pairs at once, so a round is a handful of numpy
column/row updates instead of a Python loop over pairs.
"""

import logging
import warnings
from typing import List, Tuple

import numpy as np
import scipy.linalg

from src.utils.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

OFF_DIAGONAL_RTOL = 1e-14
SYMMETRY_RTOL = 1e-12
MAX_SWEEPS = 100


def round_robin_pairs(n: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """
    n-1 (or n) rounds of disjoint (p, q) pairs, p < q, covering every pair once
    """
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        p_list, q_list = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a >= n or b >= n:
                continue
            p_list.append(min(a, b))
            q_list.append(max(a, b))
        rounds.append((np.array(p_list, dtype=np.int64), np.array(q_list, dtype=np.int64)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _off_norm(A: np.ndarray) -> float:
    return float(np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0)))


def sym_eig(C: np.ndarray, method: str = 'jacobi') -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigen-decomposition of a symmetric matrix

    Args:
        C: symmetric (n, n) matrix
        method: 'jacobi' (default) or 'lapack' (scipy.linalg.eigh, for large
            correlation matrices)

    Returns:
        (eigenvalues sorted descending, orthonormal eigenvectors as columns).
        Equal eigenvalues keep the order of their column index.

    Raises:
        InvalidArgumentError: non-square or asymmetric beyond 1e-12 relative
    """
    C = np.array(C, dtype=np.float64)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {C.shape}")
    n = C.shape[0]
    norm = float(np.linalg.norm(C))
    if np.linalg.norm(C - C.T) > SYMMETRY_RTOL * max(norm, np.finfo(float).tiny):
        raise InvalidArgumentError("matrix is not symmetric within 1e-12 relative")
    A = 0.5 * (C + C.T)

    if method == 'lapack':
        lam, Q = scipy.linalg.eigh(A)
    elif method == 'jacobi':
        lam, Q = _cyclic_jacobi(A, norm)
    else:
        raise InvalidArgumentError(f"unknown eigen method {method!r}")

    order = np.lexsort((np.arange(n), -lam))
    return lam[order], Q[:, order]


def _cyclic_jacobi(A: np.ndarray, norm: float) -> Tuple[np.ndarray, np.ndarray]:
    n = A.shape[0]
    V = np.eye(n)
    if n < 2 or norm == 0.0:
        return np.diag(A).copy(), V

    target = OFF_DIAGONAL_RTOL * norm
    rounds = round_robin_pairs(n)
    off = _off_norm(A)
    sweeps = 0
    while off >= target:
        if sweeps >= MAX_SWEEPS:
            warnings.warn(
                f"Jacobi stopped after {MAX_SWEEPS} sweeps with off-diagonal norm "
                f"{off:.3e} (target {target:.3e})", UserWarning)
            break
        for P, Q in rounds:
            apq = A[P, Q]
            active = apq != 0.0
            if not np.any(active):
                continue
            P, Q, apq = P[active], Q[active], apq[active]
            theta = (A[Q, Q] - A[P, P]) / (2.0 * apq)
            t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            Ap, Aq = A[:, P].copy(), A[:, Q].copy()
            A[:, P] = c * Ap - s * Aq
            A[:, Q] = s * Ap + c * Aq
            Ap, Aq = A[P, :].copy(), A[Q, :].copy()
            A[P, :] = c[:, None] * Ap - s[:, None] * Aq
            A[Q, :] = s[:, None] * Ap + c[:, None] * Aq
            A[P, Q] = 0.0
            A[Q, P] = 0.0

            Vp, Vq = V[:, P].copy(), V[:, Q].copy()
            V[:, P] = c * Vp - s * Vq
            V[:, Q] = s * Vp + c * Vq
        sweeps += 1
        new_off = _off_norm(A)
        # rounding floor: rotations no longer reduce the off-diagonal part
        if new_off >= 0.5 * off and new_off < 1e-10 * norm:
            off = new_off
            break
        off = new_off

    logger.debug("Jacobi: n=%d, %d sweeps, off-diagonal %.3e", n, sweeps, off)
    return np.diag(A).copy(), V
