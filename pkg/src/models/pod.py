"""
POD Basis
=========
Proper orthogonal decomposition by the method of snapshots: eigen-decompose
the correlation matrix C = S^T W S and combine the snapshots with the
eigenvectors,

    phi_i = 1 / (N_s sqrt(lambda_i)) * sum_j T_j Q_ji

after which every mode is rescaled to unit W-norm. W is the identity
('euclidean') or the background mass matrix ('mass').
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp

from src.linalg.eigen import sym_eig
from src.mesh.background_mesh import BackgroundMesh
from src.utils.errors import InvalidArgumentError, RankDeficientError

logger = logging.getLogger(__name__)

EUCLIDEAN = 'euclidean'
MASS = 'mass'
RANK_RTOL = 1e-14
DROP_TOL = 1e-12


def inner_product_matrix(mesh: BackgroundMesh, inner: str, n_fields: int = 1) -> Optional[sp.csr_matrix]:
    """None for the euclidean product, block-diagonal consistent mass otherwise"""
    if inner == EUCLIDEAN:
        return None
    if inner != MASS:
        raise InvalidArgumentError(f"unknown inner product {inner!r}")
    mass = mesh.mass_matrix()
    return sp.block_diag([mass] * n_fields, format='csr')


def _apply(W, X):
    return X if W is None else W @ X


def w_norm(x: np.ndarray, W=None) -> float:
    return float(np.sqrt(max(x @ _apply(W, x), 0.0)))


@dataclass(eq=False)
class PodBasis:
    """
    Attributes:
        modes: (N_h, N_r) W-orthonormal modes
        eigenvalues: all N_s correlation eigenvalues, descending
        inner: 'euclidean' or 'mass'
        weight: W (None for euclidean)
    """
    modes: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    inner: str = EUCLIDEAN
    weight: Optional[sp.csr_matrix] = field(default=None, repr=False)

    @property
    def n_modes(self) -> int:
        return self.modes.shape[1]

    def truncated(self, n: int) -> 'PodBasis':
        if n > self.n_modes:
            raise InvalidArgumentError(f"basis has {self.n_modes} modes, {n} requested")
        return PodBasis(self.modes[:, :n], self.eigenvalues, self.inner, self.weight)

    def coefficients(self, fields: np.ndarray) -> np.ndarray:
        return self.modes.T @ _apply(self.weight, fields)

    def project(self, fields: np.ndarray) -> np.ndarray:
        """W-orthogonal projection onto span(modes)"""
        return self.modes @ self.coefficients(fields)


def correlation_matrix(S: np.ndarray, W=None) -> np.ndarray:
    C = S.T @ _apply(W, S)
    return 0.5 * (C + C.T)


def mgs(V: np.ndarray, W=None, drop_tol: float = DROP_TOL) -> Tuple[np.ndarray, np.ndarray]:
    """
    Modified Gram-Schmidt, two passes, in the W inner product

    Columns whose remainder falls below drop_tol times their original norm
    are dropped with a warning.

    Returns:
        (orthonormal columns, indices of the input columns that were kept)
    """
    V = np.array(V, dtype=np.float64)
    out = []
    kept = []
    for j in range(V.shape[1]):
        v = V[:, j].copy()
        original = w_norm(v, W)
        if original == 0.0:
            warnings.warn(f"Gram-Schmidt: column {j} is zero and was dropped", UserWarning)
            continue
        for _ in range(2):
            for q in out:
                v -= (q @ _apply(W, v)) * q
        norm = w_norm(v, W)
        if norm < drop_tol * original:
            warnings.warn(f"Gram-Schmidt: column {j} is linearly dependent and was dropped", UserWarning)
            continue
        out.append(v / norm)
        kept.append(j)
    Q = np.column_stack(out) if out else np.zeros((V.shape[0], 0))
    return Q, np.array(kept, dtype=np.int64)


def numerical_rank(eigenvalues: np.ndarray) -> Tuple[int, float]:
    lam1 = float(eigenvalues[0]) if eigenvalues.size else 0.0
    cutoff = RANK_RTOL * lam1
    if lam1 <= 0.0:
        return 0, cutoff
    return int(np.sum(eigenvalues > cutoff)), cutoff


def pod(S: np.ndarray, n_modes: int, inner: str = EUCLIDEAN, weight=None,
        eig_method: str = 'jacobi') -> PodBasis:
    """
    POD modes of the snapshot columns of S

    Raises:
        InvalidArgumentError: no snapshots or n_modes < 0
        RankDeficientError: n_modes exceeds the numerical rank (eigenvalues
            below 1e-14 * lambda_1 are not usable)
    """
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[1] < 1:
        raise InvalidArgumentError(f"need at least one snapshot column, got shape {S.shape}")
    if n_modes < 0:
        raise InvalidArgumentError(f"n_modes must be >= 0, got {n_modes}")
    if inner == MASS and weight is None:
        raise InvalidArgumentError("mass-weighted POD needs the mass matrix")
    W = weight if inner == MASS else None

    C = correlation_matrix(S, W)
    lam, Q = sym_eig(C, method=eig_method)
    rank, cutoff = numerical_rank(lam)
    if n_modes > rank:
        raise RankDeficientError(
            f"{n_modes} modes requested but the snapshots have numerical rank {rank} "
            f"(eigenvalue cutoff {cutoff:.3e})", cutoff=cutoff)

    n_s = S.shape[1]
    modes = S @ Q[:, :n_modes] / (n_s * np.sqrt(lam[:n_modes]))
    for i in range(n_modes):
        modes[:, i] /= w_norm(modes[:, i], W)

    gram = modes.T @ _apply(W, modes)
    defect = float(np.max(np.abs(gram - np.eye(n_modes)))) if n_modes else 0.0
    if defect > 1e-12:
        # trailing modes of small eigenvalues lose orthogonality in floating point
        ortho, kept = mgs(modes, W)
        if kept.size != n_modes:
            raise RankDeficientError(
                f"only {kept.size} of {n_modes} modes are numerically independent", cutoff=cutoff)
        modes = ortho
    logger.debug("POD: %d of %d modes, lambda_1=%.3e, orthogonality defect %.1e",
                 n_modes, n_s, lam[0], defect)
    return PodBasis(modes=modes, eigenvalues=lam, inner=inner, weight=W)


def pod_energy(S: np.ndarray, basis: PodBasis, n_pod: int) -> float:
    """Sum over snapshots of the squared W-norm of the part outside the first n_pod modes"""
    S = np.asarray(S, dtype=np.float64)
    sub = basis.truncated(n_pod)
    residual = S - sub.project(S)
    return float(np.sum(residual * _apply(basis.weight, residual)))
