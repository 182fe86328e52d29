"""
Snapshot Extension
==================
Fill the inactive (ghost) part of the background mesh so every snapshot is a
full background vector.

    zero:   inactive entries set to 0
    smooth: discrete harmonic extension; P1 Laplace on the inactive vertices
            with the active values as Dirichlet trace and 0 on the grounded
            sides of the background rectangle
"""

from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from src.linalg.sparse_solvers import solve_sparse
from src.mesh.background_mesh import SIDES, BackgroundMesh
from src.utils.errors import InvalidArgumentError

ZERO = 'zero'
SMOOTH = 'smooth'


def extend_zero(field: np.ndarray, active: np.ndarray) -> np.ndarray:
    active = np.asarray(active, dtype=bool)
    if field.shape != active.shape:
        raise InvalidArgumentError(f"field {field.shape} and mask {active.shape} differ")
    return np.where(active, field, 0.0)


def extend_smooth(field: np.ndarray, active: np.ndarray, mesh: BackgroundMesh,
                  grounded_sides: Sequence[str] = SIDES,
                  stiffness: Optional[sp.csr_matrix] = None) -> np.ndarray:
    """
    Harmonic extension of the active values into the inactive region

    Raises:
        InvalidArgumentError: empty active set or shape mismatch
        SolverFailureError: the auxiliary Laplace solve failed
    """
    active = np.asarray(active, dtype=bool)
    if field.shape != (mesh.n_vertices,) or active.shape != (mesh.n_vertices,):
        raise InvalidArgumentError("field and mask must be background vectors")
    if not np.any(active):
        raise InvalidArgumentError("smooth extension needs a non-empty active set")

    out = np.where(active, field, 0.0)
    grounded = np.zeros(mesh.n_vertices, dtype=bool)
    for side in grounded_sides:
        grounded |= mesh.side_vertex_mask(side)
    free = ~active & ~grounded
    if not np.any(free):
        return out

    K = mesh.stiffness_matrix() if stiffness is None else stiffness
    K = sp.csr_matrix(K)
    idx_free = np.flatnonzero(free)
    K_ff = K[idx_free][:, idx_free]
    rhs = -(K[idx_free] @ out)
    out[idx_free] = solve_sparse(K_ff, rhs, symmetric=True)
    return out


class Extender:
    """Applies one extension policy to (possibly multi-field) background vectors"""

    def __init__(self, mesh: BackgroundMesh, policy: str = ZERO,
                 grounded_sides: Sequence[str] = SIDES):
        if policy not in (ZERO, SMOOTH):
            raise InvalidArgumentError(f"unknown extension policy {policy!r}")
        self.mesh = mesh
        self.policy = policy
        self.grounded_sides = tuple(grounded_sides)
        self._stiffness = mesh.stiffness_matrix() if policy == SMOOTH else None

    def __call__(self, field: np.ndarray, active: np.ndarray) -> np.ndarray:
        nv = self.mesh.n_vertices
        if field.size % nv:
            raise InvalidArgumentError(f"field length {field.size} is not a multiple of {nv}")
        blocks = []
        for k in range(field.size // nv):
            block = field[k * nv:(k + 1) * nv]
            if self.policy == ZERO:
                blocks.append(extend_zero(block, active))
            else:
                blocks.append(extend_smooth(block, active, self.mesh, self.grounded_sides,
                                            stiffness=self._stiffness))
        return np.concatenate(blocks)
