"""
Assembled Systems
=================
Sparse operator and load over the active background dofs, with the map back
to full background vectors.

Active dofs are numbered field-major: dof = f * n_active + local index of the
vertex, so Stokes systems read [u_x | u_y | p].
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np
import scipy.sparse as sp

from src.linalg.sparse_solvers import solve_sparse
from src.utils.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class AssembledSystem:
    """
    Attributes:
        A, F: operator and load over active dofs
        n_vertices: background vertex count (N_h per scalar field)
        active_vertices: background vertices carrying dofs
        fields: field names, e.g. ('T',) or ('u_x', 'u_y', 'p')
        symmetric: True when A is symmetric (enables the CG path)
        provenance: which discretisation produced the system
    """
    A: sp.csr_matrix = field(repr=False)
    F: np.ndarray = field(repr=False)
    n_vertices: int
    active_vertices: np.ndarray = field(repr=False)
    fields: Tuple[str, ...] = ('T',)
    symmetric: bool = False
    provenance: str = ''
    extras: Dict[str, object] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        n = self.n_dofs
        if self.A.shape != (n, n) or self.F.shape != (n,):
            raise InvalidArgumentError(
                f"system shapes {self.A.shape}, {self.F.shape} do not match {n} active dofs")

    @property
    def n_active(self) -> int:
        return self.active_vertices.size

    @property
    def n_fields(self) -> int:
        return len(self.fields)

    @property
    def n_dofs(self) -> int:
        return self.n_fields * self.n_active

    def field_slice(self, name: str) -> slice:
        k = self.fields.index(name)
        return slice(k * self.n_active, (k + 1) * self.n_active)

    def active_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.active_vertices] = True
        return mask

    def full_indices(self) -> np.ndarray:
        """Background index (field-major, length n_fields * N_h) of every active dof"""
        return np.concatenate([k * self.n_vertices + self.active_vertices
                               for k in range(self.n_fields)])

    def embed(self, x: np.ndarray) -> np.ndarray:
        """Active solution -> background vector with inactive entries zero"""
        out = np.zeros(self.n_fields * self.n_vertices)
        out[self.full_indices()] = x
        return out

    def restrict(self, full: np.ndarray) -> np.ndarray:
        """Background vector (or matrix of columns) -> active rows"""
        return full[self.full_indices()]


def apply_strong_dirichlet(A: sp.csr_matrix, F: np.ndarray, dofs: np.ndarray,
                           values: np.ndarray) -> Tuple[sp.csr_matrix, np.ndarray]:
    """
    Eliminate strong Dirichlet dofs symmetrically: the known values move to the
    right-hand side, rows and columns are zeroed and the diagonal set to one
    """
    dofs = np.asarray(dofs, dtype=np.int64)
    if dofs.size == 0:
        return A, F
    n = A.shape[0]
    lifted = np.zeros(n)
    lifted[dofs] = values
    F = F - A @ lifted
    F[dofs] = values
    keep = np.ones(n)
    keep[dofs] = 0.0
    K = sp.diags(keep)
    A = (K @ A @ K + sp.diags(1.0 - keep)).tocsr()
    A.eliminate_zeros()
    A.sort_indices()
    return A, F


def solve_fom(system: AssembledSystem) -> np.ndarray:
    """Solve and re-embed into the background (inactive entries zero)"""
    x = solve_sparse(system.A, system.F, symmetric=system.symmetric)
    logger.debug("%s solve: %d dofs", system.provenance, system.n_dofs)
    return system.embed(x)
