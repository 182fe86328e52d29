"""
P1 Element Helpers
==================
Basis evaluation and scatter routines shared by the SBM and CutFEM assemblers.
"""

import numpy as np
import scipy.sparse as sp

from src.mesh.background_mesh import BackgroundMesh


def basis_values(mesh: BackgroundMesh, elements: np.ndarray, points: np.ndarray) -> np.ndarray:
    """
    P1 basis values (barycentric coordinates) of the given elements at points

    Points need not lie inside their element; the affine extension of the
    element's basis is evaluated, which is what the Taylor terms need.

    Returns:
        (n, 3)
    """
    x0 = mesh.vertices[mesh.triangles[elements, 0]]
    grads = mesh.gradients[elements]
    lam = np.einsum('nak,nk->na', grads, points - x0)
    lam[:, 0] += 1.0
    return lam


def midpoint_load(mesh: BackgroundMesh, elements: np.ndarray, source_values: np.ndarray) -> np.ndarray:
    """
    Local load vectors from the edge-midpoint rule

    Args:
        source_values: (n, 3) source at the midpoints of edges (0,1), (1,2), (2,0)

    Returns:
        (n, 3) local loads
    """
    # basis a is 1/2 at the midpoints of the two edges touching vertex a
    touch = np.array([[0.5, 0.0, 0.5], [0.5, 0.5, 0.0], [0.0, 0.5, 0.5]])
    weights = (mesh.areas[elements] / 3.0)[:, None]
    return weights * source_values @ touch.T


def edge_midpoints(mesh: BackgroundMesh, elements: np.ndarray) -> np.ndarray:
    """(n, 3, 2) midpoints of edges (0,1), (1,2), (2,0)"""
    coords = mesh.triangle_coordinates(elements)
    return 0.5 * (coords + coords[:, [1, 2, 0], :])


class TripletBuffer:
    """Collects COO triplets and local vectors, merged into CSR once"""

    def __init__(self, n: int):
        self.n = n
        self.rows = []
        self.cols = []
        self.vals = []
        self.rhs = np.zeros(n)

    def add_blocks(self, row_dofs: np.ndarray, col_dofs: np.ndarray, blocks: np.ndarray):
        """row_dofs (m, r), col_dofs (m, c), blocks (m, r, c)"""
        if blocks.size == 0:
            return
        r, c = row_dofs.shape[1], col_dofs.shape[1]
        self.rows.append(np.repeat(row_dofs, c, axis=1).ravel())
        self.cols.append(np.tile(col_dofs, (1, r)).ravel())
        self.vals.append(blocks.ravel())

    def add_vector(self, dofs: np.ndarray, values: np.ndarray):
        np.add.at(self.rhs, dofs.ravel(), values.ravel())

    def matrix(self) -> sp.csr_matrix:
        if not self.vals:
            return sp.csr_matrix((self.n, self.n))
        mat = sp.coo_matrix(
            (np.concatenate(self.vals), (np.concatenate(self.rows), np.concatenate(self.cols))),
            shape=(self.n, self.n),
        )
        out = mat.tocsr()
        out.sum_duplicates()
        out.sort_indices()
        return out
