"""
Snapshot Transport
==================
Pull snapshots back to the reference configuration with the affine
configuration map of the level-set family, and push modes forward again.

Phi_mu maps the reference geometry (mu_bar) onto the geometry at mu:

    circle / box of equal size:   translation by the center offset
    ellipse with equal R:         x -> A x + b, A = diag(mu1/mu1_bar, mu2/mu2_bar),
                                  b = (mu3, mu4) - A (mu3_bar, mu4_bar)

Transport evaluates the P1 field at mapped vertices; mapped points outside
the background rectangle evaluate to 0.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from src.geometry.level_set import Box, Circle, Ellipse, LevelSet
from src.mesh.background_mesh import BackgroundMesh
from src.utils.errors import UnsupportedTransportError

LevelSetFamily = Callable[[np.ndarray], LevelSet]


@dataclass(frozen=True)
class AffineMap:
    matrix: np.ndarray
    offset: np.ndarray

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return points @ self.matrix.T + self.offset

    def inverse(self) -> 'AffineMap':
        inv = np.linalg.inv(self.matrix)
        return AffineMap(matrix=inv, offset=-inv @ self.offset)

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.matrix, np.eye(2)) and not np.any(self.offset))


def configuration_map(reference: LevelSet, target: LevelSet) -> AffineMap:
    """
    Affine map taking the reference geometry onto the target geometry

    Raises:
        UnsupportedTransportError: kinds differ or the shapes are not related by
            the family's map (different radius, half-extents, R or orientation)
    """
    if type(reference) is not type(target) or reference.orientation != target.orientation:
        raise UnsupportedTransportError(
            f"no configuration map from {reference.kind}/{reference.orientation} "
            f"to {target.kind}/{target.orientation}")

    if isinstance(reference, Circle):
        if reference.radius != target.radius:
            raise UnsupportedTransportError("circle transport needs equal radii")
        return AffineMap(np.eye(2), np.subtract(target.center, reference.center))
    if isinstance(reference, Box):
        if (reference.half_width, reference.half_height) != (target.half_width, target.half_height):
            raise UnsupportedTransportError("box transport needs equal half-extents")
        return AffineMap(np.eye(2), np.subtract(target.center, reference.center))
    if isinstance(reference, Ellipse):
        if reference.R != target.R:
            raise UnsupportedTransportError("ellipse transport needs equal R")
        A = np.diag([target.mu[0] / reference.mu[0], target.mu[1] / reference.mu[1]])
        b = np.array(target.center) - A @ np.array(reference.center)
        return AffineMap(A, b)
    raise UnsupportedTransportError(f"no transport defined for {reference.kind} level sets")


def transport_operator(mesh: BackgroundMesh, phi: AffineMap) -> sp.csr_matrix:
    """P with (P T)(x_hat) = T(phi(x_hat)) at every background vertex"""
    if phi.is_identity():
        return sp.identity(mesh.n_vertices, format='csr')
    return mesh.interpolation_matrix(phi(mesh.vertices))


def _apply_blocks(op: sp.csr_matrix, field: np.ndarray, nv: int) -> np.ndarray:
    blocks = field.reshape(-1, nv, *field.shape[1:]) if field.ndim > 1 else field.reshape(-1, nv)
    return np.concatenate([op @ b for b in blocks])


class Transporter:
    """Forward/inverse transport between the reference and any mu of a family"""

    def __init__(self, mesh: BackgroundMesh, family: LevelSetFamily, reference):
        self.mesh = mesh
        self.family = family
        self.reference = np.atleast_1d(np.asarray(reference, dtype=np.float64))
        self._reference_ls = family(self.reference)

    def map_for(self, mu) -> AffineMap:
        return configuration_map(self._reference_ls, self.family(np.atleast_1d(mu)))

    def forward_operator(self, mu) -> sp.csr_matrix:
        return transport_operator(self.mesh, self.map_for(mu))

    def inverse_operator(self, mu) -> sp.csr_matrix:
        return transport_operator(self.mesh, self.map_for(mu).inverse())

    def forward(self, field: np.ndarray, mu) -> np.ndarray:
        """Snapshot at mu -> reference configuration (multi-field aware)"""
        return _apply_blocks(self.forward_operator(mu), field, self.mesh.n_vertices)

    def inverse(self, field: np.ndarray, mu) -> np.ndarray:
        """Reference configuration -> configuration at mu; columns allowed"""
        return _apply_blocks(self.inverse_operator(mu), field, self.mesh.n_vertices)


def transport_snapshot(field: np.ndarray, mu, mu_ref, family: LevelSetFamily,
                       mesh: BackgroundMesh) -> np.ndarray:
    return Transporter(mesh, family, mu_ref).forward(field, mu)


def inverse_transport(field: np.ndarray, mu, mu_ref, family: LevelSetFamily,
                      mesh: BackgroundMesh) -> np.ndarray:
    return Transporter(mesh, family, mu_ref).inverse(field, mu)
