"""
SBM Surrogate Geometry
======================
Surrogate domain, surrogate boundary and the closest-point data the Shifted
Boundary Method integrates on.

The surrogate domain holds the triangles whose three vertices are strictly
physical. Its boundary facets that are interior to the background mesh form
the surrogate boundary; each carries two Gauss points x~ with the closest
point M(x~) on the true boundary, d = M(x~) - x~ and the true normal/tangent
at M(x~).
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from src.geometry.level_set import LevelSet
from src.mesh.background_mesh import BackgroundMesh
from src.utils.errors import GeometryDegenerateError

logger = logging.getLogger(__name__)

# 2-point Gauss on [0, 1]
GAUSS2_POINTS = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
GAUSS2_WEIGHTS = np.array([0.5, 0.5])


@dataclass(frozen=True, eq=False)
class SurrogateGeometry:
    """
    Attributes:
        element_mask: (nt,) True for triangles of the surrogate domain
        vertex_values: (nv,) snapped oriented level-set values
        active_vertices: sorted vertices of the surrogate domain (the dofs)
        dof_map: (nv,) active dof index per vertex, -1 if inactive
        facets, owners: surrogate-boundary facets and their surrogate triangle
        normals, tangents: (nf, 2) outward normal n~ and tangent of each facet
        lengths: (nf,)
        points, weights: (nf, 2, 2) and (nf, 2) facet Gauss rule
        closest, distance: (nf, 2, 2) M(x~) and d = M(x~) - x~
        true_normals, true_tangents: (nf, 2, 2) at M(x~)
        outer_facets, outer_owners, outer_normals: facets of the background
            boundary owned by surrogate triangles
    """
    level_set: LevelSet
    element_mask: np.ndarray = field(repr=False)
    vertex_values: np.ndarray = field(repr=False)
    active_vertices: np.ndarray = field(repr=False)
    dof_map: np.ndarray = field(repr=False)
    facets: np.ndarray = field(repr=False)
    owners: np.ndarray = field(repr=False)
    normals: np.ndarray = field(repr=False)
    tangents: np.ndarray = field(repr=False)
    lengths: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    closest: np.ndarray = field(repr=False)
    distance: np.ndarray = field(repr=False)
    true_normals: np.ndarray = field(repr=False)
    true_tangents: np.ndarray = field(repr=False)
    outer_facets: np.ndarray = field(repr=False)
    outer_owners: np.ndarray = field(repr=False)
    outer_normals: np.ndarray = field(repr=False)

    @property
    def elements(self) -> np.ndarray:
        return np.flatnonzero(self.element_mask)

    @property
    def n_active(self) -> int:
        return self.active_vertices.size

    @property
    def n_facets(self) -> int:
        return self.facets.size

    def active_mask(self) -> np.ndarray:
        return self.dof_map >= 0


def facet_gauss_points(mesh: BackgroundMesh, facets: np.ndarray):
    """(nf, 2, 2) Gauss points and (nf, 2) weights on the given facets"""
    a = mesh.vertices[mesh.facets[facets, 0]]
    b = mesh.vertices[mesh.facets[facets, 1]]
    lengths = np.linalg.norm(b - a, axis=1)
    points = a[:, None, :] + GAUSS2_POINTS[None, :, None] * (b - a)[:, None, :]
    weights = lengths[:, None] * GAUSS2_WEIGHTS[None, :]
    return points, weights, lengths


def build_surrogate(mesh: BackgroundMesh, ls: LevelSet) -> SurrogateGeometry:
    """
    Surrogate domain and boundary of the physical domain of ls on mesh

    Raises:
        GeometryDegenerateError: no triangle lies strictly inside the physical domain
        ProjectionFailureError: closest-point iteration failed on a Gauss point
    """
    values = ls.snapped_vertex_values(mesh.vertices, mesh.h)
    physical_vertex = values < 0.0
    element_mask = np.all(physical_vertex[mesh.triangles], axis=1)
    if not np.any(element_mask):
        raise GeometryDegenerateError(
            f"empty surrogate domain for {ls.kind} level set on a {mesh.nx}x{mesh.ny} mesh")

    active_vertices = np.unique(mesh.triangles[element_mask])
    dof_map = -np.ones(mesh.n_vertices, dtype=np.int64)
    dof_map[active_vertices] = np.arange(active_vertices.size)

    ft = mesh.facet_triangles
    interior = ft[:, 1] >= 0
    in_first = element_mask[ft[:, 0]]
    in_second = np.where(interior, element_mask[np.maximum(ft[:, 1], 0)], False)
    embedded = interior & (in_first ^ in_second)
    facets = np.flatnonzero(embedded)
    owners = np.where(in_first[facets], ft[facets, 0], ft[facets, 1])

    outer = (~interior) & in_first
    outer_facets = np.flatnonzero(outer)
    outer_owners = ft[outer_facets, 0]

    normals = mesh.facet_normals(facets, owners)
    tangents = np.stack([-normals[:, 1], normals[:, 0]], axis=1)
    points, weights, lengths = facet_gauss_points(mesh, facets)

    flat = points.reshape(-1, 2)
    if flat.shape[0]:
        closest = ls.closest_point(flat).reshape(points.shape)
        true_normals = ls.normal(closest.reshape(-1, 2)).reshape(points.shape)
    else:
        closest = np.zeros_like(points)
        true_normals = np.zeros_like(points)
    true_tangents = np.stack([-true_normals[..., 1], true_normals[..., 0]], axis=-1)

    logger.debug("surrogate: %d elements, %d active dofs, %d embedded facets, %d outer facets",
                 int(element_mask.sum()), active_vertices.size, facets.size, outer_facets.size)

    return SurrogateGeometry(
        level_set=ls,
        element_mask=element_mask,
        vertex_values=values,
        active_vertices=active_vertices,
        dof_map=dof_map,
        facets=facets,
        owners=owners,
        normals=normals,
        tangents=tangents,
        lengths=lengths,
        points=points,
        weights=weights,
        closest=closest,
        distance=closest - points,
        true_normals=true_normals,
        true_tangents=true_tangents,
        outer_facets=outer_facets,
        outer_owners=outer_owners,
        outer_normals=mesh.facet_normals(outer_facets, outer_owners),
    )
