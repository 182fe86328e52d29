"""
CutFEM Classification
=====================
Tags every background triangle INSIDE / CUT / OUTSIDE from the vertex signs of
the (snapped) level-set interpolant, collects the ghost-penalty faces and
builds the volume and interface quadrature of the active domain.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from src.geometry.level_set import LevelSet
from src.geometry.quadrature import clip_triangle, cut_quadrature
from src.mesh.background_mesh import BackgroundMesh
from src.utils.errors import GeometryDegenerateError

logger = logging.getLogger(__name__)

OUTSIDE = 0
CUT = 1
INSIDE = 2
TAG_NAMES = {OUTSIDE: 'OUTSIDE', CUT: 'CUT', INSIDE: 'INSIDE'}


@dataclass(frozen=True, eq=False)
class CutClassification:
    """
    Attributes:
        tags: (nt,) INSIDE / CUT / OUTSIDE
        vertex_values: (nv,) snapped oriented level-set values
        inside_area: (nt,) area of the physical part of each triangle
        active_vertices, dof_map: dofs of D_T = INSIDE + CUT triangles
        ghost_facets: interior facets with both triangles in D_T, one of them cut
        ghost_normals: (ng, 2) facet normals pointing out of facet_triangles[:, 0]
        volume_elements, volume_points, volume_weights: quadrature of the physical
            domain (full rule on INSIDE, clipped rule on CUT triangles)
        interface_elements, interface_points, interface_weights, interface_normals:
            2-point Gauss rule on each reconstructed interface segment
        segments: (ncut, 2, 2) interface segment endpoints per cut triangle
    """
    level_set: LevelSet
    tags: np.ndarray = field(repr=False)
    vertex_values: np.ndarray = field(repr=False)
    inside_area: np.ndarray = field(repr=False)
    active_vertices: np.ndarray = field(repr=False)
    dof_map: np.ndarray = field(repr=False)
    ghost_facets: np.ndarray = field(repr=False)
    ghost_normals: np.ndarray = field(repr=False)
    volume_elements: np.ndarray = field(repr=False)
    volume_points: np.ndarray = field(repr=False)
    volume_weights: np.ndarray = field(repr=False)
    interface_elements: np.ndarray = field(repr=False)
    interface_points: np.ndarray = field(repr=False)
    interface_weights: np.ndarray = field(repr=False)
    interface_normals: np.ndarray = field(repr=False)
    segments: np.ndarray = field(repr=False)

    @property
    def cut_elements(self) -> np.ndarray:
        return np.flatnonzero(self.tags == CUT)

    @property
    def domain_elements(self) -> np.ndarray:
        return np.flatnonzero(self.tags != OUTSIDE)

    @property
    def n_active(self) -> int:
        return self.active_vertices.size

    def active_mask(self) -> np.ndarray:
        return self.dof_map >= 0

    def to_frame(self, areas: np.ndarray) -> pd.DataFrame:
        """Per-element classification table"""
        return pd.DataFrame({
            'element_id': np.arange(self.tags.size),
            'tag': [TAG_NAMES[int(t)] for t in self.tags],
            'inside_area_fraction': self.inside_area / areas,
        })

    def write_csv(self, path, areas: np.ndarray) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame(areas).to_csv(path, index=False)
        return path


def tag_elements(mesh: BackgroundMesh, vertex_values: np.ndarray) -> np.ndarray:
    negative = vertex_values[mesh.triangles] < 0.0
    count = negative.sum(axis=1)
    tags = np.full(mesh.n_triangles, CUT, dtype=np.int8)
    tags[count == 3] = INSIDE
    tags[count == 0] = OUTSIDE
    return tags


def classify_cut(mesh: BackgroundMesh, ls: LevelSet) -> CutClassification:
    """
    Classification, ghost faces and quadrature of the physical domain of ls

    Raises:
        GeometryDegenerateError: no triangle touches the physical domain
    """
    values = ls.snapped_vertex_values(mesh.vertices, mesh.h)
    tags = tag_elements(mesh, values)
    in_domain = tags != OUTSIDE
    if not np.any(in_domain):
        raise GeometryDegenerateError(f"{ls.kind} level set has no physical part inside the mesh")

    active_vertices = np.unique(mesh.triangles[in_domain])
    dof_map = -np.ones(mesh.n_vertices, dtype=np.int64)
    dof_map[active_vertices] = np.arange(active_vertices.size)

    ft = mesh.facet_triangles
    interior = ft[:, 1] >= 0
    k0 = ft[:, 0]
    k1 = np.maximum(ft[:, 1], 0)
    ghost = (interior & in_domain[k0] & in_domain[k1]
             & ((tags[k0] == CUT) | (tags[k1] == CUT)))
    ghost_facets = np.flatnonzero(ghost)
    ghost_normals = mesh.facet_normals(ghost_facets, ft[ghost_facets, 0])

    inside_area = np.where(tags == INSIDE, mesh.areas, 0.0)

    vol_e, vol_p, vol_w = [], [], []
    inside = np.flatnonzero(tags == INSIDE)
    if inside.size:
        coords = mesh.triangle_coordinates(inside)
        mids = 0.5 * (coords + coords[:, [1, 2, 0], :])
        vol_e.append(np.repeat(inside, 3))
        vol_p.append(mids.reshape(-1, 2))
        vol_w.append(np.repeat(mesh.areas[inside] / 3.0, 3))

    if_e, if_p, if_w, if_n, segments = [], [], [], [], []
    for e in np.flatnonzero(tags == CUT):
        coords = mesh.vertices[mesh.triangles[e]]
        pts, wts, ipts, iwts, inrm = cut_quadrature(coords, values[mesh.triangles[e]], ls)
        inside_area[e] = wts.sum()
        if wts.size:
            vol_e.append(np.full(wts.size, e))
            vol_p.append(pts)
            vol_w.append(wts)
        if iwts.size:
            if_e.append(np.full(iwts.size, e))
            if_p.append(ipts)
            if_w.append(iwts)
            if_n.append(inrm)
            segments.append(clip_triangle(coords, values[mesh.triangles[e]])[1])

    def _cat(parts, shape):
        return np.concatenate(parts) if parts else np.zeros(shape)

    cut = CutClassification(
        level_set=ls,
        tags=tags,
        vertex_values=values,
        inside_area=inside_area,
        active_vertices=active_vertices,
        dof_map=dof_map,
        ghost_facets=ghost_facets,
        ghost_normals=ghost_normals,
        volume_elements=_cat(vol_e, (0,)).astype(np.int64),
        volume_points=_cat(vol_p, (0, 2)),
        volume_weights=_cat(vol_w, (0,)),
        interface_elements=_cat(if_e, (0,)).astype(np.int64),
        interface_points=_cat(if_p, (0, 2)),
        interface_weights=_cat(if_w, (0,)),
        interface_normals=_cat(if_n, (0, 2)),
        segments=np.array(segments) if segments else np.zeros((0, 2, 2)),
    )
    logger.debug("cut classification: %d inside, %d cut, %d ghost facets",
                 int((tags == INSIDE).sum()), int((tags == CUT).sum()), ghost_facets.size)
    return cut
