"""
Background Mesh
===============
Fixed structured triangular mesh of the rectangle B. Every parametrized
geometry is embedded in this mesh, so nothing here depends on the parameter.

Cell (i, j) is split along the lower-left to upper-right diagonal:
    lower triangle (v00, v10, v11), upper triangle (v00, v11, v01)
both counterclockwise. Triangle 2*c is the lower one of cell c = j*nx + i.
One P1 degree of freedom lives on each vertex.
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Tuple

import numpy as np
import scipy.sparse as sp

from src.utils.errors import InvalidArgumentError

SIDES = ('left', 'right', 'bottom', 'top')

# reference P1 gradients (rows: local vertex, cols: d/dxi, d/deta)
_REF_GRADIENTS = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])


@dataclass(frozen=True, eq=False)
class BackgroundMesh:
    """
    Structured background mesh B_h with facet connectivity

    Attributes:
        vertices: (nv, 2) coordinates
        triangles: (nt, 3) vertex indices, counterclockwise
        facets: (nf, 2) vertex indices, sorted per row
        facet_triangles: (nf, 2) incident triangles, -1 marks "no second triangle"
        triangle_facets: (nt, 3) facet of local edge k = (tri[k], tri[(k+1) % 3])
        bounds: (xmin, xmax, ymin, ymax)
        nx, ny: cell counts
        h: maximum edge length
    """
    vertices: np.ndarray = field(repr=False)
    triangles: np.ndarray = field(repr=False)
    facets: np.ndarray = field(repr=False)
    facet_triangles: np.ndarray = field(repr=False)
    triangle_facets: np.ndarray = field(repr=False)
    bounds: Tuple[float, float, float, float]
    nx: int
    ny: int
    h: float
    areas: np.ndarray = field(repr=False)
    gradients: np.ndarray = field(repr=False)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @property
    def n_facets(self) -> int:
        return self.facets.shape[0]

    @property
    def spacing(self) -> Tuple[float, float]:
        xmin, xmax, ymin, ymax = self.bounds
        return (xmax - xmin) / self.nx, (ymax - ymin) / self.ny

    @property
    def diameter(self) -> float:
        xmin, xmax, ymin, ymax = self.bounds
        return float(np.hypot(xmax - xmin, ymax - ymin))

    def triangle_coordinates(self, triangles=None) -> np.ndarray:
        """(n, 3, 2) vertex coordinates of the given triangles (all by default)"""
        tri = self.triangles if triangles is None else self.triangles[triangles]
        return self.vertices[tri]

    def edge_lengths(self) -> np.ndarray:
        coords = self.triangle_coordinates()
        edges = coords[:, [1, 2, 0], :] - coords
        return np.linalg.norm(edges, axis=2)

    def facet_lengths(self, facets=None) -> np.ndarray:
        f = self.facets if facets is None else self.facets[facets]
        return np.linalg.norm(self.vertices[f[..., 1]] - self.vertices[f[..., 0]], axis=-1)

    def boundary_facets(self) -> np.ndarray:
        return np.flatnonzero(self.facet_triangles[:, 1] < 0)

    def side_vertex_mask(self, side: str) -> np.ndarray:
        """Boolean mask of vertices lying on one side of the background rectangle"""
        if side not in SIDES:
            raise InvalidArgumentError(f"unknown side {side!r}, expected one of {SIDES}")
        i = np.arange(self.n_vertices) % (self.nx + 1)
        j = np.arange(self.n_vertices) // (self.nx + 1)
        if side == 'left':
            return i == 0
        if side == 'right':
            return i == self.nx
        if side == 'bottom':
            return j == 0
        return j == self.ny

    def boundary_vertex_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        for side in SIDES:
            mask |= self.side_vertex_mask(side)
        return mask

    def side_facets(self, side: str) -> np.ndarray:
        """Boundary facets whose two vertices lie on the given side"""
        on_side = self.side_vertex_mask(side)
        bnd = self.boundary_facets()
        both = on_side[self.facets[bnd, 0]] & on_side[self.facets[bnd, 1]]
        return bnd[both]

    def facet_normal(self, facet: int, from_triangle: int) -> np.ndarray:
        """
        Unit normal of a facet pointing out of one of its incident triangles

        Raises:
            InvalidArgumentError: if the facet is not a facet of from_triangle
        """
        if not (0 <= facet < self.n_facets) or not (0 <= from_triangle < self.n_triangles):
            raise InvalidArgumentError(f"facet {facet} / triangle {from_triangle} out of range")
        if from_triangle not in self.facet_triangles[facet]:
            raise InvalidArgumentError(
                f"facet {facet} is not incident to triangle {from_triangle}")
        return self.facet_normals(np.array([facet]), np.array([from_triangle]))[0]

    def facet_normals(self, facets: np.ndarray, from_triangles: np.ndarray) -> np.ndarray:
        """Vectorised facet_normal without incidence checks, (n, 2)"""
        a = self.vertices[self.facets[facets, 0]]
        b = self.vertices[self.facets[facets, 1]]
        t = b - a
        n = np.stack([t[:, 1], -t[:, 0]], axis=1)
        n /= np.linalg.norm(n, axis=1)[:, None]
        # the opposite vertex of the triangle must lie behind the normal
        centroid = self.vertices[self.triangles[from_triangles]].mean(axis=1)
        flip = np.einsum('ij,ij->i', n, centroid - a) > 0
        n[flip] *= -1.0
        return n

    def locate(self, points: np.ndarray, tol: float = 1e-12) -> Tuple[np.ndarray, np.ndarray]:
        """
        Find the triangle containing each point

        Returns:
            (triangle index, barycentric coordinates (n, 3)); index -1 for points
            outside the background rectangle (their coordinates are zero)
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        xmin, xmax, ymin, ymax = self.bounds
        dx, dy = self.spacing
        s_all = (points[:, 0] - xmin) / dx
        t_all = (points[:, 1] - ymin) / dy
        inside = ((s_all >= -tol) & (s_all <= self.nx + tol)
                  & (t_all >= -tol) & (t_all <= self.ny + tol))

        i = np.clip(np.floor(s_all), 0, self.nx - 1).astype(np.int64)
        j = np.clip(np.floor(t_all), 0, self.ny - 1).astype(np.int64)
        s = np.clip(s_all - i, 0.0, 1.0)
        t = np.clip(t_all - j, 0.0, 1.0)

        lower = t <= s
        cell = j * self.nx + i
        tri = np.where(lower, 2 * cell, 2 * cell + 1)
        bary = np.where(
            lower[:, None],
            np.stack([1.0 - s, s - t, t], axis=1),
            np.stack([1.0 - t, s, t - s], axis=1),
        )
        tri[~inside] = -1
        bary[~inside] = 0.0
        return tri, bary

    def interpolation_matrix(self, points: np.ndarray) -> sp.csr_matrix:
        """
        Sparse (n_points, n_vertices) P1 evaluation operator

        Rows of points outside B are empty, so those points evaluate to 0.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        tri, bary = self.locate(points)
        inside = tri >= 0
        rows = np.repeat(np.flatnonzero(inside), 3)
        cols = self.triangles[tri[inside]].ravel()
        vals = bary[inside].ravel()
        mat = sp.coo_matrix((vals, (rows, cols)), shape=(points.shape[0], self.n_vertices))
        return mat.tocsr()

    def stiffness_matrix(self) -> sp.csr_matrix:
        """Global P1 Laplace stiffness matrix"""
        local = self.areas[:, None, None] * np.einsum('eak,ebk->eab', self.gradients, self.gradients)
        return _scatter_square(self.triangles, local, self.n_vertices)

    def mass_matrix(self, lumped: bool = False) -> sp.csr_matrix:
        """Global P1 mass matrix (consistent, or row-sum lumped)"""
        if lumped:
            diag = np.zeros(self.n_vertices)
            np.add.at(diag, self.triangles.ravel(), np.repeat(self.areas / 3.0, 3))
            return sp.diags(diag).tocsr()
        ref = (np.ones((3, 3)) + np.eye(3)) / 12.0
        local = self.areas[:, None, None] * ref[None, :, :]
        return _scatter_square(self.triangles, local, self.n_vertices)

    def write_dump(self, path) -> Path:
        """Plain-text node/element listing, one record per line"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as fh:
            fh.write(f"# nodes {self.n_vertices}\n")
            for k, (x, y) in enumerate(self.vertices):
                fh.write(f"{k} {x:.17g} {y:.17g}\n")
            fh.write(f"# elements {self.n_triangles}\n")
            for k, (a, b, c) in enumerate(self.triangles):
                fh.write(f"{k} {a} {b} {c}\n")
        return path


def _scatter_square(triangles: np.ndarray, local: np.ndarray, n: int) -> sp.csr_matrix:
    rows = np.repeat(triangles, 3, axis=1).ravel()
    cols = np.tile(triangles, (1, 3)).ravel()
    mat = sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n, n))
    return mat.tocsr()


def build_structured_mesh(bounds, nx: int, ny: int) -> BackgroundMesh:
    """
    Regular nx-by-ny grid of the rectangle bounds = (xmin, xmax, ymin, ymax),
    every cell split into two triangles along the same diagonal

    Raises:
        InvalidArgumentError: zero/negative cell counts or an inverted rectangle
    """
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise InvalidArgumentError(f"cell counts must be integers >= 1, got nx={nx}, ny={ny}")
    nx, ny = int(nx), int(ny)
    xmin, xmax, ymin, ymax = (float(v) for v in bounds)
    if not (xmax > xmin and ymax > ymin):
        raise InvalidArgumentError(f"degenerate or inverted rectangle {bounds}")

    xs = np.linspace(xmin, xmax, nx + 1)
    ys = np.linspace(ymin, ymax, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    vertices = np.stack([X.ravel(), Y.ravel()], axis=1)

    jj, ii = np.meshgrid(np.arange(ny), np.arange(nx), indexing='ij')
    v00 = (jj * (nx + 1) + ii).ravel()
    v10 = v00 + 1
    v01 = v00 + nx + 1
    v11 = v01 + 1
    lower = np.stack([v00, v10, v11], axis=1)
    upper = np.stack([v00, v11, v01], axis=1)
    triangles = np.empty((2 * nx * ny, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    facets, facet_triangles, triangle_facets = _build_facets(triangles)

    coords = vertices[triangles]
    jac = np.stack([coords[:, 1] - coords[:, 0], coords[:, 2] - coords[:, 0]], axis=2)
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    areas = 0.5 * det
    inv_jac = np.linalg.inv(jac)
    gradients = np.einsum('ak,ekj->eaj', _REF_GRADIENTS, inv_jac)

    edges = coords[:, [1, 2, 0], :] - coords
    h = float(np.linalg.norm(edges, axis=2).max())

    return BackgroundMesh(
        vertices=vertices,
        triangles=triangles,
        facets=facets,
        facet_triangles=facet_triangles,
        triangle_facets=triangle_facets,
        bounds=(xmin, xmax, ymin, ymax),
        nx=nx,
        ny=ny,
        h=h,
        areas=areas,
        gradients=gradients,
    )


def _build_facets(triangles: np.ndarray):
    nt = triangles.shape[0]
    local_edges = triangles[:, [0, 1, 1, 2, 2, 0]].reshape(nt, 3, 2)
    keys = np.sort(local_edges, axis=2).reshape(-1, 2)
    facets, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    triangle_facets = inverse.reshape(nt, 3)

    owner = np.repeat(np.arange(nt), 3)
    facet_triangles = -np.ones((facets.shape[0], 2), dtype=np.int64)
    facet_triangles[:, 0] = owner[first]
    second = np.ones(keys.shape[0], dtype=bool)
    second[first] = False
    facet_triangles[inverse[second], 1] = owner[second]
    return facets.astype(np.int64), facet_triangles, triangle_facets


def mesh_summary(mesh: BackgroundMesh) -> Dict[str, float]:
    """Counts used in logs and manifests"""
    return {
        'vertices': mesh.n_vertices,
        'triangles': mesh.n_triangles,
        'facets': mesh.n_facets,
        'h': mesh.h,
    }
