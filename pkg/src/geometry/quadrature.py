"""
Cut-Cell Quadrature
===================
Clipping of a P1 level-set interpolant against a triangle, and the rules
used to integrate over the physical part and along the interface segment.
"""

from typing import Tuple

import numpy as np

from src.geometry.level_set import LevelSet
from src.geometry.surrogate import GAUSS2_POINTS, GAUSS2_WEIGHTS


def triangle_area(coords: np.ndarray) -> float:
    """Unsigned area of a (3, 2) triangle"""
    e1 = coords[1] - coords[0]
    e2 = coords[2] - coords[0]
    return 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])


def midpoint_rule(coords: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Edge-midpoint rule, exact for quadratics: 3 points, weights area/3"""
    mids = 0.5 * (coords + coords[[1, 2, 0]])
    return mids, np.full(3, triangle_area(coords) / 3.0)


def _crossing(xa, xb, va, vb) -> np.ndarray:
    return xa + (va / (va - vb)) * (xb - xa)


def clip_triangle(coords: np.ndarray, values: np.ndarray):
    """
    Split a triangle along the zero line of the linear interpolant of values

    Args:
        coords: (3, 2) vertex coordinates
        values: (3,) oriented level-set values, none exactly zero

    Returns:
        (inside sub-triangles (k, 3, 2), interface segment (2, 2) or None);
        inside means negative values. k is 0 to 2 for mixed signs, 1 for a fully
        inside triangle, 0 for a fully outside one
    """
    negative = values < 0.0
    n_neg = int(negative.sum())
    if n_neg == 3:
        return coords[None, :, :].copy(), None
    if n_neg == 0:
        return np.zeros((0, 3, 2)), None

    if n_neg == 1:
        a = int(np.flatnonzero(negative)[0])
        b, c = (a + 1) % 3, (a + 2) % 3
        p_ab = _crossing(coords[a], coords[b], values[a], values[b])
        p_ac = _crossing(coords[a], coords[c], values[a], values[c])
        return np.array([[coords[a], p_ab, p_ac]]), np.array([p_ab, p_ac])

    c = int(np.flatnonzero(~negative)[0])
    a, b = (c + 1) % 3, (c + 2) % 3
    p_bc = _crossing(coords[b], coords[c], values[b], values[c])
    p_ac = _crossing(coords[a], coords[c], values[a], values[c])
    subs = np.array([[coords[a], coords[b], p_bc], [coords[a], p_bc, p_ac]])
    return subs, np.array([p_bc, p_ac])


def cut_quadrature(coords: np.ndarray, values: np.ndarray, ls: LevelSet):
    """
    Quadrature on one cut triangle

    Returns:
        interior points (m, 2) and weights (m,), interface points (2, 2),
        weights (2,), analytic outward normals (2, 2); the interface arrays are
        empty when the triangle is not cut
    """
    subs, segment = clip_triangle(coords, values)
    pts, wts = [], []
    for sub in subs:
        p, w = midpoint_rule(sub)
        pts.append(p)
        wts.append(w)
    points = np.concatenate(pts) if pts else np.zeros((0, 2))
    weights = np.concatenate(wts) if wts else np.zeros(0)

    if segment is None:
        return points, weights, np.zeros((0, 2)), np.zeros(0), np.zeros((0, 2))
    length = float(np.linalg.norm(segment[1] - segment[0]))
    ipoints = segment[0] + GAUSS2_POINTS[:, None] * (segment[1] - segment[0])
    iweights = length * GAUSS2_WEIGHTS
    inormals = ls.normal(ipoints)
    return points, weights, ipoints, iweights, inormals
