"""
Level Sets
==========
Analytic implicit geometries phi(x; mu) with gradients and closest points.

The physical domain is {phi < 0} for orientation 'interior' and {phi > 0} for
'exterior'. Everything downstream works with the oriented value s * phi
(s = +1 interior, -1 exterior): a point is physical iff that value is negative,
and the outward unit normal of the physical domain is grad(s * phi) normalised.
"""

from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from src.utils.errors import (
    DegenerateGradientError,
    InvalidArgumentError,
    ProjectionFailureError,
)

INTERIOR = 'interior'
EXTERIOR = 'exterior'
ORIENTATIONS = (INTERIOR, EXTERIOR)

SNAP_FACTOR = 1e-10
NEWTON_MAX_ITER = 100
NEWTON_TOL = 1e-12
ELLIPSE_SAMPLES = 64


def _as_points(x) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    arr = np.atleast_2d(arr)
    if arr.shape[1] != 2:
        raise InvalidArgumentError(f"points must have 2 coordinates, got shape {arr.shape}")
    return arr, single


def _sign_nonneg(v: np.ndarray) -> np.ndarray:
    """sign() with 0 mapped to +1"""
    return np.where(v >= 0.0, 1.0, -1.0)


@dataclass(frozen=True)
class LevelSet:
    """Base class; subclasses implement _phi, _grad, _closest on (n, 2) arrays"""
    orientation: str

    def __post_init__(self):
        if self.orientation not in ORIENTATIONS:
            raise InvalidArgumentError(
                f"orientation must be one of {ORIENTATIONS}, got {self.orientation!r}")

    kind = 'abstract'

    @property
    def sign(self) -> float:
        return 1.0 if self.orientation == INTERIOR else -1.0

    @property
    def scale(self) -> float:
        """Length scale used for relative tolerances"""
        raise NotImplementedError

    def phi(self, x):
        pts, single = _as_points(x)
        out = self._phi(pts)
        return float(out[0]) if single else out

    def grad(self, x):
        pts, single = _as_points(x)
        out = self._grad(pts)
        return out[0] if single else out

    def closest_point(self, x):
        pts, single = _as_points(x)
        out = self._closest(pts)
        return out[0] if single else out

    def oriented(self, x):
        """s * phi: negative exactly on the physical domain"""
        return self.sign * self.phi(x)

    def is_physical(self, x):
        return self.oriented(x) < 0.0

    def normal(self, x):
        """Outward unit normal of the physical domain, from grad(s * phi)"""
        pts, single = _as_points(x)
        g = self.sign * self._grad(pts)
        n = g / np.linalg.norm(g, axis=1)[:, None]
        return n[0] if single else n

    def tangent(self, x):
        """Normal rotated 90 degrees counterclockwise"""
        n = np.atleast_2d(self.normal(x))
        t = np.stack([-n[:, 1], n[:, 0]], axis=1)
        return t[0] if np.asarray(x).ndim == 1 else t

    def flipped(self) -> 'LevelSet':
        return replace(self, orientation=EXTERIOR if self.orientation == INTERIOR else INTERIOR)

    def translated(self, offset) -> 'LevelSet':
        raise NotImplementedError

    def snapped_vertex_values(self, vertices: np.ndarray, h: float) -> np.ndarray:
        """
        Oriented values at mesh vertices, with raw |phi| < 1e-10 h moved to
        phi = +1e-10 h so no vertex sits exactly on the interface
        """
        raw = self._phi(np.asarray(vertices, dtype=np.float64))
        raw = np.where(np.abs(raw) < SNAP_FACTOR * h, SNAP_FACTOR * h, raw)
        return self.sign * raw

    # subclass hooks
    def _phi(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _grad(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _closest(self, pts: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Circle(LevelSet):
    """Signed distance |x - c| - R"""
    center: Tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0

    kind = 'circle'

    def __post_init__(self):
        super().__post_init__()
        if not self.radius > 0.0:
            raise InvalidArgumentError(f"circle radius must be positive, got {self.radius}")
        object.__setattr__(self, 'center', tuple(float(v) for v in self.center))

    @property
    def scale(self) -> float:
        return self.radius

    def translated(self, offset) -> 'Circle':
        c = np.asarray(self.center) + np.asarray(offset, dtype=float)
        return replace(self, center=(float(c[0]), float(c[1])))

    def _phi(self, pts):
        return np.linalg.norm(pts - np.asarray(self.center), axis=1) - self.radius

    def _grad(self, pts):
        rel = pts - np.asarray(self.center)
        dist = np.linalg.norm(rel, axis=1)
        if np.any(dist <= 1e-14 * self.radius):
            raise DegenerateGradientError("circle level set has no gradient at its center")
        return rel / dist[:, None]

    def _closest(self, pts):
        rel = pts - np.asarray(self.center)
        dist = np.linalg.norm(rel, axis=1)
        direction = np.zeros_like(rel)
        direction[:, 0] = 1.0
        ok = dist > 1e-14 * self.radius
        direction[ok] = rel[ok] / dist[ok, None]
        return np.asarray(self.center) + self.radius * direction


@dataclass(frozen=True)
class Box(LevelSet):
    """
    Axis-aligned rectangle, phi = max(|x - cx| - hw, |y - cy| - hh)

    Gradient and projection pick the face of the larger term; ties go to the
    x-face and a zero offset counts as the + side.
    """
    center: Tuple[float, float] = (0.0, 0.0)
    half_width: float = 0.5
    half_height: float = 0.5

    kind = 'box'

    def __post_init__(self):
        super().__post_init__()
        if not (self.half_width > 0.0 and self.half_height > 0.0):
            raise InvalidArgumentError(
                f"box half-extents must be positive, got {self.half_width}, {self.half_height}")
        object.__setattr__(self, 'center', tuple(float(v) for v in self.center))

    @property
    def scale(self) -> float:
        return max(self.half_width, self.half_height)

    def translated(self, offset) -> 'Box':
        c = np.asarray(self.center) + np.asarray(offset, dtype=float)
        return replace(self, center=(float(c[0]), float(c[1])))

    def _terms(self, pts):
        rel = pts - np.asarray(self.center)
        return rel, np.abs(rel[:, 0]) - self.half_width, np.abs(rel[:, 1]) - self.half_height

    def _phi(self, pts):
        _, tx, ty = self._terms(pts)
        return np.maximum(tx, ty)

    def _grad(self, pts):
        rel, tx, ty = self._terms(pts)
        g = np.zeros_like(pts)
        x_face = tx >= ty
        g[x_face, 0] = _sign_nonneg(rel[x_face, 0])
        g[~x_face, 1] = _sign_nonneg(rel[~x_face, 1])
        return g

    def _closest(self, pts):
        rel, tx, ty = self._terms(pts)
        c = np.asarray(self.center)
        out = np.empty_like(pts)

        outside = np.maximum(tx, ty) > 0.0
        out[outside, 0] = np.clip(pts[outside, 0], c[0] - self.half_width, c[0] + self.half_width)
        out[outside, 1] = np.clip(pts[outside, 1], c[1] - self.half_height, c[1] + self.half_height)

        inside = ~outside
        # inside both terms are <= 0; the nearer face has the larger term
        x_face = inside & (tx >= ty)
        y_face = inside & (tx < ty)
        out[x_face, 0] = c[0] + _sign_nonneg(rel[x_face, 0]) * self.half_width
        out[x_face, 1] = pts[x_face, 1]
        out[y_face, 0] = pts[y_face, 0]
        out[y_face, 1] = c[1] + _sign_nonneg(rel[y_face, 1]) * self.half_height
        return out


@dataclass(frozen=True)
class Ellipse(LevelSet):
    """
    phi = mu2^2 (x - mu3)^2 + mu1^2 (y - mu4)^2 - mu1^2 mu2^2 R

    Zero set: ellipse centred at (mu3, mu4) with semi-axes mu1 sqrt(R), mu2 sqrt(R).
    """
    mu: Tuple[float, float, float, float] = (1.0, 1.0, 0.0, 0.0)
    R: float = 0.05

    kind = 'ellipse'

    def __post_init__(self):
        super().__post_init__()
        mu = tuple(float(v) for v in self.mu)
        if len(mu) != 4:
            raise InvalidArgumentError(f"ellipse needs 4 parameters, got {len(mu)}")
        if not (mu[0] > 0.0 and mu[1] > 0.0 and self.R > 0.0):
            raise InvalidArgumentError(f"ellipse needs mu1, mu2, R > 0, got mu={mu}, R={self.R}")
        object.__setattr__(self, 'mu', mu)

    @property
    def center(self) -> Tuple[float, float]:
        return self.mu[2], self.mu[3]

    @property
    def semi_axes(self) -> Tuple[float, float]:
        root = np.sqrt(self.R)
        return self.mu[0] * root, self.mu[1] * root

    @property
    def scale(self) -> float:
        return max(self.semi_axes)

    def translated(self, offset) -> 'Ellipse':
        m1, m2, m3, m4 = self.mu
        return replace(self, mu=(m1, m2, m3 + float(offset[0]), m4 + float(offset[1])))

    def _phi(self, pts):
        m1, m2, m3, m4 = self.mu
        return m2 ** 2 * (pts[:, 0] - m3) ** 2 + m1 ** 2 * (pts[:, 1] - m4) ** 2 - m1 ** 2 * m2 ** 2 * self.R

    def _grad(self, pts):
        m1, m2, m3, m4 = self.mu
        g = np.stack([2.0 * m2 ** 2 * (pts[:, 0] - m3), 2.0 * m1 ** 2 * (pts[:, 1] - m4)], axis=1)
        scale = m1 ** 2 * m2 ** 2 * np.sqrt(self.R)
        if np.any(np.linalg.norm(g, axis=1) <= 1e-14 * scale):
            raise DegenerateGradientError("ellipse level set has no gradient at its center")
        return g

    def _closest(self, pts):
        return np.stack([self._project_one(p) for p in pts])

    def _project_one(self, p: np.ndarray) -> np.ndarray:
        a, b = self.semi_axes
        cx, cy = self.center
        q = p - np.array([cx, cy])

        def dist2(t):
            return (a * np.cos(t) - q[0]) ** 2 + (b * np.sin(t) - q[1]) ** 2

        samples = np.linspace(0.0, 2.0 * np.pi, ELLIPSE_SAMPLES, endpoint=False)
        seeds = [np.arctan2(q[1] / b, q[0] / a), samples[np.argmin(dist2(samples))]]

        best_t, best_d = None, np.inf
        failures = 0
        for t0 in seeds:
            try:
                t = self._newton(q, t0)
            except ProjectionFailureError:
                failures += 1
                continue
            d = dist2(t)
            if d < best_d:
                best_t, best_d = t, d
        if best_t is None:
            raise ProjectionFailureError(
                f"ellipse projection of {tuple(p)} did not converge from {failures} seeds",
                iterations=NEWTON_MAX_ITER)
        return np.array([cx + a * np.cos(best_t), cy + b * np.sin(best_t)])

    def _newton(self, q: np.ndarray, t: float) -> float:
        """Damped Newton on f(t) = |p(t) - q|^2 / 2 over the parametrisation"""
        a, b = self.semi_axes

        def f(s):
            return 0.5 * ((a * np.cos(s) - q[0]) ** 2 + (b * np.sin(s) - q[1]) ** 2)

        for _ in range(NEWTON_MAX_ITER):
            c, s = np.cos(t), np.sin(t)
            rx, ry = a * c - q[0], b * s - q[1]
            d1 = -a * s * rx + b * c * ry
            d2 = (a * s) ** 2 + (b * c) ** 2 - a * c * rx - b * s * ry
            step = -d1 / d2 if d2 > 0.0 else -d1 / ((a * s) ** 2 + (b * c) ** 2 + 1e-300)
            f0 = f(t)
            lam = 1.0
            while lam > 1e-8 and f(t + lam * step) > f0 + 1e-16 * max(f0, 1.0):
                lam *= 0.5
            t_new = t + lam * step
            if abs(t_new - t) <= NEWTON_TOL:
                return t_new
            t = t_new
        raise ProjectionFailureError("ellipse Newton projection hit the iteration cap",
                                     iterations=NEWTON_MAX_ITER)


def phi_eval(ls: LevelSet, x):
    return ls.phi(x)


def phi_grad(ls: LevelSet, x):
    return ls.grad(x)


def closest_point(ls: LevelSet, x):
    return ls.closest_point(x)
