"""
Parameter Space
===============
Box-shaped parameter domains with seeded uniform sampling and tensor grids.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from src.utils.errors import InvalidArgumentError


@dataclass(frozen=True)
class ParameterSpace:
    ranges: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        ranges = tuple((float(lo), float(hi)) for lo, hi in self.ranges)
        if not ranges:
            raise InvalidArgumentError("parameter space needs at least one axis")
        for lo, hi in ranges:
            if not hi > lo:
                raise InvalidArgumentError(f"degenerate parameter range [{lo}, {hi}]")
        object.__setattr__(self, 'ranges', ranges)

    @property
    def dimension(self) -> int:
        return len(self.ranges)

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.ranges])

    @property
    def upper(self) -> np.ndarray:
        return np.array([hi for _, hi in self.ranges])

    def sample_uniform(self, n: int, seed: int) -> np.ndarray:
        """(n, k) independent uniform samples; identical for identical (n, seed)"""
        if n < 0:
            raise InvalidArgumentError(f"sample count must be >= 0, got {n}")
        rng = np.random.default_rng(seed)
        return self.lower + (self.upper - self.lower) * rng.random((n, self.dimension))

    def tensor_grid(self, points: Union[int, Sequence[int]]) -> np.ndarray:
        """Cartesian product of equispaced points per axis (endpoints included), (prod, k)"""
        counts = [points] * self.dimension if np.isscalar(points) else list(points)
        if len(counts) != self.dimension or any(int(c) < 1 for c in counts):
            raise InvalidArgumentError(f"bad grid counts {points} for dimension {self.dimension}")
        axes = [np.linspace(lo, hi, int(c)) if int(c) > 1 else np.array([0.5 * (lo + hi)])
                for (lo, hi), c in zip(self.ranges, counts)]
        mesh = np.meshgrid(*axes, indexing='ij')
        return np.stack([m.ravel() for m in mesh], axis=1)

    def contains(self, mu) -> bool:
        mu = np.atleast_1d(np.asarray(mu, dtype=np.float64))
        return mu.shape == (self.dimension,) and bool(np.all((mu >= self.lower) & (mu <= self.upper)))
