"""
Problem Data
============
Sources, boundary data and outer-boundary conditions for the full-order
solvers, plus the penalty options of the SBM and CutFEM discretisations.

Data entries may be constants (scalar, or 2-vectors for Stokes) or callables
taking an (n, 2) array of points.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Union

import numpy as np

from src.mesh.background_mesh import SIDES
from src.utils.errors import InvalidArgumentError

DataField = Union[float, tuple, Callable[[np.ndarray], np.ndarray]]

DIRICHLET = 'dirichlet'
SLIP = 'slip'
OPEN = 'open'
NONE = 'none'
OUTER_KINDS = (DIRICHLET, SLIP, OPEN, NONE)


def evaluate(data: DataField, points: np.ndarray, components: int = 1) -> np.ndarray:
    """
    Evaluate a data entry at (n, 2) points

    Returns:
        (n,) for scalar data, (n, components) for vector data
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    n = points.shape[0]
    if callable(data):
        out = np.asarray(data(points), dtype=np.float64)
    else:
        out = np.asarray(data, dtype=np.float64)
        out = np.broadcast_to(out, (n,) if components == 1 else (n, components)).copy()
    expected = (n,) if components == 1 else (n, components)
    if out.shape != expected:
        raise InvalidArgumentError(f"data returned shape {out.shape}, expected {expected}")
    return out


@dataclass(frozen=True)
class OuterCondition:
    """
    Condition on one side of the background rectangle

    kind:
        'dirichlet': strong value (scalar or 2-vector, or callable)
        'slip': zero normal velocity (Stokes only)
        'open': do-nothing outflow with reference pressure `value` (Stokes only)
        'none': natural condition
    """
    kind: str = DIRICHLET
    value: DataField = 0.0

    def __post_init__(self):
        if self.kind not in OUTER_KINDS:
            raise InvalidArgumentError(f"unknown outer condition {self.kind!r}, expected {OUTER_KINDS}")


def _all_dirichlet_zero() -> Dict[str, OuterCondition]:
    return {side: OuterCondition(DIRICHLET, 0.0) for side in SIDES}


@dataclass(frozen=True)
class ProblemData:
    """
    Attributes:
        source: volumetric source g (Poisson) or body force (Stokes)
        dirichlet: g_D on the embedded boundary, composed with the closest-point map
        neumann: g_N on the embedded Neumann part
        neumann_marker: callable on boundary points, True where Neumann applies;
            None means the whole embedded boundary is Dirichlet
        viscosity: nu (Stokes)
        outer: condition per side of the background rectangle
    """
    source: DataField = 0.0
    dirichlet: DataField = 0.0
    neumann: DataField = 0.0
    neumann_marker: Optional[Callable[[np.ndarray], np.ndarray]] = None
    viscosity: float = 1.0
    outer: Dict[str, OuterCondition] = field(default_factory=_all_dirichlet_zero)

    def __post_init__(self):
        if not self.viscosity > 0.0:
            raise InvalidArgumentError(f"viscosity must be positive, got {self.viscosity}")
        unknown = set(self.outer) - set(SIDES)
        if unknown:
            raise InvalidArgumentError(f"unknown sides in outer conditions: {sorted(unknown)}")

    def outer_condition(self, side: str) -> OuterCondition:
        return self.outer.get(side, OuterCondition(NONE))

    def neumann_mask(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        if self.neumann_marker is None:
            return np.zeros(points.shape[0], dtype=bool)
        return np.asarray(self.neumann_marker(points), dtype=bool).reshape(points.shape[0])


@dataclass(frozen=True)
class SbmOptions:
    """
    penalty: Poisson Nitsche constant c (eta = c / h)
    alpha, beta: Stokes velocity penalty and tangential-gradient coefficients
    delta: Brezzi-Pitkaranta pressure stabilisation coefficient
    taylor_correction: include the grad(u).d terms of the shifted boundary form
    """
    penalty: float = 10.0
    alpha: float = 10.0
    beta: float = 1.0
    delta: float = 0.1
    taylor_correction: bool = True

    def __post_init__(self):
        for name in ('penalty', 'alpha', 'beta', 'delta'):
            if not getattr(self, name) > 0.0:
                raise InvalidArgumentError(f"SBM option {name} must be positive")


@dataclass(frozen=True)
class CutfemOptions:
    """gamma_d: Nitsche penalty, gamma_n: Neumann stabilisation, gamma_1: ghost penalty"""
    gamma_d: float = 10.0
    gamma_n: float = 0.1
    gamma_1: float = 0.5

    def __post_init__(self):
        if not self.gamma_d > 0.0:
            raise InvalidArgumentError("CutFEM option gamma_d must be positive")
        if self.gamma_n < 0.0:
            raise InvalidArgumentError("CutFEM option gamma_n must be non-negative")
        # gamma_1 = 0 is accepted so the conditioning study can switch the ghost penalty off
        if self.gamma_1 < 0.0:
            raise InvalidArgumentError("CutFEM option gamma_1 must be non-negative")
