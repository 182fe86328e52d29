"""
Reduced Model
=============
Galerkin projection of an assembled full-order system onto a POD basis and
the dense online solve.

    A_r = L^T A L,   F_r = L^T F,   A_r a = F_r,   u_r = L a

L holds the basis rows of the active dofs at the query parameter. For Stokes
the basis is block-diagonal, diag(L_u, L_p), over the [u_x | u_y | p] layout.
Bases built from transported snapshots live in the reference configuration;
their modes are pulled to the query configuration with the inverse
configuration map before projection.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np

from src.linalg.dense_ops import dense_lu_solve, matmul, transpose_matmul
from src.mesh.background_mesh import BackgroundMesh
from src.scenarios.catalog import Scenario
from src.snapshots.transport import Transporter
from src.solvers.system import AssembledSystem
from src.utils.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class ReducedBasis:
    """
    Attributes:
        blocks: block name -> (rows, N_block) background modes ('T', or 'u' and 'p')
        layout: block name -> [start, stop) field range in units of N_h
        transported: modes live in the reference configuration
        reference: mu_bar of the transport
        provenance: short description of how the basis was built
    """
    blocks: Dict[str, np.ndarray] = field(repr=False)
    layout: Dict[str, Tuple[int, int]]
    transported: bool = False
    reference: Tuple[float, ...] = ()
    provenance: str = ''

    @property
    def widths(self) -> Dict[str, int]:
        return {name: block.shape[1] for name, block in self.blocks.items()}

    @property
    def n_modes(self) -> int:
        return sum(self.widths.values())

    @property
    def n_rows(self) -> int:
        return max(stop for _, stop in self.layout.values()) * self._n_vertices()

    def _n_vertices(self) -> int:
        name, (a, b) = next(iter(self.layout.items()))
        return self.blocks[name].shape[0] // (b - a)

    def truncated(self, widths: Dict[str, int]) -> 'ReducedBasis':
        blocks = {}
        for name, block in self.blocks.items():
            n = int(widths.get(name, block.shape[1]))
            if n > block.shape[1]:
                raise InvalidArgumentError(
                    f"block {name} has {block.shape[1]} modes, {n} requested")
            blocks[name] = block[:, :n]
        return ReducedBasis(blocks, dict(self.layout), self.transported, self.reference, self.provenance)

    def full_matrix(self, blocks: Optional[Dict[str, np.ndarray]] = None) -> np.ndarray:
        """Block-diagonal background basis over all fields"""
        blocks = self.blocks if blocks is None else blocks
        nv = self._n_vertices()
        out = np.zeros((self.n_rows, self.n_modes))
        col = 0
        for name, (a, b) in self.layout.items():
            block = blocks[name]
            out[a * nv:b * nv, col:col + block.shape[1]] = block
            col += block.shape[1]
        return out


@dataclass(eq=False)
class ReducedSystem:
    A_r: np.ndarray = field(repr=False)
    F_r: np.ndarray = field(repr=False)
    mu: Optional[np.ndarray] = None
    provenance: str = ''

    @property
    def n_modes(self) -> int:
        return self.F_r.size


def active_rows(system: AssembledSystem, L: Union[np.ndarray, ReducedBasis]) -> np.ndarray:
    """Basis rows of the system's active dofs"""
    if isinstance(L, ReducedBasis):
        L = L.full_matrix()
    L = np.asarray(L, dtype=np.float64)
    if L.ndim == 1:
        L = L[:, None]
    if L.shape[0] == system.n_dofs:
        return L
    if L.shape[0] == system.n_fields * system.n_vertices:
        return system.restrict(L)
    raise InvalidArgumentError(
        f"basis has {L.shape[0]} rows; system has {system.n_dofs} active dofs "
        f"and {system.n_fields * system.n_vertices} background dofs")


def project(system: AssembledSystem, basis: Union[np.ndarray, ReducedBasis],
            mu=None) -> ReducedSystem:
    """
    Galerkin projection A_r = L^T A L, F_r = L^T F

    Raises:
        InvalidArgumentError: basis rows match neither the active nor the
            background dof count
    """
    L = active_rows(system, basis)
    A_r = transpose_matmul(L, matmul(system.A, L))
    F_r = transpose_matmul(L, system.F)
    provenance = system.provenance
    if isinstance(basis, ReducedBasis) and basis.provenance:
        provenance = f"{provenance} / {basis.provenance}"
    return ReducedSystem(A_r=A_r, F_r=F_r, mu=None if mu is None else np.atleast_1d(mu),
                         provenance=provenance)


def solve_online(red: ReducedSystem) -> np.ndarray:
    """Reduced coefficients a(mu); a singular A_r raises RankDeficientError"""
    return dense_lu_solve(red.A_r, red.F_r)


def reconstruct(L: np.ndarray, a: np.ndarray) -> np.ndarray:
    """u_r = L a"""
    return np.asarray(L) @ np.asarray(a)


@dataclass(eq=False)
class OnlineSolution:
    """
    Attributes:
        coefficients: reduced solution a(mu)
        values: background field (inactive entries zero)
        system: the full-order system assembled at mu
        assembly_seconds: geometry classification + full-order assembly
        online_seconds: mode transport + projection + reduced solve
        modes: basis rows of the active dofs at mu
    """
    coefficients: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    system: AssembledSystem = field(repr=False)
    discretization: object = field(repr=False)
    assembly_seconds: float = 0.0
    online_seconds: float = 0.0
    modes: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def total_seconds(self) -> float:
        return self.assembly_seconds + self.online_seconds


class OnlineSolver:
    """Online stage for one scenario and one (possibly transported) basis"""

    def __init__(self, scenario: Scenario, mesh: BackgroundMesh, basis: ReducedBasis, options=None):
        self.scenario = scenario
        self.mesh = mesh
        self.basis = basis
        self.options = options
        self.transporter = (Transporter(mesh, scenario.level_set, basis.reference or scenario.reference)
                            if basis.transported else None)
        self._static = None if basis.transported else basis.full_matrix()

    def modes_at(self, mu) -> np.ndarray:
        """Background basis in the configuration at mu"""
        if self.transporter is None:
            return self._static
        blocks = {name: self.transporter.inverse(block, mu) for name, block in self.basis.blocks.items()}
        return self.basis.full_matrix(blocks)

    def solve_discretized(self, disc, mu, L_full: Optional[np.ndarray] = None) -> OnlineSolution:
        start = time.perf_counter()
        L_full = self.modes_at(mu) if L_full is None else L_full
        L = active_rows(disc.system, L_full)
        red = project(disc.system, L, mu)
        a = solve_online(red)
        field_active = reconstruct(L, a)
        elapsed = time.perf_counter() - start
        return OnlineSolution(
            coefficients=a,
            values=disc.system.embed(field_active),
            system=disc.system,
            discretization=disc,
            assembly_seconds=disc.assembly_seconds,
            online_seconds=elapsed,
            modes=L,
        )

    def solve(self, mu) -> OnlineSolution:
        mu = self.scenario.check_parameter(mu)
        disc = self.scenario.discretize(self.mesh, mu, self.options)
        solution = self.solve_discretized(disc, mu)
        logger.debug("online mu=%s: %d modes, %.4fs", np.round(mu, 6).tolist(),
                     solution.coefficients.size, solution.total_seconds)
        return solution
