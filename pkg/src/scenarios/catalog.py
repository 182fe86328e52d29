"""
Scenario Catalog
================
The four shipped parametrised problems:

    heat      SBM Poisson outside a 0.8 x 0.7 rectangle at (0, mu), mu in [-0.5, 0.5]
    stokes1p  SBM Stokes past a cylinder R = 0.2 at (-1, mu1), mu1 in [-0.65, 0.65]
    stokes2p  SBM Stokes past a cylinder R = 0.2 at (mu0, mu1)
    ellipse   CutFEM Poisson inside an ellipse with 4 shape/position parameters

A Scenario turns a parameter vector into a level set, problem data and an
assembled full-order system on the fixed background mesh.
"""

import time
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from src.geometry.cut_cell import classify_cut
from src.geometry.level_set import EXTERIOR, INTERIOR, Box, Circle, Ellipse, LevelSet
from src.geometry.surrogate import build_surrogate
from src.mesh.background_mesh import BackgroundMesh, build_structured_mesh
from src.solvers.cutfem_poisson import assemble_poisson_cutfem
from src.solvers.problem_data import (
    DIRICHLET,
    OPEN,
    SLIP,
    CutfemOptions,
    OuterCondition,
    ProblemData,
    SbmOptions,
)
from src.solvers.sbm_poisson import assemble_poisson_sbm
from src.solvers.sbm_stokes import assemble_stokes_sbm
from src.solvers.system import AssembledSystem
from src.utils.errors import ConfigError

SBM_POISSON = 'sbm-poisson'
SBM_STOKES = 'sbm-stokes'
CUTFEM_POISSON = 'cutfem-poisson'


@dataclass(frozen=True)
class Discretization:
    """Assembled system at one parameter with its geometry and assembly time"""
    system: AssembledSystem
    geometry: object
    level_set: LevelSet
    assembly_seconds: float


@dataclass(frozen=True)
class Scenario:
    """
    Attributes:
        name: scenario id
        method: one of sbm-poisson, sbm-stokes, cutfem-poisson
        bounds: background rectangle (xmin, xmax, ymin, ymax)
        resolution: default (nx, ny)
        ranges: per-axis parameter ranges
        reference: reference parameter mu_bar (transport and supremizers)
        level_set_factory: mu -> LevelSet
        data_factory: mu -> ProblemData
        defaults: default ScenarioConfig values specific to this scenario
    """
    name: str
    method: str
    bounds: Tuple[float, float, float, float]
    resolution: Tuple[int, int]
    ranges: Tuple[Tuple[float, float], ...]
    reference: Tuple[float, ...]
    level_set_factory: Callable[[np.ndarray], LevelSet] = field(repr=False)
    data_factory: Callable[[np.ndarray], ProblemData] = field(repr=False)
    defaults: Dict[str, object] = field(default_factory=dict, repr=False)

    @property
    def dimension(self) -> int:
        return len(self.ranges)

    @property
    def fields(self) -> Tuple[str, ...]:
        return ('u_x', 'u_y', 'p') if self.method == SBM_STOKES else ('T',)

    @property
    def is_stokes(self) -> bool:
        return self.method == SBM_STOKES

    def build_mesh(self, nx: Optional[int] = None, ny: Optional[int] = None) -> BackgroundMesh:
        nx = self.resolution[0] if nx is None else nx
        ny = self.resolution[1] if ny is None else ny
        return build_structured_mesh(self.bounds, nx, ny)

    def check_parameter(self, mu) -> np.ndarray:
        mu = np.atleast_1d(np.asarray(mu, dtype=np.float64))
        if mu.shape != (self.dimension,):
            raise ConfigError(
                f"scenario {self.name} takes {self.dimension} parameter(s), got {mu.shape[0]}")
        return mu

    def level_set(self, mu) -> LevelSet:
        return self.level_set_factory(self.check_parameter(mu))

    def problem_data(self, mu) -> ProblemData:
        return self.data_factory(self.check_parameter(mu))

    def discretize(self, mesh: BackgroundMesh, mu, options=None) -> Discretization:
        """Geometry + assembly at mu, timed together"""
        start = time.perf_counter()
        ls = self.level_set(mu)
        data = self.problem_data(mu)
        if self.method == CUTFEM_POISSON:
            opts = options if options is not None else CutfemOptions()
            geometry = classify_cut(mesh, ls)
            system = assemble_poisson_cutfem(mesh, geometry, data, opts)
        else:
            opts = options if options is not None else SbmOptions()
            geometry = build_surrogate(mesh, ls)
            if self.method == SBM_STOKES:
                system = assemble_stokes_sbm(mesh, geometry, data, opts)
            else:
                system = assemble_poisson_sbm(mesh, geometry, data, opts)
        elapsed = time.perf_counter() - start
        return Discretization(system=system, geometry=geometry, level_set=ls,
                              assembly_seconds=elapsed)

    def make_options(self, overrides: Optional[Dict[str, float]] = None):
        overrides = dict(overrides or {})
        try:
            if self.method == CUTFEM_POISSON:
                return CutfemOptions(**overrides)
            return SbmOptions(**overrides)
        except TypeError as e:
            raise ConfigError(f"bad penalty overrides for {self.name}: {e}")


def _heat_level_set(mu):
    return Box(orientation=EXTERIOR, center=(0.0, float(mu[0])), half_width=0.4, half_height=0.35)


def _heat_data(mu):
    return ProblemData(source=1.0, dirichlet=0.0)


def _stokes_data(mu):
    return ProblemData(
        source=(1.0, 0.0),
        dirichlet=(0.0, 0.0),
        viscosity=1.0,
        outer={
            'left': OuterCondition(DIRICHLET, (1.0, 0.0)),
            'right': OuterCondition(OPEN, 0.0),
            'bottom': OuterCondition(SLIP),
            'top': OuterCondition(SLIP),
        },
    )


def _stokes1p_level_set(mu):
    return Circle(orientation=EXTERIOR, center=(-1.0, float(mu[0])), radius=0.2)


def _stokes2p_level_set(mu):
    return Circle(orientation=EXTERIOR, center=(float(mu[0]), float(mu[1])), radius=0.2)


def _ellipse_level_set(mu):
    return Ellipse(orientation=INTERIOR, mu=tuple(float(v) for v in mu), R=0.05)


def _ellipse_dirichlet(points):
    return 0.5 + points[:, 0] * points[:, 1]


def _ellipse_data(mu):
    return ProblemData(
        source=20.0,
        dirichlet=_ellipse_dirichlet,
        outer={side: OuterCondition(DIRICHLET, _ellipse_dirichlet)
               for side in ('left', 'right', 'bottom', 'top')},
    )


_HEAT_MODES = (10, 20, 30, 40, 50, 60, 70, 80, 90, 100)
_STOKES_MODES = (5, 10, 20, 30, 40, 50)

SCENARIOS: Dict[str, Scenario] = {
    'heat': Scenario(
        name='heat',
        method=SBM_POISSON,
        bounds=(-2.0, 2.0, -1.0, 1.0),
        resolution=(120, 60),
        ranges=((-0.5, 0.5),),
        reference=(0.0,),
        level_set_factory=_heat_level_set,
        data_factory=_heat_data,
        defaults={'n_train': 400, 'n_test': 50, 'modes': _HEAT_MODES,
                  'extension': 'zero', 'transport': False, 'supremizers': False},
    ),
    'stokes1p': Scenario(
        name='stokes1p',
        method=SBM_STOKES,
        bounds=(-2.0, 2.0, -1.0, 1.0),
        resolution=(160, 80),
        ranges=((-0.65, 0.65),),
        reference=(0.0,),
        level_set_factory=_stokes1p_level_set,
        data_factory=_stokes_data,
        defaults={'n_train': 256, 'n_test': 20, 'modes': _STOKES_MODES,
                  'extension': 'zero', 'transport': False, 'supremizers': True},
    ),
    'stokes2p': Scenario(
        name='stokes2p',
        method=SBM_STOKES,
        bounds=(-2.0, 2.0, -1.0, 1.0),
        resolution=(160, 80),
        ranges=((-1.5, -1.0), (-0.15, 0.15)),
        reference=(-1.25, 0.0),
        level_set_factory=_stokes2p_level_set,
        data_factory=_stokes_data,
        defaults={'n_train': 256, 'n_test': 20, 'modes': _STOKES_MODES,
                  'extension': 'zero', 'transport': False, 'supremizers': True},
    ),
    'ellipse': Scenario(
        name='ellipse',
        method=CUTFEM_POISSON,
        bounds=(-1.2, 1.2, -1.2, 1.2),
        resolution=(96, 96),
        ranges=((0.3, 1.8), (0.3, 1.8), (-0.85, 0.85), (-0.85, 0.85)),
        reference=(1.0, 1.0, 0.0, 0.0),
        level_set_factory=_ellipse_level_set,
        data_factory=_ellipse_data,
        defaults={'n_train': 200, 'n_test': 20, 'modes': (10, 20, 40, 60),
                  'extension': 'smooth', 'transport': True, 'supremizers': False},
    ),
}


def get_scenario(name: str) -> Scenario:
    if name not in SCENARIOS:
        raise ConfigError(f"unknown scenario {name!r}, expected one of {sorted(SCENARIOS)}")
    return SCENARIOS[name]
