"""
Convergence Studies
===================
Full-order checks that everything downstream relies on:

1. Manufactured-solution L2 convergence under mesh halving
   - SBM Poisson:    T* = sin(pi x) cos(pi y), -Laplace T* = 2 pi^2 T*, inside
                     a circle of radius 0.7 in [-1, 1]^2
   - CutFEM Poisson: u* = x^2 + y^2, -Laplace u* = -4, same circle
   Second order means an error ratio near 4 between h and h/2.
2. Drag self-convergence for the cylinder flow (SBM Stokes).
3. Ghost-penalty conditioning: a vertical strip whose edges cut one column of
   elements in a sliver of given width fraction; dense condition numbers and
   CG iteration counts with and without ghost penalty.
"""

import logging
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd

from src.geometry.cut_cell import INSIDE, classify_cut
from src.geometry.level_set import INTERIOR, Box, Circle
from src.geometry.quadrature import clip_triangle
from src.geometry.surrogate import build_surrogate
from src.linalg.dense_ops import condition_number
from src.linalg.sparse_solvers import pcg
from src.mesh.background_mesh import BackgroundMesh, build_structured_mesh
from src.scenarios.catalog import get_scenario
from src.solvers.cutfem_poisson import assemble_poisson_cutfem
from src.solvers.problem_data import CutfemOptions, ProblemData, SbmOptions
from src.solvers.sbm_poisson import assemble_poisson_sbm
from src.solvers.sbm_stokes import drag_force
from src.solvers.system import solve_fom
from src.utils.errors import InvalidArgumentError, SolverFailureError

logger = logging.getLogger(__name__)

SQUARE = (-1.0, 1.0, -1.0, 1.0)
MANUFACTURED_RADIUS = 0.7
DEFAULT_LEVELS = (32, 64)
SLIVER_FRACTIONS = (1e-6, 1e-4, 1e-3, 1e-2, 0.1, 0.25, 0.5)

# degree-4 rule on the reference triangle: barycentric points, weights summing to 1
_A1, _B1, _W1 = 0.445948490915965, 0.108103018168070, 0.223381589678011
_A2, _B2, _W2 = 0.091576213509771, 0.816847572980459, 0.109951743655322
TRI6_BARY = np.array([
    [_B1, _A1, _A1], [_A1, _B1, _A1], [_A1, _A1, _B1],
    [_B2, _A2, _A2], [_A2, _B2, _A2], [_A2, _A2, _B2],
])
TRI6_WEIGHTS = np.array([_W1, _W1, _W1, _W2, _W2, _W2])


def sbm_exact(points: np.ndarray) -> np.ndarray:
    return np.sin(np.pi * points[:, 0]) * np.cos(np.pi * points[:, 1])


def sbm_source(points: np.ndarray) -> np.ndarray:
    return 2.0 * np.pi ** 2 * sbm_exact(points)


def cutfem_exact(points: np.ndarray) -> np.ndarray:
    return points[:, 0] ** 2 + points[:, 1] ** 2


def _triangle_rule(coords: np.ndarray):
    """(k, 3, 2) triangles -> points (k, 6, 2), weights (k, 6)"""
    e1 = coords[:, 1] - coords[:, 0]
    e2 = coords[:, 2] - coords[:, 0]
    area = 0.5 * np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
    points = np.einsum('qa,kad->kqd', TRI6_BARY, coords)
    return points, area[:, None] * TRI6_WEIGHTS[None, :]


def _squared_error(mesh: BackgroundMesh, elements: np.ndarray, sub_coords: np.ndarray,
                   nodal: np.ndarray, exact) -> float:
    """Integral of (u_h - u*)^2 over sub-triangles, u_h taken from the given host elements"""
    if elements.size == 0:
        return 0.0
    points, weights = _triangle_rule(sub_coords)
    tri = mesh.triangles[elements]
    x0 = mesh.vertices[tri[:, 0]]
    lam = np.einsum('kad,kqd->kqa', mesh.gradients[elements], points - x0[:, None, :])
    lam[..., 0] += 1.0
    uh = np.einsum('kqa,ka->kq', lam, nodal[tri])
    ue = exact(points.reshape(-1, 2)).reshape(uh.shape)
    return float(np.sum(weights * (uh - ue) ** 2))


def l2_error(mesh: BackgroundMesh, elements: np.ndarray, nodal: np.ndarray, exact) -> float:
    """L2 error of a P1 field over whole elements"""
    elements = np.asarray(elements, dtype=np.int64)
    return float(np.sqrt(_squared_error(mesh, elements, mesh.triangle_coordinates(elements), nodal, exact)))


def l2_error_cut(mesh: BackgroundMesh, cut, nodal: np.ndarray, exact) -> float:
    """L2 error over the clipped physical domain of a cut classification"""
    inside = np.flatnonzero(cut.tags == INSIDE)
    total = _squared_error(mesh, inside, mesh.triangle_coordinates(inside), nodal, exact)
    hosts, subs = [], []
    for e in cut.cut_elements:
        tri = mesh.triangles[e]
        pieces, _ = clip_triangle(mesh.vertices[tri], cut.vertex_values[tri])
        for piece in pieces:
            hosts.append(e)
            subs.append(piece)
    if subs:
        total += _squared_error(mesh, np.array(hosts, dtype=np.int64), np.array(subs), nodal, exact)
    return float(np.sqrt(total))


def _circle():
    return Circle(orientation=INTERIOR, center=(0.0, 0.0), radius=MANUFACTURED_RADIUS)


def sbm_manufactured_error(n: int, opts: SbmOptions = SbmOptions()) -> Dict[str, float]:
    mesh = build_structured_mesh(SQUARE, n, n)
    surrogate = build_surrogate(mesh, _circle())
    data = ProblemData(source=sbm_source, dirichlet=sbm_exact)
    system = assemble_poisson_sbm(mesh, surrogate, data, opts)
    field = solve_fom(system)
    return {'n': n, 'h': mesh.h, 'dofs': system.n_dofs,
            'l2_error': l2_error(mesh, surrogate.elements, field, sbm_exact)}


def cutfem_manufactured_error(n: int, opts: CutfemOptions = CutfemOptions()) -> Dict[str, float]:
    mesh = build_structured_mesh(SQUARE, n, n)
    cut = classify_cut(mesh, _circle())
    data = ProblemData(source=-4.0, dirichlet=cutfem_exact)
    system = assemble_poisson_cutfem(mesh, cut, data, opts)
    field = solve_fom(system)
    return {'n': n, 'h': mesh.h, 'dofs': system.n_dofs,
            'l2_error': l2_error_cut(mesh, cut, field, cutfem_exact)}


def _with_ratios(rows) -> pd.DataFrame:
    frame = pd.DataFrame(rows)
    frame['ratio'] = frame['l2_error'].shift(1) / frame['l2_error']
    frame['order'] = np.log2(frame['ratio'])
    return frame


def convergence_study(method: str, levels: Sequence[int] = DEFAULT_LEVELS) -> pd.DataFrame:
    """
    Error table over mesh levels; ratio = e(h) / e(h/2) against the previous row

    Args:
        method: 'sbm' or 'cutfem'
        levels: cells per side, each typically twice the previous
    """
    runner = {'sbm': sbm_manufactured_error, 'cutfem': cutfem_manufactured_error}.get(method)
    if runner is None:
        raise InvalidArgumentError(f"unknown convergence method {method!r}, expected 'sbm' or 'cutfem'")
    rows = []
    for n in levels:
        row = runner(int(n))
        logger.info("%s manufactured n=%d: L2 error %.3e", method, n, row['l2_error'])
        rows.append(row)
    frame = _with_ratios(rows)
    frame.insert(0, 'method', method)
    return frame


def drag_study(scenario_name: str = 'stokes1p', mu: Optional[Sequence[float]] = None,
               levels: Sequence[int] = (40, 80)) -> pd.DataFrame:
    """
    Drag and lift on the cylinder at successive resolutions (ny = level, nx = 2 level)

    rel_change compares each level's drag with the previous one.
    """
    scenario = get_scenario(scenario_name)
    mu = np.asarray(scenario.reference if mu is None else mu, dtype=np.float64)
    rows = []
    for n in levels:
        mesh = scenario.build_mesh(2 * int(n), int(n))
        disc = scenario.discretize(mesh, mu)
        field = solve_fom(disc.system)
        force = drag_force(mesh, disc.geometry, scenario.problem_data(mu), field)
        rows.append({'nx': 2 * int(n), 'ny': int(n), 'h': mesh.h, 'drag': float(force[0]),
                     'lift': float(force[1])})
    frame = pd.DataFrame(rows)
    frame['rel_change'] = (frame['drag'] - frame['drag'].shift(1)).abs() / frame['drag'].abs()
    return frame


def sliver_strip(mesh: BackgroundMesh, fraction: float) -> Box:
    """Vertical strip |x| < x_k + fraction * dx reaching past the top and bottom of the mesh"""
    xmin, xmax, ymin, ymax = mesh.bounds
    dx = (xmax - xmin) / mesh.nx
    gridline = xmin + dx * (mesh.nx // 2 + mesh.nx // 4) - 0.5 * (xmin + xmax)
    return Box(orientation=INTERIOR, center=(0.5 * (xmin + xmax), 0.5 * (ymin + ymax)),
               half_width=gridline + fraction * dx, half_height=(ymax - ymin))


def _strip_system(mesh: BackgroundMesh, fraction: float, gamma_1: float):
    cut = classify_cut(mesh, sliver_strip(mesh, fraction))
    data = ProblemData(source=1.0, dirichlet=0.0)
    return assemble_poisson_cutfem(mesh, cut, data, CutfemOptions(gamma_1=gamma_1))


def ghost_penalty_conditioning(n: int = 16, fractions: Sequence[float] = SLIVER_FRACTIONS,
                               gammas: Sequence[float] = (0.0, CutfemOptions().gamma_1)) -> pd.DataFrame:
    """Condition number and CG iterations per (cut fraction, ghost-penalty coefficient)"""
    mesh = build_structured_mesh(SQUARE, n, n)
    rows = []
    for fraction in fractions:
        for gamma_1 in gammas:
            system = _strip_system(mesh, float(fraction), float(gamma_1))
            try:
                _, iterations, _ = pcg(system.A, system.F)
            except SolverFailureError as e:
                logger.warning("CG failed at fraction %g, gamma_1 %g: %s", fraction, gamma_1, e)
                iterations = np.nan
            rows.append({
                'fraction': float(fraction),
                'gamma_1': float(gamma_1),
                'dofs': system.n_dofs,
                'condition': condition_number(system.A),
                'cg_iterations': iterations,
            })
    return pd.DataFrame(rows)
