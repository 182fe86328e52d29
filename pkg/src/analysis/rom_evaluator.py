"""
ROM Evaluator
=============
Compare reduced solutions against full-order solutions over a test set and
time both pipelines.

Errors are relative and measured only on the active dofs at the query
parameter (ghost values never count):

    galerkin_err   ||u_h - u_r|| / ||u_h||       reduced Galerkin solution
    proj_err       ||u_h - P u_h|| / ||u_h||     best approximation in the basis

with the euclidean norm on active dofs and, in the *_mass columns, the
lumped-mass weighted norm. Stokes reports velocity (_u) and pressure (_p)
errors separately. Every error column is the mean over the test set of the
per-parameter relative errors.

Timings follow the full accounting of the reduced pipeline:

    t_fom = classification + assembly + sparse solve
    t_rb  = classification + assembly + mode transport + projection + reduced solve
    savings_pct = 100 (t_fom - t_rb) / t_fom,   speedup = t_fom / t_rb
"""

import logging
import time
import warnings
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.linalg.sparse_solvers import solve_sparse
from src.mesh.background_mesh import BackgroundMesh
from src.models.basis_store import basis_for_modes
from src.models.reduced_model import OnlineSolver, ReducedBasis
from src.models.supremizer import EnrichedVelocityBasis
from src.scenarios.catalog import Scenario

logger = logging.getLogger(__name__)

BENCHMARK_REPEATS = 5


def relative_error(reference: np.ndarray, approx: np.ndarray,
                   weights: Optional[np.ndarray] = None) -> float:
    """Relative (weighted) 2-norm error; absolute when the reference vanishes"""
    w = np.ones_like(reference) if weights is None else weights
    diff = float(np.sqrt(np.sum(w * (reference - approx) ** 2)))
    norm = float(np.sqrt(np.sum(w * reference ** 2)))
    return diff / norm if norm > 0.0 else diff


def projection_error(reference: np.ndarray, L: np.ndarray,
                     weights: Optional[np.ndarray] = None) -> float:
    """Relative error of the best (weighted least-squares) approximation in span(L)"""
    if L.shape[1] == 0:
        return relative_error(reference, np.zeros_like(reference), weights)
    s = np.ones_like(reference) if weights is None else np.sqrt(weights)
    coef, *_ = np.linalg.lstsq(s[:, None] * L, s * reference, rcond=None)
    return relative_error(reference, L @ coef, weights)


def active_mass_weights(mesh: BackgroundMesh, system) -> np.ndarray:
    """Lumped-mass weights of the active dofs, repeated per field"""
    lumped = np.asarray(mesh.mass_matrix(lumped=True).diagonal())
    return np.tile(lumped[system.active_vertices], system.n_fields)


def error_blocks(scenario: Scenario, basis: ReducedBasis, n_active: int) -> Dict[str, tuple]:
    """Per error block: (row slice over active dofs, column slice of the basis, suffix)"""
    if not scenario.is_stokes:
        return {'T': (slice(0, n_active), slice(0, basis.widths['T']), '')}
    n_u = basis.widths['u']
    return {
        'u': (slice(0, 2 * n_active), slice(0, n_u), '_u'),
        'p': (slice(2 * n_active, 3 * n_active), slice(n_u, n_u + basis.widths['p']), '_p'),
    }


def build_solvers(scenario: Scenario, mesh: BackgroundMesh, basis: ReducedBasis,
                  modes: Sequence[int], enriched: Optional[EnrichedVelocityBasis] = None,
                  options=None) -> Dict[int, OnlineSolver]:
    """One online solver per mode count"""
    return {int(n): OnlineSolver(scenario, mesh, basis_for_modes(basis, n, enriched), options)
            for n in modes}


def evaluate_parameter(scenario: Scenario, mesh: BackgroundMesh, mu: np.ndarray,
                       solvers: Dict[int, OnlineSolver], options=None, index: int = 0) -> List[dict]:
    """Full-order and reduced solves at one test parameter, one row per mode count"""
    mu = scenario.check_parameter(mu)
    disc = scenario.discretize(mesh, mu, options)
    system = disc.system
    start = time.perf_counter()
    fom = solve_sparse(system.A, system.F, symmetric=system.symmetric)
    fom_solve = time.perf_counter() - start
    weights = active_mass_weights(mesh, system)

    rows = []
    for n, solver in solvers.items():
        sol = solver.solve_discretized(disc, mu)
        rom = system.restrict(sol.values)
        row = {'index': index}
        for k, value in enumerate(mu):
            row[f'mu_{k}'] = float(value)
        row['modes'] = n
        row['width'] = solver.basis.n_modes
        for rows_slice, cols, suffix in error_blocks(scenario, solver.basis, system.n_active).values():
            ref = fom[rows_slice]
            L = sol.modes[rows_slice, cols]
            w = weights[rows_slice]
            row[f'proj_err{suffix}'] = projection_error(ref, L)
            row[f'galerkin_err{suffix}'] = relative_error(ref, rom[rows_slice])
            row[f'proj_err{suffix}_mass'] = projection_error(ref, L, w)
            row[f'galerkin_err{suffix}_mass'] = relative_error(ref, rom[rows_slice], w)
        row['assembly_seconds'] = disc.assembly_seconds
        row['online_seconds'] = sol.online_seconds
        row['fom_solve_seconds'] = fom_solve
        rows.append(row)
    return rows


def check_distinct(test: np.ndarray, train: Optional[np.ndarray], tol: float = 1e-12) -> int:
    """Number of test parameters that coincide with a training parameter (warns if any)"""
    if train is None or train.size == 0 or test.size == 0:
        return 0
    d = np.abs(test[:, None, :] - train[None, :, :]).max(axis=2)
    clashes = int(np.sum(d.min(axis=1) <= tol))
    if clashes:
        warnings.warn(f"{clashes} test parameter(s) coincide with training parameters", UserWarning)
    return clashes


def summarize(details: pd.DataFrame) -> pd.DataFrame:
    """Mean over the test set per mode count, with the timing columns"""
    error_cols = [c for c in details.columns if c.startswith(('proj_err', 'galerkin_err'))]
    details = details.assign(
        t_rb_seconds=details['assembly_seconds'] + details['online_seconds'],
        t_fom_seconds=details['assembly_seconds'] + details['fom_solve_seconds'],
    )
    report = details.groupby('modes', sort=True)[error_cols + ['width', 't_rb_seconds', 't_fom_seconds']].mean()
    report = report.reset_index()
    report['width'] = report['width'].round().astype(int)
    report['savings_pct'] = 100.0 * (report['t_fom_seconds'] - report['t_rb_seconds']) / report['t_fom_seconds']
    report['speedup'] = report['t_fom_seconds'] / report['t_rb_seconds']
    return report


def evaluate(scenario: Scenario, mesh: BackgroundMesh, basis: ReducedBasis, parameters: np.ndarray,
             modes: Sequence[int], enriched: Optional[EnrichedVelocityBasis] = None, options=None,
             threads: int = 1, train_parameters: Optional[np.ndarray] = None):
    """
    Error and timing report over a test set

    Returns:
        (per-mode-count report, per-parameter details) DataFrames
    """
    parameters = np.asarray(parameters, dtype=np.float64).reshape(-1, scenario.dimension)
    check_distinct(parameters, train_parameters)
    solvers = build_solvers(scenario, mesh, basis, modes, enriched, options)

    chunks = Parallel(n_jobs=threads)(
        delayed(evaluate_parameter)(scenario, mesh, mu, solvers, options, i)
        for i, mu in enumerate(parameters)
    )
    details = pd.DataFrame([row for chunk in chunks for row in chunk])
    if details.empty:
        return details, details
    report = summarize(details)
    logger.info("evaluated %d test parameters at mode counts %s", parameters.shape[0], list(solvers))
    return report, details


def _median_seconds(fn, repeats: int) -> float:
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return float(np.median(samples))


def benchmark(scenario: Scenario, mesh: BackgroundMesh, basis: ReducedBasis, parameters: np.ndarray,
              modes: Sequence[int], enriched: Optional[EnrichedVelocityBasis] = None, options=None,
              repeats: int = BENCHMARK_REPEATS) -> pd.DataFrame:
    """
    Wall-clock table: FOM row plus one row per mode count

    Every timing is the median of `repeats` runs per parameter, averaged over
    the parameters; reduced timings include the full-order assembly.
    """
    parameters = np.asarray(parameters, dtype=np.float64).reshape(-1, scenario.dimension)
    solvers = build_solvers(scenario, mesh, basis, modes, enriched, options)

    def fom_run(mu):
        disc = scenario.discretize(mesh, mu, options)
        solve_sparse(disc.system.A, disc.system.F, symmetric=disc.system.symmetric)

    def rom_run(solver, mu):
        solver.solve_discretized(scenario.discretize(mesh, mu, options), mu)

    t_fom = float(np.mean([_median_seconds(lambda: fom_run(mu), repeats) for mu in parameters]))
    n_dofs = scenario.discretize(mesh, parameters[0], options).system.n_dofs
    rows = [{'stage': 'FOM', 'modes': 0, 'dofs': n_dofs, 't_seconds': t_fom,
             't_fom_seconds': t_fom, 'savings_pct': 0.0, 'speedup': 1.0}]
    for n, solver in solvers.items():
        t_rb = float(np.mean([_median_seconds(lambda: rom_run(solver, mu), repeats) for mu in parameters]))
        rows.append({
            'stage': 'ROM',
            'modes': n,
            'dofs': solver.basis.n_modes,
            't_seconds': t_rb,
            't_fom_seconds': t_fom,
            'savings_pct': 100.0 * (t_fom - t_rb) / t_fom,
            'speedup': t_fom / t_rb,
        })
        logger.info("benchmark %d modes: %.4fs vs FOM %.4fs", n, t_rb, t_fom)
    return pd.DataFrame(rows)


def write_report(frame: pd.DataFrame, path, notes: Iterable[str] = ()) -> Path:
    """CSV with '#' comment lines above the header"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as fh:
        for note in notes:
            fh.write(f"# {note}\n")
        frame.to_csv(fh, index=False)
    return path


def read_report(path) -> pd.DataFrame:
    return pd.read_csv(path, comment='#')
