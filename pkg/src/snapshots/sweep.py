"""
Snapshot Sweep
==============
Offline full-order solves over a parameter sample and assembly of the
snapshot matrix under an extension/transport policy.

Raw (zero-extended, untransported) columns and the per-column activity masks
are kept, so every {zero, smooth} x {transport on/off} variant can be rebuilt
from one sweep.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from src.mesh.background_mesh import BackgroundMesh
from src.scenarios.catalog import Scenario
from src.snapshots.extension import ZERO, Extender
from src.snapshots.transport import Transporter
from src.solvers.system import solve_fom
from src.utils.errors import UrmError

logger = logging.getLogger(__name__)


def block_layout(scenario: Scenario) -> Dict[str, Tuple[int, int]]:
    """Snapshot blocks as [start, stop) in units of N_h"""
    if scenario.is_stokes:
        return {'u': (0, 2), 'p': (2, 3)}
    return {'T': (0, 1)}


@dataclass(eq=False)
class SnapshotMatrix:
    """
    Attributes:
        data: block name -> (rows, N_s) matrix (Stokes: 'u' and 'p')
        parameters: (N_s, k)
        active: (N_h, N_s) activity masks of the columns
        extension: 'zero' or 'smooth'
        transported: columns pulled back to the reference configuration
        reference: mu_bar
    """
    data: Dict[str, np.ndarray] = field(repr=False)
    parameters: np.ndarray = field(repr=False)
    active: np.ndarray = field(repr=False)
    extension: str = ZERO
    transported: bool = False
    reference: Tuple[float, ...] = ()

    @property
    def n_columns(self) -> int:
        return self.parameters.shape[0]

    @property
    def block_names(self) -> List[str]:
        return list(self.data)

    def block(self, name: str) -> np.ndarray:
        return self.data[name]

    def stacked(self) -> np.ndarray:
        return np.vstack([self.data[name] for name in self.data])


@dataclass
class FomSolve:
    index: int
    mu: np.ndarray
    field: Optional[np.ndarray] = None
    active: Optional[np.ndarray] = None
    assembly_seconds: float = 0.0
    solve_seconds: float = 0.0
    error: Optional[str] = None


@dataclass(eq=False)
class SweepResult:
    raw: np.ndarray = field(repr=False)
    active: np.ndarray = field(repr=False)
    parameters: np.ndarray = field(repr=False)
    snapshots: SnapshotMatrix = field(repr=False)
    timings: pd.DataFrame = field(repr=False)
    failures: List[FomSolve] = field(default_factory=list)


def solve_parameter(scenario: Scenario, mesh: BackgroundMesh, mu: np.ndarray, index: int = 0,
                    options=None) -> FomSolve:
    """One full-order solve; toolkit errors are captured instead of raised"""
    try:
        disc = scenario.discretize(mesh, mu, options)
        start = time.perf_counter()
        full = solve_fom(disc.system)
        solve_seconds = time.perf_counter() - start
    except UrmError as e:
        logger.warning("parameter %d %s failed: %s", index, np.round(mu, 6).tolist(), e)
        return FomSolve(index=index, mu=np.asarray(mu), error=f"{type(e).__name__}: {e}")
    return FomSolve(
        index=index,
        mu=np.asarray(mu),
        field=full,
        active=disc.system.active_mask(),
        assembly_seconds=disc.assembly_seconds,
        solve_seconds=solve_seconds,
    )


def build_snapshot_matrix(scenario: Scenario, mesh: BackgroundMesh, raw: np.ndarray,
                          active: np.ndarray, parameters: np.ndarray, extension: str = ZERO,
                          transport: bool = False) -> SnapshotMatrix:
    """Apply an extension policy and (optionally) transport to raw sweep columns"""
    extend = Extender(mesh, extension)
    transporter = Transporter(mesh, scenario.level_set, scenario.reference) if transport else None
    columns = []
    for j in range(raw.shape[1]):
        col = extend(raw[:, j], active[:, j])
        if transporter is not None:
            col = transporter.forward(col, parameters[j])
        columns.append(col)
    stacked = np.column_stack(columns) if columns else np.zeros((raw.shape[0], 0))

    nv = mesh.n_vertices
    data = {name: stacked[a * nv:b * nv].copy() for name, (a, b) in block_layout(scenario).items()}
    return SnapshotMatrix(
        data=data,
        parameters=np.asarray(parameters, dtype=np.float64).reshape(-1, scenario.dimension),
        active=active,
        extension=extension,
        transported=transport,
        reference=tuple(scenario.reference),
    )


def timings_frame(solves: List[FomSolve], dimension: int) -> pd.DataFrame:
    rows = []
    for s in solves:
        row = {'index': s.index}
        for k in range(dimension):
            row[f'mu_{k}'] = float(s.mu[k])
        row['assembly_seconds'] = s.assembly_seconds
        row['solve_seconds'] = s.solve_seconds
        row['fom_seconds'] = s.assembly_seconds + s.solve_seconds
        row['status'] = 'ok' if s.error is None else s.error
        rows.append(row)
    return pd.DataFrame(rows)


def run_sweep(scenario: Scenario, mesh: BackgroundMesh, parameters: np.ndarray,
              extension: str = ZERO, transport: bool = False, options=None,
              threads: int = 1) -> SweepResult:
    """
    Full-order solves at every parameter row

    Failed parameters are logged, listed in the timings table and left out of
    the snapshot matrix; columns keep the order of the parameter rows.
    """
    parameters = np.atleast_2d(np.asarray(parameters, dtype=np.float64))
    if parameters.shape[1] != scenario.dimension:
        parameters = parameters.reshape(-1, scenario.dimension)

    solves = Parallel(n_jobs=threads)(
        delayed(solve_parameter)(scenario, mesh, mu, i, options)
        for i, mu in enumerate(parameters)
    )
    ok = [s for s in solves if s.error is None]
    failures = [s for s in solves if s.error is not None]
    for s in ok:
        logger.info("FOM %d mu=%s: %.3fs", s.index, np.round(s.mu, 6).tolist(),
                    s.assembly_seconds + s.solve_seconds)

    n_rows = len(scenario.fields) * mesh.n_vertices
    raw = np.column_stack([s.field for s in ok]) if ok else np.zeros((n_rows, 0))
    active = np.column_stack([s.active for s in ok]) if ok else np.zeros((mesh.n_vertices, 0), bool)
    good_params = np.array([s.mu for s in ok]).reshape(-1, scenario.dimension)

    snapshots = build_snapshot_matrix(scenario, mesh, raw, active, good_params, extension, transport)
    return SweepResult(
        raw=raw,
        active=active,
        parameters=good_params,
        snapshots=snapshots,
        timings=timings_frame(solves, scenario.dimension),
        failures=failures,
    )
