"""
Snapshot Store
==============
On-disk layout of an offline sweep:

    manifest.txt        key=value lines (scenario, k, N_h, N_s, policy, mu_bar,
                        seed, mesh, per-column mu)
    raw.urm             zero-extended, untransported columns (all fields stacked)
    active.urm          per-column activity masks (1.0 / 0.0)
    snapshots_<b>.urm   policy-applied block b ('T', or 'u' and 'p')
    timings.csv         per-parameter wall-clock times and status

Wall-clock times live only in timings.csv; every other file is a function of
(config, seed).
"""

from pathlib import Path
from typing import Dict, Optional

import numpy as np
import pandas as pd

from src.linalg.matrix_io import read_matrix, write_matrix
from src.snapshots.sweep import SnapshotMatrix, SweepResult

MANIFEST = 'manifest.txt'
TIMINGS = 'timings.csv'


def format_vector(values) -> str:
    return ','.join(repr(float(v)) for v in np.atleast_1d(values))


def parse_vector(text: str) -> np.ndarray:
    text = text.strip()
    if not text:
        return np.zeros(0)
    return np.array([float(v) for v in text.split(',')])


def write_manifest(path, entries: Dict[str, object]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as fh:
        for key, value in entries.items():
            fh.write(f"{key}={value}\n")
    return path


def read_manifest(path) -> Dict[str, str]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"manifest not found: {path}")
    entries = {}
    for line in path.read_text(encoding='utf-8').splitlines():
        if not line.strip() or line.startswith('#'):
            continue
        key, _, value = line.partition('=')
        entries[key.strip()] = value.strip()
    return entries


def write_snapshot_store(directory, scenario_name: str, result: SweepResult, seed: int,
                         nx: int, ny: int, n_vertices: int) -> Path:
    """Persist a sweep; returns the directory"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    snaps = result.snapshots

    entries = {
        'scenario': scenario_name,
        'k': result.parameters.shape[1] if result.parameters.size else len(snaps.reference),
        'N_h': n_vertices,
        'N_s': snaps.n_columns,
        'mesh': f"{nx}x{ny}",
        'blocks': ','.join(snaps.block_names),
        'extension': snaps.extension,
        'transported': str(snaps.transported).lower(),
        'mu_ref': format_vector(snaps.reference),
        'seed': seed,
        'failed': len(result.failures),
    }
    for j, mu in enumerate(result.parameters):
        entries[f'mu_{j}'] = format_vector(mu)
    write_manifest(directory / MANIFEST, entries)

    write_matrix(directory / 'raw.urm', result.raw)
    write_matrix(directory / 'active.urm', result.active.astype(np.float64))
    for name, block in snaps.data.items():
        write_matrix(directory / f'snapshots_{name}.urm', block)
    result.timings.to_csv(directory / TIMINGS, index=False)
    return directory


class SnapshotStore:
    """Read access to a store written by write_snapshot_store"""

    def __init__(self, directory):
        self.directory = Path(directory)
        if not (self.directory / MANIFEST).exists():
            raise FileNotFoundError(
                f"no snapshot store in {self.directory}. Run: python run_pipeline.py offline first")
        self.manifest = read_manifest(self.directory / MANIFEST)

    @property
    def scenario(self) -> str:
        return self.manifest['scenario']

    @property
    def n_columns(self) -> int:
        return int(self.manifest['N_s'])

    @property
    def seed(self) -> int:
        return int(self.manifest['seed'])

    def parameters(self) -> np.ndarray:
        k = int(self.manifest['k'])
        rows = [parse_vector(self.manifest[f'mu_{j}']) for j in range(self.n_columns)]
        return np.array(rows).reshape(-1, k)

    def raw(self) -> np.ndarray:
        return read_matrix(self.directory / 'raw.urm', kind='dense')

    def active(self) -> np.ndarray:
        return read_matrix(self.directory / 'active.urm', kind='dense') > 0.5

    def timings(self) -> Optional[pd.DataFrame]:
        path = self.directory / TIMINGS
        return pd.read_csv(path) if path.exists() else None

    def snapshots(self) -> SnapshotMatrix:
        blocks = [b for b in self.manifest['blocks'].split(',') if b]
        data = {b: read_matrix(self.directory / f'snapshots_{b}.urm', kind='dense') for b in blocks}
        return SnapshotMatrix(
            data=data,
            parameters=self.parameters(),
            active=self.active(),
            extension=self.manifest['extension'],
            transported=self.manifest['transported'] == 'true',
            reference=tuple(parse_vector(self.manifest['mu_ref'])),
        )
