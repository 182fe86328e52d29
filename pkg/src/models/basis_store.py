"""
Basis Store
===========
On-disk layout of one POD basis variant (under basis/<extension>-<transport>/):

    manifest.txt         key=value lines (scenario, inner product, policy,
                         mu_bar, widths, supremizer prefix, inf-sup proxies)
    modes_<b>.urm        POD modes of block b ('T', or 'u' and 'p')
    modes_u_enriched.urm velocity modes interleaved with supremizers
    eigenvalues.csv      full correlation spectrum per block
"""

from pathlib import Path
from typing import Dict, Optional

import numpy as np
import pandas as pd

from src.linalg.matrix_io import read_matrix, write_matrix
from src.models.reduced_model import ReducedBasis
from src.models.supremizer import EnrichedVelocityBasis
from src.snapshots.store import format_vector, parse_vector, read_manifest, write_manifest

MANIFEST = 'manifest.txt'
EIGENVALUES = 'eigenvalues.csv'
ENRICHED = 'u_enriched'


def variant_name(extension: str, transport: bool) -> str:
    return f"{extension}-{'transport' if transport else 'fixed'}"


def eigenvalue_frame(eigenvalues: Dict[str, np.ndarray]) -> pd.DataFrame:
    """Long table: block, index, eigenvalue, relative (lambda_i / lambda_1), tail energy"""
    frames = []
    for block, lam in eigenvalues.items():
        lam = np.asarray(lam, dtype=np.float64)
        lam1 = lam[0] if lam.size and lam[0] > 0 else 1.0
        tail = np.concatenate([np.cumsum(lam[::-1])[::-1][1:], [0.0]]) if lam.size else lam
        frames.append(pd.DataFrame({
            'block': block,
            'index': np.arange(1, lam.size + 1),
            'eigenvalue': lam,
            'relative': lam / lam1,
            'tail_energy': tail,
        }))
    return pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()


def write_basis_store(directory, scenario_name: str, basis: ReducedBasis, inner: str,
                      extension: str, eigenvalues: Dict[str, np.ndarray], n_snapshots: int,
                      enriched: Optional[EnrichedVelocityBasis] = None,
                      extra: Optional[Dict[str, object]] = None) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    entries = {
        'scenario': scenario_name,
        'inner': inner,
        'extension': extension,
        'transported': str(basis.transported).lower(),
        'mu_ref': format_vector(basis.reference),
        'N_s': n_snapshots,
        'blocks': ','.join(basis.blocks),
        'layout': ';'.join(f"{name}:{a}:{b}" for name, (a, b) in basis.layout.items()),
        'widths': ','.join(str(w) for w in basis.widths.values()),
        'provenance': basis.provenance,
    }
    if enriched is not None:
        entries['supremizer_prefix'] = ','.join(str(int(v)) for v in enriched.prefix)
        entries['supremizers_skipped'] = ','.join(str(i) for i in enriched.skipped)
        write_matrix(directory / f'modes_{ENRICHED}.urm', enriched.modes)
    entries.update(extra or {})
    write_manifest(directory / MANIFEST, entries)

    for name, block in basis.blocks.items():
        write_matrix(directory / f'modes_{name}.urm', block)
    eigenvalue_frame(eigenvalues).to_csv(directory / EIGENVALUES, index=False)
    return directory


class BasisStore:
    """Read access to a basis variant written by write_basis_store"""

    def __init__(self, directory):
        self.directory = Path(directory)
        if not (self.directory / MANIFEST).exists():
            raise FileNotFoundError(
                f"no basis in {self.directory}. Run: python run_pipeline.py pod first")
        self.manifest = read_manifest(self.directory / MANIFEST)

    @property
    def scenario(self) -> str:
        return self.manifest['scenario']

    @property
    def inner(self) -> str:
        return self.manifest['inner']

    @property
    def has_supremizers(self) -> bool:
        return 'supremizer_prefix' in self.manifest

    def layout(self) -> Dict[str, tuple]:
        out = {}
        for item in self.manifest['layout'].split(';'):
            name, a, b = item.split(':')
            out[name] = (int(a), int(b))
        return out

    def supremizer_prefix(self) -> np.ndarray:
        return np.array([int(v) for v in self.manifest['supremizer_prefix'].split(',')], dtype=np.int64)

    def eigenvalues(self) -> pd.DataFrame:
        return pd.read_csv(self.directory / EIGENVALUES)

    def basis(self) -> ReducedBasis:
        blocks = {name: read_matrix(self.directory / f'modes_{name}.urm', kind='dense')
                  for name in self.manifest['blocks'].split(',') if name}
        return ReducedBasis(
            blocks=blocks,
            layout=self.layout(),
            transported=self.manifest['transported'] == 'true',
            reference=tuple(parse_vector(self.manifest['mu_ref'])),
            provenance=self.manifest.get('provenance', ''),
        )

    def enriched(self) -> EnrichedVelocityBasis:
        if not self.has_supremizers:
            raise FileNotFoundError(
                f"basis in {self.directory} has no supremizers. "
                "Run: python run_pipeline.py pod --supremizers true first")
        modes = read_matrix(self.directory / f'modes_{ENRICHED}.urm', kind='dense')
        skipped = tuple(int(v) for v in self.manifest.get('supremizers_skipped', '').split(',') if v)
        return EnrichedVelocityBasis(modes=modes, prefix=self.supremizer_prefix(),
                                     supremizers=np.zeros((modes.shape[0], 0)), skipped=skipped)


def basis_for_modes(basis: ReducedBasis, n: int,
                    enriched: Optional[EnrichedVelocityBasis] = None) -> ReducedBasis:
    """
    Leading n modes of every block; with supremizers the velocity block is the
    enriched prefix spanning the first n velocity modes and n supremizers
    """
    widths = {name: int(n) for name in basis.blocks}
    if enriched is None:
        return basis.truncated(widths)
    blocks = dict(basis.truncated(widths).blocks)
    blocks['u'] = enriched.truncated(n)
    return ReducedBasis(blocks, dict(basis.layout), basis.transported, basis.reference,
                        f"{basis.provenance}+supremizers")
