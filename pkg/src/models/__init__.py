"""
Reduced models: POD bases, supremizer enrichment, Galerkin projection, online solve
"""

from src.models.pod import PodBasis, inner_product_matrix, mgs, pod, pod_energy
from src.models.supremizer import (
    EnrichedVelocityBasis,
    compute_supremizers,
    inf_sup_proxy,
    supremizer_enrich,
)
from src.models.reduced_model import (
    OnlineSolver,
    ReducedBasis,
    ReducedSystem,
    project,
    reconstruct,
    solve_online,
)
from src.models.basis_store import BasisStore, basis_for_modes, write_basis_store

__all__ = [
    'PodBasis', 'inner_product_matrix', 'mgs', 'pod', 'pod_energy',
    'EnrichedVelocityBasis', 'compute_supremizers', 'inf_sup_proxy', 'supremizer_enrich',
    'OnlineSolver', 'ReducedBasis', 'ReducedSystem', 'project', 'reconstruct', 'solve_online',
    'BasisStore', 'basis_for_modes', 'write_basis_store',
]
