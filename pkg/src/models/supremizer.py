"""
Supremizer Enrichment
=====================
Velocity supremizers for the Stokes reduced basis. For every pressure mode
chi the supremizer s solves

    K_u s = B_up chi

on the active velocity dofs at the reference parameter, where K_u is the
velocity H1 inner product (strong Dirichlet dofs eliminated, so s vanishes
there) and B_up the pressure-velocity coupling block of the assembled saddle
system. Velocity modes and supremizers are interleaved [phi_1, eta_1, phi_2,
eta_2, ...] before Gram-Schmidt, so every prefix of the enriched basis holds
the first N velocity modes together with the first N supremizers.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from src.linalg.sparse_solvers import solve_sparse
from src.models.pod import mgs
from src.snapshots.extension import Extender
from src.solvers.sbm_stokes import velocity_h1_matrix
from src.solvers.system import AssembledSystem, apply_strong_dirichlet
from src.utils.errors import InvalidArgumentError

logger = logging.getLogger(__name__)

SUPREMIZER_MIN_NORM = 1e-12


@dataclass(eq=False)
class EnrichedVelocityBasis:
    """
    Attributes:
        modes: (2 N_h, width) orthonormal interleaved velocity/supremizer columns
        prefix: prefix[N] = number of columns spanning the first N velocity
            modes and the first N supremizers (prefix[0] = 0)
        supremizers: (2 N_h, n_sup) raw supremizers before orthonormalisation
        skipped: indices of pressure modes whose supremizer was skipped
    """
    modes: np.ndarray = field(repr=False)
    prefix: np.ndarray = field(repr=False)
    supremizers: np.ndarray = field(repr=False)
    skipped: tuple = ()

    @property
    def width(self) -> int:
        return self.modes.shape[1]

    def columns_for(self, n: int) -> int:
        n = min(int(n), self.prefix.size - 1)
        return int(self.prefix[n])

    def truncated(self, n: int) -> np.ndarray:
        return self.modes[:, :self.columns_for(n)]


def compute_supremizers(system: AssembledSystem, surrogate, mesh, pressure_modes: np.ndarray,
                        extender: Optional[Extender] = None) -> np.ndarray:
    """
    Supremizers of background pressure modes for a Stokes system assembled at mu_bar

    Returns:
        (2 N_h, n_p) background velocity columns; skipped (near-zero)
        supremizers are returned as zero columns
    """
    if system.n_fields != 3:
        raise InvalidArgumentError("supremizers need a Stokes (u_x, u_y, p) system")
    nv = mesh.n_vertices
    if pressure_modes.shape[0] != nv:
        raise InvalidArgumentError(
            f"pressure modes have {pressure_modes.shape[0]} rows, mesh has {nv} vertices")

    n_a = system.n_active
    B_up = system.A[:2 * n_a, 2 * n_a:]
    K_u = velocity_h1_matrix(mesh, surrogate)
    dirichlet = np.asarray(system.extras.get('velocity_dirichlet_dofs', np.zeros(0, np.int64)))
    active_mask = system.active_mask()

    K, _ = apply_strong_dirichlet(sp.csr_matrix(K_u), np.zeros(2 * n_a), dirichlet,
                                  np.zeros(dirichlet.size))

    out = np.zeros((2 * nv, pressure_modes.shape[1]))
    for i in range(pressure_modes.shape[1]):
        chi = pressure_modes[system.active_vertices, i]
        b = np.asarray(B_up @ chi, dtype=np.float64)
        b[dirichlet] = 0.0
        if not np.any(b):
            warnings.warn(f"supremizer {i}: pressure mode has no coupling, skipped", UserWarning)
            continue
        s = solve_sparse(K, b, symmetric=True)
        if np.linalg.norm(s) < SUPREMIZER_MIN_NORM:
            warnings.warn(f"supremizer {i}: norm below {SUPREMIZER_MIN_NORM:g}, skipped", UserWarning)
            continue
        full = np.zeros(2 * nv)
        full[:nv][system.active_vertices] = s[:n_a]
        full[nv:][system.active_vertices] = s[n_a:]
        if extender is not None:
            full = extender(full, active_mask)
        out[:, i] = full
    return out


def enrich_velocity_basis(velocity_modes: np.ndarray, supremizers: np.ndarray,
                          weight=None) -> EnrichedVelocityBasis:
    """Interleave velocity modes with supremizers and orthonormalise"""
    n_u = velocity_modes.shape[1]
    n_s = supremizers.shape[1]
    order = []
    sources = []
    skipped = tuple(int(j) for j in range(n_s) if not np.any(supremizers[:, j]))
    for k in range(max(n_u, n_s)):
        if k < n_u:
            order.append(velocity_modes[:, k])
            sources.append(k + 1)
        if k < n_s and k not in skipped:
            order.append(supremizers[:, k])
            sources.append(k + 1)
    V = np.column_stack(order) if order else np.zeros((velocity_modes.shape[0], 0))
    Q, kept = mgs(V, weight)

    # prefix[N] counts kept columns that come from pairs 1..N
    kept_sources = np.asarray(sources, dtype=np.int64)[kept] if kept.size else np.zeros(0, np.int64)
    n_pairs = max(n_u, n_s)
    prefix = np.array([int(np.sum(kept_sources <= n)) for n in range(n_pairs + 1)], dtype=np.int64)
    logger.info("enriched velocity basis: %d velocity modes + %d supremizers -> %d columns",
                n_u, n_s - len(skipped), Q.shape[1])
    return EnrichedVelocityBasis(modes=Q, prefix=prefix, supremizers=supremizers, skipped=skipped)


def supremizer_enrich(velocity_modes: np.ndarray, pressure_modes: np.ndarray, system: AssembledSystem,
                      surrogate, mesh, extender: Optional[Extender] = None,
                      weight=None) -> EnrichedVelocityBasis:
    """Supremizers of the pressure modes at mu_bar, merged into the velocity basis"""
    sup = compute_supremizers(system, surrogate, mesh, pressure_modes, extender)
    return enrich_velocity_basis(velocity_modes, sup, weight)


def inf_sup_proxy(system: AssembledSystem, velocity_modes: np.ndarray,
                  pressure_modes: np.ndarray) -> float:
    """Smallest singular value of the reduced coupling block L_u^T B_up L_p"""
    n_a = system.n_active
    nv = system.n_vertices
    u_rows = np.concatenate([system.active_vertices, nv + system.active_vertices])
    Lu = velocity_modes[u_rows]
    Lp = pressure_modes[system.active_vertices]
    # fewer velocity than pressure columns leaves a nontrivial kernel
    if Lu.shape[1] == 0 or Lp.shape[1] == 0 or Lu.shape[1] < Lp.shape[1]:
        return 0.0
    B_up = system.A[:2 * n_a, 2 * n_a:]
    block = Lu.T @ (B_up @ Lp)
    s = np.linalg.svd(np.asarray(block), compute_uv=False)
    return float(s[-1])
