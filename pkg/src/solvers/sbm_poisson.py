"""
SBM Poisson Solver
==================
Shifted Boundary Method for -Lap(T) = g on the surrogate domain, with the
Dirichlet datum shifted from the true boundary by a first-order Taylor
expansion T + grad(T).d = g_D(M(x~)).

Per Gauss point of a surrogate facet (test a, trial b, weight w, eta = c/h):

    A[a, b] += w * (-N_a dn_b - dn_a S_b + eta S_a S_b)
    F[a]    += w * g_D(M) * (-dn_a + eta S_a)

with dn = grad(N).n~ and S = N + grad(N).d. Neumann Gauss points use
-(n~.t)(t.grad T) v on the left and (n~.n) g_N v on the right. The outer
boundary of the background rectangle carries strong Dirichlet rows.
"""

import logging

import numpy as np

from src.geometry.surrogate import SurrogateGeometry
from src.mesh.background_mesh import SIDES, BackgroundMesh
from src.solvers.p1 import TripletBuffer, basis_values, edge_midpoints, midpoint_load
from src.solvers.problem_data import DIRICHLET, ProblemData, SbmOptions, evaluate
from src.solvers.system import AssembledSystem, apply_strong_dirichlet

logger = logging.getLogger(__name__)


def outer_dirichlet_dofs(mesh: BackgroundMesh, dof_map: np.ndarray, data: ProblemData):
    """Active dofs on sides with a strong Dirichlet condition, with their values"""
    dofs, values = [], []
    for side in SIDES:
        cond = data.outer_condition(side)
        if cond.kind != DIRICHLET:
            continue
        verts = np.flatnonzero(mesh.side_vertex_mask(side) & (dof_map >= 0))
        dofs.append(dof_map[verts])
        values.append(evaluate(cond.value, mesh.vertices[verts]))
    if not dofs:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    dofs = np.concatenate(dofs)
    values = np.concatenate(values)
    # corners appear on two sides; keep the later entry
    _, last = np.unique(dofs[::-1], return_index=True)
    keep = dofs.size - 1 - last
    return dofs[keep], values[keep]


def assemble_poisson_sbm(mesh: BackgroundMesh, surrogate: SurrogateGeometry, data: ProblemData,
                         opts: SbmOptions = SbmOptions()) -> AssembledSystem:
    """
    Assemble the shifted-boundary Poisson system over the surrogate domain

    Without the Taylor correction the matrix is symmetric; with it the
    adjoint-consistency term sees grad(N).d on the trial side only and the
    matrix is not. The penalty carries the shift
    on both sides and stays symmetric.
    """
    n = surrogate.n_active
    dof_map = surrogate.dof_map
    buf = TripletBuffer(n)

    # volume
    elems = surrogate.elements
    G = mesh.gradients[elems]
    K = mesh.areas[elems, None, None] * np.einsum('eak,ebk->eab', G, G)
    dofs = dof_map[mesh.triangles[elems]]
    buf.add_blocks(dofs, dofs, K)
    mids = edge_midpoints(mesh, elems)
    g_mid = evaluate(data.source, mids.reshape(-1, 2)).reshape(-1, 3)
    buf.add_vector(dofs, midpoint_load(mesh, elems, g_mid))

    # surrogate boundary, one entry per Gauss point
    nq = surrogate.n_facets * 2
    has_neumann = False
    if nq:
        owners = np.repeat(surrogate.owners, 2)
        x = surrogate.points.reshape(-1, 2)
        w = surrogate.weights.reshape(-1)
        M = surrogate.closest.reshape(-1, 2)
        d = surrogate.distance.reshape(-1, 2)
        n_sur = np.repeat(surrogate.normals, 2, axis=0)
        n_true = surrogate.true_normals.reshape(-1, 2)
        t_true = surrogate.true_tangents.reshape(-1, 2)
        if not opts.taylor_correction:
            d = np.zeros_like(d)

        Gq = mesh.gradients[owners]
        N = basis_values(mesh, owners, x)
        dn = np.einsum('qak,qk->qa', Gq, n_sur)
        S = N + np.einsum('qak,qk->qa', Gq, d)
        eta = opts.penalty / mesh.h
        qdofs = dof_map[mesh.triangles[owners]]

        neumann = data.neumann_mask(M)
        has_neumann = bool(np.any(neumann))
        dirichlet = ~neumann

        wd = w[dirichlet]
        Nd, dnd, Sd = N[dirichlet], dn[dirichlet], S[dirichlet]
        local = (-np.einsum('qa,qb->qab', Nd, dnd)
                 - np.einsum('qa,qb->qab', dnd, Sd)
                 + eta * np.einsum('qa,qb->qab', Sd, Sd)) * wd[:, None, None]
        buf.add_blocks(qdofs[dirichlet], qdofs[dirichlet], local)
        g_bar = evaluate(data.dirichlet, M[dirichlet])
        buf.add_vector(qdofs[dirichlet], (wd * g_bar)[:, None] * (-dnd + eta * Sd))

        if has_neumann:
            wn = w[neumann]
            nt = np.einsum('qk,qk->q', n_sur[neumann], t_true[neumann])
            nn = np.einsum('qk,qk->q', n_sur[neumann], n_true[neumann])
            dt = np.einsum('qak,qk->qa', Gq[neumann], t_true[neumann])
            local = -np.einsum('qa,qb->qab', N[neumann], dt) * (wn * nt)[:, None, None]
            buf.add_blocks(qdofs[neumann], qdofs[neumann], local)
            g_n = evaluate(data.neumann, M[neumann])
            buf.add_vector(qdofs[neumann], (wn * nn * g_n)[:, None] * N[neumann])

    A = buf.matrix()
    F = buf.rhs
    bc_dofs, bc_values = outer_dirichlet_dofs(mesh, dof_map, data)
    A, F = apply_strong_dirichlet(A, F, bc_dofs, bc_values)

    logger.debug("SBM Poisson: %d dofs, %d surrogate facets", n, surrogate.n_facets)
    return AssembledSystem(
        A=A,
        F=F,
        n_vertices=mesh.n_vertices,
        active_vertices=surrogate.active_vertices,
        fields=('T',),
        symmetric=not opts.taylor_correction and not has_neumann,
        provenance='sbm-poisson',
    )


def boundary_mismatch(mesh: BackgroundMesh, surrogate: SurrogateGeometry, data: ProblemData,
                      field: np.ndarray) -> float:
    """
    Integral over the surrogate boundary of (T + grad(T).d - g_D(M))^2 for a
    background field T
    """
    if surrogate.n_facets == 0:
        return 0.0
    owners = np.repeat(surrogate.owners, 2)
    x = surrogate.points.reshape(-1, 2)
    N = basis_values(mesh, owners, x)
    S = N + np.einsum('qak,qk->qa', mesh.gradients[owners], surrogate.distance.reshape(-1, 2))
    shifted = np.einsum('qa,qa->q', S, field[mesh.triangles[owners]])
    g_bar = evaluate(data.dirichlet, surrogate.closest.reshape(-1, 2))
    return float(np.sum(surrogate.weights.reshape(-1) * (shifted - g_bar) ** 2))
