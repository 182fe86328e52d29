"""
CutFEM Poisson Solver
=====================
Unfitted Nitsche discretisation of -Lap(u) = g on the exact cut geometry.
Volume terms are integrated over the physical part of each active triangle,
boundary terms along the reconstructed interface with the analytic normal,
and the ghost penalty acts on the faces around the cut triangles.
"""

import logging

import numpy as np

from src.geometry.cut_cell import CutClassification
from src.mesh.background_mesh import BackgroundMesh
from src.solvers.p1 import TripletBuffer, basis_values
from src.solvers.problem_data import CutfemOptions, ProblemData, evaluate
from src.solvers.sbm_poisson import outer_dirichlet_dofs
from src.solvers.system import AssembledSystem, apply_strong_dirichlet

logger = logging.getLogger(__name__)


def ghost_penalty_blocks(mesh: BackgroundMesh, cut: CutClassification, gamma_1: float):
    """
    Local ghost-penalty matrices gamma_1 h |F| c c^T with
    c = [grad(N_K).n_F, -grad(N_K').n_F] on every ghost face

    Returns:
        (ng, 6) background vertex indices and (ng, 6, 6) blocks
    """
    facets = cut.ghost_facets
    k0 = mesh.facet_triangles[facets, 0]
    k1 = mesh.facet_triangles[facets, 1]
    nF = cut.ghost_normals
    c = np.concatenate([np.einsum('fik,fk->fi', mesh.gradients[k0], nF),
                        -np.einsum('fik,fk->fi', mesh.gradients[k1], nF)], axis=1)
    scale = gamma_1 * mesh.h * mesh.facet_lengths(facets)
    blocks = scale[:, None, None] * np.einsum('fa,fb->fab', c, c)
    verts = np.concatenate([mesh.triangles[k0], mesh.triangles[k1]], axis=1)
    return verts, blocks


def assemble_poisson_cutfem(mesh: BackgroundMesh, cut: CutClassification, data: ProblemData,
                            opts: CutfemOptions = CutfemOptions()) -> AssembledSystem:
    """Assemble the CutFEM Poisson system over the dofs of the active triangles"""
    n = cut.n_active
    dof_map = cut.dof_map
    buf = TripletBuffer(n)

    elems = cut.domain_elements
    G = mesh.gradients[elems]
    K = cut.inside_area[elems, None, None] * np.einsum('eak,ebk->eab', G, G)
    buf.add_blocks(dof_map[mesh.triangles[elems]], dof_map[mesh.triangles[elems]], K)

    if cut.volume_weights.size:
        ve = cut.volume_elements
        N = basis_values(mesh, ve, cut.volume_points)
        g = evaluate(data.source, cut.volume_points)
        buf.add_vector(dof_map[mesh.triangles[ve]], (cut.volume_weights * g)[:, None] * N)

    if cut.interface_weights.size:
        ie = cut.interface_elements
        x = cut.interface_points
        w = cut.interface_weights
        nrm = cut.interface_normals
        N = basis_values(mesh, ie, x)
        dn = np.einsum('qak,qk->qa', mesh.gradients[ie], nrm)
        qdofs = dof_map[mesh.triangles[ie]]
        neumann = data.neumann_mask(x)
        dirichlet = ~neumann
        penalty = opts.gamma_d / mesh.h

        wd, Nd, dnd = w[dirichlet], N[dirichlet], dn[dirichlet]
        local = (-np.einsum('qa,qb->qab', Nd, dnd) - np.einsum('qa,qb->qab', dnd, Nd)
                 + penalty * np.einsum('qa,qb->qab', Nd, Nd)) * wd[:, None, None]
        buf.add_blocks(qdofs[dirichlet], qdofs[dirichlet], local)
        g_d = evaluate(data.dirichlet, x[dirichlet])
        buf.add_vector(qdofs[dirichlet], (wd * g_d)[:, None] * (-dnd + penalty * Nd))

        if np.any(neumann):
            wn, Nn, dnn = w[neumann], N[neumann], dn[neumann]
            stab = opts.gamma_n * mesh.h
            buf.add_blocks(qdofs[neumann], qdofs[neumann],
                           stab * np.einsum('qa,qb->qab', dnn, dnn) * wn[:, None, None])
            g_n = evaluate(data.neumann, x[neumann])
            buf.add_vector(qdofs[neumann], (wn * g_n)[:, None] * (Nn + stab * dnn))

    if opts.gamma_1 > 0.0 and cut.ghost_facets.size:
        verts, blocks = ghost_penalty_blocks(mesh, cut, opts.gamma_1)
        buf.add_blocks(dof_map[verts], dof_map[verts], blocks)

    A = buf.matrix()
    F = buf.rhs
    bc_dofs, bc_values = outer_dirichlet_dofs(mesh, dof_map, data)
    A, F = apply_strong_dirichlet(A, F, bc_dofs, bc_values)

    logger.debug("CutFEM Poisson: %d dofs, %d cut elements, %d ghost faces",
                 n, cut.cut_elements.size, cut.ghost_facets.size)
    return AssembledSystem(
        A=A,
        F=F,
        n_vertices=mesh.n_vertices,
        active_vertices=cut.active_vertices,
        fields=('T',),
        symmetric=True,
        provenance='cutfem-poisson',
    )


def ghost_penalty_form(mesh: BackgroundMesh, cut: CutClassification, gamma_1: float,
                       u: np.ndarray, v: np.ndarray) -> float:
    """j(u, v) for background P1 fields u and v"""
    if cut.ghost_facets.size == 0:
        return 0.0
    verts, blocks = ghost_penalty_blocks(mesh, cut, gamma_1)
    return float(np.einsum('fa,fab,fb->', v[verts], blocks, u[verts]))
