"""
SBM Stokes Solver
=================
Shifted Boundary Method for the Stokes problem with P1/P1 elements and
Brezzi-Pitkaranta pressure stabilisation.

Velocity local dofs are component-major [x0, x1, x2, y0, y1, y2]. Global
active dofs: u_c at c * n_a + map[v], p at 2 * n_a + map[v].

Outer rectangle: 'dirichlet' sides are strong on both components, 'slip'
sides fix u_y (horizontal walls) or u_x (vertical walls), 'open' sides add
the do-nothing traction -p_out n to the momentum load. Slip is applied
first, so Dirichlet values win at shared corners.
"""

import logging
from typing import Tuple

import numpy as np
import scipy.sparse as sp

from src.geometry.surrogate import SurrogateGeometry, facet_gauss_points
from src.mesh.background_mesh import SIDES, BackgroundMesh
from src.solvers.p1 import TripletBuffer, basis_values, edge_midpoints, midpoint_load
from src.solvers.problem_data import DIRICHLET, OPEN, SLIP, ProblemData, SbmOptions, evaluate
from src.solvers.system import AssembledSystem, apply_strong_dirichlet

logger = logging.getLogger(__name__)

STOKES_FIELDS = ('u_x', 'u_y', 'p')
_I2 = np.eye(2)


def _velocity_dofs(dof_map: np.ndarray, tri: np.ndarray, n_a: int) -> np.ndarray:
    local = dof_map[tri]
    return np.concatenate([local, local + n_a], axis=1)


def _tangential_derivative(data: ProblemData, M: np.ndarray, tangents: np.ndarray) -> np.ndarray:
    """Central difference of g_D along the true tangent at M, (n, 2)"""
    eps = 1e-6 * (1.0 + np.linalg.norm(M, axis=1))[:, None]
    plus = evaluate(data.dirichlet, M + eps * tangents, components=2)
    minus = evaluate(data.dirichlet, M - eps * tangents, components=2)
    return (plus - minus) / (2.0 * eps)


def _outer_constraints(mesh: BackgroundMesh, dof_map: np.ndarray, n_a: int,
                       data: ProblemData) -> Tuple[np.ndarray, np.ndarray]:
    dofs, values = [], []
    for kind in (SLIP, DIRICHLET):
        for side in SIDES:
            cond = data.outer_condition(side)
            if cond.kind != kind:
                continue
            verts = np.flatnonzero(mesh.side_vertex_mask(side) & (dof_map >= 0))
            local = dof_map[verts]
            if kind == SLIP:
                comp = 1 if side in ('bottom', 'top') else 0
                dofs.append(comp * n_a + local)
                values.append(np.zeros(verts.size))
            else:
                val = evaluate(cond.value, mesh.vertices[verts], components=2)
                dofs.append(np.concatenate([local, n_a + local]))
                values.append(np.concatenate([val[:, 0], val[:, 1]]))
    if not dofs:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    dofs = np.concatenate(dofs)
    values = np.concatenate(values)
    _, last = np.unique(dofs[::-1], return_index=True)
    keep = dofs.size - 1 - last
    return dofs[keep], values[keep]


def assemble_stokes_sbm(mesh: BackgroundMesh, surrogate: SurrogateGeometry, data: ProblemData,
                        opts: SbmOptions = SbmOptions()) -> AssembledSystem:
    """
    Assemble the shifted-boundary Stokes saddle-point system

    Block layout [[A_uu, B_up], [C_pu, -S_pp]] over (u_x, u_y, p) active dofs.
    """
    n_a = surrogate.n_active
    dof_map = surrogate.dof_map
    nu = data.viscosity
    h = mesh.h
    buf = TripletBuffer(3 * n_a)

    elems = surrogate.elements
    tri = mesh.triangles[elems]
    G = mesh.gradients[elems]
    area = mesh.areas[elems]
    vdofs = _velocity_dofs(dof_map, tri, n_a)
    pdofs = 2 * n_a + dof_map[tri]

    # 2 nu (eps(w), eps(u)) with eps(N_i e_c) : eps(N_j e_d) = (d_cd G_i.G_j + G_i[d] G_j[c]) / 2
    GG = np.einsum('eik,ejk->eij', G, G)
    K = (np.einsum('cd,eij->ecidj', _I2, GG) + np.einsum('eid,ejc->ecidj', G, G))
    K = nu * area[:, None, None, None, None] * K
    buf.add_blocks(vdofs, vdofs, K.reshape(-1, 6, 6))

    # -(div w, p) and -(div u, q); div(N_i e_c) = G_i[c], int of N_j = area / 3
    div = np.transpose(G, (0, 2, 1)).reshape(-1, 6)
    B = -(area / 3.0)[:, None, None] * div[:, :, None] * np.ones((1, 1, 3))
    buf.add_blocks(vdofs, pdofs, B)
    buf.add_blocks(pdofs, vdofs, np.transpose(B, (0, 2, 1)))

    # Brezzi-Pitkaranta
    buf.add_blocks(pdofs, pdofs, -opts.delta * h ** 2 * area[:, None, None] * GG)

    # body force (w, g)
    mids = edge_midpoints(mesh, elems)
    f_mid = evaluate(data.source, mids.reshape(-1, 2), components=2).reshape(-1, 3, 2)
    load = np.concatenate([midpoint_load(mesh, elems, f_mid[..., 0]),
                           midpoint_load(mesh, elems, f_mid[..., 1])], axis=1)
    buf.add_vector(vdofs, load)

    if surrogate.n_facets:
        _assemble_shifted_boundary(mesh, surrogate, data, opts, buf, n_a)

    # open sides: traction -p_out n
    for side in SIDES:
        cond = data.outer_condition(side)
        if cond.kind != OPEN:
            continue
        on_side = np.isin(surrogate.outer_facets, mesh.side_facets(side))
        facets = surrogate.outer_facets[on_side]
        if facets.size == 0:
            continue
        owners = surrogate.outer_owners[on_side]
        normals = surrogate.outer_normals[on_side]
        pts, wts, _ = facet_gauss_points(mesh, facets)
        owners_q = np.repeat(owners, 2)
        N = basis_values(mesh, owners_q, pts.reshape(-1, 2))
        p_out = evaluate(cond.value, pts.reshape(-1, 2))
        nq = np.repeat(normals, 2, axis=0)
        coef = -(wts.reshape(-1) * p_out)
        local = np.concatenate([(coef * nq[:, 0])[:, None] * N, (coef * nq[:, 1])[:, None] * N], axis=1)
        buf.add_vector(_velocity_dofs(dof_map, mesh.triangles[owners_q], n_a), local)

    A = buf.matrix()
    F = buf.rhs
    bc_dofs, bc_values = _outer_constraints(mesh, dof_map, n_a, data)
    A, F = apply_strong_dirichlet(A, F, bc_dofs, bc_values)

    logger.debug("SBM Stokes: %d dofs (%d active vertices), %d surrogate facets",
                 3 * n_a, n_a, surrogate.n_facets)
    return AssembledSystem(
        A=A,
        F=F,
        n_vertices=mesh.n_vertices,
        active_vertices=surrogate.active_vertices,
        fields=STOKES_FIELDS,
        symmetric=False,
        provenance='sbm-stokes',
        extras={'velocity_dirichlet_dofs': bc_dofs[bc_dofs < 2 * n_a]},
    )


def _assemble_shifted_boundary(mesh, surrogate, data, opts, buf, n_a):
    nu = data.viscosity
    h = mesh.h
    dof_map = surrogate.dof_map

    owners = np.repeat(surrogate.owners, 2)
    x = surrogate.points.reshape(-1, 2)
    w = surrogate.weights.reshape(-1)
    M = surrogate.closest.reshape(-1, 2)
    d = surrogate.distance.reshape(-1, 2)
    if not opts.taylor_correction:
        d = np.zeros_like(d)
    n = np.repeat(surrogate.normals, 2, axis=0)
    tau = surrogate.true_tangents.reshape(-1, 2)

    G = mesh.gradients[owners]
    N = basis_values(mesh, owners, x)
    S = N + np.einsum('qik,qk->qi', G, d)
    Gn = np.einsum('qik,qk->qi', G, n)
    Gt = np.einsum('qik,qk->qi', G, tau)

    # -<w, 2 nu eps(u) n~>
    T1 = -nu * (np.einsum('cd,qi,qj->qcidj', _I2, N, Gn) + np.einsum('qi,qjc,qd->qcidj', N, G, n))
    # -<2 nu eps(w) n~, u + grad(u) d>
    T2 = -nu * (np.einsum('cd,qi,qj->qcidj', _I2, Gn, S) + np.einsum('qid,qc,qj->qcidj', G, n, S))
    # alpha 2 nu / h <w + grad(w) d, u + grad(u) d>
    T3 = opts.alpha * 2.0 * nu / h * np.einsum('cd,qi,qj->qcidj', _I2, S, S)
    # beta 2 nu h <grad(w) t, grad(u) t>
    T4 = opts.beta * 2.0 * nu * h * np.einsum('cd,qi,qj->qcidj', _I2, Gt, Gt)
    local = (T1 + T2 + T3 + T4) * w[:, None, None, None, None]

    tri = mesh.triangles[owners]
    vdofs = _velocity_dofs(dof_map, tri, n_a)
    pdofs = 2 * n_a + dof_map[tri]
    buf.add_blocks(vdofs, vdofs, local.reshape(-1, 6, 6))

    # <w.n~, p> and <q, (u + grad(u) d).n~>
    Bup = np.einsum('qc,qi,qj->qcij', n, N, N).reshape(-1, 6, 3) * w[:, None, None]
    Cpu = np.einsum('qi,qj,qd->qidj', N, S, n).reshape(-1, 3, 6) * w[:, None, None]
    buf.add_blocks(vdofs, pdofs, Bup)
    buf.add_blocks(pdofs, vdofs, Cpu)

    g_bar = evaluate(data.dirichlet, M, components=2)
    dg = _tangential_derivative(data, M, tau)
    Gg = np.einsum('qik,qk->qi', G, g_bar)
    gn = np.einsum('qk,qk->q', g_bar, n)
    # -<2 nu eps(w) n~, g>: component c of test (c, i): nu (G_i.n g_c + G_i.g n_c)
    r2 = -nu * (Gn[:, None, :] * g_bar[:, :, None] + Gg[:, None, :] * n[:, :, None])
    r3 = opts.alpha * 2.0 * nu / h * S[:, None, :] * g_bar[:, :, None]
    r4 = opts.beta * 2.0 * nu * h * Gt[:, None, :] * dg[:, :, None]
    rhs_u = (r2 + r3 + r4).reshape(-1, 6) * w[:, None]
    buf.add_vector(vdofs, rhs_u)
    buf.add_vector(pdofs, (w * gn)[:, None] * N)


def drag_force(mesh: BackgroundMesh, surrogate: SurrogateGeometry, data: ProblemData,
               field: np.ndarray) -> np.ndarray:
    """
    Force of the fluid on the embedded obstacle, -int (2 nu eps(u) - p I) n~ ds
    over the surrogate boundary, from a background field [u_x | u_y | p]
    """
    nv = mesh.n_vertices
    ux, uy, p = field[:nv], field[nv:2 * nv], field[2 * nv:3 * nv]
    if surrogate.n_facets == 0:
        return np.zeros(2)
    owners = np.repeat(surrogate.owners, 2)
    tri = mesh.triangles[owners]
    G = mesh.gradients[owners]
    N = basis_values(mesh, owners, surrogate.points.reshape(-1, 2))
    n = np.repeat(surrogate.normals, 2, axis=0)
    w = surrogate.weights.reshape(-1)

    grad_u = np.stack([np.einsum('qi,qik->qk', ux[tri], G), np.einsum('qi,qik->qk', uy[tri], G)], axis=1)
    eps = 0.5 * (grad_u + np.transpose(grad_u, (0, 2, 1)))
    pq = np.einsum('qi,qi->q', N, p[tri])
    traction = 2.0 * data.viscosity * np.einsum('qcd,qd->qc', eps, n) - pq[:, None] * n
    return -np.sum(w[:, None] * traction, axis=0)


def velocity_h1_matrix(mesh: BackgroundMesh, surrogate: SurrogateGeometry) -> sp.csr_matrix:
    """H1 inner product (stiffness + consistent mass) per velocity component on active dofs"""
    n_a = surrogate.n_active
    elems = surrogate.elements
    G = mesh.gradients[elems]
    area = mesh.areas[elems]
    ref_mass = (np.ones((3, 3)) + np.eye(3)) / 12.0
    local = area[:, None, None] * (np.einsum('eak,ebk->eab', G, G) + ref_mass[None])
    dofs = surrogate.dof_map[mesh.triangles[elems]]
    buf = TripletBuffer(2 * n_a)
    buf.add_blocks(dofs, dofs, local)
    buf.add_blocks(dofs + n_a, dofs + n_a, local)
    return buf.matrix()
