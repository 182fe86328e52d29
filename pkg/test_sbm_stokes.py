"""
Test script for the shifted-boundary Stokes solver
Run: python test_sbm_stokes.py   (or pytest test_sbm_stokes.py)
"""
import sys
import traceback

import numpy as np

from src.analysis.convergence import drag_study
from src.geometry.level_set import EXTERIOR, Circle
from src.geometry.surrogate import build_surrogate
from src.mesh.background_mesh import build_structured_mesh
from src.scenarios.catalog import get_scenario
from src.solvers.problem_data import DIRICHLET, OPEN, SLIP, OuterCondition, ProblemData
from src.solvers.sbm_stokes import assemble_stokes_sbm, drag_force, velocity_h1_matrix
from src.solvers.system import solve_fom

CHANNEL = (-2.0, 2.0, -1.0, 1.0)


def _channel(inflow, obstacle_value, source=(0.0, 0.0)):
    return ProblemData(
        source=source,
        dirichlet=obstacle_value,
        viscosity=1.0,
        outer={
            'left': OuterCondition(DIRICHLET, inflow),
            'right': OuterCondition(OPEN, 0.0),
            'bottom': OuterCondition(SLIP),
            'top': OuterCondition(SLIP),
        },
    )


def _setup(nx: int = 40, ny: int = 20):
    mesh = build_structured_mesh(CHANNEL, nx, ny)
    surrogate = build_surrogate(mesh, Circle(orientation=EXTERIOR, center=(-0.5, 0.07), radius=0.2))
    return mesh, surrogate


def _split(mesh, field):
    nv = mesh.n_vertices
    return field[:nv], field[nv:2 * nv], field[2 * nv:]


def test_rest_state():
    mesh, surrogate = _setup()
    system = assemble_stokes_sbm(mesh, surrogate, _channel((0.0, 0.0), (0.0, 0.0)))
    assert system.fields == ('u_x', 'u_y', 'p')
    assert system.n_dofs == 3 * surrogate.n_active
    ux, uy, p = _split(mesh, solve_fom(system))
    active = surrogate.active_vertices
    assert np.abs(ux[active]).max() < 1e-9
    assert np.abs(uy[active]).max() < 1e-9
    assert np.ptp(p[active]) < 1e-9


def test_constant_velocity():
    mesh, surrogate = _setup()
    system = assemble_stokes_sbm(mesh, surrogate, _channel((1.0, 0.0), (1.0, 0.0)))
    ux, uy, p = _split(mesh, solve_fom(system))
    active = surrogate.active_vertices
    assert np.abs(ux[active] - 1.0).max() < 1e-8
    assert np.abs(uy[active]).max() < 1e-8
    assert np.abs(p[active]).max() < 1e-8


def test_velocity_dirichlet_dofs():
    mesh, surrogate = _setup()
    system = assemble_stokes_sbm(mesh, surrogate, _channel((1.0, 0.0), (0.0, 0.0)))
    dofs = system.extras['velocity_dirichlet_dofs']
    n_a = surrogate.n_active
    assert dofs.size > 0
    assert np.all(dofs < 2 * n_a)
    # inflow side fixes both components, slip walls only u_y
    left = surrogate.dof_map[np.flatnonzero(mesh.side_vertex_mask('left'))]
    assert np.all(np.isin(left, dofs))
    assert np.all(np.isin(left + n_a, dofs))


def test_h1_matrix_is_spd_on_velocities():
    mesh, surrogate = _setup(16, 8)
    H = velocity_h1_matrix(mesh, surrogate).toarray()
    assert H.shape == (2 * surrogate.n_active,) * 2
    assert np.allclose(H, H.T)
    assert np.linalg.eigvalsh(H).min() > 0.0


def test_cylinder_flow_drag():
    scenario = get_scenario('stokes1p')
    mesh = scenario.build_mesh(80, 40)
    disc = scenario.discretize(mesh, [0.0])
    field = solve_fom(disc.system)
    drag, _ = drag_force(mesh, disc.geometry, scenario.problem_data([0.0]), field)
    # the body force and inflow push the fluid along +x onto the cylinder
    assert drag > 0.0


def test_drag_self_convergence():
    table = drag_study('stokes1p', levels=(40, 80))
    assert float(table['rel_change'].iloc[-1]) < 0.1, table


if __name__ == "__main__":
    print("=" * 70)
    print("Testing SBM Stokes Solver")
    print("=" * 70)

    failures = 0
    checks = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith('test_')]
    for i, (name, fn) in enumerate(checks, 1):
        print(f"\n{i}. {name}...")
        try:
            fn()
            print("✅ PASS")
        except Exception as e:
            failures += 1
            print(f"❌ FAIL: {e}")
            traceback.print_exc()

    print("\n" + "=" * 70)
    print(f"{len(checks) - failures}/{len(checks)} checks passed")
    print("=" * 70)
    sys.exit(1 if failures else 0)
