"""
Test script for the shifted-boundary Poisson solver
Run: python test_sbm_poisson.py   (or pytest test_sbm_poisson.py)
"""
import sys
import traceback

import numpy as np

from src.analysis.convergence import convergence_study
from src.geometry.level_set import EXTERIOR, Circle
from src.geometry.surrogate import build_surrogate
from src.mesh.background_mesh import SIDES, build_structured_mesh
from src.scenarios.catalog import get_scenario
from src.solvers.problem_data import DIRICHLET, OuterCondition, ProblemData, SbmOptions
from src.solvers.sbm_poisson import assemble_poisson_sbm, boundary_mismatch
from src.solvers.system import solve_fom

SQUARE = (-1.0, 1.0, -1.0, 1.0)


def _x(points):
    return points[:, 0]


def _obstacle_setup(n: int = 24):
    mesh = build_structured_mesh(SQUARE, n, n)
    surrogate = build_surrogate(mesh, Circle(orientation=EXTERIOR, center=(0.05, -0.03), radius=0.2))
    return mesh, surrogate


def _linear_data(**kwargs):
    return ProblemData(source=0.0, dirichlet=_x,
                       outer={side: OuterCondition(DIRICHLET, _x) for side in SIDES}, **kwargs)


def test_linear_patch():
    mesh, surrogate = _obstacle_setup()
    data = _linear_data()
    field = solve_fom(assemble_poisson_sbm(mesh, surrogate, data))
    active = surrogate.active_vertices
    assert np.abs(field[active] - mesh.vertices[active, 0]).max() < 1e-9
    assert boundary_mismatch(mesh, surrogate, data, field) < 1e-14


def test_constant_state():
    mesh, surrogate = _obstacle_setup()
    data = ProblemData(source=0.0, dirichlet=2.5,
                       outer={side: OuterCondition(DIRICHLET, 2.5) for side in SIDES})
    field = solve_fom(assemble_poisson_sbm(mesh, surrogate, data))
    assert np.abs(field[surrogate.active_vertices] - 2.5).max() < 1e-9
    # inactive vertices stay zero in the background vector
    inactive = ~surrogate.active_mask()
    assert inactive.any()
    assert np.all(field[inactive] == 0.0)


def test_symmetry_without_taylor_correction():
    mesh, surrogate = _obstacle_setup(16)
    data = ProblemData(source=1.0)
    plain = assemble_poisson_sbm(mesh, surrogate, data, SbmOptions(taylor_correction=False))
    assert plain.symmetric
    assert abs(plain.A - plain.A.T).max() < 1e-12

    shifted = assemble_poisson_sbm(mesh, surrogate, data, SbmOptions(taylor_correction=True))
    assert not shifted.symmetric
    assert abs(shifted.A - shifted.A.T).max() > 1e-8


def test_neumann_part_of_the_obstacle():
    mesh, surrogate = _obstacle_setup()
    ls = surrogate.level_set

    def flux(points):
        # grad(x) . n with n the outward normal of the fluid region
        return ls.normal(points)[:, 0]

    data = _linear_data(neumann=flux, neumann_marker=lambda p: p[:, 1] > 0.0)
    system = assemble_poisson_sbm(mesh, surrogate, data)
    assert not system.symmetric
    field = solve_fom(system)
    active = surrogate.active_vertices
    assert np.abs(field[active] - mesh.vertices[active, 0]).max() < 1e-8


def _wavy(points):
    return np.sin(3.0 * points[:, 0]) * points[:, 1] ** 2


def test_symmetric_part_is_positive_definite():
    mesh, surrogate = _obstacle_setup()
    data = ProblemData(source=0.0, dirichlet=_wavy)
    for c in (10.0, 20.0, 40.0, 80.0, 160.0):
        A = assemble_poisson_sbm(mesh, surrogate, data, SbmOptions(penalty=c)).A.toarray()
        smallest = np.linalg.eigvalsh(0.5 * (A + A.T)).min()
        assert smallest > 0.0, (c, smallest)


def test_larger_penalty_tightens_the_boundary_condition():
    mesh, surrogate = _obstacle_setup()
    data = ProblemData(source=0.0, dirichlet=_wavy)
    mismatch = []
    for c in (10.0, 20.0, 40.0, 80.0, 160.0):
        field = solve_fom(assemble_poisson_sbm(mesh, surrogate, data, SbmOptions(penalty=c)))
        mismatch.append(boundary_mismatch(mesh, surrogate, data, field))
    mismatch = np.array(mismatch)
    assert np.all(np.diff(mismatch) <= 1e-12 * mismatch[:-1]), mismatch
    assert mismatch[-1] < mismatch[0]


def test_second_order_convergence():
    table = convergence_study('sbm', levels=(32, 64))
    ratio = float(table['ratio'].iloc[-1])
    assert 3.2 <= ratio <= 4.8, table


def test_heat_scenario_field():
    scenario = get_scenario('heat')
    mesh = scenario.build_mesh(40, 20)
    disc = scenario.discretize(mesh, [-0.015])
    field = solve_fom(disc.system)
    active = disc.system.active_vertices
    assert disc.system.provenance == 'sbm-poisson'
    assert np.abs(field[mesh.boundary_vertex_mask()]).max() < 1e-12
    # unit source with zero walls heats the fluid region
    assert field[active].max() > 0.0
    assert field[active].mean() > 0.0


if __name__ == "__main__":
    print("=" * 70)
    print("Testing SBM Poisson Solver")
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
