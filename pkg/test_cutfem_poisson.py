"""
Test script for the CutFEM Poisson solver and its ghost penalty
Run: python test_cutfem_poisson.py   (or pytest test_cutfem_poisson.py)
"""
import sys
import traceback

import numpy as np

from src.analysis.convergence import convergence_study, ghost_penalty_conditioning
from src.geometry.cut_cell import classify_cut
from src.geometry.level_set import INTERIOR, Circle
from src.mesh.background_mesh import build_structured_mesh
from src.scenarios.catalog import get_scenario
from src.solvers.cutfem_poisson import assemble_poisson_cutfem, ghost_penalty_form
from src.solvers.p1 import basis_values
from src.solvers.problem_data import CutfemOptions, ProblemData
from src.solvers.system import solve_fom

SQUARE = (-1.0, 1.0, -1.0, 1.0)


def _disk(n: int = 20):
    mesh = build_structured_mesh(SQUARE, n, n)
    cut = classify_cut(mesh, Circle(orientation=INTERIOR, center=(0.04, -0.02), radius=0.61))
    return mesh, cut


def test_constant_state():
    mesh, cut = _disk()
    data = ProblemData(source=0.0, dirichlet=1.75)
    system = assemble_poisson_cutfem(mesh, cut, data, CutfemOptions())
    field = solve_fom(system)
    assert np.abs(field[cut.active_vertices] - 1.75).max() < 1e-9


def _upper_half(points):
    return points[:, 1] > 0.0


def test_neumann_part_of_the_interface():
    mesh, cut = _disk()
    data = ProblemData(source=0.0, dirichlet=1.75, neumann=0.0, neumann_marker=_upper_half)
    system = assemble_poisson_cutfem(mesh, cut, data)
    assert system.symmetric
    field = solve_fom(system)
    assert np.abs(field[cut.active_vertices] - 1.75).max() < 1e-9

    # an insulated upper half keeps more of the heat than a cold boundary all round
    cold = solve_fom(assemble_poisson_cutfem(mesh, cut, ProblemData(source=1.0, dirichlet=0.0)))
    insulated = solve_fom(assemble_poisson_cutfem(
        mesh, cut, ProblemData(source=1.0, dirichlet=0.0, neumann=0.0, neumann_marker=_upper_half)))
    active = cut.active_vertices
    assert insulated[active].mean() > cold[active].mean()


def test_system_is_symmetric():
    mesh, cut = _disk()
    system = assemble_poisson_cutfem(mesh, cut, ProblemData(source=1.0))
    assert system.symmetric
    assert abs(system.A - system.A.T).max() < 1e-12
    assert system.n_dofs == cut.n_active


def test_ghost_penalty_vanishes_on_linear_fields():
    mesh, cut = _disk()
    assert cut.ghost_facets.size > 0
    linear = 2.0 * mesh.vertices[:, 0] - mesh.vertices[:, 1] + 0.3
    assert abs(ghost_penalty_form(mesh, cut, 0.1, linear, linear)) < 1e-12
    quadratic = mesh.vertices[:, 0] ** 2
    assert ghost_penalty_form(mesh, cut, 0.1, quadratic, quadratic) > 0.0


def test_second_order_convergence():
    table = convergence_study('cutfem', levels=(32, 64))
    ratio = float(table['ratio'].iloc[-1])
    assert 3.2 <= ratio <= 4.8, table


def _trace_error(n: int) -> float:
    scenario = get_scenario('ellipse')
    mu = scenario.reference
    mesh = scenario.build_mesh(n, n)
    disc = scenario.discretize(mesh, mu)
    field = solve_fom(disc.system)
    cut = disc.geometry
    N = basis_values(mesh, cut.interface_elements, cut.interface_points)
    trace = np.einsum('qa,qa->q', N, field[mesh.triangles[cut.interface_elements]])
    g_d = 0.5 + cut.interface_points[:, 0] * cut.interface_points[:, 1]
    return float(np.abs(trace - g_d).max())


def test_ellipse_trace_error_decreases():
    assert _trace_error(96) < _trace_error(48)


def test_ghost_penalty_conditioning():
    default = CutfemOptions().gamma_1
    table = ghost_penalty_conditioning(n=16)
    stabilised = table[table['gamma_1'] == default]
    bare = table[table['gamma_1'] == 0.0]
    assert table['fraction'].min() == 1e-6
    iterations = stabilised['cg_iterations'].to_numpy(dtype=float)
    assert np.all(np.isfinite(iterations))
    assert iterations.max() < 3.0 * iterations.min()
    # stabilised conditioning barely moves as the cut shrinks
    condition = stabilised['condition'].to_numpy()
    assert condition.max() < 3.0 * condition.min()
    cond_bare = float(bare.loc[bare['fraction'] == 1e-6, 'condition'].iloc[0])
    cond_stab = float(stabilised.loc[stabilised['fraction'] == 1e-6, 'condition'].iloc[0])
    assert cond_bare >= 100.0 * cond_stab


if __name__ == "__main__":
    print("=" * 70)
    print("Testing CutFEM Poisson Solver")
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
