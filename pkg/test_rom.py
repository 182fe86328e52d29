"""
Test script for POD, Galerkin projection, supremizers and the ROM evaluator
Run: python test_rom.py   (or pytest test_rom.py)
"""
import sys
import traceback
import warnings

import numpy as np
import pytest
import scipy.sparse as sp

from src.analysis.rom_evaluator import (
    check_distinct,
    evaluate,
    projection_error,
    read_report,
    relative_error,
    write_report,
)
from src.mesh.background_mesh import build_structured_mesh
from src.models.basis_store import BasisStore, basis_for_modes, variant_name, write_basis_store
from src.models.pod import EUCLIDEAN, MASS, inner_product_matrix, mgs, pod, pod_energy
from src.models.reduced_model import OnlineSolver, ReducedBasis, project, reconstruct, solve_online
from src.models.supremizer import compute_supremizers, enrich_velocity_basis, inf_sup_proxy, supremizer_enrich
from src.scenarios.catalog import get_scenario
from src.snapshots.sweep import block_layout, run_sweep
from src.solvers.system import AssembledSystem
from src.utils.errors import InvalidArgumentError, RankDeficientError

HEAT_TRAIN = np.array([[-0.3], [-0.1], [0.1], [0.3]])
STOKES_TRAIN = np.linspace(-0.65, 0.65, 9)[:, None]
STOKES_TEST = np.array([[-0.5], [-0.25], [0.05], [0.3], [0.55]])


def _system(A, F) -> AssembledSystem:
    A = sp.csr_matrix(A)
    n = A.shape[0]
    return AssembledSystem(A=A, F=np.asarray(F, dtype=float), n_vertices=n,
                           active_vertices=np.arange(n))


def _span_gap(P: np.ndarray, Q: np.ndarray) -> float:
    """Largest sine of the principal angles between two orthonormal column sets"""
    s = np.linalg.svd(P.T @ Q, compute_uv=False)
    return float(np.sqrt(max(1.0 - s.min() ** 2, 0.0)))


# ---------------------------------------------------------------- POD

def test_pod_duplicate_column():
    v = np.array([1.0, 2.0, -2.0, 0.5])
    basis = pod(np.column_stack([v, v]), 1)
    assert basis.eigenvalues[0] == pytest.approx(2.0 * v @ v)
    assert abs(basis.eigenvalues[1]) < 1e-12 * basis.eigenvalues[0]
    assert np.allclose(np.abs(basis.modes[:, 0]), np.abs(v) / np.linalg.norm(v))
    with pytest.raises(RankDeficientError) as info:
        pod(np.column_stack([v, v]), 2)
    assert info.value.cutoff > 0.0


def test_pod_degenerate_pair_spans_inputs():
    S = np.zeros((5, 2))
    S[0, 0] = S[3, 1] = 2.0
    basis = pod(S, 2)
    assert basis.eigenvalues[0] == pytest.approx(basis.eigenvalues[1])
    assert _span_gap(basis.modes, S / 2.0) < 1e-8


def test_pod_matches_svd():
    rng = np.random.default_rng(3)
    S = rng.standard_normal((200, 12))
    U, s, _ = np.linalg.svd(S, full_matrices=False)
    basis = pod(S, 12)
    assert np.allclose(basis.eigenvalues, s ** 2, rtol=1e-10)
    signs = np.sign(np.sum(basis.modes * U, axis=0))
    assert np.abs(basis.modes * signs - U).max() < 1e-9
    assert np.all(np.diff(basis.eigenvalues) <= 0.0)


def test_pod_energy_is_eigenvalue_tail():
    rng = np.random.default_rng(8)
    S = rng.standard_normal((60, 9)) @ np.diag(0.5 ** np.arange(9))
    basis = pod(S, 9)
    lam = basis.eigenvalues
    assert pod_energy(S, basis, 0) == pytest.approx(np.sum(S ** 2))
    assert abs(pod_energy(S, basis, 9)) < 1e-10 * np.sum(S ** 2)
    energies = [pod_energy(S, basis, n) for n in range(10)]
    assert np.all(np.diff(energies) <= 1e-12)
    for n in (1, 4, 7):
        direct = sum(np.sum((S[:, j] - basis.modes[:, :n] @ (basis.modes[:, :n].T @ S[:, j])) ** 2)
                     for j in range(9))
        assert energies[n] == pytest.approx(direct, rel=1e-8)
        assert energies[n] == pytest.approx(lam[n:].sum(), rel=1e-8)


def test_pod_is_scale_invariant():
    rng = np.random.default_rng(21)
    S = rng.standard_normal((40, 6))
    a = pod(S, 4).modes
    b = pod(1e4 * S, 4).modes
    assert _span_gap(a, b) < 1e-8


def test_mass_weighted_modes_are_orthonormal():
    mesh = build_structured_mesh((0.0, 1.0, 0.0, 1.0), 8, 8)
    M = inner_product_matrix(mesh, MASS)
    x, y = mesh.vertices.T
    S = np.column_stack([np.sin(k * x + y) for k in range(1, 6)])
    basis = pod(S, 5, MASS, M)
    gram = basis.modes.T @ (M @ basis.modes)
    assert np.abs(gram - np.eye(5)).max() < 1e-10
    assert inner_product_matrix(mesh, EUCLIDEAN) is None
    with pytest.raises(InvalidArgumentError):
        pod(S, 2, MASS)
    with pytest.raises(InvalidArgumentError):
        inner_product_matrix(mesh, 'h1')


def test_mgs_drops_dependent_columns():
    V = np.array([[1.0, 2.0, 0.0], [0.0, 0.0, 1.0], [1.0, 2.0, 1.0]])
    with pytest.warns(UserWarning):
        Q, kept = mgs(V)
    assert list(kept) == [0, 2]
    assert np.allclose(Q.T @ Q, np.eye(2))


# ---------------------------------------------------------------- projection

def test_project_one_by_one():
    red = project(_system([[2.0]], [1.0]), np.array([[1.0]]))
    assert np.allclose(red.A_r, [[2.0]])
    assert np.allclose(red.F_r, [1.0])
    assert np.allclose(solve_online(red), [0.5])


def test_project_identity_basis():
    rng = np.random.default_rng(4)
    A = sp.random(30, 30, density=0.2, random_state=5) + sp.identity(30)
    system = _system(A, rng.standard_normal(30))
    red = project(system, np.eye(30))
    assert np.allclose(red.A_r, A.toarray())
    assert np.allclose(solve_online(project(_system(sp.identity(4), [1.0, 2.0, 3.0, 4.0]), np.eye(4))),
                       [1.0, 2.0, 3.0, 4.0])


def test_project_matches_dense_triple_product():
    rng = np.random.default_rng(6)
    A = sp.random(100, 100, density=0.05, random_state=7) + 4.0 * sp.identity(100)
    F = rng.standard_normal(100)
    L = rng.standard_normal((100, 8))
    red = project(_system(A, F), L)
    assert np.abs(red.A_r - L.T @ A.toarray() @ L).max() < 1e-12
    assert np.abs(red.F_r - L.T @ F).max() < 1e-12
    with pytest.raises(InvalidArgumentError):
        project(_system(A, F), L[:50])


def test_reprojection_is_consistent():
    rng = np.random.default_rng(9)
    L, _ = np.linalg.qr(rng.standard_normal((50, 5)))
    a = rng.standard_normal(5)
    assert np.abs(L.T @ reconstruct(L, a) - a).max() < 1e-12


def test_singular_reduced_system():
    red = project(_system(np.diag([1.0, 0.0]), [1.0, 1.0]), np.eye(2))
    with pytest.raises(RankDeficientError):
        solve_online(red)


# ---------------------------------------------------------------- heat ROM

def _heat_basis():
    scenario = get_scenario('heat')
    mesh = scenario.build_mesh(24, 12)
    result = run_sweep(scenario, mesh, HEAT_TRAIN)
    T = pod(result.snapshots.block('T'), HEAT_TRAIN.shape[0])
    basis = ReducedBasis(blocks={'T': T.modes}, layout=block_layout(scenario), provenance='test')
    return scenario, mesh, result, basis, T


def test_heat_snapshot_reproduction():
    scenario, mesh, result, basis, _ = _heat_basis()
    solver = OnlineSolver(scenario, mesh, basis)
    mu = HEAT_TRAIN[1]
    sol = solver.solve(mu)
    idx = sol.system.full_indices()
    fom = result.raw[:, 1]
    assert relative_error(fom[idx], sol.values[idx]) < 1e-6
    inactive = ~sol.system.active_mask()
    assert np.all(sol.values[inactive] == 0.0)
    assert sol.total_seconds >= sol.online_seconds > 0.0


def test_heat_evaluation_report(tmp_path):
    scenario, mesh, _, basis, _ = _heat_basis()
    test = np.array([[-0.2], [0.05], [0.25]])
    report, details = evaluate(scenario, mesh, basis, test, modes=[1, 2, 4], train_parameters=HEAT_TRAIN)
    assert list(report['modes']) == [1, 2, 4]
    assert len(details) == 9
    assert np.all(details['proj_err'] <= details['galerkin_err'] + 1e-12)
    assert np.all(details['proj_err_mass'] <= details['galerkin_err_mass'] + 1e-12)
    for _, group in details.groupby('index'):
        assert np.all(np.diff(group.sort_values('modes')['proj_err'].to_numpy()) <= 1e-10)
    assert np.allclose(report['speedup'], report['t_fom_seconds'] / report['t_rb_seconds'])
    assert np.allclose(report['savings_pct'],
                       100.0 * (report['t_fom_seconds'] - report['t_rb_seconds']) / report['t_fom_seconds'])

    path = write_report(report, tmp_path / 'reports' / 'online.csv', notes=['mean relative errors'])
    assert path.read_text().startswith('# mean relative errors\n')
    back = read_report(path)
    assert list(back.columns) == list(report.columns)
    assert np.allclose(back['galerkin_err'], report['galerkin_err'])


def test_check_distinct_warns_on_overlap():
    with pytest.warns(UserWarning):
        assert check_distinct(np.array([[0.1], [0.2]]), HEAT_TRAIN) == 1
    with warnings.catch_warnings():
        warnings.simplefilter('error')
        assert check_distinct(np.array([[0.2]]), HEAT_TRAIN) == 0


def test_error_helpers():
    ref = np.array([3.0, 4.0])
    assert relative_error(ref, ref) == 0.0
    assert relative_error(ref, np.zeros(2)) == pytest.approx(1.0)
    assert relative_error(np.zeros(2), np.array([3.0, 4.0])) == pytest.approx(5.0)
    L = np.array([[1.0], [0.0]])
    assert projection_error(ref, L) == pytest.approx(0.8)
    assert projection_error(ref, np.zeros((2, 0))) == pytest.approx(1.0)


def test_basis_store_round_trip(tmp_path):
    scenario, _, result, basis, T = _heat_basis()
    directory = tmp_path / 'basis' / variant_name('zero', False)
    write_basis_store(directory, scenario.name, basis, EUCLIDEAN, 'zero', {'T': T.eigenvalues},
                      result.snapshots.n_columns)
    store = BasisStore(directory)
    assert store.scenario == 'heat'
    assert not store.has_supremizers
    back = store.basis()
    assert np.array_equal(back.blocks['T'], basis.blocks['T'])
    assert back.layout == {'T': (0, 1)}
    assert not back.transported
    eig = store.eigenvalues()
    assert np.allclose(eig['eigenvalue'], T.eigenvalues)
    assert eig['relative'].iloc[0] == pytest.approx(1.0)
    assert basis_for_modes(back, 2).widths == {'T': 2}
    with pytest.raises(FileNotFoundError):
        store.enriched()
    with pytest.raises(FileNotFoundError):
        BasisStore(tmp_path / 'missing')


# ---------------------------------------------------------------- supremizers

def _stokes_setup():
    scenario = get_scenario('stokes1p')
    mesh = scenario.build_mesh(40, 20)
    result = run_sweep(scenario, mesh, np.array([[-0.4], [0.0], [0.4]]))
    u = pod(result.snapshots.block('u'), 2).modes
    p = pod(result.snapshots.block('p'), 2).modes
    disc = scenario.discretize(mesh, scenario.reference)
    return scenario, mesh, u, p, disc


def test_supremizer_enrichment():
    _, mesh, u, p, disc = _stokes_setup()
    enriched = supremizer_enrich(u, p, disc.system, disc.geometry, mesh)
    assert enriched.width == u.shape[1] + p.shape[1]
    assert enriched.skipped == ()
    assert list(enriched.prefix) == [0, 2, 4]
    assert np.abs(enriched.modes.T @ enriched.modes - np.eye(enriched.width)).max() < 1e-10
    # supremizers vanish at inactive vertices and strong velocity Dirichlet dofs
    inactive = ~disc.system.active_mask()
    nv = mesh.n_vertices
    assert np.all(enriched.supremizers[:nv][inactive] == 0.0)
    assert np.all(enriched.supremizers[nv:][inactive] == 0.0)

    plain = inf_sup_proxy(disc.system, u, p)
    rich = inf_sup_proxy(disc.system, enriched.modes, p)
    assert rich > 0.0
    assert rich > plain


def test_supremizers_stabilise_the_reduced_coupling():
    scenario = get_scenario('stokes1p')
    mesh = scenario.build_mesh(40, 20)
    result = run_sweep(scenario, mesh, STOKES_TRAIN)
    n = 4
    u = pod(result.snapshots.block('u'), n).modes
    p = pod(result.snapshots.block('p'), n).modes
    disc = scenario.discretize(mesh, scenario.reference)
    enriched = supremizer_enrich(u, p, disc.system, disc.geometry, mesh)

    ratios = []
    for mu in STOKES_TEST:
        system = scenario.discretize(mesh, mu).system
        plain = inf_sup_proxy(system, u, p)
        rich = inf_sup_proxy(system, enriched.truncated(n), p)
        assert rich > plain
        ratios.append(rich / plain if plain > 0.0 else np.inf)
    ratios = np.array(ratios)
    assert ratios.min() >= 5.0, ratios
    assert np.median(ratios) >= 10.0, ratios

    # richer velocity space, better pressure
    basis = ReducedBasis(blocks={'u': u, 'p': p}, layout=block_layout(scenario), provenance='test')
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', UserWarning)
        without, _ = evaluate(scenario, mesh, basis, STOKES_TEST, [n], train_parameters=STOKES_TRAIN)
        with_sup, _ = evaluate(scenario, mesh, basis, STOKES_TEST, [n], enriched,
                               train_parameters=STOKES_TRAIN)
    assert float(with_sup['galerkin_err_p'].iloc[-1]) < float(without['galerkin_err_p'].iloc[-1])


def test_zero_pressure_mode_is_skipped():
    _, mesh, u, p, disc = _stokes_setup()
    modes = np.column_stack([p[:, 0], np.zeros(mesh.n_vertices)])
    with pytest.warns(UserWarning):
        sup = compute_supremizers(disc.system, disc.geometry, mesh, modes)
    assert np.any(sup[:, 0])
    assert not np.any(sup[:, 1])
    enriched = enrich_velocity_basis(u, sup)
    assert enriched.skipped == (1,)
    assert enriched.width == u.shape[1] + 1
    assert enriched.columns_for(1) == 2
    assert enriched.columns_for(2) == 3


def test_supremizers_need_a_stokes_system():
    mesh = build_structured_mesh((0.0, 1.0, 0.0, 1.0), 2, 2)
    heat_like = _system(sp.identity(9), np.zeros(9))
    with pytest.raises(InvalidArgumentError):
        compute_supremizers(heat_like, None, mesh, np.zeros((9, 1)))


if __name__ == "__main__":
    import inspect
    import tempfile
    from pathlib import Path

    print("=" * 70)
    print("Testing Reduced-Order Models")
    print("=" * 70)

    failures = 0
    checks = [(name, fn) for name, fn in sorted(globals().items()) if name.startswith('test_')]
    for i, (name, fn) in enumerate(checks, 1):
        print(f"\n{i}. {name}...")
        try:
            if 'tmp_path' in inspect.signature(fn).parameters:
                with tempfile.TemporaryDirectory() as tmp:
                    fn(Path(tmp))
            else:
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
