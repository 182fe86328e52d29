"""
Pipeline Commands
=================
The five stages behind run_pipeline.py:

1. offline      full-order sweep -> snapshot store
2. pod          snapshot store -> basis (+ supremizers, eigenvalue tables)
3. online       basis -> one reduced field dump, or the test-set error report
4. benchmark    FOM vs ROM wall-clock table
5. convergence  full-order refinement / conditioning tables

Every command takes a resolved ScenarioConfig and prints progress the same
way; files land under config.out_dir.
"""

import logging
from pathlib import Path
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd

from src.analysis.convergence import convergence_study, drag_study, ghost_penalty_conditioning
from src.analysis.rom_evaluator import benchmark, evaluate, write_report
from src.linalg.eigen import sym_eig
from src.linalg.matrix_io import write_matrix
from src.mesh.background_mesh import BackgroundMesh
from src.models.basis_store import (
    BasisStore,
    basis_for_modes,
    eigenvalue_frame,
    variant_name,
    write_basis_store,
)
from src.models.pod import correlation_matrix, inner_product_matrix, pod, pod_energy
from src.models.reduced_model import OnlineSolver, ReducedBasis
from src.models.supremizer import inf_sup_proxy, supremizer_enrich
from src.scenarios.catalog import CUTFEM_POISSON, SBM_POISSON, Scenario
from src.scenarios.config import ScenarioConfig
from src.snapshots.extension import SMOOTH, ZERO, Extender
from src.snapshots.parameter_space import ParameterSpace
from src.snapshots.store import SnapshotStore, format_vector, write_snapshot_store
from src.snapshots.sweep import SnapshotMatrix, block_layout, build_snapshot_matrix, run_sweep
from src.snapshots.transport import Transporter
from src.solvers.system import solve_fom
from src.utils.errors import ConfigError, SolverFailureError

logger = logging.getLogger(__name__)

BANNER = "=" * 70
INF_SUP_SAMPLES = 5
BENCHMARK_PARAMETERS = 3
RATIO_RANGE = (3.2, 4.8)


def _banner(title: str):
    print(BANNER)
    print(title)
    print(BANNER)


def _mesh_for(config: ScenarioConfig) -> BackgroundMesh:
    return config.definition.build_mesh(config.nx, config.ny)


def sample_test_parameters(config: ScenarioConfig) -> np.ndarray:
    """Seeded test sample (seed + 1, so it never reuses the training stream)"""
    return ParameterSpace(config.ranges).sample_uniform(config.n_test, config.test_seed)


# ---------------------------------------------------------------- offline

def cmd_offline(config: ScenarioConfig, threads: int = 1) -> Path:
    scenario = config.definition
    _banner(f"🧮 OFFLINE SWEEP - {scenario.name} ({scenario.method})")
    mesh = _mesh_for(config)
    options = scenario.make_options(config.penalties)
    parameters = ParameterSpace(config.ranges).sample_uniform(config.n_train, config.seed)
    print(f"\n📐 Mesh {config.nx}x{config.ny}: {mesh.n_vertices} vertices, h = {mesh.h:.4f}")
    print(f"📊 {parameters.shape[0]} training parameters (seed {config.seed}), {threads} worker(s)")

    result = run_sweep(scenario, mesh, parameters, config.extension, config.transport, options, threads)

    for _, row in result.timings.iterrows():
        mu = [row[f'mu_{k}'] for k in range(scenario.dimension)]
        status = '✅' if row['status'] == 'ok' else '❌'
        print(f"   {status} #{int(row['index']):4d} mu={np.round(mu, 4).tolist()}  "
              f"{row['fom_seconds']:.3f}s")
    if result.failures:
        print(f"\n⚠️  {len(result.failures)} parameter(s) failed and were left out")
    if result.snapshots.n_columns == 0:
        raise SolverFailureError("every full-order solve failed; no snapshots to store")

    path = write_snapshot_store(config.snapshot_dir, scenario.name, result, config.seed,
                                config.nx, config.ny, mesh.n_vertices)
    print(f"\n💾 Snapshot store: {path} ({result.snapshots.n_columns} columns, "
          f"extension={config.extension}, transport={config.transport})")
    print(f"   Mean FOM time: {result.timings['fom_seconds'].mean():.3f}s")
    return path


# ---------------------------------------------------------------- pod

def load_snapshot_store(config: ScenarioConfig) -> SnapshotStore:
    store = SnapshotStore(config.snapshot_dir)
    if store.scenario != config.scenario:
        raise ConfigError(f"snapshot store in {config.snapshot_dir} belongs to {store.scenario}, "
                          f"not {config.scenario}")
    if store.manifest.get('mesh') != f"{config.nx}x{config.ny}":
        raise ConfigError(f"snapshot store mesh {store.manifest.get('mesh')} does not match "
                          f"{config.nx}x{config.ny}")
    return store


def snapshot_variant(scenario: Scenario, mesh: BackgroundMesh, store: SnapshotStore,
                     extension: str, transport: bool) -> SnapshotMatrix:
    """Stored snapshot matrix when the policy matches, otherwise rebuilt from the raw columns"""
    stored = store.snapshots()
    if stored.extension == extension and stored.transported == transport:
        return stored
    return build_snapshot_matrix(scenario, mesh, store.raw(), store.active(), store.parameters(),
                                 extension, transport)


def _block_weights(mesh: BackgroundMesh, scenario: Scenario, inner: str) -> Dict[str, object]:
    return {name: inner_product_matrix(mesh, inner, b - a)
            for name, (a, b) in block_layout(scenario).items()}


def _eigenvalue_variants(scenario: Scenario, mesh: BackgroundMesh, store: SnapshotStore,
                         eig_method: str) -> pd.DataFrame:
    """Relative eigenvalue decay of the first block for every extension/transport pair"""
    columns = {}
    for extension in (ZERO, SMOOTH):
        for transport in (False, True):
            snaps = snapshot_variant(scenario, mesh, store, extension, transport)
            S = snaps.block(snaps.block_names[0])
            lam, _ = sym_eig(correlation_matrix(S), method=eig_method)
            columns[variant_name(extension, transport)] = lam / lam[0] if lam[0] > 0 else lam
    frame = pd.DataFrame(columns)
    frame.insert(0, 'index', np.arange(1, len(frame) + 1))
    return frame


def _inf_sup_table(scenario: Scenario, mesh: BackgroundMesh, basis: ReducedBasis, enriched,
                   modes: Sequence[int], parameters: np.ndarray, options) -> pd.DataFrame:
    """Smallest reduced coupling singular value over the sample, with and without supremizers"""
    transporter = (Transporter(mesh, scenario.level_set, basis.reference) if basis.transported else None)
    rows = {int(n): {'modes': int(n), 'inf_sup_plain': np.inf, 'inf_sup_enriched': np.inf} for n in modes}
    for mu in parameters:
        system = scenario.discretize(mesh, mu, options).system
        u_plain, p_modes, u_enr = basis.blocks['u'], basis.blocks['p'], enriched.modes
        if transporter is not None:
            u_plain, p_modes, u_enr = (transporter.inverse(m, mu) for m in (u_plain, p_modes, u_enr))
        for n in modes:
            n = int(n)
            plain = inf_sup_proxy(system, u_plain[:, :n], p_modes[:, :n])
            rich = inf_sup_proxy(system, u_enr[:, :enriched.columns_for(n)], p_modes[:, :n])
            rows[n]['inf_sup_plain'] = min(rows[n]['inf_sup_plain'], plain)
            rows[n]['inf_sup_enriched'] = min(rows[n]['inf_sup_enriched'], rich)
    frame = pd.DataFrame(list(rows.values()))
    frame['ratio'] = frame['inf_sup_enriched'] / frame['inf_sup_plain'].replace(0.0, np.nan)
    return frame


def cmd_pod(config: ScenarioConfig) -> Path:
    scenario = config.definition
    variant = variant_name(config.extension, config.transport)
    _banner(f"🧩 POD BASIS - {scenario.name} [{variant}, {config.inner}]")
    store = load_snapshot_store(config)
    mesh = _mesh_for(config)
    snaps = snapshot_variant(scenario, mesh, store, config.extension, config.transport)
    n_max = max(int(n) for n in config.modes)
    weights = _block_weights(mesh, scenario, config.inner)
    print(f"\n📊 {snaps.n_columns} snapshots, {n_max} modes per block")

    bases, eigenvalues, energy_rows = {}, {}, []
    for name in snaps.block_names:
        S = snaps.block(name)
        basis = pod(S, n_max, config.inner, weights[name], config.eig_method)
        bases[name] = basis.modes
        eigenvalues[name] = basis.eigenvalues
        for n in config.modes:
            energy_rows.append({'block': name, 'modes': int(n), 'energy': pod_energy(S, basis, int(n))})
        lam = basis.eigenvalues
        print(f"   ✅ block {name}: lambda_1 = {lam[0]:.4e}, "
              f"lambda_{n_max}/lambda_1 = {lam[n_max - 1] / lam[0]:.3e}")

    reduced = ReducedBasis(blocks=bases, layout=block_layout(scenario), transported=snaps.transported,
                           reference=tuple(scenario.reference), provenance=f"pod-{config.inner}-{variant}")

    enriched = None
    extra = {}
    reports = config.reports_dir
    if scenario.is_stokes and config.supremizers:
        options = scenario.make_options(config.penalties)
        disc = scenario.discretize(mesh, scenario.reference, options)
        enriched = supremizer_enrich(bases['u'], bases['p'], disc.system, disc.geometry, mesh,
                                     Extender(mesh, config.extension), weights['u'])
        print(f"   ✅ supremizers at mu_bar={list(scenario.reference)}: velocity basis "
              f"{bases['u'].shape[1]} -> {enriched.width} columns")
        sample = sample_test_parameters(config)[:INF_SUP_SAMPLES]
        if sample.shape[0] == 0:
            sample = np.atleast_2d(scenario.reference)
        table = _inf_sup_table(scenario, mesh, reduced, enriched, config.modes, sample, options)
        write_report(table, reports / f'inf_sup_{variant}.csv',
                     notes=[f"minimum over {sample.shape[0]} test parameters of the smallest singular "
                            "value of L_u^T B_up L_p"])
        extra['inf_sup_plain'] = format_vector(table['inf_sup_plain'])
        extra['inf_sup_enriched'] = format_vector(table['inf_sup_enriched'])
        print("\n" + table.to_string(index=False))

    path = write_basis_store(config.basis_dir / variant, scenario.name, reduced, config.inner,
                             config.extension, eigenvalues, snaps.n_columns, enriched, extra)
    write_report(pd.DataFrame(energy_rows), reports / f'pod_energy_{variant}.csv',
                 notes=[f"sum over snapshots of the squared {config.inner} norm outside the leading modes"])
    eigenvalue_frame(eigenvalues).to_csv(reports / f'eigenvalues_{variant}.csv', index=False)

    if scenario.method == CUTFEM_POISSON and scenario.defaults.get('transport'):
        grid = _eigenvalue_variants(scenario, mesh, store, config.eig_method)
        grid.to_csv(reports / 'eigenvalue_variants.csv', index=False)
        print(f"   📊 eigenvalue decay for all four snapshot variants -> {reports / 'eigenvalue_variants.csv'}")

    print(f"\n💾 Basis: {path}")
    return path


# ---------------------------------------------------------------- online

def load_basis(config: ScenarioConfig):
    variant = variant_name(config.extension, config.transport)
    store = BasisStore(config.basis_dir / variant)
    if store.scenario != config.scenario:
        raise ConfigError(f"basis in {store.directory} belongs to {store.scenario}, not {config.scenario}")
    enriched = store.enriched() if (config.definition.is_stokes and config.supremizers) else None
    return store, store.basis(), enriched


def _report_tag(config: ScenarioConfig, enriched) -> str:
    tag = variant_name(config.extension, config.transport)
    return f"{tag}-sup" if enriched is not None else tag


def nodal_frame(mesh: BackgroundMesh, fields: Sequence[str], fom: np.ndarray, rom: np.ndarray,
                active: np.ndarray) -> pd.DataFrame:
    """Vertex id, coordinates, activity and FOM / ROM / |error| per field"""
    nv = mesh.n_vertices
    frame = pd.DataFrame({'vertex': np.arange(nv), 'x': mesh.vertices[:, 0], 'y': mesh.vertices[:, 1],
                          'active': active.astype(int)})
    for k, name in enumerate(fields):
        f = fom[k * nv:(k + 1) * nv]
        r = rom[k * nv:(k + 1) * nv]
        frame[f'fom_{name}'] = f
        frame[f'rom_{name}'] = r
        frame[f'abs_err_{name}'] = np.where(active, np.abs(f - r), 0.0)
    return frame


def cmd_online(config: ScenarioConfig, mu: Optional[Sequence[float]] = None, threads: int = 1):
    scenario = config.definition
    _, basis, enriched = load_basis(config)
    mesh = _mesh_for(config)
    options = scenario.make_options(config.penalties)
    tag = _report_tag(config, enriched)

    if mu is not None:
        mu = scenario.check_parameter(mu)
        n = max(int(m) for m in config.modes)
        _banner(f"🔎 ONLINE SOLVE - {scenario.name} mu={mu.tolist()} ({n} modes, {tag})")
        solver = OnlineSolver(scenario, mesh, basis_for_modes(basis, n, enriched), options)
        sol = solver.solve(mu)
        fom = solve_fom(sol.system)
        active = sol.system.active_mask()
        frame = nodal_frame(mesh, scenario.fields, fom, sol.values, active)
        stem = f"{tag}_mu_{'_'.join(f'{v:+.4f}' for v in mu)}"
        dump = config.fields_dir / f"{stem}.csv"
        dump.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(dump, index=False)
        write_matrix(config.fields_dir / f"{stem}_fom.urm", fom)
        write_matrix(config.fields_dir / f"{stem}_rom.urm", sol.values)
        idx = sol.system.full_indices()
        err = np.linalg.norm(fom[idx] - sol.values[idx]) / max(np.linalg.norm(fom[idx]), 1e-300)
        print(f"\n✅ Reduced solve: {sol.coefficients.size} coefficients, "
              f"assembly {sol.assembly_seconds:.4f}s + online {sol.online_seconds:.4f}s")
        print(f"   Relative error on active dofs: {err:.4e}")
        print(f"💾 Field dump: {dump}")
        return frame

    parameters = sample_test_parameters(config)
    _banner(f"📊 ONLINE EVALUATION - {scenario.name} ({parameters.shape[0]} test parameters, {tag})")
    train = None
    try:
        train = load_snapshot_store(config).parameters()
    except FileNotFoundError:
        logger.debug("no snapshot store next to the basis; skipping the train/test overlap check")
    report, details = evaluate(scenario, mesh, basis, parameters, config.modes, enriched, options,
                               threads, train)
    if report.empty:
        print("⚠️  Empty test set, nothing to evaluate")
        return report
    notes = [
        f"scenario={scenario.name} variant={tag} inner={config.inner} test_seed={config.test_seed}",
        "errors: mean over the test set of per-parameter relative errors on active dofs",
        "savings_pct = 100 (t_fom - t_rb) / t_fom; speedup = t_fom / t_rb",
    ]
    path = write_report(report, config.reports_dir / f'online_{tag}.csv', notes)
    details.to_csv(config.reports_dir / f'online_{tag}_details.csv', index=False)
    print("\n" + report.to_string(index=False))
    print(f"\n💾 Report: {path}")
    return report


# ---------------------------------------------------------------- benchmark

def cmd_benchmark(config: ScenarioConfig) -> pd.DataFrame:
    scenario = config.definition
    _, basis, enriched = load_basis(config)
    mesh = _mesh_for(config)
    options = scenario.make_options(config.penalties)
    tag = _report_tag(config, enriched)
    parameters = sample_test_parameters(config)[:BENCHMARK_PARAMETERS]
    if parameters.shape[0] == 0:
        parameters = np.atleast_2d(scenario.reference)
    _banner(f"⏱️  BENCHMARK - {scenario.name} ({parameters.shape[0]} parameters, median of 5, {tag})")

    table = benchmark(scenario, mesh, basis, parameters, config.modes, enriched, options)
    path = write_report(table, config.reports_dir / f'benchmark_{tag}.csv', notes=[
        "t_seconds: median of 5 repetitions per parameter, averaged over parameters",
        "ROM time includes classification, full-order assembly, projection and reduced solve",
    ])
    print("\n" + table.to_string(index=False))
    print(f"\n💾 Benchmark: {path}")
    return table


# ---------------------------------------------------------------- convergence

def _ratio_status(frame: pd.DataFrame) -> str:
    ratios = frame['ratio'].dropna()
    if ratios.empty:
        return '⚠️  single level, no ratio'
    lo, hi = RATIO_RANGE
    ok = bool(((ratios >= lo) & (ratios <= hi)).all())
    return f"{'✅' if ok else '⚠️ '} ratios {np.round(ratios.to_numpy(), 3).tolist()} (expected [{lo}, {hi}])"


def cmd_convergence(config: ScenarioConfig, levels: Optional[Sequence[int]] = None) -> Dict[str, pd.DataFrame]:
    scenario = config.definition
    _banner(f"📈 CONVERGENCE - {scenario.name} ({scenario.method})")
    reports = config.reports_dir
    out = {}
    if scenario.method in (SBM_POISSON, CUTFEM_POISSON):
        method = 'sbm' if scenario.method == SBM_POISSON else 'cutfem'
        frame = convergence_study(method, levels or (32, 64))
        write_report(frame, reports / 'convergence.csv', notes=["manufactured-solution L2 errors"])
        print("\n" + frame.to_string(index=False))
        print(_ratio_status(frame))
        out['convergence'] = frame
        if method == 'cutfem':
            cond = ghost_penalty_conditioning()
            write_report(cond, reports / 'conditioning.csv',
                         notes=["vertical strip cut at a gridline plus fraction * dx"])
            print("\n" + cond.to_string(index=False))
            out['conditioning'] = cond
    else:
        frame = drag_study(scenario.name, levels=levels or (40, 80))
        write_report(frame, reports / 'drag.csv', notes=["drag/lift on the cylinder at mu_bar"])
        print("\n" + frame.to_string(index=False))
        change = frame['rel_change'].dropna()
        if not change.empty:
            status = '✅' if float(change.iloc[-1]) < 0.1 else '⚠️ '
            print(f"{status} drag change under refinement: {float(change.iloc[-1]):.3%}")
        out['drag'] = frame
    print(f"\n💾 Reports in {reports}")
    return out
