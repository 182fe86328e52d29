"""
Test script for the run configuration and the command-line pipeline
Run: python test_pipeline.py   (or pytest test_pipeline.py)
"""
import json
import sys
import traceback

import numpy as np
import pandas as pd
import pytest

import run_pipeline
from src.analysis.rom_evaluator import read_report
from src.models.basis_store import BasisStore
from src.scenarios.config import ScenarioConfig, load_config
from src.snapshots.store import SnapshotStore
from src.utils.errors import ConfigError

SMALL = ['--scenario', 'heat', '--nx', '24', '--ny', '12', '--n-train', '4', '--n-test', '2',
         '--modes', '1,2']


def _run(command, out, *extra) -> int:
    return run_pipeline.main([command, *SMALL, '--out', str(out), *extra])


def _main(command, out, *args) -> int:
    return run_pipeline.main([command, *args, '--out', str(out)])


def test_config_defaults_and_overrides():
    config = load_config(scenario='stokes2p')
    assert (config.nx, config.ny) == (160, 80)
    assert config.supremizers is True
    assert config.transport is False
    assert config.test_seed == config.seed + 1
    assert str(config.basis_dir).endswith('basis')

    config = load_config(scenario='heat', nx=30, modes=[5], inner='mass')
    assert config.nx == 30
    assert config.ny == 60
    assert config.modes == [5]
    assert config.inner == 'mass'


def test_config_file(tmp_path):
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'scenario': 'ellipse', 'n_train': 12, 'seed': 3,
                                'parameter_ranges': [[0.5, 1.5], [0.5, 1.5], [-0.5, 0.5], [-0.5, 0.5]]}))
    config = load_config(path, seed=9)
    assert config.scenario == 'ellipse'
    assert config.n_train == 12
    assert config.seed == 9
    assert config.extension == 'smooth'
    assert config.ranges[0] == (0.5, 1.5)


def test_config_errors(tmp_path):
    bad = [
        {'scenario': 'nowhere'},
        {'scenario': 'heat', 'supremizers': True},
        {'scenario': 'heat', 'extension': 'spline'},
        {'scenario': 'heat', 'inner': 'h1'},
        {'scenario': 'heat', 'modes': [0, 4]},
        {'scenario': 'heat', 'nx': 0},
        {'scenario': 'heat', 'parameter_ranges': [[0.0, 1.0], [0.0, 1.0]]},
        {'scenario': 'heat', 'parameter_ranges': [[0.2, 0.2]]},
        {'scenario': 'heat', 'penalties': {'no_such_penalty': 1.0}},
    ]
    for overrides in bad:
        with pytest.raises(ConfigError):
            load_config(**overrides)

    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'scenario': 'heat', 'colour': 'blue'}))
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text('{not json')
    with pytest.raises(ConfigError):
        load_config(path)
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / 'missing.json')
    assert ScenarioConfig().to_dict()['scenario'] == 'heat'


def test_cli_exit_codes_for_bad_input(tmp_path):
    assert _run('online', tmp_path) == run_pipeline.EXIT_CONFIG
    assert _run('pod', tmp_path) == run_pipeline.EXIT_CONFIG
    assert _run('offline', tmp_path, '--supremizers', 'true') == run_pipeline.EXIT_CONFIG
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'colour': 'blue'}))
    assert _run('offline', tmp_path, '--config', str(path)) == run_pipeline.EXIT_CONFIG
    with pytest.raises(SystemExit):
        run_pipeline.main(['offline', '--scenario', 'nowhere'])


def test_cli_heat_pipeline(tmp_path):
    assert _run('offline', tmp_path) == run_pipeline.EXIT_OK
    store = SnapshotStore(tmp_path / 'snapshots')
    assert store.scenario == 'heat'
    assert store.n_columns == 4
    assert len(store.timings()) == 4

    assert _run('pod', tmp_path) == run_pipeline.EXIT_OK
    basis = BasisStore(tmp_path / 'basis' / 'zero-fixed')
    assert basis.basis().widths == {'T': 2}
    assert (tmp_path / 'reports' / 'eigenvalues_zero-fixed.csv').exists()
    energy = read_report(tmp_path / 'reports' / 'pod_energy_zero-fixed.csv')
    assert np.all(np.diff(energy['energy'].to_numpy()) <= 1e-12)

    assert _run('online', tmp_path) == run_pipeline.EXIT_OK
    report = read_report(tmp_path / 'reports' / 'online_zero-fixed.csv')
    for column in ('modes', 'proj_err', 'galerkin_err', 't_rb_seconds', 't_fom_seconds',
                   'savings_pct', 'speedup'):
        assert column in report.columns
    assert list(report['modes']) == [1, 2]
    assert np.all(report['proj_err'] <= report['galerkin_err'] + 1e-12)

    assert _run('online', tmp_path, '--mu=-0.015') == run_pipeline.EXIT_OK
    dump = pd.read_csv(tmp_path / 'fields' / 'zero-fixed_mu_-0.0150.csv')
    assert {'x', 'y', 'active', 'fom_T', 'rom_T', 'abs_err_T'} <= set(dump.columns)
    assert np.all(dump.loc[dump['active'] == 0, 'abs_err_T'] == 0.0)

    # two parameters for a one-parameter scenario
    assert _run('online', tmp_path, '--mu=0.1,0.2') == run_pipeline.EXIT_CONFIG
    # more modes than four snapshots can support
    assert _run('pod', tmp_path, '--modes', '1,6') == run_pipeline.EXIT_NUMERICAL


def test_cli_benchmark(tmp_path):
    assert _run('offline', tmp_path) == run_pipeline.EXIT_OK
    assert _run('pod', tmp_path) == run_pipeline.EXIT_OK
    assert _run('benchmark', tmp_path) == run_pipeline.EXIT_OK
    table = read_report(tmp_path / 'reports' / 'benchmark_zero-fixed.csv')
    assert list(table['stage']) == ['FOM', 'ROM', 'ROM']
    rom = table[table['stage'] == 'ROM']
    assert np.allclose(rom['speedup'], rom['t_fom_seconds'] / rom['t_seconds'])


def test_cli_convergence(tmp_path):
    assert _run('convergence', tmp_path, '--levels', '16,32') == run_pipeline.EXIT_OK
    table = read_report(tmp_path / 'reports' / 'convergence.csv')
    assert len(table) == 2
    assert table['l2_error'].iloc[1] < table['l2_error'].iloc[0]


def test_heat_error_falls_with_modes(tmp_path):
    args = ['--scenario', 'heat', '--nx', '24', '--ny', '12', '--n-train', '40', '--n-test', '4',
            '--modes', '2,8,20']
    for command in ('offline', 'pod', 'online'):
        assert _main(command, tmp_path, *args) == run_pipeline.EXIT_OK
    report = read_report(tmp_path / 'reports' / 'online_zero-fixed.csv')
    proj = report['proj_err'].to_numpy()
    galerkin = report['galerkin_err'].to_numpy()
    assert np.all(np.diff(proj) <= 1e-12)
    assert np.all(proj <= galerkin + 1e-12)
    assert galerkin[-1] <= 0.1 * galerkin[0]


def test_ellipse_transport_beats_zero_extension(tmp_path):
    args = ['--scenario', 'ellipse', '--nx', '32', '--ny', '32', '--n-train', '40', '--n-test', '4',
            '--modes', '12']
    assert _main('offline', tmp_path, *args) == run_pipeline.EXIT_OK
    errors = {}
    for extension, transport in (('smooth', 'true'), ('zero', 'false')):
        variant = ['--extension', extension, '--transport', transport]
        assert _main('pod', tmp_path, *args, *variant) == run_pipeline.EXIT_OK
        assert _main('online', tmp_path, *args, *variant) == run_pipeline.EXIT_OK
    for variant in ('smooth-transport', 'zero-fixed'):
        report = read_report(tmp_path / 'reports' / f'online_{variant}.csv')
        errors[variant] = float(report['galerkin_err'].iloc[-1])
    assert errors['smooth-transport'] <= 0.5 * errors['zero-fixed'], errors


if __name__ == "__main__":
    import inspect
    import tempfile
    from pathlib import Path

    print("=" * 70)
    print("Testing Pipeline")
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
