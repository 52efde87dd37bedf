"""
Tests for presets, config validation, single runs, sweeps, report
aggregation and the command-line exit codes.
"""

import pytest

from nsir.harness import (
    aggregate, build_run_config, build_sweep_config, exit_code, list_presets, parse_override, preset_config, run,
    run_sweep, sweep_values,
)
from nsir.main import main
from nsir.shared.errors import ConfigInvalid, MissingArtifact, PreconditionViolated
from nsir.shared.io import read_csv, read_json, write_json
from nsir.shared.models import ModelKind

SMALL_NEUMANN = ['numerics.n=21', 'numerics.left=-1', 'numerics.right=1', 'numerics.T=5']


# ============================================================================
# Presets And Validation
# ============================================================================

def test_shipped_presets_are_listed():
    names = [name for name, _ in list_presets()]
    for expected in ('thm22', 'thm23', 'thm33', 'thm42', 'thm43', 'cor41', 'thm45', 'upper_solution', 'lstar', 'eigen'):
        assert expected in names


def test_every_preset_validates():
    for name, _ in list_presets():
        config = preset_config(name)
        assert config.name == name


def test_overrides_reach_nested_fields():
    config = preset_config('thm23', ['params.k=7.5', 'numerics.n=31'])
    assert config.model == ModelKind.NEUMANN
    assert config.params.k == 7.5
    assert config.numerics.n == 31


def test_parse_override():
    assert parse_override('params.k=5') == ('params.k', 5)
    assert parse_override('kernel.normalization=None') == ('kernel.normalization', 'None')
    with pytest.raises(ConfigInvalid):
        parse_override('params.k')


def test_invalid_field_names_its_path():
    with pytest.raises(ConfigInvalid) as excinfo:
        preset_config('thm23', ['params.k=-1'])
    assert excinfo.value.field_path == 'params.k'


def test_unknown_preset():
    with pytest.raises(ConfigInvalid) as excinfo:
        build_run_config({'preset': 'nope'})
    assert excinfo.value.field_path == 'preset'


def test_free_boundary_needs_plain_convolution():
    with pytest.raises(ConfigInvalid):
        preset_config('thm42', ['kernel.normalization=SinkhornSymmetric'])


# ============================================================================
# Runs
# ============================================================================

def test_neumann_run_writes_artifacts(tmp_path):
    config = preset_config('thm23', SMALL_NEUMANN)
    summary = run(config, directory=str(tmp_path))
    for filename in ('config.json', 'summary.json', 'trajectory.csv', 'comparison.csv', 'mass.csv',
                     'normalization.json', 'verify_bounds.json', 'envelope_check.json', 'lyapunov.json'):
        assert (tmp_path / filename).exists()
    assert summary.results['R01'] == pytest.approx(2.0)
    assert summary.results['t_final'] == pytest.approx(5.0)
    assert summary.checks_passed, summary.failed_checks
    assert read_json(str(tmp_path / 'summary.json'))['name'] == 'thm23'


def test_disease_free_preset_converges(tmp_path):
    summary = run(preset_config('thm22', ['numerics.T=40']), directory=str(tmp_path))
    assert summary.results['R01'] == pytest.approx(0.8)
    assert summary.results['sup_distance_E1'] < 1e-3
    assert summary.checks_passed, summary.failed_checks


def test_eigen_run_reports_threshold_quantities(tmp_path):
    config = preset_config('eigen', ['numerics.eigen_n=81', 'eigen.dump_eigenfunction=true'])
    summary = run(config, directory=str(tmp_path))
    results = summary.results
    assert results['n'] == 81
    assert results['r02'] is not None and results['l_star'] is not None
    assert 0 < results['r02'] and results['l_star'] > 0
    rows = read_csv(str(tmp_path / 'eigenfunction.csv'))
    assert len(rows) == 81


def test_short_free_boundary_run_writes_fronts(tmp_path):
    config = preset_config('thm42', ['numerics.T=0.5', 'numerics.inner_nodes=21', 'numerics.outer_nodes=61',
                                     'stefan.max_doublings=0'])
    summary = run(config, directory=str(tmp_path))
    assert summary.results['verdict'] in ('Spreading', 'Vanishing', 'Undecided')
    assert (tmp_path / 'fronts.csv').exists()
    invariants = read_json(str(tmp_path / 'free_boundary_invariants.json'))
    assert all(check['passed'] for check in invariants['checks'])


def test_tilted_free_boundary_run_skips_the_symmetry_check(tmp_path):
    config = preset_config('thm42', ['numerics.T=0.5', 'numerics.inner_nodes=21', 'numerics.outer_nodes=61',
                                     'stefan.max_doublings=0', 'init.noise=0.3', 'init.seed=3'])
    summary = run(config, directory=str(tmp_path))
    assert summary.results['max_asymmetry'] > 1e-10
    invariants = read_json(str(tmp_path / 'free_boundary_invariants.json'))
    names = [check['name'] for check in invariants['checks']]
    assert 'symmetry' not in names and 'front_monotonicity' in names
    assert summary.checks_passed, summary.failed_checks

    even = tmp_path / 'even'
    run(preset_config('thm42', ['numerics.T=0.5', 'numerics.inner_nodes=21', 'numerics.outer_nodes=61',
                                'stefan.max_doublings=0']), directory=str(even))
    names = [check['name'] for check in read_json(str(even / 'free_boundary_invariants.json'))['checks']]
    assert 'symmetry' in names


# ============================================================================
# Sweeps
# ============================================================================

def _length_sweep(values):
    return build_sweep_config({
        'name': 'lengths',
        'base': {'preset': 'eigen', 'numerics': {'eigen_n': 41}},
        'axis': 'eigen.length',
        'values': values,
        'reducer': 'Lambda1',
    })


def test_sweep_values_must_be_monotone():
    assert sweep_values(_length_sweep({'lo': 1.0, 'hi': 3.0, 'count': 5})) == [1.0, 1.5, 2.0, 2.5, 3.0]
    with pytest.raises(ConfigInvalid):
        sweep_values(_length_sweep([1.0, 3.0, 2.0]))


def test_inline_sweep_writes_table(tmp_path):
    records = run_sweep(_length_sweep([1.0, 2.0, 3.0]), directory=str(tmp_path), workers=1)
    assert [r['error'] for r in records] == ['', '', '']
    rows = read_csv(str(tmp_path / 'sweep.csv'))
    assert [float(row['eigen.length']) for row in rows] == [1.0, 2.0, 3.0]
    lambdas = [float(row['lambda1']) for row in rows]
    assert lambdas[0] > lambdas[1] > lambdas[2]
    assert (tmp_path / 'point_002' / 'eigen.json').exists()


def test_sweep_rejects_unknown_axis(tmp_path):
    config = build_sweep_config({
        'base': {'preset': 'eigen'}, 'axis': 'eigen.width', 'values': [1.0], 'reducer': 'Lambda1',
    })
    with pytest.raises(ConfigInvalid):
        run_sweep(config, directory=str(tmp_path), workers=1)


# ============================================================================
# Reports And Exit Codes
# ============================================================================

def test_report_needs_check_files(tmp_path):
    with pytest.raises(MissingArtifact):
        aggregate(str(tmp_path))
    with pytest.raises(MissingArtifact):
        aggregate(str(tmp_path / 'missing'))


def test_report_flags_failed_checks(tmp_path):
    write_json(str(tmp_path / 'a.json'), {'report': 'a', 'checks': [{'name': 'ok', 'passed': True}]})
    write_json(str(tmp_path / 'sub' / 'b.json'), {'report': 'b', 'checks': [{'name': 'bad', 'passed': False}]})
    summary = aggregate(str(tmp_path))
    assert summary['total'] == 2
    assert summary['failed'] == ['sub/b.json: bad']
    assert exit_code(summary) == 4
    assert (tmp_path / 'report.json').exists()


def test_report_counts_normalization_checks(tmp_path):
    summary = run(preset_config('thm23', SMALL_NEUMANN), directory=str(tmp_path))
    normalization = read_json(str(tmp_path / 'normalization.json'))
    assert [c['name'] for c in normalization['checks']] == ['column_deviation', 'asymmetry']
    assert normalization['kernel']['max_column_deviation'] < 1e-12
    report = aggregate(str(tmp_path))
    assert 'normalization' in [r['report'] for r in report['reports']]
    own = sum(len(r['checks']) for r in report['reports'] if r['report'] != 'normalization')
    assert report['total'] == own + 2
    assert exit_code(report) == 0 and summary.checks_passed

    normalization['checks'][0]['passed'] = False
    write_json(str(tmp_path / 'normalization.json'), normalization)
    report = aggregate(str(tmp_path))
    assert report['failed'] == ['normalization.json: column_deviation']
    assert exit_code(report) == 4


def test_cli_exit_codes(tmp_path, output_root):
    assert main(['presets']) == 0
    assert main(['run', '--preset', 'thm23', '--set', 'params.k=-1']) == 2
    assert main(['run-stefan', '--preset', 'thm23']) == 2
    assert main(['report', str(tmp_path / 'missing')]) == 3
    assert main(['eigen', '--n', '41', '--out', str(tmp_path / 'eig')]) == 0
    assert (tmp_path / 'eig' / 'eigen.json').exists()


def test_cli_reports_solver_preconditions(tmp_path, output_root, monkeypatch):
    def refuse(problem):
        raise PreconditionViolated("interior grid too small")

    monkeypatch.setattr('nsir.harness.runner.principal_eigenvalue', refuse)
    assert main(['eigen', '--n', '41', '--out', str(tmp_path / 'eig')]) == 3


def test_cli_runs_presets_by_scenario_name(tmp_path, output_root):
    assert main(['run', '--preset', 'thm22', '--set', 'numerics.T=2', '--out', str(tmp_path / 'a')]) == 0
    assert read_json(str(tmp_path / 'a' / 'summary.json'))['name'] == 'thm22'
