import json

import pytest
from click.testing import CliRunner

from src import cli as cli_module
from src.cli import cli, run_config
from src.models.errors import IoFailure


def write_config(tmp_path, data, name='run.json'):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def runner():
    return CliRunner()


def test_gen_writes_graph_and_sidecar(tmp_path, runner):
    config = write_config(tmp_path, {'command': 'gen', 'name': 'bb',
                                     'family': {'family': 'barbell', 'N': 4, 'a_N': 2}})
    out = tmp_path / 'out'
    result = runner.invoke(cli, ['gen', '--config', config, '--out', str(out)])
    assert result.exit_code == 0, result.output
    lines = (out / 'bb.wgr').read_text().splitlines()
    assert lines[0] == '6 8'
    assert len(lines) == 9
    sidecar = json.loads((out / 'bb.json').read_text())
    assert sidecar['values']['vertex_count'] == 6
    assert sidecar['config']['command'] == 'gen'


def test_analyze_triangle(tmp_path, runner):
    config = write_config(tmp_path, {'command': 'analyze', 'name': 'tri', 'family': 'complete', 'N': 3,
                                     'seed': 7, 'budgets': {'replicas': 2000, 'gff_replicas': 2000},
                                     'resistance_csv': True, 'gnuplot': True, 'radius_points': 4})
    out = tmp_path / 'out'
    result = runner.invoke(cli, ['--threads', '2', 'analyze', '--config', config, '--out', str(out)])
    assert result.exit_code == 0, result.output
    values = json.loads((out / 'tri_report.json').read_text())['values']
    assert values['cover']['t_cov'] == pytest.approx(3.0)
    assert values['hitting']['t_hit'] == pytest.approx(2.0)
    assert values['resistance']['diam_R'] == pytest.approx(2.0 / 3.0)
    assert values['model_orders']['family'] == 'complete'
    assert (out / 'tri_resistance.csv').exists()
    assert (out / 'tri_packing.dat').read_text().startswith('#')
    assert (out / 'tri_covering.dat').exists()


def test_analyze_graph_file(tmp_path, runner):
    (tmp_path / 'p.wgr').write_text('3 2\n0 1 1\n1 2 1\n')
    config = write_config(tmp_path, {'command': 'analyze', 'name': 'p3', 'graph': 'p.wgr',
                                     'toggles': {'cover-mc': False, 'gff': False}})
    out = tmp_path / 'out'
    result = runner.invoke(cli, ['analyze', '--config', config, '--out', str(out)])
    assert result.exit_code == 0, result.output
    values = json.loads((out / 'p3_report.json').read_text())['values']
    assert values['cover']['t_cov'] == pytest.approx(5.0)
    assert 'gff' not in values


def test_random_family_without_seed_exits_2(tmp_path, runner):
    config = write_config(tmp_path, {'command': 'analyze', 'name': 'er',
                                     'family': {'family': 'er', 'regime': 'critical', 'N': 30},
                                     'toggles': {'cover-mc': False, 'gff': False}})
    out = tmp_path / 'out'
    result = runner.invoke(cli, ['analyze', '--config', config, '--out', str(out)])
    assert result.exit_code == 2
    error = json.loads((out / 'error.json').read_text())
    assert error['success'] is False
    assert error['error']['code'] == 'config_error'
    assert error['error']['exit_status'] == 2
    assert not (out / 'er_report.json').exists()


def test_command_mismatch_exits_2(tmp_path, runner):
    config = write_config(tmp_path, {'command': 'catalog', 'seed': 1})
    out = tmp_path / 'out'
    result = runner.invoke(cli, ['gen', '--config', config, '--out', str(out)])
    assert result.exit_code == 2
    assert (out / 'error.json').exists()


def test_missing_config_exits_2(tmp_path):
    out = tmp_path / 'out'
    assert run_config(tmp_path / 'absent.json', str(out)) == 2
    error = json.loads((out / 'error.json').read_text())
    assert error['error']['code'] == 'io_failure'


def test_step_budget_exits_3(tmp_path):
    config = write_config(tmp_path, {'command': 'analyze', 'name': 'c', 'family': 'cycle', 'N': 20,
                                     'seed': 1, 'budgets': {'step_cap': 5, 'exact_cover_max_vertices': 4},
                                     'toggles': {'gff': False, 'packing': False, 'covering': False,
                                                 'chaining': False}})
    out = tmp_path / 'out'
    assert run_config(config, str(out), threads=1) == 3
    error = json.loads((out / 'error.json').read_text())
    assert error['error']['exit_status'] == 3


def test_bad_thread_count(tmp_path):
    config = write_config(tmp_path, {'command': 'catalog', 'seed': 1})
    assert run_config(config, str(tmp_path / 'out'), threads=0) == 2


def test_failing_writer_leaves_no_outputs(tmp_path, monkeypatch):
    def refuse(path, *args, **kwargs):
        raise IoFailure(f'Cannot write {path}', {'path': str(path)})

    monkeypatch.setattr(cli_module, 'write_json_report', refuse)
    config = write_config(tmp_path, {'command': 'gen', 'name': 'bb',
                                     'family': {'family': 'barbell', 'N': 4, 'a_N': 2}})
    out = tmp_path / 'out'
    assert run_config(config, str(out)) == 2
    assert not (out / 'bb.wgr').exists()
    assert not (out / 'bb.json').exists()
    assert sorted(p.name for p in out.iterdir()) == ['error.json']
    error = json.loads((out / 'error.json').read_text())
    assert error['error']['code'] == 'io_failure'
