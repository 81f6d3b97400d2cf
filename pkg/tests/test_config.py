import json
from pathlib import Path

import pytest

from src.config import (
    AnalysisToggles, EstimatorBudgets, RunConfig, Settings, load_config, resolve_out_dir,
)
from src.models.errors import ConfigError, IoFailure


# ============================================================================
# ENVIRONMENT
# ============================================================================

def test_settings_from_env(monkeypatch):
    monkeypatch.setenv('CTLAB_THREADS', '3')
    monkeypatch.setenv('CTLAB_LOG_LEVEL', 'DEBUG')
    monkeypatch.setenv('CTLAB_REPORT_DIR', 'out_here')
    settings = Settings.from_env()
    assert settings == Settings(threads=3, log_level='DEBUG', report_dir='out_here')


def test_settings_defaults(monkeypatch):
    for name in ('CTLAB_THREADS', 'CTLAB_LOG_LEVEL', 'CTLAB_REPORT_DIR'):
        monkeypatch.delenv(name, raising=False)
    settings = Settings.from_env()
    assert settings.threads >= 1
    assert settings.log_level == 'INFO'
    assert settings.report_dir == 'reports'


def test_settings_bad_threads(monkeypatch):
    monkeypatch.setenv('CTLAB_THREADS', 'many')
    with pytest.raises(ConfigError):
        Settings.from_env()


# ============================================================================
# BUDGETS AND TOGGLES
# ============================================================================

def test_budgets_from_dict():
    budgets = EstimatorBudgets.from_dict({'replicas': 500, 'net_time_limit': 5})
    assert budgets.replicas == 500
    assert budgets.net_time_limit == 5.0
    assert budgets.gff_replicas == EstimatorBudgets().gff_replicas
    assert EstimatorBudgets.from_dict(None) == EstimatorBudgets()


@pytest.mark.parametrize('data', [
    {'walkers': 10},
    {'replicas': 'lots'},
    {'replicas': 10.5},
    {'replicas': True},
    {'step_cap': 0},
    {'replicas': 1},
])
def test_budgets_rejected(data):
    with pytest.raises(ConfigError):
        EstimatorBudgets.from_dict(data)


def test_toggles_accept_hyphens():
    toggles = AnalysisToggles.from_dict({'cover-mc': False, 'gff': False})
    assert not toggles.cover_mc
    assert not toggles.needs_seed
    assert toggles.packing


def test_toggles_rejected():
    with pytest.raises(ConfigError):
        AnalysisToggles.from_dict({'sudoku': True})
    with pytest.raises(ConfigError):
        AnalysisToggles.from_dict({'gff': 'yes'})


# ============================================================================
# RUN CONFIGS
# ============================================================================

def test_gen_config_with_top_level_n():
    config = RunConfig.from_dict({'command': 'gen', 'name': 'bb', 'family': 'barbell', 'N': 4})
    assert config.family.family == 'barbell'
    assert config.family.N == 4
    assert config.effective_seed == 0


def test_gen_random_family_needs_seed():
    data = {'command': 'gen', 'family': {'family': 'er', 'regime': 'critical', 'N': 50}}
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)
    assert RunConfig.from_dict(dict(data, seed=5)).effective_seed == 5


def test_analyze_needs_exactly_one_source(tmp_path):
    graph = tmp_path / 'g.wgr'
    graph.write_text('2 1\n0 1 1\n')
    with pytest.raises(ConfigError):
        RunConfig.from_dict({'command': 'analyze', 'seed': 1})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({'command': 'analyze', 'seed': 1, 'graph': 'g.wgr',
                             'family': {'family': 'cycle', 'N': 5}}, base_dir=tmp_path)
    config = RunConfig.from_dict({'command': 'analyze', 'seed': 1, 'graph': 'g.wgr'}, base_dir=tmp_path)
    assert config.graph == tmp_path / 'g.wgr'


def test_analyze_missing_graph_file(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_dict({'command': 'analyze', 'seed': 1, 'graph': 'nope.wgr'}, base_dir=tmp_path)


def test_analyze_seed_rules():
    deterministic = {'command': 'analyze', 'family': {'family': 'cycle', 'N': 5}}
    with pytest.raises(ConfigError):
        RunConfig.from_dict(deterministic)
    quiet = dict(deterministic, toggles={'cover_mc': False, 'gff': False})
    assert RunConfig.from_dict(quiet).seed is None
    with pytest.raises(ConfigError):
        RunConfig.from_dict({'command': 'analyze', 'family': {'family': 'rw_range', 'd': 5, 'N': 50},
                             'toggles': {'cover_mc': False, 'gff': False}})


def test_classify_config():
    config = RunConfig.from_dict({'command': 'classify', 'family': 'cycle', 'n_values': [8, 4, 8],
                                  'seed': 3, 'lambda_grid': [8, 2]})
    assert config.n_values == (4, 8)
    assert config.lambda_grid == (2.0, 8.0)
    assert config.to_dict()['n_values'] == [4, 8]
    with pytest.raises(ConfigError):
        RunConfig.from_dict({'command': 'classify', 'family': 'cycle', 'n_values': [4]})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({'command': 'classify', 'family': 'cycle', 'seed': 3})


@pytest.mark.parametrize('data', [
    {'command': 'plot'},
    {'command': 'catalog'},
    {'command': 'catalog', 'seed': -1},
    {'command': 'catalog', 'seed': 1, 'profile': 'huge'},
    {'command': 'catalog', 'seed': 1, 'colour': 'red'},
    {'command': 'catalog', 'seed': 1, 'name': 'a/b'},
    {'command': 'classify', 'family': 'cycle', 'n_values': [4], 'seed': 1, 'threshold': 1.5},
    {'command': 'classify', 'family': 'cycle', 'n_values': [4], 'seed': 1, 'lambda_grid': [0.5]},
    {'command': 'gen', 'family': {'family': 'nonsense', 'N': 3}},
])
def test_invalid_configs(data):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_load_config_errors(tmp_path):
    with pytest.raises(IoFailure):
        load_config(tmp_path / 'missing.json')
    bad = tmp_path / 'bad.json'
    bad.write_text('{"command": ')
    with pytest.raises(ConfigError):
        load_config(bad)


def test_load_config_and_out_dir(tmp_path):
    path = tmp_path / 'cat.json'
    path.write_text(json.dumps({'command': 'catalog', 'seed': 9, 'out': 'from_config'}))
    config = load_config(path)
    settings = Settings(threads=1, log_level='INFO', report_dir='from_env')
    assert resolve_out_dir(config, 'cli', settings) == Path('cli')
    assert resolve_out_dir(config, None, settings) == Path('from_config')
    plain = RunConfig.from_dict({'command': 'catalog', 'seed': 9})
    assert resolve_out_dir(plain, None, settings) == Path('from_env')


def test_catalog_profile_defaults_to_full():
    config = RunConfig.from_dict({'command': 'catalog', 'seed': 9})
    assert config.profile == 'full'
    assert RunConfig.from_dict({'command': 'catalog', 'seed': 9, 'profile': 'quick'}).profile == 'quick'
