import pytest

from src.analysis import catalog as catalog_module
from src.analysis.catalog import (
    catalog_table, commute_identity, exact_catalog, exact_oracles, free_field, metric_geometry,
    resistance_engine, run_catalog, sandwich_catalog,
)
from src.analysis.chain_exact import exact_cover_time
from src.models.errors import InvalidParameters

SEED = 20240601


@pytest.fixture(scope='module')
def catalog():
    return exact_catalog()


def test_catalog_contents(catalog):
    names = [name for name, _ in catalog]
    assert len(catalog) == 44
    assert len(set(names)) == 44
    assert dict(catalog)['gasket_2'].vertex_count == 15
    assert dict(catalog)['barbell_6_3'].vertex_count == 9


def test_commute_identity_row():
    row = commute_identity(SEED, graphs=12)
    assert row['criterion'] == 1
    assert row['passed']
    assert row['details']['graphs'] == 12
    assert row['details']['max_residual'] <= 1e-8


def test_sandwich_on_small_graphs(catalog):
    small = [(name, g) for name, g in catalog if g.vertex_count <= 8]
    exact = {name: exact_cover_time(g).t_cov for name, g in small}
    row = sandwich_catalog(small, exact)
    assert row['passed']
    assert row['details']['violations'] == []


def test_sandwich_flags_violation(catalog):
    name, g = catalog[0]
    row = sandwich_catalog([(name, g)], {name: 1e9})
    assert not row['passed']
    assert row['details']['violations'][0]['graph'] == name


def test_resistance_engine_row():
    row = resistance_engine(SEED)
    assert row['passed'], row['details']
    assert row['details']['series_parallel_max_relative_error'] <= 1e-9
    assert row['details']['rayleigh_graphs'] == 50
    assert row['details']['rayleigh_max_decrease'] <= 1e-9


def test_metric_geometry_row(catalog):
    subset = [(name, g) for name, g in catalog if name in ('path_5', 'cycle_6', 'star_4', 'complete_5')]
    row = metric_geometry(subset, points=6)
    assert row['passed'], row['details']


def test_exact_oracles_note_reduced_replicas():
    row = exact_oracles(SEED, replicas=20000)
    assert row['passed'], row['details']
    assert len(row['notes']) == 1
    assert '20000' in row['notes'][0]


def test_bad_profile():
    with pytest.raises(InvalidParameters):
        run_catalog(SEED, profile='everything')


def test_catalog_table_columns():
    result = {'rows': [{'criterion': 1, 'name': 'commute time identity', 'required': True, 'passed': True,
                        'details': {}, 'notes': []}]}
    table = catalog_table(result)
    assert list(table.columns) == ['criterion', 'name', 'required', 'passed']
    assert table.iloc[0]['passed']


def _stub_criteria(profile, seed, budgets, threads, only=None):
    wanted = catalog_module.PROFILES[profile] if only is None else only
    return [{'criterion': c, 'name': f'criterion {c}', 'required': True, 'passed': True,
             'details': {}, 'notes': []} for c in wanted if c != 8]


def test_full_profile_is_default_and_complete(monkeypatch):
    monkeypatch.setattr(catalog_module, '_criteria', _stub_criteria)
    result = run_catalog(SEED)
    assert result['profile'] == 'full'
    assert [r['criterion'] for r in result['rows']] == [1, 2, 3, 4, 5, 6, 7, 8]
    assert result['partial'] is False
    assert result['skipped_criteria'] == []


def test_quick_profile_is_marked_partial(monkeypatch):
    monkeypatch.setattr(catalog_module, '_criteria', _stub_criteria)
    result = run_catalog(SEED, profile='quick')
    assert 7 not in [r['criterion'] for r in result['rows']]
    assert result['all_passed']
    assert result['partial'] is True
    assert result['skipped_criteria'] == [7]


def test_free_field_reports_functional_constants(catalog):
    subset = [(name, g) for name, g in catalog if name in ('path_5', 'cycle_6', 'star_4', 'complete_5')]
    exact = {name: exact_cover_time(g).t_cov for name, g in subset}
    row = free_field(subset, exact, SEED, replicas=4000)
    details = row['details']
    assert row['passed'], details
    assert set(details['sudakov_ratios']) == set(exact)
    assert set(details['chaining_ratios']) == set(exact)
    assert details['sudakov_constant'] == max(details['sudakov_ratios'].values())
    assert details['chaining_constant'] == max(details['chaining_ratios'].values())
    low, high = details['functional_ratio_band']
    assert low <= details['chaining_constant'] <= high
    assert low <= details['sudakov_constant'] <= high
