import json
import math

import numpy as np
import pandas as pd
import pytest

from src.models.errors import IoFailure
from src.models.models import NetMode
from src.utils.reporting import (
    SCHEMA_VERSION, UNITS, atomic_write_text, dumps_json, to_jsonable, write_csv, write_gnuplot,
    write_json_report,
)


def test_to_jsonable_converts_numpy_and_nan():
    value = {
        'a': np.float64(1.5),
        'b': np.int64(3),
        'c': float('nan'),
        'd': np.array([1.0, math.nan]),
        'e': {3, 1, 2},
        'f': NetMode.EXACT,
        'g': np.bool_(True),
        7: (1, 2),
    }
    out = to_jsonable(value)
    assert out == {'a': 1.5, 'b': 3, 'c': None, 'd': [1.0, None], 'e': [1, 2, 3],
                   'f': 'exact', 'g': True, '7': [1, 2]}
    assert type(out['b']) is int


def test_dumps_json_is_stable():
    first = dumps_json({'b': 1, 'a': [np.float64(0.25)]})
    second = dumps_json({'a': [0.25], 'b': 1})
    assert first == second
    assert first.endswith('\n')


def test_infinities_serialize_as_null():
    value = {'residual': math.inf, 'low': -np.inf, 'row': np.array([np.inf, 2.0])}
    assert to_jsonable(value) == {'residual': None, 'low': None, 'row': [None, 2.0]}
    assert json.loads(dumps_json(value)) == {'low': None, 'residual': None, 'row': [None, 2.0]}


def test_json_report_layout(tmp_path):
    path = write_json_report(tmp_path / 'sub' / 'r.json', {'t_cov': 3.0, 'skipped': float('nan')},
                             {'config': {'command': 'analyze'}})
    report = json.loads(path.read_text())
    assert report['schema_version'] == SCHEMA_VERSION
    assert report['log_base'] == 'natural'
    assert report['units']['t_cov'] == 'steps'
    assert report['units']['diam_R'] == 'ohms'
    assert report['values'] == {'t_cov': 3.0, 'skipped': None}
    assert report['config'] == {'command': 'analyze'}


def test_units_cover_core_quantities():
    for key in ('t_hit', 't_cov', 'diam_R', 'emax', 'field_ratio', 'packing_count', 'chaining'):
        assert key in UNITS


def test_atomic_write_leaves_no_temp_files(tmp_path):
    target = tmp_path / 'out.txt'
    atomic_write_text(target, 'first\n')
    atomic_write_text(target, 'second\n')
    assert target.read_text() == 'second\n'
    assert [p.name for p in tmp_path.iterdir()] == ['out.txt']


def test_atomic_write_failure(tmp_path):
    blocker = tmp_path / 'file'
    blocker.write_text('x')
    with pytest.raises(IoFailure):
        atomic_write_text(blocker / 'child.txt', 'data')


def test_csv_float_format(tmp_path):
    df = pd.DataFrame({'N': [4, 8], 't_cov': [1.0 / 3.0, 2.5]})
    text = write_csv(df, tmp_path / 't.csv').read_text()
    assert text.splitlines() == ['N,t_cov', '4,0.333333333333', '8,2.5']


def test_gnuplot_format(tmp_path):
    path = write_gnuplot(tmp_path / 'p.dat', [0.5, 1.0], [3, 1], ['packing count', 'radius_ohms count'])
    assert path.read_text() == '# packing count\n# radius_ohms count\n0.5 3\n1 1\n'
