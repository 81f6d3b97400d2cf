"""
Report Writers
Atomic JSON/CSV/gnuplot output with units metadata

Place in: src/utils/reporting.py
"""

import dataclasses
import json
import logging
import math
import os
import tempfile
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from src.models.errors import IoFailure

logger = logging.getLogger(__name__)

SCHEMA_VERSION = '1.0'

# Units for every numeric field that can appear in a report
UNITS: Dict[str, str] = {
    'vertex_count': 'count',
    'edge_count': 'count',
    'volume': 'dimensionless',
    'R': 'ohms',
    'diam_R': 'ohms',
    'min_positive_R': 'ohms',
    'radius': 'ohms',
    'scales': 'ohms',
    'nash_williams': 'ohms',
    't_hit': 'steps',
    't_hit_se': 'steps',
    't_cov': 'steps',
    't_cov_se': 'steps',
    't_cov_exact': 'steps',
    't_cov_mc': 'steps',
    'per_start': 'steps',
    'matthews_upper': 'steps',
    'lower_slack': 'steps',
    'upper_slack': 'steps',
    'mean': 'steps',
    'standard_error': 'steps',
    'chaining': 'sqrt_ohms',
    'sudakov': 'sqrt_ohms',
    'emax': 'sqrt_ohms',
    'emax_se': 'sqrt_ohms',
    'field_ratio': 'dimensionless',
    'ratio1': 'dimensionless',
    'ratio2': 'dimensionless',
    'hit_ratio': 'dimensionless',
    'packing_count': 'count',
    'covering_count': 'count',
    'replicas': 'count',
    'exponent': 'dimensionless',
    'frequency': 'dimensionless',
}


def to_jsonable(obj):
    """Convert numpy/pandas/dataclass values into plain JSON types; NaN and infinities become null"""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        if hasattr(obj, 'to_dict'):
            return to_jsonable(obj.to_dict())
        return to_jsonable(dataclasses.asdict(obj))
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v) for v in items]
    if isinstance(obj, pd.DataFrame):
        return to_jsonable(obj.to_dict(orient='records'))
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else None
    return obj


def _atomic_write(path, payload: bytes) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f'.{path.name}.', suffix='.tmp')
        try:
            with os.fdopen(fd, 'wb') as f:
                f.write(payload)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoFailure(f'Cannot write {path}: {exc}', {'path': str(path)}) from exc
    return path


def atomic_write_text(path, text: str) -> Path:
    """Write text via temp file + rename so readers never see partial output"""
    return _atomic_write(path, text.encode('utf-8'))


def dumps_json(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True, default=str, allow_nan=False) + '\n'


def write_json_report(path, values: Dict, extra: Optional[Dict] = None) -> Path:
    """
    Write a versioned JSON report

    Args:
        path: output file
        values: report payload
        extra: top-level entries beside values (e.g. config echo, notes)

    Returns:
        Path written
    """
    report = {
        'schema_version': SCHEMA_VERSION,
        'log_base': 'natural',
        'units': UNITS,
        'values': values,
    }
    if extra:
        report.update(extra)
    logger.info(f'Writing report {path}')
    return atomic_write_text(path, dumps_json(report))


def write_csv(df: pd.DataFrame, path) -> Path:
    """Write a table as CSV with fixed float formatting"""
    return atomic_write_text(path, df.to_csv(index=False, float_format='%.12g', lineterminator='\n'))


def write_gnuplot(path, x: Sequence[float], y: Sequence[float], header: Iterable[str]) -> Path:
    """Two-column whitespace-separated data with '#' header lines"""
    lines = [f'# {h}' for h in header]
    lines.extend(f'{float(a):.12g} {float(b):.12g}' for a, b in zip(x, y))
    return atomic_write_text(path, '\n'.join(lines) + '\n')
