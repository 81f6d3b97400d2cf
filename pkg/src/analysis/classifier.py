"""
Type Classifier
Ensemble runs over a graph family, Type 1 / Type 2 event frequencies,
scaling-exponent fits and per-level summaries

Place in: src/analysis/classifier.py
"""

import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.analysis.analyzer import GraphAnalyzer
from src.analysis.metric_geometry import packing_number
from src.analysis.resistance import resistance_diameter
from src.config import AnalysisToggles, EstimatorBudgets
from src.ensembles.families import FamilySpec, generate, is_stochastic, model_orders
from src.extensions import parallel_map, substream_seed
from src.models.errors import EmptyGraph, InsufficientData, InvalidParameters, RejectionBudgetExceeded
from src.models.graph import volume
from src.models.models import EnsembleStats, ExponentFit, NetMode, TypeReport, Verdict

logger = logging.getLogger(__name__)

DEFAULT_LAMBDA_GRID = (2.0, 4.0, 8.0, 16.0, 32.0)
DEFAULT_THRESHOLD = 0.9
DEFAULT_PACKING_CONSTANT = 0.25
MIN_N_VALUES = 3
MIN_SAMPLES = 10
BOOTSTRAP_ROUNDS = 1000

# ratio2 = t_cov / t_hit grows like log|V| for Type 1 and stays bounded for
# Type 2; the slope of log ratio2 against log log|V| is tested against this cutoff
GROWTH_CUTOFF = 0.5

FIT_MODELS = ('power_in_N', 'per_level_geometric', 'log_power')

# Bootstrap streams sit apart from the per-N sample streams
BOOTSTRAP_KEY = 1 << 42

# Greedy packing counts at diam_R / 2^k recorded per sample
PACKING_LEVELS = (1, 2, 3, 4)

ENSEMBLE_TOGGLES = AnalysisToggles(packing=True, covering=False, chaining=True, cover_mc=True,
                                   cover_exact=True, gff=False)


# ============================================================================
# ENSEMBLE RUNS
# ============================================================================

def sample_seed(seed: int, N: int, sample: int) -> int:
    return substream_seed(substream_seed(seed, N), sample)


def _safe_log_ratio(numerator: float, denominator: float) -> float:
    if numerator <= 0 or denominator <= 1:
        return float('nan')
    return math.log(numerator) / math.log(denominator)


def measure_sample(analyzer: GraphAnalyzer, orders: Dict, packing_constant: float) -> Dict:
    """One ensemble record from an analyzer over a generated graph"""
    g = analyzer.graph
    n = g.vertex_count
    hit = analyzer.hitting()
    t_cov, t_cov_se, source = analyzer.cover_time()
    diam = resistance_diameter(analyzer.metric)
    vol = volume(g)
    t_hit = hit['t_hit']
    record = {
        'vertex_count': n,
        'edge_count': g.edge_count,
        'volume': vol,
        'diam_R': diam,
        'diam_exact': analyzer.metric.is_dense,
        't_hit': t_hit,
        't_hit_se': hit['t_hit_se'],
        't_hit_source': hit['source'],
        't_cov': t_cov,
        't_cov_se': t_cov_se,
        't_cov_source': source,
        'ratio1': t_cov / (t_hit * math.log(n)),
        'ratio2': t_cov / t_hit,
        'hit_ratio': t_hit / (vol * diam),
        'cover_per_edge': t_cov / g.edge_count,
        'cover_over_order': t_cov / orders['cover_order'],
    }
    bounds = analyzer.bounds()
    record['sandwich_passed'] = bounds['sandwich']['passed']
    record['commute_passed'] = bounds['commute_bounds']['passed']

    v_n, r_n = orders['v'], orders['r']
    record['log_v_ratio'] = _safe_log_ratio(n, v_n)
    record['diam_over_r'] = diam / r_n
    record['volume_over_v'] = vol / v_n
    if analyzer.metric.is_dense and analyzer.toggles.packing:
        for k in PACKING_LEVELS:
            record[f'pack_{k}'] = packing_number(analyzer.metric, diam / 2 ** k, NetMode.GREEDY).count
        n_pac = packing_number(analyzer.metric, packing_constant * r_n, NetMode.GREEDY).count
        record['packing_exponent'] = _safe_log_ratio(n_pac, v_n) if n_pac > 1 else 0.0
    if analyzer.metric.is_dense and analyzer.toggles.chaining:
        chaining = analyzer.chaining()['chaining']
        record['chaining'] = chaining
        record['chaining_over_sqrt_r'] = chaining / math.sqrt(r_n)
    if not record['sandwich_passed']:
        logger.warning(f'Sample violates the hitting/cover sandwich: {record}')
    return record


def run_ensemble(spec: FamilySpec, n_values: Sequence[int], samples: int,
                 budgets: Optional[EstimatorBudgets] = None, seed: int = 0, threads: int = 1,
                 packing_constant: float = DEFAULT_PACKING_CONSTANT,
                 toggles: Optional[AnalysisToggles] = None) -> EnsembleStats:
    """
    Generate and measure samples per N

    Args:
        spec: family spec (its own N and seed are ignored)
        n_values: size parameters
        samples: graphs per N
        budgets: estimator budgets
        seed: master seed; sample s at size N uses substream (seed, N, s)
        threads: samples measured concurrently

    Returns:
        EnsembleStats with one record per measured sample
    """
    if samples < 1 or not n_values:
        raise InvalidParameters('run_ensemble needs at least one N value and one sample')
    budgets = budgets or EstimatorBudgets()
    toggles = toggles or ENSEMBLE_TOGGLES
    spec.validate()
    n_values = sorted(set(int(N) for N in n_values))
    orders = {N: model_orders(spec, N) for N in n_values}
    stochastic = is_stochastic(spec)
    tasks = [(N, s) for N in n_values for s in range(samples)]
    logger.info(f'Ensemble {spec.family}: N={n_values}, {samples} samples each')

    def run_one(task: Tuple[int, int]) -> Tuple[int, int, Optional[Dict], Optional[str]]:
        N, s = task
        record_seed = sample_seed(seed, N, s)
        try:
            g = generate(spec, N, record_seed, budgets.rejection_cap, budgets.max_tree_vertices)
        except (EmptyGraph, RejectionBudgetExceeded) as exc:
            logger.warning(f'{spec.family} N={N} sample {s} excluded: {exc.message}')
            return N, s, None, type(exc).__name__
        analyzer = GraphAnalyzer(g, budgets, toggles, record_seed, threads=1,
                                 root=0 if spec.family in ('gw_supercritical', 'iic_kesten') else None)
        record = measure_sample(analyzer, orders[N], packing_constant)
        record.update(N=N, sample=s, seed=record_seed)
        return N, s, record, None

    # deterministic graphs with exact cover times give identical samples
    if not stochastic:
        first = parallel_map(run_one, [(N, 0) for N in n_values], threads)
        results = []
        for N, _, record, failure in first:
            exact = record is not None and record['t_cov_source'] == 'exact'
            if exact:
                results.extend((N, s, dict(record, sample=s, seed=sample_seed(seed, N, s)), None)
                               for s in range(samples))
            else:
                results.append((N, 0, record, failure))
                results.extend(parallel_map(run_one, [(N, s) for s in range(1, samples)], threads))
    else:
        results = parallel_map(run_one, tasks, threads)

    excluded: Dict[int, int] = {}
    rows = []
    for N, s, record, failure in results:
        if record is None:
            excluded[N] = excluded.get(N, 0) + 1
        else:
            rows.append(record)
    records = pd.DataFrame(rows)
    if not records.empty:
        leading = ['N', 'sample', 'seed']
        records = records[leading + [c for c in records.columns if c not in leading]]
        records = records.sort_values(['N', 'sample'], kind='mergesort').reset_index(drop=True)

    notes = []
    if spec.family == 'er' and spec.regime == 'supercritical_f_over_N':
        notes.append(f'ER edge probability uses f(N) rule {spec.f_rule}; regimes blur at desk scale')
    if spec.family == 'percolation_box':
        notes.append('Percolation cover order known only between two candidate log powers')
    stats = EnsembleStats(spec.family, records, excluded, bool(excluded), notes)
    logger.info(f'Ensemble {spec.family}: {len(records)} records, {sum(excluded.values())} excluded')
    return stats


# ============================================================================
# CLASSIFICATION
# ============================================================================

def _check_data(stats: EnsembleStats, min_samples: int = 1) -> pd.DataFrame:
    records = stats.records
    if records.empty:
        raise InsufficientData('Ensemble has no records')
    counts = records.groupby('N').size()
    if len(counts) < MIN_N_VALUES:
        raise InsufficientData(f'Need at least {MIN_N_VALUES} N values, got {len(counts)}',
                               {'n_values': [int(N) for N in counts.index]})
    short = counts[counts < min_samples]
    if len(short):
        raise InsufficientData(f'Need at least {min_samples} samples per N',
                               {'short': {int(N): int(c) for N, c in short.items()}})
    return records


def type_frequencies(stats: EnsembleStats, lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID) -> pd.DataFrame:
    """
    Per (N, lambda) frequencies of
    type1: 1/lambda <= t_cov / (t_hit log|V|) <= 2
    type2: 1 <= t_cov / t_hit <= lambda
    """
    records = stats.records
    rows = []
    for N, group in records.groupby('N', sort=True):
        r1 = group['ratio1'].to_numpy()
        r2 = group['ratio2'].to_numpy()
        for lam in sorted(lambda_grid):
            rows.append({
                'N': int(N),
                'lambda': float(lam),
                'samples': len(group),
                'type1_frequency': float(np.mean((r1 >= 1.0 / lam) & (r1 <= 2.0))),
                'type2_frequency': float(np.mean((r2 >= 1.0) & (r2 <= lam))),
            })
    return pd.DataFrame(rows)


def _medians(records: pd.DataFrame, column: str) -> pd.DataFrame:
    return records.groupby('N', sort=True).agg(q=(column, 'median'), v=('vertex_count', 'median')).reset_index()


def _bootstrap(records: pd.DataFrame, statistic, seed: int,
               rounds: int = BOOTSTRAP_ROUNDS) -> Tuple[float, float, float]:
    """Point estimate and 95% percentile interval, resampling within each N"""
    point = statistic(records)
    rng = np.random.default_rng(substream_seed(seed, BOOTSTRAP_KEY))
    groups = [g for _, g in records.groupby('N', sort=True)]
    draws = []
    for _ in range(rounds):
        resampled = pd.concat([g.iloc[rng.integers(0, len(g), len(g))] for g in groups])
        draws.append(statistic(resampled))
    draws = np.asarray(draws)
    draws = draws[np.isfinite(draws)]
    if draws.size == 0:
        return point, float('nan'), float('nan')
    low, high = np.percentile(draws, [2.5, 97.5])
    return point, float(low), float(high)


def _slope(x: np.ndarray, y: np.ndarray) -> float:
    if np.ptp(x) == 0 or not np.isfinite(y).all():
        return float('nan')
    return float(np.polyfit(x, y, 1)[0])


def ratio_growth(stats: EnsembleStats, seed: int = 0) -> ExponentFit:
    """Slope of log median(t_cov / t_hit) against log log median |V|, bootstrap CI"""
    records = _check_data(stats)

    def statistic(frame: pd.DataFrame) -> float:
        med = _medians(frame, 'ratio2')
        v = med['v'].to_numpy(dtype=float)
        if (v <= 1).any():
            return float('nan')
        return _slope(np.log(np.log(v)), np.log(med['q'].to_numpy(dtype=float)))

    point, low, high = _bootstrap(records, statistic, seed)
    n_values = tuple(int(N) for N in sorted(records['N'].unique()))
    return ExponentFit('log_log_growth', 'ratio2', point, low, high, n_values)


def classify_type(stats: EnsembleStats, lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
                  threshold: float = DEFAULT_THRESHOLD, seed: int = 0,
                  min_samples: int = MIN_SAMPLES) -> TypeReport:
    """
    Finite-scale Type 1 / Type 2 verdict

    A type's frequency condition holds when, for some lambda in the grid, its
    event frequency reaches the threshold at each of the two largest N. The
    verdict follows the frequency conditions. Only when both hold is the tie
    broken by the growth of t_cov / t_hit in log|V|: a bootstrap interval of
    the log-log slope above GROWTH_CUTOFF gives Type 1, below it Type 2, and
    a straddling interval leaves the run inconclusive.
    """
    records = _check_data(stats, min_samples)
    frequencies = type_frequencies(stats, lambda_grid)
    top = sorted(frequencies['N'].unique())[-2:]
    recent = frequencies[frequencies['N'].isin(top)]
    per_lambda = recent.groupby('lambda')[['type1_frequency', 'type2_frequency']].min()
    type1_lambdas = [float(l) for l in per_lambda.index[per_lambda['type1_frequency'] >= threshold]]
    type2_lambdas = [float(l) for l in per_lambda.index[per_lambda['type2_frequency'] >= threshold]]

    growth = ratio_growth(stats, seed)
    grows = math.isfinite(growth.ci_low) and growth.ci_low > GROWTH_CUTOFF
    bounded = math.isfinite(growth.ci_high) and growth.ci_high < GROWTH_CUTOFF

    tie_break = None
    if type1_lambdas and type2_lambdas:
        if grows:
            verdict, tie_break = Verdict.TYPE1, 'growth_above_cutoff'
        elif bounded:
            verdict, tie_break = Verdict.TYPE2, 'growth_below_cutoff'
        else:
            verdict, tie_break = Verdict.INCONCLUSIVE, 'growth_straddles_cutoff'
    elif type1_lambdas:
        verdict = Verdict.TYPE1
    elif type2_lambdas:
        verdict = Verdict.TYPE2
    else:
        verdict = Verdict.NEITHER

    details = {
        'largest_n': [int(N) for N in top],
        'type1_lambdas': type1_lambdas,
        'type2_lambdas': type2_lambdas,
        'growth_cutoff': GROWTH_CUTOFF,
        'growth_slope': growth.exponent,
        'growth_ci': [growth.ci_low, growth.ci_high],
        'tie_break': tie_break,
        'records': len(records),
        'excluded': {str(k): int(v) for k, v in sorted(stats.excluded.items())},
        'partial': stats.partial,
        'sandwich_violations': int((~records['sandwich_passed'].astype(bool)).sum()),
    }
    logger.info(f'{stats.family}: verdict {verdict.value} (growth slope {growth.exponent:.3f} '
                f'[{growth.ci_low:.3f}, {growth.ci_high:.3f}])')
    return TypeReport(frequencies, tuple(sorted(float(l) for l in lambda_grid)), threshold, verdict,
                      growth, details)


# ============================================================================
# SCALING FITS
# ============================================================================

def fit_scaling_exponent(stats: EnsembleStats, model: str = 'power_in_N', quantity: str = 't_cov',
                         normalize_power: float = 0.0, seed: int = 0) -> ExponentFit:
    """
    Least-squares growth of the per-N median of a record column

    Args:
        stats: ensemble with at least 3 N values
        model: power_in_N (slope against log N), per_level_geometric (base
            exp(slope against N)) or log_power (slope of log(q / N^p) against log log N)
        quantity: record column
        normalize_power: p for the log_power model
        seed: bootstrap seed

    Returns:
        ExponentFit with a 95% bootstrap interval over samples
    """
    if model not in FIT_MODELS:
        raise InvalidParameters(f'Unknown fit model {model!r}; expected one of {FIT_MODELS}')
    records = _check_data(stats)
    if quantity not in records.columns:
        raise InvalidParameters(f'Unknown record column {quantity!r}')

    def statistic(frame: pd.DataFrame) -> float:
        med = frame.groupby('N', sort=True)[quantity].median()
        N = med.index.to_numpy(dtype=float)
        q = med.to_numpy(dtype=float)
        if (q <= 0).any():
            return float('nan')
        if model == 'power_in_N':
            return _slope(np.log(N), np.log(q))
        if model == 'per_level_geometric':
            return math.exp(_slope(N, np.log(q)))
        if (N <= math.e).any():
            return float('nan')
        return _slope(np.log(np.log(N)), np.log(q) - normalize_power * np.log(N))

    point, low, high = _bootstrap(records, statistic, seed)
    n_values = tuple(int(N) for N in sorted(records['N'].unique()))
    logger.info(f'{stats.family} {model} fit of {quantity}: {point:.4g} [{low:.4g}, {high:.4g}]')
    return ExponentFit(model, quantity, point, low, high, n_values)


def level_ratios(stats: EnsembleStats, column: str) -> pd.DataFrame:
    """Per-N median of a column and its ratio to the previous level's median"""
    med = stats.records.groupby('N', sort=True)[column].median().rename('median').reset_index()
    med['ratio'] = med['median'] / med['median'].shift(1)
    return med


def median_level_ratio(stats: EnsembleStats, column: str) -> float:
    return float(level_ratios(stats, column)['ratio'].dropna().median())


def scaled_median_spread(stats: EnsembleStats, column: str = 't_cov', power: float = 1.0) -> Tuple[pd.DataFrame, float]:
    """Per-N median of column / N^power and the max/min spread across N"""
    frame = stats.records.assign(scaled=stats.records[column] / stats.records['N'].astype(float) ** power)
    med = frame.groupby('N', sort=True)['scaled'].median().rename('median').reset_index()
    spread = float(med['median'].max() / med['median'].min())
    return med, spread


def dispersion(stats: EnsembleStats, column: str = 'cover_over_order') -> pd.DataFrame:
    """Per-N quartiles of a column and the interquartile ratio q75 / q25"""
    grouped = stats.records.groupby('N', sort=True)[column]
    out = pd.DataFrame({
        'q25': grouped.quantile(0.25),
        'median': grouped.median(),
        'q75': grouped.quantile(0.75),
    }).reset_index()
    out['iqr_ratio'] = out['q75'] / out['q25']
    return out


def ensemble_summary(stats: EnsembleStats, report: Optional[TypeReport] = None,
                     fits: Sequence[ExponentFit] = ()) -> Dict:
    """JSON-ready summary of an ensemble and its classification"""
    records = stats.records
    per_n = []
    for N, group in records.groupby('N', sort=True):
        per_n.append({
            'N': int(N),
            'samples': len(group),
            'vertex_count': float(group['vertex_count'].median()),
            'diam_R': float(group['diam_R'].median()),
            't_hit': float(group['t_hit'].median()),
            't_cov': float(group['t_cov'].median()),
            'ratio1': float(group['ratio1'].median()),
            'ratio2': float(group['ratio2'].median()),
        })
    out: Dict = {
        'family': stats.family,
        'per_n': per_n,
        'excluded': {str(k): int(v) for k, v in sorted(stats.excluded.items())},
        'partial': stats.partial,
        'notes': list(stats.notes),
        't_cov_gap_direction': 'monte_carlo estimates over a start set are lower bounds on t_cov',
    }
    if report is not None:
        out['classification'] = report.to_dict()
    if fits:
        out['fits'] = [f.to_dict() for f in fits]
    return out


def fits_from_config(stats: EnsembleStats, requests: Sequence[Dict], seed: int) -> List[ExponentFit]:
    """Run the fits a classify config asks for"""
    fits = []
    for request in requests:
        fits.append(fit_scaling_exponent(stats, request.get('model', 'power_in_N'),
                                         request.get('quantity', 't_cov'),
                                         float(request.get('normalize_power', 0.0)), seed))
    return fits
