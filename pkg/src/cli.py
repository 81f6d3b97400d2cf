"""
Command Line Interface
ctlab gen | analyze | classify | catalog, each driven by a JSON run config

Place in: src/cli.py
"""

import logging
import os
import shutil
import tempfile
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import click

from src.analysis.analyzer import GraphAnalyzer
from src.analysis.catalog import catalog_table, run_catalog
from src.analysis.classifier import (
    classify_type, dispersion, ensemble_summary, fit_scaling_exponent, fits_from_config,
    level_ratios, run_ensemble,
)
from src.analysis.resistance import write_resistance_csv
from src.config import RunConfig, Settings, load_config, resolve_out_dir
from src.ensembles.families import generate, model_orders
from src.extensions import configure_logging
from src.models.errors import ConfigError, CriteriaFailed, CtlabError, IoFailure
from src.models.graph import format_graph, read_graph
from src.utils.reporting import atomic_write_text, dumps_json, write_csv, write_gnuplot, write_json_report

logger = logging.getLogger(__name__)

# (file name, writer) pairs are collected first and written once every computation succeeded
Output = Tuple[str, Callable[[Path], object]]
# outputs plus an error to raise after they are written (catalog failures keep their report)
Result = Tuple[List[Output], Optional[CtlabError]]


# ============================================================================
# COMMAND BODIES
# ============================================================================

def _gen(config: RunConfig, threads: int) -> Result:
    spec = config.family
    seed = config.effective_seed
    g = generate(spec, spec.N, seed, config.budgets.rejection_cap, config.budgets.max_tree_vertices)
    text = format_graph(g)
    sidecar = {'family': spec.to_dict(), 'N': spec.N, 'seed': seed,
               'vertex_count': g.vertex_count, 'edge_count': g.edge_count}
    logger.info(f'Generated {spec.family} N={spec.N}: {g.vertex_count} vertices, {g.edge_count} edges')
    return [
        (f'{config.name}.wgr', lambda p: atomic_write_text(p, text)),
        (f'{config.name}.json', lambda p: write_json_report(p, sidecar, {'config': config.to_dict()})),
    ], None


def _analyze(config: RunConfig, threads: int) -> Result:
    if config.graph is not None:
        g = read_graph(config.graph)
        orders = None
    else:
        spec = config.family
        g = generate(spec, spec.N, config.effective_seed, config.budgets.rejection_cap,
                     config.budgets.max_tree_vertices)
        orders = model_orders(spec, spec.N) if spec.N and spec.N > 1 else None
    analyzer = GraphAnalyzer(g, config.budgets, config.toggles, config.seed, threads)
    values = analyzer.analyze(config.radius_points)
    if orders is not None:
        values['model_orders'] = orders

    outputs: List[Output] = [
        (f'{config.name}_report.json', lambda p: write_json_report(p, values, {'config': config.to_dict()})),
    ]
    if config.resistance_csv:
        outputs.append((f'{config.name}_resistance.csv', lambda p: write_resistance_csv(analyzer.metric, p)))
    if config.gnuplot and 'nets' in values:
        for stem, x, y in analyzer.gnuplot_series(values['nets']):
            header = [f'{stem} count against radius', 'radius_ohms count']
            outputs.append((f'{config.name}_{stem}.dat',
                            lambda p, x=x, y=y, header=header: write_gnuplot(p, x, y, header)))
    return outputs, None


def _classify(config: RunConfig, threads: int) -> Result:
    spec = config.family
    stats = run_ensemble(spec, config.n_values, config.samples, config.budgets, config.seed, threads,
                         config.packing_constant)
    report = classify_type(stats, config.lambda_grid, config.threshold, config.seed)
    fits = fits_from_config(stats, config.fits, config.seed)
    if spec.family == 'percolation_box' and not config.fits:
        fits.append(fit_scaling_exponent(stats, 'log_power', 't_cov', float(spec.d), config.seed))

    summary = ensemble_summary(stats, report, fits)
    summary['model_orders'] = [model_orders(spec, N) for N in stats.n_values]
    if spec.family == 'iic_kesten':
        summary['dispersion'] = dispersion(stats, 'cover_over_order')
    if spec.family == 'sierpinski':
        summary['level_ratios'] = {col: level_ratios(stats, col) for col in ('t_cov', 'diam_R')}

    return [
        (f'{config.name}_records.csv', lambda p: write_csv(stats.records, p)),
        (f'{config.name}_frequencies.csv', lambda p: write_csv(report.frequencies, p)),
        (f'{config.name}_report.json', lambda p: write_json_report(p, summary, {'config': config.to_dict()})),
    ], None


def _catalog(config: RunConfig, threads: int) -> Result:
    result = run_catalog(config.seed, config.profile, config.budgets, threads)
    table = catalog_table(result)
    return [
        (f'{config.name}_table.csv', lambda p: write_csv(table, p)),
        (f'{config.name}_report.json', lambda p: write_json_report(p, result, {'config': config.to_dict()})),
    ], _criteria_failure(result)


def _criteria_failure(result: Dict) -> Optional[CtlabError]:
    failed = [r['criterion'] for r in result['rows'] if r['required'] and not r['passed']]
    if not failed:
        return None
    return CriteriaFailed(f'Catalog criteria failed: {failed}', {'failed': failed})


COMMANDS: Dict[str, Callable[[RunConfig, int], Result]] = {
    'gen': _gen,
    'analyze': _analyze,
    'classify': _classify,
    'catalog': _catalog,
}


# ============================================================================
# RUNNER
# ============================================================================

def _write_error(out_dir: Path, error: Dict) -> None:
    try:
        atomic_write_text(out_dir / 'error.json', dumps_json(error))
    except CtlabError:
        logger.error(f'Could not write error.json into {out_dir}')


def _write_outputs(outputs: List[Output], out_dir: Path) -> None:
    """Write every output into a staging directory, then move them into place; a failing writer leaves none"""
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        staging = Path(tempfile.mkdtemp(dir=out_dir, prefix='.staging-'))
    except OSError as exc:
        raise IoFailure(f'Cannot create output directory {out_dir}: {exc}', {'path': str(out_dir)}) from exc
    try:
        for name, writer in outputs:
            writer(staging / name)
        for name, _ in outputs:
            os.replace(staging / name, out_dir / name)
            click.echo(f'✓ wrote {out_dir / name}')
    except OSError as exc:
        raise IoFailure(f'Cannot move outputs into {out_dir}: {exc}', {'path': str(out_dir)}) from exc
    finally:
        shutil.rmtree(staging, ignore_errors=True)


def run_config(config_path, out: Optional[str] = None, threads: Optional[int] = None,
               command: Optional[str] = None) -> int:
    """
    Execute one run config end to end

    Args:
        config_path: JSON run config
        out: output directory override
        threads: worker count override (else CTLAB_THREADS, else CPU count)
        command: subcommand the config must match

    Returns:
        Process exit status: 0 success, 2 validation error, 3 budget or numerical failure
    """
    out_dir = Path(out or 'reports')
    try:
        settings = Settings.from_env()
        out_dir = Path(out or settings.report_dir)
        config = load_config(config_path)
        out_dir = resolve_out_dir(config, out, settings)
        if command is not None and config.command != command:
            raise ConfigError(f'Config is for "{config.command}", not "{command}"')
        workers = threads if threads is not None else settings.threads
        if workers < 1:
            raise ConfigError(f'threads must be >= 1, got {workers}')
        outputs, failure = COMMANDS[config.command](config, workers)
        _write_outputs(outputs, out_dir)
        if failure is not None:
            raise failure
        return 0
    except CtlabError as exc:
        logger.error(f'{type(exc).__name__}: {exc.message}')
        _write_error(out_dir, exc.to_dict())
        click.echo(dumps_json(exc.to_dict()), err=True, nl=False)
        return exc.exit_status
    except Exception as exc:
        logger.exception('Unexpected failure')
        error = {'success': False, 'error': {'code': 'internal_error', 'type': type(exc).__name__,
                                             'message': str(exc), 'exit_status': 3, 'details': {}}}
        _write_error(out_dir, error)
        click.echo(dumps_json(error), err=True, nl=False)
        return 3


# ============================================================================
# CLICK COMMANDS
# ============================================================================

def _common(fn):
    fn = click.option('--threads', type=int, default=None,
                      help='Worker threads (default: CTLAB_THREADS or CPU count)')(fn)
    fn = click.option('--out', type=click.Path(file_okay=False), default=None,
                      help='Output directory (default: config "out" or CTLAB_REPORT_DIR)')(fn)
    fn = click.option('--config', 'config_path', type=click.Path(dir_okay=False), required=True,
                      help='JSON run config')(fn)
    return fn


@click.group()
@click.option('--out', type=click.Path(file_okay=False), default=None, help='Output directory for every command')
@click.option('--threads', type=int, envvar='CTLAB_THREADS', default=None, help='Worker threads')
@click.option('--log-level', default=None, help='Logging level (default: CTLAB_LOG_LEVEL or INFO)')
@click.pass_context
def cli(ctx, out, threads, log_level):
    """Cover-time experiments on weighted random graphs"""
    configure_logging(log_level)
    ctx.obj = {'out': out, 'threads': threads}


def _make_command(name: str, doc: str):
    @cli.command(name=name, help=doc)
    @_common
    @click.pass_context
    def command(ctx, config_path, out, threads):
        shared = ctx.obj or {}
        out = out if out is not None else shared.get('out')
        threads = threads if threads is not None else shared.get('threads')
        ctx.exit(run_config(config_path, out, threads, command=name))
    return command


gen = _make_command('gen', 'Generate one graph of a family and write it as .wgr')
analyze = _make_command('analyze', 'Measure resistance, hitting, cover, nets and free field on one graph')
classify = _make_command('classify', 'Run an ensemble over N values and classify Type 1 / Type 2')
catalog = _make_command('catalog', 'Run the acceptance catalog and emit a pass/fail table')


def main() -> None:
    cli()
