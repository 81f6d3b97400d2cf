"""
Run Graph Analysis and Generate Reports
Analyzes one graph from a family and prints the measurements

Place in: scripts/run_analysis.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

import click
import pandas as pd

from src.analysis.analyzer import GraphAnalyzer
from src.config import AnalysisToggles, EstimatorBudgets
from src.ensembles.families import FamilySpec, generate, model_orders
from src.extensions import configure_logging
from src.utils.reporting import write_csv, write_json_report


@click.command()
@click.option('--family', default='barbell', help='Graph family')
@click.option('--size', 'N', default=6, type=int, help='Size parameter N')
@click.option('--seed', default=0, type=int, help='Master seed')
@click.option('--replicas', default=10000, type=int, help='Walks per start')
@click.option('--out', default='reports', help='Report directory')
def main(family, N, seed, replicas, out):
    """Run the full measurement pipeline on one graph"""
    configure_logging('WARNING')

    print("=" * 80)
    print(f"COVER TIME ANALYSIS - {family.upper()} N={N}")
    print("=" * 80)

    spec = FamilySpec(family, N=N, seed=seed)
    spec.validate()
    g = generate(spec)
    budgets = EstimatorBudgets(replicas=replicas, gff_replicas=replicas)
    analyzer = GraphAnalyzer(g, budgets, AnalysisToggles(), seed)

    print("\n📊 MEASURING...")
    report = analyzer.analyze()

    print(f"\n{'='*80}")
    print("GRAPH")
    print(f"{'='*80}")
    print(f"Vertices: {g.vertex_count:,}")
    print(f"Edges: {g.edge_count:,}")
    print(f"Volume: {report['graph']['volume']:.6g}")
    print(f"Resistance diameter: {report['resistance']['diam_R']:.6g} ohms "
          f"(witness {tuple(report['resistance']['witness'])})")

    print(f"\n{'='*80}")
    print("HITTING AND COVER TIMES")
    print(f"{'='*80}")
    hit = report.get('hitting', {})
    cover = report['cover']
    if hit:
        print(f"t_hit: {hit['t_hit']:.6g} steps ({hit['source']})")
    if 't_cov' in cover:
        print(f"t_cov: {cover['t_cov']:.6g} +- {cover['t_cov_se']:.3g} steps ({cover['source']})")
    if 'sandwich' in cover:
        status = '✓' if cover['sandwich']['passed'] else '✗'
        print(f"{status} t_hit <= t_cov <= 2 t_hit log|V|")
        print(f"  t_cov / (t_hit log|V|) = {cover['ratio1']:.4f}")
        print(f"  t_cov / t_hit = {cover['ratio2']:.4f}")

    if 'nets' in report:
        print(f"\n{'='*80}")
        print(f"PACKING AND COVERING ({report['nets']['mode']})")
        print(f"{'='*80}")
        nets = pd.DataFrame({k: v for k, v in report['nets'].items() if k != 'mode'})
        print("\n" + nets.to_string(index=False))

    if 'functionals' in report:
        print(f"\nChaining functional: {report['functionals']['chaining']:.6g} sqrt-ohms")
        if report['functionals']['sudakov'] is not None:
            print(f"Sudakov functional: {report['functionals']['sudakov']:.6g} sqrt-ohms")
    if 'gff' in report:
        field = report['gff']
        print(f"E max free field: {field['emax']:.6g} +- {field['emax_se']:.2g} (root {field['root']})")
        if field.get('field_ratio') is not None:
            print(f"t_cov / (vol (E max)^2): {field['field_ratio']:.4f}")

    print(f"\n{'='*80}")
    print("SAVING REPORTS")
    print(f"{'='*80}")
    stem = f'{family}_{N}_{seed}'
    report['model_orders'] = model_orders(spec, N) if N > 1 else None
    path = write_json_report(Path(out) / f'{stem}_report.json', report)
    print(f"✓ Report saved: {path}")
    if 'nets' in report:
        path = write_csv(nets, Path(out) / f'{stem}_nets.csv')
        print(f"✓ Net counts saved: {path}")

    print(f"\n{'='*80}")
    print("✓ ANALYSIS COMPLETE!")
    print(f"{'='*80}")
    return report


if __name__ == "__main__":
    main()
