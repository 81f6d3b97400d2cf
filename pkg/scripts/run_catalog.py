"""
Run the Acceptance Catalog
Prints the pass/fail table for the quick or full profile

Place in: scripts/run_catalog.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

import click

from src.analysis.catalog import catalog_table, run_catalog
from src.config import EstimatorBudgets, Settings
from src.extensions import configure_logging


@click.command()
@click.option('--profile', type=click.Choice(['quick', 'full']), default='full')
@click.option('--seed', default=20240601, type=int)
@click.option('--replicas', default=100000, type=int, help='Replicas for the Monte Carlo criteria')
def main(profile, seed, replicas):
    configure_logging('WARNING')
    settings = Settings.from_env()

    print("=" * 80)
    print(f"ACCEPTANCE CATALOG ({profile})")
    print("=" * 80)

    budgets = EstimatorBudgets(replicas=replicas, gff_replicas=replicas)
    result = run_catalog(seed, profile, budgets, settings.threads)

    for row in result['rows']:
        status = '✓' if row['passed'] else '✗'
        print(f"\n{status} {row['criterion']}. {row['name']}")
        for note in row['notes']:
            print(f"   note: {note}")

    print(f"\n{'='*80}")
    print(catalog_table(result).to_string(index=False))
    print(f"{'='*80}")
    if result['all_passed']:
        print("✓ ALL CRITERIA PASSED")
        if result['partial']:
            print(f"   partial run: criteria {result['skipped_criteria']} skipped")
    else:
        print("✗ SOME CRITERIA FAILED")
        sys.exit(3)


if __name__ == "__main__":
    main()
