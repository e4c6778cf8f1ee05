#!/usr/bin/env python3
"""
Command-line interface for the Bernoulli sieve laboratory.

This CLI provides commands for:
- Simulating batches of occupancy statistics
- Computing exact distribution tables by dynamic programming
- Tabulating the reference limit laws
- Running verification scenarios and the acceptance suite

Exit codes: 0 success, 1 failed verification, 2 bad input, 3 numeric failure.
"""

import logging
import sys
from pathlib import Path
from typing import List, Optional, Tuple

import click
import numpy as np

from src.acceptance import DEFAULT_SEED, run_acceptance
from src.errors import (CapabilityError, GofError, InternalConsistencyError, LatticeLawError, LawParseError,
                        PrecisionError, QuadratureError, ScenarioError)
from src.exact_engine import Statistic, exact_table
from src.law_parser import parse_law
from src.limit_laws import limit_handle, tabulate
from src.report_io import open_output, write_batch, write_reports, write_table, write_tabulation
from src.scenario import load_scenario, run_scenario
from src.sieve_sim import STATISTICS, BatchResult, SimulationMode, batch_estimate
from src.stats_harness import summary_table

logger = logging.getLogger(__name__)

EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

USAGE_ERRORS = (LawParseError, LatticeLawError, ScenarioError, GofError, ValueError)
NUMERIC_ERRORS = (QuadratureError, PrecisionError, InternalConsistencyError, CapabilityError)


def _fail(error: Exception) -> None:
    """Report an error on stderr and exit with its code"""
    if isinstance(error, NUMERIC_ERRORS):
        click.echo(f"Numeric failure: {error}", err=True)
        sys.exit(EXIT_NUMERIC)
    click.echo(f"Error: {error}", err=True)
    sys.exit(EXIT_USAGE)


def _parse_grid(text: str) -> np.ndarray:
    """Grid given as start:stop:count or as comma-separated values"""
    try:
        if ':' in text:
            start, stop, count = text.split(':')
            return np.linspace(float(start), float(stop), int(count))
        return np.array([float(v) for v in text.split(',') if v.strip()])
    except ValueError:
        raise click.BadParameter(f"expected start:stop:count or a comma-separated list, got {text!r}",
                                 param_hint='--grid')


@click.group()
@click.version_option(version="1.0.0", prog_name="sievelab")
@click.option('-v', '--verbose', is_flag=True, help='Log progress to stderr')
def cli(verbose: bool):
    """Bernoulli sieve laboratory - simulate, compute exactly and verify occupancy statistics."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, stream=sys.stderr,
                        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')


@cli.command()
@click.option('--law', required=True, help='W-law, e.g. "beta(1,1)", "logpareto(0.5)", "examplegamma(0.3)"')
@click.option('--n', 'size', type=float, help='Number of balls (or Poisson intensity t)')
@click.option('--log-n', type=float, help='log n for the shortcut samplers of M_n and Z_n')
@click.option('--replicates', default=1000, show_default=True, help='Number of replicates')
@click.option('--seed', default=DEFAULT_SEED, show_default=True, help='64-bit master seed')
@click.option('--stat', 'statistics', multiple=True, type=click.Choice(STATISTICS, case_sensitive=False),
              help='Statistics to record (repeatable; default all)')
@click.option('--mode', type=click.Choice([m.value for m in SimulationMode]), default=None,
              help='fixed (default with --n), poissonised, or shortcut (implied by --log-n)')
@click.option('--r-max', default=5, show_default=True, help='Spectrum columns K_1..K_rmax')
@click.option('--workers', default=1, show_default=True, help='Worker threads')
@click.option('-o', '--out', type=click.Path(dir_okay=False), help='Data file (default: stdout)')
@click.option('-f', '--format', 'fmt', type=click.Choice(['csv', 'json']), default='csv', show_default=True)
@click.option('--allow-lattice', is_flag=True, help='Accept lattice laws such as dirac(p)')
def simulate(law: str, size: Optional[float], log_n: Optional[float], replicates: int, seed: int,
             statistics: Tuple[str, ...], mode: Optional[str], r_max: int, workers: int,
             out: Optional[str], fmt: str, allow_lattice: bool):
    """Simulate a batch of occupancy statistics.

    Examples:
        sievelab simulate --law "beta(1,1)" --n 1000 --replicates 100000 --stat L --seed 42
        sievelab simulate --law "logpareto(0.5)" --log-n 10000 --stat Z -o z.csv
        sievelab simulate --law "beta(2,1)" --n 500 --mode poissonised --format json
    """
    if (size is None) == (log_n is None):
        raise click.UsageError("give exactly one of --n and --log-n")
    selected = SimulationMode(mode) if mode else (SimulationMode.SHORTCUT if log_n is not None
                                                   else SimulationMode.FIXED)
    if (selected is SimulationMode.SHORTCUT) != (log_n is not None):
        raise click.UsageError("--log-n goes with mode shortcut, --n with fixed or poissonised")
    if selected is SimulationMode.FIXED and not float(size).is_integer():
        raise click.UsageError("--n must be an integer in fixed mode")

    try:
        w_law = parse_law(law, allow_lattice=allow_lattice)
        chosen = tuple(s.upper() for s in statistics) or STATISTICS
        batch = batch_estimate(w_law, log_n if log_n is not None else size, replicates, seed,
                               statistics=chosen, mode=selected, r_max=r_max, workers=workers)
        if out:
            with open_output(out) as stream:
                write_batch(batch, stream, fmt)
            _echo_batch_summary(batch, out)
        else:
            write_batch(batch, click.get_text_stream('stdout'), fmt)
    except (USAGE_ERRORS + NUMERIC_ERRORS) as e:
        _fail(e)


def _echo_batch_summary(batch: BatchResult, out: str) -> None:
    click.echo(f"{batch.law} {batch.mode.value} size={batch.size:g} replicates={batch.replicates} "
               f"seed={batch.seed} -> {out}")
    for name, row in batch.summary().items():
        click.echo(f"  {name:>6}: mean={row['mean']:.6g} se={row['se']:.3g} var={row['variance']:.6g}")


@cli.command()
@click.option('--law', required=True, help='W-law, e.g. "beta(2,1)"')
@click.option('--n-max', required=True, type=click.IntRange(min=0), help='Largest number of balls')
@click.option('--stat', 'statistic', type=click.Choice([s.value for s in Statistic], case_sensitive=False),
              default='L', show_default=True)
@click.option('--k-max', type=click.IntRange(min=0), help='Fixed support truncation (L and M)')
@click.option('-o', '--out', type=click.Path(dir_okay=False), help='Table file (default: stdout)')
@click.option('-f', '--format', 'fmt', type=click.Choice(['csv', 'json']), default='csv', show_default=True)
@click.option('--allow-lattice', is_flag=True, help='Accept lattice laws such as dirac(p)')
def exact(law: str, n_max: int, statistic: str, k_max: Optional[int], out: Optional[str], fmt: str,
          allow_lattice: bool):
    """Compute the exact distribution table of a statistic for n = 0..n_max.

    Examples:
        sievelab exact --law "beta(1,1)" --n-max 60 --stat L
        sievelab exact --law "beta(2,1)" --n-max 30 --stat K -o k.csv
        sievelab exact --law "beta(1,1)" --n-max 200 --stat Z --format json
    """
    try:
        w_law = parse_law(law, allow_lattice=allow_lattice)
        table = exact_table(w_law, Statistic(statistic.upper()), n_max, k_max)
        if table.truncated:
            click.echo(f"Warning: support truncated at k={table.k_max}; "
                       f"mass deficit up to {table.mass_deficit.max():.3g}", err=True)
        if out:
            with open_output(out) as stream:
                write_table(table, stream, fmt)
            click.echo(f"{table.statistic.value}_n under {table.law}, n <= {table.n_max} -> {out}")
            click.echo(f"  mean at n={table.n_max}: {table.mean(table.n_max):.10g}")
        else:
            write_table(table, click.get_text_stream('stdout'), fmt)
    except (USAGE_ERRORS + NUMERIC_ERRORS) as e:
        _fail(e)


@cli.command()
@click.option('--dist', required=True,
              help='Reference law: normal, stable:1.5, one-stable, ml:0.5, mixedpoisson:1, zlimit:beta(1,1), '
                   'arcsine:0.5, geometric:0.5')
@click.option('--grid', help='start:stop:count or comma-separated points (default depends on the law)')
@click.option('-o', '--out', type=click.Path(dir_okay=False), help='Output file (default: stdout)')
@click.option('-f', '--format', 'fmt', type=click.Choice(['csv', 'json']), default='csv', show_default=True)
def limits(dist: str, grid: Optional[str], out: Optional[str], fmt: str):
    """Tabulate a reference limit law (pmf for discrete laws, CDF otherwise).

    Examples:
        sievelab limits --dist mixedpoisson:1 --grid 0:20:21
        sievelab limits --dist stable:1.5 --grid -5:5:101 -o stable.csv
        sievelab limits --dist "zlimit:beta(1,1)" --format json
    """
    try:
        handle = limit_handle(dist)
        if grid:
            points = _parse_grid(grid)
        elif handle.is_discrete:
            points = np.arange(0, 21)
        elif handle.kind.value in ('ml', 'arcsine'):
            points = np.linspace(0.0, 5.0 if handle.kind.value == 'ml' else 1.0, 101)
        else:
            points = np.linspace(-5.0, 5.0, 101)
        rows = tabulate(handle, points)
        if out:
            with open_output(out) as stream:
                write_tabulation(handle.label(), rows, handle.is_discrete, stream, fmt)
            click.echo(f"{handle.label()}: {len(rows)} points -> {out}")
        else:
            write_tabulation(handle.label(), rows, handle.is_discrete, click.get_text_stream('stdout'), fmt)
    except (USAGE_ERRORS + NUMERIC_ERRORS) as e:
        _fail(e)


@cli.command()
@click.option('--scenario', 'scenario_path', type=click.Path(exists=True, dir_okay=False),
              help='Scenario file (JSON)')
@click.option('--suite', type=click.Choice(['acceptance']), help='Built-in suite')
@click.option('--scale', default=1.0, show_default=True, help='Replicate scale factor for the suite')
@click.option('--seed', default=DEFAULT_SEED, show_default=True, help='Seed for the suite')
@click.option('--criterion', 'criteria', multiple=True, type=click.IntRange(1, 12),
              help='Run only these acceptance criteria (repeatable)')
@click.option('--report', type=click.Path(dir_okay=False), help='Report file')
@click.option('--report-format', type=click.Choice(['jsonl', 'json']), default='jsonl', show_default=True)
def verify(scenario_path: Optional[str], suite: Optional[str], scale: float, seed: int,
           criteria: Tuple[int, ...], report: Optional[str], report_format: str):
    """Run a scenario or the acceptance suite; exit 0 iff every check passes.

    Examples:
        sievelab verify --scenario uniform.json --report reports.jsonl
        sievelab verify --suite acceptance --scale 0.1
        sievelab verify --suite acceptance --criterion 1 --criterion 5
    """
    if (scenario_path is None) == (suite is None):
        raise click.UsageError("give exactly one of --scenario and --suite")
    try:
        if suite:
            reports = run_acceptance(scale, seed, only=list(criteria) or None)
            report_path = report
        else:
            scenario = load_scenario(scenario_path)
            outcome = run_scenario(scenario)
            reports = outcome.reports
            report_path = report or scenario.report_out
            if scenario.data_out:
                _write_scenario_batches(outcome.batches, scenario.data_out)
            for note in outcome.notes:
                click.echo(f"Note: {note}", err=True)
    except (USAGE_ERRORS + NUMERIC_ERRORS) as e:
        _fail(e)
        return

    if report_path:
        with open_output(report_path) as stream:
            write_reports(reports, stream, report_format)
    click.echo(summary_table(reports))
    if not all(r.passed for r in reports):
        sys.exit(EXIT_FAILED)


def _write_scenario_batches(batches: List[BatchResult], data_out: str) -> None:
    target = Path(data_out)
    for index, batch in enumerate(batches):
        path = target if len(batches) == 1 else target.with_name(f"{target.stem}_{index}{target.suffix}")
        with open_output(path) as stream:
            write_batch(batch, stream, 'json' if path.suffix == '.json' else 'csv')


if __name__ == '__main__':
    cli()
