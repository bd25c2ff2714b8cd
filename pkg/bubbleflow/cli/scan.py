from enum import Enum
from pathlib import Path

import typer
from rich.console import Console
from rich.table import Table

from bubbleflow.analysis.checks import energy_expansion_scan, resolution_scan
from bubbleflow.analysis.report import VerificationReport
from bubbleflow.cli.common import guarded, load_config, output_path
from bubbleflow.config import config_hash
from bubbleflow.constants import EXIT_CHECK_FAILED, EXIT_USAGE, FILE_REPORT
from bubbleflow.flow.runner import basis_for, starting_point
from bubbleflow.surfaces import get_surface


class ScanKind(str, Enum):
    expansion = "expansion"
    resolution = "resolution"


def _floats(text: str, name: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise typer.BadParameter(f"{name} must be a comma-separated list of numbers") from e


def scan(
    kind: ScanKind = typer.Option(ScanKind.expansion, "--kind", "-k", help="Which sweep to run."),
    config_path: Path | None = typer.Option(None, "--config", "-c", help="Path to the YAML run config."),
    out: Path | None = typer.Option(None, "--out", "-o", help="Output directory."),
    lambdas: str | None = typer.Option(None, "--lambdas", help="Geometric lambda sequence (default: verify.lambdas)."),
    l_values: str = typer.Option("8,12,16", "--l-values", help="L_max values of the resolution sweep."),
    relax: bool = typer.Option(False, "--relax", help="Use stationary states instead of admissible u = 0 states."),
    threads: int | None = typer.Option(None, "--threads", "-t", min=1, help="Sweep points evaluated concurrently."),
    seed: int | None = typer.Option(None, "--seed", min=0, help="Random seed (recorded in the report hash)."),
):
    """Sweep lambda (energy expansion slope) or L_max (resolution errors) and write report.json plus tables.

    [dim]• bubbleflow scan -c configs/sphere.yaml  # slope of the energy, about -2 pi on the unit sphere[/dim]
    [dim]• bubbleflow scan -k resolution --l-values 8,12,16,20 -t 4[/dim]
    """
    config = load_config(config_path, seed=seed, threads=threads)
    out = output_path(f"scan-{kind.value}", config, out)
    surface = get_surface(config.surface)
    with guarded(config, out):
        if kind is ScanKind.expansion:
            values = _floats(lambdas, "--lambdas") if lambdas is not None else config.verify.lambdas
            if len(values) < 3:
                typer.echo("Error: the expansion scan needs at least three lambdas", err=True)
                raise typer.Exit(EXIT_USAGE)
            p = starting_point(surface, config.start)
            report = energy_expansion_scan(
                surface, p, values, basis_for(config), config.solver, relax=relax, threads=config.threads
            )
        else:
            degrees = [int(v) for v in _floats(l_values, "--l-values")]
            if len(degrees) < 2:
                typer.echo("Error: the resolution scan needs at least two values of l_max", err=True)
                raise typer.Exit(EXIT_USAGE)
            report = resolution_scan(degrees, surface, config.lam, config.solver, threads=config.threads)
    report.config_hash = config_hash(config)
    report.suites = [f"scan-{kind.value}"]
    report.write(out / FILE_REPORT)
    _render(report)
    Console().print(f"Report written to {(out / FILE_REPORT).resolve()}")
    if not report.passed:
        raise typer.Exit(EXIT_CHECK_FAILED)


def _render(report: VerificationReport) -> None:
    console = Console()
    for name, scan_table in report.tables.items():
        table = Table(title=name)
        for column in scan_table.columns:
            table.add_column(column, justify="right")
        for row in scan_table.rows:
            table.add_row(*(f"{v:.10g}" for v in row))
        console.print(table)
    report.render(console)
