"""Root `bubbleflow` Typer app.

Single entrypoint for bubbleflow. Subcommands:
    bubbleflow run --config <yaml>       integrate one flow, write trajectory CSV and snapshots
    bubbleflow verify --config <yaml>    run verification suites, write the JSON report
    bubbleflow scan --kind {expansion,resolution}   lambda and resolution sweeps
"""

from pathlib import Path

import typer
from dotenv import load_dotenv
from rich.console import Console

from bubbleflow.analysis.suites import run_suites
from bubbleflow.cli.common import guarded, load_config, output_path
from bubbleflow.cli.scan import scan
from bubbleflow.config import SUITE_NAMES
from bubbleflow.constants import EXIT_CHECK_FAILED, FILE_REPORT
from bubbleflow.flow.runner import FlowRunner

load_dotenv()

app = typer.Typer(
    no_args_is_help=True,
    add_completion=False,
    rich_markup_mode="rich",  # enables the [dim] markup used in the Examples blocks
    context_settings={"help_option_names": ["-h", "--help"]},
    help="bubbleflow: area-preserving Willmore flow of small bubbles attached to a host surface.",
)
app.command("scan")(scan)

ConfigOption = typer.Option(None, "--config", "-c", help="Path to the YAML run config (defaults when omitted).")
OutOption = typer.Option(None, "--out", "-o", help="Output directory (default: config output.out_dir or runs/...).")
ThreadsOption = typer.Option(None, "--threads", "-t", min=1, help="Worker threads for independent evaluations.")
SeedOption = typer.Option(None, "--seed", min=0, help="Random seed for sampled checks.")


@app.command()
def run(
    config_path: Path | None = ConfigOption,
    out: Path | None = OutOption,
    threads: int | None = ThreadsOption,
    seed: int | None = SeedOption,
):
    """Integrate the flow from a config and write trajectory.csv, snapshots and summary.json.

    [dim]• bubbleflow run -c configs/ellipsoid.yaml[/dim]
    [dim]• bubbleflow run -c configs/sphere.yaml -o out/sphere  # custom output dir[/dim]
    """
    config = load_config(config_path, seed=seed, threads=threads)
    out = output_path("run", config, out)
    with guarded(config, out, root_log=False):
        runner = FlowRunner(config, output_dir=out)
        trajectory = runner.run()
    Console().print(
        f"[green]Flow finished[/green] ({trajectory.stopped}, {len(trajectory)} records) -> {out.resolve()}"
    )


@app.command()
def verify(
    config_path: Path | None = ConfigOption,
    out: Path | None = OutOption,
    suite: str | None = typer.Option(
        None, "--suite", "-s", help=f"Comma-separated suites ({', '.join(['all', *SUITE_NAMES])})."
    ),
    threads: int | None = ThreadsOption,
    seed: int | None = SeedOption,
):
    """Run verification suites and write report.json (exit 1 if any check fails).

    [dim]• bubbleflow verify -c configs/plane.yaml[/dim]
    [dim]• bubbleflow verify -c configs/ellipsoid.yaml -s flow,ode,parity -t 4[/dim]
    """
    config = load_config(config_path, seed=seed, threads=threads, suites=suite)
    out = output_path("verify", config, out)
    with guarded(config, out):
        report = run_suites(config)
    report.write(out / FILE_REPORT)
    report.render()
    Console().print(f"Report written to {(out / FILE_REPORT).resolve()}")
    if not report.passed:
        raise typer.Exit(EXIT_CHECK_FAILED)


def main() -> None:
    """Console-script entrypoint (`bubbleflow`)."""
    app()


if __name__ == "__main__":
    app()
