"""
Integration tests for the `bubbleflow` command line on cheap flat-host and sphere configurations.
"""

import json

import pytest
from typer.testing import CliRunner

from bubbleflow.cli.app import app
from bubbleflow.constants import (
    EXIT_NUMERICAL_ABORT,
    EXIT_USAGE,
    FILE_FAILURE,
    FILE_REPORT,
    FILE_SUMMARY,
    FILE_TRAJECTORY,
)

PLANE = """\
surface:
  kind: plane
lambda: 0.05
resolution: !include resolution/coarse.yaml
time:
  t_end: 1.0
  max_steps: 3
"""


@pytest.fixture
def runner():
    return CliRunner()


def test_verify_plane(runner, write_config, tmp_path):
    out = tmp_path / "verify"
    result = runner.invoke(app, ["verify", "-c", str(write_config(PLANE)), "-s", "surfaces", "-o", str(out)])
    assert result.exit_code == 0, result.output
    report = json.loads((out / FILE_REPORT).read_text())
    assert report["passed"] is True
    assert report["suites"] == ["surfaces"]
    assert (out / "everything.log").exists()


def test_run_round_seed(runner, write_config, tmp_path):
    out = tmp_path / "run"
    result = runner.invoke(app, ["run", "-c", str(write_config(PLANE)), "-o", str(out)])
    assert result.exit_code == 0, result.output
    assert (out / FILE_TRAJECTORY).exists()
    assert json.loads((out / FILE_SUMMARY).read_text())["stopped"] == "stationary"


def test_numerical_abort(runner, write_config, tmp_path):
    """lambda = 0.3 does not fit in the chart of the unit sphere."""
    config = write_config("surface:\n  kind: sphere\nlambda: 0.3\nresolution: !include resolution/coarse.yaml\n")
    out = tmp_path / "abort"
    result = runner.invoke(app, ["run", "-c", str(config), "-o", str(out)])
    assert result.exit_code == EXIT_NUMERICAL_ABORT
    failure = json.loads((out / FILE_FAILURE).read_text())
    assert failure["error"] == "RegimeError"
    assert failure["details"]["lam"] == 0.3


@pytest.mark.parametrize(
    ("text", "args"),
    [
        ("lambda: -1.0\n", ["verify"]),
        (PLANE, ["verify", "-s", "round,banana"]),
        (PLANE, ["scan", "-k", "resolution", "--l-values", "8"]),
        (PLANE, ["scan", "--lambdas", "0.08,0.04"]),
    ],
)
def test_usage_errors(runner, write_config, tmp_path, text, args):
    command, *rest = args
    result = runner.invoke(app, [command, "-c", str(write_config(text)), "-o", str(tmp_path / "out"), *rest])
    assert result.exit_code == EXIT_USAGE, result.output


def test_scan_expansion_on_the_plane(runner, write_config, tmp_path):
    out = tmp_path / "scan"
    result = runner.invoke(app, ["scan", "-c", str(write_config(PLANE)), "-o", str(out)])
    assert result.exit_code == 0, result.output
    report = json.loads((out / FILE_REPORT).read_text())
    assert report["suites"] == ["scan-expansion"]
    assert len(report["tables"]["expansion"]["rows"]) == 3
    assert (out / "tables" / "expansion.csv").exists()
