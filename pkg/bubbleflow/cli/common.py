"""Config loading, output folders and exit-code mapping shared by the subcommands."""

from __future__ import annotations

import logging
import time
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

import typer

from bubbleflow.config import RunConfig, config_from_dict, config_hash, parse_config
from bubbleflow.constants import EXIT_NUMERICAL_ABORT, EXIT_USAGE, FILE_FAILURE, LOCAL_OUTPUT_DIR
from bubbleflow.exceptions import ConfigError, NumericalAbort
from bubbleflow.utils.atomic_write import atomic_write_json
from bubbleflow.utils.log import add_root_file_handler, get_logger, remove_file_handler

logger = get_logger("cli", emoji="🫧")


def load_config(
    config_path: Path | None,
    *,
    seed: int | None = None,
    threads: int | None = None,
    suites: str | None = None,
) -> RunConfig:
    """Parse `config_path` (defaults when omitted) and apply command-line overrides, re-validating the result."""
    try:
        config = parse_config(config_path) if config_path is not None else config_from_dict({})
        overrides: dict = {}
        if seed is not None:
            overrides["random_seed"] = seed
        if threads is not None:
            overrides["threads"] = threads
        if suites is not None:
            names = [name.strip() for name in suites.split(",") if name.strip()]
            overrides["verify"] = {**config.verify.model_dump(mode="json"), "suites": names}
        if overrides:
            config = config_from_dict({**config.model_dump(mode="json", by_alias=True), **overrides})
    except ConfigError as e:
        typer.echo(f"Error: {e}", err=True)
        raise typer.Exit(EXIT_USAGE) from e
    return config


def output_path(command: str, config: RunConfig, out: Path | None) -> Path:
    if out is not None:
        return out
    if config.output.out_dir is not None:
        return config.output.out_dir
    return LOCAL_OUTPUT_DIR / f"{command}.{config.surface.kind}.lam{config.lam:g}.{time.strftime('%y%m%d%H%M%S')}"


@contextmanager
def guarded(config: RunConfig, out: Path, *, root_log: bool = True) -> Iterator[None]:
    """Log everything to `<out>/everything.log`; turn numerical aborts into `failure.json` and exit code 3."""
    handler = add_root_file_handler(out / "everything.log") if root_log else None
    try:
        yield
    except NumericalAbort as e:
        record = {**e.to_record(), "config_hash": config_hash(config)}
        atomic_write_json(out / FILE_FAILURE, record)
        logger.error(f"{type(e).__name__}: {e} (details in {out / FILE_FAILURE})")
        raise typer.Exit(EXIT_NUMERICAL_ABORT) from e
    finally:
        if handler is not None:
            remove_file_handler(logging.getLogger(), handler)
