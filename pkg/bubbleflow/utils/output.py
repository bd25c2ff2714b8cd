"""Run artifacts: trajectory CSV, coefficient snapshots and JSON records."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any

import numpy as np

from bubbleflow.constants import CSV_SCHEMA_VERSION, DIR_SNAPSHOTS, TRAJECTORY_COLUMNS
from bubbleflow.utils.atomic_write import atomic_write, atomic_write_json


def format_float(value: float) -> str:
    """Shortest repr that round-trips; keeps CSV output byte-stable."""
    return repr(float(value))


def write_trajectory_csv(path: Path, rows: list[list[float]]) -> None:
    buffer = io.StringIO()
    buffer.write(f"# schema: {CSV_SCHEMA_VERSION}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TRAJECTORY_COLUMNS)
    for row in rows:
        writer.writerow([format_float(v) for v in row])
    atomic_write(path, buffer.getvalue())


def read_trajectory_csv(path: Path) -> tuple[str, dict[str, np.ndarray]]:
    """Returns (schema version, columns)."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("# schema:"):
        raise ValueError(f"{path} has no schema comment")
    schema = lines[0].split(":", 1)[1].strip()
    reader = csv.reader(lines[1:])
    header = next(reader)
    data = np.array([[float(v) for v in row] for row in reader], dtype=float).reshape(-1, len(header))
    return schema, {name: data[:, j] for j, name in enumerate(header)}


def write_snapshot(out_dir: Path, step: int, coeffs: np.ndarray, sidecar: dict[str, Any]) -> Path:
    """Write `snapshots/u_<step>.f64` (little-endian float64) and its JSON sidecar; returns the data path."""
    directory = out_dir / DIR_SNAPSHOTS
    data_path = directory / f"u_{step:06d}.f64"
    atomic_write(data_path, np.asarray(coeffs, dtype="<f8").tobytes())
    atomic_write_json(data_path.with_suffix(".json"), sidecar)
    return data_path


def read_snapshot(data_path: Path) -> tuple[np.ndarray, dict[str, Any]]:
    data_path = Path(data_path)
    coeffs = np.frombuffer(data_path.read_bytes(), dtype="<f8").copy()
    sidecar = json.loads(data_path.with_suffix(".json").read_text())
    return coeffs, sidecar
