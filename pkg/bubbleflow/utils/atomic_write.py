import json
from pathlib import Path
from typing import Any

import numpy as np


def atomic_write(path: Path, data: str | bytes) -> None:
    """Write text or bytes atomically to prevent corruption on interruption."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_file = path.with_name(path.name + ".tmp")
    if isinstance(data, bytes):
        tmp_file.write_bytes(data)
    else:
        tmp_file.write_text(data)
    tmp_file.replace(path)


def _to_builtin(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def atomic_write_json(path: Path, payload: Any) -> None:
    atomic_write(path, json.dumps(payload, indent=2, sort_keys=True, default=_to_builtin) + "\n")
