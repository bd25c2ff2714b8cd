"""Shared fixtures: a coarse basis that keeps every geometric quantity exact to roundoff, and hosts."""

from pathlib import Path

import numpy as np
import pytest

from bubbleflow.config import config_from_dict
from bubbleflow.hemisphere.basis import BasisTable, build_basis
from bubbleflow.hemisphere.grid import HemisphereGrid
from bubbleflow.surfaces import EllipsoidSurface, GraphSurface, PlaneSurface, SphereSurface

COARSE_RESOLUTION = {"l_max": 8, "n_theta": 24, "n_phi": 48, "trace_order": 5}


@pytest.fixture(scope="session")
def basis() -> BasisTable:
    return build_basis(8, HemisphereGrid(24, 48), trace_order=5)


@pytest.fixture(scope="session")
def plane() -> PlaneSurface:
    return PlaneSurface()


@pytest.fixture(scope="session")
def sphere() -> SphereSurface:
    return SphereSurface(radius=1.0)


@pytest.fixture(scope="session")
def ellipsoid() -> EllipsoidSurface:
    return EllipsoidSurface(1.0, 1.2, 0.8)


@pytest.fixture(scope="session")
def bump() -> GraphSurface:
    return GraphSurface(amplitude=0.1, width=1.0)


@pytest.fixture(scope="session")
def generic_point(ellipsoid) -> np.ndarray:
    """A point of the ellipsoid away from every symmetry plane."""
    return ellipsoid.nearest_point(np.array([0.55, 0.6, 0.45]))


@pytest.fixture
def plane_config_data() -> dict:
    """Cheap flat-host run: a few steps at the coarse resolution."""
    return {
        "surface": {"kind": "plane"},
        "lambda": 0.05,
        "seed": {"modes": [{"l": 2, "m": 0, "amplitude": 0.02}, {"l": 2, "m": 2, "amplitude": 0.01}]},
        "resolution": dict(COARSE_RESOLUTION),
        "time": {"t_end": 1.0, "max_steps": 4, "record_every": 1, "snapshot_every": 2},
    }


@pytest.fixture
def plane_config(plane_config_data):
    return config_from_dict(plane_config_data)


@pytest.fixture
def write_config(tmp_path):
    """Write YAML text to a config file in tmp_path and return its path."""

    def _write(text: str, name: str = "config.yaml") -> Path:
        path = tmp_path / name
        path.write_text(text)
        return path

    return _write
