from __future__ import annotations

from typing import Any

from bubbleflow.surfaces.ellipsoid import EllipsoidSurface
from bubbleflow.surfaces.graph import GraphSurface
from bubbleflow.surfaces.plane import PlaneSurface
from bubbleflow.surfaces.sphere import SphereSurface
from bubbleflow.surfaces.surface import ChartData, CurvatureData, Frame, HeightJet, HostSurface

SURFACES = {cls.name: cls for cls in (PlaneSurface, SphereSurface, EllipsoidSurface, GraphSurface)}


def get_surface(surface_config: Any) -> HostSurface:
    """Build a host surface from a config model or a plain mapping with a `kind` key."""
    params = dict(surface_config) if isinstance(surface_config, dict) else surface_config.model_dump()
    kind = params.pop("kind")
    if kind not in SURFACES:
        raise ValueError(f"Unknown surface kind: {kind}")
    return SURFACES[kind](**params)


__all__ = [
    "SURFACES",
    "ChartData",
    "CurvatureData",
    "EllipsoidSurface",
    "Frame",
    "GraphSurface",
    "HeightJet",
    "HostSurface",
    "PlaneSurface",
    "SphereSurface",
    "get_surface",
]
