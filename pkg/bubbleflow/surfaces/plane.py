from __future__ import annotations

from typing import Any

import numpy as np

from bubbleflow.surfaces.surface import ChartData, HeightJet, HostSurface


class PlaneSurface(HostSurface):
    """The plane z = 0 with the domain in the upper half space."""

    name = "plane"

    def level(self, X: np.ndarray) -> np.ndarray:
        return -np.asarray(X, dtype=float)[..., 2]

    def level_gradient(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.broadcast_to(np.array([0.0, 0.0, -1.0]), X.shape).copy()

    def level_hessian(self, X: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(X) + (3,))

    def level_third(self, X: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(X) + (3, 3))

    @property
    def reach(self) -> float:
        return np.inf

    @property
    def chart_radius(self) -> float:
        return np.inf

    def default_anchor(self) -> np.ndarray:
        return np.zeros(3)

    def seed_points(self, n: int) -> np.ndarray:
        side = max(int(np.ceil(np.sqrt(n))), 1)
        grid = np.linspace(-1.0, 1.0, side)
        xx, yy = np.meshgrid(grid, grid)
        points = np.stack([xx.ravel(), yy.ravel(), np.zeros(xx.size)], axis=-1)
        return points[:n]

    def params(self) -> dict[str, Any]:
        return {}

    def chart_height(self, chart: ChartData, x: np.ndarray) -> HeightJet:
        shape = np.shape(x)[:-1]
        return HeightJet(
            value=np.zeros(shape),
            grad=np.zeros(shape + (2,)),
            hess=np.zeros(shape + (2, 2)),
            third=np.zeros(shape + (2, 2, 2)),
        )

    def nearest_point(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.array([y[0], y[1], 0.0])
