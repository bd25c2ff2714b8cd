from __future__ import annotations

from typing import Any

import numpy as np

from bubbleflow.surfaces.surface import HostSurface, fibonacci_directions


class EllipsoidSurface(HostSurface):
    """Axis-aligned ellipsoid x²/a² + y²/b² + z²/c² = 1 bounding the solid ellipsoid."""

    name = "ellipsoid"

    def __init__(self, a: float = 1.0, b: float = 1.0, c: float = 1.0):
        if min(a, b, c) <= 0:
            raise ValueError(f"ellipsoid semi-axes must be positive, got {(a, b, c)}")
        self.axes = np.array([a, b, c], dtype=float)

    def level(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return 0.5 * (np.sum((X / self.axes) ** 2, axis=-1) - 1.0)

    def level_gradient(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) / self.axes**2

    def level_hessian(self, X: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.diag(1.0 / self.axes**2), np.shape(X) + (3,)).copy()

    def level_third(self, X: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(X) + (3, 3))

    @property
    def reach(self) -> float:
        """Smallest principal curvature radius, min(a,b,c)² / max(a,b,c)."""
        return float(self.axes.min() ** 2 / self.axes.max())

    def default_anchor(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.axes[2]])

    def seed_points(self, n: int) -> np.ndarray:
        directions = fibonacci_directions(n) * self.axes
        return np.array([self.nearest_point(d) for d in directions])

    def params(self) -> dict[str, Any]:
        a, b, c = self.axes.tolist()
        return {"a": a, "b": b, "c": c}
