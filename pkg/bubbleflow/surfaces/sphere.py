from __future__ import annotations

from typing import Any

import numpy as np

from bubbleflow.exceptions import ProjectionError
from bubbleflow.surfaces.surface import HostSurface, fibonacci_directions


class SphereSurface(HostSurface):
    """Round sphere of radius R about `center`; the domain is the enclosed ball."""

    name = "sphere"

    def __init__(self, radius: float = 1.0, center: tuple[float, float, float] = (0.0, 0.0, 0.0)):
        if radius <= 0:
            raise ValueError(f"sphere radius must be positive, got {radius}")
        self.radius = float(radius)
        self.center = np.asarray(center, dtype=float)

    def level(self, X: np.ndarray) -> np.ndarray:
        d = np.asarray(X, dtype=float) - self.center
        return (np.einsum("...i,...i->...", d, d) - self.radius**2) / (2.0 * self.radius)

    def level_gradient(self, X: np.ndarray) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.center) / self.radius

    def level_hessian(self, X: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.eye(3) / self.radius, np.shape(X) + (3,)).copy()

    def level_third(self, X: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(X) + (3, 3))

    @property
    def reach(self) -> float:
        return self.radius

    def default_anchor(self) -> np.ndarray:
        return self.center + np.array([0.0, 0.0, self.radius])

    def seed_points(self, n: int) -> np.ndarray:
        return self.center + self.radius * fibonacci_directions(n)

    def params(self) -> dict[str, Any]:
        return {"radius": self.radius, "center": self.center.tolist()}

    def nearest_point(self, y: np.ndarray) -> np.ndarray:
        d = np.asarray(y, dtype=float) - self.center
        length = np.linalg.norm(d)
        if length == 0.0:
            raise ProjectionError("nearest point of the sphere center is undefined", point=list(map(float, y)))
        p = self.center + self.radius * d / length
        self._check_reach(np.asarray(y, dtype=float), p)
        return p
