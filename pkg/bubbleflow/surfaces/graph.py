from __future__ import annotations

from typing import Any

import numpy as np

from bubbleflow.surfaces.surface import HostSurface


class GraphSurface(HostSurface):
    """Gaussian bump z = h(x, y) = A·exp(-|(x, y) - c|² / (2 w²)); the domain lies above the graph."""

    name = "graph"

    def __init__(self, amplitude: float = 0.1, width: float = 1.0, center: tuple[float, float] = (0.0, 0.0)):
        if width <= 0:
            raise ValueError(f"bump width must be positive, got {width}")
        self.amplitude = float(amplitude)
        self.width = float(width)
        self.center = np.asarray(center, dtype=float)

    def _height(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        X = np.asarray(X, dtype=float)
        d = X[..., :2] - self.center
        h = self.amplitude * np.exp(-np.einsum("...i,...i->...", d, d) / (2.0 * self.width**2))
        return h, d

    def height(self, X: np.ndarray) -> np.ndarray:
        return self._height(X)[0]

    def level(self, X: np.ndarray) -> np.ndarray:
        return self._height(X)[0] - np.asarray(X, dtype=float)[..., 2]

    def level_gradient(self, X: np.ndarray) -> np.ndarray:
        h, d = self._height(X)
        s2 = self.width**2
        grad = np.empty(np.shape(X))
        grad[..., :2] = -h[..., None] * d / s2
        grad[..., 2] = -1.0
        return grad

    def level_hessian(self, X: np.ndarray) -> np.ndarray:
        h, d = self._height(X)
        s2 = self.width**2
        out = np.zeros(np.shape(X) + (3,))
        out[..., :2, :2] = h[..., None, None] * (d[..., :, None] * d[..., None, :] / s2**2 - np.eye(2) / s2)
        return out

    def level_third(self, X: np.ndarray) -> np.ndarray:
        h, d = self._height(X)
        s2 = self.width**2
        eye = np.eye(2)
        ddd = -np.einsum("...i,...j,...k->...ijk", d, d, d) / s2**3
        sym = (
            np.einsum("ij,...k->...ijk", eye, d)
            + np.einsum("ik,...j->...ijk", eye, d)
            + np.einsum("jk,...i->...ijk", eye, d)
        ) / s2**2
        out = np.zeros(np.shape(X) + (3, 3))
        out[..., :2, :2, :2] = h[..., None, None, None] * (ddd + sym)
        return out

    @property
    def reach(self) -> float:
        if self.amplitude == 0.0:
            return self.width
        return min(self.width, self.width**2 / (2.0 * abs(self.amplitude)))

    def default_anchor(self) -> np.ndarray:
        return np.array([self.center[0], self.center[1], self.amplitude])

    def seed_points(self, n: int) -> np.ndarray:
        side = max(int(np.ceil(np.sqrt(n))), 1)
        offsets = np.linspace(-2.5 * self.width, 2.5 * self.width, side)
        xx, yy = np.meshgrid(self.center[0] + offsets, self.center[1] + offsets)
        plane = np.stack([xx.ravel(), yy.ravel(), np.zeros(xx.size)], axis=-1)[:n]
        plane[:, 2] = self.height(plane)
        return plane

    def params(self) -> dict[str, Any]:
        return {"amplitude": self.amplitude, "width": self.width, "center": self.center.tolist()}
