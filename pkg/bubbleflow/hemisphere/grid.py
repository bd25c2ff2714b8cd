from dataclasses import dataclass
from functools import cached_property

import numpy as np

from bubbleflow.exceptions import ResolutionError


@dataclass(frozen=True)
class HemisphereGrid:
    """Tensor grid on the closed upper hemisphere.

    Colatitudes are Gauss-Legendre nodes in mu = cos(theta) mapped to [0, 1], so polynomial integrands
    in mu up to degree 2*n_theta - 1 are integrated exactly; longitudes are uniform. Nodes are flattened
    theta-major: node index = i_theta * n_phi + i_phi, ordered from the pole towards the equator.
    """

    n_theta: int
    n_phi: int

    def __post_init__(self):
        if self.n_theta < 2 or self.n_phi < 4:
            raise ResolutionError(
                f"grid too coarse: n_theta={self.n_theta}, n_phi={self.n_phi}",
                n_theta=self.n_theta,
                n_phi=self.n_phi,
            )

    @cached_property
    def _gauss(self) -> tuple[np.ndarray, np.ndarray]:
        x, w = np.polynomial.legendre.leggauss(self.n_theta)
        order = np.argsort(-x)
        return (x[order] + 1.0) / 2.0, w[order] / 2.0

    @cached_property
    def mu(self) -> np.ndarray:
        return self._gauss[0]

    @cached_property
    def theta(self) -> np.ndarray:
        return np.arccos(self.mu)

    @cached_property
    def phi(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi

    @property
    def size(self) -> int:
        return self.n_theta * self.n_phi

    @cached_property
    def theta_nodes(self) -> np.ndarray:
        return np.repeat(self.theta, self.n_phi)

    @cached_property
    def phi_nodes(self) -> np.ndarray:
        return np.tile(self.phi, self.n_theta)

    @cached_property
    def weights(self) -> np.ndarray:
        """Quadrature weights for the round area element; they sum to 2*pi."""
        return np.repeat(self._gauss[1], self.n_phi) * (2.0 * np.pi / self.n_phi)

    @cached_property
    def omega(self) -> np.ndarray:
        """Unit position vectors of the nodes, shape (size, 3)."""
        return unit_sphere(self.theta_nodes, self.phi_nodes)

    def integrate(self, values: np.ndarray) -> float | np.ndarray:
        """Quadrature over the hemisphere; trailing axis of `values` runs over the nodes."""
        return np.asarray(values) @ self.weights

    def as_matrix(self, values: np.ndarray) -> np.ndarray:
        return np.asarray(values).reshape(self.n_theta, self.n_phi)


def unit_sphere(theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    s = np.sin(theta)
    return np.stack([s * np.cos(phi), s * np.sin(phi), np.cos(theta)], axis=-1)


def quadrature(grid: HemisphereGrid, values: np.ndarray) -> float | np.ndarray:
    return grid.integrate(values)
