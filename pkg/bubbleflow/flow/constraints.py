"""Constraint space K = span{grad A, grad C^1, grad C^2} and the projections built on it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from bubbleflow.exceptions import DegenerateStateError, RegimeError
from bubbleflow.geometry.barycenter import barycenter, barycenter_gradient
from bubbleflow.geometry.immersion import ImmersionGeometry, area_gradient, geometry
from bubbleflow.geometry.metric import AmbientMetric, DifferenceDirection, FlatMetric, MetricDirection
from bubbleflow.hemisphere.basis import SpectralField

_MAX_GRAM_CONDITION = 1e8


@dataclass(frozen=True)
class ConstraintValues:
    area: float
    barycenter: np.ndarray

    @property
    def residual(self) -> np.ndarray:
        """(A - 2 pi, C^1, C^2)."""
        return np.array([self.area - 2.0 * np.pi, *self.barycenter])


def constraint_values(
    u: SpectralField, metric: AmbientMetric, geom: ImmersionGeometry | None = None
) -> ConstraintValues:
    geom = geom or geometry(u, metric)
    return ConstraintValues(area=geom.area, barycenter=barycenter(u, metric, geom))


@dataclass(frozen=True)
class ConstraintBasis:
    """Normalized gradients psi_mu = grad C^mu / |grad C^mu| (C^0 = A) with their Gram matrix."""

    geometry: ImmersionGeometry
    gradients: np.ndarray  # (3, n)
    norms: np.ndarray
    psi: np.ndarray
    gram: np.ndarray
    gram_inverse: np.ndarray

    def inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return self.geometry.inner(a, b)

    def coefficients(self, X: np.ndarray) -> np.ndarray:
        """A^{mu nu} <psi_mu, X>, the psi-coordinates of P_K X."""
        return self.gram_inverse @ self.geometry.integrate(self.psi * X[None, :])

    def project_K(self, X: np.ndarray) -> np.ndarray:
        return self.coefficients(X) @ self.psi

    def project_K_perp(self, X: np.ndarray) -> np.ndarray:
        return X - self.project_K(X)


def constraint_basis(
    u: SpectralField,
    metric: AmbientMetric,
    geom: ImmersionGeometry | None = None,
    x: np.ndarray | None = None,
) -> ConstraintBasis:
    geom = geom or geometry(u, metric)
    gradients = np.vstack([area_gradient(geom)[None, :], barycenter_gradient(u, metric, geom, x)])
    norms = np.sqrt(geom.integrate(gradients**2))
    if np.any(norms <= 1e-12):
        raise DegenerateStateError("a constraint gradient vanishes", norms=norms.tolist())
    psi = gradients / norms[:, None]
    gram = psi @ (geom.weights[:, None] * psi.T)
    condition = float(np.linalg.cond(gram))
    if not np.isfinite(condition) or condition > _MAX_GRAM_CONDITION:
        raise RegimeError("constraint Gram matrix is singular", condition=condition)
    return ConstraintBasis(
        geometry=geom,
        gradients=gradients,
        norms=norms,
        psi=psi,
        gram=gram,
        gram_inverse=np.linalg.inv(gram),
    )


def project_K(basis: ConstraintBasis, X: np.ndarray) -> np.ndarray:
    return basis.project_K(X)


def project_K_perp(basis: ConstraintBasis, X: np.ndarray) -> np.ndarray:
    return basis.project_K_perp(X)


def project_H_perp(H: np.ndarray, W: np.ndarray, geom: ImmersionGeometry) -> np.ndarray:
    """W - (int W H / int H^2) H."""
    norm = geom.inner(H, H)
    if norm <= 1e-14:
        raise DegenerateStateError("mean curvature vanishes in L2", h_norm=norm)
    return W - geom.inner(W, H) / norm * H


def constraint_derivative(u: SpectralField, direction: MetricDirection) -> np.ndarray:
    """D_2 (A, C^1, C^2)[u, g] applied to a metric variation given as a central difference of two metrics."""
    if not isinstance(direction, DifferenceDirection):
        raise TypeError(f"constraint derivatives need a difference of two metrics, got {type(direction).__name__}")
    for metric in (direction.plus, direction.minus):
        if not isinstance(metric, FlatMetric):
            raise TypeError(f"barycenters need a metric with closed-form exponential map, got {metric!r}")
    plus = constraint_values(u, direction.plus)
    minus = constraint_values(u, direction.minus)
    return (plus.residual - minus.residual) / (2.0 * direction.step)


def tau(u: SpectralField, direction: MetricDirection, basis: ConstraintBasis) -> np.ndarray:
    """tau = -A^{mu nu} (D_2 C^mu . dg / |grad C^mu|) psi_nu: the K-component forced by a moving metric."""
    rates = constraint_derivative(u, direction) / basis.norms
    return -(basis.gram_inverse @ rates) @ basis.psi
