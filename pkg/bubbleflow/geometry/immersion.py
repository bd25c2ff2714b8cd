"""Geometry of radial graphs f_u(omega) = (1 + u(omega)) omega in (R^3, g).

All quantities are computed pointwise at the nodes of a `Sampler` in the (theta, phi) coordinates of
the hemisphere. Conventions: the normal is the inner g-unit normal (-omega for the round hemisphere),
h_ij = g(D_ij f, nu) and H = g^ij h_ij, so that H = 2 on the round hemisphere.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from bubbleflow.exceptions import SingularImmersionError
from bubbleflow.geometry.metric import AmbientMetric, MetricSample
from bubbleflow.hemisphere.basis import Sampler, SpectralField


def _sphere_frame(theta: np.ndarray, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """omega, its first derivatives (n, 2, 3) and second derivatives (n, 2, 2, 3)."""
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    zero = np.zeros_like(theta)
    omega = np.stack([st * cp, st * sp, ct], axis=-1)
    d_theta = np.stack([ct * cp, ct * sp, -st], axis=-1)
    d_phi = np.stack([-st * sp, st * cp, zero], axis=-1)
    d_theta_phi = np.stack([-ct * sp, ct * cp, zero], axis=-1)
    d_phi2 = np.stack([-st * cp, -st * sp, zero], axis=-1)
    first = np.stack([d_theta, d_phi], axis=-2)
    second = np.stack(
        [np.stack([-omega, d_theta_phi], axis=-2), np.stack([d_theta_phi, d_phi2], axis=-2)],
        axis=-3,
    )
    return omega, first, second, st


@dataclass(frozen=True)
class ImmersionGeometry:
    """Pointwise geometry of f_u at the nodes of `sampler`.

    Shapes (n nodes): position (n, 3), tangents (n, 2, 3), covariant second derivatives (n, 2, 2, 3),
    induced metric (n, 2, 2), normal (n, 3), second form (n, 2, 2), mean / traceless_sq (n,).
    """

    u: SpectralField
    metric: AmbientMetric
    sampler: Sampler
    omega: np.ndarray
    position: np.ndarray
    tangents: np.ndarray
    covariant_hessian: np.ndarray
    ambient: MetricSample
    induced: np.ndarray
    induced_inverse: np.ndarray
    sqrt_det: np.ndarray
    normal: np.ndarray
    second_form: np.ndarray
    mean: np.ndarray
    traceless_sq: np.ndarray
    sin_theta: np.ndarray

    @cached_property
    def area_density(self) -> np.ndarray:
        """dmu_g relative to the round area element."""
        return self.sqrt_det / self.sin_theta

    @cached_property
    def radial_factor(self) -> np.ndarray:
        """g(omega, nu): normal speed per unit change of u."""
        return self.ambient.inner(self.omega, self.normal)

    @cached_property
    def intrinsic_christoffel(self) -> np.ndarray:
        """Levi-Civita symbols of the induced metric, [n, k, i, j] = g^{kl} g(D_ij f, d_l f)."""
        lowered = np.einsum("nija,nab,nlb->nlij", self.covariant_hessian, self.ambient.g, self.tangents)
        return np.einsum("nkl,nlij->nkij", self.induced_inverse, lowered)

    @cached_property
    def conormal(self) -> np.ndarray:
        """Coordinate components of the inner unit conormal to the circles theta = const (points to the pole)."""
        raised = -self.induced_inverse[:, :, 0]
        return raised / np.sqrt(self.induced_inverse[:, 0, 0])[:, None]

    @property
    def weights(self) -> np.ndarray:
        """Quadrature weights of dmu_g (only meaningful on the basis quadrature grid)."""
        return self.u.basis.grid.weights * self.area_density

    @cached_property
    def area(self) -> float:
        return float(np.sum(self.weights))

    def integrate(self, values: np.ndarray) -> float | np.ndarray:
        return np.asarray(values) @ self.weights

    def inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(self.integrate(a * b))

    def mean_value(self, values: np.ndarray) -> np.ndarray:
        return self.integrate(values) / self.area


def geometry(u: SpectralField, metric: AmbientMetric, sampler: Sampler | None = None) -> ImmersionGeometry:
    """Pointwise geometry of f_u in (R^3, metric) at the nodes of `sampler` (default: the quadrature grid)."""
    sampler = sampler or u.basis.sampler
    jet = u.jet(sampler)
    radius = 1.0 + jet.value
    if np.min(radius) <= 0.0:
        raise SingularImmersionError("graph radius 1 + u is not positive", min_radius=float(np.min(radius)))
    omega, d_omega, dd_omega, sin_theta = _sphere_frame(sampler.theta, sampler.phi)
    grad = jet.gradient
    hess = jet.hessian

    tangents = grad[..., None] * omega[:, None, :] + radius[:, None, None] * d_omega
    second = (
        hess[..., None] * omega[:, None, None, :]
        + grad[:, :, None, None] * d_omega[:, None, :, :]
        + grad[:, None, :, None] * d_omega[:, :, None, :]
        + radius[:, None, None, None] * dd_omega
    )
    position = radius[:, None] * omega

    ambient = metric.sample(position)
    covariant = second + np.einsum("nabc,nib,njc->nija", ambient.christoffel, tangents, tangents)

    induced = np.einsum("nia,nab,njb->nij", tangents, ambient.g, tangents)
    det = induced[:, 0, 0] * induced[:, 1, 1] - induced[:, 0, 1] ** 2
    if np.any(det <= 1e-14 * sin_theta**2):
        raise SingularImmersionError("induced metric is degenerate", min_det=float(np.min(det)))
    induced_inverse = np.linalg.inv(induced)

    covector = np.cross(tangents[:, 0], tangents[:, 1])
    raised = np.einsum("nab,nb->na", ambient.inverse, covector)
    normal = -raised / np.sqrt(np.einsum("na,na->n", covector, raised))[:, None]

    second_form = np.einsum("nija,nab,nb->nij", covariant, ambient.g, normal)
    mean = np.einsum("nij,nij->n", induced_inverse, second_form)
    full_sq = np.einsum("nik,njl,nij,nkl->n", induced_inverse, induced_inverse, second_form, second_form)
    return ImmersionGeometry(
        u=u,
        metric=metric,
        sampler=sampler,
        omega=omega,
        position=position,
        tangents=tangents,
        covariant_hessian=covariant,
        ambient=ambient,
        induced=induced,
        induced_inverse=induced_inverse,
        sqrt_det=np.sqrt(det),
        normal=normal,
        second_form=second_form,
        mean=mean,
        traceless_sq=full_sq - 0.5 * mean**2,
        sin_theta=sin_theta,
    )


def laplace_beltrami(geom: ImmersionGeometry, f: SpectralField | np.ndarray) -> np.ndarray:
    """Delta_g f = g^ij (d_ij f - Gamma^k_ij d_k f) at the nodes of `geom`.

    Grid values are first fitted in the basis, so `f` given as an array must live on the quadrature grid.
    """
    if not isinstance(f, SpectralField):
        f = geom.u.basis.field(values=f)
    jet = f.jet(geom.sampler)
    hess = jet.hessian
    corrected = hess - np.einsum("nkij,nk->nij", geom.intrinsic_christoffel, jet.gradient)
    return np.einsum("nij,nij->n", geom.induced_inverse, corrected)


@dataclass(frozen=True)
class WillmoreData:
    """Willmore energy 1/4 int H^2 dmu and the scalar gradient W = 1/2 (Delta_g H + |h0|^2 H)."""

    energy: float
    gradient: np.ndarray
    geometry: ImmersionGeometry

    @property
    def mean(self) -> np.ndarray:
        return self.geometry.mean


def willmore(u: SpectralField, metric: AmbientMetric, geom: ImmersionGeometry | None = None) -> WillmoreData:
    """The Ricci term of the gradient is omitted: every metric used by the flow is a flat pullback."""
    geom = geom or geometry(u, metric)
    H = geom.mean
    gradient = 0.5 * (laplace_beltrami(geom, H) + geom.traceless_sq * H)
    return WillmoreData(energy=0.25 * float(geom.integrate(H**2)), gradient=gradient, geometry=geom)


def area_gradient(geom: ImmersionGeometry) -> np.ndarray:
    """Normal L2 gradient of the area, -H."""
    return -geom.mean
