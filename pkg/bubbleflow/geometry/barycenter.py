"""Planar Riemannian barycenter C[u, g] of a graph over the hemisphere.

C is the point x of the plane R^2 x {0} for which the g-mean of the log maps log_x(f_u) is g-orthogonal
to the plane. It is found as the fixed point of x -> pi(x + mean log_x(f_u)), where pi is the
g-orthogonal projection onto the plane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from bubbleflow.exceptions import ConvergenceError
from bubbleflow.geometry.immersion import ImmersionGeometry, geometry
from bubbleflow.geometry.metric import AmbientMetric, FlatMetric, PullbackMetric
from bubbleflow.hemisphere.basis import SpectralField
from bubbleflow.utils.log import get_logger

logger = get_logger("barycenter")

_PROJECTION_MAX_ITER = 100
_FIXED_POINT_MAX_ITER = 200
_TOL = 1e-14
_PLANE = np.eye(3)[:, :2]


def _lift(x: np.ndarray) -> np.ndarray:
    return np.array([x[0], x[1], 0.0])


@dataclass(frozen=True)
class PlaneProjection:
    """x = pi[g, z] and the derivative D pi of shape (2, 3) at z."""

    x: np.ndarray
    derivative: np.ndarray
    iterations: int


@dataclass(frozen=True)
class BarycenterResult:
    x: np.ndarray
    residual: float
    iterations: int
    mean_log: np.ndarray
    projection: PlaneProjection

    @property
    def point(self) -> np.ndarray:
        """The barycenter as a point (x, 0) of the chart domain."""
        return _lift(self.x)


def project_plane(metric: AmbientMetric, z: np.ndarray) -> PlaneProjection:
    """The x in R^2 with g_x(z - x, e_i) = 0 for i = 1, 2, by the contraction x <- x + g_x(z - x, e)."""
    z = np.asarray(z, dtype=float)
    x = z[:2].copy()
    for iteration in range(1, _PROJECTION_MAX_ITER + 1):
        g = metric.at(_lift(x))
        update = (g @ (z - _lift(x)))[:2]
        x = x + update
        if np.linalg.norm(update) <= _TOL * (1.0 + np.linalg.norm(x)):
            break
    else:
        raise ConvergenceError("plane projection did not converge", point=z.tolist())

    sample = metric.sample(_lift(x))
    d = z - _lift(x)
    # Phi_i(z, x) = (g(x) (z - x))_i
    d_x = np.einsum("jib,b->ij", sample.dg[:2, :2, :], d) - sample.g[:2, :2]
    derivative = -np.linalg.solve(d_x, sample.g[:2, :])
    return PlaneProjection(x=x, derivative=derivative, iterations=iteration)


def _require_flat(metric: AmbientMetric) -> FlatMetric:
    if not isinstance(metric, FlatMetric):
        raise TypeError(f"barycenters need a metric with closed-form exponential map, got {metric!r}")
    return metric


def barycenter_intrinsic(
    u: SpectralField, metric: AmbientMetric, geom: ImmersionGeometry | None = None
) -> BarycenterResult:
    metric = _require_flat(metric)
    geom = geom or geometry(u, metric)
    weights = geom.weights / geom.area
    x = np.zeros(2)
    for iteration in range(1, _FIXED_POINT_MAX_ITER + 1):
        mean_log = weights @ metric.log_map(_lift(x), geom.position)
        projection = project_plane(metric, _lift(x) + mean_log)
        step = projection.x - x
        x = projection.x
        if np.linalg.norm(step) <= 1e-13 * (1.0 + np.linalg.norm(x)):
            break
    else:
        raise ConvergenceError("barycenter fixed-point iteration did not converge", step=float(np.linalg.norm(step)))
    mean_log = weights @ metric.log_map(_lift(x), geom.position)
    projection = project_plane(metric, _lift(x) + mean_log)
    residual = float(np.linalg.norm(projection.x - x))
    logger.debug(f"intrinsic barycenter x={x.tolist()} after {iteration} iterations (residual {residual:.2e})")
    return BarycenterResult(x=x, residual=residual, iterations=iteration, mean_log=mean_log, projection=projection)


def barycenter_extrinsic(u: SpectralField, metric: PullbackMetric, geom: ImmersionGeometry | None = None) -> np.ndarray:
    """Nearest point on the host of the euclidean mean of F^lam[p, f_u]; returns a world point."""
    if metric.lam <= 0.0:
        raise ValueError("the extrinsic barycenter needs lambda > 0")
    geom = geom or geometry(u, metric)
    # the rescaled area element differs from the euclidean one of F^lam[p, f_u] by the constant lam^2
    mean = (geom.weights / geom.area) @ metric.world(geom.position)
    return metric.chart.surface.nearest_point(mean)


def extrinsic_chart_coordinates(metric: PullbackMetric, q: np.ndarray) -> np.ndarray:
    """Planar chart coordinates x with F^lam[p, (x, 0)] = q for a host point q."""
    return metric.chart.frame_coordinates(q)[:2] / metric.lam


def barycenter(u: SpectralField, metric: AmbientMetric, geom: ImmersionGeometry | None = None) -> np.ndarray:
    """Chart coordinates of C[u, g]: the extrinsic shortcut for pullback metrics, the fixed point otherwise."""
    if isinstance(metric, PullbackMetric) and metric.lam > 0.0:
        return extrinsic_chart_coordinates(metric, barycenter_extrinsic(u, metric, geom))
    return barycenter_intrinsic(u, metric, geom).x


def barycenter_gradient(
    u: SpectralField,
    metric: AmbientMetric,
    geom: ImmersionGeometry | None = None,
    x: np.ndarray | None = None,
) -> np.ndarray:
    """Normal L2 gradients (grad C^1, grad C^2) at the grid nodes, shape (2, n).

    Differentiating the fixed-point equation along a normal variation of f_u gives

        grad C = -(1/|mu|) M^-1 D [ I H + (D_y log)(f) nu - log(f) H ]

    with I the mean log map, D the derivative of the plane projection at x + I and
    M = D (mean D_x log + E) - id.
    """
    metric = _require_flat(metric)
    geom = geom or geometry(u, metric)
    if x is None:
        x = barycenter(u, metric, geom)
    base = _lift(np.asarray(x, dtype=float))
    weights = geom.weights / geom.area

    logs = metric.log_map(base, geom.position)
    mean_log = weights @ logs
    derivative = project_plane(metric, base + mean_log).derivative
    mean_base = np.einsum("n,nab->ab", weights, metric.log_base_derivative(base, geom.position))
    M = derivative @ (mean_base + _PLANE) - np.eye(2)

    H = geom.mean
    pointwise = (
        mean_log[None, :] * H[:, None]
        + np.einsum("nab,nb->na", metric.log_derivative(base, geom.position), geom.normal)
        - logs * H[:, None]
    )
    return -np.linalg.solve(M, derivative @ pointwise.T) / geom.area
