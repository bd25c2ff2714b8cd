"""Ambient metrics on the blown-up chart domain.

A point y = (x, z) of the chart domain is mapped to the host by F^lam[p, y] = f[p, lam x] + lam z N(p). The
pullback of the euclidean metric, rescaled by lam^-2, is flat: in the coordinates

    Psi(y) = (x, z + phi[p, lam x] / lam)

it is the identity. Geodesics are therefore straight lines after Psi, which gives exp and log in
closed form.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np

from bubbleflow.surfaces.surface import ChartData, CurvatureData, HeightJet

DirectionRole = Literal["lambda", "lambda2", "time", "generic"]


@dataclass(frozen=True)
class MetricSample:
    """Metric values and first derivatives at a batch of points.

    g has shape (..., 3, 3); dg[..., k, i, j] is the derivative of g_ij along the k-th coordinate.
    """

    g: np.ndarray
    dg: np.ndarray

    @cached_property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.g)

    @cached_property
    def christoffel(self) -> np.ndarray:
        """Gamma[..., a, b, c] = 1/2 g^{ad} (d_b g_dc + d_c g_db - d_d g_bc)."""
        dg = self.dg
        lowered = 0.5 * (np.swapaxes(dg, -3, -2) + np.moveaxis(dg, -3, -1) - dg)
        return np.einsum("...ad,...dbc->...abc", self.inverse, lowered)

    def inner(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.einsum("...i,...ij,...j->...", a, self.g, b)


@dataclass(frozen=True)
class SymmetricField:
    """A symmetric-matrix-valued field sample q and its derivatives dq[..., k, i, j]."""

    q: np.ndarray
    dq: np.ndarray


class AmbientMetric(ABC):
    """Riemannian metric on (a neighbourhood of) the chart domain Z_2."""

    #: Ricci-flat metrics let the Willmore gradient drop its Ricci term.
    flat: bool = True

    @abstractmethod
    def sample(self, y: np.ndarray) -> MetricSample:
        """Metric and derivatives at points y of shape (..., 3)."""

    def at(self, y: np.ndarray) -> np.ndarray:
        return self.sample(y).g

    def deviation(self, y: np.ndarray) -> float:
        """Largest entry of |g - delta| over the given points."""
        return float(np.max(np.abs(self.at(y) - np.eye(3)), initial=0.0))


class FlatMetric(AmbientMetric):
    """Metric that is the pullback of delta under an explicit coordinate map Psi."""

    @abstractmethod
    def to_flat(self, y: np.ndarray) -> np.ndarray:
        """Psi(y)."""

    @abstractmethod
    def from_flat(self, w: np.ndarray) -> np.ndarray:
        """Psi^-1(w)."""

    @abstractmethod
    def jacobian(self, y: np.ndarray) -> np.ndarray:
        """D Psi(y), shape (..., 3, 3)."""

    @abstractmethod
    def jacobian_inverse(self, y: np.ndarray) -> np.ndarray:
        """(D Psi(y))^-1."""

    @abstractmethod
    def jacobian_inverse_derivative(self, y: np.ndarray) -> np.ndarray:
        """Derivatives of (D Psi)^-1 along the plane coordinates, shape (..., 2, 3, 3) indexed [k, a, b]."""

    def exp_map(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.from_flat(self.to_flat(x) + np.einsum("...ij,...j->...i", self.jacobian(x), v))

    def log_map(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """(exp_x)^-1(y) for a base point x (3-vector) and points y of shape (..., 3)."""
        x = np.asarray(x, dtype=float)
        return (self.to_flat(y) - self.to_flat(x)) @ self.jacobian_inverse(x).T

    def log_derivative(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Derivative of y -> log_x(y), shape (..., 3, 3)."""
        return np.einsum("ij,...jk->...ik", self.jacobian_inverse(np.asarray(x, dtype=float)), self.jacobian(y))

    def log_base_derivative(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Derivative of the planar base point x -> log_x(y), shape (..., 3, 2)."""
        x = np.asarray(x, dtype=float)
        d = self.to_flat(y) - self.to_flat(x)
        jinv = self.jacobian_inverse(x)
        djinv = self.jacobian_inverse_derivative(x)  # [k, a, b]
        moving = np.einsum("kab,...b->...ak", djinv, d)
        fixed = -(jinv @ self.jacobian(x))[:, :2]
        return moving + fixed


class EuclideanMetric(FlatMetric):
    def __repr__(self) -> str:
        return "EuclideanMetric()"

    def sample(self, y: np.ndarray) -> MetricSample:
        shape = np.shape(y)[:-1]
        return MetricSample(
            g=np.broadcast_to(np.eye(3), shape + (3, 3)).copy(),
            dg=np.zeros(shape + (3, 3, 3)),
        )

    def to_flat(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y, dtype=float)

    def from_flat(self, w: np.ndarray) -> np.ndarray:
        return np.asarray(w, dtype=float)

    def jacobian(self, y: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.eye(3), np.shape(y)[:-1] + (3, 3)).copy()

    def jacobian_inverse(self, y: np.ndarray) -> np.ndarray:
        return self.jacobian(y)

    def jacobian_inverse_derivative(self, y: np.ndarray) -> np.ndarray:
        return np.zeros(np.shape(y)[:-1] + (2, 3, 3))


class PullbackMetric(FlatMetric):
    """The rescaled pullback lam^-2 (F^lam[p, .])^* delta in the chart at p.

    In chart coordinates g = J^T J with J = [[1, 0, 0], [0, 1, 0], [phi_1, phi_2, 1]] evaluated at lam x.
    Negative lam is allowed (the blow-up reflected through p); expansions in lam sample both signs.
    """

    def __init__(self, chart: ChartData, lam: float):
        self.chart = chart
        self.lam = float(lam)

    def __repr__(self) -> str:
        p = np.round(self.chart.point, 6).tolist()
        return f"PullbackMetric(surface={self.chart.surface!r}, p={p}, lam={self.lam})"

    def height(self, y: np.ndarray) -> HeightJet:
        y = np.asarray(y, dtype=float)
        if self.lam == 0.0:
            shape = y.shape[:-1]
            return HeightJet(
                value=np.zeros(shape),
                grad=np.zeros(shape + (2,)),
                hess=np.zeros(shape + (2, 2)),
                third=np.zeros(shape + (2, 2, 2)),
            )
        return self.chart.height(self.lam * y[..., :2])

    def sample(self, y: np.ndarray) -> MetricSample:
        jet = self.height(y)
        d1 = jet.grad
        shape = d1.shape[:-1]
        g = np.broadcast_to(np.eye(3), shape + (3, 3)).copy()
        g[..., :2, :2] += d1[..., :, None] * d1[..., None, :]
        g[..., :2, 2] += d1
        g[..., 2, :2] += d1
        d2 = self.lam * jet.hess  # d_k of phi_a(lam x), indexed [a, k]
        dg = np.zeros(shape + (3, 3, 3))
        block = np.einsum("...ak,...b->...kab", d2, d1)
        dg[..., :2, :2, :2] = block + np.swapaxes(block, -1, -2)
        dg[..., :2, :2, 2] = np.swapaxes(d2, -1, -2)
        dg[..., :2, 2, :2] = np.swapaxes(d2, -1, -2)
        return MetricSample(g=g, dg=dg)

    def christoffel_closed_form(self, y: np.ndarray) -> np.ndarray:
        """Only Gamma^3_ab = lam phi_ab(lam x) is non-zero."""
        jet = self.height(y)
        gamma = np.zeros(jet.value.shape + (3, 3, 3))
        gamma[..., 2, :2, :2] = self.lam * jet.hess
        return gamma

    def to_flat(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.lam == 0.0:
            return y.copy()
        w = y.copy()
        w[..., 2] += self.height(y).value / self.lam
        return w

    def from_flat(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if self.lam == 0.0:
            return w.copy()
        y = w.copy()
        y[..., 2] -= self.height(w).value / self.lam
        return y

    def jacobian(self, y: np.ndarray) -> np.ndarray:
        grad = self.height(y).grad
        jac = np.broadcast_to(np.eye(3), grad.shape[:-1] + (3, 3)).copy()
        jac[..., 2, :2] = grad
        return jac

    def jacobian_inverse(self, y: np.ndarray) -> np.ndarray:
        grad = self.height(y).grad
        jac = np.broadcast_to(np.eye(3), grad.shape[:-1] + (3, 3)).copy()
        jac[..., 2, :2] = -grad
        return jac

    def jacobian_inverse_derivative(self, y: np.ndarray) -> np.ndarray:
        hess = self.height(y).hess
        out = np.zeros(hess.shape[:-2] + (2, 3, 3))
        out[..., :, 2, :2] = -self.lam * np.swapaxes(hess, -1, -2)
        return out

    def world(self, y: np.ndarray) -> np.ndarray:
        """F^lam[p, y] in world coordinates."""
        flat = self.to_flat(y)
        return self.chart.point + self.lam * flat @ self.chart.frame.matrix.T

    def from_world(self, X: np.ndarray) -> np.ndarray:
        """Inverse of `world` (requires lam > 0)."""
        if self.lam == 0.0:
            raise ValueError("chart at lambda = 0 collapses to a point")
        return self.from_flat(self.chart.frame_coordinates(X) / self.lam)

    def plane_point(self, x: np.ndarray) -> np.ndarray:
        """World point F^lam[p, (x, 0)] on the host for planar chart coordinates x."""
        x = np.asarray(x, dtype=float)
        return self.world(np.concatenate([x, np.zeros(x.shape[:-1] + (1,))], axis=-1))

    def at_lambda(self, lam: float) -> PullbackMetric:
        return PullbackMetric(self.chart, lam)


class MetricDirection(ABC):
    """A symmetric-matrix-valued field q on the chart domain, used as a metric variation."""

    role: DirectionRole = "generic"

    @abstractmethod
    def sample(self, y: np.ndarray) -> SymmetricField: ...


class CurvatureDirection(MetricDirection):
    """Taylor coefficients of lam -> g^{p, lam} at lam = 0, built from the host's curvature at p.

    order 1 gives q0 with (i, 3) entries h_ia x^a; order 2 gives the second derivative with block
    2 h_ia h_jb x^a x^b and (i, 3) entries d_i h_ab x^a x^b.
    """

    def __init__(self, curvature: CurvatureData, order: Literal[1, 2] = 1):
        if order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {order}")
        self.curvature = curvature
        self.order = order
        self.role = "lambda" if order == 1 else "lambda2"

    def sample(self, y: np.ndarray) -> SymmetricField:
        x = np.asarray(y, dtype=float)[..., :2]
        shape = x.shape[:-1]
        h = self.curvature.second_form
        dh = self.curvature.second_form_derivative
        q = np.zeros(shape + (3, 3))
        dq = np.zeros(shape + (3, 3, 3))
        if self.order == 1:
            hx = x @ h.T
            q[..., :2, 2] = hx
            q[..., 2, :2] = hx
            dq[..., :2, :2, 2] = h.T
            dq[..., :2, 2, :2] = h.T
            return SymmetricField(q=q, dq=dq)
        hx = x @ h.T
        q[..., :2, :2] = 2.0 * hx[..., :, None] * hx[..., None, :]
        column = np.einsum("abc,...b,...c->...a", dh, x, x)
        q[..., :2, 2] = column
        q[..., 2, :2] = column
        block = 2.0 * np.einsum("ak,...b->...kab", h, hx)
        dq[..., :2, :2, :2] = block + np.swapaxes(block, -1, -2)
        dcolumn = 2.0 * np.einsum("akc,...c->...ka", dh, x)
        dq[..., :2, :2, 2] = dcolumn
        dq[..., :2, 2, :2] = dcolumn
        return SymmetricField(q=q, dq=dq)


class DifferenceDirection(MetricDirection):
    """Central difference (g_plus - g_minus) / (2 step) of two metrics."""

    def __init__(self, plus: AmbientMetric, minus: AmbientMetric, step: float, role: DirectionRole = "generic"):
        self.plus = plus
        self.minus = minus
        self.step = float(step)
        self.role = role

    def sample(self, y: np.ndarray) -> SymmetricField:
        a, b = self.plus.sample(y), self.minus.sample(y)
        scale = 0.5 / self.step
        return SymmetricField(q=scale * (a.g - b.g), dq=scale * (a.dg - b.dg))


class PerturbedMetric(AmbientMetric):
    """base + mu * q. Not Ricci-flat in general; the Willmore gradient still drops the Ricci term."""

    flat = False

    def __init__(self, base: AmbientMetric, direction: MetricDirection, mu: float):
        self.base = base
        self.direction = direction
        self.mu = float(mu)

    def __repr__(self) -> str:
        return f"PerturbedMetric({self.base!r}, role={self.direction.role}, mu={self.mu})"

    def sample(self, y: np.ndarray) -> MetricSample:
        base = self.base.sample(y)
        q = self.direction.sample(y)
        return MetricSample(g=base.g + self.mu * q.q, dg=base.dg + self.mu * q.dq)


def dmetric_dlambda0(chart: ChartData) -> CurvatureDirection:
    return CurvatureDirection(chart.curvature(), order=1)


def d2metric_dlambda0(chart: ChartData) -> CurvatureDirection:
    return CurvatureDirection(chart.curvature(), order=2)


def path_charts(chart: ChartData, velocity: np.ndarray, step: float) -> tuple[ChartData, ChartData]:
    """Charts at pi_S(p +- step * v) with frames transported from p; `velocity` in frame coordinates (2,)."""
    surface = chart.surface
    world = np.asarray(velocity, dtype=float) @ chart.frame.tangent
    charts = []
    for sign in (1.0, -1.0):
        q = surface.nearest_point(chart.point + sign * step * world)
        charts.append(surface.chart(q, surface.transport_frame(chart.frame, q)))
    return charts[0], charts[1]


def metric_time_derivative(chart: ChartData, lam: float, velocity: np.ndarray, step: float) -> DifferenceDirection:
    """d/dt of g^{xi(t), lam} along a barycenter path with chart velocity `velocity`, by central differences."""
    plus, minus = path_charts(chart, velocity, step)
    return DifferenceDirection(PullbackMetric(plus, lam), PullbackMetric(minus, lam), step, role="time")
