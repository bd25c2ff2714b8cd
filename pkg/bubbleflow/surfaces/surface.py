from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, ClassVar

import numpy as np

from bubbleflow.exceptions import ChartDomainError, ConvergenceError, ProjectionError
from bubbleflow.utils.log import get_logger

logger = get_logger("surface")

_NEWTON_MAX_ITER = 50
_NEWTON_TOL = 1e-14


@dataclass(frozen=True)
class Frame:
    """Orthonormal frame (b1, b2, N) at a surface point; N points into the domain."""

    b1: np.ndarray
    b2: np.ndarray
    normal: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        """Columns b1, b2, N: maps frame coordinates to world vectors."""
        return np.column_stack([self.b1, self.b2, self.normal])

    @property
    def tangent(self) -> np.ndarray:
        """Rows b1, b2, shape (2, 3)."""
        return np.stack([self.b1, self.b2])


@dataclass(frozen=True)
class HeightJet:
    """Chart height phi[p, x] and its derivatives at a batch of chart points.

    Shapes: value (...), grad (..., 2), hess (..., 2, 2), third (..., 2, 2, 2).
    """

    value: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    third: np.ndarray


@dataclass(frozen=True)
class CurvatureData:
    """Second fundamental form of S in the chart at p and its first chart derivatives."""

    second_form: np.ndarray
    second_form_derivative: np.ndarray  # [a, b, c] = d_a h_bc, fully symmetric
    mean: float = field(init=False)
    mean_gradient: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "mean", float(np.trace(self.second_form)))
        object.__setattr__(self, "mean_gradient", np.einsum("ibb->i", self.second_form_derivative))


@dataclass(frozen=True)
class ChartData:
    """Graph chart f[p, x] = p + x^i b_i + phi[p, x] N of the host surface over its tangent plane at p."""

    surface: HostSurface
    point: np.ndarray
    frame: Frame

    @property
    def radius(self) -> float:
        return self.surface.chart_radius

    def height(self, x: np.ndarray) -> HeightJet:
        return self.surface.chart_height(self, x)

    def position(self, x: np.ndarray) -> np.ndarray:
        """World position of f[p, x] for chart points x of shape (..., 2)."""
        x = np.asarray(x, dtype=float)
        phi = self.height(x).value
        return self.point + x @ self.frame.tangent + phi[..., None] * self.frame.normal

    def frame_coordinates(self, y: np.ndarray) -> np.ndarray:
        """Components of y - p in the frame (b1, b2, N)."""
        return (np.asarray(y, dtype=float) - self.point) @ self.frame.matrix

    def curvature(self) -> CurvatureData:
        return self.surface.curvature(self)

    def moved(self, x: np.ndarray) -> ChartData:
        """Chart centered at f[p, x] with the frame transported from p."""
        target = self.position(np.asarray(x, dtype=float))
        return self.surface.chart(target, self.surface.transport_frame(self.frame, target))


class HostSurface(ABC):
    """Boundary S of the domain, given implicitly as the zero set of G with G < 0 inside.

    Subclasses provide G and its first three derivatives; everything else (normals, charts,
    curvature, projection, frame transport) is derived here.
    """

    name: ClassVar[str]

    @abstractmethod
    def level(self, X: np.ndarray) -> np.ndarray:
        """G at world points of shape (..., 3)."""

    @abstractmethod
    def level_gradient(self, X: np.ndarray) -> np.ndarray:
        """Gradient of G, shape (..., 3)."""

    @abstractmethod
    def level_hessian(self, X: np.ndarray) -> np.ndarray:
        """Hessian of G, shape (..., 3, 3)."""

    @abstractmethod
    def level_third(self, X: np.ndarray) -> np.ndarray:
        """Third derivative tensor of G, shape (..., 3, 3, 3)."""

    @property
    @abstractmethod
    def reach(self) -> float:
        """Radius of a tubular neighbourhood on which nearest-point projection is defined."""

    @abstractmethod
    def default_anchor(self) -> np.ndarray:
        """Reference point on S used to interpret chart starting coordinates."""

    @abstractmethod
    def seed_points(self, n: int) -> np.ndarray:
        """Roughly uniform sample of points on (the relevant part of) S, shape (n, 3)."""

    @abstractmethod
    def params(self) -> dict[str, Any]:
        """Parameters identifying this surface (for reports)."""

    @property
    def chart_radius(self) -> float:
        """Radius of the chart disk: a quarter of the smallest curvature radius."""
        return 0.25 * self.reach

    def describe(self) -> dict[str, Any]:
        return {"kind": self.name, **self.params()}

    def __repr__(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"

    def normal(self, X: np.ndarray) -> np.ndarray:
        """Inner unit normal N^S = -grad G / |grad G|."""
        g = self.level_gradient(X)
        return -g / np.linalg.norm(g, axis=-1, keepdims=True)

    def mean_curvature(self, X: np.ndarray) -> np.ndarray:
        """Mean curvature from the level-set formula div(grad G / |grad G|); positive on convex domains."""
        g = self.level_gradient(X)
        hess = self.level_hessian(X)
        norm = np.linalg.norm(g, axis=-1)
        trace = np.einsum("...ii->...", hess)
        ghg = np.einsum("...i,...ij,...j->...", g, hess, g)
        return (norm**2 * trace - ghg) / norm**3

    def initial_frame(self, p: np.ndarray) -> Frame:
        n = self.normal(p)
        reference = np.eye(3)[np.argmin(np.abs(n))]
        b1 = reference - np.dot(reference, n) * n
        b1 /= np.linalg.norm(b1)
        return Frame(b1=b1, b2=np.cross(n, b1), normal=n)

    def transport_frame(self, frame: Frame, q: np.ndarray) -> Frame:
        """Project b1 onto the tangent plane at q and complete to a right-handed frame.

        The result is continuous in q, equals `frame` at q = p, and is parallel to first order
        (its tangential connection coefficients vanish at p).
        """
        n = self.normal(q)
        b1 = frame.b1 - np.dot(frame.b1, n) * n
        length = np.linalg.norm(b1)
        if length < 1e-8:
            return self.initial_frame(q)
        b1 = b1 / length
        return Frame(b1=b1, b2=np.cross(n, b1), normal=n)

    def chart(self, p: np.ndarray, frame: Frame | None = None) -> ChartData:
        p = np.asarray(p, dtype=float)
        return ChartData(surface=self, point=p, frame=frame if frame is not None else self.initial_frame(p))

    def chart_height(self, chart: ChartData, x: np.ndarray) -> HeightJet:
        """Solve G(p + x^i b_i + phi N) = 0 for phi by Newton; derivatives by implicit differentiation."""
        x = np.asarray(x, dtype=float)
        radius = np.linalg.norm(x, axis=-1)
        if np.any(radius >= self.chart_radius):
            raise ChartDomainError(
                f"chart point |x|={float(np.max(radius)):.4g} outside chart radius {self.chart_radius:.4g}",
                radius=float(np.max(radius)),
                chart_radius=self.chart_radius,
            )
        n = chart.frame.normal
        base = chart.point + x @ chart.frame.tangent
        phi = np.zeros(x.shape[:-1])
        for _ in range(_NEWTON_MAX_ITER):
            P = base + phi[..., None] * n
            update = np.asarray(self.level(P) / (self.level_gradient(P) @ n))
            phi = np.asarray(phi - update)
            if np.max(np.abs(update), initial=0.0) <= _NEWTON_TOL * (1.0 + np.max(np.abs(phi), initial=0.0)):
                break
        else:
            raise ConvergenceError("chart height Newton iteration did not converge", surface=self.name)

        P = base + phi[..., None] * n
        g = self.level_gradient(P)
        hess = self.level_hessian(P)
        third = self.level_third(P)
        gn = np.asarray(g @ n)
        tangent = chart.frame.tangent
        dphi = -(g @ tangent.T) / gn[..., None]
        T = tangent + dphi[..., :, None] * n  # (..., 2, 3): tangent vectors d_i f
        ddphi = -np.einsum("...ia,...ab,...jb->...ij", T, hess, T) / gn[..., None, None]
        nHT = np.einsum("a,...ab,...ib->...i", n, hess, T)
        dddphi = -(
            ddphi[..., :, None, :] * nHT[..., None, :, None]
            + ddphi[..., None, :, :] * nHT[..., :, None, None]
            + ddphi[..., :, :, None] * nHT[..., None, None, :]
            + np.einsum("...abc,...ia,...jb,...kc->...ijk", third, T, T, T)
        ) / gn[..., None, None, None]
        return HeightJet(value=phi, grad=dphi, hess=ddphi, third=dddphi)

    def curvature(self, chart: ChartData) -> CurvatureData:
        jet = self.chart_height(chart, np.zeros(2))
        return CurvatureData(second_form=jet.hess, second_form_derivative=jet.third)

    def nearest_point(self, y: np.ndarray) -> np.ndarray:
        """Closest point of S to y via Newton on the Lagrange system (p - y + t grad G(p), G(p)) = 0."""
        y = np.asarray(y, dtype=float)
        g = self.level_gradient(y)
        p = y - self.level(y) * g / np.dot(g, g)
        t = 0.0
        for _ in range(_NEWTON_MAX_ITER):
            g = self.level_gradient(p)
            residual = np.concatenate([p - y + t * g, [self.level(p)]])
            jacobian = np.zeros((4, 4))
            jacobian[:3, :3] = np.eye(3) + t * self.level_hessian(p)
            jacobian[:3, 3] = g
            jacobian[3, :3] = g
            try:
                delta = np.linalg.solve(jacobian, -residual)
            except np.linalg.LinAlgError as e:
                raise ProjectionError("nearest-point system is singular", point=y.tolist()) from e
            p = p + delta[:3]
            t = t + delta[3]
            if np.linalg.norm(delta[:3]) <= _NEWTON_TOL * (1.0 + np.linalg.norm(p)):
                break
        else:
            raise ProjectionError("nearest-point Newton iteration did not converge", point=y.tolist())
        self._check_reach(y, p)
        return p

    def _check_reach(self, y: np.ndarray, p: np.ndarray) -> None:
        distance = float(np.linalg.norm(y - p))
        if distance >= self.reach:
            raise ProjectionError(
                f"point at distance {distance:.4g} is outside the tubular neighbourhood (reach {self.reach:.4g})",
                point=y.tolist(),
                distance=distance,
            )


def fibonacci_directions(n: int) -> np.ndarray:
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    angle = np.pi * (1.0 + np.sqrt(5.0)) * k
    r = np.sqrt(1.0 - z**2)
    return np.stack([r * np.cos(angle), r * np.sin(angle), z], axis=-1)
