"""Boundary operator B[u, g] of the orthogonal contact condition and the corrections that enforce it.

B has two components on the equator: g(nu, nu_plane), the contact angle, and
d H / d eta + H h_plane(nu, nu), the natural boundary condition of the Willmore functional.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from bubbleflow.constants import BOUNDARY_TOL, FD_EQUATOR_STEP, FIRST_DAMPING, MAX_NEWTON
from bubbleflow.exceptions import ResolutionError
from bubbleflow.flow.newton import Evaluation, newton_solve
from bubbleflow.geometry.immersion import geometry
from bubbleflow.geometry.metric import AmbientMetric
from bubbleflow.hemisphere.basis import BasisTable, SpectralField, equator_trace


def phi_derivative(values: np.ndarray) -> np.ndarray:
    """Spectral d/dphi of samples at uniform longitudes."""
    n = values.shape[-1]
    k = np.arange(n // 2 + 1)
    if n % 2 == 0:
        k[-1] = 0
    return np.fft.irfft(1j * k * np.fft.rfft(values), n=n)


@dataclass(frozen=True)
class BoundaryResidual:
    first: np.ndarray
    second: np.ndarray

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.first, self.second])

    @property
    def sup(self) -> float:
        return float(np.max(np.abs(self.vector)))


def boundary_residual(u: SpectralField, metric: AmbientMetric, step: float = FD_EQUATOR_STEP) -> BoundaryResidual:
    basis = u.basis
    equator = geometry(u, metric, basis.ring(0.0))
    below = geometry(u, metric, basis.ring(step))
    above = geometry(u, metric, basis.ring(-step))

    inverse = equator.ambient.inverse
    scale = np.sqrt(inverse[:, 2, 2])
    nu = equator.normal
    first = nu[:, 2] / scale

    H = equator.mean
    d_theta = (below.mean - above.mean) / (2.0 * step)
    d_phi = phi_derivative(H)
    eta = equator.conormal
    d_eta = eta[:, 0] * d_theta + eta[:, 1] * d_phi
    # second fundamental form of the plane z = 0 w.r.t. its g-unit normal
    plane_form = equator.ambient.christoffel[:, 2, :2, :2] / scale[:, None, None]
    second = d_eta + H * np.einsum("nab,na,nb->n", plane_form, nu[:, :2], nu[:, :2])
    return BoundaryResidual(first=first, second=second)


@lru_cache(maxsize=8)
def boundary_linearization(basis: BasisTable) -> np.ndarray:
    """D_1 B[0, delta] on trace-class coefficients: rows (d/d eta, -d/d eta (Delta + 2)), shape (2 n_phi, n_T)."""
    ring = basis.ring(0.0)
    idx = basis.trace_indices
    normal = -ring.matrices["d_theta"][:, idx]
    normal_laplacian = normal * basis.eigenvalues[idx][None, :]
    return np.vstack([normal, -(normal_laplacian + 2.0 * normal)])


@lru_cache(maxsize=8)
def completion_matrix(basis: BasisTable) -> np.ndarray:
    """Linear map from trace coefficients to the coefficients of the mean-zero field

        phi = t + z,  t = sum c_T Y_T,  z in the Neumann class,

    with Delta^2 phi - const orthogonal to the Neumann class. z does not change the equator traces.
    """
    grid = basis.grid
    values = basis.sampler.matrices["value"]
    eig2 = basis.eigenvalues**2
    neumann = basis.neumann_indices
    constant = basis.index(0, 0)
    out = np.zeros((basis.n_modes, basis.trace_indices.size))
    for col, j in enumerate(basis.trace_indices):
        out[j, col] = 1.0
        bilaplacian = eig2[j] * values[:, j]
        c = grid.integrate(bilaplacian) / (2.0 * np.pi)
        projected = basis.project_neumann(c - bilaplacian)
        z = np.zeros(basis.n_modes)
        nonzero = neumann[eig2[neumann] > 0]
        z[nonzero] = projected[nonzero] / eig2[nonzero]
        z[constant] = -grid.integrate(values[:, j]) / np.sqrt(2.0 * np.pi)
        out[:, col] += z
    return out


def completion(basis: BasisTable, trace_coeffs: np.ndarray) -> SpectralField:
    return basis.field(coeffs=completion_matrix(basis) @ trace_coeffs)


def split_state(u: SpectralField) -> tuple[SpectralField, np.ndarray]:
    """Write u = w + completion(c_T) with w in the Neumann class; returns (w, c_T)."""
    basis = u.basis
    trace = u.coeffs[basis.trace_indices].copy()
    return u.neumann_part() - completion(basis, trace).neumann_part(), trace


def compatibility_constant(alpha: np.ndarray, beta: np.ndarray) -> float:
    """The constant value of Delta^2 phi forced by the divergence theorem: the equator mean of beta + 2 alpha."""
    return float(np.mean(np.asarray(beta) + 2.0 * np.asarray(alpha)))


def biharmonic_neumann_solve(basis: BasisTable, alpha: np.ndarray, beta: np.ndarray) -> SpectralField:
    """Mean-zero phi with d phi/d eta = alpha, d Delta phi / d eta = -beta - 2 alpha and Delta^2 phi = const.

    Equator data are collocated at the grid longitudes and fitted in the least-squares sense by the trace
    modes; data with longitudinal frequency above `trace_order` are not representable.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    idx = basis.trace_indices
    ring = basis.ring(0.0)
    normal = -ring.matrices["d_theta"][:, idx]
    system = np.vstack([normal, normal * basis.eigenvalues[idx][None, :]])
    rhs = np.concatenate([alpha, -beta - 2.0 * alpha])
    coeffs, _, rank, _ = np.linalg.lstsq(system, rhs, rcond=None)
    if rank < idx.size:
        raise ResolutionError("equator collocation system is rank deficient", rank=int(rank), unknowns=int(idx.size))
    return completion(basis, coeffs)


@dataclass
class BoundaryCorrection:
    correction: SpectralField
    residual: BoundaryResidual
    iterations: int
    history: list[float] = field(default_factory=list)
    #: Jacobian of the last iterate, reusable as the seed of a nearby solve
    jacobian: np.ndarray | None = None


def boundary_correction(
    w: SpectralField,
    metric: AmbientMetric,
    *,
    tol: float = BOUNDARY_TOL,
    max_iter: int = MAX_NEWTON,
    first_damping: float = FIRST_DAMPING,
    initial: np.ndarray | None = None,
    jacobian: np.ndarray | None = None,
) -> BoundaryCorrection:
    """Find w~ = completion(c_T) with B[w + w~, g] = 0 by Newton on c_T.

    The linearization at the round hemisphere in the euclidean metric seeds the Jacobian. Residual
    components above `trace_order` cannot be removed; a solve that stalls on them raises
    `BoundarySolveError` with the residual history.
    """
    basis = w.basis

    def evaluate(coeffs: np.ndarray) -> Evaluation:
        correction = completion(basis, coeffs)
        residual = boundary_residual(w + correction, metric)
        return Evaluation(residual.vector, residual.sup, residual.sup <= tol, (correction, residual))

    start = np.zeros(basis.trace_indices.size) if initial is None else np.array(initial, dtype=float)
    result = newton_solve(
        evaluate,
        start,
        jacobian=boundary_linearization(basis) if jacobian is None else jacobian,
        max_iter=max_iter,
        first_damping=first_damping,
        what="boundary correction",
    )
    correction, residual = result.evaluation.payload
    return BoundaryCorrection(correction, residual, result.iterations, result.history, result.jacobian)


def equator_data(f: SpectralField) -> tuple[np.ndarray, np.ndarray]:
    """(d f / d eta, -d Delta f / d eta - 2 d f / d eta): the pair (alpha, beta) reproduced by
    `biharmonic_neumann_solve`."""
    alpha = equator_trace(f, "normal")
    return alpha, -equator_trace(f, "normal_laplacian") - 2.0 * alpha
