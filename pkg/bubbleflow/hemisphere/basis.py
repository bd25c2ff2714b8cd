"""Real spherical harmonics restricted to the upper hemisphere.

The field space is the direct sum of two classes of restricted harmonics sqrt(2)*Y_lm:

* Neumann class (X): l - |m| even, l <= l_max. Even in cos(theta), so both the normal derivative and
  the normal derivative of the Laplacian vanish on the equator.
* Trace class (T): l - |m| odd with l in {|m| + 1, |m| + 3} and |m| <= trace_order. These carry the
  boundary data (the lift of prescribed equatorial traces).

Each class is orthonormal on the hemisphere; the two classes are not orthogonal to each other, so
analysis is a weighted least-squares fit. The Laplacian stays diagonal with eigenvalue -l(l+1).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Literal

import numpy as np
from scipy.special import gammaln, lpmv

from bubbleflow.constants import MIN_L_MAX, TRACE_ORDER_GAP
from bubbleflow.exceptions import ResolutionError
from bubbleflow.hemisphere.grid import HemisphereGrid

TraceOrder = Literal["value", "normal", "normal_laplacian"]

_HEMISPHERE_NORM = np.sqrt(2.0)


@dataclass(frozen=True, order=True)
class Mode:
    l: int
    m: int

    @property
    def neumann(self) -> bool:
        return (self.l - abs(self.m)) % 2 == 0

    @property
    def eigenvalue(self) -> float:
        return -float(self.l * (self.l + 1))

    @property
    def odd(self) -> bool:
        """Odd under the reflection (x, y, z) -> (-x, -y, z)."""
        return abs(self.m) % 2 == 1


def _legendre_jet(l: int, m: int, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Normalized associated Legendre function of cos(theta) (no Condon-Shortley phase) and its first
    two theta derivatives. `m` must be non-negative."""
    mu = np.cos(theta)
    s = np.sin(theta)
    norm = np.sqrt((2 * l + 1) / (4 * np.pi) * np.exp(gammaln(l - m + 1) - gammaln(l + m + 1)))
    norm *= (-1.0) ** m  # scipy's lpmv includes the Condon-Shortley phase
    p = lpmv(m, l, mu)
    if m == 0:
        dp = lpmv(1, l, mu)
    else:
        dp = 0.5 * (lpmv(m + 1, l, mu) - (l + m) * (l - m + 1) * lpmv(m - 1, l, mu))
    # Legendre equation: p'' + cot p' + (l(l+1) - m^2/sin^2) p = 0
    d2p = -(mu / s) * dp + (m * m / (s * s) - l * (l + 1)) * p
    return norm * p, norm * dp, norm * d2p


def _fourier_jet(m: int, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    if m == 0:
        one = np.ones_like(phi)
        return one, np.zeros_like(phi), np.zeros_like(phi)
    k = abs(m)
    c, s = np.sqrt(2.0) * np.cos(k * phi), np.sqrt(2.0) * np.sin(k * phi)
    if m > 0:
        return c, -k * s, -k * k * c
    return s, k * c, -k * k * s


@dataclass(frozen=True)
class Jet:
    """A scalar field and its coordinate derivatives up to second order at sample points."""

    value: np.ndarray
    d_theta: np.ndarray
    d_phi: np.ndarray
    d_theta2: np.ndarray
    d_theta_phi: np.ndarray
    d_phi2: np.ndarray

    @property
    def gradient(self) -> np.ndarray:
        return np.stack([self.d_theta, self.d_phi], axis=-1)

    @property
    def hessian(self) -> np.ndarray:
        """Coordinate second derivatives, shape (..., 2, 2)."""
        row1 = np.stack([self.d_theta2, self.d_theta_phi], axis=-1)
        row2 = np.stack([self.d_theta_phi, self.d_phi2], axis=-1)
        return np.stack([row1, row2], axis=-2)


class Sampler:
    """Synthesis matrices of every basis mode (and its derivatives) at a fixed set of points."""

    def __init__(self, modes: tuple[Mode, ...], theta: np.ndarray, phi: np.ndarray):
        self.theta = np.asarray(theta, dtype=float)
        self.phi = np.asarray(phi, dtype=float)
        shape = (self.theta.size, len(modes))
        self.matrices = {name: np.empty(shape) for name in Jet.__dataclass_fields__}
        legendre_cache: dict[tuple[int, int], tuple[np.ndarray, ...]] = {}
        for j, mode in enumerate(modes):
            key = (mode.l, abs(mode.m))
            if key not in legendre_cache:
                legendre_cache[key] = tuple(_HEMISPHERE_NORM * a for a in _legendre_jet(*key, self.theta))
            p, dp, d2p = legendre_cache[key]
            t, dt, d2t = _fourier_jet(mode.m, self.phi)
            self.matrices["value"][:, j] = p * t
            self.matrices["d_theta"][:, j] = dp * t
            self.matrices["d_phi"][:, j] = p * dt
            self.matrices["d_theta2"][:, j] = d2p * t
            self.matrices["d_theta_phi"][:, j] = dp * dt
            self.matrices["d_phi2"][:, j] = p * d2t

    def values(self, coeffs: np.ndarray) -> np.ndarray:
        return self.matrices["value"] @ coeffs

    def jet(self, coeffs: np.ndarray) -> Jet:
        return Jet(**{name: matrix @ coeffs for name, matrix in self.matrices.items()})


class BasisTable:
    """Mode table, synthesis/analysis operators and cached samplers for one resolution."""

    def __init__(self, grid: HemisphereGrid, l_max: int, trace_order: int):
        self.grid = grid
        self.l_max = l_max
        self.trace_order = trace_order
        neumann = [Mode(l, m) for l in range(l_max + 1) for m in range(-l, l + 1) if (l - abs(m)) % 2 == 0]
        trace = [
            Mode(abs(m) + k, m) for m in range(-trace_order, trace_order + 1) for k in (1, 3)
        ]
        self.modes: tuple[Mode, ...] = tuple(neumann) + tuple(sorted(trace))
        self.n_neumann = len(neumann)
        self._index = {(mode.l, mode.m): j for j, mode in enumerate(self.modes)}
        self._rings: dict[float, Sampler] = {}

    def __repr__(self) -> str:
        return (
            f"BasisTable(l_max={self.l_max}, trace_order={self.trace_order}, modes={self.n_modes}, "
            f"grid={self.grid.n_theta}x{self.grid.n_phi})"
        )

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.array([mode.l for mode in self.modes])

    @cached_property
    def orders(self) -> np.ndarray:
        return np.array([mode.m for mode in self.modes])

    @cached_property
    def neumann_mask(self) -> np.ndarray:
        return np.array([mode.neumann for mode in self.modes])

    @cached_property
    def odd_mask(self) -> np.ndarray:
        return np.array([mode.odd for mode in self.modes])

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the round Laplacian, -l(l+1) per mode."""
        return -(self.degrees * (self.degrees + 1)).astype(float)

    @cached_property
    def decay_rates(self) -> np.ndarray:
        """Symbol of 1/2 * Delta(Delta + 2): l(l+1)(l(l+1) - 2)/2 per mode."""
        ll = -self.eigenvalues
        return 0.5 * ll * (ll - 2.0)

    @cached_property
    def trace_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.neumann_mask)

    @cached_property
    def neumann_indices(self) -> np.ndarray:
        return np.flatnonzero(self.neumann_mask)

    @cached_property
    def kernel_indices(self) -> np.ndarray:
        """Neumann modes spanning {1, omega^1, omega^2}, ordered (constant, omega^1, omega^2)."""
        return np.array([self.index(0, 0), self.index(1, 1), self.index(1, -1)])

    def index(self, l: int, m: int) -> int:
        try:
            return self._index[(l, m)]
        except KeyError:
            msg = f"mode (l={l}, m={m}) is not part of {self!r}"
            raise KeyError(msg) from None

    @cached_property
    def sampler(self) -> Sampler:
        """Sampler on the quadrature grid."""
        return Sampler(self.modes, self.grid.theta_nodes, self.grid.phi_nodes)

    def ring(self, offset: float = 0.0) -> Sampler:
        """Sampler on the circle theta = pi/2 + offset at the grid longitudes (offset 0 is the equator)."""
        key = float(offset)
        if key not in self._rings:
            phi = self.grid.phi
            self._rings[key] = Sampler(self.modes, np.full_like(phi, np.pi / 2 + key), phi)
        return self._rings[key]

    def sample(self, theta: np.ndarray, phi: np.ndarray) -> Sampler:
        return Sampler(self.modes, theta, phi)

    @cached_property
    def _analysis(self) -> np.ndarray:
        sqrt_w = np.sqrt(self.grid.weights)
        return np.linalg.pinv(sqrt_w[:, None] * self.sampler.matrices["value"]) * sqrt_w[None, :]

    def analyze(self, values: np.ndarray) -> np.ndarray:
        """Least-squares coefficients of grid values (trailing axis over nodes)."""
        return np.asarray(values) @ self._analysis.T

    def synthesize(self, coeffs: np.ndarray) -> np.ndarray:
        return np.asarray(coeffs) @ self.sampler.matrices["value"].T

    def project_neumann(self, values: np.ndarray) -> np.ndarray:
        """Orthogonal L2 projection onto the Neumann class (coefficients, zero on trace modes)."""
        out = np.zeros(self.n_modes)
        out[self.neumann_mask] = (self.sampler.matrices["value"][:, self.neumann_mask].T * self.grid.weights) @ values
        return out

    def class_gram(self, neumann: bool) -> np.ndarray:
        columns = self.sampler.matrices["value"][:, self.neumann_mask == neumann]
        return columns.T @ (self.grid.weights[:, None] * columns)

    def field(self, coeffs: np.ndarray | None = None, values: np.ndarray | None = None) -> SpectralField:
        return SpectralField(self, coeffs=coeffs, values=values)

    def zeros(self) -> SpectralField:
        return SpectralField(self, coeffs=np.zeros(self.n_modes))

    def mode(self, l: int, m: int, amplitude: float = 1.0) -> SpectralField:
        coeffs = np.zeros(self.n_modes)
        coeffs[self.index(l, m)] = amplitude
        return SpectralField(self, coeffs=coeffs)


def build_basis(l_max: int, grid: HemisphereGrid, trace_order: int | None = None) -> BasisTable:
    """Build and validate the basis table for `grid`; `trace_order` defaults to the largest one, l_max - 3."""
    if trace_order is None:
        trace_order = l_max - TRACE_ORDER_GAP
    if l_max < MIN_L_MAX:
        raise ResolutionError(f"l_max must be at least {MIN_L_MAX}, got {l_max}", l_max=l_max)
    if grid.n_theta < 2 * l_max + 2 or grid.n_phi < 2 * l_max + 2:
        raise ResolutionError(
            f"grid {grid.n_theta}x{grid.n_phi} does not resolve degree-{2 * l_max} products "
            f"(needs n_theta, n_phi >= {2 * l_max + 2})",
            l_max=l_max,
            n_theta=grid.n_theta,
            n_phi=grid.n_phi,
        )
    if trace_order < 1 or trace_order + TRACE_ORDER_GAP > l_max:
        raise ResolutionError(
            f"trace_order must lie in [1, l_max - 3] = [1, {l_max - TRACE_ORDER_GAP}], got {trace_order}",
            trace_order=trace_order,
        )
    basis = BasisTable(grid, l_max, trace_order)
    for neumann in (True, False):
        deviation = np.abs(basis.class_gram(neumann) - np.eye(int(np.sum(basis.neumann_mask == neumann)))).max()
        if deviation > 1e-9:
            raise ResolutionError(f"basis not orthonormal on the grid (deviation {deviation:.2e})")
    return basis


class SpectralField:
    """Scalar field on the hemisphere held as coefficients and grid values.

    One of the two views may be stale; it is recomputed on first access. Fields are treated as
    immutable values: arithmetic returns new fields.
    """

    __slots__ = ("_coeffs", "_values", "basis")

    def __init__(self, basis: BasisTable, *, coeffs: np.ndarray | None = None, values: np.ndarray | None = None):
        if coeffs is None and values is None:
            msg = "SpectralField needs coefficients or grid values"
            raise ValueError(msg)
        self.basis = basis
        self._coeffs = None if coeffs is None else np.array(coeffs, dtype=float)
        self._values = None if values is None else np.array(values, dtype=float)
        if self._coeffs is not None and self._coeffs.shape != (basis.n_modes,):
            msg = f"expected {basis.n_modes} coefficients, got shape {self._coeffs.shape}"
            raise ValueError(msg)
        if self._values is not None and self._values.shape != (basis.grid.size,):
            msg = f"expected {basis.grid.size} grid values, got shape {self._values.shape}"
            raise ValueError(msg)

    @property
    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = self.basis.analyze(self._values)
        return self._coeffs

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = self.basis.synthesize(self._coeffs)
        return self._values

    def jet(self, sampler: Sampler | None = None) -> Jet:
        return (sampler or self.basis.sampler).jet(self.coeffs)

    def neumann_part(self) -> SpectralField:
        return self.basis.field(coeffs=np.where(self.basis.neumann_mask, self.coeffs, 0.0))

    def trace_part(self) -> SpectralField:
        return self.basis.field(coeffs=np.where(self.basis.neumann_mask, 0.0, self.coeffs))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def l2_norm(self) -> float:
        return float(np.sqrt(self.basis.grid.integrate(self.values**2)))

    def __add__(self, other: SpectralField) -> SpectralField:
        return self.basis.field(coeffs=self.coeffs + other.coeffs)

    def __sub__(self, other: SpectralField) -> SpectralField:
        return self.basis.field(coeffs=self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> SpectralField:
        return self.basis.field(coeffs=self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> SpectralField:
        return self * -1.0

    def __repr__(self) -> str:
        return f"SpectralField(modes={self.basis.n_modes}, sup={self.sup_norm():.3e})"


def laplacian(f: SpectralField) -> SpectralField:
    return f.basis.field(coeffs=f.coeffs * f.basis.eigenvalues)


def parity_split(f: SpectralField) -> tuple[SpectralField, SpectralField]:
    """Split into parts even and odd under (x, y, z) -> (-x, -y, z); odd modes are those with odd m."""
    odd = f.basis.odd_mask
    return (
        f.basis.field(coeffs=np.where(odd, 0.0, f.coeffs)),
        f.basis.field(coeffs=np.where(odd, f.coeffs, 0.0)),
    )


def equator_trace(f: SpectralField, order: TraceOrder = "value") -> np.ndarray:
    """Trace on the equator at the grid longitudes. The inner conormal derivative is -d/dtheta."""
    ring = f.basis.ring()
    if order == "value":
        return ring.values(f.coeffs)
    if order == "normal":
        return -ring.matrices["d_theta"] @ f.coeffs
    if order == "normal_laplacian":
        return -ring.matrices["d_theta"] @ (f.coeffs * f.basis.eigenvalues)
    msg = f"unknown trace order {order!r}"
    raise ValueError(msg)
