"""Quantitative checks of the simulator: exact cases, independent oracles and small-lambda scaling laws."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from bubbleflow.analysis.report import Check, VerificationReport
from bubbleflow.config import SolverConfig
from bubbleflow.exceptions import AnalysisError
from bubbleflow.flow.boundary import (
    biharmonic_neumann_solve,
    boundary_correction,
    boundary_linearization,
    boundary_residual,
    equator_data,
)
from bubbleflow.flow.constraints import constraint_basis, constraint_values, project_H_perp
from bubbleflow.flow.state import FlowState, Trajectory
from bubbleflow.flow.stepper import admissible_initialize, enforce_admissibility, rhs, stationary_solve, velocity_I
from bubbleflow.geometry.barycenter import (
    barycenter,
    barycenter_extrinsic,
    barycenter_gradient,
    barycenter_intrinsic,
    extrinsic_chart_coordinates,
)
from bubbleflow.geometry.immersion import area_gradient, geometry, willmore
from bubbleflow.geometry.metric import (
    AmbientMetric,
    EuclideanMetric,
    MetricDirection,
    PerturbedMetric,
    PullbackMetric,
    d2metric_dlambda0,
    dmetric_dlambda0,
)
from bubbleflow.hemisphere.basis import BasisTable, SpectralField, build_basis, laplacian
from bubbleflow.hemisphere.grid import HemisphereGrid
from bubbleflow.surfaces import PlaneSurface
from bubbleflow.surfaces.surface import HostSurface
from bubbleflow.utils.log import get_logger

logger = get_logger("analysis")

TWO_PI = 2.0 * np.pi
_NOISE = 1e-13


# --------------------------------------------------------------------------------------------------
# Helpers
# --------------------------------------------------------------------------------------------------


def richardson(values: Sequence[float], ratio: float, order: float) -> float:
    """Extrapolate the last two entries of a sequence with error ~ h^order and step ratio h_k / h_{k+1}."""
    coarse, fine = values[-2], values[-1]
    return fine + (fine - coarse) / (ratio**order - 1.0)


def error_order(values: Sequence[float], target: float, ratio: float, floor: float = 0.01) -> float:
    """Convergence order from the errors of the last two entries against a known limit.

    nan when either error is below `floor` * |target| (plus 1e-6): the sequence has already converged
    and the ratio of its errors is noise.
    """
    errors = np.abs(np.asarray(values[-2:], dtype=float) - target)
    if np.min(errors) <= floor * abs(target) + 1e-6:
        return float("nan")
    return float(np.log(errors[0] / errors[1]) / np.log(ratio))


def geometric_ratio(lambdas: Sequence[float]) -> float:
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size < 3:
        raise ValueError(f"need at least three lambda values, got {lambdas.size}")
    ratios = lambdas[:-1] / lambdas[1:]
    if np.any(ratios <= 1.0) or np.ptp(ratios) > 1e-9 * ratios[0]:
        raise ValueError(f"lambda values must decrease in geometric progression, got {lambdas.tolist()}")
    return float(ratios[0])


def resolution_for(l_max: int) -> BasisTable:
    """Basis with the default grid proportions (l_max = 16 gives the 40 x 80 grid)."""
    return build_basis(l_max, HemisphereGrid(2 * l_max + 8, 4 * l_max + 16))


def random_seed_field(basis: BasisTable, rng: np.random.Generator, amplitude: float = 0.02) -> SpectralField:
    """Random Neumann-class field on degrees 2..6 with coefficients decaying like l^-2."""
    coeffs = np.zeros(basis.n_modes)
    active = basis.neumann_mask & (basis.degrees >= 2) & (basis.degrees <= 6)
    coeffs[active] = amplitude * rng.standard_normal(int(active.sum())) / basis.degrees[active] ** 2
    return basis.field(coeffs=coeffs)


def generic_point(surface: HostSurface) -> np.ndarray:
    """A host point away from symmetry axes and anchors."""
    return surface.seed_points(9)[2]


def _map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(fn, items))


def _relative_sup(value: np.ndarray, target: np.ndarray) -> float:
    return float(np.max(np.abs(value - target)) / max(np.max(np.abs(target)), _NOISE))


def _directional(fn: Callable[[SpectralField], float | np.ndarray], u: SpectralField, phi: SpectralField, eps: float):
    return (np.asarray(fn(u + phi * eps)) - np.asarray(fn(u - phi * eps))) / (2.0 * eps)


# --------------------------------------------------------------------------------------------------
# Round hemisphere, gradients, linearization
# --------------------------------------------------------------------------------------------------


def round_state_checks(basis: BasisTable) -> VerificationReport:
    """u = 0 in the euclidean metric: W = 0, H = 2, A = 2 pi, energy 2 pi, B = 0 and C = 0."""
    report = VerificationReport.for_basis(basis)
    metric = EuclideanMetric()
    u = basis.zeros()
    geom = geometry(u, metric)
    data = willmore(u, metric, geom)
    report.add(Check.at_most("round.willmore_gradient", np.max(np.abs(data.gradient)), 1e-8, "exact"))
    report.add(Check.at_most("round.mean_curvature", np.max(np.abs(geom.mean - 2.0)), 1e-10, "exact"))
    report.add(Check("round.area", geom.area, TWO_PI, 1e-10, "exact"))
    report.add(Check("round.energy", data.energy, TWO_PI, 1e-10, "exact"))
    report.add(Check.at_most("round.boundary", boundary_residual(u, metric).sup, 1e-10, "exact"))
    x = barycenter_intrinsic(u, metric, geom).x
    report.add(Check.at_most("round.barycenter", np.linalg.norm(x), 1e-12, "exact"))
    return report


def gradient_anchor_checks(basis: BasisTable) -> VerificationReport:
    """grad A = -2 and grad C^i = -(3 / 2 pi) omega^i at the round hemisphere, plus finite-difference
    consistency of the area, barycenter and Willmore gradients at a deformed state."""
    report = VerificationReport.for_basis(basis)
    metric = EuclideanMetric()
    u = basis.zeros()
    geom = geometry(u, metric)
    report.add(Check.at_most("anchors.area_gradient", np.max(np.abs(area_gradient(geom) + 2.0)), 1e-6, "exact"))
    target = -1.5 / np.pi * geom.omega[:, :2].T
    grad_C = barycenter_gradient(u, metric, geom, np.zeros(2))
    report.add(Check.at_most("anchors.barycenter_gradient", np.max(np.abs(grad_C - target)), 1e-6, "exact"))

    deformed = basis.mode(2, 0, 0.02) + basis.mode(2, 2, 0.01)
    fd = report.table("anchors_fd", ["quantity", "finite_difference", "gradient", "relative_error"])

    def predicted(gradient: np.ndarray, phi: SpectralField, g) -> np.ndarray:
        return np.atleast_2d(gradient) @ (g.weights * phi.values * g.radial_factor)

    eps = 1e-4
    g0 = geometry(deformed, metric)
    cases = [
        ("area", 0, basis.mode(4, 0), lambda f: geometry(f, metric).area, area_gradient(g0), 1e-5),
        (
            "energy",
            1,
            basis.mode(4, 0),
            lambda f: willmore(f, metric).energy,
            willmore(deformed, metric, g0).gradient,
            1e-4,
        ),
        (
            "barycenter",
            2,
            basis.mode(1, 1) + basis.mode(3, 1, 0.5),
            lambda f: barycenter_intrinsic(f, metric).x,
            barycenter_gradient(deformed, metric, g0),
            1e-4,
        ),
    ]
    for name, code, phi, functional, gradient, tol in cases:
        numeric = np.atleast_1d(_directional(functional, deformed, phi, eps))
        analytic = predicted(gradient, phi, g0)
        error = float(np.max(np.abs(numeric - analytic)) / max(np.max(np.abs(analytic)), _NOISE))
        for a, b in zip(numeric, analytic, strict=True):
            fd.add(code, a, b, error)
        report.add(Check.at_most(f"anchors.{name}_fd", error, tol, "derived"))
    return report


def linearization_checks(basis: BasisTable, lam: float = 0.05) -> VerificationReport:
    """(H[eps phi] - 2) / eps -> -(Delta + 2) phi and W[eps phi] / eps -> -kappa phi, Richardson in eps;
    plus the decay rate of the full right-hand side on a flat host."""
    report = VerificationReport.for_basis(basis)
    metric = EuclideanMetric()
    table = report.table("linearization", ["l", "m", "quantity", "relative_error"])
    epsilons = (1e-3, 5e-4)
    for l, m in ((2, 0), (2, 2), (4, 0)):
        phi = basis.mode(l, m)
        quotients = [(geometry(phi * eps, metric).mean - 2.0) / eps for eps in epsilons]
        extrapolated = richardson(quotients, 2.0, 1)
        target = -(laplacian(phi).values + 2.0 * phi.values)
        error = _relative_sup(extrapolated, target)
        table.add(l, m, 0, error)
        report.add(Check.at_most(f"linearization.mean_curvature_Y{l}{m}", error, 1e-3, "derived"))

    phi = basis.mode(4, 0)
    kappa = basis.decay_rates[basis.index(4, 0)]
    quotients = [willmore(phi * eps, metric).gradient / eps for eps in epsilons]
    error = _relative_sup(richardson(quotients, 2.0, 1), -kappa * phi.values)
    table.add(4, 0, 1, error)
    report.add(Check.at_most("linearization.willmore_Y40", error, 1e-3, "derived"))

    eps = 1e-4
    plane = PlaneSurface()
    state = FlowState(t=0.0, u=phi * eps, chart=plane.chart(np.zeros(3)), lam=lam)
    rate = -basis.analyze(rhs(state).u_dot)[basis.index(4, 0)] / eps
    report.values["linearization.decay_rate_Y40"] = float(rate)
    report.add(Check("linearization.decay_rate_Y40", rate, kappa, 0.01, "derived", kind="rel"))
    return report


# --------------------------------------------------------------------------------------------------
# Boundary operator
# --------------------------------------------------------------------------------------------------


def boundary_linearization_checks(basis: BasisTable, n_modes: int = 10, eps: float = 1e-4) -> VerificationReport:
    """D_1 B at the round hemisphere by central differences on the first trace modes against the assembled
    linearization (d/d eta, -d/d eta (Delta + 2)); and the biharmonic lift of the data (cos phi, 0)."""
    report = VerificationReport.for_basis(basis)
    metric = EuclideanMetric()
    linear = boundary_linearization(basis)
    table = report.table("boundary_linearization", ["l", "m", "relative_error"])
    errors = []
    for col, j in enumerate(basis.trace_indices[:n_modes]):
        mode = basis.modes[j]
        phi = basis.mode(mode.l, mode.m)
        numeric = _directional(lambda f: boundary_residual(f, metric).vector, basis.zeros(), phi, eps)
        errors.append(_relative_sup(numeric, linear[:, col]))
        table.add(mode.l, mode.m, errors[-1])
    report.add(Check.at_most("boundary.linearization", max(errors), 1e-3, "derived"))

    alpha = np.cos(basis.grid.phi)
    beta = np.zeros_like(alpha)
    lifted = biharmonic_neumann_solve(basis, alpha, beta)
    got_alpha, got_beta = equator_data(lifted)
    error = float(max(np.max(np.abs(got_alpha - alpha)), np.max(np.abs(got_beta - beta))))
    report.add(Check.at_most("boundary.lift", error, 1e-7, "exact"))
    report.add(Check.at_most("boundary.lift_mean", abs(basis.grid.integrate(lifted.values)), 1e-12, "exact"))
    return report


def _metric_rate(u: SpectralField, direction: MetricDirection, mu: float) -> np.ndarray:
    """d/d mu of B[u, delta + mu q] at mu = 0 by central differences."""
    base = EuclideanMetric()
    plus = boundary_residual(u, PerturbedMetric(base, direction, mu)).vector
    minus = boundary_residual(u, PerturbedMetric(base, direction, -mu)).vector
    return (plus - minus) / (2.0 * mu)


def boundary_variation_checks(
    surface: HostSurface,
    p: np.ndarray,
    basis: BasisTable,
    options: SolverConfig | None = None,
    *,
    mu: float = 1e-4,
    correction_mu: float = 1e-3,
) -> VerificationReport:
    """Metric variations of B at the round hemisphere in the chart at p.

    D_2 B along q0 = d g / d lam matches the lam-derivative of B along the pullback family, and its
    contact-angle component is h(omega, omega). Along the second lam-derivative of the metric the
    contact-angle component is d_a h_bc omega^a omega^b omega^c. The boundary correction for delta + mu q0
    is even and linear in mu.
    """
    options = options or SolverConfig()
    report = VerificationReport.for_basis(basis)
    chart = surface.chart(np.asarray(p, dtype=float))
    curvature = chart.curvature()
    u = basis.zeros()
    n = basis.grid.n_phi
    omega = np.stack([np.cos(basis.grid.phi), np.sin(basis.grid.phi)], axis=-1)

    first = _metric_rate(u, dmetric_dlambda0(chart), mu)
    plus, minus = (boundary_residual(u, PullbackMetric(chart, lam)).vector for lam in (mu, -mu))
    along_path = (plus - minus) / (2.0 * mu)
    error = float(np.max(np.abs(first - along_path))) / max(float(np.max(np.abs(along_path))), 1.0)
    report.add(Check.at_most("boundary.metric_variation", error, 1e-5, "derived"))
    angle = np.einsum("ab,na,nb->n", curvature.second_form, omega, omega)
    report.add(Check.at_most("boundary.contact_angle_variation", np.max(np.abs(first[:n] - angle)), 1e-6, "derived"))

    second = _metric_rate(u, d2metric_dlambda0(chart), mu)
    angle = np.einsum("abc,na,nb,nc->n", curvature.second_form_derivative, omega, omega, omega)
    error = float(np.max(np.abs(second[:n] - angle)))
    report.add(Check.at_most("boundary.second_contact_angle_variation", error, 1e-6, "derived"))

    corrections = []
    for amplitude in (correction_mu, 2.0 * correction_mu):
        metric = PerturbedMetric(EuclideanMetric(), dmetric_dlambda0(chart), amplitude)
        corrections.append(
            boundary_correction(
                u, metric, tol=options.boundary_tol, max_iter=options.max_newton, first_damping=options.first_damping
            ).correction.coeffs
        )
    small, large = (float(np.linalg.norm(c)) for c in corrections)
    table = report.table("boundary_correction", ["mu", "norm", "odd_fraction"])
    odd = []
    for amplitude, coeffs, norm in zip((correction_mu, 2.0 * correction_mu), corrections, (small, large), strict=True):
        odd.append(float(np.linalg.norm(coeffs[basis.odd_mask])) / norm if norm > 0.0 else 0.0)
        table.add(amplitude, norm, odd[-1])
    report.add(Check.at_most("boundary.correction_parity", max(odd), 1e-6, "exact"))
    if small > 1e-12:
        report.add(Check("boundary.correction_linear", large / small, 2.0, 0.05, "derived", kind="rel"))
    else:
        report.add(Check.at_most("boundary.correction_linear", large, 1e-12, "exact"))
    return report


# --------------------------------------------------------------------------------------------------
# Barycenter
# --------------------------------------------------------------------------------------------------


def barycenter_equivalence_check(
    surface: HostSurface,
    lam: float,
    basis: BasisTable,
    n_states: int = 20,
    seed: int = 0,
    options: SolverConfig | None = None,
    threads: int = 1,
) -> VerificationReport:
    """Intrinsic fixed-point and extrinsic nearest-point barycenters of random admissible states agree."""
    report = VerificationReport.for_basis(basis)
    rng = np.random.default_rng(seed)
    anchor = surface.chart(surface.default_anchor())
    spread = min(0.5 * surface.chart_radius, 0.5)
    inputs = [
        (anchor.position(rng.uniform(-0.5, 0.5, 2) * spread), random_seed_field(basis, rng)) for _ in range(n_states)
    ]

    def measure(item: tuple[np.ndarray, SpectralField]) -> tuple[float, float]:
        p, w = item
        state = admissible_initialize(surface, p, lam, w, options)
        metric = state.metric
        geom = geometry(state.u, metric)
        intrinsic = barycenter_intrinsic(state.u, metric, geom).x
        extrinsic = extrinsic_chart_coordinates(metric, barycenter_extrinsic(state.u, metric, geom))
        return float(np.linalg.norm(intrinsic - extrinsic)), float(np.linalg.norm(intrinsic))

    results = _map(measure, inputs, threads)
    table = report.table("barycenter_equivalence", ["state", "difference", "intrinsic_norm"])
    for k, (difference, norm) in enumerate(results):
        table.add(k, difference, norm)
    differences, norms = np.array(results).T
    report.add(Check.at_most("barycenter.equivalence", differences.max(), 1e-8, "derived"))
    report.add(Check.at_most("barycenter.constraint", norms.max(), 1e-8, "derived"))
    return report


# --------------------------------------------------------------------------------------------------
# Small-lambda expansions
# --------------------------------------------------------------------------------------------------


def energy_expansion_scan(
    surface: HostSurface,
    p: np.ndarray,
    lambdas: Sequence[float],
    basis: BasisTable,
    options: SolverConfig | None = None,
    *,
    relax: bool = False,
    threads: int = 1,
) -> VerificationReport:
    """Slope of (W - 2 pi) / lam over a geometric lam sequence, extrapolated to lam = 0, against -pi H^S(p).

    With `relax` the energies are those of the stationary states with barycenter p instead of the
    admissible states grown from u = 0.
    """
    report = VerificationReport.for_basis(basis)
    lambdas = sorted((float(lam) for lam in lambdas), reverse=True)
    ratio = geometric_ratio(lambdas)

    def energy(lam: float) -> float:
        if relax:
            state = stationary_solve(surface, p, lam, basis, options).state
        else:
            state = admissible_initialize(surface, p, lam, basis.zeros(), options)
        return willmore(state.u, state.metric).energy

    energies = _map(energy, lambdas, threads)
    slopes = [(e - TWO_PI) / lam for e, lam in zip(energies, lambdas, strict=True)]
    table = report.table("expansion", ["lambda", "energy", "slope"])
    for row in zip(lambdas, energies, slopes, strict=True):
        table.add(*row)

    slope = richardson(slopes, ratio, 1)
    target = -np.pi * float(surface.mean_curvature(np.asarray(p, dtype=float)))
    order = error_order(slopes, target, ratio)
    report.values |= {"expansion.slope": slope, "expansion.order": order, "expansion.target": target}
    logger.info(f"energy slope {slope:.6f} (target {target:.6f}, observed order {order:.2f})")
    if abs(target) < 1e-12:
        report.add(Check("expansion.slope", slope, target, 1e-6, "exact"))
    else:
        report.add(Check("expansion.slope", slope, target, 0.05, "asymptotic", kind="rel"))
    if np.isfinite(order):
        report.add(Check("expansion.order", order, 0.9, 0.0, "asymptotic", kind="min"))
    return report


def barycenter_drift(chart, lam: float, basis: BasisTable, options: SolverConfig | None = None) -> np.ndarray:
    """y(lam) = -lam I[u(lam), g^{p, lam}] for the admissible state grown from u = 0."""
    metric = PullbackMetric(chart, lam)
    u = enforce_admissibility(basis.zeros(), metric, options).u
    geom = geometry(u, metric)
    data = willmore(u, metric, geom)
    return -lam * velocity_I(data, constraint_basis(u, metric, geom, barycenter(u, metric, geom)))


def expansion_third_derivative(
    surface: HostSurface,
    p: np.ndarray,
    basis: BasisTable,
    options: SolverConfig | None = None,
    *,
    step: float = 0.02,
    threads: int = 1,
) -> VerificationReport:
    """Five-point stencil in lam for y(lam) = -lam I: y(0) = y'(0) = y''(0) = 0 and y'''(0) = 9 grad H^S(p)."""
    report = VerificationReport.for_basis(basis)
    chart = surface.chart(np.asarray(p, dtype=float))
    gradient = chart.curvature().mean_gradient
    stencil = step * np.arange(-2, 3)
    values = np.array(_map(lambda lam: barycenter_drift(chart, lam, basis, options), list(stencil), threads))
    table = report.table("third_derivative", ["lambda", "y1", "y2"])
    for lam, y in zip(stencil, values, strict=True):
        table.add(lam, *y)

    ym2, ym1, y0, yp1, yp2 = values
    h = step
    d1 = (-yp2 + 8.0 * yp1 - 8.0 * ym1 + ym2) / (12.0 * h)
    d2 = (-yp2 + 16.0 * yp1 - 30.0 * y0 + 16.0 * ym1 - ym2) / (12.0 * h**2)
    d3 = (yp2 - 2.0 * yp1 + 2.0 * ym1 - ym2) / (2.0 * h**3)
    target = 9.0 * gradient
    report.values |= {
        "third_derivative.y3_1": float(d3[0]),
        "third_derivative.y3_2": float(d3[1]),
        "third_derivative.target_1": float(target[0]),
        "third_derivative.target_2": float(target[1]),
    }
    if np.linalg.norm(target) > 1e-8:
        error = float(np.linalg.norm(d3 - target) / np.linalg.norm(target))
        report.add(Check.at_most("third_derivative.y3", error, 0.02, "asymptotic", detail=f"y'''={d3.tolist()}"))
    else:
        report.add(Check.at_most("third_derivative.y3", np.linalg.norm(d3), 1e-4, "exact"))
    lower = float(np.linalg.norm(d1) * h + 0.5 * np.linalg.norm(d2) * h**2 + np.linalg.norm(y0))
    bound = 0.1 * float(np.linalg.norm(d3)) * h**3 / 6.0 + 1e-10
    report.add(Check.at_most("third_derivative.lower_orders", lower, bound, "asymptotic"))
    return report


# --------------------------------------------------------------------------------------------------
# Critical points of the host mean curvature
# --------------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class CriticalPoint:
    point: np.ndarray
    mean_curvature: float
    gradient_norm: float
    eigenvalues: np.ndarray

    @property
    def nondegenerate(self) -> bool:
        return bool(np.min(np.abs(self.eigenvalues)) >= 1e-6)

    @property
    def kind(self) -> str:
        if not self.nondegenerate:
            return "degenerate"
        if np.all(self.eigenvalues < 0):
            return "maximum"
        return "minimum" if np.all(self.eigenvalues > 0) else "saddle"


def mean_curvature_jet(surface: HostSurface, q: np.ndarray, step: float = 1e-4) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of H^S at q in its chart frame and the Hessian by central differences of the gradient."""
    chart = surface.chart(q)
    gradient = chart.curvature().mean_gradient
    hessian = np.zeros((2, 2))
    for k in range(2):
        offset = step * np.eye(2)[k]
        plus = chart.moved(offset).curvature().mean_gradient
        minus = chart.moved(-offset).curvature().mean_gradient
        hessian[:, k] = (plus - minus) / (2.0 * step)
    return gradient, 0.5 * (hessian + hessian.T)


def locate_critical_points(
    surface: HostSurface, n_seeds: int = 96, tol: float = 1e-11, max_iter: int = 200
) -> list[CriticalPoint]:
    """Newton on grad H^S from the surface's seed points, deduplicated."""
    max_step = 0.5 * min(surface.chart_radius, 2.0)
    found: list[CriticalPoint] = []
    for seed in surface.seed_points(n_seeds):
        q = np.asarray(seed, dtype=float)
        for _ in range(max_iter):
            gradient, hessian = mean_curvature_jet(surface, q)
            if np.linalg.norm(gradient) <= tol:
                break
            update = -np.linalg.lstsq(hessian, gradient, rcond=None)[0]
            length = np.linalg.norm(update)
            if length > max_step:
                update *= max_step / length
            q = surface.chart(q).position(update)
        else:
            logger.debug(f"no critical point from seed {np.round(seed, 4).tolist()}")
            continue
        if any(np.linalg.norm(q - c.point) <= 1e-6 for c in found):
            continue
        found.append(
            CriticalPoint(
                point=q,
                mean_curvature=float(surface.mean_curvature(q)),
                gradient_norm=float(np.linalg.norm(gradient)),
                eigenvalues=np.linalg.eigvalsh(hessian),
            )
        )
    return found


def critical_point_check(surface: HostSurface, n_seeds: int = 96) -> VerificationReport:
    """Critical points of H^S with their Hessian spectra; degenerate families are flagged as unsuitable
    targets for convergence runs."""
    report = VerificationReport()
    points = locate_critical_points(surface, n_seeds)
    table = report.table("critical_points", ["x", "y", "z", "mean_curvature", "eig1", "eig2", "gradient_norm"])
    for c in points:
        table.add(*c.point, c.mean_curvature, *c.eigenvalues, c.gradient_norm)
    degenerate = [c for c in points if not c.nondegenerate]
    report.values |= {"critical_points.count": len(points), "critical_points.degenerate": len(degenerate)}
    if degenerate:
        detail = f"{len(points)} points, {len(degenerate)} degenerate: unsuitable for convergence runs"
    else:
        kinds = [c.kind for c in points]
        detail = ", ".join(f"{kinds.count(k)} {k}" for k in ("maximum", "saddle", "minimum"))
    logger.info(f"critical points of H^S on {surface!r}: {detail}")
    residual = max((c.gradient_norm for c in points), default=float("nan"))
    report.add(Check.at_most("critical_points.classified", residual, 1e-8, "derived", detail=detail))
    return report


# --------------------------------------------------------------------------------------------------
# Trajectory analyses
# --------------------------------------------------------------------------------------------------


def _post_transient(trajectory: Trajectory, transient: float, minimum: int = 3) -> np.ndarray:
    times = trajectory.times
    if times.size < minimum:
        raise AnalysisError(f"trajectory has {times.size} records, need at least {minimum}", records=int(times.size))
    start = times[0] + transient * (times[-1] - times[0])
    mask = times >= start
    if mask.sum() < minimum:
        raise AnalysisError(
            f"only {int(mask.sum())} records after the transient (t >= {start:.4g})", records=int(mask.sum())
        )
    return mask


def dissipation_check(trajectory: Trajectory, label: str = "") -> VerificationReport:
    """d W / dt from centered differences against -int |P_H^perp W|^2, and per-step monotonicity.

    `label` is appended to the check names so several runs can share one report.
    """
    report = VerificationReport()
    _post_transient(trajectory, 0.0)
    times, energies = trajectory.times, trajectory.energies
    dissipation = trajectory.column("dissipation")
    rate = np.gradient(energies, times)[1:-1]
    expected = -dissipation[1:-1]
    scale = float(np.linalg.norm(expected))
    error = float(np.linalg.norm(rate - expected))
    if scale > 1e-8:
        error /= scale
        report.add(Check.at_most(f"flow.dissipation_identity{label}", error, 0.05, "derived"))
    else:
        report.add(Check.at_most(f"flow.dissipation_identity{label}", error, 1e-6, "exact"))
    report.values[f"flow.dissipation_error{label}"] = error
    increase = trajectory.max_energy_increase()
    report.values[f"flow.max_energy_increase{label}"] = increase
    report.add(Check.at_most(f"flow.energy_monotone{label}", increase, 1e-8, "derived"))
    area_error = float(np.max(np.abs(trajectory.column("area") - TWO_PI)))
    report.add(Check.at_most(f"flow.area{label}", area_error, 1e-8, "derived"))
    return report


def curvature_monotonicity(trajectory: Trajectory, surface: HostSurface, transient: float = 0.25) -> VerificationReport:
    """H^S(xi(t)) does not decrease after the transient."""
    report = VerificationReport()
    mask = _post_transient(trajectory, transient, minimum=2)
    values = surface.mean_curvature(trajectory.positions[mask])
    decrease = float(np.max(-np.diff(values), initial=0.0))
    report.values["flow.host_curvature_gain"] = float(values[-1] - values[0])
    report.add(Check.at_most("flow.host_curvature_monotone", decrease, 1e-9, "asymptotic"))
    return report


def barycenter_ode_compare(
    trajectory: Trajectory, surface: HostSurface, lam: float, transient: float = 0.3
) -> VerificationReport:
    """Deviation of xi_dot from (3/2) lam^3 grad H^S(xi), in units of lam^3, after the transient."""
    report = VerificationReport()
    mask = _post_transient(trajectory, transient)
    positions = trajectory.positions[mask]
    velocities = np.array(trajectory.velocities)[mask]
    predictions = []
    for q in positions:
        chart = surface.chart(q)
        predictions.append(1.5 * lam**3 * (chart.curvature().mean_gradient @ chart.frame.tangent))
    predictions = np.array(predictions)
    deviation = float(np.max(np.linalg.norm(velocities - predictions, axis=-1)) / lam**3)
    report.values[f"ode.deviation_lam{lam:g}"] = deviation
    table = report.table(f"ode_lam{lam:g}", ["t", "velocity_norm", "prediction_norm", "deviation"])
    for t, v, pred in zip(trajectory.times[mask], velocities, predictions, strict=True):
        table.add(t, np.linalg.norm(v), np.linalg.norm(pred), np.linalg.norm(v - pred) / lam**3)

    gradient_norms = np.linalg.norm(predictions, axis=-1) / (1.5 * lam**3)
    resolved = gradient_norms >= 1e-3
    if np.any(resolved):
        cosines = np.einsum("na,na->n", velocities[resolved], predictions[resolved]) / (
            np.linalg.norm(velocities[resolved], axis=-1) * np.linalg.norm(predictions[resolved], axis=-1) + _NOISE
        )
        angle = float(np.degrees(np.max(np.arccos(np.clip(cosines, -1.0, 1.0)))))
        report.add(Check.at_most(f"ode.direction_lam{lam:g}", angle, 15.0, "asymptotic", detail="degrees"))
    return report


def parity_monitor(trajectory: Trajectory, lam: float, transient: float = 0.25) -> VerificationReport:
    """Post-transient bound K of |u^-|_inf / lam^2 and the decay rate of the leading odd mode."""
    report = VerificationReport()
    mask = _post_transient(trajectory, transient, minimum=2)
    ratio = trajectory.column("u_odd_norm") / lam**2
    times = trajectory.times
    settled = ratio[mask]
    bound = float(np.max(settled))
    growth = np.diff(settled) / np.maximum(settled[:-1], _NOISE)
    increasing = np.diff(settled) > 1e-12 + 1e-6 * settled[:-1]
    report.values |= {
        f"parity.bound_lam{lam:g}": bound,
        f"parity.transient_time_lam{lam:g}": float(times[mask][0]),
        f"parity.increasing_fraction_lam{lam:g}": float(np.mean(increasing)) if increasing.size else 0.0,
    }
    table = report.table(f"parity_lam{lam:g}", ["t", "odd_ratio"])
    for t, r in zip(times, ratio, strict=True):
        table.add(t, r)
    # odd part still decaying: it has at least halved since the transient, and must not grow on the way
    if settled[0] > 0.0 and settled[-1] <= 0.5 * settled[0]:
        report.add(
            Check.at_most(
                f"parity.monotone_decay_lam{lam:g}",
                float(np.max(growth, initial=0.0)),
                1e-3,
                "asymptotic",
                detail="largest relative growth between records",
            )
        )

    fit = leading_odd_decay(trajectory.snapshots, lam)
    if fit is not None:
        measured, linear = fit
        report.values |= {f"parity.decay_rate_lam{lam:g}": measured, f"parity.linear_rate_lam{lam:g}": linear}
        report.add(Check(f"parity.decay_rate_lam{lam:g}", measured, linear, 0.2, "derived", kind="rel"))
    return report


def leading_odd_decay(snapshots: Sequence[FlowState], lam: float) -> tuple[float, float] | None:
    """Fitted exponential rate of the largest odd Neumann mode (outside the kernel) against its linear rate.

    Returns None with fewer than three snapshots or when that mode starts below 10 lam^2.
    """
    if len(snapshots) < 3:
        return None
    basis = snapshots[0].u.basis
    candidates = basis.neumann_mask & basis.odd_mask & (basis.degrees >= 2)
    first = np.where(candidates, np.abs(snapshots[0].u.coeffs), 0.0)
    index = int(np.argmax(first))
    if first[index] < 10.0 * lam**2:
        return None
    times = np.array([s.t for s in snapshots])
    amplitudes = np.abs(np.array([s.u.coeffs[index] for s in snapshots]))
    keep = amplitudes > 10.0 * lam**2
    if keep.sum() < 3:
        return None
    slope = np.polyfit(times[keep], np.log(amplitudes[keep]), 1)[0]
    return float(-slope), float(basis.decay_rates[index])


# --------------------------------------------------------------------------------------------------
# States and resolution
# --------------------------------------------------------------------------------------------------


def stationarity_check(state: FlowState, tol: float = 1e-8) -> VerificationReport:
    """Residuals of the stationary problem with prescribed barycenter."""
    report = VerificationReport.for_basis(state.u.basis)
    metric = state.metric
    geom = geometry(state.u, metric)
    data = willmore(state.u, metric, geom)
    cbasis = constraint_basis(state.u, metric, geom, barycenter(state.u, metric, geom))
    projected = cbasis.project_K_perp(data.gradient)
    dissipated = project_H_perp(geom.mean, data.gradient, geom)
    constraints = constraint_values(state.u, metric, geom)
    report.values |= {
        "stationarity.P_K_perp_W": float(np.sqrt(geom.inner(projected, projected))),
        "stationarity.P_H_perp_W": float(np.sqrt(geom.inner(dissipated, dissipated))),
    }
    projected_norm = report.values["stationarity.P_K_perp_W"]
    report.add(Check.at_most("stationarity.projected_gradient", projected_norm, tol, "derived"))
    report.add(Check.at_most("stationarity.boundary", boundary_residual(state.u, metric).sup, 1e-7, "derived"))
    report.add(Check.at_most("stationarity.area", abs(constraints.area - TWO_PI), 1e-8, "derived"))
    report.add(Check.at_most("stationarity.barycenter", np.linalg.norm(constraints.barycenter), 1e-8, "derived"))
    return report


def resolution_scan(
    l_values: Sequence[int],
    surface: HostSurface,
    lam: float,
    options: SolverConfig | None = None,
    *,
    threads: int = 1,
) -> VerificationReport:
    """Round-state residuals and the energy of the admissible state at the anchor against L_max."""
    l_values = sorted(int(l) for l in l_values)
    if len(l_values) < 2:
        raise ValueError("resolution scan needs at least two values of l_max")
    p = surface.default_anchor()
    metric = EuclideanMetric()

    def measure(l_max: int) -> tuple[float, float, float]:
        basis = resolution_for(l_max)
        u = basis.zeros()
        geom = geometry(u, metric)
        round_gradient = float(np.max(np.abs(willmore(u, metric, geom).gradient)))
        state = admissible_initialize(surface, p, lam, basis.zeros(), options)
        return round_gradient, abs(geom.area - TWO_PI), willmore(state.u, state.metric).energy

    results = _map(measure, l_values, threads)
    report = VerificationReport.for_basis(resolution_for(l_values[-1]))
    reference = results[-1][2]
    table = report.table("resolution", ["l_max", "round_gradient", "round_area_error", "energy", "energy_error"])
    for l_max, (round_gradient, area_error, energy) in zip(l_values, results, strict=True):
        table.add(l_max, round_gradient, area_error, energy, abs(energy - reference))
    report.add(Check.at_most("resolution.round_gradient", max(r[0] for r in results), 1e-8, "exact"))
    report.add(Check.at_most("resolution.energy", abs(results[-2][2] - reference), 1e-6, "derived"))
    return report


def metric_oracle_checks(surface: HostSurface, p: np.ndarray, lam: float) -> VerificationReport:
    """Host chart data and the pullback metric at p: identity at the origin, first and second lam-derivatives
    from curvature, compatibility of the Christoffel symbols, a vanishing Riemann tensor, chart points on S
    and an idempotent projection."""
    report = VerificationReport()
    chart = surface.chart(np.asarray(p, dtype=float))
    radius = min(0.5 * surface.chart_radius, 0.5)
    x = radius * np.array([[0.3, -0.2], [-0.5, 0.4], [0.1, 0.6]])
    points = chart.position(x)
    report.add(Check.at_most("surfaces.chart_on_host", np.max(np.abs(surface.level(points))), 1e-12, "exact"))
    projected = np.array([surface.nearest_point(q) for q in points])
    report.add(Check.at_most("surfaces.projection_idempotent", np.max(np.abs(projected - points)), 1e-12, "exact"))
    frame = chart.frame.matrix
    report.add(Check.at_most("surfaces.frame_orthonormal", np.max(np.abs(frame.T @ frame - np.eye(3))), 1e-12, "exact"))

    y = np.array([[0.2, -0.1, 0.3], [-0.4, 0.5, 0.1], [0.0, 0.0, 0.0]])
    metric: AmbientMetric = PullbackMetric(chart, lam)
    report.add(Check.at_most("surfaces.metric_origin", np.max(np.abs(metric.at(y[2]) - np.eye(3))), 1e-12, "exact"))
    h = 1e-4
    numeric = (PullbackMetric(chart, h).at(y) - PullbackMetric(chart, -h).at(y)) / (2.0 * h)
    analytic = dmetric_dlambda0(chart).sample(y).q
    report.add(Check.at_most("surfaces.metric_lambda_derivative", np.max(np.abs(numeric - analytic)), 1e-6, "derived"))
    h = 1e-3
    numeric = (PullbackMetric(chart, h).at(y) + PullbackMetric(chart, -h).at(y) - 2.0 * np.eye(3)) / h**2
    analytic = d2metric_dlambda0(chart).sample(y).q
    error = float(np.max(np.abs(numeric - analytic)))
    report.add(Check.at_most("surfaces.metric_second_lambda_derivative", error, 1e-5, "derived"))

    sample = metric.sample(y)
    gamma = sample.christoffel
    shifts = np.eye(3)
    h = 1e-5
    dg = np.stack([(metric.at(y + h * s) - metric.at(y - h * s)) / (2.0 * h) for s in shifts], axis=1)
    compatible = np.einsum("nmj,nmki->nkij", sample.g, gamma) + np.einsum("nim,nmkj->nkij", sample.g, gamma)
    report.add(Check.at_most("surfaces.metric_compatibility", np.max(np.abs(dg - compatible)), 1e-6, "derived"))
    h = 1e-4
    dgamma = np.stack(
        [(metric.sample(y + h * s).christoffel - metric.sample(y - h * s).christoffel) / (2.0 * h) for s in shifts],
        axis=1,
    )
    # R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb
    riemann = (
        np.einsum("ncadb->nabcd", dgamma)
        - np.einsum("ndacb->nabcd", dgamma)
        + np.einsum("nace,nedb->nabcd", gamma, gamma)
        - np.einsum("nade,necb->nabcd", gamma, gamma)
    )
    report.add(Check.at_most("surfaces.metric_flatness", np.max(np.abs(riemann)), 1e-6, "derived"))
    mean = float(surface.mean_curvature(chart.point))
    report.add(Check("surfaces.mean_curvature", chart.curvature().mean, mean, 1e-8, "derived"))
    return report
