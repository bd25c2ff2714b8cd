"""Right-hand side and time stepping of the rescaled flow in the moving barycenter chart.

The evolution in the chart at xi with radius scale lam reads

    g(d_t f_u, nu) = tau - P_K^perp W + I^i P_K^perp g(J_i, nu),      <xi_dot, b_i> = -lam I^i,

with I^i = <W, P_H^perp grad C^i>. The stiff part 1/2 Delta (Delta + 2) of the Neumann-class component
is integrated implicitly (it is diagonal in the basis), everything else explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from bubbleflow.config import SolverConfig
from bubbleflow.constants import CHART_FOOTPRINT, FD_PATH_STEP, GRAPH_FACTOR_MIN, LAMBDA_CAP, SMALL_GRAPH_NORM
from bubbleflow.exceptions import (
    BoundarySolveError,
    ConvergenceError,
    GraphBreakdownError,
    InitializationError,
    RegimeError,
    StepError,
)
from bubbleflow.flow.boundary import (
    BoundaryCorrection,
    BoundaryResidual,
    boundary_correction,
    boundary_linearization,
    boundary_residual,
    completion,
    completion_matrix,
    split_state,
)
from bubbleflow.flow.constraints import (
    ConstraintBasis,
    constraint_basis,
    constraint_values,
    project_H_perp,
    tau,
)
from bubbleflow.flow.newton import Evaluation, newton_solve
from bubbleflow.flow.state import FlowState
from bubbleflow.geometry.barycenter import barycenter
from bubbleflow.geometry.immersion import ImmersionGeometry, WillmoreData, geometry, willmore
from bubbleflow.geometry.metric import AmbientMetric, PullbackMetric, metric_time_derivative
from bubbleflow.hemisphere.basis import BasisTable, SpectralField
from bubbleflow.surfaces.surface import ChartData, HostSurface
from bubbleflow.utils.log import get_logger

logger = get_logger("stepper")


def dt_max(basis: BasisTable) -> float:
    """0.5 over the largest decay rate of the Neumann class."""
    return 0.5 / float(np.max(basis.decay_rates[basis.neumann_mask]))


def check_regime(surface: HostSurface, lam: float, w: SpectralField | None = None) -> None:
    if not 0 < lam <= LAMBDA_CAP:
        raise RegimeError(f"lambda={lam} outside (0, {LAMBDA_CAP}]", lam=lam)
    if lam * CHART_FOOTPRINT >= surface.chart_radius:
        raise RegimeError(
            f"lambda={lam} too large for {surface!r}: the bubble leaves the chart of radius {surface.chart_radius:.4g}",
            lam=lam,
            chart_radius=surface.chart_radius,
        )
    if w is not None and w.sup_norm() > SMALL_GRAPH_NORM:
        raise RegimeError(f"seed sup norm {w.sup_norm():.3g} exceeds {SMALL_GRAPH_NORM}", seed_norm=w.sup_norm())


# --------------------------------------------------------------------------------------------------
# Admissibility: B = 0, A = 2 pi, C = 0
# --------------------------------------------------------------------------------------------------


@lru_cache(maxsize=8)
def _admissibility_jacobian(basis: BasisTable) -> np.ndarray:
    """Linearization at the round hemisphere in unknowns (trace coefficients, kernel-mode increments).

    Rows: boundary components, then dA = 2 int phi and dC^i = (3 / 2 pi) int omega^i phi.
    """
    grid = basis.grid
    values = basis.sampler.matrices["value"]
    fields = np.hstack([values @ completion_matrix(basis), values[:, basis.kernel_indices]])
    constraint_rows = np.vstack(
        [
            2.0 * grid.integrate(fields.T),
            1.5 / np.pi * grid.integrate((grid.omega[:, 0:1] * fields).T),
            1.5 / np.pi * grid.integrate((grid.omega[:, 1:2] * fields).T),
        ]
    )
    boundary_rows = np.hstack(
        [boundary_linearization(basis), np.zeros((2 * grid.n_phi, basis.kernel_indices.size))]
    )
    return np.vstack([boundary_rows, constraint_rows])


def _row_weights(basis: BasisTable, options: SolverConfig) -> np.ndarray:
    """Scale the constraint rows so both tolerances weigh the same in the least-squares step."""
    weights = np.ones(2 * basis.grid.n_phi + 3)
    weights[-3:] = options.boundary_tol / options.constraint_tol
    return weights


@dataclass
class AdmissibleSolution:
    u: SpectralField
    boundary: BoundaryResidual
    constraints: np.ndarray
    iterations: int
    history: list[float] = field(default_factory=list)
    #: weighted Jacobian at the solution; seeds the next solve along a trajectory
    jacobian: np.ndarray | None = None

    @property
    def constraint_error(self) -> float:
        return float(np.max(np.abs(self.constraints)))


def enforce_admissibility(
    w: SpectralField,
    metric: AmbientMetric,
    options: SolverConfig | None = None,
    *,
    trace: np.ndarray | None = None,
    jacobian: np.ndarray | None = None,
) -> AdmissibleSolution:
    """Newton solve for u = w + k^j Y_kernel_j + completion(c_T) with B = 0, A = 2 pi and C = 0.

    `w` is a Neumann-class field; the kernel modes (1, omega^1, omega^2) are adjusted by increments
    k, the trace coefficients c_T start from `trace`. The Jacobian is seeded with `jacobian` (from a
    previous solve) or the round-hemisphere linearization and rebuilt at the current iterate when a
    step fails to contract. Raises `BoundarySolveError` with the residual history on failure.
    """
    options = options or SolverConfig()
    basis = w.basis
    n_trace = basis.trace_indices.size
    weights = _row_weights(basis, options)

    def evaluate(unknowns: np.ndarray) -> Evaluation:
        kernel = np.zeros(basis.n_modes)
        kernel[basis.kernel_indices] = unknowns[n_trace:]
        u = w + basis.field(coeffs=kernel) + completion(basis, unknowns[:n_trace])
        residual_b = boundary_residual(u, metric)
        residual_c = constraint_values(u, metric).residual
        error_c = float(np.max(np.abs(residual_c)))
        converged = residual_b.sup <= options.boundary_tol and error_c <= options.constraint_tol
        vector = weights * np.concatenate([residual_b.vector, residual_c])
        return Evaluation(vector, max(residual_b.sup, error_c), converged, (u, residual_b, residual_c))

    start = np.zeros(n_trace + basis.kernel_indices.size)
    if trace is not None:
        start[:n_trace] = trace
    seed = weights[:, None] * _admissibility_jacobian(basis) if jacobian is None else jacobian
    result = newton_solve(
        evaluate,
        start,
        jacobian=seed,
        max_iter=options.max_newton,
        first_damping=options.first_damping,
        what="admissibility solve",
    )
    u, residual_b, residual_c = result.evaluation.payload
    logger.debug(
        f"admissible after {result.iterations} iterations ({result.refreshes} Jacobian rebuilds): "
        f"boundary {residual_b.sup:.3e}, constraints {np.max(np.abs(residual_c)):.3e}"
    )
    return AdmissibleSolution(u, residual_b, residual_c, result.iterations, result.history, result.jacobian)


def admissible_initialize(
    surface: HostSurface,
    p: np.ndarray,
    lam: float,
    w_seed: SpectralField,
    options: SolverConfig | None = None,
    *,
    frame=None,
) -> FlowState:
    """Admissible state over the chart at the host point p from a Neumann-class seed.

    The seed's components along {1, omega^1, omega^2} are discarded; they, together with the trace
    coefficients, are determined by the admissibility solve.
    """
    check_regime(surface, lam, w_seed)
    basis = w_seed.basis
    coeffs = np.where(basis.neumann_mask, w_seed.coeffs, 0.0)
    coeffs[basis.kernel_indices] = 0.0
    chart = surface.chart(p, frame)
    try:
        solution = enforce_admissibility(basis.field(coeffs=coeffs), PullbackMetric(chart, lam), options)
    except BoundarySolveError as e:
        raise InitializationError(f"no admissible initial state: {e}", **e.details) from e
    logger.debug(f"admissible state after {solution.iterations} iterations, |u|={solution.u.sup_norm():.3e}")
    return FlowState(t=0.0, u=solution.u, chart=chart, lam=lam)


def constraint_correction(
    state: FlowState, options: SolverConfig | None = None, *, jacobian: np.ndarray | None = None
) -> tuple[FlowState, AdmissibleSolution]:
    """Restore A = 2 pi and C = 0 (keeping B = 0) by adjusting the kernel modes and the trace coefficients."""
    w, trace = split_state(state.u)
    solution = enforce_admissibility(w, state.metric, options, trace=trace, jacobian=jacobian)
    return replace(state, u=solution.u), solution


# --------------------------------------------------------------------------------------------------
# Right-hand side
# --------------------------------------------------------------------------------------------------


def velocity_I(willmore_data: WillmoreData, basis: ConstraintBasis) -> np.ndarray:
    """I^i = <W, P_H^perp grad C^i>."""
    geom = willmore_data.geometry
    W = willmore_data.gradient
    return np.array([geom.inner(W, project_H_perp(geom.mean, g, geom)) for g in basis.gradients[1:]])


def j_tilde(chart: ChartData, lam: float, geom: ImmersionGeometry, step: float = FD_PATH_STEP) -> np.ndarray:
    """Frame-motion fields J_i = lam (D_2 F)^-1 D_1 F b_i at the surface nodes, shape (2, n, 3).

    D_1 F is differentiated along the host curves s -> f[p, s e_i] with transported frames.
    """
    metric = PullbackMetric(chart, lam)
    y = geom.position
    back = np.einsum("nab,cb->nac", metric.jacobian_inverse(y), chart.frame.matrix)
    fields = []
    for i in range(2):
        offset = np.zeros(2)
        offset[i] = step
        plus = PullbackMetric(chart.moved(offset), lam).world(y)
        minus = PullbackMetric(chart.moved(-offset), lam).world(y)
        fields.append(np.einsum("nac,nc->na", back, (plus - minus) / (2.0 * step)))
    return np.stack(fields)


@dataclass(frozen=True)
class RhsData:
    u_dot: np.ndarray
    xi_dot: np.ndarray
    normal_velocity: np.ndarray
    willmore: WillmoreData
    basis: ConstraintBasis
    I: np.ndarray
    tau: np.ndarray
    coupling: np.ndarray
    #: int |P_H^perp W|^2 dmu
    dissipation: float

    @property
    def energy(self) -> float:
        return self.willmore.energy

    @property
    def stationarity(self) -> float:
        return float(np.sqrt(self.dissipation))


def rhs(state: FlowState, *, include_tau: bool = True) -> RhsData:
    metric = state.metric
    u = state.u
    geom = geometry(u, metric)
    data = willmore(u, metric, geom)
    basis = constraint_basis(u, metric, geom, barycenter(u, metric, geom))
    W = data.gradient
    I = velocity_I(data, basis)
    xi_dot = -state.lam * I

    tau_field = np.zeros_like(W)
    speed = float(np.linalg.norm(xi_dot))
    if include_tau and speed > 0.0:
        direction = metric_time_derivative(state.chart, state.lam, xi_dot / speed, FD_PATH_STEP)
        tau_field = speed * tau(u, direction, basis)

    J = j_tilde(state.chart, state.lam, geom)
    coupling = np.stack([geom.ambient.inner(J[i], geom.normal) for i in range(2)])
    projected_coupling = np.stack([basis.project_K_perp(c) for c in coupling])
    normal_velocity = tau_field - basis.project_K_perp(W) + I @ projected_coupling

    factor = geom.radial_factor
    if np.min(np.abs(factor)) < GRAPH_FACTOR_MIN:
        raise GraphBreakdownError(
            "radial graph factor g(omega, nu) degenerated", min_factor=float(np.min(np.abs(factor)))
        )
    dissipated = project_H_perp(geom.mean, W, geom)
    return RhsData(
        u_dot=normal_velocity / factor,
        xi_dot=xi_dot,
        normal_velocity=normal_velocity,
        willmore=data,
        basis=basis,
        I=I,
        tau=tau_field,
        coupling=coupling,
        dissipation=geom.inner(dissipated, dissipated),
    )


# --------------------------------------------------------------------------------------------------
# Time step
# --------------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class StepInfo:
    rhs: RhsData
    boundary: BoundaryCorrection
    admissibility: AdmissibleSolution
    #: |A - 2 pi| of the explicit update before correction
    area_drift: float


def implicit_update(w: SpectralField, w_dot: SpectralField, dt: float) -> SpectralField:
    """(w + dt (w_dot + kappa w)) / (1 + dt kappa) on the Neumann class, kappa the decay rates."""
    basis = w.basis
    kappa = np.where(basis.neumann_mask, basis.decay_rates, 0.0)
    coeffs = (w.coeffs + dt * (w_dot.coeffs + kappa * w.coeffs)) / (1.0 + dt * kappa)
    return basis.field(coeffs=np.where(basis.neumann_mask, coeffs, 0.0))


def step(
    state: FlowState, dt: float, options: SolverConfig | None = None, *, previous: StepInfo | None = None
) -> tuple[FlowState, StepInfo]:
    """One IMEX step: implicit stiff part, explicit remainder, Heun for xi, then the boundary correction
    and the constraint correction in the new chart.

    `previous` is the info of the step before; its Jacobians seed this step's Newton solves.
    """
    options = options or SolverConfig()
    basis = state.u.basis
    if dt <= 0 or dt > dt_max(basis) * (1.0 + 1e-12):
        raise StepError(f"dt={dt:.3e} outside (0, {dt_max(basis):.3e}]", dt=dt, dt_max=dt_max(basis))
    current = rhs(state)
    w, trace = split_state(state.u)
    w_dot, _ = split_state(basis.field(values=current.u_dot))
    w_new = implicit_update(w, w_dot, dt)

    predicted_chart = state.chart.moved(dt * current.xi_dot)
    predicted = FlowState(t=state.t + dt, u=w_new + completion(basis, trace), chart=predicted_chart, lam=state.lam)
    predicted_geom = geometry(predicted.u, predicted.metric)
    area_drift = abs(predicted_geom.area - 2.0 * np.pi)
    if np.any(current.xi_dot):
        data = willmore(predicted.u, predicted.metric, predicted_geom)
        basis_pred = constraint_basis(
            predicted.u, predicted.metric, predicted_geom, barycenter(predicted.u, predicted.metric, predicted_geom)
        )
        xi_dot_pred = -state.lam * velocity_I(data, basis_pred)
        chart = state.chart.moved(0.5 * dt * (current.xi_dot + xi_dot_pred))
    else:
        chart = predicted_chart

    metric = PullbackMetric(chart, state.lam)
    corrected = boundary_correction(
        w_new,
        metric,
        tol=options.boundary_tol,
        max_iter=options.max_newton,
        first_damping=options.first_damping,
        initial=trace,
        jacobian=None if previous is None else previous.boundary.jacobian,
    )
    bounded = state.advanced(dt=dt, u=w_new + corrected.correction, chart=chart)
    new_state, solution = constraint_correction(
        bounded, options, jacobian=None if previous is None else previous.admissibility.jacobian
    )
    return new_state, StepInfo(rhs=current, boundary=corrected, admissibility=solution, area_drift=area_drift)


# --------------------------------------------------------------------------------------------------
# Stationary problem with prescribed barycenter
# --------------------------------------------------------------------------------------------------


@dataclass
class StationaryResult:
    state: FlowState
    residual: float
    iterations: int
    history: list[float] = field(default_factory=list)


def stationary_solve(
    surface: HostSurface,
    p: np.ndarray,
    lam: float,
    basis: BasisTable,
    options: SolverConfig | None = None,
    *,
    tol: float = 1e-9,
    max_iter: int = 50,
) -> StationaryResult:
    """Solve P_K^perp W = 0 with B = 0, A = 2 pi, C = 0 in the chart at p.

    Chord iteration preconditioned by the inverse decay rates on the Neumann modes of degree >= 2.
    Raises `ConvergenceError` with the residual history when `tol` is not reached in `max_iter` sweeps.
    """
    state = admissible_initialize(surface, p, lam, basis.zeros(), options)
    rates = basis.decay_rates
    active = basis.neumann_mask & (basis.degrees >= 2)
    history: list[float] = []
    jacobian = None
    for iteration in range(max_iter + 1):
        metric = state.metric
        geom = geometry(state.u, metric)
        data = willmore(state.u, metric, geom)
        cbasis = constraint_basis(state.u, metric, geom, barycenter(state.u, metric, geom))
        projected = cbasis.project_K_perp(data.gradient)
        residual = float(np.sqrt(geom.inner(projected, projected)))
        history.append(residual)
        logger.debug(f"stationary iteration {iteration}: |P_K^perp W| = {residual:.3e}")
        if residual <= tol:
            return StationaryResult(state=state, residual=residual, iterations=iteration, history=history)
        if iteration == max_iter:
            break
        velocity, _ = split_state(basis.field(values=-projected / geom.radial_factor))
        w, trace = split_state(state.u)
        update = np.where(active, velocity.coeffs / np.where(active, rates, 1.0), 0.0)
        relaxed = w + basis.field(coeffs=update)
        solution = enforce_admissibility(relaxed, metric, options, trace=trace, jacobian=jacobian)
        jacobian = solution.jacobian
        state = FlowState(t=0.0, u=solution.u, chart=state.chart, lam=lam)
    raise ConvergenceError(
        f"stationary solve stopped at |P_K^perp W| = {history[-1]:.3e} after {max_iter} sweeps (tolerance {tol:.1e})",
        history=history,
    )
