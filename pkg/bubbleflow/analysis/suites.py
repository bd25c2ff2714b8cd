"""Named verification suites selected with `verify --suite`."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from bubbleflow.analysis.checks import (
    barycenter_equivalence_check,
    barycenter_ode_compare,
    boundary_linearization_checks,
    boundary_variation_checks,
    critical_point_check,
    curvature_monotonicity,
    dissipation_check,
    energy_expansion_scan,
    expansion_third_derivative,
    generic_point,
    gradient_anchor_checks,
    linearization_checks,
    locate_critical_points,
    metric_oracle_checks,
    parity_monitor,
    round_state_checks,
    stationarity_check,
)
from bubbleflow.analysis.report import Check, VerificationReport
from bubbleflow.config import RunConfig, SeedConfig, config_hash
from bubbleflow.flow.runner import FlowRunner, basis_for, initial_state, starting_point
from bubbleflow.flow.state import FlowState, Trajectory
from bubbleflow.flow.stepper import dt_max
from bubbleflow.hemisphere.basis import BasisTable
from bubbleflow.surfaces import get_surface
from bubbleflow.surfaces.surface import HostSurface
from bubbleflow.utils.log import get_logger

logger = get_logger("verify", emoji="🔎")


@dataclass
class SuiteContext:
    config: RunConfig
    basis: BasisTable
    surface: HostSurface
    start: np.ndarray
    _flows: dict[tuple[float, float], tuple[Trajectory, FlowState]] = field(default_factory=dict)

    @classmethod
    def from_config(cls, config: RunConfig) -> SuiteContext:
        surface = get_surface(config.surface)
        return cls(config=config, basis=basis_for(config), surface=surface, start=starting_point(surface, config.start))

    @property
    def lam(self) -> float:
        return self.config.lam

    @property
    def dt(self) -> float:
        return self.config.time.dt if self.config.time.dt is not None else dt_max(self.basis)

    def flow(self, lam: float, dt: float) -> tuple[Trajectory, FlowState]:
        """Integrate the configured flow with another lambda or step; results are cached per (lam, dt)."""
        key = (lam, dt)
        if key not in self._flows:
            timing = self.config.time
            steps = int(np.ceil(timing.max_steps * self.dt / dt))
            config = self.config.model_copy(
                update={"lam": lam, "time": timing.model_copy(update={"dt": dt, "max_steps": steps})}
            )
            runner = FlowRunner(config, name=f"flow[lam={lam:g}, dt={dt:.3g}]")
            trajectory = runner.run()
            self._flows[key] = (trajectory, runner.state)
        return self._flows[key]


def suite_round(ctx: SuiteContext) -> VerificationReport:
    report = round_state_checks(ctx.basis)
    report.merge(linearization_checks(ctx.basis, ctx.lam))
    report.merge(boundary_linearization_checks(ctx.basis))
    return report


def suite_anchors(ctx: SuiteContext) -> VerificationReport:
    return gradient_anchor_checks(ctx.basis)


def suite_surfaces(ctx: SuiteContext) -> VerificationReport:
    report = metric_oracle_checks(ctx.surface, ctx.start, ctx.lam)
    report.merge(boundary_variation_checks(ctx.surface, ctx.start, ctx.basis, ctx.config.solver))
    state = initial_state(ctx.config.model_copy(update={"seed": SeedConfig()}), ctx.basis)
    admissible = stationarity_check(state, tol=np.inf)
    report.checks.extend(c for c in admissible.checks if c.name != "stationarity.projected_gradient")
    report.values.update(admissible.values)
    if ctx.surface.name == "plane":
        report.add(Check.at_most("surfaces.flat_state", state.u.sup_norm(), 1e-14, "exact"))
    return report


def suite_barycenter(ctx: SuiteContext) -> VerificationReport:
    config = ctx.config
    return barycenter_equivalence_check(
        ctx.surface, ctx.lam, ctx.basis, seed=config.random_seed, options=config.solver, threads=config.threads
    )


def suite_expansion(ctx: SuiteContext) -> VerificationReport:
    config = ctx.config
    return energy_expansion_scan(
        ctx.surface, ctx.start, config.verify.lambdas, ctx.basis, config.solver, threads=config.threads
    )


def suite_third_derivative(ctx: SuiteContext) -> VerificationReport:
    config = ctx.config
    return expansion_third_derivative(
        ctx.surface, generic_point(ctx.surface), ctx.basis, config.solver, threads=config.threads
    )


def suite_critical_points(ctx: SuiteContext) -> VerificationReport:
    return critical_point_check(ctx.surface)


def suite_flow(ctx: SuiteContext) -> VerificationReport:
    """Dissipation identity, monotone energy and exact area at dt and dt / 2, with the observed order."""
    report = VerificationReport()
    errors = []
    for label, dt in (("", ctx.dt), ("_half_dt", 0.5 * ctx.dt)):
        trajectory, _ = ctx.flow(ctx.lam, dt)
        part = dissipation_check(trajectory, label)
        report.merge(part)
        errors.append(part.values[f"flow.dissipation_error{label}"])
    if min(errors) > 1e-10:
        order = float(np.log2(errors[0] / errors[1]))
        report.values["flow.dissipation_order"] = order
        report.add(Check("flow.dissipation_order", order, 0.9, 0.0, "derived", kind="min"))
    return report


def _halved(ctx: SuiteContext) -> tuple[float, float]:
    return ctx.lam, 0.5 * ctx.lam


def suite_parity(ctx: SuiteContext) -> VerificationReport:
    report = VerificationReport()
    bounds = []
    for lam in _halved(ctx):
        trajectory, _ = ctx.flow(lam, ctx.dt)
        report.merge(parity_monitor(trajectory, lam))
        bounds.append(report.values[f"parity.bound_lam{lam:g}"])
    if max(bounds) > 0.0:
        ratio = bounds[0] / max(bounds[1], 1e-300)
        report.add(Check("parity.bound_ratio", ratio, 1.25, 0.75, "asymptotic", detail="bounds within [0.5, 2]"))
    return report


def suite_ode(ctx: SuiteContext) -> VerificationReport:
    report = VerificationReport()
    deviations = []
    resolved = False
    for lam in _halved(ctx):
        trajectory, _ = ctx.flow(lam, ctx.dt)
        part = barycenter_ode_compare(trajectory, ctx.surface, lam)
        report.merge(part)
        deviations.append(part.values[f"ode.deviation_lam{lam:g}"])
        resolved |= any(name.startswith("ode.direction") for name in (c.name for c in part.checks))
    if resolved:
        ratio = deviations[0] / max(deviations[1], 1e-300)
        report.add(Check("ode.deviation_ratio", ratio, 2.0, 0.3, "asymptotic", kind="rel"))
    else:
        # grad H^S vanishes along the path: the velocity itself must be O(lam^4)
        report.add(Check.at_most("ode.deviation", max(deviations), ctx.lam, "exact"))
    return report


def suite_convergence(ctx: SuiteContext) -> VerificationReport:
    report = VerificationReport()
    trajectory, state = ctx.flow(ctx.lam, ctx.dt)
    stopped = trajectory.stopped or "running"
    report.add(Check.flag("convergence.stationary", stopped == "stationary", "asymptotic", stopped))
    targets = [c for c in locate_critical_points(ctx.surface) if c.nondegenerate]
    distance = min((float(np.linalg.norm(state.xi - c.point)) for c in targets), default=float("inf"))
    report.add(Check.at_most("convergence.critical_point_distance", distance, 0.05, "asymptotic"))
    report.merge(curvature_monotonicity(trajectory, ctx.surface))
    return report


SUITES: dict[str, Callable[[SuiteContext], VerificationReport]] = {
    "round": suite_round,
    "anchors": suite_anchors,
    "surfaces": suite_surfaces,
    "barycenter": suite_barycenter,
    "expansion": suite_expansion,
    "third_derivative": suite_third_derivative,
    "critical_points": suite_critical_points,
    "flow": suite_flow,
    "parity": suite_parity,
    "ode": suite_ode,
    "convergence": suite_convergence,
}


def run_suites(config: RunConfig, names: list[str] | None = None) -> VerificationReport:
    names = config.suites if names is None else names
    unknown = [name for name in names if name not in SUITES]
    if unknown:
        raise ValueError(f"Unknown suites: {unknown}")
    ctx = SuiteContext.from_config(config)
    report = VerificationReport.for_basis(ctx.basis, config_hash(config))
    for name in names:
        logger.info(f"Running suite '{name}'")
        part = SUITES[name](ctx)
        part.suites = [name]
        report.merge(part)
        failed = [c.name for c in part.failures]
        if failed:
            logger.warning(f"Suite '{name}': {len(failed)} failed check(s): {', '.join(failed)}")
        else:
            logger.info(f"Suite '{name}': {len(part.checks)} check(s) passed")
    return report
