"""Curved hosts at the shipped configurations and at a reduced resolution. Minutes to hours; run with `-m slow`."""

import numpy as np
import pytest

from bubbleflow import CONFIG_DIR
from bubbleflow.analysis.checks import (
    barycenter_drift,
    boundary_variation_checks,
    energy_expansion_scan,
    richardson,
)
from bubbleflow.analysis.suites import run_suites
from bubbleflow.config import SolverConfig, parse_config
from bubbleflow.constants import FD_PATH_STEP
from bubbleflow.flow.boundary import boundary_residual
from bubbleflow.flow.constraints import constraint_basis, constraint_derivative, constraint_values
from bubbleflow.flow.runner import initial_state
from bubbleflow.flow.stepper import admissible_initialize, j_tilde
from bubbleflow.geometry.barycenter import barycenter
from bubbleflow.geometry.immersion import geometry
from bubbleflow.geometry.metric import PullbackMetric, metric_time_derivative
from bubbleflow.hemisphere.basis import build_basis
from bubbleflow.hemisphere.grid import HemisphereGrid

pytestmark = pytest.mark.slow

OPTIONS = SolverConfig(max_newton=100)


@pytest.fixture(scope="module")
def fine_basis():
    return build_basis(12, HemisphereGrid(28, 56))


class TestShippedConfigs:
    @pytest.mark.parametrize("name", ["sphere.yaml", "ellipsoid.yaml"])
    def test_configured_suites(self, name):
        config = parse_config(CONFIG_DIR / name)
        report = run_suites(config)
        assert report.passed, report.failures

    def test_ellipsoid_initialization(self):
        config = parse_config(CONFIG_DIR / "ellipsoid.yaml")
        state = initial_state(config)
        assert boundary_residual(state.u, state.metric).sup <= config.solver.boundary_tol
        assert np.max(np.abs(constraint_values(state.u, state.metric).residual)) <= config.solver.constraint_tol


class TestSmallLambda:
    @pytest.mark.parametrize("host", ["sphere", "ellipsoid"])
    def test_energy_slope(self, request, fine_basis, host, generic_point):
        surface = request.getfixturevalue(host)
        p = generic_point if host == "ellipsoid" else surface.default_anchor()
        report = energy_expansion_scan(surface, p, [0.04, 0.02, 0.01], fine_basis, OPTIONS)
        assert report.passed, report.failures

    def test_barycenter_velocity_scales_with_lam_squared(self, fine_basis, ellipsoid, generic_point):
        """-lam I / lam^3 tends to 3/2 grad H^S."""
        chart = ellipsoid.chart(generic_point)
        scaled = [barycenter_drift(chart, lam, fine_basis, OPTIONS) / lam**3 for lam in (0.04, 0.02)]
        target = 1.5 * chart.curvature().mean_gradient
        limit = richardson(scaled, 2.0, 1)
        assert np.linalg.norm(limit - target) <= 0.05 * np.linalg.norm(target)

    def test_frame_motion_fields_approach_the_translations(self, fine_basis, ellipsoid, generic_point):
        chart = ellipsoid.chart(generic_point)
        u = fine_basis.zeros()
        deviations = []
        for lam in (0.05, 0.025):
            J = j_tilde(chart, lam, geometry(u, PullbackMetric(chart, lam)))
            deviations.append(max(float(np.max(np.linalg.norm(J[i] - np.eye(3)[i], axis=-1))) for i in range(2)))
        assert 1.6 <= deviations[0] / deviations[1] <= 2.4
        assert deviations[0] <= 10 * 0.05

    def test_moving_chart_constraint_rates(self, fine_basis, ellipsoid, generic_point):
        """At an admissible state D_2 C^i g_dot = -v^i / lam + <grad C^i, X> and D_2 A g_dot = <grad A, X>,
        X the normal part of the frame motion along v divided by lam."""
        lam = 0.05
        seed = fine_basis.mode(2, 2, 0.02) + fine_basis.mode(3, 1, 0.01)
        state = admissible_initialize(ellipsoid, generic_point, lam, seed, OPTIONS)
        metric = state.metric
        geom = geometry(state.u, metric)
        cbasis = constraint_basis(state.u, metric, geom, barycenter(state.u, metric, geom))
        velocity = np.array([0.6, 0.8])
        rates = constraint_derivative(state.u, metric_time_derivative(state.chart, lam, velocity, FD_PATH_STEP))
        J = j_tilde(state.chart, lam, geom)
        X = sum(velocity[i] * geom.ambient.inner(J[i], geom.normal) for i in range(2)) / lam
        expected = np.array([geom.inner(g, X) for g in cbasis.gradients])
        expected[1:] -= velocity / lam
        assert np.max(np.abs(rates - expected)) <= 1e-3 / lam

    def test_boundary_variations_at_a_generic_point(self, fine_basis, ellipsoid, generic_point):
        report = boundary_variation_checks(ellipsoid, generic_point, fine_basis, OPTIONS)
        assert report.passed, report.failures
        assert report["boundary.correction_linear"].value == pytest.approx(2.0, rel=0.05)
