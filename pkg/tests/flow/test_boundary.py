import numpy as np
import pytest

from bubbleflow.flow.boundary import (
    biharmonic_neumann_solve,
    boundary_correction,
    boundary_residual,
    compatibility_constant,
    completion,
    equator_data,
    phi_derivative,
    split_state,
)
from bubbleflow.geometry.metric import EuclideanMetric, PullbackMetric


@pytest.fixture
def trace_coeffs(basis):
    return np.random.default_rng(11).normal(scale=1e-2, size=basis.trace_indices.size)


class TestBoundaryResidual:
    def test_round_hemisphere_meets_the_plane_orthogonally(self, basis):
        residual = boundary_residual(basis.zeros(), EuclideanMetric())
        assert residual.sup < 1e-10

    def test_neumann_graphs_keep_the_contact_angle(self, basis):
        residual = boundary_residual(basis.mode(2, 0, 0.05) + basis.mode(4, 2, 0.02), EuclideanMetric())
        np.testing.assert_allclose(residual.first, 0.0, atol=1e-12)

    def test_trace_modes_tilt_the_contact_angle(self, basis):
        residual = boundary_residual(basis.mode(1, 0, 0.05), EuclideanMetric())
        assert np.max(np.abs(residual.first)) > 1e-3

    def test_phi_derivative(self):
        phi = 2 * np.pi * np.arange(16) / 16
        np.testing.assert_allclose(phi_derivative(np.sin(3 * phi)), 3 * np.cos(3 * phi), atol=1e-12)


class TestCompletion:
    def test_completion_has_mean_zero(self, basis, trace_coeffs):
        assert basis.grid.integrate(completion(basis, trace_coeffs).values) == pytest.approx(0.0, abs=1e-13)

    def test_completion_keeps_the_trace_coefficients(self, basis, trace_coeffs):
        field = completion(basis, trace_coeffs)
        np.testing.assert_allclose(field.coeffs[basis.trace_indices], trace_coeffs)

    def test_split_state_round_trip(self, basis, trace_coeffs):
        w = basis.mode(2, 0, 0.1) + basis.mode(5, 3, 0.05)
        u = w + completion(basis, trace_coeffs)
        neumann, trace = split_state(u)
        np.testing.assert_allclose(trace, trace_coeffs)
        np.testing.assert_allclose(neumann.coeffs, w.coeffs, atol=1e-14)

    def test_biharmonic_solve_reproduces_equator_data(self, basis, trace_coeffs):
        alpha, beta = equator_data(completion(basis, trace_coeffs))
        solved = biharmonic_neumann_solve(basis, alpha, beta)
        np.testing.assert_allclose(solved.coeffs, completion(basis, trace_coeffs).coeffs, atol=1e-9)

    def test_compatibility_constant(self):
        assert compatibility_constant(np.ones(4), np.full(4, 3.0)) == 5.0


class TestBoundaryCorrection:
    def test_already_admissible(self, basis):
        result = boundary_correction(basis.zeros(), EuclideanMetric())
        assert result.iterations == 0
        assert result.correction.sup_norm() == 0.0

    def test_sphere_chart(self, basis, sphere):
        metric = PullbackMetric(sphere.chart(sphere.default_anchor()), 0.1)
        w = basis.mode(2, 0, 0.02) + basis.mode(4, 0, 0.01)
        result = boundary_correction(w, metric, tol=1e-8)
        assert result.residual.sup <= 1e-8
        assert boundary_residual(w + result.correction, metric).sup <= 1e-8
        assert result.history[0] > result.history[-1]
