import numpy as np
import pytest

from bubbleflow.geometry.metric import (
    CurvatureDirection,
    DifferenceDirection,
    EuclideanMetric,
    PerturbedMetric,
    PullbackMetric,
    dmetric_dlambda0,
    metric_time_derivative,
    path_charts,
)


@pytest.fixture
def chart(ellipsoid, generic_point):
    return ellipsoid.chart(generic_point)


@pytest.fixture
def points():
    rng = np.random.default_rng(7)
    y = rng.uniform(-1.0, 1.0, size=(20, 3))
    y[:, 2] = np.abs(y[:, 2])
    return y


class TestPullbackMetric:
    def test_plane_is_euclidean(self, plane, points):
        metric = PullbackMetric(plane.chart(np.zeros(3)), 0.2)
        assert metric.deviation(points) == 0.0

    def test_identity_at_the_origin(self, chart):
        np.testing.assert_allclose(PullbackMetric(chart, 0.05).at(np.zeros(3)), np.eye(3), atol=1e-14)

    def test_positive_definite(self, chart, points):
        eigenvalues = np.linalg.eigvalsh(PullbackMetric(chart, 0.05).at(points))
        assert eigenvalues.min() > 0.5

    def test_christoffel_closed_form(self, chart, points):
        metric = PullbackMetric(chart, 0.05)
        np.testing.assert_allclose(
            metric.sample(points).christoffel, metric.christoffel_closed_form(points), atol=1e-12
        )

    def test_negative_lambda_reflects_the_chart(self, chart, points):
        reflected = points * np.array([-1.0, -1.0, 1.0])
        np.testing.assert_allclose(
            PullbackMetric(chart, -0.05).at(points), PullbackMetric(chart, 0.05).at(reflected), atol=1e-14
        )

    def test_zero_lambda_is_euclidean(self, chart, points):
        assert PullbackMetric(chart, 0.0).deviation(points) == 0.0

    def test_log_inverts_exp(self, chart):
        metric = PullbackMetric(chart, 0.05)
        x = np.array([0.2, -0.1, 0.0])
        v = np.array([0.3, 0.4, 0.5])
        np.testing.assert_allclose(metric.log_map(x, metric.exp_map(x, v)), v, atol=1e-13)

    def test_world_round_trip(self, chart, points):
        metric = PullbackMetric(chart, 0.05)
        np.testing.assert_allclose(metric.from_world(metric.world(points)), points, atol=1e-12)

    def test_plane_points_lie_on_the_host(self, ellipsoid, chart):
        metric = PullbackMetric(chart, 0.05)
        q = metric.plane_point(np.array([[0.5, 0.3], [-0.8, 0.1]]))
        np.testing.assert_allclose(ellipsoid.level(q), 0.0, atol=1e-13)


class TestMetricDirections:
    def test_first_lambda_derivative(self, chart, points):
        """q0 agrees with the central difference of the pullback at small lambda."""
        step = 1e-4
        exact = dmetric_dlambda0(chart).sample(points).q
        difference = DifferenceDirection(PullbackMetric(chart, step), PullbackMetric(chart, -step), step)
        np.testing.assert_allclose(difference.sample(points).q, exact, atol=1e-6)

    def test_second_lambda_derivative_is_symmetric(self, chart, points):
        q = CurvatureDirection(chart.curvature(), order=2).sample(points).q
        np.testing.assert_allclose(q, np.swapaxes(q, -1, -2))
        np.testing.assert_array_equal(q[:, 2, 2], 0.0)

    def test_invalid_order(self, chart):
        with pytest.raises(ValueError, match="order"):
            CurvatureDirection(chart.curvature(), order=3)

    def test_perturbed_metric(self, chart, points):
        direction = dmetric_dlambda0(chart)
        metric = PerturbedMetric(EuclideanMetric(), direction, 0.1)
        np.testing.assert_allclose(metric.at(points), np.eye(3) + 0.1 * direction.sample(points).q)
        assert not metric.flat

    def test_time_derivative_vanishes_on_the_sphere(self, sphere, points):
        """Moving along a round sphere leaves the pullback metric unchanged."""
        chart = sphere.chart(sphere.seed_points(5)[2])
        direction = metric_time_derivative(chart, 0.1, np.array([1.0, 0.5]), 1e-4)
        assert direction.role == "time"
        np.testing.assert_allclose(direction.sample(points).q, 0.0, atol=1e-8)

    def test_path_charts_stay_on_the_host(self, ellipsoid, chart):
        plus, minus = path_charts(chart, np.array([1.0, 0.0]), 1e-3)
        for moved in (plus, minus):
            assert abs(float(ellipsoid.level(moved.point))) < 1e-13
            assert np.linalg.norm(moved.point - chart.point) == pytest.approx(1e-3, rel=1e-2)
