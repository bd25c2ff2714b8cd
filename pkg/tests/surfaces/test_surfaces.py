import numpy as np
import pytest

from bubbleflow.config import EllipsoidConfig
from bubbleflow.exceptions import ChartDomainError, ProjectionError
from bubbleflow.surfaces import SURFACES, EllipsoidSurface, GraphSurface, SphereSurface, get_surface


@pytest.fixture(params=["plane", "sphere", "ellipsoid", "bump"])
def host(request):
    return request.getfixturevalue(request.param)


def chart_points(surface) -> np.ndarray:
    radius = min(0.5 * surface.chart_radius, 0.5)
    return radius * np.array([[0.3, -0.2], [-0.5, 0.4], [0.1, 0.6], [0.0, 0.0]])


class TestHostSurface:
    def test_chart_points_lie_on_the_host(self, host):
        chart = host.chart(host.seed_points(9)[2])
        points = chart.position(chart_points(host))
        np.testing.assert_allclose(host.level(points), 0.0, atol=1e-12)

    def test_frame_is_orthonormal_with_inner_normal(self, host):
        p = host.seed_points(9)[4]
        frame = host.chart(p).frame
        np.testing.assert_allclose(frame.matrix.T @ frame.matrix, np.eye(3), atol=1e-13)
        # the level function decreases into the domain
        assert host.level(p + 1e-3 * frame.normal) < 0

    def test_nearest_point_is_idempotent(self, host):
        chart = host.chart(host.seed_points(9)[1])
        for q in chart.position(chart_points(host)):
            np.testing.assert_allclose(host.nearest_point(q), q, atol=1e-12)

    def test_chart_curvature_matches_level_set_formula(self, host):
        p = host.seed_points(9)[3]
        assert host.chart(p).curvature().mean == pytest.approx(float(host.mean_curvature(p)), abs=1e-8)

    def test_moved_chart_keeps_a_continuous_frame(self, host):
        chart = host.chart(host.seed_points(9)[5])
        moved = chart.moved(np.array([1e-3, -2e-3]) * min(host.chart_radius, 1.0))
        assert np.linalg.norm(moved.frame.matrix - chart.frame.matrix) < 1e-2

    def test_describe_round_trips_through_get_surface(self, host):
        rebuilt = get_surface(host.describe())
        assert type(rebuilt) is type(host)
        assert rebuilt.params() == host.params()


class TestMeanCurvature:
    def test_sphere(self):
        sphere = SphereSurface(radius=2.0, center=(1.0, 0.0, 0.0))
        q = sphere.seed_points(5)[1]
        assert float(sphere.mean_curvature(q)) == pytest.approx(1.0, abs=1e-12)

    def test_spheroid_pole(self):
        """At the pole of semi-axes (a, a, c): H = 2 c / a^2."""
        spheroid = EllipsoidSurface(1.0, 1.0, 0.8)
        assert float(spheroid.mean_curvature(np.array([0.0, 0.0, 0.8]))) == pytest.approx(1.6, abs=1e-12)

    def test_plane(self, plane):
        assert float(plane.mean_curvature(np.array([0.3, -1.0, 0.0]))) == 0.0

    def test_bump_top(self):
        """Domain above z = A exp(-r^2 / 2 w^2): H = -2 A / w^2 on top."""
        bump = GraphSurface(amplitude=0.1, width=1.0)
        assert float(bump.mean_curvature(bump.default_anchor())) == pytest.approx(-0.2, abs=1e-12)

    def test_sphere_gradient_vanishes(self, sphere):
        chart = sphere.chart(sphere.seed_points(7)[3])
        np.testing.assert_allclose(chart.curvature().mean_gradient, 0.0, atol=1e-10)


class TestRegistry:
    def test_registry_names(self):
        assert set(SURFACES) == {"plane", "sphere", "ellipsoid", "graph"}

    def test_from_config_model(self):
        surface = get_surface(EllipsoidConfig(a=1.0, b=2.0, c=3.0))
        np.testing.assert_array_equal(surface.axes, [1.0, 2.0, 3.0])

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="Unknown surface kind"):
            get_surface({"kind": "torus"})

    def test_invalid_parameters(self):
        with pytest.raises(ValueError, match="semi-axes"):
            EllipsoidSurface(1.0, -1.0, 1.0)


class TestDomainErrors:
    def test_chart_radius(self, sphere):
        chart = sphere.chart(sphere.default_anchor())
        with pytest.raises(ChartDomainError):
            chart.position(np.array([sphere.chart_radius, 0.0]))

    def test_projection_outside_reach(self, sphere):
        with pytest.raises(ProjectionError):
            sphere.nearest_point(np.array([0.0, 0.0, 2.5]))
