import numpy as np
import pytest

from bubbleflow.exceptions import SingularImmersionError
from bubbleflow.geometry.immersion import area_gradient, geometry, laplace_beltrami, willmore
from bubbleflow.geometry.metric import EuclideanMetric, PullbackMetric


@pytest.fixture(scope="module")
def euclidean():
    return EuclideanMetric()


class TestRoundHemisphere:
    def test_mean_curvature_and_area(self, basis, euclidean):
        geom = geometry(basis.zeros(), euclidean)
        np.testing.assert_allclose(geom.mean, 2.0, atol=1e-12)
        assert geom.area == pytest.approx(2 * np.pi, abs=1e-12)
        np.testing.assert_allclose(geom.traceless_sq, 0.0, atol=1e-12)

    def test_willmore_energy_and_gradient(self, basis, euclidean):
        data = willmore(basis.zeros(), euclidean)
        assert data.energy == pytest.approx(2 * np.pi, abs=1e-11)
        np.testing.assert_allclose(data.gradient, 0.0, atol=1e-10)

    def test_inner_normal(self, basis, euclidean):
        geom = geometry(basis.zeros(), euclidean)
        np.testing.assert_allclose(geom.normal, -geom.omega, atol=1e-13)
        np.testing.assert_allclose(geom.radial_factor, -1.0, atol=1e-13)

    def test_area_gradient(self, basis, euclidean):
        np.testing.assert_allclose(area_gradient(geometry(basis.zeros(), euclidean)), -2.0, atol=1e-12)

    def test_laplace_beltrami_of_a_spherical_harmonic(self, basis, euclidean):
        geom = geometry(basis.zeros(), euclidean)
        f = basis.mode(3, 1)
        np.testing.assert_allclose(laplace_beltrami(geom, f), -12.0 * f.values, atol=1e-9)

    def test_conormal_points_to_the_pole(self, basis, euclidean):
        geom = geometry(basis.zeros(), euclidean)
        assert np.all(geom.conormal[:, 0] < 0)


class TestScaledHemisphere:
    @pytest.mark.parametrize("c", [0.1, -0.2])
    def test_constant_radius(self, basis, euclidean, c):
        u = basis.mode(0, 0, c * np.sqrt(2 * np.pi))
        geom = geometry(u, euclidean)
        np.testing.assert_allclose(geom.mean, 2.0 / (1.0 + c), atol=1e-11)
        assert geom.area == pytest.approx(2 * np.pi * (1.0 + c) ** 2, abs=1e-11)

    def test_energy_is_scale_invariant(self, basis, euclidean):
        u = basis.mode(0, 0, 0.3 * np.sqrt(2 * np.pi))
        assert willmore(u, euclidean).energy == pytest.approx(2 * np.pi, abs=1e-11)


class TestPerturbedGraphs:
    def test_energy_grows_off_the_round_state(self, basis, euclidean):
        """The round hemisphere minimizes the energy among Neumann graphs on the plane."""
        u = basis.mode(2, 0, 0.05) + basis.mode(3, 1, 0.03)
        assert willmore(u, euclidean).energy > 2 * np.pi

    def test_pullback_on_the_plane_changes_nothing(self, basis, plane, euclidean):
        u = basis.mode(2, 2, 0.04)
        flat = willmore(u, euclidean)
        pulled = willmore(u, PullbackMetric(plane.chart(np.zeros(3)), 0.1))
        assert pulled.energy == pytest.approx(flat.energy, abs=1e-13)
        np.testing.assert_allclose(pulled.gradient, flat.gradient, atol=1e-12)

    def test_curved_host_changes_the_energy(self, basis, ellipsoid, generic_point, euclidean):
        metric = PullbackMetric(ellipsoid.chart(generic_point), 0.05)
        assert abs(willmore(basis.zeros(), metric).energy - 2 * np.pi) > 1e-4

    def test_collapsed_graph(self, basis, euclidean):
        with pytest.raises(SingularImmersionError):
            geometry(basis.mode(0, 0, -1.5 * np.sqrt(2 * np.pi)), euclidean)
