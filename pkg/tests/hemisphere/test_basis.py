import numpy as np
import pytest

from bubbleflow.exceptions import ResolutionError
from bubbleflow.hemisphere.basis import build_basis, equator_trace, laplacian, parity_split
from bubbleflow.hemisphere.grid import HemisphereGrid


class TestGrid:
    def test_weights_integrate_the_round_area(self):
        grid = HemisphereGrid(12, 24)
        assert grid.weights.sum() == pytest.approx(2 * np.pi, abs=1e-12)

    def test_integrates_height(self):
        """int cos(theta) over the upper hemisphere is pi."""
        grid = HemisphereGrid(12, 24)
        assert grid.integrate(np.cos(grid.theta_nodes)) == pytest.approx(np.pi, abs=1e-12)

    def test_nodes_are_theta_major_from_the_pole(self):
        grid = HemisphereGrid(6, 8)
        theta = grid.as_matrix(grid.theta_nodes)
        assert np.all(theta[:, 0] == theta[:, -1])
        assert np.all(np.diff(grid.theta) > 0)
        assert grid.theta.max() < np.pi / 2

    def test_too_coarse(self):
        with pytest.raises(ResolutionError):
            HemisphereGrid(1, 8)


class TestBasisTable:
    def test_mode_counts(self, basis):
        """(L+1)(L+2)/2 Neumann modes and two trace modes per order |m| <= trace_order."""
        assert int(basis.neumann_mask.sum()) == 45
        assert basis.trace_indices.size == 2 * (2 * 5 + 1)
        assert basis.n_modes == 67

    def test_kernel_modes(self, basis):
        modes = [basis.modes[j] for j in basis.kernel_indices]
        assert [(mode.l, mode.m) for mode in modes] == [(0, 0), (1, 1), (1, -1)]

    def test_classes_are_orthonormal(self, basis):
        for neumann in (True, False):
            gram = basis.class_gram(neumann)
            np.testing.assert_allclose(gram, np.eye(gram.shape[0]), atol=1e-9)

    def test_constant_mode(self, basis):
        np.testing.assert_allclose(basis.mode(0, 0).values, 1.0 / np.sqrt(2 * np.pi), atol=1e-14)

    def test_analysis_inverts_synthesis(self, basis):
        coeffs = np.random.default_rng(3).normal(size=basis.n_modes)
        np.testing.assert_allclose(basis.analyze(basis.synthesize(coeffs)), coeffs, atol=1e-8)

    def test_decay_rates(self, basis):
        """1/2 l(l+1)(l(l+1) - 2): zero on the kernel, 180 for l = 4."""
        assert basis.decay_rates[basis.kernel_indices] == pytest.approx([0.0, 0.0, 0.0])
        assert basis.decay_rates[basis.index(4, 0)] == pytest.approx(180.0)

    def test_coercive_off_the_kernel(self, basis):
        """<f, Delta(Delta + 2) f> >= 24 <f, f> on Neumann fields orthogonal to {1, omega^1, omega^2}."""
        mask = basis.neumann_mask.copy()
        mask[basis.kernel_indices] = False
        assert 2.0 * basis.decay_rates[mask].min() == pytest.approx(24.0)

    def test_unknown_mode(self, basis):
        with pytest.raises(KeyError, match="l=9"):
            basis.index(9, 1)

    def test_default_trace_order_is_the_largest(self, basis):
        default = build_basis(8, HemisphereGrid(24, 48))
        assert default.trace_order == 5
        np.testing.assert_array_equal(default.trace_indices, basis.trace_indices)

    @pytest.mark.parametrize(
        ("l_max", "grid", "trace_order"),
        [(3, (12, 24), 1), (8, (16, 48), 5), (8, (24, 48), 6)],
    )
    def test_rejects_unresolved_configurations(self, l_max, grid, trace_order):
        with pytest.raises(ResolutionError):
            build_basis(l_max, HemisphereGrid(*grid), trace_order)


class TestSpectralField:
    def test_needs_data(self, basis):
        with pytest.raises(ValueError, match="coefficients or grid values"):
            basis.field()

    def test_shape_is_checked(self, basis):
        with pytest.raises(ValueError, match="coefficients"):
            basis.field(coeffs=np.zeros(3))

    def test_arithmetic(self, basis):
        f = basis.mode(2, 0) * 2.0 - basis.mode(2, 0)
        np.testing.assert_allclose(f.coeffs, basis.mode(2, 0).coeffs)
        assert (-f).coeffs[basis.index(2, 0)] == -1.0

    def test_laplacian_is_diagonal(self, basis):
        f = basis.mode(3, 1, 0.5)
        np.testing.assert_allclose(laplacian(f).coeffs, -12.0 * f.coeffs)

    def test_neumann_modes_have_no_normal_derivative(self, basis):
        for l, m in ((2, 0), (3, 1), (4, -2), (8, 8)):
            f = basis.mode(l, m)
            assert np.max(np.abs(equator_trace(f, "normal"))) < 1e-11
            assert np.max(np.abs(equator_trace(f, "normal_laplacian"))) < 1e-9

    def test_trace_modes_carry_boundary_data(self, basis):
        assert np.max(np.abs(equator_trace(basis.mode(1, 0), "normal"))) > 0.1

    def test_parity_split(self, basis):
        f = basis.mode(2, 2, 0.3) + basis.mode(3, 1, 0.2)
        even, odd = parity_split(f)
        np.testing.assert_allclose(odd.coeffs, basis.mode(3, 1, 0.2).coeffs)
        np.testing.assert_allclose(even.coeffs + odd.coeffs, f.coeffs)

    def test_norms(self, basis):
        f = basis.mode(0, 0, 2.0)
        assert f.l2_norm() == pytest.approx(2.0, rel=1e-12)
        assert f.sup_norm() == pytest.approx(2.0 / np.sqrt(2 * np.pi), rel=1e-12)
