import numpy as np
import pytest
from numpy.testing import assert_allclose

from legbands.basis import (
    BasisSpec,
    PlateauError,
    gauss_legendre_nodes,
    legendre,
    legendre_deriv,
    psi,
    psi_cell,
    psi_deriv,
    sigma2,
    variance_max,
)

# closed forms P_0..P_4, the independent check for the recurrence
CLOSED_FORMS = [
    lambda x: np.ones_like(x),
    lambda x: x,
    lambda x: (3 * x**2 - 1) / 2,
    lambda x: (5 * x**3 - 3 * x) / 2,
    lambda x: (35 * x**4 - 30 * x**2 + 3) / 8,
]


def central_diff(f, x, h=1e-6):
    return (f(x + h) - f(x - h)) / (2 * h)


class TestLegendre:
    def test_p0_is_one(self):
        assert legendre(0, 0.3) == 1.0

    def test_p1_at_minus_one(self):
        assert legendre(1, -1.0) == -1.0

    def test_p2_half_matches_closed_form(self):
        assert_allclose(legendre(2, 0.5), CLOSED_FORMS[2](0.5), rtol=1e-15)
        assert legendre(2, 0.5) == -0.125

    @pytest.mark.parametrize("j", range(9))
    def test_endpoint_values(self, j):
        assert legendre(j, 1.0) == 1.0
        assert legendre(j, -1.0) == (-1.0) ** j

    @pytest.mark.parametrize("j", range(5))
    def test_recurrence_vs_closed_form(self, j):
        x = np.linspace(-1, 1, 1000)
        assert_allclose(legendre(j, x), CLOSED_FORMS[j](x), atol=1e-13)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            legendre(2, 1.1)
        # within tolerance is clamped, not rejected
        assert legendre(3, 1.0 + 1e-13) == 1.0


class TestLegendreDeriv:
    def test_p1_prime(self):
        assert legendre_deriv(1, 0.7, 1) == 1.0

    @pytest.mark.parametrize("j", range(1, 7))
    def test_endpoint_first_derivative_vs_finite_difference(self, j):
        # oracle: one-sided finite difference just inside the interval
        h = 1e-6
        fd = (legendre(j, 1.0) - legendre(j, 1.0 - h)) / h
        assert_allclose(legendre_deriv(j, 1.0, 1), j * (j + 1) / 2, rtol=1e-12)
        assert_allclose(legendre_deriv(j, 1.0, 1), fd, rtol=1e-4)

    def test_p2_second_derivative(self):
        assert legendre_deriv(2, 0.0, 2) == 3.0

    @pytest.mark.parametrize("j", range(7))
    def test_interior_first_derivative_vs_central_difference(self, j):
        x = np.linspace(-0.95, 0.95, 41)
        fd = central_diff(lambda t: legendre(j, t), x)
        assert_allclose(legendre_deriv(j, x, 1), fd, atol=1e-8, rtol=1e-8)

    @pytest.mark.parametrize("j", range(7))
    def test_interior_second_derivative_vs_central_difference(self, j):
        x = np.linspace(-0.9, 0.9, 31)
        fd = central_diff(lambda t: legendre_deriv(j, t, 1), x, h=1e-5)
        assert_allclose(legendre_deriv(j, x, 2), fd, atol=1e-5, rtol=1e-5)

    @pytest.mark.parametrize("j", range(1, 7))
    def test_endpoint_second_derivative(self, j):
        expected = (j - 1) * j * (j + 1) * (j + 2) / 8
        assert_allclose(legendre_deriv(j, 1.0, 2), expected, rtol=1e-12)
        assert_allclose(legendre_deriv(j, -1.0, 2), (-1) ** j * expected, rtol=1e-12)


class TestPsi:
    def test_constant_function(self):
        spec = BasisSpec(J=4)
        assert_allclose(psi(spec, 0, 0.2), 1 / np.sqrt(2), rtol=1e-15)

    @pytest.mark.parametrize("j", range(5))
    def test_maximum_at_right_endpoint(self, j):
        spec = BasisSpec(J=4)
        assert_allclose(psi(spec, j, 1.0), np.sqrt((2 * j + 1) / 2), rtol=1e-15)

    def test_rescaled_constant(self):
        spec = BasisSpec(J=4, interval=(-3.0, 3.0))
        assert_allclose(psi(spec, 0, 0.0), 1 / np.sqrt(6), rtol=1e-15)

    @pytest.mark.parametrize("spec", [BasisSpec(4), BasisSpec(5, (-3.0, 3.0)), BasisSpec(3, (0.5, 2.75))])
    def test_endpoint_identity(self, spec):
        for j in range(spec.J + 1):
            assert_allclose(psi(spec, j, spec.B), np.sqrt((2 * j + 1) / spec.width), rtol=1e-14)

    def test_symmetry(self):
        spec = BasisSpec(J=6, interval=(-2.0, 5.0))
        mid = 0.5 * (spec.A + spec.B)
        x = np.linspace(spec.A, spec.B, 101)
        for j in range(spec.J + 1):
            assert_allclose(psi(spec, j, 2 * mid - x), (-1.0) ** j * psi(spec, j, x), atol=1e-12)

    def test_index_error(self):
        with pytest.raises(IndexError):
            psi(BasisSpec(J=2), 3, 0.0)

    @pytest.mark.parametrize("spec", [BasisSpec(4), BasisSpec(5, (-3.0, 3.0)), BasisSpec(3, (0.5, 2.75))])
    def test_orthonormality_by_quadrature(self, spec):
        x, w = gauss_legendre_nodes(128, spec.A, spec.B)
        for i in range(spec.J + 1):
            for j in range(spec.J + 1):
                val = np.sum(w * psi(spec, i, x) * psi(spec, j, x))
                assert abs(val - (1.0 if i == j else 0.0)) < 1e-10

    def test_deriv_vs_central_difference(self):
        spec = BasisSpec(J=5, interval=(-3.0, 3.0))
        x = np.linspace(-2.8, 2.8, 31)
        for j in range(spec.J + 1):
            fd = central_diff(lambda t: psi(spec, j, t), x, h=1e-6)
            assert_allclose(psi_deriv(spec, j, x, 1), fd, atol=1e-7, rtol=1e-7)


class TestPsiCell:
    def test_degenerate_partition_matches_psi(self):
        spec = BasisSpec(J=4, interval=(-3.0, 3.0), M=1)
        x = np.linspace(-3, 3, 50)
        for j in range(5):
            assert_allclose(psi_cell(spec, 1, j, x), psi(spec, j, x), rtol=1e-14)

    @pytest.mark.parametrize("spec", [BasisSpec(4, (-3.0, 3.0), M=7), BasisSpec(2, (-1.0, 1.0), M=3)])
    def test_cell_orthonormality_by_quadrature(self, spec):
        for m in range(1, spec.M + 1):
            a, b = spec.cell_bounds(m)
            x, w = gauss_legendre_nodes(128, a, b)
            for i in range(spec.J + 1):
                for j in range(spec.J + 1):
                    val = np.sum(w * psi_cell(spec, m, i, x) * psi_cell(spec, m, j, x))
                    assert abs(val - (1.0 if i == j else 0.0)) < 1e-10

    def test_mean_zero_for_higher_modes(self):
        spec = BasisSpec(J=4, interval=(-3.0, 3.0), M=5)
        for m in (1, 3, 5):
            a, b = spec.cell_bounds(m)
            x, w = gauss_legendre_nodes(64, a, b)
            for j in range(1, 5):
                assert abs(np.sum(w * psi_cell(spec, m, j, x))) < 1e-12

    def test_constant_mode_integral_vs_quadrature(self):
        # oracle: 64-node Gauss-Legendre on the cell; exact value is
        # |I_m| * sqrt(M) * psi_0 = sqrt(|I_m|)
        spec = BasisSpec(J=3, interval=(-3.0, 3.0), M=4)
        for m in range(1, 5):
            a, b = spec.cell_bounds(m)
            x, w = gauss_legendre_nodes(64, a, b)
            quad = np.sum(w * psi_cell(spec, m, 0, x))
            assert_allclose(quad, np.sqrt(spec.delta), rtol=1e-13)

    def test_sup_matches_grid_oracle(self):
        spec = BasisSpec(J=4, interval=(-3.0, 3.0), M=9)
        m = 4
        a, b = spec.cell_bounds(m)
        grid = np.linspace(a, b, 10_000)
        for j in range(5):
            grid_max = np.max(np.abs(psi_cell(spec, m, j, grid)))
            expected = np.sqrt(spec.M) * np.sqrt((2 * j + 1) / 2) * np.sqrt(2 / spec.width)
            assert_allclose(grid_max, expected, rtol=1e-6)

    def test_zero_outside_cell(self):
        spec = BasisSpec(J=2, interval=(0.0, 1.0), M=4)
        assert psi_cell(spec, 2, 1, 0.9) == 0.0
        assert psi_cell(spec, 2, 1, 0.1) == 0.0

    def test_index_errors(self):
        spec = BasisSpec(J=2, interval=(0.0, 1.0), M=4)
        with pytest.raises(IndexError):
            psi_cell(spec, 0, 1, 0.5)
        with pytest.raises(IndexError):
            psi_cell(spec, 5, 1, 0.5)
        with pytest.raises(IndexError):
            psi_cell(spec, 1, 3, 0.1)


class TestCellAssignment:
    def test_left_closed_rule(self):
        spec = BasisSpec(J=1, interval=(0.0, 1.0), M=4)
        assert spec.cell_index(0.0) == 1
        # interior boundaries belong to the cell on the right
        assert spec.cell_index(0.25) == 2
        assert spec.cell_index(0.5) == 3
        # B itself stays in the last cell
        assert spec.cell_index(1.0) == 4
        with pytest.raises(ValueError):
            spec.cell_index(1.5)


class TestSigma2:
    def test_reference_interval_j4(self):
        spec = BasisSpec(J=4)
        assert_allclose(sigma2(spec, 1.0), 12.5, rtol=1e-14)

    def test_single_constant_function(self):
        spec = BasisSpec(J=0)
        for t in (-1.0, 0.0, 0.7):
            assert_allclose(sigma2(spec, t), 0.5, rtol=1e-15)

    def test_rescaled_interval(self):
        spec = BasisSpec(J=4, interval=(-3.0, 3.0))
        assert_allclose(sigma2(spec, 3.0), 25 / 6, rtol=1e-14)


class TestVarianceMax:
    def test_reference_interval_j4(self):
        S, argmax = variance_max(BasisSpec(J=4))
        assert_allclose(S, 12.5, atol=1e-9)
        assert_allclose(argmax, [-1.0, 1.0], atol=1e-9)

    def test_rescaled_interval_j4(self):
        S, argmax = variance_max(BasisSpec(J=4, interval=(-3.0, 3.0)))
        assert_allclose(S, 25 / 6, atol=1e-9)
        assert_allclose(argmax, [-3.0, 3.0], atol=1e-9)

    @pytest.mark.parametrize("J,interval", [(1, (-1.0, 1.0)), (3, (0.0, 2.0)), (6, (-3.0, 3.0))])
    def test_generic_path_agrees_with_analytic(self, J, interval):
        S, argmax = variance_max(BasisSpec(J=J, interval=interval))
        width = interval[1] - interval[0]
        assert abs(S - (J + 1) ** 2 / width) < 1e-9
        assert_allclose(argmax, list(interval), atol=1e-9)

    def test_constant_variance_reports_plateau(self):
        with pytest.raises(PlateauError) as exc:
            variance_max(BasisSpec(J=0))
        assert_allclose(exc.value.S, 0.5, rtol=1e-12)
