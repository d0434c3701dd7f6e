"""Tests for the MTC basis: grid geometry, closed forms, orthonormality."""

import math

import numpy as np
import pytest
from scipy import integrate

from spectral_operations.basis import (
    basis_matrix,
    eval_expansion,
    eval_phi,
    fourier_image,
    half_angle,
    make_grid,
)
from spectral_operations.errors import ConfigurationError


class TestGrid:
    """Collocation nodes and weights."""

    @pytest.mark.parametrize("p", [1, 4, 16])
    def test_node_count(self, p):
        grid = make_grid(p, 2.0)
        assert grid.nodes.shape == (2 * p,)
        assert grid.size == 2 * p
        assert grid.n == 2 * p - 1

    def test_nodes_mirror_exactly(self):
        grid = make_grid(16, 8.0)
        assert np.array_equal(grid.nodes, -grid.nodes[::-1])

    def test_nodes_decreasing(self):
        grid = make_grid(16, 8.0)
        assert np.all(np.diff(grid.nodes) < 0)

    def test_nodes_match_cotangent_formula(self):
        p, ell = 8, 3.0
        grid = make_grid(p, ell)
        m = np.arange(2 * p)
        expected = 0.5 * ell / np.tan((2 * m + 1) * np.pi / (4 * p))
        assert np.allclose(grid.nodes, expected, rtol=1e-13, atol=1e-13)

    def test_weights_positive(self):
        assert np.all(make_grid(8, 1.0).weights > 0)

    def test_arrays_read_only(self):
        grid = make_grid(4, 1.0)
        with pytest.raises(ValueError):
            grid.nodes[0] = 0.0

    @pytest.mark.parametrize("p", [0, -1, 2.5])
    def test_rejects_bad_p(self, p):
        with pytest.raises(ConfigurationError, match="grid.p"):
            make_grid(p, 1.0)

    @pytest.mark.parametrize("ell", [0.0, -1.0, float("inf")])
    def test_rejects_bad_ell(self, ell):
        with pytest.raises(ConfigurationError, match="grid.ell"):
            make_grid(4, ell)


class TestBasisFunctions:
    """Closed forms and parity."""

    def test_half_angle_range(self):
        theta = half_angle(np.array([-1e6, -1.0, 0.0, 1.0, 1e6]), 2.0)
        assert np.all((theta > 0) & (theta < 2 * np.pi))
        assert math.isclose(theta[2], np.pi)

    def test_phi0_is_lorentzian(self):
        ell = 2.0
        x = np.linspace(-5, 5, 11)
        expected = 2 / math.sqrt(math.pi * ell) * ell**2 / (ell**2 + 4 * x**2)
        assert np.allclose(eval_phi(0, x, ell), expected, atol=1e-15)

    def test_phi1_closed_form(self):
        ell = 2.0
        x = np.linspace(-5, 5, 11)
        expected = 1 / math.sqrt(math.pi * ell) * 4 * x * ell / (ell**2 + 4 * x**2)
        assert np.allclose(eval_phi(1, x, ell), expected, atol=1e-15)

    def test_negative_indices(self):
        x = np.linspace(-3, 3, 7)
        assert np.allclose(eval_phi(-2, x, 1.0), -eval_phi(0, x, 1.0))
        assert np.allclose(eval_phi(-1, x, 1.0), eval_phi(1, x, 1.0))
        assert np.allclose(eval_phi(-4, x, 1.0), -eval_phi(2, x, 1.0))

    @pytest.mark.parametrize("k", range(6))
    def test_parity(self, k):
        x = np.linspace(0.1, 7.0, 15)
        sign = 1.0 if k % 2 == 0 else -1.0
        assert np.allclose(eval_phi(k, -x, 1.5), sign * eval_phi(k, x, 1.5), atol=1e-14)

    def test_basis_matrix_columns(self):
        x = np.linspace(-2, 2, 9)
        B = basis_matrix(6, x, 1.0)
        for k in range(6):
            assert np.allclose(B[:, k], eval_phi(k, x, 1.0), atol=1e-15)

    def test_eval_expansion_matches_sum(self, rng):
        ell = 4.0
        a = rng.standard_normal(10)
        x = np.linspace(-20, 20, 41)
        direct = sum(a[k] * eval_phi(k, x, ell) for k in range(10))
        assert np.allclose(eval_expansion(a, x, ell), direct, atol=1e-13)

    def test_eval_expansion_rejects_odd_length(self):
        with pytest.raises(ConfigurationError):
            eval_expansion(np.ones(3), 0.0, 1.0)


class TestOrthonormality:
    """Continuous and discrete orthonormality."""

    @pytest.mark.parametrize("j,k", [(0, 0), (0, 1), (1, 1), (0, 2), (2, 3), (3, 3)])
    def test_continuous(self, j, k):
        ell = 2.0
        value, _ = integrate.quad(
            lambda x: eval_phi(j, x, ell) * eval_phi(k, x, ell), -np.inf, np.inf, epsabs=1e-12, limit=400
        )
        assert math.isclose(value, float(j == k), abs_tol=1e-7)

    @pytest.mark.parametrize("p,ell", [(1, 1.0), (4, 2.0), (16, 8.0), (33, 0.5)])
    def test_discrete(self, p, ell):
        grid = make_grid(p, ell)
        B = basis_matrix(grid.size, grid.nodes, ell)
        gram = B.T @ (grid.weights[:, None] * B)
        assert np.allclose(gram, np.eye(grid.size), atol=1e-12)


class TestFourierImage:
    """Fourier transforms of the basis are Laguerre functions."""

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    @pytest.mark.parametrize("xi", [0.3, 1.1])
    def test_against_quadrature(self, k, xi):
        ell = 2.0
        f = lambda x: eval_phi(k, x, ell)  # noqa: E731
        if k % 2 == 0:
            half, _ = integrate.quad(f, 0, np.inf, weight="cos", wvar=xi)
            expected = 2 * half / math.sqrt(2 * math.pi)
        else:
            half, _ = integrate.quad(f, 0, np.inf, weight="sin", wvar=xi)
            expected = -1j * 2 * half / math.sqrt(2 * math.pi)
        assert np.isclose(fourier_image(k, xi, ell), expected, atol=1e-7)

    def test_odd_image_sign_flips(self):
        assert np.isclose(fourier_image(1, -0.5, 1.0), -fourier_image(1, 0.5, 1.0))


class TestProducts:
    """Products of basis functions stay in the basis."""

    @pytest.mark.parametrize("k,m", [(0, 0), (1, 2), (3, 1), (2, 2)])
    def test_product_identities(self, k, m):
        ell = 1.5
        x = np.linspace(-6, 6, 25)
        phi = lambda j: eval_phi(j, x, ell)  # noqa: E731
        scale = 1.0 / (2.0 * math.sqrt(math.pi * ell))
        s, d = k + m, m - k
        even_even = scale * (phi(2 * s) - phi(2 * s + 2) + phi(2 * d) - phi(2 * d - 2))
        odd_odd = scale * (-phi(2 * s) + phi(2 * s + 2) + phi(2 * d) - phi(2 * d - 2))
        mixed = scale * (phi(2 * s + 1) - phi(2 * s + 3) + phi(2 * d + 1) - phi(2 * d - 1))
        assert np.allclose(phi(2 * k) * phi(2 * m), even_even, atol=1e-14)
        assert np.allclose(phi(2 * k + 1) * phi(2 * m + 1), odd_odd, atol=1e-14)
        assert np.allclose(phi(2 * k) * phi(2 * m + 1), mixed, atol=1e-14)


class TestExpansionValues:
    def test_single_term_at_origin(self):
        a = np.zeros(4)
        a[0] = 1.0
        assert math.isclose(eval_expansion(a, 0.0, 1.0), 2 / math.sqrt(math.pi))

    def test_zero_field(self):
        assert np.all(eval_expansion(np.zeros(6), np.linspace(-3, 3, 5), 2.0) == 0.0)

    def test_lorentzian_is_one_mode(self):
        a = np.zeros(8)
        a[0] = math.sqrt(math.pi / 2)
        x = np.linspace(-10, 10, 21)
        assert np.allclose(eval_expansion(a, x, 2.0), 1 / (1 + x * x), atol=1e-12)
