"""Basis functions, coupling tensors, projection and reconstruction."""

import numpy as np
import pytest
from numpy.polynomial import legendre as npleg
from scipy.special import eval_sh_legendre

from swmoment import basis
from swmoment.verify import oracle_tensors


def gauss01(n):
    x, w = npleg.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


class TestLegendrePhi:
    def test_phi0_is_one(self):
        assert basis.legendre_phi(0, 0.37) == 1.0

    def test_normalized_at_bottom(self):
        assert basis.legendre_phi(1, 0.0) == 1.0

    def test_phi1_at_top(self):
        assert basis.legendre_phi(1, 1.0) == -1.0

    def test_phi2_midpoint(self):
        assert basis.legendre_phi(2, 0.5) == -0.5

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            basis.legendre_phi(1, -0.1)
        with pytest.raises(ValueError):
            basis.legendre_phi(1, 1.1)
        with pytest.raises(ValueError):
            basis.legendre_phi(-1, 0.5)

    def test_matches_shifted_legendre(self):
        # phi_j(zeta) equals the shifted Legendre polynomial at 1 - zeta
        z = np.linspace(0.0, 1.0, 33)
        for j in range(7):
            ours = basis.legendre_phi(j, z)
            ref = eval_sh_legendre(j, 1.0 - z)
            np.testing.assert_allclose(ours, ref, atol=1e-13)

    def test_orthogonality(self):
        z, w = gauss01(32)
        for i in range(7):
            for j in range(7):
                val = np.dot(w, basis.legendre_phi(i, z) * basis.legendre_phi(j, z))
                want = (1.0 / (2 * i + 1)) if i == j else 0.0
                assert abs(val - want) < 1e-13


class TestBuildTensors:
    def test_c11_exact(self):
        assert basis.build_tensors(1).c[0, 0] == 4.0

    def test_a111_zero(self):
        # integrand (1-2 zeta)^3 is odd about zeta = 1/2
        assert basis.build_tensors(1).a[0, 0, 0] == 0.0

    def test_frozen_n2_entries(self):
        ten = basis.build_tensors(2)
        np.testing.assert_allclose(ten.a[0, 1, 0], 2.0 / 5.0, rtol=1e-15)
        np.testing.assert_allclose(ten.a[1, 0, 0], 2.0 / 3.0, rtol=1e-15)
        np.testing.assert_allclose(ten.a[1, 1, 1], 2.0 / 7.0, rtol=1e-15)
        np.testing.assert_allclose(ten.b[0, 1, 0], -1.0 / 5.0, rtol=1e-15)
        np.testing.assert_allclose(ten.b[0, 0, 1], 1.0 / 5.0, rtol=1e-15)
        np.testing.assert_allclose(ten.b[1, 0, 0], -1.0, rtol=1e-15)
        np.testing.assert_allclose(ten.b[1, 1, 1], -1.0 / 7.0, rtol=1e-15)
        assert ten.c[0, 1] == 0.0
        np.testing.assert_allclose(ten.c[1, 1], 12.0, rtol=1e-15)

    @pytest.mark.parametrize("order", [0, 1, 2, 3, 4])
    def test_against_quadrature_oracle(self, order):
        ten = basis.build_tensors(order)
        a, b, c = oracle_tensors(order)
        if order:
            assert np.abs(ten.a - a).max() <= 1e-12
            assert np.abs(ten.b - b).max() <= 1e-12
            assert np.abs(ten.c - c).max() <= 1e-12

    def test_symmetries(self):
        ten = basis.build_tensors(4)
        assert np.array_equal(ten.a, np.swapaxes(ten.a, 1, 2))
        assert np.array_equal(ten.c, ten.c.T)
        assert np.all(np.isfinite(ten.a))
        assert np.all(np.isfinite(ten.b))

    def test_read_only_and_shared(self):
        ten = basis.shared_tensors(2)
        assert ten is basis.shared_tensors(2)
        with pytest.raises(ValueError):
            ten.a[0, 0, 0] = 1.0

    def test_negative_order(self):
        with pytest.raises(ValueError):
            basis.build_tensors(-1)


class TestProjectProfile:
    def test_constant(self):
        coeffs = basis.project_profile(lambda z: 2.5, 3)
        assert abs(coeffs.mean - 2.5) < 1e-13
        np.testing.assert_allclose(coeffs.alphas, 0.0, atol=1e-13)

    def test_linear_shear(self):
        # u(zeta) = (H hhat / 4U) zeta with H=1.5, U=100, hhat=1
        coeffs = basis.project_profile(lambda z: 1.5 / 400.0 * z, 2)
        np.testing.assert_allclose(coeffs.mean, 1.875e-3, rtol=1e-13)
        np.testing.assert_allclose(coeffs.alphas[0], -1.875e-3, rtol=1e-13)
        assert abs(coeffs.alphas[1]) < 1e-15

    def test_projects_phi2_onto_itself(self):
        coeffs = basis.project_profile(lambda z: basis.legendre_phi(2, z), 2)
        assert abs(coeffs.mean) < 1e-13
        np.testing.assert_allclose(coeffs.alphas, [0.0, 1.0], atol=1e-13)

    @pytest.mark.filterwarnings("ignore::UserWarning")
    def test_tabulated_linear_profile(self):
        # trapezoid is exact for the mean (linear integrand); the first
        # moment integrand is quadratic, accurate to O(dz^2)
        z = np.linspace(0.0, 1.0, 513)
        got = basis.project_profile((z, 1.5 / 400.0 * z), 1)
        np.testing.assert_allclose(got.mean, 1.875e-3, rtol=1e-12)
        np.testing.assert_allclose(got.alphas[0], -1.875e-3, rtol=1e-4)

    @pytest.mark.filterwarnings("ignore::UserWarning")
    def test_tabulated_matches_callable(self):
        z = np.linspace(0.0, 1.0, 4097)
        u = 0.3 + 0.2 * z - 0.7 * z * z
        want = basis.project_profile(lambda s: 0.3 + 0.2 * s - 0.7 * s * s, 2)
        got = basis.project_profile((z, u), 2)
        assert abs(got.mean - want.mean) < 1e-7
        np.testing.assert_allclose(got.alphas, want.alphas, atol=1e-6)

    def test_tabulated_warns_when_coarse(self):
        z = np.linspace(0.0, 1.0, 5)
        with pytest.warns(UserWarning):
            basis.project_profile((z, np.sin(3 * z)), 1)

    def test_degenerate_tabulation(self):
        with pytest.raises(ValueError):
            basis.project_profile((np.array([0.5]), np.array([1.0])), 1)
        with pytest.raises(ValueError):
            basis.project_profile((np.array([0.0, 0.5]), np.array([1.0, 2.0])), 1)
        with pytest.raises(ValueError):
            basis.project_profile((np.array([0.0, 0.6, 0.4, 1.0]), np.zeros(4)), 1)


class TestReconstruct:
    def test_constant(self):
        coeffs = basis.MomentCoefficients(mean=3.1, alphas=np.zeros(0))
        assert basis.reconstruct_velocity(coeffs, 0.42) == 3.1

    def test_bottom_value_is_mean_plus_alpha_sum(self):
        coeffs = basis.MomentCoefficients(mean=0.2, alphas=np.array([0.05]))
        assert abs(basis.reconstruct_velocity(coeffs, 0.0) - 0.25) < 1e-15

    def test_out_of_range(self):
        coeffs = basis.MomentCoefficients(mean=0.0, alphas=np.zeros(1))
        with pytest.raises(ValueError):
            basis.reconstruct_velocity(coeffs, 1.5)

    @pytest.mark.parametrize("order", [1, 2, 3, 4])
    def test_projection_roundtrip_identity(self, order):
        rng = np.random.default_rng(7 + order)
        poly = np.polynomial.Polynomial(rng.uniform(-1, 1, order + 1))
        coeffs = basis.project_profile(poly, order)
        z = np.linspace(0.0, 1.0, 101)
        back = basis.reconstruct_velocity(coeffs, z)
        assert np.abs(back - poly(z)).max() <= 1e-12
