"""
Tests for spectral curves and the Lax operator of the rational case
"""

import unittest
import os
import sys

import numpy as np
import sympy

# Add parent directory to path to import module
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import NumericalError, PoleError
from spectral import (
    DiagonalData,
    GaudinData,
    build_D,
    cauchy_reconstruction_error,
    char_poly_check,
    curve_points,
    cz_matrix,
    det_one_minus_cz_a,
    gaudin_lax,
    lax_from_D,
    residues_and_rank,
    spectral_curve,
    spectral_curve_expansion,
)


class TestCompanionMatrix(unittest.TestCase):
    """Test cases for C_z and det(1 - C_z A)"""

    def test_small_example(self):
        """N = 2, z = 4: [[0, 1], [1/4, 0]]"""
        np.testing.assert_allclose(cz_matrix(4, 2), [[0, 1], [0.25, 0]])
        np.testing.assert_allclose(cz_matrix(3, 1), [[1 / 3]])
        with self.assertRaises(ValueError):
            cz_matrix(0, 2)

    def test_power(self):
        """C_z^N = z^{-1} times the identity"""
        z = 1.7 - 0.4j
        C = cz_matrix(z, 4)
        np.testing.assert_allclose(np.linalg.matrix_power(C, 4), np.eye(4) / z, atol=1e-14)

    def test_determinant(self):
        """det(1 - C_z diag(2, 3, 5)) at z = 60 is 1/2"""
        self.assertAlmostEqual(abs(det_one_minus_cz_a(60, [2, 3, 5]) - 0.5), 0.0, places=13)
        self.assertEqual(det_one_minus_cz_a(60, [2, 3, 5], exact=True), sympy.Rational(1, 2))


class TestSpectralCurve(unittest.TestCase):
    """Test cases for D(z, x) and the spectral curve"""

    def setUp(self):
        """Set up test environment"""
        self.rng = np.random.default_rng(20240521)
        N, r = 3, 2
        Z = np.exp(2j * np.pi * self.rng.random((r + 1, N))) * (1 + self.rng.random((r + 1, N)))
        B = self.rng.normal(size=(r + 2, N)) + 1j * self.rng.normal(size=(r + 2, N))
        self.data = DiagonalData.linear(Z, B)

    def test_shapes(self):
        """N and r are read off Z"""
        self.assertEqual(self.data.N, 3)
        self.assertEqual(self.data.r, 2)
        with self.assertRaises(ValueError):
            DiagonalData([[1.0, 0.0]], lambda x: np.ones((2, 2)))

    def test_determinant_is_curve(self):
        """det D(z, x) equals R(x, z) and its symmetric-function expansion"""
        for _ in range(5):
            x = complex(*self.rng.normal(size=2)) * 2
            z = complex(*self.rng.normal(size=2)) + 3
            det = np.linalg.det(build_D(z, x, self.data))
            scalars = self.data.scalars(x)
            z_list = self.data.z_values()
            curve = spectral_curve(x, z, scalars, z_list)
            expansion = spectral_curve_expansion(x, z, scalars, z_list)
            self.assertLess(abs(det - curve), 1e-9 * max(1.0, abs(curve)))
            self.assertLess(abs(expansion - curve), 1e-9 * max(1.0, abs(curve)))

    def test_curve_validation(self):
        """z = 0 and mismatched inputs are rejected"""
        with self.assertRaises(ValueError):
            spectral_curve(1.0, 0, [1, 2], [1])
        with self.assertRaises(ValueError):
            spectral_curve(1.0, 1, [1, 2, 3], [1])
        with self.assertRaises(PoleError):
            spectral_curve(1.0, 1, [1, 0, 3], [1, 2])


class TestGaudinLax(unittest.TestCase):
    """Test cases for L(z) = -D_0^{-1} D_1"""

    def setUp(self):
        """Set up test environment"""
        self.rng = np.random.default_rng(5)
        self.data = GaudinData.random(3, 1, self.rng)

    def test_single_site(self):
        """N = 1, r = 0: L = -(b_0 z - z_0 b_1) / (z - z_0)"""
        z0, b0, b1 = 2.0 + 0.5j, 0.3 - 1.1j, -0.7 + 0.2j
        data = GaudinData([[z0]], [[b0], [b1]])
        for z in (4.0, 1.0 - 2.0j, -3.0 + 0.1j):
            L = gaudin_lax(data)(z)
            self.assertLess(abs(L[0, 0] + (b0 * z - z0 * b1) / (z - z0)), 1e-12)

    def test_poles(self):
        """det D_0(z) = prod (1 - z_i / z)"""
        z = 2.0 + 1.0j
        expected = np.prod(1 - self.data.poles() / z)
        self.assertLess(abs(np.linalg.det(self.data.D0(z)) - expected), 1e-12 * max(1.0, abs(expected)))
        with self.assertRaises(PoleError):
            lax_from_D(self.data.D, self.data.poles()[0], self.data.poles())

    def test_characteristic_polynomial(self):
        """det(x - L(z)) = R(x, z) / det D_0(z)"""
        for _ in range(5):
            x = complex(*self.rng.normal(size=2))
            z = complex(*self.rng.normal(size=2)) * 3
            self.assertLess(char_poly_check(self.data, x, z), 1e-9)

    def test_curve_points(self):
        """Roots of R(., z) are zeros of the curve"""
        z = 1.5 - 0.5j
        for x in curve_points(self.data, z):
            scale = max(1.0, abs(np.linalg.det(self.data.D0(z))) * max(1.0, abs(x)) ** self.data.N)
            self.assertLess(abs(self.data.curve(x, z)) / scale, 1e-8)
        self.assertEqual(len(curve_points(self.data, z, count=2)), 2)

    def test_rank_one_residues(self):
        """Residues at the poles z_i have rank one; Richardson estimates are nearly rank one"""
        L = gaudin_lax(self.data)
        for info in residues_and_rank(L, self.data.poles()):
            self.assertEqual(info.rank, 1)
            self.assertLess(info.sigma_ratio, 1e-10)
        for info in residues_and_rank(L, self.data.poles(), method="richardson", radius=1e-4):
            self.assertLess(info.sigma_ratio, 1e-6)
        with self.assertRaises(ValueError):
            residues_and_rank(L, self.data.poles(), method="simpson")

    def test_coalescing_poles(self):
        """Poles closer than ten radii are refused"""
        L = gaudin_lax(self.data)
        with self.assertRaises(NumericalError):
            residues_and_rank(L, [5.0, 5.0 + 1e-3], radius=1e-3)

    def test_cauchy_reconstruction(self):
        """Subtracting the pole parts leaves a function analytic around the poles"""
        L = gaudin_lax(self.data)
        infos = residues_and_rank(L, self.data.poles())
        error = cauchy_reconstruction_error(L, infos, center=5.45, radius=1.3)
        self.assertLess(error, 1e-8)

    def test_nonlinear_D(self):
        """lax_from_D refuses a D that is not linear in x"""
        D = lambda z, x: np.array([[1.0 + x ** 2]])
        with self.assertRaises(NumericalError):
            lax_from_D(D, 1.0)

    def test_serialization(self):
        """Z and B survive the JSON form"""
        restored = GaudinData.from_dict(self.data.to_dict())
        np.testing.assert_allclose(restored.Z, self.data.Z)
        np.testing.assert_allclose(restored.B, self.data.B)


if __name__ == "__main__":
    unittest.main()
