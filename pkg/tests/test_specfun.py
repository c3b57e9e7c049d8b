"""
Tests for the special functions
"""

import unittest
import os
import sys
import cmath
import math

import numpy as np

# Add parent directory to path to import module
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import PoleError
from specfun import (
    H,
    K,
    EllipticCurveParams,
    TheoryKind,
    eisenstein_invariants,
    jacobi_theta_odd,
    set_precision,
    theta,
    theta_prime_zero,
    weierstrass_p,
    weierstrass_invariants,
    weierstrass_p_array,
)


def theta_series(z, tau, terms=30):
    """2 sum (-1)^n q^{(n+1/2)^2} sin((2n+1) pi z), q = e^{i pi tau}"""
    total = 0
    for n in range(terms):
        total += (-1) ** n * cmath.exp(1j * math.pi * tau * (n + 0.5) ** 2) * cmath.sin((2 * n + 1) * math.pi * z)
    return 2 * total


class TestTheta(unittest.TestCase):
    """Test cases for the measure kernel"""

    def setUp(self):
        """Set up test environment"""
        self.ell = TheoryKind("Ell", 0.3 + 0.1j)

    def test_rational_and_trigonometric(self):
        """theta is x for H and 1 - e^{-x} for K"""
        self.assertEqual(theta(2, H), 2)
        self.assertAlmostEqual(abs(theta(0.7, K) - (1 - math.exp(-0.7))), 0, places=14)

    def test_zero(self):
        """theta(0) vanishes for every kind"""
        for kind in (H, K, self.ell):
            self.assertEqual(abs(theta(0, kind)), 0)

    def test_zero_nome(self):
        """The elliptic kernel with p = 0 reduces to 1 - e^{-x}"""
        kind = TheoryKind("Ell", 0j)
        x = 0.4 - 0.3j
        self.assertAlmostEqual(abs(theta(x, kind) - (1 - cmath.exp(-x))), 0, places=14)

    def test_truncation_converged(self):
        """Ten more factors change the product by less than 1e-12"""
        x = 0.3 + 0.2j
        auto = theta(x, TheoryKind("Ell", 0.5))
        deeper = theta(x, TheoryKind("Ell", 0.5, n_max=80))
        self.assertLess(abs(auto - deeper), 1e-12)

    def test_invalid_nome(self):
        """|p| >= 1 is rejected"""
        with self.assertRaises(ValueError):
            TheoryKind("Ell", 1.0)
        with self.assertRaises(ValueError):
            TheoryKind.from_label("7d")


class TestWeierstrass(unittest.TestCase):
    """Test cases for the Weierstrass function and Jacobi theta"""

    def setUp(self):
        """Set up test environment"""
        self.tau = 1j
        self.curve = EllipticCurveParams.from_tau(self.tau)
        self.rng = np.random.default_rng(7)

    def test_even_and_laurent(self):
        """p is even and z^2 p(z) -> 1"""
        z = 0.23 + 0.11j
        self.assertLess(abs(weierstrass_p(z, self.tau) - weierstrass_p(-z, self.tau)), 1e-10)
        small = 1e-4
        self.assertLess(abs(small ** 2 * weierstrass_p(small, self.tau) - 1), 1e-7)

    def test_periodicity(self):
        """p is doubly periodic"""
        z = 0.31 + 0.17j
        base = weierstrass_p(z, self.tau)
        self.assertLess(abs(weierstrass_p(z + 1, self.tau) - base), 1e-9)
        self.assertLess(abs(weierstrass_p(z + self.tau, self.tau) - base), 1e-9)

    def test_differential_equation(self):
        """p'^2 = 4 p^3 - g2 p - g3 with invariants from the Eisenstein series"""
        g2, g3 = eisenstein_invariants(self.tau)
        for _ in range(10):
            z = complex(self.rng.random() * 0.8 + 0.1, self.rng.random() * 0.8 + 0.1)
            wp = weierstrass_p(z, self.tau)
            dwp = weierstrass_p(z, self.tau, derivative=1)
            residual = dwp ** 2 - (4 * wp ** 3 - g2 * wp - g3)
            self.assertLess(abs(residual) / max(1.0, abs(dwp) ** 2), 1e-10)

    def test_weierstrass_invariants(self):
        """weierstrass_invariants is the theta-constant curve"""
        curve = weierstrass_invariants(self.tau)
        self.assertEqual((curve.g2, curve.g3), (self.curve.g2, self.curve.g3))

    def test_invariants(self):
        """Theta and Eisenstein routes agree; e_i are roots summing to zero"""
        g2, g3 = eisenstein_invariants(self.tau)
        self.assertLess(abs(self.curve.g2 - g2) / abs(g2), 1e-10)
        self.assertLess(abs(self.curve.g3 - g3), 1e-8)
        self.assertLess(abs(sum(self.curve.roots())), 1e-9)
        for e in self.curve.roots():
            self.assertLess(abs(self.curve.cubic(e)), 1e-8)

    def test_lattice_point(self):
        """Evaluating at a lattice point raises PoleError"""
        with self.assertRaises(PoleError):
            weierstrass_p(1 + self.tau, self.tau)
        with self.assertRaises(PoleError):
            weierstrass_p_array([0.0], self.tau)

    def test_array_matches_mpmath(self):
        """The vectorized theta series matches the mpmath evaluation"""
        tau = 0.2 + 1.1j
        zs = np.array([0.3 + 0.1j, -0.45 + 0.5j, 1.7 - 2.1j])
        for derivative in (0, 1):
            fast = weierstrass_p_array(zs, tau, derivative)
            for z, value in zip(zs, fast):
                self.assertLess(abs(value - weierstrass_p(z, tau, derivative)), 1e-9 * max(1.0, abs(value)))

    def test_jacobi_theta(self):
        """Odd theta: zero at 0, oddness and quasi-periodicity against a direct series"""
        tau = 0.1 + 0.9j
        self.assertEqual(abs(jacobi_theta_odd(0, tau)), 0)
        for _ in range(10):
            z = complex(self.rng.normal() * 0.4, self.rng.normal() * 0.3)
            value = jacobi_theta_odd(z, tau)
            self.assertLess(abs(value + jacobi_theta_odd(-z, tau)), 1e-12)
            self.assertLess(abs(value - theta_series(z, tau)), 1e-10)
            shifted = jacobi_theta_odd(z + tau, tau)
            factor = -cmath.exp(-1j * math.pi * tau - 2j * math.pi * z)
            self.assertLess(abs(shifted - factor * value), 1e-9 * max(1.0, abs(shifted)))
        derivative = (jacobi_theta_odd(1e-6, tau) - jacobi_theta_odd(-1e-6, tau)) / 2e-6
        self.assertLess(abs(derivative - theta_prime_zero(tau)), 1e-6)

    def test_precision_context(self):
        """Extended precision evaluation agrees with double precision"""
        with set_precision(40):
            value = weierstrass_p(0.3 + 0.2j, self.tau, as_mpc=True)
        self.assertLess(abs(complex(value) - weierstrass_p(0.3 + 0.2j, self.tau)), 1e-12)

    def test_invalid_tau(self):
        """Im tau must be positive"""
        with self.assertRaises(ValueError):
            weierstrass_p(0.3, -1j)


if __name__ == "__main__":
    unittest.main()
