"""
Tests for the Calogero-Moser dynamics
"""

import unittest
import os
import sys
import cmath
from fractions import Fraction

import numpy as np
import pytest

# Add parent directory to path to import module
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from cmdyn import (
    PhasePoint,
    asymptotic_momenta,
    conservation_report,
    ecm_n2_invariants,
    elliptic_hamiltonian,
    energy,
    eom_rhs,
    hamiltonians,
    integrate,
    krichever_lax,
    lax_residual,
    moment_map,
    moment_map_matrix,
    rational_lax,
    trajectory_rows,
    trig_gauge_E,
    trig_hamiltonian,
    trig_hamiltonian_quadrature,
)
from errors import PoleError, SingularConfigurationError
from specfun import weierstrass_p


class TestRationalLax(unittest.TestCase):
    """Test cases for the rational Lax pair and its traces"""

    def setUp(self):
        """Set up test environment"""
        self.rng = np.random.default_rng(20240521)
        self.pair = PhasePoint([-1.0, 1.0], [0.0, 0.0], 1.0)

    def test_phase_point_validation(self):
        """Positions and momenta must be vectors of equal length"""
        with self.assertRaises(ValueError):
            PhasePoint([0.0, 1.0], [0.0], 1.0)
        with self.assertRaises(ValueError):
            PhasePoint([], [], 1.0)
        self.assertTrue(PhasePoint([0.0], [1j], 1.0).is_complex)

    def test_single_particle(self):
        """No interaction for one particle"""
        L, A = rational_lax(PhasePoint([0.0], [3.0], 1.0))
        np.testing.assert_array_equal(L, [[3]])
        np.testing.assert_array_equal(A, [[0]])

    def test_two_particles(self):
        """L = [[0, -i/2], [i/2, 0]] with eigenvalues -1/2 and 1/2"""
        L, _ = rational_lax(self.pair)
        np.testing.assert_allclose(L, [[0, -0.5j], [0.5j, 0]], atol=1e-15)
        np.testing.assert_allclose(asymptotic_momenta(self.pair), [-0.5, 0.5], atol=1e-14)

    def test_hamiltonians(self):
        """H_k = Tr L^k / k"""
        values = hamiltonians(PhasePoint([0.3], [2.0], 1.0), 3)
        np.testing.assert_allclose(values, [2.0, 2.0, 8.0 / 3.0])
        values = hamiltonians(self.pair, 2)
        self.assertAlmostEqual(abs(values[0]), 0.0, places=14)
        self.assertAlmostEqual(abs(values[1] - 0.25), 0.0, places=14)
        with self.assertRaises(ValueError):
            hamiltonians(self.pair, 0)

    def test_lax_equation(self):
        """dL/dt = [A, L] for real and complex states, relative to the size of both sides"""
        self.assertEqual(lax_residual(PhasePoint([0.0], [1.0], 1.0)), 0.0)
        for N in (2, 3, 5):
            for _ in range(100):
                s = PhasePoint.random(self.rng, N, nu=1.3, complex_values=True)
                self.assertLessEqual(lax_residual(s), 1e-10)
        for _ in range(5):
            s = PhasePoint.random(self.rng, 2, nu=0.7)
            L, _ = rational_lax(s)
            self.assertLess(lax_residual(s, relative=False), 1e-12 * max(1.0, np.linalg.norm(L) ** 3))

    def test_lax_residual_scale_free(self):
        """Scaling momenta by 1e4 leaves the relative residual at rounding level"""
        base = PhasePoint([0.0, 0.7, 1.9], [1.0, -0.4, 0.3], 1.0)
        fast = PhasePoint(base.x, [1e4 * v for v in base.p], 1.0)
        self.assertLess(lax_residual(fast), 1e-12)
        self.assertGreaterEqual(lax_residual(fast, relative=False), lax_residual(fast))

    def test_coincident_positions(self):
        """Coincident positions are rejected"""
        with self.assertRaises(SingularConfigurationError):
            rational_lax(PhasePoint([0.0, 1e-10], [0.0, 0.0], 1.0))


class TestEquationsOfMotion(unittest.TestCase):
    """Test cases for the vector field and time integration"""

    def setUp(self):
        """Set up test environment"""
        self.rng = np.random.default_rng(7)

    def test_free_particle(self):
        """One particle moves freely for every kind"""
        s = PhasePoint([0.2], [1.5], 1.0)
        for kind in ("rational", "trig"):
            rhs = eom_rhs(s, kind)
            np.testing.assert_array_equal(rhs.x, [1.5])
            np.testing.assert_array_equal(rhs.p, [0.0])
        rhs = eom_rhs(s, "elliptic", tau=1j)
        self.assertEqual(rhs.p[0], 0)

    def test_two_body_force(self):
        """x = (-1, 1), p = 0, nu = 1: dp/dt = (-1/4, 1/4)"""
        rhs = eom_rhs(PhasePoint([-1.0, 1.0], [0.0, 0.0], 1.0))
        np.testing.assert_allclose(rhs.p, [-0.25, 0.25])
        np.testing.assert_array_equal(rhs.x, [0.0, 0.0])

    def test_free_motion(self):
        """x(1) = x(0) + 2 for p = 2"""
        trajectory = integrate(PhasePoint([0.5], [2.0], 1.0), t_end=1.0, dt=1e-3)
        self.assertAlmostEqual(trajectory.final().x[0], 2.5, delta=1e-12)
        self.assertEqual(len(trajectory), 1001)

    def test_rational_conservation(self):
        """All traces and the spectrum of L are conserved along the rational flow"""
        s = PhasePoint.random(self.rng, 3, nu=1.0, spacing=1.0)
        trajectory = integrate(s, "rational", t_end=1.0, dt=1e-3)
        report = conservation_report(trajectory, k_max=3)
        self.assertLess(max(report["hamiltonian_drift"]), 1e-8)
        self.assertLess(report["spectral_drift"], 1e-8)

    def test_integrators_agree(self):
        """RK4, leapfrog and DOP853 reach the same final state"""
        s = PhasePoint.random(self.rng, 3, nu=0.8, spacing=1.5)
        finals = [integrate(s, "rational", t_end=0.5, dt=1e-3, integrator=name).final() for name in
                  ("rk4", "leapfrog", "dop853")]
        np.testing.assert_allclose(finals[0].x, finals[2].x, atol=1e-9)
        np.testing.assert_allclose(finals[1].x, finals[2].x, atol=1e-5)

    def test_trig_energy(self):
        """The trigonometric energy is conserved"""
        s = PhasePoint.random_periodic(self.rng, 3, nu=0.5)
        report = conservation_report(integrate(s, "trig", t_end=0.2, dt=1e-4))
        self.assertLess(report["energy_drift"], 1e-8)

    def test_elliptic_energy(self):
        """The elliptic energy is conserved"""
        s = PhasePoint([0.0, 0.45], [0.3, -0.3], 1.0)
        report = conservation_report(integrate(s, "elliptic", t_end=0.2, dt=1e-4, tau=1j))
        self.assertLess(report["energy_drift"], 1e-8)

    def test_elliptic_hamiltonian(self):
        """Kinetic term plus nu^2 p(x_1 - x_2)"""
        s = PhasePoint([0.0, 0.45], [0.3, -0.3], 0.5)
        expected = 0.09 + 0.25 * weierstrass_p(-0.45, 1j)
        self.assertLess(abs(elliptic_hamiltonian(s, 1j) - expected), 1e-10)
        self.assertEqual(energy(s, "elliptic", 1j), elliptic_hamiltonian(s, 1j))

    def test_bad_arguments(self):
        """Unknown kinds, integrators and steps are rejected"""
        s = PhasePoint([0.0], [1.0], 1.0)
        with self.assertRaises(ValueError):
            integrate(s, "hyperbolic")
        with self.assertRaises(ValueError):
            integrate(s, integrator="euler")
        with self.assertRaises(ValueError):
            integrate(s, dt=0.0)
        with self.assertRaises(SingularConfigurationError):
            integrate(PhasePoint([0.0, 0.0], [1.0, 1.0], 1.0))

    def test_trajectory_rows(self):
        """CSV rows hold t, x, p and H_k in real and imaginary parts"""
        trajectory = integrate(PhasePoint([-1.0, 1.0], [0.0, 0.0], 1.0), t_end=0.01, dt=0.005)
        header, rows = trajectory_rows(trajectory, k_max=2)
        self.assertEqual(header[:3], ["t", "x_1_re", "x_1_im"])
        self.assertEqual(len(header), 1 + 4 + 4 + 4)
        self.assertEqual(len(rows), 3)
        self.assertTrue(all(len(row) == len(header) for row in rows))


class TestMomentMapAndGaugeField(unittest.TestCase):
    """Test cases for the moment map and the trigonometric gauge field"""

    def setUp(self):
        """Set up test environment"""
        self.rng = np.random.default_rng(11)

    def test_moment_map_examples(self):
        """P_12 = -2i, P_21 = 2i, z = sqrt(2) and mu = 0"""
        P, z = moment_map_matrix([0.0, 1.0], [0.0, 0.0], 2.0)
        self.assertAlmostEqual(P[0, 1], -2j)
        self.assertAlmostEqual(P[1, 0], 2j)
        np.testing.assert_allclose(z, [np.sqrt(2), np.sqrt(2)])
        np.testing.assert_allclose(moment_map(P, [0.0, 1.0], z, 2.0), np.zeros((2, 2)), atol=1e-14)
        P, z = moment_map_matrix([0.4], [1.0], 3.0)
        np.testing.assert_allclose(moment_map(P, [0.4], z, 3.0), [[0]], atol=1e-14)

    def test_moment_map_exact(self):
        """With exact rationals mu vanishes identically"""
        x = [Fraction(1, 3), Fraction(-2, 5), Fraction(7, 4)]
        p = [Fraction(1, 2), Fraction(0), Fraction(-3, 7)]
        P, z = moment_map_matrix(x, p, 1, exact=True)
        mu = moment_map(P, x, z, 1)
        self.assertTrue(mu.is_zero_matrix)

    def test_moment_map_validation(self):
        """Nonpositive couplings and coincident positions are rejected"""
        with self.assertRaises(ValueError):
            moment_map_matrix([0.0, 1.0], [0.0, 0.0], 0.0)
        with self.assertRaises(SingularConfigurationError):
            moment_map_matrix([1.0, 1.0], [0.0, 0.0], 1.0)

    def test_trig_hamiltonian(self):
        """x = (0, 1/2), p = 0, nu = 2 gives 1; one particle gives p^2/2"""
        self.assertAlmostEqual(trig_hamiltonian(PhasePoint([0.0, 0.5], [0.0, 0.0], 2.0)), 1.0, places=14)
        self.assertAlmostEqual(trig_hamiltonian(PhasePoint([0.3], [1.2], 1.0)), 0.72, places=14)

    def test_gauge_field_jump(self):
        """E(0) - E(2 pi) is nu off the diagonal and zero on it"""
        s = PhasePoint.random_periodic(self.rng, 3, nu=0.7)
        jump = trig_gauge_E(0.0, s) - trig_gauge_E(2 * np.pi, s)
        expected = 0.7 * (np.ones((3, 3)) - np.eye(3))
        np.testing.assert_allclose(jump, expected, atol=1e-12)

    def test_gauge_field_energy(self):
        """The averaged (1/2) Tr E^2 reproduces the trigonometric Hamiltonian"""
        s = PhasePoint.random_periodic(self.rng, 3, nu=0.7)
        grid = np.linspace(0.0, 2 * np.pi, 7)
        traces = [0.5 * np.trace(E @ E) for E in trig_gauge_E(grid, s)]
        np.testing.assert_allclose(traces, np.full(7, traces[0]), atol=1e-10)
        self.assertAlmostEqual(abs(trig_hamiltonian_quadrature(s) - trig_hamiltonian(s)), 0.0, places=8)


class TestEllipticSystem(unittest.TestCase):
    """Test cases for the Krichever Lax matrix and the two-body invariants"""

    def setUp(self):
        """Set up test environment"""
        self.tau = 0.1 + 1.1j
        self.state = PhasePoint([0.1 + 0.05j, 0.42 - 0.1j, 0.77 + 0.2j], [0.3, -0.2, 0.5], 0.9)
        self.rng = np.random.default_rng(3)

    def test_quasi_periodicity(self):
        """L(z + 1) = L(z) and L_ij(z + tau) = e^{-2 pi i x_ij} L_ij(z)"""
        z = 0.23 + 0.31j
        L = krichever_lax(z, self.state, self.tau)
        np.testing.assert_allclose(krichever_lax(z + 1, self.state, self.tau), L, rtol=1e-9, atol=1e-12)
        shifted = krichever_lax(z + self.tau, self.state, self.tau)
        x = self.state.x
        for i in range(3):
            for j in range(3):
                factor = 1 if i == j else cmath.exp(-2j * cmath.pi * (x[i] - x[j]))
                self.assertLess(abs(shifted[i, j] - factor * L[i, j]), 1e-9 * max(1.0, abs(shifted[i, j])))

    def test_residue(self):
        """z L_ij(z) -> nu at z = 0"""
        small = 1e-6
        L = krichever_lax(small, self.state, self.tau)
        for i in range(3):
            for j in range(3):
                if i != j:
                    self.assertLess(abs(small * L[i, j] - 0.9), 1e-5)
        with self.assertRaises(PoleError):
            krichever_lax(1.0, self.state, self.tau)

    def test_two_body_invariants(self):
        """B^2 = (u - A) prod (A - e_i) / nu, B = 0 at rest, B odd in p"""
        at_rest = ecm_n2_invariants(PhasePoint([0.1, 0.47], [0.0, 0.0], 1.0), 1j)
        self.assertEqual(at_rest.B, 0)
        self.assertEqual(at_rest.u, at_rest.A)
        for _ in range(5):
            x = self.rng.random(2) * 0.8
            p = self.rng.normal(size=2)
            if abs(x[0] - x[1]) < 0.05:
                continue
            inv = ecm_n2_invariants(PhasePoint(x, p, 1.0), 1j)
            self.assertLess(inv.residual, 1e-9 * max(1.0, abs(inv.B) ** 2))
            flipped = ecm_n2_invariants(PhasePoint(x, -p, 1.0), 1j)
            self.assertAlmostEqual(abs(flipped.B + inv.B), 0.0, places=10)
            self.assertAlmostEqual(abs(flipped.A - inv.A), 0.0, places=10)
            self.assertAlmostEqual(abs(flipped.u - inv.u), 0.0, places=10)
        with self.assertRaises(ValueError):
            ecm_n2_invariants(PhasePoint([0.1], [0.0], 1.0), 1j)

    def test_two_body_invariants_along_flow(self):
        """A two-body elliptic trajectory keeps u constant"""
        s = PhasePoint([0.0, 0.4], [0.25, -0.25], 1.0)
        trajectory = integrate(s, "elliptic", t_end=0.2, dt=1e-3, tau=1j)
        u0 = ecm_n2_invariants(trajectory[0], 1j).u
        u1 = ecm_n2_invariants(trajectory.final(), 1j).u
        self.assertLess(abs(u1 - u0), 1e-8)

    @pytest.mark.skipif(not os.environ.get("RUN_SLOW_TESTS"), reason="Skipping slow tests")
    def test_two_body_invariants_long_flow(self):
        """Over a longer elliptic trajectory u and the energy both stay constant"""
        s = PhasePoint([0.0, 0.4], [0.25, -0.25], 1.0)
        trajectory = integrate(s, "elliptic", t_end=2.0, dt=1e-3, tau=1j)
        u0 = ecm_n2_invariants(trajectory[0], 1j).u
        for k in range(0, len(trajectory), 500):
            self.assertLess(abs(ecm_n2_invariants(trajectory[k], 1j).u - u0), 1e-8)
        report = conservation_report(trajectory, k_max=2)
        self.assertLess(report["energy_drift"], 1e-7)


if __name__ == "__main__":
    unittest.main()
