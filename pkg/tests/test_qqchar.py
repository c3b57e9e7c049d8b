"""
Tests for Y-observables, qq-characters and their expectation values
"""

import unittest
import os
import sys
from fractions import Fraction

import numpy as np
import pytest
import sympy

# Add parent directory to path to import module
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from errors import ConfigError, PoleError, ResonanceError
from lattice import ParamSet
from partitions import EMPTY, MultiPartition, Partition, enumerate_multipartitions
from qqchar import (
    ArParams,
    Observable,
    ar_expectation_pole_check,
    ar_measure,
    ar_qq_character,
    ar_qq_character_series,
    ar_y_observable,
    exact_expectation_coefficients,
    expectation,
    expectation_series,
    origami_pushforward,
    origami_second_params,
    origami_xtilde,
    pole_residue_check,
    qq_character_a0hat,
    qq_box_weight,
    qq_character_series,
    y_observable,
)
from specfun import K, TheoryKind, theta


class TestYObservable(unittest.TestCase):
    """Test cases for Y(x)"""

    def setUp(self):
        """Set up test environment"""
        self.params = ParamSet(a=(Fraction(1, 3), Fraction(-1, 4)), eps=(Fraction(1, 2), Fraction(2, 3), Fraction(5, 11)))
        self.x = Fraction(7, 5)

    def test_empty(self):
        """On the empty configuration Y is prod theta(x - a_alpha)"""
        value = y_observable(self.x, MultiPartition.empty(2), self.params)
        self.assertEqual(value, (self.x - self.params.a[0]) * (self.x - self.params.a[1]))

    def test_single_box(self):
        """One box: theta(x-a-eps2) theta(x-a-eps1) / theta(x-a-eps1-eps2)"""
        params = ParamSet(a=(Fraction(1, 7),), eps=self.params.eps)
        e1, e2, _ = params.eps
        u = self.x - params.a[0]
        expected = (u - e2) * (u - e1) / (u - e1 - e2)
        self.assertEqual(y_observable(self.x, MultiPartition.of(Partition.of(1)), params), expected)

    def test_elliptic_ratio(self):
        """The elliptic Y on one box is the same ratio of elliptic thetas"""
        kind = TheoryKind("Ell", 0.2 + 0.1j)
        params = ParamSet(a=(0.1,), eps=(0.3, 0.45, 0.2), kind=kind)
        x = 0.8 - 0.2j
        u = x - 0.1
        expected = theta(u - 0.45, kind) * theta(u - 0.3, kind) / theta(u - 0.75, kind)
        value = y_observable(x, MultiPartition.of(Partition.of(1)), params)
        self.assertLess(abs(value - expected), 1e-12 * abs(expected))

    def test_pole(self):
        """Evaluating at a zero of the denominator raises PoleError"""
        params = ParamSet(a=(Fraction(1, 7),), eps=self.params.eps)
        x = params.a[0] + params.eps1 + params.eps2
        with self.assertRaises(PoleError):
            y_observable(x, MultiPartition.of(Partition.of(1)), params)


class TestQQCharacter(unittest.TestCase):
    """Test cases for the A0-hat qq-character"""

    def setUp(self):
        """Set up test environment"""
        self.params = ParamSet(a=(Fraction(1, 3), Fraction(-1, 4)), eps=(Fraction(1, 2), Fraction(2, 3), Fraction(5, 11)))
        self.mp = MultiPartition.of(Partition.of(1), EMPTY)
        self.x = Fraction(9, 7)

    def test_box_weight(self):
        """(1) has weight (eps1+eps3)(eps1+eps4)/(eps3 eps4), which vanishes at eps1 = -eps3"""
        p = self.params
        expected = (p.eps1 + p.eps3) * (p.eps1 + p.eps4) / (p.eps3 * p.eps4)
        self.assertEqual(qq_box_weight(Partition.of(1), p), expected)
        self.assertEqual(qq_box_weight(EMPTY, p), 1)
        degenerate = ParamSet(a=(0,), eps=(1, 2, -1))
        self.assertEqual(qq_box_weight(Partition.of(1), degenerate), 0)

    def test_leading_terms(self):
        """Order 0 is Y(x+eps12); order 1 adds the weighted Y(x-eps3) Y(x-eps4) / Y(x)"""
        p = self.params
        series = qq_character_series(self.x, self.mp, p, 1)
        y = lambda point: y_observable(point, self.mp, p)
        self.assertEqual(series[0], y(self.x + p.eps1 + p.eps2))
        weight = qq_box_weight(Partition.of(1), p)
        self.assertEqual(series[1], weight * y(self.x - p.eps3) * y(self.x - p.eps4) / y(self.x))

    def test_evaluated_character(self):
        """The scalar qq-character sums the series at the fugacity"""
        params = self.params.with_(q=Fraction(1, 10))
        series = qq_character_series(self.x, self.mp, params, 2)
        self.assertEqual(qq_character_a0hat(self.x, self.mp, params, 2), series(Fraction(1, 10)))

    def test_order_padding(self):
        """Requesting a longer series pads with zeros"""
        series = qq_character_series(self.x, self.mp, self.params, 1, order=3)
        self.assertEqual(series.order, 3)
        self.assertEqual(series[3], 0)
        with self.assertRaises(ValueError):
            qq_character_series(self.x, self.mp, self.params, -1)

    def test_expectation_of_one(self):
        """The normalized expectation of 1 is exactly 1"""
        series = expectation(Observable.one(), self.params, 2, self.x)
        self.assertEqual(series.coefficients(), [1, 0, 0])

    def test_expectation_leading_order(self):
        """At order 0 the expectation of Y is prod (x - a_alpha)"""
        series = expectation(Observable.y(), self.params, 1, self.x)
        self.assertEqual(series[0], (self.x - self.params.a[0]) * (self.x - self.params.a[1]))

    def test_origami_pushforward(self):
        """With a single second color the pushforward is the qq-character at x + b"""
        b = Fraction(2, 9)
        params2 = origami_second_params(self.params, [b])
        self.assertEqual(params2.eps, (self.params.eps3, self.params.eps4, self.params.eps1))
        for mp in enumerate_multipartitions(2, 2):
            pushed = origami_pushforward(self.x, mp, self.params, params2, 2)
            direct = qq_character_series(self.x + b, mp, self.params, 2)
            self.assertEqual(pushed, direct)

    def test_origami_both_empty(self):
        """On two empty configurations the observable is prod theta(x - a + b + eps12)"""
        b = Fraction(2, 9)
        params2 = origami_second_params(self.params, [b])
        value = origami_xtilde(self.x, (MultiPartition.empty(2), MultiPartition.empty(1)), self.params, params2)
        e12 = self.params.eps1 + self.params.eps2
        expected = (self.x - self.params.a[0] + b + e12) * (self.x - self.params.a[1] + b + e12)
        self.assertEqual(value, expected)


class TestResidueChecks(unittest.TestCase):
    """Test cases for pole cancellation in the expectation values"""

    def setUp(self):
        """Set up test environment"""
        self.params = ParamSet(a=(Fraction(1, 3), Fraction(-1, 4)), eps=(Fraction(1, 2), Fraction(2, 3), Fraction(5, 11)))

    def test_exact_first_order(self):
        """The qq-character expectation is a polynomial of degree N at order 1"""
        report = pole_residue_check(self.params, 1)
        self.assertTrue(report.exact)
        self.assertEqual(report.max_residue, 0)
        self.assertTrue(report.polynomial)
        self.assertEqual(report.degrees, [2, 2])
        self.assertIn("candidate_poles", report.to_dict())

    def test_negative_control(self):
        """The expectation of Y(x + eps12) alone keeps its poles"""
        report = pole_residue_check(self.params, 1, observable="y")
        self.assertFalse(report.polynomial)
        self.assertNotEqual(report.max_residue, 0)

    def test_float_contour(self):
        """Contour residues vanish numerically for one color"""
        params = ParamSet(a=(0.1,), eps=(0.5, 0.7, 0.45))
        report = pole_residue_check(params, 1, exact=False)
        self.assertFalse(report.exact)
        self.assertLess(report.max_residue, 1e-6)
        self.assertTrue(report.polynomial)

    def test_exact_coefficients(self):
        """Symbolic coefficients: <Y(x + eps12)> starts at prod (x + eps12 - a), <X> is polynomial"""
        x = sympy.Symbol("x")
        y_coeffs = exact_expectation_coefficients(self.params, 1, which="y")
        expected = (x + sympy.Rational(5, 6)) * (x + sympy.Rational(17, 12))
        self.assertEqual(sympy.expand(y_coeffs[0] - expected), 0)
        for c in exact_expectation_coefficients(self.params, 1):
            self.assertTrue(c.is_polynomial(x))
        with self.assertRaises(ValueError):
            exact_expectation_coefficients(self.params, 1, which="z")

    def test_expectation_series(self):
        """expectation_series is the normalized expectation"""
        x = Fraction(9, 7)
        self.assertEqual(expectation_series(Observable.y(), self.params, 1, x),
                         expectation(Observable.y(), self.params, 1, x))

    def test_rational_only(self):
        """Residue checks refuse the trigonometric theory"""
        with self.assertRaises(ValueError):
            pole_residue_check(ParamSet(a=(0.1,), eps=(0.5, 0.7, 0.45), kind=K), 1)

    def test_exact_second_order(self):
        """Two colors at order 2: every residue vanishes exactly"""
        report = pole_residue_check(self.params, 2)
        self.assertEqual(report.max_residue, 0)
        self.assertTrue(report.polynomial)
        self.assertEqual(len(report.degrees), 3)
        self.assertTrue(all(d is not None and d <= 2 for d in report.degrees))

    @pytest.mark.skipif(not os.environ.get("RUN_SLOW_TESTS"), reason="Skipping slow tests")
    def test_exact_sweep(self):
        """Random rational parameters, N = 2 and 3 at order 2: no residue survives"""
        rng = np.random.default_rng(20240521)
        for N in (2, 3):
            for _ in range(3):
                data = random_rational_params(rng, N)
                params = ParamSet(a=tuple(data["a"]), eps=tuple(data["eps"]))
                try:
                    report = pole_residue_check(params, 2)
                except ResonanceError:
                    continue
                self.assertEqual(report.max_residue, 0)
                self.assertTrue(report.polynomial)


class TestArTheory(unittest.TestCase):
    """Test cases for the linear quiver qq-characters"""

    def setUp(self):
        """Set up test environment"""
        self.params = ArParams(
            r=1,
            moduli=((Fraction(1, 5), Fraction(1, 3), Fraction(-2, 7)), (Fraction(3, 4), Fraction(-1, 6), Fraction(1, 9))),
            eps=(Fraction(1, 2), Fraction(2, 3), Fraction(5, 11)),
            fugacities=(Fraction(1, 10),),
        )
        self.empty = (MultiPartition.empty(2),)
        self.x = Fraction(13, 7)

    def test_validation(self):
        """Moduli rows need r + 2 entries and one fugacity per node"""
        with self.assertRaises(ValueError):
            ArParams(1, ((1, 2),), (1, 2, 3), (1,))
        with self.assertRaises(ValueError):
            ArParams(1, ((1, 2, 3),), (1, 2, 3), ())
        with self.assertRaises(ConfigError):
            ArParams(1, ((1, 2, 3),), (1, 2, 3), (1,), kind=K).convert("exact")

    def test_mass_polynomials(self):
        """Frozen end nodes give the fundamental polynomials"""
        y0 = ar_y_observable(0, self.x, self.empty, self.params)
        m = self.params.moduli
        self.assertEqual(y0, (self.x - m[0][0]) * (self.x - m[1][0]))
        e12 = self.params.eps[0] + self.params.eps[1]
        y2 = ar_y_observable(2, self.x, self.empty, self.params)
        self.assertEqual(y2, (self.x + e12 - self.params.mass_plus(0)) * (self.x + e12 - self.params.mass_plus(1)))

    def test_first_character(self):
        """X_1 = Y_1(x+eps12) + q Y_0(x) Y_2(x+eps12) / Y_1(x)"""
        p = self.params
        e12 = p.eps[0] + p.eps[1]
        y = lambda s, point: ar_y_observable(s, point, self.empty, p)
        expected = y(1, self.x + e12) + p.fugacities[0] * y(0, self.x) * y(2, self.x + e12) / y(1, self.x)
        self.assertEqual(ar_qq_character(1, self.x, self.empty, p), expected)
        series = ar_qq_character_series(1, self.x, self.empty, p, 1)
        self.assertEqual(series[0], y(1, self.x + e12))
        self.assertEqual(series(1), expected)

    def test_top_character_telescopes(self):
        """X_{r+1} has the single term Y_{r+1}(x + eps12) on any configuration"""
        p = self.params
        e12 = p.eps[0] + p.eps[1]
        box = (MultiPartition.of(Partition.of(1), EMPTY),)
        for mps in (self.empty, box):
            expected = ar_y_observable(2, self.x + e12, mps, p)
            self.assertEqual(ar_qq_character(2, self.x, mps, p), expected)
            series = ar_qq_character_series(2, self.x, mps, p, 1)
            self.assertEqual(series.coefficients(), [expected, 0])

    def test_measure(self):
        """Empty configurations weigh 1 and one box carries one power of the fugacity"""
        self.assertEqual(ar_measure(self.empty, self.params), 1)
        box = (MultiPartition.of(Partition.of(1), EMPTY),)
        doubled = ArParams(self.params.r, self.params.moduli, self.params.eps, (Fraction(1, 5),))
        self.assertEqual(ar_measure(box, doubled), 2 * ar_measure(box, self.params))

    def test_index_range(self):
        """qq-character index must be between 1 and r + 1"""
        with self.assertRaises(ValueError):
            ar_qq_character(0, self.x, self.empty, self.params)
        with self.assertRaises(ValueError):
            ar_qq_character(3, self.x, self.empty, self.params)

    def test_first_order_polynomial(self):
        """<X_1> is free of poles at first order"""
        report = ar_expectation_pole_check(self.params, 1, 1)
        self.assertEqual(report.max_residue, 0)
        self.assertTrue(report.polynomial)


if __name__ == "__main__":
    unittest.main()
