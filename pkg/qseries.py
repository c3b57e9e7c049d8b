"""
Truncated Power Series

QSeries holds the coefficients c_0..c_K of a series in one fugacity. The
coefficients can be Python complex numbers, Fractions, mpmath numbers or sympy
expressions. Ring arithmetic is done in place; reciprocal, log and exp go
through sympy's ring_series on a polynomial ring over QQ, EX, RealField or
ComplexField, so exact inputs stay exact.
"""

import logging
import math
import numbers
from fractions import Fraction
from typing import Any, Iterable, List, Sequence

import mpmath
import numpy as np
from sympy import Basic, sympify
from sympy.polys.domains import EX, QQ, ComplexField, RealField
from sympy.polys.ring_series import rs_exp, rs_log, rs_series_inversion
from sympy.polys.rings import ring

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


def stable_sum(terms: Iterable[Any]):
    """
    Sum a sequence of numbers in order.

    Floating point terms are added with math.fsum separately on the real and
    imaginary parts; everything else (Fraction, sympy, mpmath) uses plain
    left-to-right addition, so the result is independent of worker count.
    """
    terms = list(terms)
    if not terms:
        return 0
    if all(isinstance(t, (int, float, complex)) and not isinstance(t, bool) for t in terms):
        if all(isinstance(t, int) for t in terms):
            return sum(terms)
        real = math.fsum(complex(t).real for t in terms)
        imag = math.fsum(complex(t).imag for t in terms)
        return complex(real, imag) if imag != 0 or any(isinstance(t, complex) for t in terms) else real
    total = terms[0]
    for term in terms[1:]:
        total = total + term
    return total


class QSeries:
    """A power series in q truncated after q^order."""

    def __init__(self, coeffs: Sequence[Any], order: int = None):
        coeffs = list(coeffs)
        if order is None:
            order = len(coeffs) - 1
        if order < 0:
            raise ValueError(f"Series order must be non-negative, got {order}")
        coeffs = coeffs[: order + 1] + [0] * (order + 1 - len(coeffs))
        self.c = np.array(coeffs, dtype=object)
        self.order = order

    @classmethod
    def constant(cls, value, order: int) -> "QSeries":
        return cls([value], order)

    @classmethod
    def monomial(cls, power: int, order: int, value=1) -> "QSeries":
        coeffs = [0] * (order + 1)
        if power <= order:
            coeffs[power] = value
        return cls(coeffs, order)

    def coefficients(self) -> List[Any]:
        return list(self.c)

    def __getitem__(self, k: int):
        return self.c[k] if 0 <= k <= self.order else 0

    def __len__(self) -> int:
        return self.order + 1

    def __iter__(self):
        return iter(self.c)

    def __repr__(self) -> str:
        return f"QSeries({list(self.c)!r})"

    def truncate(self, order: int) -> "QSeries":
        return QSeries(list(self.c), min(order, self.order))

    def _coerce(self, other) -> "QSeries":
        if isinstance(other, QSeries):
            return other
        return QSeries.constant(other, self.order)

    def __add__(self, other):
        other = self._coerce(other)
        order = min(self.order, other.order)
        return QSeries([self[k] + other[k] for k in range(order + 1)], order)

    __radd__ = __add__

    def __neg__(self):
        return QSeries([-c for c in self.c], self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            return QSeries([c * other for c in self.c], self.order)
        order = min(self.order, other.order)
        coeffs = []
        for k in range(order + 1):
            coeffs.append(stable_sum(self.c[j] * other.c[k - j] for j in range(k + 1)))
        return QSeries(coeffs, order)

    def __rmul__(self, other):
        return QSeries([other * c for c in self.c], self.order)

    def inverse(self) -> "QSeries":
        """Reciprocal series; the constant term must be nonzero."""
        if self.c[0] == 0:
            raise ZeroDivisionError("Series with vanishing constant term is not invertible")
        return _ring_series(self, rs_series_inversion)

    def __truediv__(self, other):
        if isinstance(other, QSeries):
            return self * other.inverse()
        return QSeries([_divide(c, other) for c in self.c], self.order)

    def shift(self, power: int) -> "QSeries":
        """Multiply by q^power, keeping the order."""
        coeffs = [0] * power + list(self.c)
        return QSeries(coeffs, self.order)

    def log(self) -> "QSeries":
        """Formal logarithm of a series with constant term 1."""
        if self.c[0] != 1:
            raise ValueError("Formal log needs constant term 1")
        return _ring_series(self, rs_log)

    def exp(self) -> "QSeries":
        """Formal exponential of a series with constant term 0."""
        if self.c[0] != 0:
            raise ValueError("Formal exp needs constant term 0")
        if all(c == 0 for c in self.c):
            return QSeries.constant(1, self.order)
        return _ring_series(self, rs_exp)

    def __call__(self, q):
        """Evaluate the truncated polynomial at q (Horner)."""
        total = self.c[self.order]
        for k in range(self.order - 1, -1, -1):
            total = total * q + self.c[k]
        return total

    def map(self, func) -> "QSeries":
        return QSeries([func(c) for c in self.c], self.order)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QSeries):
            return NotImplemented
        order = min(self.order, other.order)
        return all(self[k] == other[k] for k in range(order + 1))

    def max_abs_difference(self, other: "QSeries") -> float:
        order = min(self.order, other.order)
        return max(abs(complex(self[k] - other[k])) for k in range(order + 1))


def _divide(a, b):
    """Division that keeps integers exact."""
    if isinstance(a, int) and isinstance(b, int):
        return Fraction(a, b)
    return a / b


def _coefficient_domain(coeffs: Sequence[Any]):
    """
    Pick the sympy ground domain for a list of coefficients.

    Returns the domain together with the kind the results are converted back
    to: "fraction" (QQ), "sympy" (QQ or EX), "mpmath" (ComplexField at the
    working precision), "float" (RealField) or "complex" (ComplexField).
    """
    if any(isinstance(c, Basic) for c in coeffs):
        exact = all(isinstance(c, numbers.Rational) or (isinstance(c, Basic) and c.is_Rational) for c in coeffs)
        return (QQ if exact else EX), "sympy"
    if any(isinstance(c, (mpmath.mpf, mpmath.mpc)) for c in coeffs):
        return ComplexField(prec=mpmath.mp.prec), "mpmath"
    if all(isinstance(c, numbers.Rational) for c in coeffs):
        return QQ, "fraction"
    if all(isinstance(c, numbers.Real) for c in coeffs):
        return RealField(), "float"
    return ComplexField(), "complex"


def _to_domain(value, domain, kind: str):
    if kind == "sympy":
        return domain.from_sympy(sympify(value))
    if kind == "fraction":
        return domain(int(value.numerator), int(value.denominator))
    if kind == "mpmath":
        if isinstance(value, numbers.Rational):
            value = mpmath.mpf(int(value.numerator)) / int(value.denominator)
        return domain(mpmath.mpmathify(value))
    if kind == "float":
        return domain(float(value))
    return domain(complex(value))


def _from_domain(value, domain, kind: str):
    if kind == "sympy":
        return domain.to_sympy(value)
    if kind == "fraction":
        return Fraction(int(value.numerator), int(value.denominator))
    if kind == "mpmath":
        return mpmath.mpc(value)
    if kind == "float":
        return float(value)
    return complex(value)


def _ring_series(series: QSeries, func) -> QSeries:
    """
    Apply a sympy ring_series routine (rs_log, rs_exp, rs_series_inversion)
    to a QSeries, truncating at the series order.
    """
    domain, kind = _coefficient_domain(series.c)
    R, q = ring("q", domain)
    poly = R({(k,): _to_domain(c, domain, kind) for k, c in enumerate(series.c) if c != 0})
    result = func(poly, q, series.order + 1)
    coeffs = [_from_domain(result.get((k,), domain.zero), domain, kind) for k in range(series.order + 1)]
    return QSeries(coeffs, series.order)
