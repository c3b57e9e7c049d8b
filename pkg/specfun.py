"""
Special Functions Module

The theta kernel that selects the rational (4d), trigonometric (5d) and
elliptic (6d) measures, the Weierstrass function of the lattice Z + tau Z with
its invariants, and the odd Jacobi theta function.

Jacobi thetas and extended precision come from mpmath; the vectorized
numpy path is used inside time-stepping loops.
"""

import cmath
import logging
import math
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Optional, Tuple

import mpmath
import numpy as np

from errors import PoleError

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

THEORY_LABELS = {"4d": "H", "5d": "K", "6d": "Ell", "H": "H", "K": "K", "Ell": "Ell"}

# Guard digits added on top of the working precision for theta evaluations
GUARD_DPS = 15


@dataclass(frozen=True)
class TheoryKind:
    """
    Selects theta(x) = x (H), 1 - e^{-x} (K) or the elliptic triple product (Ell).

    Attributes:
        variant (str): "H", "K" or "Ell"
        nome (complex): elliptic nome p with |p| < 1 (Ell only)
        n_max (int, optional): product truncation depth; chosen per argument when None
    """

    variant: str = "H"
    nome: complex = 0j
    n_max: Optional[int] = None

    def __post_init__(self):
        if self.variant not in ("H", "K", "Ell"):
            raise ValueError(f"Unknown theory variant: {self.variant}")
        if self.variant == "Ell":
            if abs(self.nome) >= 1:
                raise ValueError(f"Elliptic nome must satisfy |p| < 1, got {self.nome}")
            if self.n_max is not None and self.n_max < 1:
                raise ValueError(f"n_max must be at least 1, got {self.n_max}")

    @classmethod
    def from_label(cls, label: str, nome: complex = 0j, n_max: Optional[int] = None) -> "TheoryKind":
        try:
            variant = THEORY_LABELS[label]
        except KeyError:
            raise ValueError(f"Unknown theory label: {label}")
        if variant == "Ell":
            return cls(variant, complex(nome), n_max)
        return cls(variant)

    @property
    def label(self) -> str:
        return {"H": "4d", "K": "5d", "Ell": "6d"}[self.variant]

    @property
    def is_rational(self) -> bool:
        return self.variant == "H"


H = TheoryKind("H")
K = TheoryKind("K")


def _exp(x):
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return mpmath.exp(x)
    if hasattr(x, "is_Number") or hasattr(x, "free_symbols"):
        import sympy
        return sympy.exp(x)
    return cmath.exp(complex(x))


def default_n_max(x, nome: complex) -> int:
    """Depth with |p|^n_max < 1e-16 / (1 + |e^x|)."""
    p = abs(nome)
    if p == 0:
        return 1
    growth = 1.0 + abs(cmath.exp(complex(x)))
    n = math.log(1e-16 / growth) / math.log(p)
    return max(1, min(10000, int(math.ceil(n)) + 1))


def theta(x, kind: TheoryKind = H):
    """
    The measure kernel.

    Args:
        x: argument (complex, Fraction, mpmath or sympy value)
        kind (TheoryKind): H, K or Ell

    Returns:
        x, 1 - e^{-x}, or prod_{n=1}^{n_max} (1-p^n)(1-p^{n-1}e^{-x})(1-p^n e^x)
    """
    if kind.variant == "H":
        return x
    if kind.variant == "K":
        return 1 - _exp(-x)
    p = kind.nome
    n_max = kind.n_max if kind.n_max is not None else default_n_max(x, p)
    ex = _exp(x)
    emx = _exp(-x)
    value = 1
    for n in range(1, n_max + 1):
        value *= (1 - p ** n) * (1 - p ** (n - 1) * emx) * (1 - p ** n * ex)
    return value


@contextmanager
def set_precision(dps: int):
    """Run a block with mpmath working at dps decimal digits."""
    with mpmath.workdps(dps):
        yield


def _nome(tau):
    return mpmath.exp(1j * mpmath.pi * mpmath.mpmathify(tau))


def _check_tau(tau):
    if complex(tau).imag <= 0:
        raise ValueError(f"Modular parameter must have Im tau > 0, got {tau}")


def reduce_to_cell(z: complex, tau: complex) -> complex:
    """Translate z by the lattice Z + tau Z into the cell centered at 0."""
    z = complex(z)
    tau = complex(tau)
    n = round(z.imag / tau.imag)
    z = z - n * tau
    m = round(z.real)
    return z - m


def _check_lattice_point(z, tau, what="Weierstrass function"):
    if abs(reduce_to_cell(z, tau)) < 1e-12:
        raise PoleError(f"{what} evaluated at a lattice point z={z}", point=z)


def jacobi_theta_odd(z, tau, derivative: int = 0, as_mpc: bool = False):
    """
    Odd Jacobi theta theta_1(pi z | tau) with nome e^{i pi tau}.

    theta(z + 1) = -theta(z) and theta(z + tau) = -e^{-i pi tau - 2 pi i z} theta(z).

    Args:
        z: point
        tau: modular parameter, Im tau > 0
        derivative (int): order of the z-derivative

    Returns:
        complex (or mpmath.mpc when as_mpc)
    """
    _check_tau(tau)
    with mpmath.workdps(mpmath.mp.dps + GUARD_DPS):
        q = _nome(tau)
        value = mpmath.jtheta(1, mpmath.pi * mpmath.mpmathify(z), q, derivative) * mpmath.pi ** derivative
    return value if as_mpc else complex(value)


def theta_prime_zero(tau, as_mpc: bool = False):
    """d/dz theta_1(pi z | tau) at z = 0."""
    return jacobi_theta_odd(0, tau, derivative=1, as_mpc=as_mpc)


def weierstrass_p(z, tau, derivative: int = 0, as_mpc: bool = False):
    """
    Weierstrass p-function (or its derivative) for the lattice Z + tau Z.

    Normalized so that z^2 p(z) -> 1 with no constant term in the Laurent
    expansion:
        p(z) = (pi t2 t3 t4(pi z) / t1(pi z))^2 - pi^2/3 (t2^4 + t3^4)

    Args:
        z: point off the lattice
        tau: modular parameter
        derivative (int): 0 for p, 1 for p'
    """
    _check_tau(tau)
    if derivative not in (0, 1):
        raise ValueError("Only p and p' are available")
    _check_lattice_point(z, tau)
    with mpmath.workdps(mpmath.mp.dps + GUARD_DPS):
        q = _nome(tau)
        pi = mpmath.pi
        u = pi * mpmath.mpmathify(z)
        t2 = mpmath.jtheta(2, 0, q)
        t3 = mpmath.jtheta(3, 0, q)
        t1u = mpmath.jtheta(1, u, q)
        t4u = mpmath.jtheta(4, u, q)
        scale = pi * t2 * t3
        ratio = t4u / t1u
        if derivative == 0:
            value = (scale * ratio) ** 2 - pi ** 2 / 3 * (t2 ** 4 + t3 ** 4)
        else:
            d_ratio = pi * (mpmath.jtheta(4, u, q, 1) * t1u - t4u * mpmath.jtheta(1, u, q, 1)) / t1u ** 2
            value = 2 * scale ** 2 * ratio * d_ratio
    return value if as_mpc else complex(value)


def _theta_terms(tau: complex) -> int:
    return 10 + int(math.ceil(math.sqrt(40.0 / (math.pi * tau.imag))))


def weierstrass_p_array(z, tau, derivative: int = 0) -> np.ndarray:
    """
    Vectorized double precision p or p' from truncated theta series.

    Arguments are first reduced into the period cell, so the series converge
    uniformly; used by the elliptic equations of motion.
    """
    tau = complex(tau)
    _check_tau(tau)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    n_shift = np.round(z.imag / tau.imag)
    z = z - n_shift * tau
    z = z - np.round(z.real)
    if np.any(np.abs(z) < 1e-12):
        raise PoleError("Weierstrass function evaluated at a lattice point", point=z)
    n_terms = _theta_terms(tau)
    n = np.arange(n_terms)
    sign = (-1.0) ** n
    half = np.exp(1j * np.pi * tau * (n + 0.5) ** 2)
    full = np.exp(1j * np.pi * tau * n[1:] ** 2)
    u = np.pi * z[:, None]
    t1 = 2 * np.sum(sign * half * np.sin((2 * n + 1) * u), axis=1)
    t1p = 2 * np.sum(sign * half * (2 * n + 1) * np.cos((2 * n + 1) * u), axis=1)
    t4 = 1 + 2 * np.sum(sign[1:] * full * np.cos(2 * n[1:] * u), axis=1)
    t4p = -2 * np.sum(sign[1:] * full * 2 * n[1:] * np.sin(2 * n[1:] * u), axis=1)
    t2_0 = 2 * np.sum(half)
    t3_0 = 1 + 2 * np.sum(full)
    scale = np.pi * t2_0 * t3_0
    ratio = t4 / t1
    if derivative == 0:
        return (scale * ratio) ** 2 - np.pi ** 2 / 3 * (t2_0 ** 4 + t3_0 ** 4)
    d_ratio = np.pi * (t4p * t1 - t4 * t1p) / t1 ** 2
    return 2 * scale ** 2 * ratio * d_ratio


@dataclass(frozen=True)
class EllipticCurveParams:
    """Invariants of the curve C / (Z + tau Z): y^2 = 4t^3 - g2 t - g3."""

    tau: complex
    g2: complex
    g3: complex
    e1: complex
    e2: complex
    e3: complex

    @classmethod
    def from_tau(cls, tau) -> "EllipticCurveParams":
        """
        Half-period values e1 = p(1/2), e2 = p((1+tau)/2), e3 = p(tau/2).

        Args:
            tau (complex): modular parameter, Im tau > 0
        """
        _check_tau(tau)
        tau = complex(tau)
        e1 = weierstrass_p(0.5, tau)
        e2 = weierstrass_p((1 + tau) / 2, tau)
        e3 = weierstrass_p(tau / 2, tau)
        g2 = 2 * (e1 ** 2 + e2 ** 2 + e3 ** 2)
        g3 = 4 * e1 * e2 * e3
        logger.debug(f"Elliptic invariants for tau={tau}: g2={g2}, g3={g3}")
        return cls(tau, g2, g3, e1, e2, e3)

    def roots(self) -> Tuple[complex, complex, complex]:
        return self.e1, self.e2, self.e3

    def cubic(self, t):
        return 4 * t ** 3 - self.g2 * t - self.g3


def weierstrass_invariants(tau) -> EllipticCurveParams:
    return EllipticCurveParams.from_tau(tau)


def _divisor_power_sum(n: int, power: int) -> int:
    return sum(d ** power for d in range(1, n + 1) if n % d == 0)


def eisenstein_invariants(tau, n_terms: int = 60) -> Tuple[complex, complex]:
    """
    g2 and g3 from the q-expansions of E4 and E6 (q = e^{2 pi i tau}).

    Independent of the theta route; used to cross-check it.
    """
    _check_tau(tau)
    qt = cmath.exp(2j * cmath.pi * complex(tau))
    e4 = 1 + 240 * sum(_divisor_power_sum(n, 3) * qt ** n for n in range(1, n_terms + 1))
    e6 = 1 - 504 * sum(_divisor_power_sum(n, 5) * qt ** n for n in range(1, n_terms + 1))
    g2 = 4 * math.pi ** 4 / 3 * e4
    g3 = 8 * math.pi ** 6 / 27 * e6
    return g2, g3
