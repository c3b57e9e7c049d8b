"""
Lattice Vectors and Parameters

Theta arguments of every measure and observable are first built as integer
combinations of the generators eps_1..eps_4, the Coulomb moduli and an affine
x slot, and only evaluated at the end. The same vector carries a grading
[.] into Z/nZ, which the surface-defect truncation theta^delta consults.
"""

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Dict, Hashable, Iterable, Mapping, Optional, Sequence, Tuple

import mpmath

from errors import ConfigError, ResonanceError
from specfun import H, TheoryKind, theta

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

NUMERIC_MODES = ("float64", "extended", "exact", "symbolic")


def _clean_items(items: Iterable[Tuple[Hashable, int]]) -> Tuple[Tuple[Hashable, int], ...]:
    merged: Dict[Hashable, int] = {}
    for key, coeff in items:
        merged[key] = merged.get(key, 0) + coeff
    return tuple(sorted(((k, c) for k, c in merged.items() if c != 0), key=lambda kc: repr(kc[0])))


@dataclass(frozen=True)
class LatticeVector:
    """
    n_1 eps_1 + ... + n_4 eps_4 + sum_k m_k a_k + c x.

    Attributes:
        eps (Tuple[int, int, int, int]): coefficients of eps_1..eps_4
        moduli (tuple): sparse (key, coefficient) pairs over Coulomb moduli / masses
        x (Fraction): coefficient of the free variable
    """

    eps: Tuple[int, int, int, int] = (0, 0, 0, 0)
    moduli: Tuple[Tuple[Hashable, int], ...] = ()
    x: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "eps", tuple(int(e) for e in self.eps))
        object.__setattr__(self, "moduli", _clean_items(self.moduli))
        object.__setattr__(self, "x", Fraction(self.x))

    @classmethod
    def build(cls, e1: int = 0, e2: int = 0, e3: int = 0, e4: int = 0,
              moduli: Optional[Mapping[Hashable, int]] = None, x=0) -> "LatticeVector":
        return cls((e1, e2, e3, e4), tuple((moduli or {}).items()), Fraction(x))

    @classmethod
    def modulus(cls, key: Hashable, coeff: int = 1) -> "LatticeVector":
        return cls(moduli=((key, coeff),))

    def __add__(self, other: "LatticeVector") -> "LatticeVector":
        return LatticeVector(
            tuple(a + b for a, b in zip(self.eps, other.eps)),
            self.moduli + other.moduli,
            self.x + other.x,
        )

    def __neg__(self) -> "LatticeVector":
        return LatticeVector(tuple(-e for e in self.eps), tuple((k, -c) for k, c in self.moduli), -self.x)

    def __sub__(self, other: "LatticeVector") -> "LatticeVector":
        return self + (-other)

    def __rmul__(self, n: int) -> "LatticeVector":
        return LatticeVector(tuple(n * e for e in self.eps), tuple((k, n * c) for k, c in self.moduli), n * self.x)

    def __repr__(self) -> str:
        terms = [f"{c}*e{i + 1}" for i, c in enumerate(self.eps) if c]
        terms += [f"{c}*a{k}" for k, c in self.moduli]
        if self.x:
            terms.append(f"{self.x}*x")
        return "LatticeVector(" + (" + ".join(terms) or "0") + ")"

    def evaluate(self, eps_values: Sequence[Any], moduli_values: Mapping[Hashable, Any], x_value=None):
        """
        Numerical value for given generator values.

        Args:
            eps_values: (eps_1, eps_2, eps_3, eps_4)
            moduli_values: value of every modulus key that occurs
            x_value: value of x (required when the x coefficient is nonzero)
        """
        total = 0
        for coeff, value in zip(self.eps, eps_values):
            if coeff:
                total = total + coeff * value
        for key, coeff in self.moduli:
            try:
                total = total + coeff * moduli_values[key]
            except KeyError:
                raise KeyError(f"No value for modulus {key!r}")
        if self.x:
            if x_value is None:
                raise ValueError(f"{self!r} needs a value for x")
            coeff = self.x
            total = total + (int(coeff) if coeff.denominator == 1 else coeff) * x_value
        return total

    def grade(self, grading: "Grading") -> int:
        return grading(self)


@dataclass(frozen=True)
class Grading:
    """
    Z-linear map [.] from the lattice to Z/nZ.

    Attributes:
        modulus (int): n
        eps (Tuple[int, ...]): grades of eps_1..eps_4
        moduli (Mapping): grade of every modulus key
        x (int): grade of the x slot
    """

    modulus: int
    eps: Tuple[int, int, int, int]
    moduli: Tuple[Tuple[Hashable, int], ...]
    x: int = 0

    def __call__(self, vector: LatticeVector) -> int:
        grades = dict(self.moduli)
        total = sum(c * g for c, g in zip(vector.eps, self.eps))
        for key, coeff in vector.moduli:
            total += coeff * grades.get(key, 0)
        if vector.x:
            if vector.x.denominator != 1:
                raise ValueError(f"Cannot grade a fractional multiple of x: {vector!r}")
            total += int(vector.x) * self.x
        return total % self.modulus

    @classmethod
    def orbifold(cls, coloring: Sequence[int]) -> "Grading":
        """[a_alpha] = c(alpha), [eps_1] = 0, [eps_2] = 1, [eps_3] = 0, [eps_4] = -1 mod N."""
        n = len(coloring)
        if sorted(coloring) != list(range(n)):
            raise ValueError(f"Coloring must be a bijection onto 0..{n - 1}: {coloring}")
        return cls(n, (0, 1, 0, -1), tuple((alpha, c) for alpha, c in enumerate(coloring)))


def graded_theta(vector: LatticeVector, value, grading: Grading, kind: TheoryKind):
    """theta^delta: theta(value) when [vector] = 0, otherwise 1."""
    if grading(vector) != 0:
        return 1
    return theta(value, kind)


def _to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10 ** 12)
    if isinstance(value, complex):
        if value.imag != 0:
            raise ConfigError(f"Exact mode needs real rational parameters, got {value}")
        return _to_fraction(value.real)
    raise ConfigError(f"Cannot convert {value!r} to an exact rational")


def _to_complex(value) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(float(Fraction(value)))
    if isinstance(value, Fraction):
        return complex(float(value))
    return complex(value)


def convert_value(value, mode: str):
    """Coerce a number to the arithmetic of a numeric mode."""
    if mode == "exact":
        return _to_fraction(value)
    if mode == "symbolic":
        import sympy
        frac = _to_fraction(value)
        return sympy.Rational(frac.numerator, frac.denominator)
    if mode == "extended":
        if isinstance(value, Fraction):
            return mpmath.mpf(value.numerator) / value.denominator
        c = _to_complex(value)
        return mpmath.mpc(c.real, c.imag)
    if mode == "float64":
        return _to_complex(value)
    raise ConfigError(f"Unknown numeric mode: {mode}")


@dataclass(frozen=True)
class ParamSet:
    """
    Parameters of the A0-hat measure.

    eps_4 is always derived as -(eps_1 + eps_2 + eps_3).

    Attributes:
        a (tuple): Coulomb moduli a_1..a_N
        eps (tuple): (eps_1, eps_2, eps_3)
        q: instanton fugacity
        kind (TheoryKind): theta variant
        traceless (bool): require sum(a) = 0
    """

    a: Tuple[Any, ...]
    eps: Tuple[Any, Any, Any]
    q: Any = 0
    kind: TheoryKind = H
    traceless: bool = False

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(self.a))
        object.__setattr__(self, "eps", tuple(self.eps))
        if len(self.eps) != 3:
            raise ConfigError(f"Expected three eps parameters, got {len(self.eps)}")
        if not self.a:
            raise ConfigError("At least one Coulomb modulus is required")
        if self.traceless and sum(self.a) != 0:
            raise ConfigError(f"Coulomb moduli must sum to zero, got {sum(self.a)}")

    @property
    def N(self) -> int:
        return len(self.a)

    @property
    def eps1(self):
        return self.eps[0]

    @property
    def eps2(self):
        return self.eps[1]

    @property
    def eps3(self):
        return self.eps[2]

    @property
    def eps4(self):
        return -(self.eps[0] + self.eps[1] + self.eps[2])

    def eps_values(self) -> Tuple[Any, Any, Any, Any]:
        return (self.eps[0], self.eps[1], self.eps[2], self.eps4)

    def moduli_values(self) -> Dict[Hashable, Any]:
        return {alpha: value for alpha, value in enumerate(self.a)}

    def evaluate(self, vector: LatticeVector, x_value=None):
        return vector.evaluate(self.eps_values(), self.moduli_values(), x_value)

    def theta(self, vector: LatticeVector, x_value=None):
        return theta(self.evaluate(vector, x_value), self.kind)

    def with_(self, **changes) -> "ParamSet":
        return replace(self, **changes)

    def convert(self, mode: str) -> "ParamSet":
        """Same parameters in another numeric mode; exact modes need H-kind."""
        if mode in ("exact", "symbolic") and not self.kind.is_rational:
            raise ConfigError("Exact arithmetic is only available for the rational (4d) theory")
        conv = lambda v: convert_value(v, mode)
        return replace(self, a=tuple(conv(v) for v in self.a), eps=tuple(conv(v) for v in self.eps), q=conv(self.q))

    def scale(self) -> float:
        values = list(self.a) + list(self.eps)
        return max([1.0] + [abs(complex(v)) for v in values])

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], kind: Optional[TheoryKind] = None, mode: str = "float64") -> "ParamSet":
        """
        Build from a parameter file dictionary.

        Args:
            data: {"a": [...], "eps": [e1, e2, e3], "q": number | [re, im], "p_nome": ..., "n_max": int}
            kind: theory; the nome from the file is used for Ell
            mode: numeric mode of the values
        """
        try:
            a = data["a"]
            eps = data["eps"]
        except KeyError as e:
            raise ConfigError(f"Parameter file is missing field {str(e)}")
        if kind is None:
            kind = H
        if kind.variant == "Ell" and "p_nome" in data:
            kind = TheoryKind("Ell", _to_complex(data["p_nome"]), data.get("n_max"))
        params = cls(tuple(a), tuple(eps), data.get("q", 0), kind, bool(data.get("traceless", False)))
        return params.convert(mode)


def resonance_check(value, vector: LatticeVector, tol: float, scale: float = 1.0):
    """Raise ResonanceError when a denominator vanishes."""
    if isinstance(value, (Fraction, int)) or hasattr(value, "free_symbols"):
        if value == 0:
            raise ResonanceError(f"Resonant parameters: theta({vector!r}) = 0", vector=vector, value=value)
        return
    if abs(value) < tol * scale:
        raise ResonanceError(f"Resonant parameters: |theta({vector!r})| = {abs(value):.3e}", vector=vector, value=value)
