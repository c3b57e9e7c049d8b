"""
QQ-Characters Module

Y-observables and fundamental qq-characters of the A0-hat and A_r theories,
their normalized expectation values as truncated series, residue and
polynomiality checks, and the gauge origami observable whose pushforward
reproduces the qq-character.

All theta arguments are LatticeVectors with an x slot; identical factors in
numerator and denominator are cancelled before anything is evaluated.
"""

import cmath
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Any, Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from errors import ConfigError, PoleError, ResonanceError
from lattice import LatticeVector, ParamSet, convert_value
from nekrasov import _parallel_map, evaluate_factors, measure_a0hat, pair_arguments
from partitions import (
    MultiPartition,
    Partition,
    enumerate_multipartitions,
    enumerate_partitions,
    sorted_boxes,
)
from qseries import QSeries, _divide, stable_sum
from specfun import H, TheoryKind, theta

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

X = LatticeVector.build(x=1)
E12 = LatticeVector.build(e1=1, e2=1)
POLE_TOL = 1e-14


def c12(box) -> LatticeVector:
    i, j = box
    return LatticeVector.build(e1=i - 1, e2=j - 1)


def c34(box) -> LatticeVector:
    i, j = box
    return LatticeVector.build(e3=i - 1, e4=j - 1)


@dataclass
class Factors:
    """Multisets of theta arguments in the numerator and denominator."""

    num: List[LatticeVector] = field(default_factory=list)
    den: List[LatticeVector] = field(default_factory=list)

    def extend(self, other: "Factors", invert: bool = False) -> "Factors":
        if invert:
            self.num.extend(other.den)
            self.den.extend(other.num)
        else:
            self.num.extend(other.num)
            self.den.extend(other.den)
        return self

    def cancelled(self) -> "Factors":
        num = Counter(self.num)
        den = Counter(self.den)
        common = num & den
        return Factors(list((num - common).elements()), list((den - common).elements()))


def _is_zero(value) -> bool:
    if hasattr(value, "free_symbols"):
        return value == 0
    if isinstance(value, (int, Fraction)):
        return value == 0
    return abs(value) < POLE_TOL


def evaluate_ratio(factors: Factors, eps_values, moduli: Dict[Hashable, Any], x, kind: TheoryKind):
    """prod theta(num) / prod theta(den) at x; a vanishing denominator raises PoleError."""
    factors = factors.cancelled()
    numerator = 1
    for vector in factors.num:
        numerator = numerator * theta(vector.evaluate(eps_values, moduli, x), kind)
    denominator = 1
    for vector in factors.den:
        value = theta(vector.evaluate(eps_values, moduli, x), kind)
        if _is_zero(value):
            raise PoleError(f"Evaluation at a pole: theta({vector!r}) vanishes at x={x}", point=x)
        denominator = denominator * value
    return _divide(numerator, denominator)


# Y-observables

def y_factors(mp: MultiPartition, shift: LatticeVector = LatticeVector(), key: Callable = lambda alpha: alpha) -> Factors:
    """Theta arguments of Y(x + shift): outer boxes upstairs, inner boxes shifted by eps_12 downstairs."""
    factors = Factors()
    for alpha, lam in enumerate(mp):
        a_alpha = LatticeVector.modulus(key(alpha))
        for box in sorted_boxes(lam.outer_boundary()):
            factors.num.append(X + shift - a_alpha - c12(box))
        for box in sorted_boxes(lam.inner_boundary()):
            factors.den.append(X + shift - a_alpha - c12(box) - E12)
    return factors


def y_observable(x, mp: MultiPartition, params: ParamSet):
    """
    Y(x)[mp] = prod_alpha prod_{outer} theta(x - a_alpha - c12) / prod_{inner} theta(x - a_alpha - c12 - eps_12).
    """
    return evaluate_ratio(y_factors(mp), params.eps_values(), params.moduli_values(), x, params.kind)


def qq_box_factors(lam: Partition) -> List[Tuple[LatticeVector, LatticeVector]]:
    """Per-box (numerator, denominator) pairs of the qq-character weight."""
    pairs = []
    for box in lam.boxes():
        arm, leg = lam.arm_leg(box)
        first = LatticeVector.build(e3=-leg, e4=arm + 1)
        second = LatticeVector.build(e3=leg + 1, e4=-arm)
        pairs.append((first + LatticeVector.build(e1=1), first))
        pairs.append((second + LatticeVector.build(e1=1), second))
    return pairs


def qq_box_weight(lam: Partition, params: ParamSet):
    """
    prod over boxes of theta(eps1 - eps3 l + eps4 (a+1)) theta(eps1 + eps3 (l+1) - eps4 a)
    / [theta(-eps3 l + eps4 (a+1)) theta(eps3 (l+1) - eps4 a)].

    For lambda = (1) this is (eps1+eps3)(eps1+eps4)/(eps3 eps4).
    """
    return evaluate_factors(qq_box_factors(lam), params)


def qq_term_factors(lam: Partition, mp: MultiPartition) -> Factors:
    """Y-part of the lambda term: prod_{outer} Y(x + eps12 + c34) / prod_{inner} Y(x + c34)."""
    factors = Factors()
    for box in sorted_boxes(lam.outer_boundary()):
        factors.extend(y_factors(mp, E12 + c34(box)))
    for box in sorted_boxes(lam.inner_boundary()):
        factors.extend(y_factors(mp, c34(box)), invert=True)
    return factors


def qq_character_series(x, mp: MultiPartition, params: ParamSet, K_inner: int, order: Optional[int] = None) -> QSeries:
    """
    Fundamental qq-character as a series in q, summed over |lambda| <= K_inner.

    Args:
        x: point (number or sympy symbol)
        mp (MultiPartition): configuration
        params (ParamSet): parameters
        K_inner (int): inner truncation
        order (int, optional): series order, at least K_inner
    """
    if K_inner < 0:
        raise ValueError(f"Inner order must be non-negative, got {K_inner}")
    order = K_inner if order is None else max(order, K_inner)
    eps_values = params.eps_values()
    moduli = params.moduli_values()
    coeffs = []
    for n in range(K_inner + 1):
        terms = []
        for lam in enumerate_partitions(n):
            weight = qq_box_weight(lam, params)
            if weight == 0:
                continue
            terms.append(weight * evaluate_ratio(qq_term_factors(lam, mp), eps_values, moduli, x, params.kind))
        coeffs.append(stable_sum(terms))
    return QSeries(coeffs, order)


def qq_character_a0hat(x, mp: MultiPartition, params: ParamSet, K_inner: int):
    """The qq-character series evaluated at the fugacity params.q."""
    return qq_character_series(x, mp, params, K_inner)(params.q)


@dataclass
class Observable:
    """
    A function of (configuration, x) with metadata.

    The function receives the configuration, the point x and the parameters,
    and returns a number or a QSeries in the fugacity.
    """

    name: str
    func: Callable[[Any, Any, Any], Any]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __call__(self, config, x, params):
        return self.func(config, x, params)

    @classmethod
    def one(cls) -> "Observable":
        return cls("one", lambda mp, x, params: 1)

    @classmethod
    def y(cls, shift_eps12: bool = False) -> "Observable":
        shift = E12 if shift_eps12 else LatticeVector()

        def func(mp, x, params):
            return evaluate_ratio(y_factors(mp, shift), params.eps_values(), params.moduli_values(), x, params.kind)

        return cls("Y(x+eps12)" if shift_eps12 else "Y(x)", func)

    @classmethod
    def qq(cls, K_inner: int, order: Optional[int] = None) -> "Observable":
        def func(mp, x, params):
            return qq_character_series(x, mp, params, K_inner, order)

        return cls("qq", func, {"K_inner": K_inner})


def _accumulate(records: Sequence[Tuple[int, Any, Any]], K: int) -> QSeries:
    """Normalized sum of q^k w * value over records (k, w, value)."""
    numer_terms = [[] for _ in range(K + 1)]
    z_terms = [[] for _ in range(K + 1)]
    for k, weight, value in records:
        z_terms[k].append(weight)
        if isinstance(value, QSeries):
            for n in range(0, K + 1 - k):
                coeff = value[n]
                if not (isinstance(coeff, int) and coeff == 0):
                    numer_terms[k + n].append(weight * coeff)
        else:
            numer_terms[k].append(weight * value)
    numer = QSeries([stable_sum(t) for t in numer_terms], K)
    z = QSeries([stable_sum(t) for t in z_terms], K)
    return numer / z


def expectation(obs: Observable, params: ParamSet, K: int, x, threads: int = 1, progress: bool = False) -> QSeries:
    """
    Normalized expectation value of an observable, truncated after q^K.

    Sums q^{|mp|} mu(mp) obs(mp, x) over multipartitions of total size <= K and
    divides by the instanton series.
    """
    if K < 0:
        raise ValueError(f"Order must be non-negative, got {K}")
    configs = [(k, mp) for k in range(K + 1) for mp in enumerate_multipartitions(params.N, k)]

    def evaluate(item):
        k, mp = item
        return k, measure_a0hat(mp, params), obs(mp, x, params)

    try:
        records = _parallel_map(evaluate, configs, threads, progress, f"<{obs.name}>")
    except ResonanceError as e:
        logger.error(f"Error computing expectation of {obs.name}: {str(e)}")
        raise
    return _accumulate(records, K)


def expectation_series(obs: Observable, params: ParamSet, K: int, x, threads: int = 1) -> QSeries:
    return expectation(obs, params, K, x, threads)


# Residue and polynomiality checks

@dataclass
class ResidueReport:
    """Outcome of a pole-cancellation check."""

    candidate_poles: List[Any]
    residues: List[List[Any]]
    max_residue: float
    polynomial: bool
    polynomial_fit_residual: float
    exact: bool
    degrees: List[Optional[int]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "candidate_poles": [_plain(p) for p in self.candidate_poles],
            "residues": [[_plain(r) for r in row] for row in self.residues],
            "max_residue": _plain(self.max_residue),
            "polynomial": self.polynomial,
            "polynomial_fit_residual": _plain(self.polynomial_fit_residual),
            "degrees": self.degrees,
            "exact": self.exact,
        }


def _plain(value):
    if hasattr(value, "free_symbols"):
        if value.is_Rational:
            return str(value)
        value = complex(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def _pole_locations(factors: Factors, eps_values, moduli) -> List[Any]:
    """Values of x at which a denominator argument x + w vanishes."""
    poles = []
    for vector in factors.cancelled().den:
        rest = LatticeVector(vector.eps, vector.moduli)
        coeff = vector.x
        poles.append(-rest.evaluate(eps_values, moduli) / (int(coeff) if coeff.denominator == 1 else coeff))
    return poles


def a0hat_candidate_poles(params: ParamSet, K: int, K_inner: int) -> List[Any]:
    """Zeros of every denominator theta argument appearing in the truncated expectation."""
    eps_values = params.eps_values()
    moduli = params.moduli_values()
    poles = []
    for k in range(K + 1):
        for mp in enumerate_multipartitions(params.N, k):
            for n in range(K_inner + 1):
                for lam in enumerate_partitions(n):
                    poles.extend(_pole_locations(qq_term_factors(lam, mp), eps_values, moduli))
    return _unique(poles)


def _unique(values: Iterable[Any]) -> List[Any]:
    seen = []
    for value in values:
        if not any(_close(value, other) for other in seen):
            seen.append(value)
    return sorted(seen, key=lambda v: (complex(v).real, complex(v).imag))


def _close(a, b) -> bool:
    if hasattr(a, "free_symbols") or isinstance(a, Fraction):
        return a == b
    return abs(complex(a) - complex(b)) < 1e-12


def _exact_analysis(coefficients: Sequence[Any], x, poles: Sequence[Any], degree_bound: int):
    import sympy

    residues = []
    polynomial = True
    degrees = []
    for coeff in coefficients:
        expr = sympy.cancel(sympy.together(sympy.sympify(coeff)))
        numer, denom = sympy.fraction(expr)
        row = []
        if x in denom.free_symbols:
            polynomial = False
            for x0 in poles:
                if sympy.simplify(denom.subs(x, x0)) == 0:
                    row.append(sympy.residue(expr, x, x0))
                else:
                    row.append(sympy.Integer(0))
            degrees.append(None)
        else:
            row = [sympy.Integer(0) for _ in poles]
            degree = sympy.degree(numer, x) if numer != 0 else -1
            degrees.append(int(degree) if degree != -sympy.oo else -1)
            if degree > degree_bound:
                polynomial = False
        residues.append(row)
    max_residue = max([abs(r) for row in residues for r in row] + [sympy.Integer(0)])
    return residues, max_residue, polynomial, degrees


def contour_residue(func: Callable[[complex], QSeries], x0: complex, radii: Sequence[float] = (1e-2, 1e-3, 1e-4),
                    n_points: int = 64) -> List[complex]:
    """
    Residues of every series coefficient of func at x0 by trapezoid contour integration.

    The estimates on the two smallest radii are extrapolated linearly to zero radius.
    """
    estimates = []
    for radius in radii:
        sums = None
        for m in range(n_points):
            phase = cmath.exp(2j * cmath.pi * m / n_points)
            series = func(x0 + radius * phase)
            values = np.array([complex(c) for c in series], dtype=complex) * phase
            sums = values if sums is None else sums + values
        estimates.append(sums * radius / n_points)
    if len(estimates) >= 2:
        r1, r2 = radii[-2], radii[-1]
        e1, e2 = estimates[-2], estimates[-1]
        return list((r1 * e2 - r2 * e1) / (r1 - r2))
    return list(estimates[-1])


def polynomial_fit_residual(func: Callable[[complex], QSeries], degree: int, center: complex = 0j,
                            radius: float = 1.0) -> float:
    """
    Fit a degree-`degree` polynomial through degree+1 sample points of every
    coefficient and report the relative misfit at one extra point.
    """
    points = [center + radius * cmath.exp(2j * cmath.pi * (m + 0.37) / (degree + 2)) for m in range(degree + 2)]
    samples = [[complex(c) for c in func(p)] for p in points]
    worst = 0.0
    for k in range(len(samples[0])):
        values = np.array([row[k] for row in samples])
        vander = np.vander(np.array(points[:-1]), degree + 1)
        coeffs = np.linalg.solve(vander, values[:-1])
        predicted = np.polyval(coeffs, points[-1])
        scale = max(1.0, float(np.max(np.abs(values))))
        worst = max(worst, abs(predicted - values[-1]) / scale)
    return worst


def exact_expectation_coefficients(params: ParamSet, K: int, which: str = "qq",
                                   K_inner: Optional[int] = None) -> List[Any]:
    """
    Coefficients of <X(x)> (which="qq") or <Y(x + eps12)> (which="y") as
    cancelled sympy rational functions of the symbol x.
    """
    import sympy

    if which not in ("qq", "y"):
        raise ValueError(f"Unknown observable: {which}")
    K_inner = K if K_inner is None else K_inner
    obs = Observable.qq(K_inner if which == "qq" else 0, K)
    x = sympy.Symbol("x")
    series = expectation(obs, params.convert("symbolic"), K, x)
    return [sympy.cancel(sympy.together(sympy.sympify(c))) for c in series.coefficients()]


def pole_residue_check(params: ParamSet, K: int, K_inner: Optional[int] = None, exact: bool = True,
                       observable: str = "qq", threads: int = 1) -> ResidueReport:
    """
    Residues of the order-k coefficients (k <= K) of <X(x)> at every candidate pole.

    Args:
        params (ParamSet): rational (H) theory parameters
        K (int): outer order
        K_inner (int, optional): inner qq truncation, K by default
        exact (bool): sympy rational functions when True, contour integrals otherwise
        observable (str): "qq" or "y" (the unsubtracted <Y(x + eps12)>)
    """
    if not params.kind.is_rational:
        raise ValueError("Residue checks are defined for the rational theory")
    if K < 0:
        raise ValueError(f"Order must be non-negative, got {K}")
    K_inner = K if K_inner is None else K_inner
    obs = Observable.qq(K_inner, K) if observable == "qq" else Observable.qq(0, K)
    inner = K_inner if observable == "qq" else 0
    if exact:
        import sympy

        sym = params.convert("symbolic")
        x = sympy.Symbol("x")
        series = expectation(obs, sym, K, x, threads)
        poles = a0hat_candidate_poles(sym, K, inner)
        residues, max_residue, polynomial, degrees = _exact_analysis(series.coefficients(), x, poles, params.N)
        logger.info(f"Exact residue check: {len(poles)} candidate poles, max residue {max_residue}")
        return ResidueReport(poles, residues, max_residue, polynomial, 0 if polynomial else 1, True, degrees)

    fparams = params.convert("float64")
    poles = a0hat_candidate_poles(fparams, K, inner)
    func = lambda point: expectation(obs, fparams, K, point, threads)
    residues = []
    for x0 in poles:
        residues.append(contour_residue(func, complex(x0)))
    residue_rows = [list(col) for col in zip(*residues)] if residues else [[] for _ in range(K + 1)]
    max_residue = max([abs(r) for row in residue_rows for r in row] + [0.0])
    center = complex(np.mean([complex(a) for a in fparams.a]))
    fit = polynomial_fit_residual(func, params.N, center, radius=1.0 + fparams.scale())
    logger.info(f"Float residue check: {len(poles)} candidate poles, max residue {max_residue:.3e}")
    return ResidueReport(poles, residue_rows, max_residue, fit < 1e-9, fit, False)


# A_r theory

@dataclass(frozen=True)
class ArParams:
    """
    Parameters of the A_r quiver with frozen end nodes.

    Attributes:
        r (int): number of gauge nodes
        moduli (tuple): N x (r+2) table a[alpha][s]; s = 0 and s = r+1 hold the masses
        eps (tuple): (eps_1, eps_2, eps_3)
        fugacities (tuple): q_1..q_r
        z0: base value of the z_i
        kind (TheoryKind): theta variant
    """

    r: int
    moduli: Tuple[Tuple[Any, ...], ...]
    eps: Tuple[Any, Any, Any]
    fugacities: Tuple[Any, ...]
    z0: Any = 1
    kind: TheoryKind = H

    def __post_init__(self):
        object.__setattr__(self, "moduli", tuple(tuple(row) for row in self.moduli))
        object.__setattr__(self, "eps", tuple(self.eps))
        object.__setattr__(self, "fugacities", tuple(self.fugacities))
        if self.r < 1:
            raise ValueError(f"A_r theory needs r >= 1, got {self.r}")
        if any(len(row) != self.r + 2 for row in self.moduli):
            raise ValueError("Every color needs r + 2 moduli (masses at both ends)")
        if len(self.fugacities) != self.r:
            raise ValueError(f"Expected {self.r} node fugacities, got {len(self.fugacities)}")

    @property
    def N(self) -> int:
        return len(self.moduli)

    def eps_values(self):
        e1, e2, e3 = self.eps
        return (e1, e2, e3, -(e1 + e2 + e3))

    def moduli_values(self) -> Dict[Hashable, Any]:
        return {(alpha, s): value for alpha, row in enumerate(self.moduli) for s, value in enumerate(row)}

    def scale(self) -> float:
        values = [v for row in self.moduli for v in row] + list(self.eps)
        return max([1.0] + [abs(complex(v)) for v in values])

    def mass_minus(self, alpha: int):
        return self.moduli[alpha][0]

    def mass_plus(self, alpha: int):
        return self.moduli[alpha][self.r + 1] + self.eps[0] + self.eps[1]

    def z(self, i: int):
        value = self.z0
        for s in range(1, i + 1):
            value = value * self.fugacities[s - 1]
        return value

    def convert(self, mode: str) -> "ArParams":
        if mode in ("exact", "symbolic") and not self.kind.is_rational:
            raise ConfigError("Exact arithmetic is only available for the rational (4d) theory")
        conv = lambda v: convert_value(v, mode)
        return ArParams(
            self.r,
            tuple(tuple(conv(v) for v in row) for row in self.moduli),
            tuple(conv(v) for v in self.eps),
            tuple(conv(v) for v in self.fugacities),
            conv(self.z0),
            self.kind,
        )


def _ar_nodes(mps: Sequence[MultiPartition], params: ArParams) -> List[MultiPartition]:
    if len(mps) != params.r:
        raise ValueError(f"Expected configurations for {params.r} nodes, got {len(mps)}")
    frozen = MultiPartition.empty(params.N)
    return [frozen] + list(mps) + [frozen]


def ar_measure_factors(mps: Sequence[MultiPartition], params: ArParams):
    """
    Vector multiplets (s = l, denominators) and bifundamentals (l = s + 1, numerators).
    """
    nodes = _ar_nodes(mps, params)
    factors = []
    for s in range(params.r + 2):
        for l in (s, s + 1):
            if l > params.r + 1:
                continue
            for alpha, lam_alpha in enumerate(nodes[s]):
                for beta, lam_beta in enumerate(nodes[l]):
                    for v in pair_arguments(lam_alpha, lam_beta, (alpha, s), (beta, l)):
                        factors.append((None, v) if l == s else (v, None))
    return factors


def ar_measure(mps: Sequence[MultiPartition], params: ArParams, tol: float = 1e-12):
    """Measure of an A_r configuration including prod q_s^{k_s}."""
    weight = 1
    for q_s, mp in zip(params.fugacities, mps):
        weight = weight * q_s ** mp.total_size()
    return weight * evaluate_factors(ar_measure_factors(mps, params), params, tol)


def ar_y_factors(s: int, mps: Sequence[MultiPartition], params: ArParams, shift: LatticeVector = LatticeVector()) -> Factors:
    nodes = _ar_nodes(mps, params)
    if not 0 <= s <= params.r + 1:
        raise ValueError(f"Node index must be in 0..{params.r + 1}, got {s}")
    return y_factors(nodes[s], shift, key=lambda alpha: (alpha, s))


def ar_y_observable(s: int, x, mps: Sequence[MultiPartition], params: ArParams):
    """
    Y_s(x) at node s; for s = 0 and s = r + 1 the mass polynomials
    prod theta(x - m^-) and prod theta(x + eps12 - m^+).
    """
    return evaluate_ratio(ar_y_factors(s, mps, params), params.eps_values(), params.moduli_values(), x, params.kind)


def ar_qq_terms(l: int, mps: Sequence[MultiPartition], params: ArParams) -> List[Tuple[Tuple[int, ...], Factors]]:
    """
    Terms of the l-th qq-character: for each 0 <= i_1 < ... < i_l <= r the product
    Y_0(x + eps12 (1 - l)) prod_b Lambda_{i_b}(x + eps12 (b - l)) / z_{b-1}.

    The b-th Lambda is shifted by (b - l) eps12, not (b - 1) eps12: with this
    shift the term i_b = b - 1 telescopes to Y_l(x + eps12), the leading term
    of X_l, and the Y_0 prefactor cancels.
    """
    if not 1 <= l <= params.r + 1:
        raise ValueError(f"qq-character index must be in 1..{params.r + 1}, got {l}")
    terms = []
    for indices in combinations(range(params.r + 1), l):
        factors = ar_y_factors(0, mps, params, (1 - l) * E12)
        for b, i in enumerate(indices, start=1):
            shift = (b - l) * E12
            factors.extend(ar_y_factors(i + 1, mps, params, shift + E12))
            factors.extend(ar_y_factors(i, mps, params, shift), invert=True)
        terms.append((indices, factors))
    return terms


def _z_ratio(params: ArParams, indices: Sequence[int]):
    """prod_b z_{i_b} / z_{b-1} and its degree in the node fugacities."""
    value = 1
    degree = 0
    for b, i in enumerate(indices, start=1):
        for s in range(b, i + 1):
            value = value * params.fugacities[s - 1]
        degree += i - b + 1
    return value, degree


def ar_qq_character_series(l: int, x, mps: Sequence[MultiPartition], params: ArParams, order: int) -> QSeries:
    """The l-th qq-character graded by the number of fugacity factors."""
    eps_values = params.eps_values()
    moduli = params.moduli_values()
    buckets = [[] for _ in range(order + 1)]
    for indices, factors in ar_qq_terms(l, mps, params):
        ratio, degree = _z_ratio(params, indices)
        if degree > order:
            continue
        buckets[degree].append(ratio * evaluate_ratio(factors, eps_values, moduli, x, params.kind))
    return QSeries([stable_sum(b) for b in buckets], order)


def ar_qq_character(l: int, x, mps: Sequence[MultiPartition], params: ArParams):
    """Sum of all terms of the l-th qq-character."""
    eps_values = params.eps_values()
    moduli = params.moduli_values()
    values = []
    for indices, factors in ar_qq_terms(l, mps, params):
        ratio, _ = _z_ratio(params, indices)
        values.append(ratio * evaluate_ratio(factors, eps_values, moduli, x, params.kind))
    return stable_sum(values)


def ar_configurations(params: ArParams, K: int) -> List[Tuple[int, Tuple[MultiPartition, ...]]]:
    """All node configurations of total size <= K with their size."""
    configs = []
    for k in range(K + 1):
        for flat in enumerate_multipartitions(params.N * params.r, k):
            nodes = tuple(
                MultiPartition(flat.entries[s * params.N:(s + 1) * params.N]) for s in range(params.r)
            )
            configs.append((k, nodes))
    return configs


def ar_expectation(l: int, params: ArParams, K: int, x, threads: int = 1) -> QSeries:
    """<X_l(x)> graded by total instanton number, truncated after order K."""
    configs = ar_configurations(params, K)

    def evaluate(item):
        k, mps = item
        return k, ar_measure(mps, params), ar_qq_character_series(l, x, mps, params, K)

    return _accumulate(_parallel_map(evaluate, configs, threads), K)


def ar_candidate_poles(params: ArParams, K: int, l: int) -> List[Any]:
    eps_values = params.eps_values()
    moduli = params.moduli_values()
    poles = []
    for _, mps in ar_configurations(params, K):
        for _, factors in ar_qq_terms(l, mps, params):
            poles.extend(_pole_locations(factors, eps_values, moduli))
    return _unique(poles)


def ar_expectation_pole_check(params: ArParams, K: int, l: int, exact: bool = True, threads: int = 1) -> ResidueReport:
    """
    Residues of <X_l(x)> coefficients at every candidate pole, and the
    check that each coefficient is a polynomial of degree <= N.
    """
    if not params.kind.is_rational:
        raise ValueError("Residue checks are defined for the rational theory")
    if exact:
        import sympy

        sym = params.convert("symbolic")
        x = sympy.Symbol("x")
        series = ar_expectation(l, sym, K, x, threads)
        poles = ar_candidate_poles(sym, K, l)
        residues, max_residue, polynomial, degrees = _exact_analysis(series.coefficients(), x, poles, params.N)
        return ResidueReport(poles, residues, max_residue, polynomial, 0 if polynomial else 1, True, degrees)

    fparams = params.convert("float64")
    poles = ar_candidate_poles(fparams, K, l)
    func = lambda point: ar_expectation(l, fparams, K, point, threads)
    residues = [contour_residue(func, complex(x0)) for x0 in poles]
    residue_rows = [list(col) for col in zip(*residues)] if residues else [[] for _ in range(K + 1)]
    max_residue = max([abs(r) for row in residue_rows for r in row] + [0.0])
    center = complex(np.mean([complex(v) for row in fparams.moduli for v in row]))
    fit = polynomial_fit_residual(func, params.N, center, radius=1.0 + fparams.scale())
    return ResidueReport(poles, residue_rows, max_residue, fit < 1e-9, fit, False)


# Gauge origami

def origami_factors(mp1: MultiPartition, mp2: MultiPartition) -> Factors:
    """
    Theta arguments of the origami observable; y = x - a_alpha + b_beta, c12 on
    the first factor and c34 on the second.
    """
    factors = Factors()
    for alpha, lam in enumerate(mp1):
        outer = sorted_boxes(lam.outer_boundary())
        inner = sorted_boxes(lam.inner_boundary())
        for beta, lam2 in enumerate(mp2):
            y = X - LatticeVector.modulus(("a", alpha)) + LatticeVector.modulus(("b", beta))
            outer2 = sorted_boxes(lam2.outer_boundary())
            inner2 = sorted_boxes(lam2.inner_boundary())
            for box in outer:
                for box2 in outer2:
                    factors.num.append(y + E12 + c34(box2) - c12(box))
                for box2 in inner2:
                    factors.den.append(y + c34(box2) - c12(box))
            for box in inner:
                for box2 in inner2:
                    factors.num.append(y - E12 + c34(box2) - c12(box))
                for box2 in outer2:
                    factors.den.append(y + c34(box2) - c12(box))
    return factors


def origami_second_params(params: ParamSet, b: Sequence[Any]) -> ParamSet:
    """Parameters of the second factor: moduli b with (eps_3, eps_4; eps_1)."""
    return ParamSet(tuple(b), (params.eps3, params.eps4, params.eps1), params.q, params.kind)


def _origami_moduli(params1: ParamSet, params2: ParamSet) -> Dict[Hashable, Any]:
    moduli = {("a", alpha): value for alpha, value in enumerate(params1.a)}
    moduli.update({("b", beta): value for beta, value in enumerate(params2.a)})
    return moduli


def origami_xtilde(x, mp_pair: Tuple[MultiPartition, MultiPartition], params1: ParamSet, params2: ParamSet):
    """The origami observable on a pair of multipartitions (N colors, M colors)."""
    mp1, mp2 = mp_pair
    return evaluate_ratio(origami_factors(mp1, mp2), params1.eps_values(), _origami_moduli(params1, params2), x,
                          params1.kind)


def origami_pushforward(x, mp1: MultiPartition, params1: ParamSet, params2: ParamSet, K_inner: int) -> QSeries:
    """
    Sum over the second factor of q^{|mp2|} mu_2(mp2) X~(x)[mp1, mp2] with |mp2| <= K_inner.

    For a single second color this equals the qq-character at x + b.
    """
    coeffs = []
    for n in range(K_inner + 1):
        terms = []
        for mp2 in enumerate_multipartitions(params2.N, n):
            weight = measure_a0hat(mp2, params2)
            if weight == 0:
                continue
            terms.append(weight * origami_xtilde(x, (mp1, mp2), params1, params2))
        coeffs.append(stable_sum(terms))
    return QSeries(coeffs, K_inner)
