"""
Nekrasov Measures Module

The A0-hat measure on multipartitions in its rational, trigonometric and
elliptic versions, the instanton partition function and prepotential, closed
forms of the one- and two-instanton terms, the N=1 product formula, the
Plancherel weight and its limit, and the orbifold (surface defect) measure
together with the projection onto ordinary multipartitions.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, Hashable, Iterable, Iterator, List, Optional, Sequence, Tuple

from tqdm import tqdm

from errors import ResonanceError, TruncationError
from lattice import Grading, LatticeVector, ParamSet, graded_theta, resonance_check
from partitions import (
    MultiPartition,
    Partition,
    enumerate_multipartitions,
    hook_product,
)
from qseries import QSeries, _divide, stable_sum
from specfun import theta

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12
E3 = LatticeVector.build(e3=1)


def pair_arguments(lam_alpha: Partition, lam_beta: Partition,
                   key_alpha: Hashable, key_beta: Hashable) -> Iterator[LatticeVector]:
    """
    Denominator arguments contributed by an ordered pair of colors.

    Boxes of lambda^beta give eps_1 (i - lambda^beta^t_j) + eps_2 (1 + lambda^alpha_i - j),
    boxes of lambda^alpha give eps_1 (lambda^alpha^t_j + 1 - i) + eps_2 (j - lambda^beta_i),
    both shifted by a_alpha - a_beta.
    """
    a_diff = LatticeVector(moduli=((key_alpha, 1), (key_beta, -1)))
    for i, j in lam_beta.boxes():
        yield LatticeVector.build(e1=i - lam_beta.column(j), e2=1 + lam_alpha.row(i) - j) + a_diff
    for i, j in lam_alpha.boxes():
        yield LatticeVector.build(e1=lam_alpha.column(j) + 1 - i, e2=j - lam_beta.row(i)) + a_diff


def measure_factors(mp: MultiPartition) -> List[Tuple[LatticeVector, LatticeVector]]:
    """(numerator, denominator) theta arguments of the A0-hat measure."""
    factors = []
    for alpha, lam_alpha in enumerate(mp):
        for beta, lam_beta in enumerate(mp):
            for v in pair_arguments(lam_alpha, lam_beta, alpha, beta):
                factors.append((v + E3, v))
    return factors


def evaluate_factors(factors: Iterable[Tuple[Optional[LatticeVector], Optional[LatticeVector]]],
                     params: ParamSet, tol: float = DEFAULT_TOL,
                     kernel: Optional[Callable] = None,
                     moduli_values: Optional[Dict[Hashable, object]] = None):
    """
    Product of kernel(numerator) / kernel(denominator) over the factors.

    Args:
        factors: pairs of lattice vectors; None stands for a missing factor
        params (ParamSet): generator values and theta kind
        tol (float): resonance threshold relative to the parameter scale
        kernel: function (vector, value) -> theta value; plain theta by default
        moduli_values: overrides params.moduli_values()
    """
    eps_values = params.eps_values()
    moduli = params.moduli_values() if moduli_values is None else moduli_values
    if kernel is None:
        kernel = lambda vector, value: theta(value, params.kind)
    scale = params.scale() if tol else 1.0
    numerator = 1
    denominator = 1
    for num_vec, den_vec in factors:
        if num_vec is not None:
            numerator = numerator * kernel(num_vec, num_vec.evaluate(eps_values, moduli))
        if den_vec is not None:
            value = kernel(den_vec, den_vec.evaluate(eps_values, moduli))
            resonance_check(value, den_vec, tol, scale)
            denominator = denominator * value
    return _divide(numerator, denominator)


def measure_a0hat(mp: MultiPartition, params: ParamSet, tol: float = DEFAULT_TOL):
    """
    Weight of a multipartition under the A0-hat measure.

    Args:
        mp (MultiPartition): N partitions, N = params.N
        params (ParamSet): moduli, eps and theta kind

    Returns:
        The double product over colors and boxes; 1 for the empty configuration.
    """
    if len(mp) != params.N:
        raise ValueError(f"Multipartition has {len(mp)} colors, parameters have {params.N}")
    return evaluate_factors(measure_factors(mp), params, tol)


def _parallel_map(func: Callable, items: Sequence, threads: int = 1, progress: bool = False, desc: str = ""):
    items = list(items)
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = pool.map(func, items)
            return list(tqdm(results, total=len(items), desc=desc, disable=not progress))
    return [func(item) for item in tqdm(items, desc=desc, disable=not progress)]


def z_inst(params: ParamSet, K: int, threads: int = 1, progress: bool = False) -> QSeries:
    """
    Instanton partition function truncated after q^K.

    The coefficient of q^k is the sum of measure_a0hat over all multipartitions
    of total size k, taken in enumerate_multipartitions order.
    """
    if K < 0:
        raise ValueError(f"Order must be non-negative, got {K}")
    coeffs = []
    try:
        for k in range(K + 1):
            mps = enumerate_multipartitions(params.N, k)
            values = _parallel_map(lambda mp: measure_a0hat(mp, params), mps, threads, progress, f"Z_{k}")
            coeffs.append(stable_sum(values))
            logger.debug(f"Z_{k} = {coeffs[-1]} from {len(mps)} multipartitions")
    except ResonanceError as e:
        logger.error(f"Error computing instanton series: {str(e)}")
        raise
    return QSeries(coeffs, K)


def _aij(params: ParamSet, alpha: int, beta: int):
    return params.a[alpha] - params.a[beta]


def _one_box_factor(params: ParamSet):
    e1, e2, e3 = params.eps
    return _divide((e3 + e2) * (e3 + e1), e2 * e1)


def z1_closed_form(params: ParamSet):
    """One-instanton term as a sum over colors (rational theory)."""
    e1, e2, e3 = params.eps
    total = 0
    for alpha in range(params.N):
        term = 1
        for beta in range(params.N):
            if beta == alpha:
                continue
            a_ba = _aij(params, beta, alpha)
            a_ab = _aij(params, alpha, beta)
            term = term * _divide((e3 + a_ba) * (e3 + e1 + e2 + a_ab), a_ba * (e1 + e2 + a_ab))
        total = total + term
    return _one_box_factor(params) * total


def _column_pair_term(params: ParamSet, alpha: int, ea, eb):
    """Two boxes stacked along the direction of ea (ea = eps_1 gives (1,1), ea = eps_2 gives (2))."""
    e3 = params.eps3
    head = _divide((e3 - ea + eb) * (e3 + 2 * ea) * (e3 + eb) * (e3 + ea), (-ea + eb) * 2 * ea * eb * ea)
    for beta in range(params.N):
        if beta == alpha:
            continue
        a_ab = _aij(params, alpha, beta)
        a_ba = -a_ab
        head = head * _divide(
            (e3 + 2 * ea + eb + a_ab) * (e3 + ea + eb + a_ab) * (e3 - ea + a_ba) * (e3 + a_ba),
            (2 * ea + eb + a_ab) * (ea + eb + a_ab) * (-ea + a_ba) * a_ba,
        )
    return head


def _two_color_term(params: ParamSet, alpha1: int, alpha2: int):
    e1, e2, e3 = params.eps
    a12 = _aij(params, alpha1, alpha2)
    value = _one_box_factor(params) ** 2 * _divide(
        ((e3 + e2) ** 2 - a12 ** 2) * ((e3 + e1) ** 2 - a12 ** 2),
        (e2 ** 2 - a12 ** 2) * (e1 ** 2 - a12 ** 2),
    )
    for beta in range(params.N):
        if beta in (alpha1, alpha2):
            continue
        a1b = _aij(params, alpha1, beta)
        a2b = _aij(params, alpha2, beta)
        value = value * _divide(
            (e3 + e1 + e2 + a1b) * (e3 + e1 + e2 + a2b) * (e3 - a1b) * (e3 - a2b),
            (e1 + e2 + a1b) * (e1 + e2 + a2b) * (-a1b) * (-a2b),
        )
    return value


def z2_closed_form(params: ParamSet):
    """
    Two-instanton term (rational theory).

    Sum over alpha of the (1,1) and (2) single-color terms plus half the sum over
    ordered pairs alpha1 != alpha2 of the two single-box term.
    """
    e1, e2, _ = params.eps
    total = 0
    for alpha in range(params.N):
        total = total + _column_pair_term(params, alpha, e1, e2) + _column_pair_term(params, alpha, e2, e1)
    pairs = 0
    for alpha1 in range(params.N):
        for alpha2 in range(params.N):
            if alpha1 != alpha2:
                pairs = pairs + _two_color_term(params, alpha1, alpha2)
    return total + _divide(pairs, 2)


def prepotential(params: ParamSet, K: int, threads: int = 1) -> QSeries:
    """F = eps_1 eps_2 log Z, truncated after q^K."""
    if K < 1:
        raise ValueError(f"Prepotential needs order >= 1, got {K}")
    z = z_inst(params, K, threads=threads)
    return z.log() * (params.eps1 * params.eps2)


def prepotential_limit_f1(params: ParamSet):
    """
    Leading term of F_1 as eps_1 = -eps_2 -> 0.

    eps_3^2 sum_alpha prod_{beta != alpha} (a_{alpha beta}^2 - eps_3^2) / a_{alpha beta}^2
    """
    e3 = params.eps3
    total = 0
    for alpha in range(params.N):
        term = 1
        for beta in range(params.N):
            if beta != alpha:
                a2 = _aij(params, alpha, beta) ** 2
                term = term * _divide(a2 - e3 ** 2, a2)
        total = total + term
    return e3 ** 2 * total


def _divisor_sum(k: int) -> int:
    return sum(d for d in range(1, k + 1) if k % d == 0)


def n1_partition_function(params: ParamSet, K: int, threads: int = 1) -> QSeries:
    """Instanton series of the single-color theory, to be compared with n1_product_series."""
    if params.N != 1:
        raise ValueError(f"Expected a single Coulomb modulus, got {params.N}")
    return z_inst(params, K, threads=threads)


def n1_product_series(params: ParamSet, K: int) -> QSeries:
    """
    prod_{n>=1} (1 - q^n)^{-c}, c = (eps_3+eps_1)(eps_3+eps_2)/(eps_1 eps_2), to order K.

    Computed as exp(c sum_k sigma(k)/k q^k).
    """
    e1, e2, e3 = params.eps
    if e1 * e2 == 0:
        raise ValueError("eps_1 eps_2 must be nonzero")
    exponent = _divide((e3 + e1) * (e3 + e2), e1 * e2)
    log_series = [0] + [exponent * Fraction(_divisor_sum(k), k) for k in range(1, K + 1)]
    return QSeries(log_series, K).exp()


def plancherel_weight(lam: Partition, Lambda, hbar):
    """(-Lambda^2 / hbar^2)^{|lambda|} / prod hooks^2."""
    if hbar == 0:
        raise ValueError("hbar must be nonzero")
    base = _divide(-Lambda ** 2, hbar ** 2)
    return _divide(base ** lam.size(), hook_product(lam) ** 2)


def plancherel_limit_check(lam: Partition, scales: Sequence, hbar=1, Lambda=1) -> List[float]:
    """
    Relative deviation of q^{|lambda|} mu from the Plancherel weight.

    Uses N = 1, eps_1 = -eps_2 = hbar, eps_3 = s and q = Lambda^2 / s^2 for each s.
    """
    weight = plancherel_weight(lam, Lambda, hbar)
    errors = []
    for s in scales:
        params = ParamSet((0,), (hbar, -hbar, s))
        q = _divide(Lambda ** 2, s ** 2)
        value = q ** lam.size() * measure_a0hat(MultiPartition((lam,)), params)
        errors.append(float(abs(_divide(value, weight) - 1)))
    return errors


# Surface defects

def column_color_counts(mp: MultiPartition, coloring: Sequence[int], N: int) -> List[int]:
    """k_omega: number of boxes whose column color c(alpha) + j - 1 is omega mod N."""
    counts = [0] * N
    for alpha, lam in enumerate(mp):
        for _, j in lam.boxes():
            counts[(coloring[alpha] + j - 1) % N] += 1
    return counts


def orbifold_measure(mp: MultiPartition, coloring: Sequence[int], fugacities: Sequence,
                     params: ParamSet, tol: float = DEFAULT_TOL):
    """
    Orbifold measure: prod q_omega^{k_omega} times the A0-hat double product with theta -> theta^delta.

    Only graded-zero denominators are checked for resonance.
    """
    N = params.N
    if len(mp) != N or len(coloring) != N or len(fugacities) != N:
        raise ValueError("Multipartition, coloring and fugacities must all have N entries")
    grading = Grading.orbifold(coloring)
    kernel = lambda vector, value: graded_theta(vector, value, grading, params.kind)
    weight = 1
    for q_omega, k_omega in zip(fugacities, column_color_counts(mp, coloring, N)):
        weight = weight * q_omega ** k_omega
    return weight * evaluate_factors(measure_factors(mp), params, tol, kernel=kernel)


def pi_map(mp: MultiPartition, N: int) -> MultiPartition:
    """
    Lambda^(alpha)t_j = lambda^(alpha)t_{alpha + N(j-1)}, alpha = 1..N.

    Columns of each diagram are subsampled with stride N starting at its color index.
    """
    images = []
    for index, lam in enumerate(mp):
        alpha = index + 1
        columns = lam.transpose().parts
        kept = []
        position = alpha
        while position <= len(columns):
            kept.append(columns[position - 1])
            position += N
        images.append(Partition(tuple(kept)).transpose())
    return MultiPartition(tuple(images))


def _fiber_color(image: Partition, alpha: int, N: int, budget: int) -> List[Partition]:
    """Partitions lambda with size <= budget whose alpha-th projection is image."""
    fixed_columns = image.transpose().parts
    fixed = {alpha + N * j: value for j, value in enumerate(fixed_columns)}
    last = alpha + N * len(fixed_columns) - 1
    next_fixed = {}
    lower = 0
    for position in range(last, 0, -1):
        next_fixed[position] = lower
        if position in fixed:
            lower = fixed[position]

    def columns(position: int, previous: int, remaining: int):
        if position > last:
            yield ()
            return
        if position in fixed:
            value = fixed[position]
            if value > previous or value > remaining:
                return
            for rest in columns(position + 1, value, remaining - value):
                yield (value,) + rest
            return
        for value in range(min(previous, remaining), next_fixed[position] - 1, -1):
            for rest in columns(position + 1, value, remaining - value):
                yield (value,) + rest

    found = []
    for cols in columns(1, budget, budget):
        found.append(Partition(tuple(c for c in cols if c > 0)).transpose())
    return found


def fiber(image: MultiPartition, N: int, bound: int) -> List[MultiPartition]:
    """
    All multipartitions of total size <= bound that pi_map sends to image.

    Sorted by total size, then by their JSON form.
    """
    per_color = [_fiber_color(lam, alpha + 1, N, bound) for alpha, lam in enumerate(image)]
    result = []
    for combo in product(*per_color):
        mp = MultiPartition(tuple(combo))
        if mp.total_size() <= bound:
            result.append(mp)
    result.sort(key=lambda m: (m.total_size(), m.to_json()))
    return result


def defect_density(image: MultiPartition, coloring: Sequence[int], fugacities: Sequence,
                   params: ParamSet, bound: int, tol: float = DEFAULT_TOL):
    """
    Surface defect density: sum of the orbifold measure over the truncated fiber
    divided by q^{|image|} mu(image), q = prod q_omega.

    Raises:
        TruncationError: when no fiber element fits within bound
    """
    N = params.N
    elements = fiber(image, N, bound)
    if not elements:
        raise TruncationError(
            f"Empty fiber over {image.to_json()} at truncation order {bound}", order=bound
        )
    total = stable_sum(orbifold_measure(mp, coloring, fugacities, params, tol) for mp in elements)
    q = 1
    for q_omega in fugacities:
        q = q * q_omega
    base = q ** image.total_size() * measure_a0hat(image, params, tol)
    logger.debug(f"Defect density over {image.to_json()}: {len(elements)} fiber elements")
    return _divide(total, base)
