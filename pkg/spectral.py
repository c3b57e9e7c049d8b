"""
Spectral Curve Module

Thermodynamic-limit objects built from diagonal data: the companion matrix
C_z, the matrix function D(z, x) whose determinant is the spectral curve
R(x, z), and the Lax operator L(z) = -D_0(z)^{-1} D_1(z) of the rational case
with its rank-one residues.
"""

import cmath
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import linalg

from errors import NumericalError, PoleError

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

COND_LIMIT = 1e12
RANK_TOL = 1e-10


def cz_matrix(z, N: int) -> np.ndarray:
    """
    Companion matrix C_z: ones on the superdiagonal and 1/z in the lower-left corner.

    C_z^N = z^{-1} times the identity.
    """
    if z == 0:
        raise ValueError("The companion matrix needs z != 0")
    if N < 1:
        raise ValueError(f"Matrix size must be positive, got {N}")
    C = np.zeros((N, N), dtype=complex)
    C[np.arange(N - 1), np.arange(1, N)] = 1
    C[N - 1, 0] += 1 / complex(z)
    return C


def det_one_minus_cz_a(z, A_diag: Sequence[Any], exact: bool = False):
    """
    det(1 - C_z A) for A = diag(A_diag), computed directly.

    Equals 1 - det(A) / z. With exact=True the determinant is taken over
    sympy rationals.
    """
    if z == 0:
        raise ValueError("det(1 - C_z A) needs z != 0")
    N = len(A_diag)
    if exact:
        import sympy

        zs = sympy.nsimplify(z)
        C = sympy.zeros(N, N)
        for i in range(N - 1):
            C[i, i + 1] = 1
        C[N - 1, 0] += 1 / zs
        A = sympy.diag(*[sympy.nsimplify(a) for a in A_diag])
        return sympy.simplify((sympy.eye(N) - C * A).det())
    C = cz_matrix(z, N)
    return complex(linalg.det(np.eye(N) - C @ np.diag(np.asarray(A_diag, dtype=complex))))


def ordered_product(matrices: Sequence[np.ndarray], N: int) -> np.ndarray:
    """M_0 M_1 ... M_k, left to right."""
    result = np.eye(N, dtype=complex)
    for M in matrices:
        result = result @ M
    return result


@dataclass
class DiagonalData:
    """
    Diagonal matrices Z_0..Z_r and diagonal functions Y'_0(x)..Y'_{r+1}(x).

    Attributes:
        Z (np.ndarray): shape (r+1, N), entries z_{i, omega}
        Y (Callable): x -> array of shape (r+2, N), the diagonals of Y'_i(x)
    """

    Z: np.ndarray
    Y: Callable[[Any], np.ndarray]

    def __post_init__(self):
        self.Z = np.atleast_2d(np.asarray(self.Z, dtype=complex))
        if np.any(self.Z == 0):
            raise ValueError("Diagonal entries z_{i,omega} must be nonzero")

    @property
    def N(self) -> int:
        return self.Z.shape[1]

    @property
    def r(self) -> int:
        return self.Z.shape[0] - 1

    def z_values(self) -> np.ndarray:
        """z_i = det Z_i."""
        return np.prod(self.Z, axis=1)

    def y_values(self, x) -> np.ndarray:
        values = np.asarray(self.Y(x), dtype=complex)
        if values.shape != (self.r + 2, self.N):
            raise ValueError(f"Y(x) must have shape {(self.r + 2, self.N)}, got {values.shape}")
        return values

    def scalars(self, x) -> np.ndarray:
        """Y'_i(x) = det Y'_i(x)."""
        return np.prod(self.y_values(x), axis=1)

    def lambdas(self, x) -> np.ndarray:
        """Lambda_i(x) = Z_i Y'_{i+1}(x) / Y'_i(x), i = 0..r."""
        y = self.y_values(x)
        if np.any(y[:-1] == 0):
            raise PoleError(f"Vanishing Y' in a denominator at x={x}", point=x)
        return self.Z * y[1:] / y[:-1]

    @classmethod
    def linear(cls, Z: np.ndarray, B: np.ndarray) -> "DiagonalData":
        """Y'_i(x) = diag(x - b_{i, omega}) for B of shape (r+2, N)."""
        B = np.asarray(B, dtype=complex)
        return cls(Z, lambda x: x - B)


def build_D(z, x, data: DiagonalData) -> np.ndarray:
    """
    D(z, x) = Y'_0(x) prod_{i=0..r} (1 - C_z Lambda_i(x)), product ordered left to right.

    Its determinant is the spectral curve R(x, z) with z_i = det Z_i and
    Y'_i = det Y'_i.
    """
    N = data.N
    C = cz_matrix(z, N)
    identity = np.eye(N, dtype=complex)
    factors = [identity - C @ np.diag(lam) for lam in data.lambdas(x)]
    return np.diag(data.y_values(x)[0]) @ ordered_product(factors, N)


def spectral_curve(x, z, scalars: Sequence[Any], z_list: Sequence[Any]):
    """
    R(x, z) = Y'_0(x) prod_{i=0..r} (1 - z^{-1} z_i Y'_{i+1}(x) / Y'_i(x)).

    Args:
        x: point (only used in error messages; scalars are already sampled at x)
        z: spectral parameter, nonzero
        scalars: Y'_0(x)..Y'_{r+1}(x)
        z_list: z_0..z_r
    """
    if len(scalars) != len(z_list) + 1:
        raise ValueError(f"Need r+2 scalars for r+1 values z_i, got {len(scalars)} and {len(z_list)}")
    if z == 0:
        raise ValueError("The spectral curve needs z != 0")
    value = scalars[0]
    for i, z_i in enumerate(z_list):
        if scalars[i] == 0:
            raise PoleError(f"Vanishing Y'_{i} at x={x}", point=x)
        value = value * (1 - z_i * scalars[i + 1] / (z * scalars[i]))
    return value


def spectral_curve_expansion(x, z, scalars: Sequence[Any], z_list: Sequence[Any]):
    """
    R(x, z) as Y'_0(x) sum_s (-1/z)^s e_s(Lambda), e_s the elementary symmetric
    functions of Lambda_i = z_i Y'_{i+1} / Y'_i.
    """
    lam = [z_i * scalars[i + 1] / scalars[i] for i, z_i in enumerate(z_list)]
    # np.poly gives the coefficients (-1)^s e_s of prod (t - Lambda_i)
    signed = np.poly(np.asarray(lam, dtype=complex))
    return scalars[0] * sum(c * complex(z) ** (-s) for s, c in enumerate(signed))


@dataclass
class GaudinData:
    """
    Data of the rational (Gaudin) case where D(z, x) = x D_0(z) + D_1(z) with

        D_0 = prod_{i=0..r} (1 - C_z Z_i),
        D_1 = sum_{s=0..r+1} prod_{i<s} (-C_z Z_i) B_s.

    Attributes:
        Z (np.ndarray): shape (r+1, N)
        B (np.ndarray): shape (r+2, N)
    """

    Z: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        self.Z = np.atleast_2d(np.asarray(self.Z, dtype=complex))
        self.B = np.atleast_2d(np.asarray(self.B, dtype=complex))
        if self.B.shape != (self.Z.shape[0] + 1, self.Z.shape[1]):
            raise ValueError(f"B must have shape {(self.Z.shape[0] + 1, self.Z.shape[1])}, got {self.B.shape}")
        if np.any(self.Z == 0):
            raise ValueError("Diagonal entries z_{i,omega} must be nonzero")

    @property
    def N(self) -> int:
        return self.Z.shape[1]

    @property
    def r(self) -> int:
        return self.Z.shape[0] - 1

    def poles(self) -> np.ndarray:
        """z_i = det Z_i, the zeros of det D_0."""
        return np.prod(self.Z, axis=1)

    def D0(self, z) -> np.ndarray:
        C = cz_matrix(z, self.N)
        return ordered_product([np.eye(self.N) - C @ np.diag(row) for row in self.Z], self.N)

    def D1(self, z) -> np.ndarray:
        C = cz_matrix(z, self.N)
        total = np.zeros((self.N, self.N), dtype=complex)
        prefix = np.eye(self.N, dtype=complex)
        for s in range(self.r + 2):
            total = total + prefix @ np.diag(self.B[s])
            if s <= self.r:
                prefix = prefix @ (-C @ np.diag(self.Z[s]))
        return total

    def D(self, z, x) -> np.ndarray:
        return x * self.D0(z) + self.D1(z)

    def curve(self, x, z) -> complex:
        """R(x, z) = det D(z, x)."""
        return complex(linalg.det(self.D(z, x)))

    @classmethod
    def random(cls, N: int, r: int, rng: np.random.Generator, center: float = 5.0) -> "GaudinData":
        """
        Random data whose poles z_i are distinct and lie near `center`.
        """
        Z = np.exp(2j * np.pi * rng.random((r + 1, N)))
        targets = center + np.arange(r + 1) * 0.8 / (r + 1) + 0.1 * rng.random(r + 1) + 0.1j * rng.normal(size=r + 1)
        Z[:, -1] = targets / np.prod(Z[:, :-1], axis=1)
        B = rng.normal(size=(r + 2, N)) + 1j * rng.normal(size=(r + 2, N))
        return cls(Z, B)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GaudinData":
        """Z and B given as nested lists of numbers or [re, im] pairs."""

        def parse(rows):
            return np.array([[complex(*v) if isinstance(v, (list, tuple)) else complex(v) for v in row] for row in rows])

        return cls(parse(data["Z"]), parse(data["B"]))

    def to_dict(self) -> Dict[str, Any]:
        pack = lambda M: [[[v.real, v.imag] for v in row] for row in M]
        return {"Z": pack(self.Z), "B": pack(self.B)}


@dataclass
class LaxResult:
    """D_0(z), D_1(z) and L(z) = -D_0^{-1} D_1 at one spectral parameter."""

    z: complex
    D0: np.ndarray
    D1: np.ndarray
    L: np.ndarray
    condition: float


def lax_from_D(D: Callable[[Any, Any], np.ndarray], z, poles: Optional[Sequence[Any]] = None,
               linearity_tol: float = 1e-9) -> LaxResult:
    """
    Lax operator of a D(z, x) that is linear in x.

    D_0 = D(z, 1) - D(z, 0) and D_1 = D(z, 0); linearity is checked at x = 2.

    Raises:
        PoleError: z coincides with a declared pole
        NumericalError: D is not linear in x, or D_0(z) is ill-conditioned
    """
    if poles is not None:
        for z_i in poles:
            if abs(complex(z) - complex(z_i)) < 1e-12:
                raise PoleError(f"Lax operator evaluated at its pole z={z_i}", point=z_i)
    D1 = np.asarray(D(z, 0), dtype=complex)
    D0 = np.asarray(D(z, 1), dtype=complex) - D1
    deviation = np.linalg.norm(np.asarray(D(z, 2), dtype=complex) - (2 * D0 + D1))
    if deviation > linearity_tol * max(1.0, np.linalg.norm(D0) + np.linalg.norm(D1)):
        raise NumericalError(f"D(z, x) is not linear in x (deviation {deviation:.3e})")
    condition = float(np.linalg.cond(D0))
    if not np.isfinite(condition) or condition > COND_LIMIT:
        logger.error(f"Error building Lax operator: D_0({z}) has condition number {condition:.3e}")
        raise NumericalError(f"D_0(z) is singular at z={z}", condition=condition)
    lu, piv = linalg.lu_factor(D0)
    L = -linalg.lu_solve((lu, piv), D1)
    return LaxResult(complex(z), D0, D1, L, condition)


@dataclass
class ResidueInfo:
    """Residue matrix of L at a pole with its numerical rank."""

    pole: complex
    residue: np.ndarray
    singular_values: np.ndarray = field(repr=False)

    @property
    def sigma_ratio(self) -> float:
        s = self.singular_values
        return float(s[1] / s[0]) if len(s) > 1 and s[0] > 0 else 0.0

    @property
    def rank(self) -> int:
        s = self.singular_values
        if len(s) == 0 or s[0] == 0:
            return 0
        return int(np.sum(s / s[0] > RANK_TOL))


def residues_and_rank(L: Callable[[complex], np.ndarray], poles: Sequence[Any], method: str = "contour",
                      radius: float = 1e-3, n_points: int = 64) -> List[ResidueInfo]:
    """
    Residues of a matrix function at simple poles, with singular values.

    Args:
        L: z -> matrix
        poles: pole locations
        method (str): "contour" (trapezoid rule on a small circle) or
            "richardson" (extrapolated (z - z_i) L(z))
        radius (float): circle radius or first offset
        n_points (int): contour nodes

    Raises:
        NumericalError: poles closer together than ten radii
    """
    poles = [complex(p) for p in poles]
    for i in range(len(poles)):
        for j in range(i + 1, len(poles)):
            if abs(poles[i] - poles[j]) < 10 * radius:
                raise NumericalError(f"Poles {poles[i]} and {poles[j]} coalesce at radius {radius}")
    results = []
    for pole in poles:
        if method == "contour":
            total = None
            for m in range(n_points):
                phase = cmath.exp(2j * cmath.pi * m / n_points)
                value = np.asarray(L(pole + radius * phase)) * phase
                total = value if total is None else total + value
            residue = total * radius / n_points
        elif method == "richardson":
            coarse = radius * np.asarray(L(pole + radius))
            fine = radius / 2 * np.asarray(L(pole + radius / 2))
            residue = 2 * fine - coarse
        else:
            raise ValueError(f"Unknown residue method: {method}")
        results.append(ResidueInfo(pole, residue, linalg.svdvals(np.atleast_2d(residue))))
    return results


def gaudin_lax(data: GaudinData) -> Callable[[complex], np.ndarray]:
    poles = data.poles()
    return lambda z: lax_from_D(data.D, z, poles).L


def char_poly_check(data: GaudinData, x, z) -> float:
    """|det(x - L(z)) - R(x, z) / det D_0(z)| relative to the size of the terms."""
    result = lax_from_D(data.D, z, data.poles())
    lhs = complex(linalg.det(x * np.eye(data.N) - result.L))
    rhs = data.curve(x, z) / complex(linalg.det(result.D0))
    return abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs))


def curve_points(data: GaudinData, z, count: Optional[int] = None) -> np.ndarray:
    """
    Roots x of R(x, z) = det(x D_0 + D_1), a polynomial of degree N in x.

    The polynomial is recovered by interpolation at N + 1 nodes on the unit circle.
    """
    N = data.N
    nodes = np.exp(2j * np.pi * (np.arange(N + 1) + 0.25) / (N + 1))
    values = np.array([data.curve(x, z) for x in nodes])
    coeffs = np.linalg.solve(np.vander(nodes, N + 1), values)
    roots = np.roots(coeffs)
    roots = np.array(sorted(roots, key=lambda v: (v.real, v.imag)))
    return roots if count is None else roots[:count]


def cauchy_reconstruction_error(L: Callable[[complex], np.ndarray], residues: Sequence[ResidueInfo],
                                center: complex, radius: float, n_points: int = 128,
                                probes: Sequence[complex] = (0, 0.3, -0.25j)) -> float:
    """
    Analyticity test of G(z) = L(z) - sum_i R_i / (z - z_i) inside a circle.

    G at interior probe points (offsets relative to the radius) is compared with
    the Cauchy integral of G over the circle; returns the largest entry deviation.
    """
    def G(z):
        value = np.array(L(z), dtype=complex)
        for info in residues:
            value = value - info.residue / (z - info.pole)
        return value

    nodes = [center + radius * cmath.exp(2j * cmath.pi * m / n_points) for m in range(n_points)]
    boundary = [G(zeta) for zeta in nodes]
    worst = 0.0
    for offset in probes:
        w = center + offset * radius
        integral = sum(g * (zeta - center) / (zeta - w) for g, zeta in zip(boundary, nodes)) / n_points
        worst = max(worst, float(np.max(np.abs(integral - G(w)))))
    return worst
