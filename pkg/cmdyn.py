"""
Calogero-Moser Dynamics Module

Rational, trigonometric and elliptic Calogero-Moser systems: the rational Lax
pair and its conserved traces, equations of motion and time integration, the
moment-map form of the Lax matrix, the gauge-fixed trigonometric field E(x),
Krichever's elliptic Lax matrix and the reduced two-body elliptic invariants.

Positions and momenta are numpy arrays; they may be complex, in which case
every quantity is computed in complex arithmetic.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad, solve_ivp
from tqdm import tqdm

from errors import NumericalError, PoleError, SingularConfigurationError
from specfun import (
    EllipticCurveParams,
    jacobi_theta_odd,
    reduce_to_cell,
    theta_prime_zero,
    weierstrass_p,
    weierstrass_p_array,
)

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

KINDS = ("rational", "trig", "elliptic")
INTEGRATORS = ("rk4", "leapfrog", "dop853")
EPS_SEP = 1e-8


@dataclass
class PhasePoint:
    """
    A point (x, p) of the N-particle phase space with coupling nu.

    Attributes:
        x (np.ndarray): positions
        p (np.ndarray): momenta
        nu: coupling constant
    """

    x: np.ndarray
    p: np.ndarray
    nu: Any = 1.0

    def __post_init__(self):
        self.x = np.asarray(self.x)
        self.p = np.asarray(self.p)
        if self.x.ndim != 1 or self.x.shape != self.p.shape:
            raise ValueError(f"Positions and momenta must be vectors of equal length: {self.x.shape}, {self.p.shape}")
        if len(self.x) < 1:
            raise ValueError("At least one particle is required")
        if np.iscomplexobj(self.x) or np.iscomplexobj(self.p) or isinstance(self.nu, complex):
            self.x = self.x.astype(complex)
            self.p = self.p.astype(complex)
        else:
            self.x = self.x.astype(float)
            self.p = self.p.astype(float)

    @property
    def N(self) -> int:
        return len(self.x)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.x)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.p])

    @classmethod
    def from_vector(cls, y: np.ndarray, nu) -> "PhasePoint":
        n = len(y) // 2
        return cls(y[:n].copy(), y[n:].copy(), nu)

    def as_complex(self) -> "PhasePoint":
        return PhasePoint(self.x.astype(complex), self.p.astype(complex), self.nu)

    @classmethod
    def random(cls, rng: np.random.Generator, N: int, nu=1.0, spacing: float = 1.0,
               complex_values: bool = False) -> "PhasePoint":
        """
        Random state with sorted positions at least `spacing` apart.

        Args:
            rng (np.random.Generator): source of randomness
            N (int): number of particles
            nu: coupling
            spacing (float): minimal gap between neighbouring positions
            complex_values (bool): add small imaginary parts to x and p
        """
        gaps = spacing + rng.random(N)
        x = np.cumsum(gaps) - np.sum(gaps) / 2
        p = rng.normal(scale=0.5, size=N)
        if complex_values:
            x = x + 0.1j * rng.normal(size=N)
            p = p + 0.1j * rng.normal(size=N)
        return cls(x, p, nu)

    @classmethod
    def random_periodic(cls, rng: np.random.Generator, N: int, nu=1.0) -> "PhasePoint":
        """Random state with positions spread over one period [0, 1)."""
        x = (np.arange(N) + 0.5 + 0.3 * (rng.random(N) - 0.5)) / N
        p = rng.normal(scale=0.5, size=N)
        return cls(x, p, nu)


def _pair_differences(x: np.ndarray) -> np.ndarray:
    return x[:, None] - x[None, :]


def _offdiag(N: int) -> np.ndarray:
    return ~np.eye(N, dtype=bool)


def min_separation(x: np.ndarray, kind: str = "rational", tau=None) -> float:
    """
    Smallest pair distance, measured modulo Z for trig and modulo Z + tau Z for elliptic.

    Returns math.inf for a single particle.
    """
    if len(x) < 2:
        return math.inf
    diff = _pair_differences(np.asarray(x))[np.triu_indices(len(x), 1)]
    if kind == "rational":
        return float(np.min(np.abs(diff)))
    if kind == "trig":
        return float(np.min(np.abs(diff - np.round(np.real(diff)))))
    if kind == "elliptic":
        return float(min(abs(reduce_to_cell(d, tau)) for d in diff))
    raise ValueError(f"Unknown Calogero-Moser kind: {kind}")


def check_separation(s: PhasePoint, kind: str = "rational", tau=None, eps_sep: float = EPS_SEP,
                     time: Optional[float] = None):
    separation = min_separation(s.x, kind, tau)
    if separation < eps_sep:
        where = f" at t={time}" if time is not None else ""
        raise SingularConfigurationError(
            f"Particles collide{where}: minimal separation {separation:.3e} < {eps_sep:.1e}",
            separation=separation, time=time,
        )


def rational_lax(s: PhasePoint) -> Tuple[np.ndarray, np.ndarray]:
    """
    Lax pair of the rational system.

    L_ij = p_i delta_ij + i nu / (x_i - x_j), A_ij = i nu / (x_i - x_j)^2 off the
    diagonal and A_ii = -sum_k i nu / (x_i - x_k)^2, so that dL/dt = [A, L].

    Args:
        s (PhasePoint): state with distinct positions

    Returns:
        Tuple[np.ndarray, np.ndarray]: (L, A)
    """
    check_separation(s)
    N = s.N
    off = _offdiag(N)
    diff = _pair_differences(s.x)
    L = np.diag(s.p).astype(complex)
    A = np.zeros((N, N), dtype=complex)
    L[off] = 1j * s.nu / diff[off]
    A[off] = 1j * s.nu / diff[off] ** 2
    A[np.diag_indices(N)] = -np.sum(np.where(off, A, 0), axis=1)
    return L, A


def _rational_forces(x: np.ndarray, nu) -> np.ndarray:
    diff = _pair_differences(x)
    off = _offdiag(len(x))
    inv = np.zeros_like(diff)
    inv[off] = 1.0 / diff[off] ** 3
    return 2 * nu ** 2 * np.sum(inv, axis=1)


def _trig_forces(x: np.ndarray, nu) -> np.ndarray:
    diff = _pair_differences(x)
    off = _offdiag(len(x))
    terms = np.zeros_like(diff)
    angle = np.pi * diff[off]
    terms[off] = np.cos(angle) / np.sin(angle) ** 3
    return np.pi * nu ** 2 / 2 * np.sum(terms, axis=1)


def _elliptic_forces(x: np.ndarray, nu, tau) -> np.ndarray:
    diff = _pair_differences(x)
    off = _offdiag(len(x))
    terms = np.zeros(diff.shape, dtype=complex)
    if np.any(off):
        terms[off] = weierstrass_p_array(diff[off], tau, derivative=1)
    return -nu ** 2 * np.sum(terms, axis=1)


def forces(x: np.ndarray, nu, kind: str = "rational", tau=None) -> np.ndarray:
    """dp/dt as a function of the positions."""
    if kind == "rational":
        return _rational_forces(x, nu)
    if kind == "trig":
        return _trig_forces(x, nu)
    if kind == "elliptic":
        if tau is None:
            raise ValueError("The elliptic system needs a modular parameter tau")
        return _elliptic_forces(x, nu, tau)
    raise ValueError(f"Unknown Calogero-Moser kind: {kind}")


def eom_rhs(s: PhasePoint, kind: str = "rational", tau=None) -> PhasePoint:
    """
    Hamiltonian vector field: dx/dt = p and dp/dt = -dH/dx.

    Rational: dp_i/dt = 2 nu^2 sum_k (x_i - x_k)^-3.
    Trigonometric: dp_i/dt = (pi nu^2 / 2) sum_k cos(pi x_ik) / sin^3(pi x_ik).
    Elliptic: dp_i/dt = -nu^2 sum_k p'(x_ik).
    """
    check_separation(s, kind, tau)
    f = forces(s.x, s.nu, kind, tau)
    if not s.is_complex and kind != "elliptic":
        f = np.real(f)
    return PhasePoint(s.p.copy(), f, s.nu)


def rational_hamiltonian(s: PhasePoint):
    diff = _pair_differences(s.x)[np.triu_indices(s.N, 1)]
    return np.sum(s.p ** 2) / 2 + s.nu ** 2 * np.sum(1.0 / diff ** 2)


def trig_hamiltonian(s: PhasePoint):
    """sum p_i^2 / 2 + (nu^2 / 4) sum_{i<j} sin^-2(pi (x_i - x_j))."""
    check_separation(s, "trig")
    diff = _pair_differences(s.x)[np.triu_indices(s.N, 1)]
    return np.sum(s.p ** 2) / 2 + s.nu ** 2 / 4 * np.sum(1.0 / np.sin(np.pi * diff) ** 2)


def elliptic_hamiltonian(s: PhasePoint, tau):
    """sum p_i^2 / 2 + nu^2 sum_{i<j} p(x_i - x_j)."""
    check_separation(s, "elliptic", tau)
    diff = _pair_differences(s.x)[np.triu_indices(s.N, 1)]
    potential = np.sum(weierstrass_p_array(diff, tau)) if len(diff) else 0
    return np.sum(s.p ** 2) / 2 + s.nu ** 2 * potential


def energy(s: PhasePoint, kind: str = "rational", tau=None):
    if kind == "rational":
        return rational_hamiltonian(s)
    if kind == "trig":
        return trig_hamiltonian(s)
    if kind == "elliptic":
        return elliptic_hamiltonian(s, tau)
    raise ValueError(f"Unknown Calogero-Moser kind: {kind}")


def hamiltonians(s: PhasePoint, k_max: int) -> List[complex]:
    """H_k = Tr(L^k) / k for k = 1..k_max."""
    if k_max < 1:
        raise ValueError(f"k_max must be at least 1, got {k_max}")
    L, _ = rational_lax(s)
    values = []
    power = np.eye(s.N, dtype=complex)
    for k in range(1, k_max + 1):
        power = power @ L
        values.append(complex(np.trace(power)) / k)
    return values


def lax_time_derivative(s: PhasePoint) -> np.ndarray:
    """dL/dt from the chain rule: dp_i/dt on the diagonal, -i nu (p_i - p_j) / x_ij^2 off it."""
    rhs = eom_rhs(s)
    off = _offdiag(s.N)
    diff = _pair_differences(s.x)
    dp = _pair_differences(s.p)
    Ldot = np.diag(rhs.p).astype(complex)
    Ldot[off] = -1j * s.nu * dp[off] / diff[off] ** 2
    return Ldot


def lax_residual(s: PhasePoint, relative: bool = True) -> float:
    """
    Frobenius norm of dL/dt - [A, L].

    With relative=True (the default) the norm is divided by
    max(1, |dL/dt| + |[A, L]|).
    """
    L, A = rational_lax(s)
    Ldot = lax_time_derivative(s)
    commutator = A @ L - L @ A
    residual = float(np.linalg.norm(Ldot - commutator))
    if not relative:
        return residual
    scale = max(1.0, float(np.linalg.norm(Ldot)) + float(np.linalg.norm(commutator)))
    return residual / scale


def asymptotic_momenta(s: PhasePoint) -> np.ndarray:
    """Eigenvalues of L sorted by real then imaginary part."""
    L, _ = rational_lax(s)
    if not s.is_complex and np.isrealobj(s.nu):
        eigenvalues = np.linalg.eigvalsh(L).astype(complex)
    else:
        eigenvalues = np.linalg.eigvals(L)
    return np.array(sorted(eigenvalues, key=lambda v: (round(v.real, 12), v.imag)))


# Time integration

@dataclass
class Trajectory:
    """Sampled solution: times (n,), positions and momenta (n, N)."""

    times: np.ndarray
    x: np.ndarray
    p: np.ndarray
    nu: Any
    kind: str = "rational"
    tau: Any = None

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, k: int) -> PhasePoint:
        return PhasePoint(self.x[k], self.p[k], self.nu)

    def final(self) -> PhasePoint:
        return self[len(self) - 1]


def _step_count(t_end: float, dt: float) -> Tuple[int, float]:
    if dt <= 0:
        raise ValueError(f"Time step must be positive, got {dt}")
    if t_end < 0:
        raise ValueError(f"End time must be non-negative, got {t_end}")
    if t_end == 0:
        return 0, dt
    n = max(1, int(math.ceil(t_end / dt - 1e-9)))
    return n, t_end / n


def _rk4_step(y: np.ndarray, h: float, f) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + h / 2 * k1)
    k3 = f(y + h / 2 * k2)
    k4 = f(y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(s: PhasePoint, kind: str = "rational", t_end: float = 1.0, dt: float = 1e-3, tau=None,
              integrator: str = "rk4", eps_sep: float = EPS_SEP, progress: bool = False) -> Trajectory:
    """
    Integrate the equations of motion from s up to t_end.

    Args:
        s (PhasePoint): initial state
        kind (str): "rational", "trig" or "elliptic"
        t_end (float): final time
        dt (float): step size (fixed-step schemes) or output spacing (dop853)
        tau: modular parameter for the elliptic system
        integrator (str): "rk4", "leapfrog" or "dop853"
        eps_sep (float): collision threshold
        progress (bool): show a progress bar

    Returns:
        Trajectory: states at t = 0, h, 2h, ..., t_end

    Raises:
        SingularConfigurationError: when two particles come closer than eps_sep
    """
    if kind not in KINDS:
        raise ValueError(f"Unknown Calogero-Moser kind: {kind}")
    if integrator not in INTEGRATORS:
        raise ValueError(f"Unknown integrator: {integrator}")
    n_steps, h = _step_count(t_end, dt)
    if kind == "elliptic" and not s.is_complex:
        s = s.as_complex()
    check_separation(s, kind, tau, eps_sep, time=0.0)
    N = s.N
    real = not s.is_complex
    nu = s.nu

    def force(x):
        f = forces(x, nu, kind, tau)
        return np.real(f) if real else f

    times = np.array([k * h for k in range(n_steps + 1)])
    if integrator == "dop853":
        xs, ps = _integrate_dop853(s, force, times, kind, tau, eps_sep)
        logger.info(f"Integrated {N} particles to t={t_end} with DOP853")
        return Trajectory(times, xs, ps, nu, kind, tau)

    xs = np.empty((n_steps + 1, N), dtype=s.x.dtype)
    ps = np.empty((n_steps + 1, N), dtype=s.p.dtype)
    xs[0], ps[0] = s.x, s.p

    def field(y):
        return np.concatenate([y[N:], force(y[:N])])

    y = s.to_vector()
    for k in tqdm(range(1, n_steps + 1), desc=f"{kind} CM", disable=not progress):
        if integrator == "rk4":
            y = _rk4_step(y, h, field)
        else:
            p_half = y[N:] + h / 2 * force(y[:N])
            x_new = y[:N] + h * p_half
            y = np.concatenate([x_new, p_half + h / 2 * force(x_new)])
        if not np.all(np.isfinite(y)):
            raise NumericalError(f"Non-finite state at t={times[k]}")
        separation = min_separation(y[:N], kind, tau)
        if separation < eps_sep:
            logger.error(f"Error integrating: collision at t={times[k]}")
            raise SingularConfigurationError(
                f"Particles collide at t={times[k]}: separation {separation:.3e}", separation=separation, time=times[k]
            )
        xs[k], ps[k] = y[:N], y[N:]
    logger.info(f"Integrated {N} particles to t={t_end} in {n_steps} {integrator} steps")
    return Trajectory(times, xs, ps, nu, kind, tau)


def _integrate_dop853(s: PhasePoint, force, times: np.ndarray, kind: str, tau, eps_sep: float):
    N = s.N

    def field(t, y):
        return np.concatenate([y[N:], force(y[:N])])

    def collision(t, y):
        return min_separation(y[:N], kind, tau) - eps_sep

    collision.terminal = True
    if len(times) == 1:
        return s.x[None, :], s.p[None, :]
    solution = solve_ivp(field, (times[0], times[-1]), s.to_vector(), method="DOP853", t_eval=times,
                         rtol=1e-12, atol=1e-12, events=collision)
    if solution.status == 1:
        t_hit = float(solution.t_events[0][0])
        raise SingularConfigurationError(f"Particles collide at t={t_hit}", separation=eps_sep, time=t_hit)
    if solution.status != 0:
        raise NumericalError(f"Adaptive integration failed: {solution.message}")
    return solution.y[:N].T.copy(), solution.y[N:].T.copy()


def conservation_report(trajectory: Trajectory, k_max: int = 3) -> dict:
    """
    Largest relative drift of H_1..H_k_max (rational) or of the energy (other kinds)
    and of the spectrum of L along a trajectory.
    """
    report = {}
    if trajectory.kind == "rational":
        start = hamiltonians(trajectory[0], k_max)
        drift = [0.0] * k_max
        spectrum0 = asymptotic_momenta(trajectory[0])
        spectral_drift = 0.0
        for k in range(len(trajectory)):
            state = trajectory[k]
            for j, value in enumerate(hamiltonians(state, k_max)):
                drift[j] = max(drift[j], abs(value - start[j]) / max(abs(start[j]), 1e-300))
            spectrum = asymptotic_momenta(state)
            spectral_drift = max(spectral_drift, float(np.max(np.abs(spectrum - spectrum0)))
                                 / max(1.0, float(np.max(np.abs(spectrum0)))))
        report["hamiltonian_drift"] = drift
        report["spectral_drift"] = spectral_drift
    else:
        e0 = energy(trajectory[0], trajectory.kind, trajectory.tau)
        worst = max(abs(energy(trajectory[k], trajectory.kind, trajectory.tau) - e0) for k in range(len(trajectory)))
        report["energy_drift"] = float(worst / max(abs(e0), 1e-300))
    return report


def trajectory_rows(trajectory: Trajectory, k_max: int = 3) -> Tuple[List[str], List[List[float]]]:
    """
    Header and rows t, x_i (re, im), p_i (re, im), H_k (re, im) for CSV export.

    H_k are the rational Lax traces; they are only conserved along rational flows.
    """
    N = trajectory.x.shape[1]
    header = ["t"]
    header += [f"x_{i}_{part}" for i in range(1, N + 1) for part in ("re", "im")]
    header += [f"p_{i}_{part}" for i in range(1, N + 1) for part in ("re", "im")]
    header += [f"H_{k}_{part}" for k in range(1, k_max + 1) for part in ("re", "im")]
    rows = []
    for k in range(len(trajectory)):
        state = trajectory[k]
        row = [float(trajectory.times[k])]
        for values in (state.x, state.p):
            for v in values:
                row += [float(np.real(v)), float(np.imag(v))]
        for h in hamiltonians(state, k_max):
            row += [h.real, h.imag]
        rows.append(row)
    return header, rows


# Moment map

def moment_map_matrix(x: Sequence[Any], p: Sequence[Any], nu, exact: bool = False):
    """
    P and z solving [P, X] + i (z z^dagger - nu 1) = 0 with X = diag(x).

    z_i = sqrt(nu) and P_ij = p_i delta_ij + i nu / (x_i - x_j).

    Args:
        x: distinct positions
        p: momenta
        nu: positive coupling
        exact (bool): build sympy matrices over Q(i, sqrt(nu))

    Returns:
        Tuple: (P, z) as numpy arrays or sympy matrices
    """
    if nu <= 0:
        raise ValueError(f"Coupling must be positive, got {nu}")
    N = len(x)
    if len(p) != N:
        raise ValueError("Positions and momenta must have equal length")
    if len(set(x)) != N:
        raise SingularConfigurationError("Coincident positions in the moment map", separation=0.0)
    if exact:
        import sympy

        xs = [sympy.nsimplify(v) for v in x]
        ps = [sympy.nsimplify(v) for v in p]
        nu_s = sympy.nsimplify(nu)
        P = sympy.Matrix(N, N, lambda i, j: ps[i] if i == j else sympy.I * nu_s / (xs[i] - xs[j]))
        z = sympy.Matrix([sympy.sqrt(nu_s)] * N)
        return P, z
    s = PhasePoint(np.asarray(x), np.asarray(p), nu)
    P, _ = rational_lax(s)
    z = np.full(N, math.sqrt(nu), dtype=complex)
    return P, z


def moment_map(P, x: Sequence[Any], z, nu):
    """mu = [P, X] + i (z z^dagger - nu 1); sympy in, sympy out."""
    N = len(x)
    if hasattr(P, "is_Matrix"):
        import sympy

        X = sympy.diag(*[sympy.nsimplify(v) for v in x])
        nu_s = sympy.nsimplify(nu)
        mu = P * X - X * P + sympy.I * (z * z.H - nu_s * sympy.eye(N))
        return mu.applyfunc(sympy.simplify)
    X = np.diag(np.asarray(x, dtype=complex))
    z = np.asarray(z, dtype=complex)
    return P @ X - X @ P + 1j * (np.outer(z, z.conj()) - nu * np.eye(N))


# Trigonometric gauge field

def trig_gauge_E(x_grid, s: PhasePoint) -> np.ndarray:
    """
    The gauge-fixed field E(x): E_ii = p_i and
    E_ij(x) = i nu e^{-pi i x_ij} e^{i x_ij x} / (2 sin(pi x_ij)).

    Returns an (N, N) matrix for a scalar grid point and (len(grid), N, N) otherwise.
    """
    N = s.N
    diff = _pair_differences(s.x.astype(complex))
    off = _offdiag(N)
    sines = np.sin(np.pi * diff[off])
    if np.any(np.abs(sines) < EPS_SEP):
        raise SingularConfigurationError("Positions resonant modulo 1 in the gauge field",
                                         separation=float(np.min(np.abs(sines))))
    grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    E = np.zeros((len(grid), N, N), dtype=complex)
    E[:, np.arange(N), np.arange(N)] = s.p
    prefactor = 1j * s.nu * np.exp(-1j * np.pi * diff[off]) / (2 * sines)
    E[:, off] = prefactor[None, :] * np.exp(1j * np.outer(grid, diff[off]))
    return E[0] if np.ndim(x_grid) == 0 else E


def trig_hamiltonian_quadrature(s: PhasePoint) -> complex:
    """(1/2 pi) int_0^{2 pi} (1/2) Tr E(x)^2 dx by adaptive quadrature."""

    def density(x, part):
        E = trig_gauge_E(x, s)
        value = 0.5 * np.trace(E @ E)
        return value.real if part == "re" else value.imag

    real, _ = quad(density, 0.0, 2 * np.pi, args=("re",), limit=200)
    imag, _ = quad(density, 0.0, 2 * np.pi, args=("im",), limit=200)
    return complex(real, imag) / (2 * np.pi)


# Elliptic system

def krichever_lax(z, s: PhasePoint, tau) -> np.ndarray:
    """
    Krichever's Lax matrix with spectral parameter z.

    L_ii = p_i and L_ij(z) = nu theta'(0) theta(z + x_ij) / (theta(x_ij) theta(z)),
    theta the odd Jacobi theta function of Z + tau Z. Periodic under z -> z + 1,
    multiplied by e^{-2 pi i x_ij} under z -> z + tau, residue nu at z = 0.
    """
    if abs(reduce_to_cell(z, tau)) < 1e-12:
        raise PoleError(f"Spectral parameter on the lattice: z={z}", point=z)
    check_separation(s, "elliptic", tau)
    N = s.N
    theta_z = jacobi_theta_odd(z, tau)
    scale = s.nu * theta_prime_zero(tau)
    L = np.diag(s.p).astype(complex)
    for i in range(N):
        for j in range(N):
            if i != j:
                x_ij = complex(s.x[i] - s.x[j])
                L[i, j] = scale * jacobi_theta_odd(z + x_ij, tau) / (jacobi_theta_odd(x_ij, tau) * theta_z)
    return L


@dataclass
class ECMInvariants:
    """A = p(x), B = p p'(x) / (2 nu), u = p^2 / nu + p(x) and the curve residual."""

    A: complex
    B: complex
    u: complex
    residual: float


def ecm_n2_invariants(s: PhasePoint, tau, curve: Optional[EllipticCurveParams] = None) -> ECMInvariants:
    """
    Invariants of the reduced two-body elliptic system.

    The relative coordinate is x = x_1 - x_2 and the relative momentum
    p = (p_1 - p_2) / 2, which is p_1 in the center-of-mass frame. The residual
    is |B^2 - (u - A)(A - e_1)(A - e_2)(A - e_3) / nu|.
    """
    if s.N != 2:
        raise ValueError(f"Two particles expected, got {s.N}")
    x = complex(s.x[0] - s.x[1])
    p = complex(s.p[0] - s.p[1]) / 2
    curve = curve or EllipticCurveParams.from_tau(tau)
    wp = weierstrass_p(x, tau)
    dwp = weierstrass_p(x, tau, derivative=1)
    nu = s.nu
    A = wp
    B = p * dwp / (2 * nu)
    u = p ** 2 / nu + wp
    e1, e2, e3 = curve.roots()
    residual = abs(B ** 2 - (u - A) * (A - e1) * (A - e2) * (A - e3) / nu)
    return ECMInvariants(A, B, u, float(residual))
