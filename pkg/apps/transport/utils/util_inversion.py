"""
Numerical Laplace inversion and time-domain solution grids

This module contains:
- Construction of the poles/residues of the best (N, N) rational
  approximation to exp(z) on the negative real axis (Caratheodory-Fejer
  method, run in extended precision with mpmath)
- Inversion of C(x, s) at a point: c = -(2/t) Re sum_k w_k C(x, z_k/t)
- solve_grid, which handles pulse (step) boundary signals by superposing
  two constant-signal solutions so exp(-t0*s) is never evaluated at s = z_k/t
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from mpmath import mp
from django.conf import settings

from ..exceptions import DomainError, InversionOverflowError, QuadratureError
from ..models import Provenance, SolutionGrid, TransientSignal
from .util_laplace import LaplaceSolution

logger = logging.getLogger(__name__)

MIN_ORDER = 2
MAX_ORDER = 32
# Working precision of the construction; enough for every supported order
CONSTRUCTION_DPS = 60
RESIDUE_FIT_POINTS = 300


@dataclass(frozen=True, eq=False)
class CFQuadrature:
    """
    N/2 poles in the upper half-plane with their residues

    The remaining poles are the complex conjugates, so for a real-valued
    function only the upper half needs to be evaluated.
    """

    order: int
    poles: np.ndarray
    residues: np.ndarray
    self_test_error: float = float('nan')

    @property
    def nodes(self):
        return list(zip(self.poles, self.residues))

    def all_poles(self):
        return np.concatenate([self.poles, np.conj(self.poles)])

    def all_residues(self):
        return np.concatenate([self.residues, np.conj(self.residues)])

    def apply(self, laplace_fn, t, exploit_symmetry=True):
        """
        Invert a transform F(s) at time t > 0

        laplace_fn is called once with the array of Laplace nodes. With
        exploit_symmetry off, the sum runs over every pole with half weight.
        """
        if not t > 0:
            raise DomainError(f"Inversion needs t > 0, got t={t!r}")
        if exploit_symmetry:
            values = np.asarray(laplace_fn(self.poles / t))
            total = np.sum(self.residues * values)
        else:
            values = np.asarray(laplace_fn(self.all_poles() / t))
            total = 0.5 * np.sum(self.all_residues() * values)
        return float(-2.0 / t * np.real(total))


def _transplanted_exponential(t_value, scale):
    """exp(scale*(t-1)/(t+1)), taken as 0 at t = -1"""
    if t_value + 1 == 0:
        return mp.mpf(0)
    return mp.exp(scale * (t_value - 1) / (t_value + 1))


@lru_cache(maxsize=None)
def _hankel_decomposition(terms, fft_points, scale, dps):
    """Eigen-decomposition of the Hankel matrix of Chebyshev coefficients"""
    with mp.workdps(dps):
        scale = mp.mpf(scale)
        cosines = [mp.cos(2 * mp.pi * k / fft_points) for k in range(fft_points)]
        samples = [_transplanted_exponential(cosines[k], scale) for k in range(fft_points)]
        coefficients = [
            sum(samples[k] * cosines[(j * k) % fft_points] for k in range(fft_points)) / fft_points
            for j in range(terms + 1)
        ]
        hankel = mp.matrix(terms, terms)
        for i in range(terms):
            for j in range(terms - i):
                hankel[i, j] = coefficients[i + j + 1]
        eigenvalues, eigenvectors = mp.eigsy(hankel)
        order = sorted(range(terms), key=lambda k: -abs(eigenvalues[k]))
        singular_values = [abs(eigenvalues[k]) for k in order]
        vectors = [[eigenvectors[r, k] for r in range(terms)] for k in order]
    return singular_values, vectors


def _polish_root(coefficients, guess, dps):
    with mp.workdps(dps):
        z = mp.mpc(guess.real, guess.imag)
        tolerance = mp.mpf(10) ** (-(dps - 10))
        for _ in range(60):
            value, derivative = mp.polyval(coefficients, z, derivative=True)
            if derivative == 0:
                break
            step = value / derivative
            z -= step
            if abs(step) <= tolerance * max(1, abs(z)):
                break
        return z


def _fit_residues(poles, scale, dps):
    """Least-squares fit of r_inf + sum over conjugate pairs to exp on (-inf, 0]"""
    with mp.workdps(dps):
        scale = mp.mpf(scale)
        points = [mp.cos(mp.pi * (k + mp.mpf(1) / 2) / RESIDUE_FIT_POINTS) for k in range(RESIDUE_FIT_POINTS)]
        xs = [scale * (t - 1) / (t + 1) for t in points]
        columns = 1 + 2 * len(poles)
        design = mp.matrix(len(xs), columns)
        target = mp.matrix(len(xs), 1)
        for row, x in enumerate(xs):
            design[row, 0] = 1
            for k, z in enumerate(poles):
                term = 1 / (x - z)
                design[row, 1 + 2 * k] = 2 * term.real
                design[row, 2 + 2 * k] = -2 * term.imag
            target[row] = mp.exp(x)
        solution, _ = mp.qr_solve(design, target)
        return [mp.mpc(solution[1 + 2 * k], solution[2 + 2 * k]) for k in range(len(poles))]


def cf_quadrature(N=None):
    """
    Poles and residues of the best (N, N) rational approximation to exp(z)

    Args:
        N: even order in [2, 32]; defaults to settings.INVERSION_ORDER

    Raises:
        DomainError: unsupported N
        QuadratureError: the construction did not yield N/2 conjugate pairs
    """
    if N is None:
        N = settings.INVERSION_ORDER
    if not isinstance(N, (int, np.integer)) or N % 2 or not MIN_ORDER <= N <= MAX_ORDER:
        raise DomainError(f"Inversion order must be an even integer in [{MIN_ORDER}, {MAX_ORDER}], got {N!r}")
    return build_quadrature(int(N))


@lru_cache(maxsize=None)
def build_quadrature(N):
    """Construct and self-test the order-N quadrature; cached per N"""
    terms = settings.CF_CHEBYSHEV_TERMS
    if terms <= N + 1:
        raise QuadratureError(f"{terms} Chebyshev terms are too few for order {N}")
    scale = settings.CF_SCALE
    dps = CONSTRUCTION_DPS

    _, vectors = _hankel_decomposition(terms, settings.CF_FFT_POINTS, scale, dps)
    singular_vector = vectors[N]

    with mp.workdps(dps):
        guesses = np.roots([float(value) for value in singular_vector])
        polished = [_polish_root(singular_vector, complex(guess), dps) for guess in guesses]
        outer = sorted(polished, key=lambda q: -abs(q))[:N]
        poles = [scale * (q - 1) ** 2 / (q + 1) ** 2 for q in outer]
        upper = sorted((z for z in poles if z.imag > 0), key=lambda z: float(z.imag))
        if len(upper) != N // 2:
            raise QuadratureError(
                f"Expected {N // 2} poles in the upper half-plane for N={N}, found {len(upper)}"
            )
        residues = _fit_residues(upper, scale, dps)

    quad = CFQuadrature(
        order=N,
        poles=np.array([complex(z) for z in upper]),
        residues=np.array([complex(w) for w in residues]),
    )
    error = abs(quad.apply(lambda s: 1.0 / s, 1.0) - 1.0)
    object.__setattr__(quad, 'self_test_error', error)

    bound = max(10.0 ** (-0.6 * N), 1e-12)
    if error > bound:
        logger.warning("Inversion self-test for N=%d is off by %.3e (bound %.1e)", N, error, bound)
    else:
        logger.info("Built inversion quadrature N=%d, self-test error %.3e", N, error)
    right_half = int(np.sum(quad.poles.real > 0))
    logger.info("N=%d: %d of %d upper poles have positive real part", N, right_half, N // 2)
    return quad


def _check_direct_signals(problem):
    if problem.step_boundaries:
        raise DomainError(
            "Step signals cannot be inverted directly (exp(-t0*s) overflows); use solve_grid"
        )


def _invert_profile(problem, quad, x_values, t):
    """c(x, t) at several x for one t > 0"""
    s = quad.poles / t
    solution = LaplaceSolution(problem, s)
    profile = np.empty(len(x_values))
    for j, x in enumerate(x_values):
        samples = solution.concentration(x)
        finite = np.isfinite(samples)
        if not np.all(finite):
            raise InversionOverflowError(s[~finite][0], x=x)
        profile[j] = -2.0 / t * np.real(np.sum(quad.residues * samples))
    return profile


def invert_at(problem, quad, x, t):
    """
    Concentration at (x, t) from the Laplace-domain solution

    Raises:
        DomainError: t <= 0, x outside [0, L] or a step signal
        InversionOverflowError: a Laplace-domain sample was not finite
    """
    if not t > 0:
        raise DomainError(f"Inversion needs t > 0, got t={t!r}")
    _check_direct_signals(problem)
    return float(_invert_profile(problem, quad, [x], t)[0])


def warn_if_advection_dominated(problem):
    threshold = settings.ADVECTION_WARNING_PECLET
    indicator = problem.max_peclet()
    if indicator > threshold:
        logger.warning(
            "Advection dominated transport (max v*thickness/D = %.1f > %g); "
            "Laplace inversion can lead to unreliable results",
            indicator, threshold,
        )
    return indicator


def _superposition_parts(problem):
    """
    Split a problem with pulse signals into a base and shifted corrections

    Returns (base_problem, [(t0, correction_problem), ...]); base has every
    pulse replaced by a constant of the same level, each correction carries
    that constant on one boundary with sources removed.
    """
    base = problem.with_signals(
        inlet=problem.inlet.signal.without_step(),
        outlet=problem.outlet.signal.without_step(),
    )
    corrections = []
    stripped = problem.without_sources()
    for name in problem.step_boundaries:
        signal = getattr(problem, name).signal
        signals = {'inlet': TransientSignal.zero(), 'outlet': TransientSignal.zero()}
        signals[name] = TransientSignal.constant(signal.c0)
        corrections.append((signal.t0, stripped.with_signals(**signals)))
    return base, corrections


def solve_grid(problem, quad, x_values, t_values):
    """
    Semi-analytical solution on an (x, t) grid

    t = 0 rows return the initial condition. At a pulse switch-off time the
    pre-switch branch is used.
    """
    problem.full_clean()
    warn_if_advection_dominated(problem)
    x_values = np.asarray(x_values, dtype=float)
    t_values = np.asarray(t_values, dtype=float)
    if np.any(t_values < 0):
        raise DomainError("Requested times must not be negative")

    base, corrections = _superposition_parts(problem)
    values = np.empty((t_values.size, x_values.size))
    for row, t in enumerate(t_values):
        if t == 0:
            values[row] = problem.initial_profile(x_values)
            continue
        profile = _invert_profile(base, quad, x_values, t)
        for t0, correction in corrections:
            if t > t0:
                profile = profile - _invert_profile(correction, quad, x_values, t - t0)
        values[row] = profile

    layer_indices = [problem.layer_index(x) for x in x_values]
    logger.debug("Inverted %d x %d grid with N=%d", t_values.size, x_values.size, quad.order)
    return SolutionGrid(x_values, t_values, values, Provenance.SEMI_ANALYTICAL, layer_indices)
