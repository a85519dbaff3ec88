"""
Exact steady state of the layered problem

Each layer solves 0 = D c'' - v c' - mu c + gamma, so its solution is a
particular solution plus two homogeneous modes. The 2m amplitudes follow
from the two boundary rows and two continuity rows per interface.
"""

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from ..exceptions import SingularSystemError
from ..models import Provenance, SolutionGrid

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12


class SteadyKind(str, enum.Enum):
    REACTIVE = 'reactive'        # mu > 0: two exponentials
    ADVECTIVE = 'advective'      # mu = 0, v != 0: constant and one exponential
    DIFFUSIVE = 'diffusive'      # mu = 0, v = 0: constant and linear


@dataclass(frozen=True)
class SteadyCoeffs:
    """Steady solution on one layer: c = E1*phi1 + E2*phi2 + p"""

    layer: object
    kind: SteadyKind
    exponents: tuple
    amplitudes: tuple = (0.0, 0.0)

    @classmethod
    def for_layer(cls, layer):
        D, v, mu = layer.dispersion, layer.velocity, layer.decay_rate
        if mu != 0:
            root = math.sqrt(v * v + 4.0 * D * mu)
            if v >= 0:
                r1 = (v + root) / (2.0 * D)
                r2 = -mu / (D * r1)
            else:
                r2 = (v - root) / (2.0 * D)
                r1 = -mu / (D * r2)
            return cls(layer, SteadyKind.REACTIVE, (r1, r2))
        if v != 0:
            return cls(layer, SteadyKind.ADVECTIVE, (0.0, v / D))
        return cls(layer, SteadyKind.DIFFUSIVE, (0.0, 0.0))

    def _anchor(self, r):
        """Exponentials are anchored where they peak inside the layer"""
        return self.layer.x_right if r > 0 else self.layer.x_left

    def basis(self, x, order=0):
        """order-th derivative of (phi1, phi2) at x"""
        x = np.asarray(x, dtype=float)
        if self.kind is SteadyKind.REACTIVE:
            return tuple(r ** order * np.exp(r * (x - self._anchor(r))) for r in self.exponents)
        if self.kind is SteadyKind.ADVECTIVE:
            r = self.exponents[1]
            phi1 = np.ones_like(x) if order == 0 else np.zeros_like(x)
            return phi1, r ** order * np.exp(r * (x - self._anchor(r)))
        offset = x - self.layer.x_left
        if order == 0:
            return np.ones_like(x), offset
        if order == 1:
            return np.zeros_like(x), np.ones_like(x)
        return np.zeros_like(x), np.zeros_like(x)

    def particular(self, x, order=0):
        x = np.asarray(x, dtype=float)
        D, v, mu, gamma = (self.layer.dispersion, self.layer.velocity,
                           self.layer.decay_rate, self.layer.production_rate)
        offset = x - self.layer.x_left
        if self.kind is SteadyKind.REACTIVE:
            return np.full_like(x, gamma / mu) if order == 0 else np.zeros_like(x)
        if self.kind is SteadyKind.ADVECTIVE:
            values = (gamma / v * offset, np.full_like(x, gamma / v), np.zeros_like(x))
        else:
            values = (-gamma * offset ** 2 / (2.0 * D), -gamma * offset / D, np.full_like(x, -gamma / D))
        return values[order]

    def evaluate(self, x, order=0):
        phi1, phi2 = self.basis(x, order)
        E1, E2 = self.amplitudes
        return E1 * phi1 + E2 * phi2 + self.particular(x, order)

    def residual(self, x):
        """D c'' - v c' - mu c + gamma"""
        layer = self.layer
        return (layer.dispersion * self.evaluate(x, 2) - layer.velocity * self.evaluate(x, 1)
                - layer.decay_rate * self.evaluate(x, 0) + layer.production_rate)


class SteadyStateSolution:
    """Piecewise evaluator x -> c_inf(x)"""

    def __init__(self, problem, coeffs, matrix, rhs):
        self.problem = problem
        self.coeffs = coeffs
        self._matrix = matrix
        self._rhs = rhs

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            return float(self.coeffs[self.problem.layer_index(float(x))].evaluate(x))
        return np.array([self(value) for value in x])

    def derivative(self, x):
        return float(self.coeffs[self.problem.layer_index(x)].evaluate(x, 1))

    def condition_residuals(self):
        """Residuals of the 2m boundary and interface rows"""
        amplitudes = np.concatenate([c.amplitudes for c in self.coeffs])
        return self._matrix @ amplitudes - self._rhs

    def grid(self, x_values, t_values):
        """Steady profile repeated for every requested time"""
        profile = self(np.asarray(x_values, dtype=float))
        values = np.tile(profile, (len(t_values), 1))
        layer_indices = [self.problem.layer_index(x) for x in x_values]
        return SolutionGrid(x_values, t_values, values, Provenance.STEADY_STATE, layer_indices)


def _row(coeffs, x, value_weight, slope_weight):
    """Coefficients of E1, E2 and the particular part in value_weight*c + slope_weight*c'"""
    phi = coeffs.basis(x, 0)
    dphi = coeffs.basis(x, 1)
    entries = [value_weight * phi[k] + slope_weight * dphi[k] for k in range(2)]
    known = value_weight * coeffs.particular(x, 0) + slope_weight * coeffs.particular(x, 1)
    return [float(e) for e in entries], float(known)


def solve_steady(problem):
    """
    Solve the steady analogue with terminal boundary values

    Raises:
        SingularSystemError: no unique steady state
        DomainError: a boundary signal has no terminal value
    """
    problem.full_clean()
    m = problem.m
    coeffs = [SteadyCoeffs.for_layer(layer) for layer in problem.layers]
    matrix = np.zeros((2 * m, 2 * m))
    rhs = np.zeros(2 * m)

    inlet, outlet = problem.inlet, problem.outlet
    entries, known = _row(coeffs[0], 0.0, inlet.a, -inlet.b)
    matrix[0, 0:2] = entries
    rhs[0] = inlet.signal.terminal_value() - known

    for i in range(m - 1):
        left, right = coeffs[i], coeffs[i + 1]
        ell = left.layer.x_right
        row = 1 + 2 * i
        # concentration continuity
        left_entries, left_known = _row(left, ell, 1.0, 0.0)
        right_entries, right_known = _row(right, ell, 1.0, 0.0)
        matrix[row, 2 * i:2 * i + 2] = left_entries
        matrix[row, 2 * i + 2:2 * i + 4] = [-e for e in right_entries]
        rhs[row] = right_known - left_known
        # dispersive flux continuity
        left_flux = left.layer.water_content * left.layer.dispersion
        right_flux = right.layer.water_content * right.layer.dispersion
        left_entries, left_known = _row(left, ell, 0.0, left_flux)
        right_entries, right_known = _row(right, ell, 0.0, right_flux)
        matrix[row + 1, 2 * i:2 * i + 2] = left_entries
        matrix[row + 1, 2 * i + 2:2 * i + 4] = [-e for e in right_entries]
        rhs[row + 1] = right_known - left_known

    entries, known = _row(coeffs[-1], problem.length, outlet.a, outlet.b)
    matrix[-1, -2:] = entries
    rhs[-1] = outlet.signal.terminal_value() - known

    condition = np.linalg.cond(matrix)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise SingularSystemError(f"Steady-state system is singular (condition number {condition:.3e})")
    amplitudes = lu_solve(lu_factor(matrix), rhs)

    solved = [
        SteadyCoeffs(c.layer, c.kind, c.exponents, (float(amplitudes[2 * i]), float(amplitudes[2 * i + 1])))
        for i, c in enumerate(coeffs)
    ]
    logger.debug("Steady state solved for %d layers (condition %.3e)", m, condition)
    return SteadyStateSolution(problem, solved, matrix, rhs)
