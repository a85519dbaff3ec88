"""
Laplace-domain concentration for the layered problem

This module contains:
- Roots of the per-layer characteristic equation D*lambda^2 - v*lambda - (R*s + mu) = 0
- The per-layer coefficient functions P_i, A_i and B_i
- Assembly and Thomas solution of the tridiagonal interface-flux system
- Evaluation of C(x, s) anywhere in the medium

The unknowns G_i(s) are the transforms of the dispersive fluxes
theta_i * D_i * dc/dx at the interfaces. Given them, every layer decouples:

    C_i(x, s) = A_i(x, s) * G_{i-1}(s) + B_i(x, s) * G_i(s) + P_i(x, s)

with G_0 and G_m standing for the inlet and outlet signal transforms.
Everything here is vectorised over an array of Laplace variables s.
"""

import enum
import logging
from dataclasses import dataclass

import numpy as np

from ..exceptions import DegenerateDenominatorError, DomainError, SingularSystemError
from ..models import check_laplace_variable

logger = logging.getLogger(__name__)

DEGENERATE_THRESHOLD = 1e-300


class LayerPosition(str, enum.Enum):
    FIRST = 'first'
    MIDDLE = 'middle'
    LAST = 'last'


def position_in_stack(index, m):
    if index == 0:
        return LayerPosition.FIRST
    if index == m - 1:
        return LayerPosition.LAST
    return LayerPosition.MIDDLE


def lambda_roots(layer, s):
    """
    Roots (lambda1, lambda2) with Re(lambda1) > 0 > Re(lambda2) for Re(s) > 0

    Principal square root; the smaller root is recovered from the product
    lambda1 * lambda2 = -(R*s + mu)/D so it does not suffer cancellation.
    """
    s = check_laplace_variable(s)
    D = layer.dispersion
    v = layer.velocity
    sink = layer.retardation * s + layer.decay_rate
    root = np.sqrt(v * v + 4.0 * D * sink)
    if v >= 0:
        lambda1 = (v + root) / (2.0 * D)
        lambda2 = -sink / (D * lambda1)
    else:
        lambda2 = (v - root) / (2.0 * D)
        lambda1 = -sink / (D * lambda2)
    return lambda1, lambda2


@dataclass(frozen=True)
class LayerLaplaceCoeffs:
    """
    Coefficient functions of one layer at fixed s

    Exponentials are anchored so that they never grow inside the layer:
    psi1 is 1 at the right edge and psi2 is 1 at the left edge.
    """

    layer: object
    position: LayerPosition
    s: np.ndarray
    lambda1: np.ndarray
    lambda2: np.ndarray
    psi: np.ndarray
    beta: np.ndarray
    inlet: object = None
    outlet: object = None

    def psi1(self, x):
        return np.exp(self.lambda1 * (x - self.layer.x_right))

    def psi2(self, x):
        return np.exp(self.lambda2 * (x - self.layer.x_left))

    @property
    def _flux_scale(self):
        return self.layer.water_content * self.layer.dispersion

    def P(self, x):
        if self.position is LayerPosition.FIRST:
            a0 = self.inlet.a
            bracket = self.lambda1 * self.psi2(x) - self.lambda2 * self.psi2(self.layer.x_right) * self.psi1(x)
            return self.psi + a0 / self.beta * bracket * self.psi
        if self.position is LayerPosition.LAST:
            aL = self.outlet.a
            bracket = self.lambda2 * self.psi1(x) - self.lambda1 * self.psi1(self.layer.x_left) * self.psi2(x)
            return self.psi + aL / self.beta * bracket * self.psi
        return self.psi * np.ones_like(self.psi1(x))

    def A(self, x):
        """Weight of the flux (or inlet signal) on the left edge"""
        if self.position is LayerPosition.LAST:
            aL, bL = self.outlet.a, self.outlet.b
            return (
                (aL + bL * self.lambda2) * self.psi2(self.layer.x_right) * self.psi1(x)
                - (aL + bL * self.lambda1) * self.psi2(x)
            ) / (self._flux_scale * self.beta)
        bracket = self.lambda2 * self.psi2(self.layer.x_right) * self.psi1(x) - self.lambda1 * self.psi2(x)
        if self.position is LayerPosition.FIRST:
            return bracket / self.beta
        return bracket / (self._flux_scale * self.beta)

    def B(self, x):
        """Weight of the flux (or outlet signal) on the right edge"""
        if self.position is LayerPosition.FIRST:
            a0, b0 = self.inlet.a, self.inlet.b
            return (
                (a0 - b0 * self.lambda1) * self.psi1(self.layer.x_left) * self.psi2(x)
                - (a0 - b0 * self.lambda2) * self.psi1(x)
            ) / (self._flux_scale * self.beta)
        bracket = self.lambda1 * self.psi1(self.layer.x_left) * self.psi2(x) - self.lambda2 * self.psi1(x)
        if self.position is LayerPosition.LAST:
            return bracket / self.beta
        return bracket / (self._flux_scale * self.beta)


def layer_coeffs(layer, position, inlet, outlet, s, layer_index=None):
    """
    Build the coefficient functions for one layer

    Args:
        layer: Layer
        position: LayerPosition of the layer in the stack
        inlet: RobinBoundary, required for the first layer
        outlet: RobinBoundary, required for the last layer
        s: Laplace variable (scalar or array)
        layer_index: only used in error messages

    Raises:
        DegenerateDenominatorError: when |beta| underflows
    """
    position = LayerPosition(position)
    if position is LayerPosition.FIRST and inlet is None:
        raise DomainError("The first layer needs the inlet coefficients")
    if position is LayerPosition.LAST and outlet is None:
        raise DomainError("The last layer needs the outlet coefficients")

    s = check_laplace_variable(s)
    lambda1, lambda2 = lambda_roots(layer, s)
    R = layer.retardation
    psi = (layer.production_rate / s + R * layer.initial_concentration) / (layer.decay_rate + R * s)
    decay = np.exp(-(lambda1 - lambda2) * layer.thickness)

    if position is LayerPosition.FIRST:
        a0, b0 = inlet.a, inlet.b
        beta = (a0 - b0 * lambda1) * lambda2 * decay - (a0 - b0 * lambda2) * lambda1
    elif position is LayerPosition.LAST:
        aL, bL = outlet.a, outlet.b
        beta = (aL + bL * lambda2) * lambda1 * decay - (aL + bL * lambda1) * lambda2
    else:
        beta = lambda1 * lambda2 * (decay - 1.0)

    degenerate = ~(np.abs(beta) >= DEGENERATE_THRESHOLD)
    if np.any(degenerate):
        raise DegenerateDenominatorError(layer_index, s[degenerate].ravel()[0])

    return LayerLaplaceCoeffs(layer, position, s, lambda1, lambda2, psi, beta, inlet, outlet)


@dataclass(frozen=True)
class InterfaceSystem:
    """
    Tridiagonal system for G_1..G_{m-1}

    lower[k] is entry (k+1, k), upper[k] is entry (k, k+1); every array has
    the batch shape of s as trailing dimensions.
    """

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray
    s: np.ndarray = None

    @property
    def order(self):
        return self.diag.shape[0]

    def to_dense(self, batch_index=()):
        """Dense matrix for one entry of the batch"""
        n = self.order
        matrix = np.zeros((n, n), dtype=complex)
        for k in range(n):
            matrix[k, k] = self.diag[(k,) + batch_index]
        for k in range(n - 1):
            matrix[k + 1, k] = self.lower[(k,) + batch_index]
            matrix[k, k + 1] = self.upper[(k,) + batch_index]
        return matrix


def _interface_rows(coeffs, G0, GL):
    """Row entries of the interface system from per-layer coefficients"""
    m = len(coeffs)
    lower, diag, upper, rhs = [], [], [], []
    for row in range(m - 1):
        left, right = coeffs[row], coeffs[row + 1]
        ell = left.layer.x_right
        diag.append(left.B(ell) - right.A(ell))
        value = right.P(ell) - left.P(ell)
        if row == 0:
            value = value - left.A(ell) * G0
        if row == m - 2:
            value = value + right.B(ell) * GL
        rhs.append(value)
        if row >= 1:
            lower.append(left.A(ell))
        if row <= m - 3:
            upper.append(-right.B(ell))
    batch = np.shape(diag[0])
    empty = np.zeros((0,) + batch, dtype=complex)
    return (
        np.array(lower, dtype=complex) if lower else empty,
        np.array(diag, dtype=complex),
        np.array(upper, dtype=complex) if upper else empty,
        np.array(rhs, dtype=complex),
    )


def _stack_coeffs(problem, s):
    return [
        layer_coeffs(layer, position_in_stack(index, problem.m), problem.inlet, problem.outlet, s, index)
        for index, layer in enumerate(problem.layers)
    ]


def assemble_interface_system(problem, s, G0, GL):
    """Interface-flux system for m >= 3 layers"""
    if problem.m < 3:
        raise DomainError("The interface system is assembled for three or more layers; use the closed form for m = 2")
    s = check_laplace_variable(s)
    coeffs = _stack_coeffs(problem, s)
    return InterfaceSystem(*_interface_rows(coeffs, G0, GL), s=s)


def solve_tridiagonal(system):
    """
    Thomas algorithm, vectorised over the batch dimensions

    Raises:
        SingularSystemError: on a zero pivot, reporting the offending s
    """
    lower, diag, upper, rhs = system.lower, system.diag, system.upper, system.rhs
    n = system.order
    c_prime = np.empty_like(upper)
    d_prime = np.empty_like(rhs)

    def check(pivot):
        bad = ~(np.abs(pivot) >= DEGENERATE_THRESHOLD)
        if np.any(bad):
            s = None
            if system.s is not None:
                s = np.broadcast_to(system.s, np.shape(pivot))[bad].ravel()[0]
            raise SingularSystemError("Zero pivot in the interface system", s=s)

    pivot = diag[0]
    check(pivot)
    if n > 1:
        c_prime[0] = upper[0] / pivot
    d_prime[0] = rhs[0] / pivot
    for k in range(1, n):
        pivot = diag[k] - lower[k - 1] * c_prime[k - 1]
        check(pivot)
        if k < n - 1:
            c_prime[k] = upper[k] / pivot
        d_prime[k] = (rhs[k] - lower[k - 1] * d_prime[k - 1]) / pivot

    solution = np.empty_like(d_prime)
    solution[n - 1] = d_prime[n - 1]
    for k in range(n - 2, -1, -1):
        solution[k] = d_prime[k] - c_prime[k] * solution[k + 1]
    return solution


class LaplaceSolution:
    """
    C(x, s) for a whole problem at a fixed array of s

    Builds the layer coefficients and interface fluxes once; evaluating many
    positions afterwards is cheap.
    """

    def __init__(self, problem, s):
        self.problem = problem
        self.s = check_laplace_variable(s)
        self.coeffs = _stack_coeffs(problem, self.s)
        G0 = problem.inlet.signal.laplace(self.s)
        GL = problem.outlet.signal.laplace(self.s)
        self.fluxes = self._solve_fluxes(G0, GL)

    def _solve_fluxes(self, G0, GL):
        """[G0, G1, ..., G_{m-1}, GL] along the first axis"""
        lower, diag, upper, rhs = _interface_rows(self.coeffs, G0, GL)
        if self.problem.m == 2:
            # two layers: single interface, closed form
            bad = ~(np.abs(diag[0]) >= DEGENERATE_THRESHOLD)
            if np.any(bad):
                raise SingularSystemError("Zero denominator in the two-layer flux", s=self.s[bad].ravel()[0])
            interior = rhs / diag
        else:
            interior = solve_tridiagonal(InterfaceSystem(lower, diag, upper, rhs, s=self.s))
        return np.concatenate([G0[np.newaxis], interior, GL[np.newaxis]])

    def concentration(self, x):
        """C(x, s) for one position; interfaces use the left layer"""
        index = self.problem.layer_index(x)
        coeffs = self.coeffs[index]
        return coeffs.A(x) * self.fluxes[index] + coeffs.B(x) * self.fluxes[index + 1] + coeffs.P(x)


def laplace_concentration(problem, x, s):
    """C(x, s) for the layer containing x (scalar s returns a complex)"""
    result = LaplaceSolution(problem, s).concentration(x)
    return complex(result) if np.ndim(result) == 0 else result
