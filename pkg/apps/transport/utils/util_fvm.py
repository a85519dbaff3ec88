"""
Vertex-centred finite volume reference solver

Uniform grid with a node on every interface, central advective fluxes
J = D (c_k - c_{k-1})/h - v (c_{k-1} + c_k)/2 and theta-weighted control
volumes at interface nodes. The semi-discrete system is affine,
dc/dt = A c + b(t), and is integrated with scipy's BDF method using the
constant sparse matrix A as Jacobian. Dirichlet ends (b = 0) are algebraic
rows, eliminated by substituting c = g(t)/a.
"""

import enum
import logging
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp
from django.conf import settings

from ..exceptions import GridAlignmentError, IntegrationError
from ..models import Provenance, SolutionGrid

logger = logging.getLogger(__name__)

ALIGNMENT_TOLERANCE = 1e-12
# Search window when suggesting an aligned node count
MAX_SUGGESTION_SEARCH = 100000


class MassMatrix(str, enum.Enum):
    IDENTITY = 'identity'
    DROP_FIRST = 'drop-first-row'
    DROP_LAST = 'drop-last-row'
    DROP_BOTH = 'drop-both'

    @classmethod
    def for_problem(cls, problem):
        first, last = problem.inlet.is_dirichlet, problem.outlet.is_dirichlet
        if first and last:
            return cls.DROP_BOTH
        if first:
            return cls.DROP_FIRST
        if last:
            return cls.DROP_LAST
        return cls.IDENTITY


def _is_aligned(problem, n):
    if n < 2:
        return False
    length = problem.length
    h = length / (n - 1)
    for ell in problem.interfaces:
        k = round(ell / h)
        if abs(k * h - ell) > ALIGNMENT_TOLERANCE * length:
            return False
    return True


def suggest_node_count(problem, n):
    """Smallest aligned node count >= n"""
    for candidate in range(max(n, 2), max(n, 2) + MAX_SUGGESTION_SEARCH):
        if _is_aligned(problem, candidate):
            return candidate
    return None


@dataclass(frozen=True, eq=False)
class FvmGrid:
    n: int
    h: float
    x: np.ndarray
    node_layers: np.ndarray
    interface_nodes: tuple

    @classmethod
    def build(cls, problem, n=None):
        """
        Raises:
            GridAlignmentError: some interface falls between nodes
        """
        if n is None:
            n = settings.FVM_NODES
        if not _is_aligned(problem, n):
            raise GridAlignmentError(n, suggest_node_count(problem, n))
        length = problem.length
        h = length / (n - 1)
        x = np.arange(n) * h
        x[-1] = length
        interface_nodes = tuple(int(round(ell / h)) for ell in problem.interfaces)
        for k, ell in zip(interface_nodes, problem.interfaces):
            x[k] = ell
        # interface nodes count toward the layer on their left
        node_layers = np.searchsorted(np.asarray(problem.interfaces), x, side='left')
        return cls(n, h, x, node_layers, interface_nodes)


@dataclass(frozen=True, eq=False)
class FvmState:
    concentrations: np.ndarray
    mass: MassMatrix
    t: float = 0.0


def fvm_initial(problem, n=None):
    """Initial nodal vector; interface nodes take the mean of both layers"""
    grid = FvmGrid.build(problem, n)
    layers = problem.layers
    c = np.array([layers[i].initial_concentration for i in grid.node_layers], dtype=float)
    for i, k in enumerate(grid.interface_nodes):
        c[k] = 0.5 * (layers[i].initial_concentration + layers[i + 1].initial_concentration)
    c[0] = layers[0].initial_concentration
    c[-1] = layers[-1].initial_concentration
    return FvmState(c, MassMatrix.for_problem(problem), 0.0)


class FvmOperator:
    """
    F(c, t) = A c + const + g0(t) * inlet_forcing + gL(t) * outlet_forcing

    Algebraic rows (Dirichlet ends) read a*c - g(t), so F vanishes there
    exactly when the boundary condition holds.
    """

    def __init__(self, problem, grid):
        self.problem = problem
        self.grid = grid
        n = grid.n
        self._rows, self._cols, self._vals = [], [], []
        self.constant = np.zeros(n)
        self.inlet_forcing = np.zeros(n)
        self.outlet_forcing = np.zeros(n)
        self._assemble()
        self.matrix = sparse.csr_matrix(
            (self._vals, (self._rows, self._cols)), shape=(n, n)
        )
        del self._rows, self._cols, self._vals

    def _add(self, row, col, value):
        self._rows.append(row)
        self._cols.append(col)
        self._vals.append(value)

    def _add_flux(self, row, layer, k, weight):
        """weight * J for the flux between nodes k-1 and k"""
        D, v, h = layer.dispersion, layer.velocity, self.grid.h
        self._add(row, k, weight * (D / h - v / 2.0))
        self._add(row, k - 1, weight * (-D / h - v / 2.0))

    def _assemble(self):
        problem, grid = self.problem, self.grid
        layers, h, n = problem.layers, grid.h, grid.n
        inlet, outlet = problem.inlet, problem.outlet

        first = layers[0]
        if inlet.b == 0:
            self._add(0, 0, inlet.a)
            self.inlet_forcing[0] = -1.0
        else:
            scale = 1.0 / (h / 2.0 * first.retardation)
            self._add_flux(0, first, 1, scale)
            self._add(0, 0, scale * (first.velocity - first.dispersion * inlet.a / inlet.b
                                     - h / 2.0 * first.decay_rate))
            self.inlet_forcing[0] = scale * first.dispersion / inlet.b
            self.constant[0] = scale * h / 2.0 * first.production_rate

        interfaces = {k: i for i, k in enumerate(grid.interface_nodes)}
        for k in range(1, n - 1):
            if k in interfaces:
                i = interfaces[k]
                left, right = layers[i], layers[i + 1]
                theta_l, theta_r = left.water_content, right.water_content
                scale = 1.0 / (h / 2.0 * (theta_l * left.retardation + theta_r * right.retardation))
                self._add_flux(k, right, k + 1, theta_r * scale)
                self._add_flux(k, left, k, -theta_l * scale)
                self._add(k, k, -scale * h / 2.0 * (theta_l * left.decay_rate + theta_r * right.decay_rate))
                self.constant[k] = scale * h / 2.0 * (theta_l * left.production_rate
                                                      + theta_r * right.production_rate)
            else:
                layer = layers[grid.node_layers[k]]
                scale = 1.0 / (h * layer.retardation)
                self._add_flux(k, layer, k + 1, scale)
                self._add_flux(k, layer, k, -scale)
                self._add(k, k, -scale * h * layer.decay_rate)
                self.constant[k] = scale * h * layer.production_rate

        last = layers[-1]
        k = n - 1
        if outlet.b == 0:
            self._add(k, k, outlet.a)
            self.outlet_forcing[k] = -1.0
        else:
            scale = 1.0 / (h / 2.0 * last.retardation)
            self._add_flux(k, last, k, -scale)
            self._add(k, k, -scale * (last.velocity + last.dispersion * outlet.a / outlet.b
                                      + h / 2.0 * last.decay_rate))
            self.outlet_forcing[k] = scale * last.dispersion / outlet.b
            self.constant[k] = scale * h / 2.0 * last.production_rate

    def forcing(self, t, right_limit=False):
        g0 = self.problem.inlet.signal.value(t, right_limit=right_limit)
        gL = self.problem.outlet.signal.value(t, right_limit=right_limit)
        return self.constant + g0 * self.inlet_forcing + gL * self.outlet_forcing

    def __call__(self, c, t, right_limit=False):
        return self.matrix @ c + self.forcing(t, right_limit)

    @property
    def algebraic_nodes(self):
        nodes = []
        if self.problem.inlet.b == 0:
            nodes.append(0)
        if self.problem.outlet.b == 0:
            nodes.append(self.grid.n - 1)
        return nodes

    def boundary_values(self, t, right_limit=False):
        """{node: g(t)/a} for the algebraic rows"""
        values = {}
        if self.problem.inlet.b == 0:
            values[0] = self.problem.inlet.signal.value(t, right_limit=right_limit) / self.problem.inlet.a
        if self.problem.outlet.b == 0:
            values[self.grid.n - 1] = (self.problem.outlet.signal.value(t, right_limit=right_limit)
                                       / self.problem.outlet.a)
        return values


def fvm_rhs(problem, grid, c, t):
    """Right-hand side F of M dc/dt = F(c)"""
    return FvmOperator(problem, grid)(np.asarray(c, dtype=float), t)


def discrete_mass(problem, grid, c):
    """Sum of theta*R-weighted control-volume masses"""
    layers = problem.layers
    weights = np.empty(grid.n)
    for k in range(grid.n):
        layer = layers[grid.node_layers[k]]
        weights[k] = grid.h * layer.water_content * layer.retardation
    weights[0] *= 0.5
    weights[-1] *= 0.5
    for i, k in enumerate(grid.interface_nodes):
        left, right = layers[i], layers[i + 1]
        weights[k] = grid.h / 2.0 * (left.water_content * left.retardation
                                     + right.water_content * right.retardation)
    return float(weights @ np.asarray(c, dtype=float))


def _spans(problem, t_end):
    """Integration spans split at signal discontinuities"""
    cuts = sorted({
        t0 for boundary in (problem.inlet, problem.outlet)
        for t0 in boundary.signal.breakpoints() if 0 < t0 < t_end
    })
    edges = [0.0] + cuts + [t_end]
    return list(zip(edges[:-1], edges[1:]))


def fvm_solve(problem, t_values, n=None, rtol=None, atol=None):
    """
    Nodal solutions at the requested times

    Raises:
        GridAlignmentError: n does not place a node on every interface
        IntegrationError: the BDF integrator failed
    """
    rtol = settings.FVM_RTOL if rtol is None else rtol
    atol = settings.FVM_ATOL if atol is None else atol
    problem.full_clean()

    state = fvm_initial(problem, n)
    grid = FvmGrid.build(problem, state.concentrations.size)
    operator = FvmOperator(problem, grid)

    t_values = np.asarray(t_values, dtype=float)
    if np.any(t_values < 0) or np.any(np.diff(t_values) < 0):
        raise ValueError("Requested times must be non-negative and ascending")

    algebraic = operator.algebraic_nodes
    free = np.array([k for k in range(grid.n) if k not in algebraic], dtype=int)
    fixed = np.array(algebraic, dtype=int)
    matrix = operator.matrix.tocsr()
    free_block = matrix[free][:, free].tocsc()
    coupling = matrix[free][:, fixed].tocsc() if fixed.size else None

    def full_vector(y, t, right_limit):
        c = np.empty(grid.n)
        c[free] = y
        for k, value in operator.boundary_values(t, right_limit).items():
            c[k] = value
        return c

    def fixed_values(t, right_limit):
        values = operator.boundary_values(t, right_limit)
        return np.array([values[k] for k in fixed])

    outputs = {}
    if t_values.size and t_values[0] == 0:
        outputs[0.0] = full_vector(state.concentrations[free], 0.0, False)

    y = state.concentrations[free].copy()
    t_end = float(t_values[-1]) if t_values.size else 0.0
    steps = 0
    for start, stop in _spans(problem, t_end):
        if stop <= start:
            continue
        right_limit = start > 0

        def rhs(t, y, rl=right_limit):
            result = free_block @ y + operator.forcing(t, rl)[free]
            if coupling is not None:
                result = result + coupling @ fixed_values(t, rl)
            return result

        requested = [t for t in t_values if start < t <= stop]
        t_eval = sorted(set(requested) | {stop})
        solution = solve_ivp(
            rhs, (start, stop), y, method='BDF', t_eval=t_eval,
            jac=free_block, rtol=rtol, atol=atol,
        )
        if not solution.success:
            raise IntegrationError(f"BDF integration failed on [{start:g}, {stop:g}]: {solution.message}")
        steps += solution.nfev
        for index, t in enumerate(solution.t):
            if t in requested:
                outputs[float(t)] = full_vector(solution.y[:, index], t, right_limit)
        y = solution.y[:, -1]
        logger.debug("FVM span [%g, %g]: %d rhs evaluations", start, stop, solution.nfev)

    logger.info("FVM solve with n=%d finished (%d rhs evaluations)", grid.n, steps)
    values = np.array([outputs[float(t)] for t in t_values]).reshape(t_values.size, grid.n)
    return SolutionGrid(grid.x, t_values, values, Provenance.FINITE_VOLUME, grid.node_layers)
