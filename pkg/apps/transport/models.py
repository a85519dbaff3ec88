"""
Domain model for one-dimensional solute transport through a layered medium

A Problem is a stack of contiguous Layers on [0, L] with a Robin condition
at each end. Boundary data are TransientSignals, which know their own value
in time and their Laplace transform.
"""

import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from django.core.exceptions import ValidationError

from .exceptions import DomainError, NonFiniteSolutionError

logger = logging.getLogger(__name__)

# Relative tolerance for "exactly contiguous" layer edges read from files
TILING_TOLERANCE = 1e-12


def check_laplace_variable(s):
    """
    Coerce s to a complex array and reject the non-positive real axis

    Every Laplace-domain formula here uses principal square roots and
    divides by s, so the branch cut (-inf, 0] is excluded.
    """
    s = np.asarray(s, dtype=complex)
    on_cut = (s.imag == 0) & (s.real <= 0)
    if np.any(on_cut) or not np.all(np.isfinite(s)):
        raise DomainError(f"Laplace variable on the non-positive real axis or non-finite: {s!r}")
    return s


class SignalKind(str, enum.Enum):
    ZERO = 'zero'
    CONSTANT = 'constant'
    STEP = 'step'
    RAMP_EXP = 'ramp_exp'


@dataclass(frozen=True)
class TransientSignal:
    """
    Time-dependent boundary datum g(t) for t >= 0

    - zero:      g = 0
    - constant:  g = c0
    - step:      g = c0 for t <= t0, 0 afterwards (pulse of length t0)
    - ramp_exp:  g = c0 * alpha * t * exp(-beta * t)
    """

    kind: SignalKind = SignalKind.ZERO
    c0: float = 0.0
    t0: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0

    @classmethod
    def zero(cls):
        return cls(SignalKind.ZERO)

    @classmethod
    def constant(cls, c0):
        return cls(SignalKind.CONSTANT, c0=float(c0))

    @classmethod
    def step(cls, c0, t0):
        return cls(SignalKind.STEP, c0=float(c0), t0=float(t0))

    @classmethod
    def ramp_exp(cls, c0, alpha, beta):
        return cls(SignalKind.RAMP_EXP, c0=float(c0), alpha=float(alpha), beta=float(beta))

    @property
    def is_step(self):
        return self.kind is SignalKind.STEP

    def value(self, t, right_limit=False):
        """
        Signal value at time t (scalar or array)

        At a step's switch-off time the left value c0 is returned unless
        right_limit is set, which the time integrator uses when restarting.
        """
        t = np.asarray(t, dtype=float)
        if self.kind is SignalKind.ZERO:
            result = np.zeros_like(t)
        elif self.kind is SignalKind.CONSTANT:
            result = np.full_like(t, self.c0)
        elif self.kind is SignalKind.STEP:
            on = t < self.t0 if right_limit else t <= self.t0
            result = np.where(on, self.c0, 0.0)
        else:
            result = self.c0 * self.alpha * t * np.exp(-self.beta * t)
        return float(result) if result.ndim == 0 else result

    def laplace(self, s):
        return laplace_of_signal(self, s)

    def terminal_value(self):
        """Limit of g(t) as t -> infinity"""
        if self.kind is SignalKind.CONSTANT:
            return self.c0
        if self.kind is SignalKind.RAMP_EXP and self.beta == 0 and self.alpha * self.c0 != 0:
            raise DomainError("Unbounded ramp signal has no terminal value")
        return 0.0

    def breakpoints(self):
        """Times where the signal is discontinuous"""
        if self.kind is SignalKind.STEP:
            return (self.t0,)
        return ()

    def without_step(self):
        """Constant signal with the same level as this step"""
        if not self.is_step:
            return self
        return TransientSignal.constant(self.c0)

    def violations(self, prefix):
        found = []
        for name in ('c0', 't0', 'alpha', 'beta'):
            if not math.isfinite(getattr(self, name)):
                found.append(Violation(f"{prefix}.{name}", "Value must be finite."))
        if self.kind is SignalKind.STEP and not self.t0 > 0:
            found.append(Violation(f"{prefix}.t0", "Step switch-off time must be greater than zero."))
        if self.kind is SignalKind.RAMP_EXP and self.beta < 0:
            found.append(Violation(f"{prefix}.beta", "Ramp decay rate must not be negative."))
        return found

    def __str__(self):
        if self.kind is SignalKind.ZERO:
            return "zero"
        if self.kind is SignalKind.CONSTANT:
            return f"constant({self.c0:g})"
        if self.kind is SignalKind.STEP:
            return f"step({self.c0:g}, t0={self.t0:g})"
        return f"ramp_exp({self.c0:g}, alpha={self.alpha:g}, beta={self.beta:g})"


def laplace_of_signal(signal, s):
    """Closed-form Laplace transform of a TransientSignal, vectorised over s"""
    s = check_laplace_variable(s)
    if signal.kind is SignalKind.ZERO:
        return np.zeros_like(s)
    if signal.kind is SignalKind.CONSTANT:
        return signal.c0 / s
    if signal.kind is SignalKind.STEP:
        return signal.c0 * (1.0 - np.exp(-signal.t0 * s)) / s
    return signal.c0 * signal.alpha / (s + signal.beta) ** 2


@dataclass(frozen=True)
class Layer:
    """Homogeneous slab [x_left, x_right] with constant transport parameters"""

    x_left: float
    x_right: float
    retardation: float
    dispersion: float
    velocity: float
    decay_rate: float = 0.0
    production_rate: float = 0.0
    water_content: float = 1.0
    initial_concentration: float = 0.0

    @property
    def thickness(self):
        return self.x_right - self.x_left

    @property
    def peclet(self):
        """Cell-free advection indicator v * thickness / D"""
        return abs(self.velocity) * self.thickness / self.dispersion

    def without_sources(self):
        return replace(self, production_rate=0.0, initial_concentration=0.0)

    def violations(self, index):
        prefix = f"layers[{index}]"
        found = []
        for name in ('x_left', 'x_right', 'retardation', 'dispersion', 'velocity',
                     'decay_rate', 'production_rate', 'water_content', 'initial_concentration'):
            if not math.isfinite(getattr(self, name)):
                found.append(Violation(f"{prefix}.{name}", "Value must be finite."))
        if found:
            return found

        if not self.x_left < self.x_right:
            found.append(Violation(f"{prefix}.x_right", "Layer right edge must be greater than its left edge."))
        if self.retardation <= 0:
            found.append(Violation(f"{prefix}.retardation", "Retardation must be greater than zero."))
        if self.dispersion <= 0:
            found.append(Violation(f"{prefix}.dispersion", "Dispersion must be greater than zero."))
        if self.water_content <= 0:
            found.append(Violation(f"{prefix}.water_content", "Water content must be greater than zero."))
        if self.decay_rate < 0:
            found.append(Violation(f"{prefix}.decay_rate", "Negative decay rate (growth).", Severity.WARNING))
        if self.production_rate < 0:
            found.append(Violation(f"{prefix}.production_rate", "Negative production rate (sink).", Severity.WARNING))
        return found


@dataclass(frozen=True)
class RobinBoundary:
    """Condition a*c -/+ b*dc/dx = g(t); minus at the inlet, plus at the outlet"""

    a: float
    b: float
    signal: TransientSignal = field(default_factory=TransientSignal.zero)

    @classmethod
    def concentration(cls, signal):
        """Dirichlet condition c = g(t)"""
        return cls(1.0, 0.0, signal)

    @classmethod
    def flux(cls, layer, signal):
        """Total flux condition v*c - D*dc/dx = g(t) using the adjacent layer"""
        return cls(layer.velocity, layer.dispersion, signal)

    @classmethod
    def zero_gradient(cls):
        return cls(0.0, 1.0, TransientSignal.zero())

    @property
    def is_dirichlet(self):
        return self.b == 0

    def with_signal(self, signal):
        return replace(self, signal=signal)

    def violations(self, prefix):
        found = []
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            return [Violation(f"{prefix}.a", "Boundary coefficients must be finite.")]
        if self.b < 0:
            found.append(Violation(f"{prefix}.b", "Coefficient b must not be negative."))
        if self.a == 0 and self.b == 0:
            found.append(Violation(f"{prefix}.a", "Coefficients a and b cannot both be zero."))
        found.extend(self.signal.violations(f"{prefix}.signal"))
        return found


class Severity(str, enum.Enum):
    ERROR = 'error'
    WARNING = 'warning'


@dataclass(frozen=True)
class Violation:
    field_path: str
    message: str
    severity: Severity = Severity.ERROR

    @property
    def is_error(self):
        return self.severity is Severity.ERROR

    def __str__(self):
        return f"{self.field_path}: {self.message}"


@dataclass(frozen=True)
class Problem:
    """Layer stack on [0, L] plus inlet and outlet conditions"""

    layers: tuple
    inlet: RobinBoundary
    outlet: RobinBoundary = field(default_factory=RobinBoundary.zero_gradient)

    def __post_init__(self):
        object.__setattr__(self, 'layers', tuple(self.layers))

    @property
    def m(self):
        return len(self.layers)

    @property
    def length(self):
        return self.layers[-1].x_right

    @property
    def interfaces(self):
        return tuple(layer.x_right for layer in self.layers[:-1])

    @property
    def step_boundaries(self):
        """Names of the boundaries that carry a step signal"""
        return tuple(name for name in ('inlet', 'outlet') if getattr(self, name).signal.is_step)

    def layer_index(self, x):
        """0-based layer containing x; an interface belongs to the layer on its left"""
        length = self.length
        if x < -TILING_TOLERANCE * length or x > length * (1 + TILING_TOLERANCE):
            raise DomainError(f"x={x!r} is outside [0, {length!r}]")
        index = int(np.searchsorted(np.asarray(self.interfaces), x, side='left'))
        return min(index, self.m - 1)

    def layer_at(self, x):
        return self.layers[self.layer_index(x)]

    def initial_profile(self, x_values):
        """f(x) with interfaces taking the left layer's value"""
        return np.array([self.layer_at(x).initial_concentration for x in x_values], dtype=float)

    def with_signals(self, inlet=None, outlet=None):
        return replace(
            self,
            inlet=self.inlet if inlet is None else self.inlet.with_signal(inlet),
            outlet=self.outlet if outlet is None else self.outlet.with_signal(outlet),
        )

    def without_sources(self):
        return replace(self, layers=tuple(layer.without_sources() for layer in self.layers))

    def max_peclet(self):
        return max(layer.peclet for layer in self.layers)

    def validate(self):
        return validate(self)

    def full_clean(self):
        """Raise ValidationError on hard errors; log warnings"""
        errors = {}
        for violation in validate(self):
            if violation.is_error:
                errors.setdefault(violation.field_path, []).append(violation.message)
            else:
                logger.warning("Problem warning - %s", violation)
        if errors:
            raise ValidationError(errors)
        return self


def validate(problem):
    """Check the invariants of a Problem; returns a list of Violations"""
    violations = []
    layers = problem.layers
    if len(layers) < 2:
        violations.append(Violation('layers', "At least two layers are required."))
    if not layers:
        return violations

    for index, layer in enumerate(layers):
        violations.extend(layer.violations(index))

    scale = max(abs(layers[-1].x_right), 1.0) * TILING_TOLERANCE
    if abs(layers[0].x_left) > scale:
        violations.append(Violation('layers[0].x_left', "The first layer must start at x = 0."))
    for index in range(1, len(layers)):
        previous_right = layers[index - 1].x_right
        current_left = layers[index].x_left
        if current_left - previous_right > scale:
            violations.append(Violation(
                f"layers[{index}].x_left", f"Gap between layers {index - 1} and {index}."
            ))
        elif previous_right - current_left > scale:
            violations.append(Violation(
                f"layers[{index}].x_left", f"Layers {index - 1} and {index} overlap."
            ))

    violations.extend(problem.inlet.violations('inlet'))
    violations.extend(problem.outlet.violations('outlet'))
    return violations


class Provenance(str, enum.Enum):
    SEMI_ANALYTICAL = 'salt'
    FINITE_VOLUME = 'fvm'
    STEADY_STATE = 'steady'


@dataclass(frozen=True, eq=False)
class SolutionGrid:
    """
    Concentrations c[t_index, x_index] on a rectangular grid

    layer_indices records which layer evaluated each x (left layer at
    interfaces).
    """

    x_values: np.ndarray
    t_values: np.ndarray
    values: np.ndarray
    provenance: Provenance
    layer_indices: np.ndarray = None

    def __post_init__(self):
        x_values = np.asarray(self.x_values, dtype=float)
        t_values = np.asarray(self.t_values, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if values.shape != (t_values.size, x_values.size):
            raise ValueError(
                f"values shape {values.shape} does not match ({t_values.size}, {x_values.size})"
            )
        if not np.all(np.isfinite(values)):
            raise NonFiniteSolutionError(f"{self.provenance.value} solution contains non-finite values")
        object.__setattr__(self, 'x_values', x_values)
        object.__setattr__(self, 't_values', t_values)
        object.__setattr__(self, 'values', values)
        if self.layer_indices is not None:
            object.__setattr__(self, 'layer_indices', np.asarray(self.layer_indices, dtype=int))

    def profile(self, t):
        """Row for time t (must be one of t_values)"""
        matches = np.flatnonzero(self.t_values == t)
        if matches.size == 0:
            raise KeyError(t)
        return self.values[matches[0]]

    def sample(self, x_values):
        """
        Linear interpolation of every profile onto new x positions

        A position between two grid points takes the layer of the right
        point, which is the left layer when that point is an interface.
        """
        x_values = np.asarray(x_values, dtype=float)
        values = np.array([np.interp(x_values, self.x_values, row) for row in self.values])
        layer_indices = None
        if self.layer_indices is not None:
            positions = np.searchsorted(self.x_values, x_values, side='left').clip(0, self.x_values.size - 1)
            layer_indices = self.layer_indices[positions]
        return SolutionGrid(x_values, self.t_values, values.reshape(self.t_values.size, x_values.size),
                            self.provenance, layer_indices)

    def max_abs_difference(self, other):
        """Per-time max |self - other| on a shared grid"""
        if not (np.array_equal(self.x_values, other.x_values)
                and np.array_equal(self.t_values, other.t_values)):
            raise ValueError("Solution grids do not share the same x and t values")
        return np.max(np.abs(self.values - other.values), axis=1)
