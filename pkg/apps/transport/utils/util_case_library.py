"""
Catalogue of the thirteen benchmark problems

Concentrations are relative (c0 = 1) so solver output equals c/c0.
Every case uses a zero-gradient outlet.
"""

from dataclasses import replace
from typing import NamedTuple

import numpy as np

from ..exceptions import DomainError
from ..models import Layer, Problem, RobinBoundary, TransientSignal

C0 = 1.0

# (x_right, R, D, v, mu, gamma, theta, f)
HOMOGENEOUS = [(10, 1, 50, 75, 2, 1, 0.4, 0), (30, 1, 50, 75, 2, 1, 0.4, 0)]
SAND_CLAY = [(10, 1, 50, 25, 0, 0, 0.4, 0), (30, 1, 20, 40, 0, 0, 0.25, 0)]
DECAYING_SAND_CLAY = [(10, 3, 50, 25, 3, 0, 0.4, 0), (20, 2, 20, 40, 4, 0, 0.25, 0)]

SAND = (4.25, 7, 10)
CLAY = (14, 18, 8)


def _sand(x_right, mu=0, gamma=0, f=0):
    return (x_right, *SAND, mu, gamma, 0.4, f)


def _clay(x_right, mu=0, gamma=0, f=0):
    return (x_right, *CLAY, mu, gamma, 0.5, f)


FIVE_LAYERS = [_sand(10), _clay(12), _sand(20), _clay(22), _sand(30)]
SEVEN_LAYERS = [_sand(10), _clay(12), _sand(14), _sand(18, f=C0), _sand(20), _clay(22), _sand(30)]
FIVE_LAYERS_REACTIVE = [
    _sand(10, 3, 2), _clay(12, 2, 4), _sand(20, 3, 2), _clay(22, 2, 4, f=C0), _sand(30, 3, 2),
]

# Pulse lengths (days)
SHORT_PULSE = 0.5
LONG_PULSE = 3.0

# Ramp inlet c0 * alpha * t * exp(-beta * t)
RAMP_ALPHA = 1.0
RAMP_BETA = 0.5

CASE_IDS = tuple(range(1, 14))


class CaseSpec(NamedTuple):
    problem: Problem
    x_values: np.ndarray
    t_values: tuple
    c0: float


def build_layers(rows):
    """Layers from (x_right, R, D, v, mu, gamma, theta, f) rows; x_left by tiling"""
    layers = []
    x_left = 0.0
    for x_right, R, D, v, mu, gamma, theta, f in rows:
        layers.append(Layer(
            x_left=x_left, x_right=float(x_right), retardation=float(R), dispersion=float(D),
            velocity=float(v), decay_rate=float(mu), production_rate=float(gamma),
            water_content=float(theta), initial_concentration=float(f),
        ))
        x_left = float(x_right)
    return tuple(layers)


def _flux_inlet(layers, signal):
    """v1*c - D1*dc/dx = v1 * c_in(t)"""
    first = layers[0]
    return RobinBoundary.flux(first, signal)


def _grid(stop, step):
    return np.arange(0.0, stop + step / 2.0, step)


def case_library(case_id):
    """
    Problem, recommended (x, t) grid and c0 for a catalogued case

    Raises:
        DomainError: unknown case id
    """
    if case_id not in CASE_IDS:
        raise DomainError(f"Unknown case {case_id!r}; choose one of 1..13")

    if case_id <= 4:
        layers = build_layers(HOMOGENEOUS)
        v1 = layers[0].velocity
        inlet = {
            1: _flux_inlet(layers, TransientSignal.constant(v1 * C0)),
            2: _flux_inlet(layers, TransientSignal.step(v1 * C0, SHORT_PULSE)),
            3: RobinBoundary.concentration(TransientSignal.constant(C0)),
            4: RobinBoundary.concentration(TransientSignal.step(C0, SHORT_PULSE)),
        }[case_id]
        x_values, t_values = _grid(20, 2), (1e-3, 0.1, 0.6, 1.0, 2.0, 4.0)
    elif case_id <= 7:
        # 6 and 7 share the parameter rows of 5
        layers = build_layers(SAND_CLAY)
        inlet = _flux_inlet(layers, TransientSignal.constant(layers[0].velocity * C0))
        x_values, t_values = _grid(20, 2), (0.2, 0.4, 0.6, 0.8)
    elif case_id == 8:
        layers = build_layers(DECAYING_SAND_CLAY)
        inlet = _flux_inlet(layers, TransientSignal.constant(layers[0].velocity * C0))
        x_values, t_values = _grid(20, 1), (0.2, 0.4, 0.6, 0.8, 1000.0)
    else:
        if case_id == 12:
            layers = build_layers(SEVEN_LAYERS)
        elif case_id == 13:
            layers = build_layers(FIVE_LAYERS_REACTIVE)
        else:
            layers = build_layers(FIVE_LAYERS)
        v1 = layers[0].velocity
        inlet = {
            9: _flux_inlet(layers, TransientSignal.constant(v1 * C0)),
            10: _flux_inlet(layers, TransientSignal.step(v1 * C0, LONG_PULSE)),
            11: RobinBoundary.concentration(TransientSignal.ramp_exp(C0, RAMP_ALPHA, RAMP_BETA)),
            12: RobinBoundary.zero_gradient(),
            13: _flux_inlet(layers, TransientSignal.step(v1 * C0, LONG_PULSE)),
        }[case_id]
        x_values, t_values = _grid(30, 1), (1.0, 2.0, 4.0, 6.0, 10.0)

    problem = Problem(layers, inlet, RobinBoundary.zero_gradient())
    return CaseSpec(problem, x_values, t_values, C0)


def split_layers(problem, pieces):
    """
    Same medium with layers cut into identical sublayers

    pieces is either one count for every layer or a count per layer. Used to
    check that artificial interfaces do not change the solution.
    """
    counts = [pieces] * problem.m if isinstance(pieces, int) else list(pieces)
    if len(counts) != problem.m or min(counts) < 1:
        raise DomainError(f"Need a positive piece count for each of the {problem.m} layers")
    layers = []
    for layer, count in zip(problem.layers, counts):
        edges = np.linspace(layer.x_left, layer.x_right, count + 1)
        for left, right in zip(edges[:-1], edges[1:]):
            layers.append(replace(layer, x_left=float(left), x_right=float(right)))
    return Problem(tuple(layers), problem.inlet, problem.outlet)
