"""
Tests for the transport domain model

Covers signals, layers, boundaries, problem validation and solution grids
"""
import logging
import math

import numpy as np
import pytest
from django.core.exceptions import ValidationError

from apps.transport.exceptions import DomainError, NonFiniteSolutionError
from apps.transport.models import (
    Layer,
    Problem,
    Provenance,
    RobinBoundary,
    Severity,
    SignalKind,
    SolutionGrid,
    TransientSignal,
    laplace_of_signal,
    validate,
)
from apps.transport.utils.util_case_library import build_layers, case_library


def two_layer_problem():
    layers = build_layers([(10, 1, 50, 25, 0, 0, 0.4, 0), (30, 1, 20, 40, 0, 0, 0.25, 0)])
    inlet = RobinBoundary.flux(layers[0], TransientSignal.constant(25))
    return Problem(layers, inlet)


class TestTransientSignal:
    """Tests for boundary signals"""

    def test_constant_transform(self):
        """Constant(1) at s=2 is 1/2"""
        assert laplace_of_signal(TransientSignal.constant(1), 2) == pytest.approx(0.5)

    def test_step_transform(self):
        """Pulse transform is c0 (1 - exp(-t0 s))/s"""
        value = laplace_of_signal(TransientSignal.step(1, 0.5), 1)
        assert value == pytest.approx(1 - math.exp(-0.5), abs=1e-12)

    def test_ramp_transform(self):
        """RampExp(1, 2, 3) at s=1 is 2/16"""
        assert laplace_of_signal(TransientSignal.ramp_exp(1, 2, 3), 1) == pytest.approx(0.125)

    def test_zero_transform(self):
        """Zero signal transforms to zero for an array of s"""
        values = laplace_of_signal(TransientSignal.zero(), np.array([1 + 1j, 2 - 3j]))
        assert np.all(values == 0)

    def test_transform_rejects_branch_cut(self):
        """Non-positive real s is outside the domain"""
        with pytest.raises(DomainError):
            laplace_of_signal(TransientSignal.constant(1), -1.0)
        with pytest.raises(DomainError):
            laplace_of_signal(TransientSignal.constant(1), 0.0)

    def test_transform_accepts_left_half_plane_off_axis(self):
        """Complex s with negative real part is accepted"""
        value = laplace_of_signal(TransientSignal.constant(2), -1 + 1j)
        assert value == pytest.approx(2 / (-1 + 1j))

    def test_step_values_are_left_continuous(self):
        """At t0 the pulse is still on unless the right limit is asked for"""
        step = TransientSignal.step(3, 1.0)
        assert step.value(0.5) == 3
        assert step.value(1.0) == 3
        assert step.value(1.0, right_limit=True) == 0
        assert step.value(2.0) == 0

    def test_ramp_value(self):
        """Ramp follows c0 alpha t exp(-beta t)"""
        ramp = TransientSignal.ramp_exp(2, 1, 0.5)
        assert ramp.value(2.0) == pytest.approx(2 * 2 * math.exp(-1))

    def test_array_values(self):
        """Signals evaluate element-wise on arrays"""
        values = TransientSignal.constant(4).value(np.array([0.0, 1.0, 2.0]))
        np.testing.assert_array_equal(values, [4, 4, 4])

    def test_terminal_values(self):
        """Limits at infinity per signal kind"""
        assert TransientSignal.constant(2).terminal_value() == 2
        assert TransientSignal.step(2, 1).terminal_value() == 0
        assert TransientSignal.ramp_exp(2, 1, 0.5).terminal_value() == 0
        assert TransientSignal.zero().terminal_value() == 0

    def test_breakpoints(self):
        """Only steps are discontinuous"""
        assert TransientSignal.step(1, 3).breakpoints() == (3.0,)
        assert TransientSignal.constant(1).breakpoints() == ()

    def test_without_step(self):
        """A step becomes a constant of the same level"""
        signal = TransientSignal.step(5, 1).without_step()
        assert signal.kind is SignalKind.CONSTANT
        assert signal.c0 == 5

    def test_signals_are_immutable(self):
        """Signals are frozen value objects"""
        signal = TransientSignal.constant(1)
        with pytest.raises(Exception):
            signal.c0 = 2


class TestProblemValidation:
    """Tests for validate() and full_clean()"""

    def test_catalogued_case_is_valid(self):
        """Case 5 has no violations"""
        assert validate(case_library(5).problem) == []

    def test_zero_dispersion_is_reported(self):
        """D = 0 yields one violation naming dispersion"""
        problem = two_layer_problem()
        layers = list(problem.layers)
        layers[0] = Layer(0, 10, 1, 0, 25, water_content=0.4)
        violations = validate(Problem(tuple(layers), problem.inlet))
        assert len(violations) == 1
        assert 'dispersion' in violations[0].field_path

    def test_gap_between_layers(self):
        """Layers [0,10] and [11,30] leave a gap at index 1"""
        layers = (Layer(0, 10, 1, 50, 25, water_content=0.4), Layer(11, 30, 1, 20, 40, water_content=0.25))
        violations = validate(Problem(layers, RobinBoundary.concentration(TransientSignal.constant(1))))
        assert [v.field_path for v in violations] == ['layers[1].x_left']
        assert 'Gap' in violations[0].message

    def test_overlap_between_layers(self):
        """Overlapping layers are reported"""
        layers = (Layer(0, 10, 1, 50, 25), Layer(9, 30, 1, 20, 40))
        violations = validate(Problem(layers, RobinBoundary.zero_gradient()))
        assert any('overlap' in v.message for v in violations)

    def test_single_layer_is_rejected(self):
        """At least two layers are required"""
        violations = validate(Problem((Layer(0, 10, 1, 1, 0),), RobinBoundary.zero_gradient()))
        assert violations[0].field_path == 'layers'

    def test_degenerate_boundary(self):
        """a = b = 0 is not a boundary condition"""
        problem = Problem(two_layer_problem().layers, RobinBoundary(0, 0))
        assert [v.field_path for v in validate(problem)] == ['inlet.a']

    def test_step_needs_positive_duration(self):
        """Step signals need t0 > 0"""
        problem = two_layer_problem().with_signals(inlet=TransientSignal.step(1, 0))
        assert [v.field_path for v in validate(problem)] == ['inlet.signal.t0']

    def test_negative_decay_is_a_warning(self, caplog):
        """Negative mu is soft: full_clean logs and passes"""
        layers = build_layers([(10, 1, 1, 0, -1, 0, 1, 0), (20, 1, 1, 0, 0, 0, 1, 0)])
        problem = Problem(layers, RobinBoundary.zero_gradient())
        violations = validate(problem)
        assert violations[0].severity is Severity.WARNING
        with caplog.at_level(logging.WARNING):
            assert problem.full_clean() is problem
        assert 'decay_rate' in caplog.text

    def test_full_clean_raises_with_field_paths(self):
        """Hard violations raise ValidationError keyed by field path"""
        layers = build_layers([(10, -1, 50, 25, 0, 0, 0.4, 0), (30, 1, 20, 40, 0, 0, 0.25, 0)])
        with pytest.raises(ValidationError) as excinfo:
            Problem(layers, RobinBoundary.zero_gradient()).full_clean()
        assert 'layers[0].retardation' in excinfo.value.message_dict


class TestProblemGeometry:
    """Tests for layer lookup and derived problems"""

    def test_layer_index_uses_left_layer_at_interface(self):
        """x = l_1 belongs to layer 0"""
        problem = case_library(9).problem
        assert problem.layer_index(0.0) == 0
        assert problem.layer_index(10.0) == 0
        assert problem.layer_index(10.5) == 1
        assert problem.layer_index(30.0) == 4

    def test_layer_index_outside_domain(self):
        """Positions outside [0, L] are rejected"""
        with pytest.raises(DomainError):
            case_library(9).problem.layer_index(31.0)

    def test_tiling_sums_to_length(self):
        """Layer thicknesses add up to L"""
        for case_id in range(1, 14):
            problem = case_library(case_id).problem
            assert sum(layer.thickness for layer in problem.layers) == pytest.approx(problem.length)

    def test_initial_profile(self):
        """Case 12 starts with mass in [14, 18] only"""
        problem = case_library(12).problem
        np.testing.assert_array_equal(problem.initial_profile([13.0, 14.0, 16.0, 18.0, 19.0]), [0, 0, 1, 1, 0])

    def test_without_sources(self):
        """Sources and initial mass are removed, other parameters kept"""
        problem = case_library(13).problem.without_sources()
        assert all(layer.production_rate == 0 for layer in problem.layers)
        assert all(layer.initial_concentration == 0 for layer in problem.layers)
        assert problem.layers[0].decay_rate == 3

    def test_step_boundaries(self):
        """Only boundaries with steps are listed"""
        assert case_library(2).problem.step_boundaries == ('inlet',)
        assert case_library(1).problem.step_boundaries == ()


class TestSolutionGrid:
    """Tests for SolutionGrid"""

    def test_shape_mismatch(self):
        """values must be |t| x |x|"""
        with pytest.raises(ValueError):
            SolutionGrid([0, 1], [1], np.zeros((2, 2)), Provenance.STEADY_STATE)

    def test_non_finite_values(self):
        """NaN never escapes into a grid"""
        with pytest.raises(NonFiniteSolutionError):
            SolutionGrid([0, 1], [1], [[0.0, np.nan]], Provenance.FINITE_VOLUME)

    def test_sample_interpolates(self):
        """Linear interpolation between nodes"""
        grid = SolutionGrid([0, 1, 2], [1, 2], [[0, 1, 2], [0, 2, 4]], Provenance.FINITE_VOLUME)
        sampled = grid.sample([0.5, 2])
        np.testing.assert_allclose(sampled.values, [[0.5, 2], [1, 4]])
        assert sampled.provenance is Provenance.FINITE_VOLUME

    def test_max_abs_difference(self):
        """Per-time maximum difference"""
        a = SolutionGrid([0, 1], [1, 2], [[0, 1], [1, 1]], Provenance.SEMI_ANALYTICAL)
        b = SolutionGrid([0, 1], [1, 2], [[0, 0.5], [1, 1.25]], Provenance.FINITE_VOLUME)
        np.testing.assert_allclose(a.max_abs_difference(b), [0.5, 0.25])

    def test_profile_lookup(self):
        """profile(t) returns the matching row"""
        grid = SolutionGrid([0, 1], [1, 2], [[0, 1], [2, 3]], Provenance.STEADY_STATE)
        np.testing.assert_array_equal(grid.profile(2), [2, 3])


# =============================================================================
# HOW TO RUN THESE TESTS
# =============================================================================
"""
To run the model tests, use these commands:

1. Run ALL tests in this file:
   pytest apps/transport/tests/test_models.py -v

2. Run only signal tests:
   pytest apps/transport/tests/test_models.py::TestTransientSignal -v

3. Run only validation tests:
   pytest apps/transport/tests/test_models.py::TestProblemValidation -v

4. Run with code coverage:
   pytest apps/transport/tests/test_models.py --cov=apps.transport.models -v

5. Skip the slow finite volume suites everywhere:
   pytest -m "not slow" -v
"""
