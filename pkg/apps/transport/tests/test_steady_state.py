"""
Tests for the exact steady-state solver
"""
import numpy as np
import pytest

from apps.transport.exceptions import SingularSystemError
from apps.transport.models import Problem, Provenance, RobinBoundary, TransientSignal
from apps.transport.utils.util_case_library import build_layers, case_library
from apps.transport.utils.util_inversion import cf_quadrature, solve_grid
from apps.transport.utils.util_steady_state import SteadyCoeffs, SteadyKind, solve_steady


def interior_points(problem, count=7):
    """Points strictly inside every layer"""
    points = []
    for layer in problem.layers:
        points.extend(np.linspace(layer.x_left, layer.x_right, count + 2)[1:-1])
    return points


class TestSteadyCoeffs:
    """Tests for the per-layer basis"""

    def test_kinds(self):
        """Kind follows mu and v"""
        reactive, advective, diffusive = build_layers([
            (5, 1, 1, 1, 1, 0, 1, 0), (10, 1, 1, 1, 0, 0, 1, 0), (15, 1, 1, 0, 0, 0, 1, 0),
        ])
        assert SteadyCoeffs.for_layer(reactive).kind is SteadyKind.REACTIVE
        assert SteadyCoeffs.for_layer(advective).kind is SteadyKind.ADVECTIVE
        assert SteadyCoeffs.for_layer(diffusive).kind is SteadyKind.DIFFUSIVE

    def test_reactive_exponents_solve_the_characteristic_equation(self):
        """D r^2 - v r - mu = 0 for both exponents"""
        layer = build_layers([(5, 1, 50, 25, 3, 0, 0.4, 0)])[0]
        for r in SteadyCoeffs.for_layer(layer).exponents:
            assert 50 * r * r - 25 * r - 3 == pytest.approx(0, abs=1e-12)

    def test_negative_velocity_keeps_distinct_exponents(self):
        """v < 0 still gives one growing and one decaying mode"""
        layer = build_layers([(5, 1, 2, -4, 1, 0, 1, 0)])[0]
        r1, r2 = SteadyCoeffs.for_layer(layer).exponents
        assert r1 > 0 > r2


class TestSolveSteady:
    """Tests for solve_steady"""

    def test_uniform_source_balance(self):
        """Zero-gradient ends with gamma and mu give c = gamma/mu"""
        layers = build_layers([(5, 1, 1, 1, 1, 2, 1, 0), (10, 2, 3, 1, 1, 2, 0.5, 0)])
        problem = Problem(layers, RobinBoundary.zero_gradient(), RobinBoundary.zero_gradient())
        solution = solve_steady(problem)
        for x in (0.0, 2.5, 5.0, 7.5, 10.0):
            assert solution(x) == pytest.approx(2.0, abs=1e-10)

    def test_case_1_inlet_flux(self):
        """v c - D c' = v c0 holds at x = 0"""
        problem = case_library(1).problem
        solution = solve_steady(problem)
        first = problem.layers[0]
        flux = first.velocity * solution(0.0) - first.dispersion * solution.derivative(0.0)
        assert flux == pytest.approx(first.velocity, rel=1e-9)

    def test_case_1_outlet_gradient(self):
        """Zero gradient at x = L"""
        problem = case_library(1).problem
        assert solve_steady(problem).derivative(problem.length) == pytest.approx(0, abs=1e-9)

    @pytest.mark.parametrize('case_id', [1, 8, 9, 13])
    def test_pde_residual(self, case_id):
        """D c'' - v c' - mu c + gamma vanishes inside each layer"""
        problem = case_library(case_id).problem
        solution = solve_steady(problem)
        for x in interior_points(problem):
            coeffs = solution.coeffs[problem.layer_index(x)]
            assert abs(float(coeffs.residual(x))) <= 1e-9

    @pytest.mark.parametrize('case_id', [5, 8, 9, 13])
    def test_interface_continuity(self, case_id):
        """Concentration and theta*D*c' match across every interface"""
        problem = case_library(case_id).problem
        solution = solve_steady(problem)
        for i, ell in enumerate(problem.interfaces):
            left, right = solution.coeffs[i], solution.coeffs[i + 1]
            assert float(left.evaluate(ell)) == pytest.approx(float(right.evaluate(ell)), abs=1e-10)
            left_flux = left.layer.water_content * left.layer.dispersion * float(left.evaluate(ell, 1))
            right_flux = right.layer.water_content * right.layer.dispersion * float(right.evaluate(ell, 1))
            assert left_flux == pytest.approx(right_flux, abs=1e-9)

    def test_condition_residuals(self):
        """All 2m rows are satisfied"""
        solution = solve_steady(case_library(9).problem)
        assert np.max(np.abs(solution.condition_residuals())) <= 1e-9

    def test_advective_layers_with_production(self):
        """mu = 0 with v != 0 uses the linear particular solution"""
        layers = build_layers([(5, 1, 2, 1, 0, 0.5, 1, 0), (12, 1, 4, 1, 0, 0.2, 0.5, 0)])
        problem = Problem(layers, RobinBoundary.concentration(TransientSignal.constant(1.0)))
        solution = solve_steady(problem)
        assert solution(0.0) == pytest.approx(1.0, abs=1e-12)
        for x in interior_points(problem):
            assert abs(float(solution.coeffs[problem.layer_index(x)].residual(x))) <= 1e-9

    def test_pure_diffusion_is_piecewise_linear(self):
        """v = mu = gamma = 0 between two Dirichlet ends"""
        layers = build_layers([(4, 1, 1, 0, 0, 0, 1, 0), (10, 1, 3, 0, 0, 0, 1, 0)])
        problem = Problem(
            layers,
            RobinBoundary.concentration(TransientSignal.constant(1.0)),
            RobinBoundary.concentration(TransientSignal.zero()),
        )
        solution = solve_steady(problem)
        # equal fluxes: 1 * (1 - c1)/4 = 3 * c1/6
        c1 = 1.0 / 3.0
        assert solution(4.0) == pytest.approx(c1, abs=1e-12)
        assert solution(2.0) == pytest.approx((1 + c1) / 2, abs=1e-12)
        assert solution(10.0) == pytest.approx(0, abs=1e-12)

    def test_pure_diffusion_with_production_is_quadratic(self):
        """gamma > 0 with v = mu = 0 curves the profile"""
        layers = build_layers([(5, 1, 2, 0, 0, 1, 1, 0), (10, 1, 2, 0, 0, 1, 1, 0)])
        problem = Problem(
            layers,
            RobinBoundary.concentration(TransientSignal.zero()),
            RobinBoundary.concentration(TransientSignal.zero()),
        )
        solution = solve_steady(problem)
        # c = gamma x (L - x) / (2 D)
        for x in (1.0, 5.0, 8.0):
            assert solution(x) == pytest.approx(x * (10 - x) / 4, abs=1e-10)

    def test_pure_neumann_without_decay_is_singular(self):
        """No Dirichlet/Robin anchor and no decay leaves a free constant"""
        layers = build_layers([(5, 1, 1, 0, 0, 0, 1, 0), (10, 1, 2, 0, 0, 0, 1, 0)])
        problem = Problem(layers, RobinBoundary.zero_gradient(), RobinBoundary.zero_gradient())
        with pytest.raises(SingularSystemError):
            solve_steady(problem)

    def test_step_inlet_uses_terminal_value(self):
        """A pulse switches off, so the steady state has no inlet mass"""
        problem = case_library(13).problem.with_signals(inlet=TransientSignal.zero())
        pulse = solve_steady(case_library(13).problem)
        zero = solve_steady(problem)
        x = np.linspace(0, 30, 31)
        np.testing.assert_allclose(pulse(x), zero(x), rtol=0, atol=1e-14)

    def test_grid(self):
        """Steady profile repeated for each time"""
        spec = case_library(8)
        grid = solve_steady(spec.problem).grid(spec.x_values, spec.t_values)
        assert grid.values.shape == (len(spec.t_values), len(spec.x_values))
        assert grid.provenance is Provenance.STEADY_STATE
        np.testing.assert_array_equal(grid.values[0], grid.values[-1])


class TestLongTimeLimit:
    """The transient solution approaches the steady state"""

    def test_case_8_at_late_time(self):
        """SALT at t = 1000 agrees with the steady state"""
        spec = case_library(8)
        x_values = spec.x_values
        transient = solve_grid(spec.problem, cf_quadrature(14), x_values, [1000.0])
        steady = solve_steady(spec.problem)(x_values)
        np.testing.assert_allclose(transient.values[0], steady, rtol=0, atol=1e-6)

    @pytest.mark.parametrize('case_id', [1, 3, 8, 9, 13])
    def test_distance_to_steady_state_shrinks(self, case_id):
        """max |c(x, T) - c_inf(x)| is smaller at T = 1000 than at T = 100"""
        spec = case_library(case_id)
        steady = solve_steady(spec.problem)(spec.x_values)
        transient = solve_grid(spec.problem, cf_quadrature(14), spec.x_values, [100.0, 1000.0])
        early, late = np.max(np.abs(transient.values - steady), axis=1)
        assert late <= early


# =============================================================================
# HOW TO RUN THESE TESTS
# =============================================================================
"""
To run the steady-state tests, use these commands:

1. Run ALL tests in this file:
   pytest apps/transport/tests/test_steady_state.py -v

2. Run only the solver tests:
   pytest apps/transport/tests/test_steady_state.py::TestSolveSteady -v
"""
