"""Tests for the Gauss IRK8 stepper."""

import math

import numpy as np
import pytest
from scipy import sparse

from spectral_operations.basis import make_grid
from spectral_operations.errors import ConfigurationError, StepFailureError
from spectral_operations.harness import EXAMPLES
from spectral_operations.integrator import (
    GaussStepper,
    StageSolver,
    StepperConfig,
    build_stage_solver,
    gauss4_tableau,
    integrate,
    irk8_step,
)
from spectral_operations.model import BenjaminSystem, make_source
from spectral_operations.operators import ModelParams
from spectral_operations.transform import interpolate


class ScalarSystem:
    """y' = lam y + y^2 * quadratic, as a 1x1 semi-linear system."""

    def __init__(self, lam=0.0, quadratic=0.0, source=None):
        self.D = sparse.csr_matrix(np.array([[lam]]))
        self.quadratic = quadratic
        self.source = source

    def nonlinear(self, Y):
        return self.quadratic * Y * Y

    def source_coeffs(self, t):
        return None if self.source is None else np.array([self.source(t)])


class LinearSystem:
    def __init__(self, D):
        self.D = sparse.csr_matrix(D)

    def nonlinear(self, Y):
        return np.zeros_like(Y)

    def source_coeffs(self, t):
        return None


def small_bump(grid):
    return interpolate(lambda x: 0.1 / (1.0 + x * x), grid)


class TestTableau:
    """Gauss-Legendre collocation coefficients."""

    def test_quadrature_order(self):
        tab = gauss4_tableau()
        for k in range(1, 9):
            assert math.isclose(np.dot(tab.b, tab.c ** (k - 1)), 1.0 / k, abs_tol=1e-14)

    def test_stage_order(self):
        tab = gauss4_tableau()
        for k in range(1, 5):
            assert np.allclose(tab.A @ tab.c ** (k - 1), tab.c**k / k, atol=1e-14)

    def test_symmetric_nodes(self):
        tab = gauss4_tableau()
        assert tab.stages == 4
        assert np.allclose(tab.c + tab.c[::-1], 1.0, atol=1e-15)
        assert np.allclose(tab.b, tab.b[::-1], atol=1e-16)

    def test_read_only(self):
        with pytest.raises(ValueError):
            gauss4_tableau().A[0, 0] = 1.0


class TestStageSolver:
    def test_inverts_apply(self, rng, unit_params):
        grid = make_grid(8, 1.0)
        system = BenjaminSystem.build(unit_params, grid)
        solver = build_stage_solver(0.01, gauss4_tableau().A, system.D)
        R = rng.standard_normal((4, grid.size))
        assert np.allclose(solver.apply(solver.solve(R)), R, atol=1e-11)

    def test_matches_dense_kronecker(self, rng):
        grid = make_grid(2, 1.0)
        D = BenjaminSystem.build(ModelParams(1, 0.5, 1, 0), grid).D.toarray()
        tab = gauss4_tableau()
        tau = 0.1
        R = rng.standard_normal((4, grid.size))
        dense = np.linalg.solve(np.eye(4 * grid.size) - tau * np.kron(tab.A, D), R.ravel())
        solver = build_stage_solver(tau, tab.A, D)
        assert np.allclose(solver.solve(R).ravel(), dense, atol=1e-12)

    def test_rejects_nonpositive_tau(self):
        with pytest.raises(ConfigurationError):
            build_stage_solver(0.0, gauss4_tableau().A, sparse.identity(2))


class TestStep:
    """Single steps of irk8_step."""

    def test_zero_field_is_identity(self, rng):
        Y = rng.standard_normal(4)
        system = LinearSystem(np.zeros((4, 4)))
        stepper = GaussStepper(system, StepperConfig(tau=0.1, T=0.1))
        assert np.array_equal(stepper.step(Y, 0.0, 0.1), Y)

    def test_linear_decay(self):
        cfg = StepperConfig(tau=0.1, T=0.1)
        stepper = GaussStepper(ScalarSystem(lam=-1.0), cfg)
        Y = stepper.step(np.array([1.0]), 0.0, 0.1)
        assert abs(Y[0] - math.exp(-0.1)) < 1e-12

    def test_linear_step_matches_stability_function(self, rng, unit_params):
        grid = make_grid(2, 1.0)
        system = LinearSystem(BenjaminSystem.build(unit_params, grid).D.toarray())
        D = system.D.toarray()
        tab = gauss4_tableau()
        tau = 0.05
        Y = rng.standard_normal(grid.size)
        Z = np.linalg.solve(np.eye(4 * grid.size) - tau * np.kron(tab.A, D), np.tile(Y, 4))
        expected = Y + tau * np.kron(tab.b, D) @ Z
        stepper = GaussStepper(system, StepperConfig(tau=tau, T=tau))
        assert np.allclose(stepper.step(Y, 0.0, tau), expected, atol=1e-12)

    def test_source_is_integrated(self):
        # y' = cos t, y(0) = 0
        stepper = GaussStepper(ScalarSystem(source=math.cos), StepperConfig(tau=0.25, T=1.0))
        Y = stepper.run(np.array([0.0]))
        assert abs(Y[0] - math.sin(1.0)) < 1e-12

    def test_symmetric(self, unit_params):
        grid = make_grid(8, 1.0)
        system = BenjaminSystem.build(unit_params, grid)
        cfg = StepperConfig(tau=0.01, T=0.01)
        tab = gauss4_tableau()
        Y0 = small_bump(grid)
        Y1 = irk8_step(Y0, 0.0, 0.01, system, StageSolver(0.01, tab.A, system.D), cfg)
        back = irk8_step(Y1, 0.01, -0.01, system, StageSolver(-0.01, tab.A, system.D), cfg)
        assert np.allclose(back, Y0, atol=1e-12)

    def test_failure_reports_iterations(self):
        cfg = StepperConfig(tau=0.1, T=0.1, fp_max_iters=1)
        stepper = GaussStepper(ScalarSystem(quadratic=1.0), cfg)
        with pytest.raises(StepFailureError) as info:
            stepper.step(np.array([1.0]), 0.0, 0.1)
        assert info.value.iterations == 1
        assert len(info.value.increments) == 1
        assert info.value.tau == 0.1


class TestOrder:
    """Global convergence order on y' = y^2."""

    def test_slope_is_eight(self):
        exact = 1.0 / (1.0 - 0.5)
        errors = []
        taus = (0.1, 0.05, 0.025)
        for tau in taus:
            stepper = GaussStepper(ScalarSystem(quadratic=1.0), StepperConfig(tau=tau, T=0.5))
            errors.append(abs(stepper.run(np.array([1.0]))[0] - exact))
        slopes = np.diff(np.log(errors)) / np.diff(np.log(taus))
        assert np.all(np.abs(slopes - 8.0) < 0.5)


class TestRun:
    """Time loop, observer schedule and statistics."""

    def test_observer_schedule(self):
        times = []
        stepper = GaussStepper(ScalarSystem(lam=-1.0), StepperConfig(tau=0.02, T=0.1, snapshot_stride=2))
        stepper.run(np.array([1.0]), lambda t, Y: times.append(t))
        assert np.allclose(times, [0.0, 0.04, 0.08, 0.1])
        assert times[-1] == 0.1

    def test_partial_final_step(self):
        times = []
        stepper = GaussStepper(ScalarSystem(lam=-1.0), StepperConfig(tau=0.02, T=0.05))
        Y = stepper.run(np.array([1.0]), lambda t, Y: times.append(t))
        assert np.allclose(times, [0.0, 0.02, 0.04, 0.05])
        assert stepper.stats["steps"] == 3
        assert abs(Y[0] - math.exp(-0.05)) < 1e-12

    def test_zero_horizon(self):
        times = []
        stepper = GaussStepper(ScalarSystem(lam=-1.0), StepperConfig(tau=0.1, T=0.0))
        Y = stepper.run(np.array([2.0]), lambda t, Y: times.append(t))
        assert times == [0.0]
        assert Y[0] == 2.0

    def test_observer_sees_read_only_copy(self):
        seen = []
        stepper = GaussStepper(ScalarSystem(lam=-1.0), StepperConfig(tau=0.1, T=0.1))
        stepper.run(np.array([1.0]), lambda t, Y: seen.append(Y))
        assert all(not Y.flags.writeable for Y in seen)

    def test_stats(self):
        stepper = GaussStepper(ScalarSystem(quadratic=1.0), StepperConfig(tau=0.05, T=0.2))
        stepper.run(np.array([1.0]))
        assert stepper.stats["steps"] == 4
        assert 1 < stepper.stats["fp_iterations_max"] <= 50
        assert stepper.stats["fp_iterations_total"] >= 4 * 2

    def test_norm_conserved_by_skew_flow(self, rng):
        grid = make_grid(16, 2.0)
        system = BenjaminSystem.build(ModelParams(1.0, 1.0, 1.0, 0.0), grid)
        Y0 = rng.standard_normal(grid.size)
        Y = GaussStepper(system, StepperConfig(tau=0.01, T=1.0)).run(Y0)
        assert abs(np.linalg.norm(Y) - np.linalg.norm(Y0)) < 1e-10 * np.linalg.norm(Y0)

    def test_integrate_wrapper(self, unit_params):
        grid = make_grid(8, 2.0)
        cfg = StepperConfig(tau=0.01, T=0.05)
        Y0 = small_bump(grid)
        direct = GaussStepper(BenjaminSystem.build(unit_params, grid), cfg).run(Y0)
        assert np.array_equal(integrate(Y0, unit_params, grid, None, cfg), direct)


class TestContraction:
    """Fixed-point stage iteration on manufactured Lorentzian data."""

    @staticmethod
    def iteration_max(p, family):
        cfg = EXAMPLES[1]
        grid = make_grid(p, cfg.ell)
        system = BenjaminSystem.build(cfg.params, grid, make_source(family, cfg.params))
        stepper = GaussStepper(system, StepperConfig(tau=0.02, T=0.4))
        stepper.run(interpolate(lambda x: family.u(x, 0.0), grid))
        assert stepper.stats["steps"] == 20
        return stepper.stats["fp_iterations_max"]

    def test_iterations_bounded_and_grid_independent(self, example1_family):
        counts = [self.iteration_max(p, example1_family) for p in (16, 64, 256)]
        assert max(counts) <= 30
        # roundoff can move the stopping test by one sweep
        assert max(counts) - min(counts) <= 1


class TestStepperConfig:
    def test_tau_above_horizon(self):
        with pytest.raises(ConfigurationError, match="tau"):
            StepperConfig(tau=0.5, T=0.1)

    @pytest.mark.parametrize("tau", [0.0, -0.1, float("nan")])
    def test_bad_tau(self, tau):
        with pytest.raises(ConfigurationError):
            StepperConfig(tau=tau, T=1.0)

    def test_bad_iteration_cap(self):
        with pytest.raises(ConfigurationError):
            StepperConfig(tau=0.1, T=1.0, fp_max_iters=0)
