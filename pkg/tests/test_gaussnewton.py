"""阻尼 Gauss-Newton 精化: 迭代、Jacobian、统计量和报告"""

from __future__ import annotations

import json

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from src.recon.basis import MonomialBasis
from src.recon.chebapprox import SampledSignal
from src.recon.errors import ConvergenceError, DimensionError
from src.recon.gaussnewton import (
    FitProblem,
    GnConfig,
    _fortran,
    format_report,
    gauss_newton,
    jacobian,
    refine,
    result_to_dict,
    scaled_norm,
    statistics,
)
from src.recon.integrate import sample_trajectory
from src.recon.model import RecoveredModel


# ======================================================================
# Helpers
# ======================================================================

def _logistic_model(a=1.0, b=-0.5):
    """y' = a y + b y²"""
    basis = MonomialBasis(1, 2, include_constant=False)
    coeffs = np.array([[a, b]])
    return RecoveredModel(basis, coeffs, 0.0, np.ones_like(coeffs, dtype=bool), (0.0, 3.0), ["y"])


def _logistic_data(tol=1e-12):
    model = _logistic_model()
    return sample_trajectory(model.rhs_eval, [0.2], 0.0, 3.0, 16, ["y"], tol, tol)


def _cubic_problem():
    basis = MonomialBasis(1, 3, include_constant=False)
    coeffs = np.array([[0.0, 0.0, 1.0]])
    model = RecoveredModel(basis, coeffs, 0.0, coeffs != 0.0, (0.0, 10.0), ["y"])
    times = np.linspace(0.0, 10.0, 11)
    return FitProblem(model, [SampledSignal(times, np.ones(11), "y")])


# ======================================================================
# GnConfig
# ======================================================================

class TestGnConfig:

    def test_defaults(self):
        config = GnConfig()
        assert (config.ptol, config.max_iter, config.fc_start, config.fc_min) == (1e-3, 40, 0.01, 0.01)

    def test_fc_min_above_fc_start_rejected(self):
        with pytest.raises(ValidationError):
            GnConfig(fc_start=0.1, fc_min=0.5)

    def test_non_positive_ptol_rejected(self):
        with pytest.raises(ValidationError):
            GnConfig(ptol=0.0)


# ======================================================================
# gauss_newton on explicit residuals
# ======================================================================

class TestGaussNewton:

    def test_linear_problem_takes_one_full_step_after_startup(self):
        rng = np.random.default_rng(8)
        jac = rng.normal(size=(10, 3))
        p_true = np.array([1.5, -2.0, 0.7])
        b = jac @ p_true
        result = gauss_newton(lambda p: jac @ p - b, p_true + [0.4, 0.3, -0.2], GnConfig())
        assert result.converged
        assert result.iterations[0].damping == pytest.approx(0.01)
        assert result.iterations[1].damping == 1.0
        assert result.kappa <= 1e-6
        np.testing.assert_allclose(result.coeffs, p_true, rtol=1e-8)

    def test_straight_line_statistics_from_iteration(self):
        t = np.array([1.0, 2.0, 3.0])
        y = np.array([1.1, 1.9, 3.2])
        result = gauss_newton(lambda p: p[0] * t - y, [0.5], GnConfig())
        estimate = (t @ y) / (t @ t)
        rss = np.sum((estimate * t - y) ** 2)
        assert result.converged
        assert result.coeffs[0] == pytest.approx(estimate, rel=1e-10)
        assert result.sigma[0] == pytest.approx(np.sqrt(rss / 2 / (t @ t)), rel=1e-6)

    def test_final_step_kept_only_if_residual_does_not_grow(self):
        # atan 的牛顿步从 p=2 越过零点到 p≈-3.5，|atan| 反而变大
        result = gauss_newton(lambda p: np.array([np.arctan(p[0])]), [2.0], GnConfig(ptol=5.0))
        assert result.converged
        assert len(result.iterations) == 1
        assert result.iterations[0].normx <= 5.0
        np.testing.assert_array_equal(result.coeffs, [2.0])
        assert result.normf == pytest.approx(np.arctan(2.0), rel=1e-12)
        assert result.normf <= result.iterations[0].normf

    def test_rank_deficient_jacobian_fails_gracefully(self):
        result = gauss_newton(lambda p: np.array([p[0] + p[1] - 1.0, 2 * (p[0] + p[1]) - 2.5, 0.3]), [1.0, 1.0], GnConfig())
        assert not result.converged
        assert "秩" in result.failure_reason

    def test_iteration_limit(self):
        result = gauss_newton(lambda p: np.array([np.exp(p[0]) - 1e-3, 0.5]), [5.0], GnConfig(max_iter=1))
        assert not result.converged
        assert "最大迭代步数" in result.failure_reason

    def test_residual_failure_at_start(self):
        def residual(p):
            raise ValueError("boom")

        result = gauss_newton(residual, [1.0], GnConfig())
        assert not result.converged
        assert result.iterations == []
        np.testing.assert_array_equal(result.coeffs, [1.0])


# ======================================================================
# Statistics
# ======================================================================

class TestStatistics:

    def test_straight_line_standard_error(self):
        t = np.array([1.0, 2.0, 3.0])
        y = np.array([1.1, 1.9, 3.2])
        p = np.array([(t @ y) / (t @ t)])
        r = p[0] * t - y
        block = statistics(t[:, None], r, p)
        expected = np.sqrt((r @ r) / 2 / (t @ t))
        assert block.available
        assert block.dof == 2
        assert block.sigma[0] == pytest.approx(expected, rel=1e-10)
        assert block.quantile == pytest.approx(stats.t.ppf(0.975, 2))
        np.testing.assert_allclose(
            block.intervals[0], [p[0] - block.quantile * expected, p[0] + block.quantile * expected], rtol=1e-10
        )
        assert block.percent[0] == pytest.approx(100 * expected / p[0], rel=1e-10)

    def test_exact_points_have_zero_sigma(self):
        t = np.array([1.0, 2.0, 3.0])
        block = statistics(t[:, None], np.zeros(3), np.array([2.0]))
        assert block.sigma[0] == 0.0

    def test_rank_deficient(self):
        jac = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
        block = statistics(jac, np.ones(3), np.array([1.0, 1.0]))
        assert not block.available
        assert block.reason

    def test_no_degrees_of_freedom(self):
        block = statistics(np.eye(2), np.ones(2), np.array([1.0, 1.0]))
        assert not block.available


# ======================================================================
# FitProblem and refine
# ======================================================================

class TestFitProblem:

    def test_residual_vanishes_for_generating_model(self):
        problem = FitProblem(_logistic_model(), _logistic_data(1e-9))
        assert problem.rows == 16 and problem.parameter_count == 2
        assert scaled_norm(problem.residual(problem.initial_parameters())) <= 1e-6

    def test_residual_grows_with_perturbation(self):
        problem = FitProblem(_logistic_model(), _logistic_data(1e-9))
        p = problem.initial_parameters()
        norms = [scaled_norm(problem.residual(p * (1 + delta))) for delta in (0.01, 0.02, 0.04)]
        assert norms[0] < norms[1] < norms[2]

    def test_initial_condition_is_fixed(self):
        data = _logistic_data(1e-9)
        problem = FitProblem(_logistic_model(), data)
        values = problem.trajectory_values(np.array([0.3, -0.1]))
        assert values[0] == data[0].values[0]

    def test_jacobian_matches_central_differences(self):
        problem = FitProblem(_logistic_model(), _logistic_data(), rtol=1e-12, atol=1e-12)
        p = problem.initial_parameters()
        r0 = problem.residual(p)
        forward = jacobian(problem.residual, p, r0, 1e-6)
        h = 1e-7
        central = np.column_stack([
            (problem.residual(p + h * e) - problem.residual(p - h * e)) / (2 * h) for e in np.eye(p.size)
        ])
        assert np.linalg.norm(forward - central) <= 1e-4 * np.linalg.norm(central)

    def test_dimension_mismatch(self):
        data = _logistic_data(1e-9) * 2
        with pytest.raises(DimensionError):
            FitProblem(_logistic_model(), data)

    def test_non_finite_parameters(self):
        problem = FitProblem(_logistic_model(), _logistic_data(1e-9))
        with pytest.raises(ValueError):
            problem.residual([np.nan, 1.0])


class TestRefine:

    def test_recovers_perturbed_coefficients(self):
        problem = FitProblem(_logistic_model(1.1, -0.45), _logistic_data())
        result = refine(problem, GnConfig())
        assert result.converged
        np.testing.assert_allclose(result.coeffs, [1.0, -0.5], rtol=1e-4)
        normfs = [record.normf for record in result.iterations]
        assert all(later < earlier for earlier, later in zip(normfs, normfs[1:]))
        assert result.kappa < 1.0
        np.testing.assert_allclose(result.model.coeffs, [result.coeffs])

    def test_pendulum_self_consistency(self, pendulum_result):
        _, _, model = pendulum_result
        data = sample_trajectory(model.rhs_eval, [1.0, 0.0], 0.0, 10.0, 49, ["theta1", "theta2"])
        problem = FitProblem(model, data)
        result = refine(problem, GnConfig())
        assert result.converged
        assert len(result.iterations) <= 3
        p0 = problem.initial_parameters()
        assert np.max(np.abs(result.coeffs - p0) / np.abs(p0)) < 1e-3
        assert result.kappa == 0.0
        np.testing.assert_allclose(result.sigma, 0.0, atol=1e-8)

    def test_non_integrable_start_is_reported(self):
        problem = _cubic_problem()
        result = refine(problem, GnConfig())
        assert not result.converged
        assert "model not integrable" in result.failure_reason
        np.testing.assert_array_equal(result.coeffs, problem.initial_parameters())
        assert "Iteration failed" in format_report(result, GnConfig(), problem.parameter_count)
        with pytest.raises(ConvergenceError, match="model not integrable"):
            result.raise_for_failure()


# ======================================================================
# Report
# ======================================================================

class TestReport:

    @pytest.mark.parametrize("value, digits, text", [
        (8.345461, 7, "0.8345461D+01"),
        (-0.0379, 3, "-0.379D-01"),
        (0.01, 2, "0.10D-01"),
        (0.0, 3, "0.000D+00"),
    ])
    def test_fortran_numbers(self, value, digits, text):
        assert _fortran(value, digits) == text

    def test_converged_report(self):
        problem = FitProblem(_logistic_model(1.1, -0.45), _logistic_data())
        config = GnConfig()
        result = refine(problem, config)
        text = format_report(result, config, problem.parameter_count)
        assert "    It       Normf               Normx       Damp.Fct." in text
        assert "Incompatibility factor kappa" in text
        assert "Independent confidence intervals" in text
        assert " Number of parameters to be estimated (N) :    2" in text
        payload = json.loads(json.dumps(result_to_dict(result)))
        assert payload["converged"] is True
        assert len(payload["statistics"]["sigma"]) == 2
