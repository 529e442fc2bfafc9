"""Optimizer tests: gradient exactness, ascent quality, scan portfolio."""

import math

import numpy as np
import pytest

from mtlab.core import (
    ProblemParams,
    concentration_threshold,
    moser_constant,
)
from mtlab.errors import (
    DegenerateProfileError,
    DomainError,
    FunctionalOverflowError,
)
from mtlab.optimize import (
    GridObjective,
    OptimizerConfig,
    continuation_path,
    crossing_estimate,
    lambda_scan,
    maximize,
)
from mtlab.profiles import RadialProfile

# Best value over the sampled concentrating family for n=2, m=1, from the
# scale sweep eps in {1e-2, 1e-3, 1e-4}; the maximizer must beat it.
BEST_SEQUENCE_VALUE = 13.047740715065308

# Converged subcritical run (lam=0, growth ratio 0.7, 150 knots); both
# backends agree to 2e-15 because the gradient tolerance pins the optimum.
SUBCRITICAL_VALUE = 6.3381847624700205


def ramp_values(rng, knots, peak=1.0):
    steps = rng.uniform(0.1, 1.0, knots.size - 1)
    v = np.concatenate([[0.0], np.cumsum(steps)])
    return v * (peak / v[-1])


class TestGridObjective:
    def test_rejects_bad_grids(self):
        params = ProblemParams(2, 1, 1.0)
        with pytest.raises(DomainError):
            GridObjective(params, [1.0, 2.0])
        with pytest.raises(DomainError):
            GridObjective(params, [0.0, 2.0, 2.0])
        with pytest.raises(DomainError):
            GridObjective(params, [0.0])

    def test_rejects_bad_values(self):
        obj = GridObjective(ProblemParams(2, 1, 1.0), [0.0, 1.0, 2.0])
        with pytest.raises(DomainError):
            obj.value([0.0, 1.0])
        with pytest.raises(DomainError):
            obj.value([0.5, 1.0, 1.5])

    def test_config_validation(self):
        with pytest.raises(DomainError):
            OptimizerConfig(knot_count=4)
        with pytest.raises(DomainError):
            OptimizerConfig(panel_width=0.0)
        with pytest.raises(DomainError):
            OptimizerConfig(t_max=0.5)

    def test_energy_matches_profile(self):
        rng = np.random.default_rng(3)
        knots = np.linspace(0.0, 12.0, 25)
        values = ramp_values(rng, knots)
        for n in (2, 3, 4):
            obj = GridObjective(ProblemParams(n, 1, 1.0), knots)
            prof = RadialProfile(n, knots, values)
            assert obj.energy(values) == pytest.approx(
                prof.dirichlet_energy(), rel=1e-14
            )

    def test_value_matches_adaptive_functional(self):
        rng = np.random.default_rng(5)
        knots = np.linspace(0.0, 18.0, 37)
        values = ramp_values(rng, knots, peak=0.9)
        params = ProblemParams(2, 2, 0.7)
        obj = GridObjective(params, knots)
        reference = (
            RadialProfile(2, knots, values)
            .normalize()
            .functional_value(params, tol=1e-11)
        )
        assert obj.value(values) == pytest.approx(reference, rel=1e-9)

    def test_scale_invariance(self):
        rng = np.random.default_rng(11)
        knots = np.linspace(0.0, 15.0, 31)
        values = ramp_values(rng, knots)
        obj = GridObjective(ProblemParams(2, 1, 1.0), knots)
        base = obj.value(values)
        for factor in (0.25, 3.0):
            assert obj.value(factor * values) == pytest.approx(base, rel=1e-12)

    def test_gradient_orthogonal_to_scaling(self):
        rng = np.random.default_rng(13)
        knots = np.linspace(0.0, 15.0, 31)
        for n, lam in [(2, 1.0), (3, 0.5)]:
            values = ramp_values(rng, knots)
            obj = GridObjective(ProblemParams(n, 1, lam), knots)
            value, grad = obj.value_and_gradient(values)
            assert abs(float(grad @ values)) <= 1e-12 * max(1.0, value)

    @pytest.mark.parametrize("n,lam", [(2, 0.0), (2, 1.5), (3, 1.0)])
    def test_gradient_matches_finite_differences(self, n, lam):
        rng = np.random.default_rng(17 + n)
        knots = np.linspace(0.0, 15.0, 31)
        values = ramp_values(rng, knots)
        obj = GridObjective(ProblemParams(n, 1, lam), knots)
        _, grad = obj.value_and_gradient(values)
        h = 1e-6
        fd = np.zeros_like(grad)
        for j in range(1, values.size):
            up = values.copy()
            up[j] += h
            down = values.copy()
            down[j] -= h
            fd[j] = (obj.value(up) - obj.value(down)) / (2.0 * h)
        rel = np.linalg.norm(fd - grad) / np.linalg.norm(grad)
        assert rel < 1e-6

    def test_overflow_on_extreme_grid(self):
        # growth argument scales with the grid horizon, far past the guard
        obj = GridObjective(ProblemParams(2, 1, 1.0), [0.0, 5000.0, 10000.0])
        with pytest.raises(FunctionalOverflowError):
            obj.value([0.0, 1.0, 2.0])

    def test_degenerate_flat_profile(self):
        obj = GridObjective(ProblemParams(2, 1, 1.0), [0.0, 1.0, 2.0])
        with pytest.raises(DegenerateProfileError):
            obj.value([0.0, 0.0, 0.0])


class TestMaximize:
    def test_critical_quality(self):
        result = maximize(ProblemParams(2, 1, 1.0))
        assert result.value > concentration_threshold(2)
        assert result.value > BEST_SEQUENCE_VALUE - 1e-4
        assert result.value < 13.2
        assert result.grad_norm < 1e-4
        assert result.profile.dirichlet_energy() == pytest.approx(1.0, rel=1e-12)
        recomputed = result.profile.functional_value(ProblemParams(2, 1, 1.0), tol=1e-10)
        assert recomputed == pytest.approx(result.value, rel=1e-12)

    def test_determinism(self):
        cfg = OptimizerConfig(knot_count=120, t_max=40.0, max_iter=400)
        params = ProblemParams(2, 1, 1.0)
        first = maximize(params, cfg)
        second = maximize(params, cfg)
        assert first.value == second.value
        assert first.seed_name == second.seed_name
        assert np.array_equal(first.profile.values, second.profile.values)

    def test_subcritical_converges(self):
        cfg = OptimizerConfig(knot_count=150, t_max=40.0, max_iter=800)
        params = ProblemParams(2, 1, 0.0, beta=0.7 * moser_constant(2))
        result = maximize(params, cfg)
        assert result.converged
        assert result.grad_norm <= 1e-7
        assert result.value == pytest.approx(SUBCRITICAL_VALUE, abs=1e-9)

    def test_flat_escape_for_heavy_perturbation(self):
        # above the critical weight the supremum is the flat limit, never
        # attained, so the ascent flattens out and reports no convergence
        cfg = OptimizerConfig(knot_count=150, t_max=40.0, max_iter=800)
        params = ProblemParams(2, 1, 5.0, beta=0.7 * moser_constant(2))
        result = maximize(params, cfg)
        assert result.value <= math.pi + 1e-9
        assert result.value > math.pi - 1e-3
        assert float(np.max(result.profile.values)) < 0.1
        assert not result.converged

    def test_continuation_monotone(self):
        cfg = OptimizerConfig(knot_count=120, t_max=40.0, max_iter=500)
        path = continuation_path(2, 1, 1.0, [0.6, 0.8, 1.0], cfg)
        values = [result.value for _, result in path]
        assert values == sorted(values)
        assert values[0] > 0.0
        assert values[-1] > concentration_threshold(2)
        assert any(result.seed_name == "warm" for _, result in path[1:])

    def test_continuation_validation(self):
        with pytest.raises(DomainError):
            continuation_path(2, 1, 1.0, [0.8, 0.6])
        with pytest.raises(DomainError):
            continuation_path(2, 1, 1.0, [0.0, 1.0])


class TestLambdaScan:
    CFG = OptimizerConfig(knot_count=100, t_max=35.0, max_iter=300)

    def test_rows_monotone_and_complete(self):
        lambdas = [0.5, 1.0, 2.0]
        rows = lambda_scan(2, 1, lambdas, config=self.CFG)
        assert [row["lambda"] for row in rows] == lambdas
        expected_keys = {"lambda", "value", "excess", "peak", "conc_fraction", "converged"}
        bar = concentration_threshold(2)
        for row in rows:
            assert set(row) == expected_keys
            assert row["excess"] == pytest.approx(row["value"] - bar, abs=1e-12)
            assert row["peak"] > 0.0
            assert 0.0 <= row["conc_fraction"] <= 1.0
            assert isinstance(row["converged"], bool)
        values = [row["value"] for row in rows]
        for a, b in zip(values, values[1:]):
            assert b <= a + 1e-9

    def test_crossing_estimate(self):
        rows = lambda_scan(2, 1, [0.5, 2.0], config=self.CFG)
        assert crossing_estimate(rows, 2) == 2.0
        fake = [{"lambda": 9.0, "value": 1.0}]
        assert crossing_estimate(fake, 2) is None

    def test_workers_match_serial(self):
        cfg = OptimizerConfig(knot_count=80, t_max=30.0, max_iter=200)
        lambdas = [0.5, 1.5]
        serial = lambda_scan(2, 1, lambdas, config=cfg, workers=1)
        parallel = lambda_scan(2, 1, lambdas, config=cfg, workers=2)
        assert serial == parallel

    def test_rejects_bad_weights(self):
        with pytest.raises(DomainError):
            lambda_scan(2, 1, [], config=self.CFG)
        with pytest.raises(DomainError):
            lambda_scan(2, 1, [-0.5], config=self.CFG)
