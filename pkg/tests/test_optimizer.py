"""Reparameterization, multi-start search, grid oracle."""

import math

import numpy as np
import pytest

from pnp_bb84 import (OptimizationProblem, PhysicalParams, Scenario,
                      grid_oracle, maximize, point_from_raw, raw_from_point)

PHYS = PhysicalParams()

ALL_SCENARIOS = [
    (Scenario.NO_DECOY_INFINITE, math.inf),
    (Scenario.NO_DECOY_FINITE, 5e10),
    (Scenario.DECOY_INFINITE, math.inf),
    (Scenario.DECOY_FINITE, 5e10),
]


def problem_for(scenario, n_pulses, dist=20.0, seed=0, **kw):
    return OptimizationProblem(scenario=scenario, distance_km=dist,
                               n_pulses=n_pulses, phys=PHYS, seed=seed, **kw)


class TestReparameterization:
    @pytest.mark.parametrize("scenario,n_pulses", ALL_SCENARIOS)
    def test_any_raw_vector_is_feasible(self, scenario, n_pulses):
        problem = problem_for(scenario, n_pulses)
        rng = np.random.default_rng(42)
        for _ in range(300):
            raw = rng.normal(scale=3.0, size=problem.dim)
            point = point_from_raw(problem, raw)
            point.validate(PHYS)  # raises on any violated invariant
            lam = point.lam_s if scenario.uses_decoy else point.lam
            lam_p = lam * PHYS.q_split / (1 - PHYS.q_split)
            m_a = PHYS.m_bright * 10 ** (-PHYS.loss_coeff * 20.0 / 10)
            assert (1 + point.delta) * m_a * lam_p < 1.0

    @pytest.mark.parametrize("scenario,n_pulses", ALL_SCENARIOS)
    def test_round_trip(self, scenario, n_pulses):
        problem = problem_for(scenario, n_pulses)
        rng = np.random.default_rng(7)
        for _ in range(50):
            point = point_from_raw(problem, rng.normal(scale=2.5,
                                                       size=problem.dim))
            again = point_from_raw(problem, raw_from_point(problem, point))
            for name in ("lam", "lam_s", "lam_d", "delta", "m_e", "p_s",
                         "p_d", "p_v"):
                a, b = getattr(point, name), getattr(again, name)
                if a is None:
                    assert b is None
                else:
                    assert b == pytest.approx(a, rel=1e-10)
            if point.budget is not None:
                for c_a, c_b in zip(point.budget.components(),
                                    again.budget.components()):
                    assert c_b == pytest.approx(c_a, rel=1e-10)

    def test_zero_vector_is_the_interior_default(self):
        problem = problem_for(Scenario.DECOY_FINITE, 5e10)
        point = point_from_raw(problem, np.zeros(problem.dim))
        # simplex weights all equal, scalars at their log-range midpoints
        assert point.p_s == pytest.approx(1 / 3, rel=1e-12)
        assert point.p_d == pytest.approx(1 / 3, rel=1e-12)
        comps = point.budget.components()
        assert all(c == pytest.approx(PHYS.eps_free / 6, rel=1e-12)
                   for c in comps)
        from pnp_bb84._kernels import DELTA_HI, DELTA_LO
        assert point.delta == pytest.approx(math.sqrt(DELTA_LO * DELTA_HI),
                                            rel=1e-12)

    def test_budget_sums_to_free_budget(self):
        problem = problem_for(Scenario.NO_DECOY_FINITE, 1e11)
        rng = np.random.default_rng(3)
        for _ in range(100):
            point = point_from_raw(problem, rng.normal(scale=3.0, size=7))
            assert sum(point.budget.components()) == pytest.approx(
                PHYS.eps_free, rel=1e-12)


class TestMaximize:
    def test_recovers_injected_concave_objective(self):
        problem = problem_for(Scenario.NO_DECOY_FINITE, 5e10)

        def objective(raw):
            return -float(np.sum((raw - 0.3) ** 2))

        result = maximize(problem, objective=objective)
        assert result.best_raw == pytest.approx(0.3 * np.ones(7), abs=1e-4)
        assert result.best_rate == pytest.approx(0.0, abs=1e-8)

    def test_seeded_determinism(self):
        a = maximize(problem_for(Scenario.DECOY_FINITE, 5e10, dist=30.0))
        b = maximize(problem_for(Scenario.DECOY_FINITE, 5e10, dist=30.0))
        assert a.best_rate == b.best_rate
        assert a.best_point == b.best_point
        assert a.evaluations == b.evaluations

    def test_result_matches_its_own_point(self):
        from pnp_bb84 import evaluate_rate
        result = maximize(problem_for(Scenario.NO_DECOY_FINITE, 5e10))
        again = evaluate_rate(result.best_point, PHYS,
                              problem_for(Scenario.NO_DECOY_FINITE,
                                          5e10).conventions)
        assert again.rate == pytest.approx(result.best_rate, rel=1e-12)

    def test_sample_count_reported_as_integer(self):
        result = maximize(problem_for(Scenario.NO_DECOY_FINITE, 5e10))
        assert result.best_point.m_e == round(result.best_point.m_e)
        assert result.best_point.m_e >= 1

    def test_warm_start_is_used(self):
        base = maximize(problem_for(Scenario.DECOY_FINITE, 5e10, dist=55.0))
        warmed = maximize(problem_for(
            Scenario.DECOY_FINITE, 5e10, dist=58.0, n_starts=2,
            warm_starts=(base.best_point,)))
        assert warmed.best_rate > 0

    def test_signal_probability_dominates_for_huge_pulse_counts(self):
        # with quasi-infinite statistics almost every pulse should be signal
        result = maximize(problem_for(Scenario.DECOY_FINITE, 1e16))
        assert result.best_point.p_s > 0.9

    def test_rate_non_decreasing_in_pulse_count(self):
        rates = [maximize(problem_for(Scenario.NO_DECOY_FINITE, na,
                                      dist=15.0)).best_rate
                 for na in (1e10, 1e11, 1e12)]
        for a, b in zip(rates, rates[1:]):
            assert b >= a * 0.98  # optimizer tolerance

    def test_no_decoy_infinite_rate_scale_at_20km(self):
        # the asymptotic no-decoy optimum at 20 km sits at a few 1e-5
        result = maximize(problem_for(Scenario.NO_DECOY_INFINITE, math.inf))
        assert 5e-6 < result.best_rate < 1e-4


class TestGridOracle:
    def test_resolution_one_is_the_midpoint(self):
        problem = problem_for(Scenario.NO_DECOY_INFINITE, math.inf)
        result = grid_oracle(problem, 1)
        from pnp_bb84._kernels import DELTA_HI, DELTA_LO
        assert result.best_point.delta == pytest.approx(
            math.sqrt(DELTA_LO * DELTA_HI), rel=1e-12)
        assert result.evaluations == 1

    def test_nested_refinement_is_monotone(self):
        problem = problem_for(Scenario.NO_DECOY_INFINITE, math.inf)
        coarse = grid_oracle(problem, 41)
        fine = grid_oracle(problem, 81)  # 2k-1 points nest the k-point grid
        assert fine.best_rate >= coarse.best_rate - 1e-15

    @pytest.mark.parametrize("dist", [10.0, 20.0, 30.0])
    def test_search_agrees_with_oracle_no_decoy(self, dist):
        problem = problem_for(Scenario.NO_DECOY_INFINITE, math.inf, dist=dist)
        searched = maximize(problem)
        gridded = grid_oracle(problem, 200)
        assert abs(searched.best_rate - gridded.best_rate) <= \
            0.02 * abs(gridded.best_rate)

    @pytest.mark.parametrize("dist", [10.0, 20.0, 30.0])
    def test_search_agrees_with_oracle_decoy(self, dist):
        problem = problem_for(Scenario.DECOY_INFINITE, math.inf, dist=dist)
        searched = maximize(problem)
        gridded = grid_oracle(problem, 56)
        assert searched.best_rate >= gridded.best_rate * 0.98

    def test_only_infinite_scenarios(self):
        with pytest.raises(ValueError):
            grid_oracle(problem_for(Scenario.NO_DECOY_FINITE, 5e10), 10)
