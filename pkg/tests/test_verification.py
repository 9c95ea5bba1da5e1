import asyncio

import numpy as np
import pytest

from transport import TransportProblem, solve_uot
from verification import (
    Check,
    ExperimentReport,
    SUITE_NAMES,
    eg_uot_oracle,
    exhaustive_two_partition,
    gd_barycenter_oracle,
    run_suite,
)
from verification.suites import (
    fusion_closed_form,
    gate_properties,
    gradient_check,
    prototype_properties,
    stability_bound,
    uot_optimality,
    uot_uniqueness,
    variance_rate,
)


class TestExperimentReport:

    def test_passes_only_when_every_check_passes(self):
        report = ExperimentReport("demo")
        report.check("first", True, 0.1, 1.0)
        assert report.passed
        report.check("second", False, 2.0, 1.0, "(too large)")
        assert not report.passed

    def test_dict_and_summary(self):
        report = ExperimentReport("demo", [Check("value", True, 1e-9, 1e-8)], seconds=0.5)
        data = report.to_dict()
        assert data["passed"] is True
        assert data["checks"][0]["tolerance"] == 1e-8
        lines = report.summary_lines()
        assert lines[0] == "=== demo: PASS (0.50s) ==="
        assert "[ok  ] value" in lines[1]


class TestOracles:

    def test_eg_oracle_agrees_with_solver(self):
        rng = np.random.default_rng(0)
        a = rng.uniform(0.1, 1.0, 3)
        b = rng.uniform(0.1, 1.0, 2)
        problem = TransportProblem(
            cost=rng.uniform(0.0, 1.0, (3, 2)), source_mass=a / a.sum(), target_mass=b / b.sum(),
            epsilon=0.05, tau_source=1.0, tau_target=1.0, gaussian_ids=(0, 1, 2),
        )
        solution = solve_uot(problem, max_iters=100000, tolerance=1e-12)
        oracle = eg_uot_oracle(problem, np.random.default_rng(1))
        assert solution.objective <= oracle + 1e-12
        assert abs(solution.objective - oracle) <= 1e-4 * abs(oracle)

    def test_exhaustive_two_partition(self):
        points = np.array([[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]])
        objective, labels = exhaustive_two_partition(points, np.ones(4))
        assert objective == pytest.approx(1.0)
        np.testing.assert_array_equal(labels, (0, 0, 1, 1))

    @pytest.mark.parametrize("rho", [0.0, 0.1, 1.0])
    def test_barycenter_oracle_reaches_minimizer(self, rho):
        rng = np.random.default_rng(58)
        for _ in range(50):
            views = int(rng.integers(1, 9))
            weights = rng.dirichlet(np.ones(views))
            targets = rng.normal(size=(views, 16))
            latent = rng.normal(size=16)
            exact = (weights @ targets + rho * latent) / (weights.sum() + rho)
            oracle = gd_barycenter_oracle(weights, targets, latent, rho)
            np.testing.assert_allclose(oracle, exact, rtol=0.0, atol=1e-12)

    def test_barycenter_oracle_needs_weight(self):
        with pytest.raises(ValueError):
            gd_barycenter_oracle(np.zeros(2), np.ones((2, 3)), np.zeros(3), 0.0)


class TestSuites:

    def test_uot_optimality(self):
        assert uot_optimality(0, problems=3).passed

    def test_uot_uniqueness(self):
        assert uot_uniqueness(0, problems=3).passed

    def test_fusion_closed_form(self):
        assert fusion_closed_form(0).passed

    def test_stability_bound(self):
        assert stability_bound(0, trials=200).passed

    def test_variance_rate(self):
        report = variance_rate(0)
        assert report.passed
        assert len(report.checks) == 11

    def test_gate_properties(self):
        assert gate_properties(0, pairs=200).passed

    def test_gradient_check(self):
        report = gradient_check(0)
        assert [c.passed for c in report.checks] == [True, True]

    def test_prototype_properties(self):
        assert prototype_properties(0).passed

    def test_run_suite_times_reports(self):
        reports = asyncio.run(run_suite("gate-properties", seed=1))
        assert [r.name for r in reports] == ["gate-properties"]
        assert reports[0].seconds >= 0.0

    def test_unknown_suite(self):
        with pytest.raises(ValueError, match="unknown suite"):
            asyncio.run(run_suite("everything"))

    def test_suite_names(self):
        assert SUITE_NAMES[-1] == "all"
        assert "leakage-ablation" in SUITE_NAMES

    @pytest.mark.slow
    def test_leakage_ablation(self):
        assert asyncio.run(run_suite("leakage-ablation"))[0].passed

    @pytest.mark.slow
    def test_all(self):
        reports = asyncio.run(run_suite("all"))
        assert len(reports) == len(SUITE_NAMES) - 1
        assert all(r.passed for r in reports)
