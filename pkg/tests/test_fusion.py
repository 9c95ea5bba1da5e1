import logging

import numpy as np
import pytest

from fusion import (
    FusionError,
    NoValidViewsError,
    ViewMismatchError,
    canonical_target,
    ema_update,
    fuse_views,
    fusion_weights,
    save_variance_table,
    stability_gap,
    variance_experiment,
)
from transport import TransportSolution
from verification import gd_barycenter_oracle


def solution(ids, support, targets):
    support = np.asarray(support, dtype=np.float64)
    return TransportSolution(
        plan=support[:, None],
        objective=0.0,
        iterations=1,
        support_mass=support,
        semantic_target=np.asarray(targets, dtype=np.float64),
        converged=True,
        gaussian_ids=tuple(ids),
    )


class TestFusionWeights:

    @pytest.mark.parametrize("support, expected", [
        ({1: 0.2, 2: 0.2}, {1: 0.5, 2: 0.5}),
        ({1: 0.3, 2: 0.1}, {1: 0.75, 2: 0.25}),
        ({1: 0.0, 2: 0.4}, {2: 1.0}),
    ])
    def test_worked_values(self, support, expected):
        weights = fusion_weights(support)
        assert set(weights) == set(expected)
        for v, w in expected.items():
            assert weights[v] == pytest.approx(w, abs=1e-9)

    def test_sum_to_one(self):
        rng = np.random.default_rng(0)
        weights = fusion_weights({v: rng.uniform(1e-6, 1.0) for v in range(8)})
        assert abs(sum(weights.values()) - 1.0) <= 1e-9
        assert all(w > 0.0 for w in weights.values())

    def test_no_support(self):
        with pytest.raises(NoValidViewsError):
            fusion_weights({0: 0.0, 1: 0.0})


class TestCanonicalTarget:

    def test_plain_mean(self):
        z = canonical_target({1: 0.5, 2: 0.5}, {1: np.array([1.0, 0.0]), 2: np.array([0.0, 1.0])}, np.zeros(2), 0.0)
        np.testing.assert_allclose(z, (0.5, 0.5))

    def test_anchor_dominates(self):
        latent = np.array([0.3, -0.4, 1.2])
        target = np.array([5.0, 5.0, 5.0])
        rho = 1e9
        z = canonical_target({0: 1.0}, {0: target}, latent, rho)
        assert np.linalg.norm(z - latent) <= np.linalg.norm(target - latent) / (1.0 + rho) + 1e-12
        np.testing.assert_allclose(z, latent, atol=1e-8)

    def test_single_view_with_anchor(self):
        z = canonical_target({0: 1.0}, {0: np.array([2.0, 0.0])}, np.zeros(2), 1.0)
        np.testing.assert_allclose(z, (1.0, 0.0))

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("rho", [0.0, 0.1, 1.0])
    def test_matches_gradient_descent(self, seed, rho):
        rng = np.random.default_rng(seed)
        views = int(rng.integers(1, 9))
        weights = fusion_weights({v: rng.uniform(0.05, 1.0) for v in range(views)})
        targets = {v: rng.standard_normal(16) for v in range(views)}
        latent = rng.standard_normal(16)
        z = canonical_target(weights, targets, latent, rho)
        oracle = gd_barycenter_oracle(
            np.array([weights[v] for v in range(views)]), np.stack([targets[v] for v in range(views)]), latent, rho,
        )
        np.testing.assert_allclose(z, oracle, atol=1e-8)

    def test_degenerate(self):
        with pytest.raises(FusionError):
            canonical_target({}, {}, np.zeros(2), 0.0)


class TestStabilityGap:

    def test_identical_inputs(self):
        targets = {0: np.array([1.0, 2.0]), 1: np.array([0.0, -1.0])}
        gap, bound = stability_gap({0: 0.4, 1: 0.6}, targets, targets, np.ones(2), np.ones(2), 0.5)
        assert gap == 0.0 and bound == 0.0

    def test_colinear_shift_is_tight(self):
        d = np.array([0.3, -0.4])
        weights = {0: 0.25, 1: 0.75}
        targets = {0: np.array([1.0, 0.0]), 1: np.array([0.0, 1.0])}
        shifted = {v: y + d for v, y in targets.items()}
        gap, bound = stability_gap(weights, targets, shifted, np.zeros(2), np.zeros(2), 1.0)
        assert gap == pytest.approx(0.25, abs=1e-12)
        assert bound == pytest.approx(0.25, abs=1e-12)

    def test_random_perturbations_stay_bounded(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            views = int(rng.integers(1, 6))
            weights = fusion_weights({v: rng.uniform(0.05, 1.0) for v in range(views)})
            targets = {v: rng.standard_normal(4) for v in range(views)}
            perturbed = {v: y + rng.normal(0.0, 0.5, 4) for v, y in targets.items()}
            latent = rng.standard_normal(4)
            rho = float(rng.choice([0.0, 0.1, 1.0]))
            gap, bound = stability_gap(weights, targets, perturbed, latent, latent + rng.normal(0.0, 0.5, 4), rho)
            assert gap <= bound + 1e-12

    def test_mismatched_views(self):
        with pytest.raises(ViewMismatchError):
            stability_gap({0: 1.0}, {0: np.zeros(2)}, {1: np.zeros(2)}, np.zeros(2), np.zeros(2), 0.0)


class TestEmaUpdate:

    def test_first_call_copies(self):
        target = np.array([1.0, 2.0])
        first = ema_update(None, target, 0.9)
        np.testing.assert_array_equal(first, target)
        assert first is not target

    def test_converges_to_fixed_target(self):
        target = np.array([1.0, -1.0])
        value = np.zeros(2)
        for k in range(1, 40):
            value = ema_update(value, target, 0.5)
            np.testing.assert_allclose(np.abs(value - target), 0.5 ** k * np.ones(2), rtol=1e-9)


class TestFuseViews:

    def test_two_views_and_unsupported(self, make_gaussian, caplog):
        scene = [
            make_gaussian(gid=0, latent=(0.0, 0.0)),
            make_gaussian(gid=1, latent=(0.5, 0.5)),
            make_gaussian(gid=2, latent=(1.0, 0.0)),
        ]
        solutions = [
            solution((0, 1), (0.3, 0.0), [[1.0, 0.0], [0.0, 1.0]]),
            solution((0,), (0.1,), [[0.0, 1.0]]),
            None,
        ]
        with caplog.at_level(logging.WARNING, logger="fusion.barycenter"):
            field = fuse_views(scene, solutions, rho=1.0)
        assert "2 Gaussians have no valid view" in caplog.text

        entry = field.entries[0]
        assert entry.valid_views == (0, 1)
        assert entry.weights[0] == pytest.approx(0.75, abs=1e-9)
        np.testing.assert_allclose(field.target(0), (0.375, 0.125), atol=1e-9)

        np.testing.assert_array_equal(field.target(1), (0.5, 0.5))
        np.testing.assert_array_equal(field.target(2), (1.0, 0.0))
        assert field.entries[2].valid_views == ()
        assert set(field.view_targets) == {0, 1}

    def test_dict_dump(self, make_gaussian):
        field = fuse_views([make_gaussian(gid=4)], [solution((4,), (0.2,), [[0.0, 1.0]])], rho=0.0)
        record = field.to_dict()
        assert record["rho"] == 0.0
        assert record["gaussians"][0]["id"] == 4
        assert record["gaussians"][0]["weights"] == {"0": pytest.approx(1.0)}

    def test_negative_rho(self, make_gaussian):
        with pytest.raises(FusionError):
            fuse_views([make_gaussian()], [], rho=-0.1)


class TestVarianceExperiment:

    def test_rate_matches_inverse_views(self):
        rows = variance_experiment((1, 2, 4, 8, 16), sigma=1.0, trials=10000, seed=0)
        for row in rows:
            assert 0.9 <= row.mse_times_v_over_sigma2 <= 1.1
            assert row.mean_deviation <= 4.0 / np.sqrt(row.trials * row.num_views)
        assert rows[2].mse == pytest.approx(0.25, rel=0.1)

    def test_noiseless(self):
        for row in variance_experiment((1, 3), sigma=0.0, trials=10):
            assert row.mse == 0.0

    def test_anchor_bias(self):
        row = variance_experiment((2,), sigma=0.0, trials=10, rho=1.0)[0]
        assert row.bias_squared == pytest.approx(0.25, abs=1e-12)
        assert row.variance == pytest.approx(0.0, abs=1e-24)

    def test_deterministic(self):
        first = variance_experiment((2,), trials=100, seed=3)
        second = variance_experiment((2,), trials=100, seed=3)
        assert first == second

    @pytest.mark.parametrize("kwargs", [dict(trials=0), dict(sigma=-1.0), dict(num_views_list=(0,))])
    def test_invalid(self, kwargs):
        with pytest.raises(FusionError):
            variance_experiment(**kwargs)

    def test_table_file(self, tmp_path):
        path = save_variance_table(variance_experiment((1, 2), trials=50), tmp_path / "variance.csv")
        lines = path.read_text().splitlines()
        assert lines[0].startswith("num_views,trials,sigma,mse")
        assert len(lines) == 3
