import logging

import numpy as np
import pytest

from prototypes import Prototype, extract_prototypes
from scene import Footprint, RenderOutput, render_view
from transport import (
    CostWeights,
    NoVisibleGaussiansError,
    TransportProblem,
    TransportProblemError,
    ZeroFootprintError,
    build_transport_problem,
    cost_matrix,
    gaussian_appearance_descriptor,
    load_problem,
    load_problems,
    load_solutions,
    save_transport,
    solve_uot,
    source_masses,
    topk_mask,
    uot_gradient,
    uot_objective,
)


def manual_render(visibility, footprints=None, size=101):
    """RenderOutput with hand-chosen visibility and footprints"""
    if footprints is None:
        footprints = {
            gid: Footprint(rows=np.array([50]), cols=np.array([50]), weights=np.array([0.5]), raw=np.array([0.5]))
            for gid in visibility
        }
    return RenderOutput(
        image=np.zeros((size, size, 3)),
        footprints=footprints,
        visibility=dict(visibility),
        visible_ids=tuple(sorted(visibility)),
        projections={},
        depth_order=tuple(sorted(visibility)),
    )


def prototype(position=(50.0, 50.0), semantic=(1.0, 0.0), appearance=(1.0, 0.0, 0.0), mass=1.0):
    return Prototype(
        position=np.array(position, dtype=np.float64),
        semantic=np.array(semantic, dtype=np.float64),
        mass=mass,
        appearance=np.array(appearance, dtype=np.float64),
        pixel_count=1,
    )


def random_problem(seed, n=4, m=3, epsilon=0.05, tau=1.0, semantics=True):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.1, 1.0, n)
    b = rng.uniform(0.1, 1.0, m)
    return TransportProblem(
        cost=rng.uniform(0.0, 1.0, (n, m)),
        source_mass=a / a.sum(),
        target_mass=b / b.sum(),
        epsilon=epsilon,
        tau_source=tau,
        tau_target=tau,
        gaussian_ids=tuple(range(n)),
        target_semantics=rng.standard_normal((m, 3)) if semantics else None,
    )


STRICT = dict(max_iters=100000, tolerance=1e-12)


class TestSourceMasses:

    def test_symmetric(self, make_gaussian):
        scene = [make_gaussian(gid=1), make_gaussian(gid=2)]
        ids, a = source_masses(manual_render({1: 1.0, 2: 1.0}), scene)
        assert ids == (1, 2)
        np.testing.assert_allclose(a, (0.5, 0.5))

    def test_visibility_times_opacity(self, make_gaussian):
        scene = [make_gaussian(gid=1, opacity=0.8), make_gaussian(gid=2, opacity=0.4)]
        _, a = source_masses(manual_render({1: 1.0, 2: 0.5}), scene)
        np.testing.assert_allclose(a, (0.8, 0.2), atol=1e-12)

    def test_single_visible(self, make_gaussian):
        scene = [make_gaussian(gid=0), make_gaussian(gid=5)]
        ids, a = source_masses(manual_render({5: 0.3}), scene)
        assert ids == (5,)
        np.testing.assert_allclose(a, (1.0,))

    def test_nothing_visible(self, make_gaussian):
        with pytest.raises(NoVisibleGaussiansError):
            source_masses(manual_render({}), [make_gaussian()])


class TestAppearanceDescriptor:

    def test_weighted_mean(self):
        footprint = Footprint(
            rows=np.array([0, 0]), cols=np.array([0, 1]), weights=np.array([0.75, 0.25]), raw=np.array([1.0, 1.0]),
        )
        render = manual_render({0: 1.0}, {0: footprint}, size=2)
        features = np.zeros((2, 2, 2))
        features[0, 0] = (1.0, 0.0)
        features[0, 1] = (0.0, 1.0)
        expected = np.array([0.75, 0.25]) / np.hypot(0.75, 0.25)
        np.testing.assert_allclose(gaussian_appearance_descriptor(render, features, 0), expected, rtol=1e-9)

    def test_constant_field(self):
        render = manual_render({0: 1.0})
        v = np.array([1.0, 2.0, 2.0])
        features = np.broadcast_to(v, (101, 101, 3))
        np.testing.assert_allclose(gaussian_appearance_descriptor(render, features, 0), v / 3.0, atol=1e-9)

    def test_missing_footprint(self):
        with pytest.raises(ZeroFootprintError):
            gaussian_appearance_descriptor(manual_render({0: 1.0}), np.ones((101, 101, 3)), 7)


class TestCostMatrix:

    def test_perfect_match(self, make_gaussian, make_camera):
        scene = [make_gaussian(latent=(1.0, 0.0))]
        features = np.broadcast_to(np.array([1.0, 0.0, 0.0]), (101, 101, 3))
        cost = cost_matrix(scene, make_camera(), manual_render({0: 1.0}), [prototype()], features, CostWeights())
        assert cost.shape == (1, 1)
        assert cost[0, 0] < 1e-6

    def test_orthogonal_semantics(self, make_gaussian, make_camera):
        scene = [make_gaussian(latent=(1.0, 0.0))]
        weights = CostWeights(lambda_geo=0.0, lambda_sem=2.0, lambda_app=0.0)
        cost = cost_matrix(
            scene, make_camera(), manual_render({0: 1.0}), [prototype(semantic=(0.0, 1.0))], None, weights,
        )
        assert abs(cost[0, 0] - 2.0) <= 1e-9

    def test_geometry_in_diagonal_units(self, make_gaussian, make_camera):
        camera = make_camera()
        offset = 0.5 * camera.diagonal
        weights = CostWeights(lambda_geo=1.0, lambda_sem=0.0, lambda_app=0.0)
        cost = cost_matrix(
            [make_gaussian()], camera, manual_render({0: 1.0}), [prototype(position=(50.0 + offset, 50.0))],
            None, weights,
        )
        assert cost[0, 0] == pytest.approx(0.25, abs=1e-12)

    def test_squared_l2_appearance(self, make_gaussian, make_camera):
        features = np.broadcast_to(np.array([0.0, 1.0, 0.0]), (101, 101, 3))
        weights = CostWeights(lambda_geo=0.0, lambda_sem=0.0, lambda_app=1.0, appearance_metric="squared_l2")
        cost = cost_matrix(
            [make_gaussian()], make_camera(), manual_render({0: 1.0}), [prototype(appearance=(1.0, 0.0, 0.0))],
            features, weights,
        )
        assert cost[0, 0] == pytest.approx(2.0, abs=1e-9)

    def test_no_prototypes(self, make_gaussian, make_camera):
        with pytest.raises(TransportProblemError):
            cost_matrix([make_gaussian()], make_camera(), manual_render({0: 1.0}), [], None, CostWeights())

    @pytest.mark.parametrize("kwargs", [
        dict(lambda_geo=0.0, lambda_sem=0.0, lambda_app=0.0),
        dict(lambda_geo=-1.0),
        dict(appearance_metric="hamming"),
        dict(delta=0.0),
    ])
    def test_invalid_weights(self, kwargs):
        with pytest.raises(TransportProblemError):
            CostWeights(**kwargs)


class TestTransportProblem:

    def test_build_drops_zero_masses(self):
        problem = TransportProblem.build(
            cost=np.arange(9.0).reshape(3, 3),
            source_mass=(0.5, 0.0, 0.5),
            target_mass=(0.0, 0.4, 0.6),
            epsilon=0.05,
            tau_source=1.0,
            tau_target=1.0,
            gaussian_ids=(10, 11, 12),
        )
        assert problem.shape == (2, 2)
        assert problem.gaussian_ids == (10, 12)
        assert problem.prototype_index == (1, 2)
        np.testing.assert_array_equal(problem.cost, [[1.0, 2.0], [7.0, 8.0]])

    @pytest.mark.parametrize("override", [
        {"cost": [[-1.0]]},
        {"source_mass": [0.0]},
        {"target_mass": [1.0, 1.0]},
        {"epsilon": 0.0},
        {"tau_target": -1.0},
        {"gaussian_ids": (0, 1)},
    ])
    def test_invalid(self, override):
        fields = dict(
            cost=[[0.5]], source_mass=[1.0], target_mass=[1.0], epsilon=0.05, tau_source=1.0, tau_target=1.0,
            gaussian_ids=(0,),
        )
        fields.update(override)
        with pytest.raises(TransportProblemError):
            TransportProblem(**fields)

    def test_toy_view(self, toy, toy_evidence):
        camera, evidence = toy.cameras[0], toy_evidence[0]
        render = render_view(toy.scene, camera)
        prototypes = extract_prototypes(evidence, count=4)
        problem = build_transport_problem(
            toy.scene, camera, render, prototypes, evidence.appearance_features, CostWeights(),
        )
        assert problem.shape == (len(render.visible_ids), 4)
        assert abs(problem.source_mass.sum() - 1.0) <= 1e-9
        assert problem.target_semantics.shape == (4, prototypes[0].semantic.size)


class TestObjective:

    def test_independent_coupling_is_free(self):
        a = np.array([0.2, 0.8])
        b = np.array([0.5, 0.25, 0.25])
        problem = TransportProblem(
            cost=np.zeros((2, 3)), source_mass=a, target_mass=b, epsilon=0.1, tau_source=2.0, tau_target=3.0,
            gaussian_ids=(0, 1),
        )
        assert abs(uot_objective(np.outer(a, b), problem)) <= 1e-12

    def test_zero_plan(self):
        problem = random_problem(0, epsilon=0.2, tau=0.5)
        a, b = problem.source_mass, problem.target_mass
        expected = 0.2 * a.sum() * b.sum() + 0.5 * a.sum() + 0.5 * b.sum()
        assert uot_objective(np.zeros(problem.shape), problem) == pytest.approx(expected, rel=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(TransportProblemError):
            uot_objective(np.zeros((2, 2)), random_problem(0))


class TestSolveUot:

    @pytest.mark.parametrize("epsilon, tau", [(0.01, 0.5), (0.5, 5.0)])
    def test_scalar_problem(self, epsilon, tau):
        problem = TransportProblem(
            cost=[[0.0]], source_mass=[1.0], target_mass=[1.0], epsilon=epsilon, tau_source=tau, tau_target=tau,
            gaussian_ids=(0,),
        )
        solution = solve_uot(problem)
        np.testing.assert_allclose(solution.plan, [[1.0]])
        assert abs(solution.objective) <= 1e-12
        assert solution.converged

    @pytest.mark.parametrize("seed", range(5))
    def test_stationary_at_convergence(self, seed):
        problem = random_problem(seed, n=5, m=3)
        solution = solve_uot(problem, **STRICT)
        assert solution.converged
        assert np.abs(uot_gradient(solution.plan, problem)).max() < 1e-6

    @pytest.mark.parametrize("seed", range(5))
    def test_perturbed_plans_are_worse(self, seed):
        problem = random_problem(seed, n=4, m=4, epsilon=0.2)
        solution = solve_uot(problem, **STRICT)
        rng = np.random.default_rng(100 + seed)
        for _ in range(20):
            candidate = solution.plan * rng.uniform(0.5, 1.5, problem.shape)
            assert uot_objective(candidate, problem) >= solution.objective - 1e-9

    def test_unique_from_any_start(self):
        problem = random_problem(3, n=6, m=4)
        rng = np.random.default_rng(7)
        first = solve_uot(problem, **STRICT)
        second = solve_uot(problem, init=(rng.normal(0.0, 2.0, 6), rng.normal(0.0, 2.0, 4)), **STRICT)
        assert np.abs(first.plan - second.plan).max() < 1e-6

    def test_mass_bookkeeping(self):
        problem = random_problem(4, n=6, m=5)
        solution = solve_uot(problem)
        np.testing.assert_allclose(solution.support_mass, solution.plan.sum(axis=1), atol=1e-12 * 5)
        limit = np.linalg.norm(problem.target_semantics, axis=1).max()
        assert np.all(np.linalg.norm(solution.semantic_target, axis=1) <= limit + 1e-9)
        assert solution.gaussian_ids == problem.gaussian_ids

    def test_without_semantics(self):
        solution = solve_uot(random_problem(1, semantics=False))
        assert solution.semantic_target.shape == (4, 0)

    def test_not_converged_is_flagged(self, caplog):
        with caplog.at_level(logging.WARNING, logger="transport.solver"):
            solution = solve_uot(random_problem(2), max_iters=1)
        assert not solution.converged
        assert solution.iterations == 1
        assert "did not converge" in caplog.text

    def test_warm_start_converges_faster(self):
        problem = random_problem(5, n=6, m=4)
        cold = solve_uot(problem, max_iters=5000, tolerance=1e-10)
        warm = solve_uot(problem, max_iters=5000, tolerance=1e-10, init=(cold.log_u, cold.log_v))
        assert warm.iterations < cold.iterations

    @pytest.mark.parametrize("kwargs", [dict(max_iters=0), dict(top_k=0), dict(init=(np.zeros(2), np.zeros(3)))])
    def test_invalid_arguments(self, kwargs):
        with pytest.raises(TransportProblemError):
            solve_uot(random_problem(0), **kwargs)


class TestTopK:

    def test_mask_keeps_cheapest_rows(self):
        cost = np.array([[0.3, 0.1], [0.1, 0.1], [0.2, 0.9]])
        mask = topk_mask(cost, 2)
        np.testing.assert_array_equal(mask, [[False, True], [True, True], [True, False]])

    def test_large_k_is_dense(self):
        assert topk_mask(np.ones((3, 2)), 5).all()

    def test_plan_vanishes_off_support(self):
        problem = random_problem(6, n=5, m=2)
        solution = solve_uot(problem, top_k=1)
        mask = topk_mask(problem.cost, 1)
        assert np.all(solution.plan[~mask] == 0.0)
        assert np.all(np.isfinite(solution.semantic_target))
        unused = ~mask.any(axis=1)
        assert np.all(solution.support_mass[unused] == 0.0)


class TestTransportFiles:

    def test_round_trip_with_skipped_view(self, tmp_path):
        problem = random_problem(0)
        solution = solve_uot(problem)
        path = save_transport([problem, None], [solution, None], tmp_path / "transport.json")

        problems = load_problems(path)
        assert problems[1] is None
        np.testing.assert_array_equal(problems[0].cost, problem.cost)
        np.testing.assert_array_equal(problems[0].target_semantics, problem.target_semantics)

        solutions = load_solutions(path)
        assert solutions[1] is None
        np.testing.assert_array_equal(solutions[0].plan, solution.plan)
        assert solutions[0].converged == solution.converged

        assert load_problem(path).gaussian_ids == problem.gaussian_ids

    def test_single_problem_file(self, tmp_path):
        path = tmp_path / "problem.json"
        path.write_text('{"cost": [[0.0]], "source_mass": [1.0], "target_mass": [1.0]}')
        problem = load_problem(path)
        assert problem.epsilon == 0.05
        assert problem.gaussian_ids == (0,)

    def test_missing_key(self, tmp_path):
        path = tmp_path / "problem.json"
        path.write_text('{"cost": [[0.0]], "source_mass": [1.0]}')
        with pytest.raises(TransportProblemError):
            load_problem(path)

    def test_not_a_dump(self, tmp_path):
        path = tmp_path / "transport.json"
        path.write_text("[1, 2]")
        with pytest.raises(TransportProblemError):
            load_problems(path)
