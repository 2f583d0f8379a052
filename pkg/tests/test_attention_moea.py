import unittest
from unittest.mock import patch

import numpy as np

import attention_moea
from attention_moea import (
    AttentionParams,
    QuerySet,
    attention_offspring,
    attention_vector,
    build_key_matrix,
    compute_queries,
    optimize_queries,
    query_box,
    reconstruct_offspring,
    run_attention_moea,
    scaled_dot_attention,
    value_individual,
    variance_vector,
)
from errors import InvalidArgumentError, InvalidConfigError
from evo_core import Bounds, Individual, Population, evaluate, init_population, nondominated_fronts
from problems.zdt import ZdtProblem
from utils import make_rng


def _evaluated_pop(problem, d, seed):
    pop = init_population(problem.bounds, d, np.random.default_rng(seed))
    evaluate(pop, pop.members, problem)
    return pop


class KeyMatrixTests(unittest.TestCase):
    def test_groups_are_one_hot_and_balanced(self):
        variance = np.random.default_rng(0).random(23)
        key = build_key_matrix(variance, 5)
        self.assertEqual(key.assign.shape, (23, 5))
        np.testing.assert_array_equal(key.assign.sum(axis=1), np.ones(23))
        sizes = key.group_sizes()
        self.assertLessEqual(sizes.max() - sizes.min(), 1)

    def test_groups_ordered_by_variance(self):
        variance = np.array([5.0, 1.0, 4.0, 2.0, 3.0, 0.5])
        key = build_key_matrix(variance, 3)
        np.testing.assert_array_equal(key.groups, [2, 0, 2, 1, 1, 0])

    def test_k_out_of_range(self):
        with self.assertRaises(InvalidConfigError):
            build_key_matrix(np.ones(4), 5)
        with self.assertRaises(InvalidConfigError):
            build_key_matrix(np.ones(4), 0)

    def test_k_equals_n_and_k_equals_one(self):
        np.testing.assert_array_equal(build_key_matrix(np.arange(4.0), 4).assign, np.eye(4))
        np.testing.assert_array_equal(build_key_matrix(np.arange(4.0), 1).assign, np.ones((4, 1)))


class VarianceTests(unittest.TestCase):
    def test_matches_population_variance(self):
        X = np.random.default_rng(2).random((15, 8))
        pop = Population(members=[Individual(x=row) for row in X])
        np.testing.assert_allclose(variance_vector(pop), X.var(axis=0), atol=1e-15)

    def test_identical_members_have_zero_variance(self):
        pop = Population(members=[Individual(x=np.full(5, 0.4)) for _ in range(6)])
        np.testing.assert_array_equal(variance_vector(pop), np.zeros(5))

    def test_single_member_rejected(self):
        with self.assertRaises(InvalidArgumentError):
            variance_vector(Population(members=[Individual(x=np.zeros(3))]))


class QueryTests(unittest.TestCase):
    def setUp(self):
        self.problem = ZdtProblem("zdt1", 12)
        self.pop = _evaluated_pop(self.problem, 20, 1)

    def test_value_individual_is_on_first_front(self):
        v = value_individual(self.pop)
        front0 = nondominated_fronts(self.pop.objectives())[0]
        self.assertIn(id(v), {id(self.pop.members[i]) for i in front0})
        self.assertTrue(np.isinf(v.crowding))

    def test_value_individual_infinite_tie_prefers_smaller_first_objective(self):
        F = [[0.9, 0.1], [0.1, 0.9], [0.5, 0.5]]
        pop = Population(members=[Individual(x=np.zeros(2), f=np.array(f)) for f in F])
        self.assertIs(value_individual(pop), pop.members[1])

    def test_value_individual_own_query_is_ones(self):
        key = build_key_matrix(variance_vector(self.pop), 4)
        v = value_individual(self.pop)
        Q = compute_queries([v], v, key, 1e-12)
        np.testing.assert_allclose(Q.queries, np.ones((1, 4)))

    def test_zero_projection_falls_back_to_one(self):
        key = build_key_matrix(np.arange(4.0), 2)
        v = Individual(x=np.array([0.0, 0.0, 0.5, 0.5]))
        base = [Individual(x=np.array([0.3, 0.3, 1.0, 1.0]))]
        Q = compute_queries(base, v, key, 1e-12)
        np.testing.assert_allclose(Q.queries, [[1.0, 2.0]])

    def test_query_box_pads_flat_components(self):
        box = query_box(np.array([[1.0, 0.0], [1.0, 2.0]]))
        np.testing.assert_allclose(box.lower, [0.9, -0.2])
        np.testing.assert_allclose(box.upper, [1.1, 2.2])

    def test_optimize_queries_keeps_shape_and_is_seeded(self):
        Q = QuerySet(queries=np.random.default_rng(0).random((7, 3)) + 0.5, base=[])
        a = optimize_queries(Q, np.random.default_rng(9))
        b = optimize_queries(Q, np.random.default_rng(9))
        self.assertEqual(a.queries.shape, (7, 3))
        np.testing.assert_array_equal(a.queries, b.queries)

    def test_optimize_queries_without_variation_is_identity(self):
        Q = QuerySet(queries=np.random.default_rng(3).random((6, 4)) + 0.5, base=[])
        out = optimize_queries(Q, np.random.default_rng(0), pm=0.0, crossover=False)
        np.testing.assert_array_equal(out.queries, Q.queries)

    def test_single_query_is_mutated_only(self):
        Q = QuerySet(queries=np.array([[1.0, 2.0, 3.0]]), base=[])
        out = optimize_queries(Q, np.random.default_rng(0), pm=1.0)
        self.assertEqual(out.queries.shape, (1, 3))
        box = query_box(Q.queries)
        self.assertTrue(box.contains(out.queries[0]))
        self.assertFalse(np.array_equal(out.queries, Q.queries))

    def test_attention_vector_by_group(self):
        key = build_key_matrix(np.array([0.0, 1.0, 2.0, 3.0]), 2)
        np.testing.assert_array_equal(attention_vector(np.array([2.0, 0.5]), key), [2.0, 2.0, 0.5, 0.5])

    def test_reconstruct_offspring_by_hand(self):
        v = Individual(x=np.array([0.3, 0.4, 0.8, 0.6]))
        child = reconstruct_offspring(np.array([2.0, 2.0, 0.5, 0.5]), v, Bounds.box(4, 0.0, 1.0))
        np.testing.assert_allclose(child.x, [0.6, 0.8, 0.4, 0.3], atol=1e-15)

    def test_zero_attention_clamps_to_lower_bound(self):
        v = Individual(x=np.array([0.3, 0.4, 0.8]))
        bounds = Bounds(np.array([0.1, 0.2, 0.0]), np.ones(3))
        child = reconstruct_offspring(np.zeros(3), v, bounds)
        np.testing.assert_array_equal(child.x, bounds.lower)

    def test_attention_vector_length_checked(self):
        key = build_key_matrix(np.arange(6.0), 3)
        with self.assertRaises(InvalidArgumentError):
            attention_vector(np.ones(2), key)

    def test_all_ones_query_reconstructs_value_individual(self):
        key = build_key_matrix(np.random.default_rng(1).random(12), 5)
        v = Individual(x=np.random.default_rng(2).random(12))
        child = reconstruct_offspring(attention_vector(np.ones(5), key), v, Bounds.box(12, 0.0, 1.0))
        np.testing.assert_array_equal(child.x, v.x)


class GenerationTests(unittest.TestCase):
    def setUp(self):
        self.problem = ZdtProblem("zdt1", 12)

    def test_identity_queries_copy_the_value_individual(self):
        pop = _evaluated_pop(self.problem, 16, 3)
        params = AttentionParams(k=4, g=6, d=16, fe_budget=400)

        def ones(Q, rng, **kwargs):
            return QuerySet(queries=np.ones_like(Q.queries), base=Q.base)

        v = value_individual(pop)
        with patch.object(attention_moea, "optimize_queries", side_effect=ones):
            children = attention_offspring(pop, params, self.problem.bounds, np.random.default_rng(0))
        self.assertEqual(len(children), 6)
        for child in children:
            np.testing.assert_array_equal(child.x, v.x)

    def test_hybrid_generation_spends_d_evaluations(self):
        params = AttentionParams(k=4, g=5, d=12, fe_budget=12 + 4 * 12)
        _, trace = run_attention_moea(self.problem, params, np.random.default_rng(1))
        self.assertEqual([row[1] for row in trace.rows], [12, 24, 36, 48, 60])

    def test_pure_attention_spends_g_evaluations(self):
        params = AttentionParams(k=4, g=5, d=12, fe_budget=12 + 3 * 5, pure_attention=True)
        _, trace = run_attention_moea(self.problem, params, np.random.default_rng(1))
        self.assertEqual([row[1] for row in trace.rows], [12, 17, 22, 27])

    def test_budget_never_exceeded(self):
        params = AttentionParams(k=3, g=4, d=10, fe_budget=37)
        _, trace = run_attention_moea(self.problem, params, np.random.default_rng(5))
        self.assertEqual(trace.final_fe, 37)

    def test_budget_equal_to_population_runs_no_generations(self):
        params = AttentionParams(k=3, g=4, d=10, fe_budget=10)
        _, trace = run_attention_moea(self.problem, params, np.random.default_rng(5))
        self.assertEqual(trace.rows[0][:2], (0, 10))
        self.assertEqual(len(trace.rows), 1)

    def test_same_seed_same_trace(self):
        params = AttentionParams(k=4, g=6, d=14, fe_budget=200)
        front_a, trace_a = run_attention_moea(self.problem, params, np.random.default_rng(7))
        front_b, trace_b = run_attention_moea(self.problem, params, np.random.default_rng(7))
        self.assertEqual(trace_a.rows, trace_b.rows)
        np.testing.assert_array_equal(
            np.vstack([ind.x for ind in front_a]),
            np.vstack([ind.x for ind in front_b]),
        )

    def test_params_checked_against_dimension(self):
        params = AttentionParams(k=13, g=4, d=10, fe_budget=100)
        with self.assertRaises(InvalidConfigError):
            run_attention_moea(self.problem, params, np.random.default_rng(0))

    def test_zdt1_improves(self):
        params = AttentionParams(k=5, g=10, d=40, fe_budget=6000)
        _, trace = run_attention_moea(ZdtProblem("zdt1", 30), params, np.random.default_rng(3))
        self.assertGreater(trace.final_hv, trace.rows[0][2])
        self.assertLess(trace.final_igd, trace.rows[0][3])

    def test_zdt1_full_budget_converges(self):
        params = AttentionParams(k=5, g=10, d=100, fe_budget=25_000)
        for seed in (1, 2):
            _, trace = run_attention_moea(ZdtProblem("zdt1", 30), params, make_rng(seed))
            self.assertEqual(trace.final_fe, 25_000)
            self.assertLess(trace.final_igd, 0.05, f"seed {seed}")


class ScaledDotAttentionTests(unittest.TestCase):
    def test_equal_scores_average_values(self):
        out = scaled_dot_attention(np.ones(2), [np.ones(2), np.ones(2)], [np.array([0.0, 2.0]), np.array([2.0, 0.0])])
        np.testing.assert_allclose(out, [1.0, 1.0])

    def test_dominant_key_selects_its_value(self):
        out = scaled_dot_attention(np.array([50.0]), [np.array([1.0]), np.array([-1.0])], [np.array([3.0]), np.array([-3.0])])
        np.testing.assert_allclose(out, [3.0], atol=1e-9)

    def test_single_pair_returns_its_value(self):
        out = scaled_dot_attention(np.array([0.3, -2.0]), [np.array([5.0, 1.0])], [np.array([4.0, 7.0, -1.0])])
        np.testing.assert_allclose(out, [4.0, 7.0, -1.0], atol=1e-12)

    def test_sharp_scores_pick_the_matching_value(self):
        out = scaled_dot_attention(
            np.array([1.0, 0.0]),
            [np.array([10.0, 0.0]), np.array([0.0, 10.0])],
            [np.array([1.0, 0.0]), np.array([0.0, 1.0])],
        )
        np.testing.assert_allclose(out, [1.0, 0.0], atol=1e-4)

    def test_weights_form_a_distribution(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            m = int(rng.integers(1, 8))
            keys = list(rng.normal(scale=5.0, size=(m, 3)))
            # Unit values expose the softmax weights directly.
            weights = scaled_dot_attention(rng.normal(size=3), keys, list(np.eye(m)))
            self.assertTrue(np.all(weights >= 0.0))
            self.assertAlmostEqual(float(weights.sum()), 1.0, delta=1e-12)

    def test_ragged_keys_or_values_rejected(self):
        with self.assertRaises(InvalidArgumentError):
            scaled_dot_attention(np.ones(2), [np.ones(2), np.ones(3)], [np.ones(2), np.ones(2)])
        with self.assertRaises(InvalidArgumentError):
            scaled_dot_attention(np.ones(2), [np.ones(2), np.ones(2)], [np.ones(2), np.ones(4)])
        with self.assertRaises(InvalidArgumentError):
            scaled_dot_attention(np.ones(2), [np.ones(3)], [np.ones(2)])

    def test_mismatched_inputs(self):
        with self.assertRaises(InvalidArgumentError):
            scaled_dot_attention(np.ones(2), [], [])
        with self.assertRaises(InvalidArgumentError):
            scaled_dot_attention(np.ones(2), [np.ones(2)], [np.ones(2), np.ones(2)])


if __name__ == "__main__":
    unittest.main()
