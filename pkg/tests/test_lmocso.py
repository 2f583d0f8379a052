import unittest
from unittest.mock import patch

import numpy as np

import lmocso
from errors import InvalidConfigError, StateError
from evo_core import Individual, Population, evaluate, init_population
from lmocso import Particle, Swarm, competition_scores, lmocso_generation, run_lmocso
from problems.zdt import ZdtProblem
from utils import make_rng


def _swarm(problem, d, seed):
    pop = init_population(problem.bounds, d, np.random.default_rng(seed))
    evaluate(pop, pop.members, problem)
    return Swarm(
        particles=[Particle(individual=m, velocity=np.zeros(problem.n)) for m in pop.members],
        fe_count=pop.fe_count,
    )


class CompetitionTests(unittest.TestCase):
    def test_scores_need_evaluated_particles(self):
        swarm = Swarm(particles=[Particle(individual=Individual(x=np.zeros(3)), velocity=np.zeros(3))])
        with self.assertRaises(StateError):
            competition_scores(swarm)

    def test_rank_dominates_crowding(self):
        problem = ZdtProblem("zdt1", 4)
        swarm = _swarm(problem, 2, 0)
        swarm.particles[0].individual.f = np.array([0.0, 0.0])
        swarm.particles[1].individual.f = np.array([1.0, 1.0])
        scores = competition_scores(swarm)
        self.assertLess(scores[0], scores[1])


class GenerationTests(unittest.TestCase):
    def setUp(self):
        self.problem = ZdtProblem("zdt1", 10)

    def test_swarm_size_and_fe_per_generation(self):
        swarm = _swarm(self.problem, 12, 1)
        nxt = lmocso_generation(swarm, 12, self.problem, np.random.default_rng(2))
        self.assertEqual(nxt.size, 12)
        self.assertEqual(nxt.fe_count, 12 + 6)

    def test_odd_swarm_leaves_one_particle_unpaired(self):
        swarm = _swarm(self.problem, 11, 1)
        nxt = lmocso_generation(swarm, 11, self.problem, np.random.default_rng(2))
        self.assertEqual(nxt.fe_count, 11 + 5)

    def test_updated_particles_stay_in_bounds(self):
        swarm = _swarm(self.problem, 12, 3)
        rng = np.random.default_rng(4)
        for _ in range(5):
            swarm = lmocso_generation(swarm, 12, self.problem, rng)
        for p in swarm.particles:
            self.assertTrue(self.problem.bounds.contains(p.individual.x))

    def test_positions_stay_in_bounds_over_a_thousand_generations(self):
        problem = ZdtProblem("zdt1", 300)
        swarm = _swarm(problem, 10, 7)
        rng = np.random.default_rng(8)
        for _ in range(1000):
            swarm = lmocso_generation(swarm, 10, problem, rng)
            for p in swarm.particles:
                self.assertTrue(problem.bounds.contains(p.individual.x))
                self.assertTrue(np.all(np.isfinite(p.velocity)))

    def test_identical_pair_loser_does_not_move_before_mutation(self):
        problem = ZdtProblem("zdt1", 6)
        x = np.full(6, 0.4)
        pop = Population(members=[Individual(x=x.copy()) for _ in range(2)])
        evaluate(pop, pop.members, problem)
        swarm = Swarm(particles=[Particle(individual=m, velocity=np.zeros(6)) for m in pop.members], fe_count=pop.fe_count)
        with patch.object(lmocso, "polynomial_mutation", side_effect=lambda ind, *args, **kwargs: ind):
            nxt = lmocso_generation(swarm, 2, problem, np.random.default_rng(0))
        for p in nxt.particles:
            np.testing.assert_array_equal(p.individual.x, x)

    def test_surviving_winners_are_untouched(self):
        swarm = _swarm(self.problem, 12, 5)
        before = {id(p): p.individual.x.copy() for p in swarm.particles}
        nxt = lmocso_generation(swarm, 12, self.problem, np.random.default_rng(6))
        for p in nxt.particles:
            if id(p) in before:
                np.testing.assert_array_equal(p.individual.x, before[id(p)])
                self.assertFalse(p.velocity.any())


class RunTests(unittest.TestCase):
    def test_budget_respected(self):
        _, trace = run_lmocso(ZdtProblem("zdt1", 10), 12, 71, np.random.default_rng(0))
        self.assertEqual(trace.final_fe, 71)

    def test_budget_below_swarm_size(self):
        with self.assertRaises(InvalidConfigError):
            run_lmocso(ZdtProblem("zdt1", 10), 12, 11, np.random.default_rng(0))

    def test_same_seed_same_trace(self):
        a = run_lmocso(ZdtProblem("zdt2", 10), 12, 120, np.random.default_rng(8))[1]
        b = run_lmocso(ZdtProblem("zdt2", 10), 12, 120, np.random.default_rng(8))[1]
        self.assertEqual(a.rows, b.rows)

    def test_zdt1_improves(self):
        _, trace = run_lmocso(ZdtProblem("zdt1", 30), 40, 6000, np.random.default_rng(3))
        self.assertLess(trace.final_igd, trace.rows[0][3])

    def test_zdt1_full_budget_converges(self):
        for seed in (1, 2):
            _, trace = run_lmocso(ZdtProblem("zdt1", 30), 100, 25_000, make_rng(seed))
            self.assertEqual(trace.final_fe, 25_000)
            self.assertLess(trace.final_igd, 0.1, f"seed {seed}")


if __name__ == "__main__":
    unittest.main()
