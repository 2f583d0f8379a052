"""Competitive swarm baseline for large-scale multi-objective problems (LMOCSO).

Particles meet in random pairs. The better-scored particle (lower non-dominated rank,
then larger crowding distance) passes through unchanged; the loser learns from it
with a two-phase velocity/position update, gets polynomially mutated and is
re-evaluated. The swarm and the updated losers then compete in environmental
selection for the d places of the next swarm.

The scoring function stands in for the density estimator of the published method and
lives in `competition_scores` so it can be swapped in isolation.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from errors import InvalidConfigError, StateError
from evo_core import (
    DEFAULT_ETA_M,
    Individual,
    Population,
    assign_rank_and_crowding,
    environmental_selection,
    evaluate,
    init_population,
    polynomial_mutation,
)
from metrics import RunTrace, TraceRecorder, default_recorder
from problems import Problem

logger = logging.getLogger(__name__)


@dataclass
class Particle:
    individual: Individual
    velocity: np.ndarray


@dataclass
class Swarm:
    particles: List[Particle]
    fe_count: int = 0

    @property
    def size(self) -> int:
        return len(self.particles)

    def as_population(self) -> Population:
        return Population(members=[p.individual for p in self.particles], fe_count=self.fe_count)


def competition_scores(swarm: Swarm) -> List[Tuple[int, float]]:
    """(rank, -crowding) per particle; smaller compares better."""
    for i, particle in enumerate(swarm.particles):
        if not particle.individual.evaluated:
            raise StateError(f"particle {i} has not been evaluated")
    pop = swarm.as_population()
    assign_rank_and_crowding(pop)
    return [(int(m.rank), -float(m.crowding)) for m in pop.members]


def lmocso_generation(
    swarm: Swarm,
    d: int,
    problem: Problem,
    rng: np.random.Generator,
    *,
    fe_budget: Optional[int] = None,
    eta_m: float = DEFAULT_ETA_M,
    eval_workers: int = 1,
) -> Swarm:
    bounds = problem.bounds
    scores = competition_scores(swarm)
    n = bounds.n
    pm = 1.0 / n
    order = rng.permutation(swarm.size)

    losers: List[Particle] = []
    for p in range(0, swarm.size - 1, 2):
        i, j = int(order[p]), int(order[p + 1])
        if scores[j] < scores[i]:
            i, j = j, i
        winner, loser = swarm.particles[i], swarm.particles[j]
        r1 = rng.random(n)
        r2 = rng.random(n)
        vel = loser.velocity
        new_vel = r1 * vel + r2 * (winner.individual.x - loser.individual.x)
        x = bounds.clip(loser.individual.x + new_vel + r1 * (new_vel - vel))
        mutated = polynomial_mutation(Individual(x=x), eta_m, pm, bounds, rng)
        losers.append(Particle(individual=mutated, velocity=new_vel))

    pop = swarm.as_population()
    evaluated = evaluate(pop, [p.individual for p in losers], problem, fe_budget=fe_budget, max_workers=eval_workers)
    if len(evaluated) < len(losers):
        logger.info("FE budget reached mid-generation: evaluated %s of %s losers", len(evaluated), len(losers))
    updated = losers[: len(evaluated)]

    pool = swarm.particles + updated
    merged = Population(members=[p.individual for p in pool], fe_count=pop.fe_count)
    survivors = environmental_selection(merged, d)
    by_id = {id(p.individual): p for p in pool}
    return Swarm(particles=[by_id[id(m)] for m in survivors.members], fe_count=survivors.fe_count)


def run_lmocso(
    problem: Problem,
    d: int,
    fe_budget: int,
    rng: np.random.Generator,
    recorder: Optional[TraceRecorder] = None,
    *,
    eta_m: float = DEFAULT_ETA_M,
    eval_workers: int = 1,
) -> Tuple[List[Individual], RunTrace]:
    if fe_budget < d:
        raise InvalidConfigError(f"fe_budget={fe_budget} is below d={d}", field="fe_budget")
    if recorder is None:
        recorder = default_recorder(problem)
    pop = init_population(problem.bounds, d, rng)
    evaluate(pop, pop.members, problem, fe_budget=fe_budget, max_workers=eval_workers)
    swarm = Swarm(
        particles=[Particle(individual=m, velocity=np.zeros(problem.n)) for m in pop.members],
        fe_count=pop.fe_count,
    )
    generation = 0
    recorder.observe(generation, swarm.as_population())
    while swarm.fe_count < fe_budget:
        swarm = lmocso_generation(swarm, d, problem, rng, fe_budget=fe_budget, eta_m=eta_m, eval_workers=eval_workers)
        generation += 1
        recorder.observe(generation, swarm.as_population())
    final_pop = swarm.as_population()
    recorder.observe(generation, final_pop, final=True)
    trace = recorder.finish(final_pop)
    logger.debug("LMOCSO run finished after %s generations, fe=%s", generation, swarm.fe_count)
    return trace.final_front, trace
