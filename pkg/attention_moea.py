"""Attention-guided large-scale multi-objective optimizer.

Each generation runs three stages:

  A. Key matrix: per-variable variance across the population, variables sorted by
     variance and split into k contiguous groups (one-hot n x k assignment).
  B. Queries: g sampled members and the value individual (largest crowding distance
     on the first front) are projected through the key matrix; each query is the
     per-group ratio of a member's projection to the value individual's.
  C. Evolution: queries are varied in query space, expanded back to n dimensions
     through the key transpose (the attention vector), and multiplied into the value
     individual to produce offspring, which compete in environmental selection.

The remaining d - g offspring come from ordinary tournament/SBX/mutation.

RNG draw order per generation: base sample, query variation, conventional offspring.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import softmax

from errors import InvalidArgumentError, InvalidConfigError
from evo_core import (
    DEFAULT_ETA_C,
    DEFAULT_ETA_M,
    Bounds,
    Individual,
    Population,
    assign_rank_and_crowding,
    environmental_selection,
    evaluate,
    init_population,
    polynomial_mutation,
    sbx_crossover,
    variation_offspring,
)
from metrics import RunTrace, TraceRecorder, default_recorder
from problems import Problem

logger = logging.getLogger(__name__)

QUERY_BOX_PADDING = 0.1


# =============================================================================
# Reference primitive
# =============================================================================

def scaled_dot_attention(query: np.ndarray, keys: Sequence[np.ndarray], values: Sequence[np.ndarray]) -> np.ndarray:
    """Dot-product scores, softmax weights, weighted sum of values."""
    if len(keys) == 0:
        raise InvalidArgumentError("attention needs at least one key")
    if len(keys) != len(values):
        raise InvalidArgumentError(f"{len(keys)} keys but {len(values)} values")
    q = np.asarray(query, dtype=np.float64)
    if q.ndim != 1:
        raise InvalidArgumentError("query must be a vector")
    key_rows = [np.asarray(k, dtype=np.float64) for k in keys]
    value_rows = [np.asarray(v, dtype=np.float64) for v in values]
    for i, row in enumerate(key_rows):
        if row.shape != q.shape:
            raise InvalidArgumentError(f"key {i} has shape {row.shape}, query has {q.shape}")
    if any(row.ndim != 1 or row.shape != value_rows[0].shape for row in value_rows):
        raise InvalidArgumentError("values must be vectors of one common length")
    K = np.vstack(key_rows)
    V = np.vstack(value_rows)
    weights = softmax(K @ q)
    return weights @ V


# =============================================================================
# Types
# =============================================================================

class AttentionParams(BaseModel):
    model_config = ConfigDict(extra="forbid")

    k: int = Field(5, ge=1, description="Query dimension (number of variable groups)")
    g: int = Field(10, ge=1, description="Members sampled as query bases per generation")
    d: int = Field(100, ge=2)
    fe_budget: int = Field(50_000, ge=2)
    epsilon: float = Field(1e-12, gt=0)
    eta_c: float = Field(DEFAULT_ETA_C, gt=0)
    eta_m: float = Field(DEFAULT_ETA_M, gt=0)
    pure_attention: bool = False
    query_generations: int = Field(1, ge=1)

    def check_against(self, n: int) -> None:
        if self.k > n:
            raise InvalidConfigError(f"k={self.k} exceeds decision dimension n={n}", field="k")
        if self.g > self.d:
            raise InvalidConfigError(f"g={self.g} exceeds population size d={self.d}", field="g")
        if self.fe_budget < self.d:
            raise InvalidConfigError(f"fe_budget={self.fe_budget} is below d={self.d}", field="fe_budget")


@dataclass
class KeyMatrix:
    assign: np.ndarray

    @property
    def n(self) -> int:
        return int(self.assign.shape[0])

    @property
    def k(self) -> int:
        return int(self.assign.shape[1])

    @property
    def groups(self) -> np.ndarray:
        """Group index of every variable."""
        return np.argmax(self.assign, axis=1)

    def group_sizes(self) -> np.ndarray:
        return self.assign.sum(axis=0).astype(np.int64)


@dataclass
class QuerySet:
    queries: np.ndarray
    base: List[Individual]

    @property
    def g(self) -> int:
        return int(self.queries.shape[0])


# =============================================================================
# Stage A
# =============================================================================

def variance_vector(pop: Population) -> np.ndarray:
    if pop.size < 2:
        raise InvalidArgumentError("variance needs at least two members")
    return np.maximum(np.var(pop.decisions(), axis=0), 0.0)


def build_key_matrix(variance: np.ndarray, k: int) -> KeyMatrix:
    """Ascending-variance quantile partition into k contiguous groups (sizes differ by <= 1)."""
    variance = np.asarray(variance, dtype=np.float64)
    n = variance.shape[0]
    if not 1 <= k <= n:
        raise InvalidConfigError(f"k must lie in [1, {n}], got {k}", field="k")
    order = np.argsort(variance, kind="stable")
    assign = np.zeros((n, k))
    for j, members in enumerate(np.array_split(order, k)):
        assign[members, j] = 1.0
    return KeyMatrix(assign=assign)


# =============================================================================
# Stage B
# =============================================================================

def value_individual(pop: Population) -> Individual:
    """First-front member with the largest crowding distance."""
    fronts = assign_rank_and_crowding(pop)

    def key(i: int) -> Tuple[float, float, int]:
        member = pop.members[i]
        crowd = float(member.crowding)
        tie = float(member.f[0]) if np.isinf(crowd) else 0.0
        return (-crowd, tie, i)

    return pop.members[min(fronts[0], key=key)]


def compute_queries(base: Sequence[Individual], v: Individual, K: KeyMatrix, epsilon: float) -> QuerySet:
    X = np.vstack([ind.x for ind in base])
    if X.shape[1] != K.n or v.x.shape[0] != K.n:
        raise InvalidArgumentError("decision vectors and key matrix disagree on n")
    projections = X @ K.assign
    pv = v.x @ K.assign
    safe = np.abs(pv) > epsilon
    denom = np.where(safe, pv, 1.0)
    queries = np.where(safe[None, :], projections / denom[None, :], 1.0)
    return QuerySet(queries=queries, base=list(base))


# =============================================================================
# Stage C
# =============================================================================

def query_box(queries: np.ndarray) -> Bounds:
    lo = queries.min(axis=0)
    hi = queries.max(axis=0)
    pad = QUERY_BOX_PADDING * (hi - lo)
    flat = pad <= 0
    pad[flat] = QUERY_BOX_PADDING * np.maximum(np.abs(lo[flat]), 1.0)
    return Bounds(lo - pad, hi + pad)


def optimize_queries(
    Q: QuerySet,
    rng: np.random.Generator,
    *,
    eta_c: float = DEFAULT_ETA_C,
    eta_m: float = DEFAULT_ETA_M,
    pm: Optional[float] = None,
    crossover: bool = True,
    passes: int = 1,
) -> QuerySet:
    """Variation passes in query space; spends no function evaluations."""
    queries = Q.queries.copy()
    g, k = queries.shape
    rate = 1.0 / k if pm is None else pm
    for _ in range(max(1, passes)):
        box = query_box(queries)
        current = [Individual(x=box.clip(q)) for q in queries]
        out: List[Optional[Individual]] = [None] * g
        perm = rng.permutation(g)
        for p in range(0, g - 1, 2):
            i, j = int(perm[p]), int(perm[p + 1])
            if crossover:
                c1, c2 = sbx_crossover(current[i], current[j], eta_c, box, rng)
            else:
                c1, c2 = current[i], current[j]
            out[i] = polynomial_mutation(c1, eta_m, rate, box, rng)
            out[j] = polynomial_mutation(c2, eta_m, rate, box, rng)
        if g % 2 == 1:
            last = int(perm[-1])
            out[last] = polynomial_mutation(current[last], eta_m, rate, box, rng)
        queries = np.vstack([ind.x for ind in out])
    return QuerySet(queries=queries, base=Q.base)


def attention_vector(q: np.ndarray, K: KeyMatrix) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (K.k,):
        raise InvalidArgumentError(f"query length {q.shape} does not match key width {K.k}")
    return K.assign @ q


def reconstruct_offspring(a: np.ndarray, v: Individual, bounds: Bounds) -> Individual:
    if a.shape != v.x.shape:
        raise InvalidArgumentError("attention vector and value individual differ in length")
    return Individual(x=bounds.clip(a * v.x))


# =============================================================================
# Generation loop
# =============================================================================

def attention_offspring(
    pop: Population,
    params: AttentionParams,
    bounds: Bounds,
    rng: np.random.Generator,
) -> List[Individual]:
    variance = variance_vector(pop)
    key = build_key_matrix(variance, params.k)
    base_idx = rng.choice(pop.size, size=params.g, replace=False)
    v = value_individual(pop)
    Q = compute_queries([pop.members[i] for i in base_idx], v, key, params.epsilon)
    Q = optimize_queries(Q, rng, eta_c=params.eta_c, eta_m=params.eta_m, passes=params.query_generations)
    return [reconstruct_offspring(attention_vector(q, key), v, bounds) for q in Q.queries]


def attention_generation(
    pop: Population,
    params: AttentionParams,
    problem: Problem,
    rng: np.random.Generator,
    *,
    eval_workers: int = 1,
) -> Population:
    bounds = problem.bounds
    offspring = attention_offspring(pop, params, bounds, rng)
    if not params.pure_attention:
        offspring += variation_offspring(
            pop,
            params.d - params.g,
            bounds,
            rng,
            eta_c=params.eta_c,
            eta_m=params.eta_m,
        )
    evaluated = evaluate(pop, offspring, problem, fe_budget=params.fe_budget, max_workers=eval_workers)
    if len(evaluated) < len(offspring):
        logger.info("FE budget reached mid-generation: evaluated %s of %s offspring", len(evaluated), len(offspring))
    merged = Population(members=pop.members + evaluated, fe_count=pop.fe_count)
    return environmental_selection(merged, params.d)


def run_attention_moea(
    problem: Problem,
    params: AttentionParams,
    rng: np.random.Generator,
    recorder: Optional[TraceRecorder] = None,
    *,
    eval_workers: int = 1,
) -> Tuple[List[Individual], RunTrace]:
    params.check_against(problem.n)
    if recorder is None:
        recorder = default_recorder(problem)
    pop = init_population(problem.bounds, params.d, rng)
    evaluate(pop, pop.members, problem, fe_budget=params.fe_budget, max_workers=eval_workers)
    pop = environmental_selection(pop, params.d)
    generation = 0
    recorder.observe(generation, pop)
    while pop.fe_count < params.fe_budget:
        pop = attention_generation(pop, params, problem, rng, eval_workers=eval_workers)
        generation += 1
        recorder.observe(generation, pop)
    recorder.observe(generation, pop, final=True)
    trace = recorder.finish(pop)
    logger.debug("Attention run finished after %s generations, fe=%s", generation, pop.fe_count)
    return trace.final_front, trace
