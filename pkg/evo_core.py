# evo_core.py — generic multi-objective machinery shared by the attention optimizer and LMOCSO
#
# Minimization everywhere. Individuals carry numpy vectors; populations are plain lists of
# individuals plus a function-evaluation counter. All randomness comes from one
# numpy Generator passed in by the caller, consumed in a fixed order.

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Protocol, Sequence, Tuple

import numpy as np

from errors import InvalidArgumentError, InvalidConfigError, StateError

logger = logging.getLogger(__name__)

DEFAULT_ETA_C = 20.0
DEFAULT_ETA_M = 20.0
SBX_VARIABLE_PROB = 0.5
_SBX_EPS = 1e-14


class Evaluable(Protocol):
    n: int
    n_obj: int

    def evaluate(self, x: np.ndarray) -> np.ndarray: ...


# =============================================================================
# Types
# =============================================================================

@dataclass
class Bounds:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        self.lower = np.asarray(self.lower, dtype=np.float64)
        self.upper = np.asarray(self.upper, dtype=np.float64)
        if self.lower.ndim != 1 or self.lower.shape != self.upper.shape:
            raise InvalidConfigError("bounds must be two vectors of equal length")
        if not np.all(self.lower < self.upper):
            bad = int(np.argmax(~(self.lower < self.upper)))
            raise InvalidConfigError(f"lower bound must be below upper bound (variable {bad})", field="bounds")

    @classmethod
    def box(cls, n: int, lower: float, upper: float) -> "Bounds":
        return cls(np.full(n, float(lower)), np.full(n, float(upper)))

    @property
    def n(self) -> int:
        return int(self.lower.shape[0])

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))


@dataclass
class Individual:
    x: np.ndarray
    f: Optional[np.ndarray] = None
    rank: Optional[int] = None
    crowding: Optional[float] = None

    @property
    def evaluated(self) -> bool:
        return self.f is not None

    def copy(self) -> "Individual":
        return Individual(
            x=self.x.copy(),
            f=None if self.f is None else self.f.copy(),
            rank=self.rank,
            crowding=self.crowding,
        )


@dataclass
class Population:
    members: List[Individual]
    fe_count: int = 0

    @property
    def size(self) -> int:
        return len(self.members)

    def decisions(self) -> np.ndarray:
        return np.vstack([m.x for m in self.members])

    def objectives(self) -> np.ndarray:
        return objective_matrix(self.members)


def objective_matrix(members: Sequence[Individual]) -> np.ndarray:
    for i, m in enumerate(members):
        if m.f is None:
            raise StateError(f"member {i} has not been evaluated")
    if not members:
        return np.empty((0, 0))
    return np.vstack([m.f for m in members])


# =============================================================================
# Initialization and evaluation
# =============================================================================

def init_population(bounds: Bounds, d: int, rng: np.random.Generator) -> Population:
    if d < 2:
        raise InvalidConfigError(f"population size must be at least 2, got {d}", field="d")
    X = bounds.lower + rng.random((d, bounds.n)) * bounds.span
    return Population(members=[Individual(x=bounds.clip(row)) for row in X])


def evaluate(
    pop: Population,
    individuals: Sequence[Individual],
    problem: Evaluable,
    *,
    fe_budget: Optional[int] = None,
    max_workers: int = 1,
) -> List[Individual]:
    """Evaluate individuals against the remaining budget and charge pop.fe_count.

    Individuals beyond the remaining budget are dropped (not evaluated) and the
    evaluated prefix is returned. Results do not depend on max_workers.
    """
    batch = list(individuals)
    if fe_budget is not None:
        remaining = max(0, fe_budget - pop.fe_count)
        if remaining < len(batch):
            logger.debug("Budget truncates batch of %s to %s", len(batch), remaining)
            batch = batch[:remaining]
    if not batch:
        return []
    if max_workers > 1 and len(batch) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as executor:
            results = list(executor.map(lambda ind: problem.evaluate(ind.x), batch))
    else:
        results = [problem.evaluate(ind.x) for ind in batch]
    for ind, f in zip(batch, results):
        ind.f = np.asarray(f, dtype=np.float64)
        ind.rank = None
        ind.crowding = None
    pop.fe_count += len(batch)
    return batch


# =============================================================================
# Dominance and diversity
# =============================================================================

def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    return bool(np.all(a <= b) and np.any(a < b))


def dominance_matrix(F: np.ndarray) -> np.ndarray:
    """D[i, j] is True iff row i dominates row j."""
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    return le & lt


def nondominated_fronts(F: np.ndarray) -> List[List[int]]:
    """Partition the rows of an objective matrix into successive non-dominated fronts."""
    N = F.shape[0]
    if N == 0:
        return []
    D = dominance_matrix(F)
    dominated_by = D.sum(axis=0).astype(np.int64)
    remaining = np.ones(N, dtype=bool)
    fronts: List[List[int]] = []
    while remaining.any():
        current = np.flatnonzero(remaining & (dominated_by == 0))
        fronts.append([int(i) for i in current])
        remaining[current] = False
        dominated_by -= D[current].sum(axis=0).astype(np.int64)
        dominated_by[~remaining] = -1
    return fronts


def nondominated_mask(F: np.ndarray) -> np.ndarray:
    if F.shape[0] == 0:
        return np.zeros(0, dtype=bool)
    return ~dominance_matrix(F).any(axis=0)


def fast_nondominated_sort(pop: Population) -> List[List[int]]:
    fronts = nondominated_fronts(pop.objectives())
    for rank, front in enumerate(fronts):
        for i in front:
            pop.members[i].rank = rank
    return fronts


def crowding_from_objectives(F: np.ndarray) -> np.ndarray:
    size, n_obj = F.shape
    if size == 0:
        raise InvalidArgumentError("crowding distance of an empty front")
    distance = np.zeros(size)
    if size <= 2:
        distance[:] = np.inf
        return distance
    for m in range(n_obj):
        order = np.argsort(F[:, m], kind="stable")
        col = F[order, m]
        distance[order[0]] = np.inf
        distance[order[-1]] = np.inf
        span = col[-1] - col[0]
        if span <= 0:
            continue
        distance[order[1:-1]] += (col[2:] - col[:-2]) / span
    return distance


def crowding_distance(front: Sequence[Individual]) -> np.ndarray:
    if not front:
        raise InvalidArgumentError("crowding distance of an empty front")
    return crowding_from_objectives(objective_matrix(front))


def assign_rank_and_crowding(pop: Population) -> List[List[int]]:
    fronts = fast_nondominated_sort(pop)
    for front in fronts:
        distances = crowding_distance([pop.members[i] for i in front])
        for i, dist in zip(front, distances):
            pop.members[i].crowding = float(dist)
    return fronts


# =============================================================================
# Variation
# =============================================================================

def sbx_crossover(
    a: Individual,
    b: Individual,
    eta_c: float,
    bounds: Bounds,
    rng: np.random.Generator,
) -> Tuple[Individual, Individual]:
    """Simulated binary crossover; each variable crosses with probability 0.5."""
    x1 = np.asarray(a.x, dtype=np.float64)
    x2 = np.asarray(b.x, dtype=np.float64)
    if x1.shape != x2.shape:
        raise InvalidArgumentError(f"parent dimensions differ: {x1.shape} vs {x2.shape}")
    n = x1.shape[0]
    # Draw order is fixed: mask, spread, swap.
    cross = rng.random(n) < SBX_VARIABLE_PROB
    u = rng.random(n)
    swap = rng.random(n) < 0.5

    cross &= np.abs(x1 - x2) > _SBX_EPS
    beta = np.where(
        u <= 0.5,
        (2.0 * u) ** (1.0 / (eta_c + 1.0)),
        (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta_c + 1.0)),
    )
    c1 = 0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2)
    c2 = 0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2)
    c1, c2 = np.where(swap, c2, c1), np.where(swap, c1, c2)

    y1 = np.where(cross, c1, x1)
    y2 = np.where(cross, c2, x2)
    return Individual(x=bounds.clip(y1)), Individual(x=bounds.clip(y2))


def polynomial_mutation(
    ind: Individual,
    eta_m: float,
    pm: float,
    bounds: Bounds,
    rng: np.random.Generator,
) -> Individual:
    if not 0.0 <= pm <= 1.0:
        raise InvalidConfigError(f"mutation probability must lie in [0, 1], got {pm}", field="pm")
    x = np.asarray(ind.x, dtype=np.float64)
    n = x.shape[0]
    mask = rng.random(n) < pm
    u = rng.random(n)
    if not mask.any():
        return Individual(x=x.copy())

    lower, upper = bounds.lower, bounds.upper
    span = upper - lower
    delta_l = (x - lower) / span
    delta_r = (upper - x) / span
    power = 1.0 / (eta_m + 1.0)
    low_side = u < 0.5
    val_l = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - delta_l) ** (eta_m + 1.0)
    val_r = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - delta_r) ** (eta_m + 1.0)
    with np.errstate(invalid="ignore"):
        delta_q = np.where(low_side, val_l ** power - 1.0, 1.0 - val_r ** power)
    y = np.where(mask, x + delta_q * span, x)
    return Individual(x=bounds.clip(y))


def binary_tournament(pop: Population, count: int, rng: np.random.Generator) -> List[int]:
    """Pick `count` parent indices; lower rank wins, then larger crowding, then lower index."""
    size = pop.size
    picks = rng.integers(0, size, size=(count, 2))
    chosen: List[int] = []
    for i, j in picks:
        a, b = pop.members[i], pop.members[j]
        key_a = (a.rank if a.rank is not None else 0, -(a.crowding or 0.0), int(i))
        key_b = (b.rank if b.rank is not None else 0, -(b.crowding or 0.0), int(j))
        chosen.append(int(i) if key_a <= key_b else int(j))
    return chosen


def variation_offspring(
    pop: Population,
    count: int,
    bounds: Bounds,
    rng: np.random.Generator,
    *,
    eta_c: float = DEFAULT_ETA_C,
    eta_m: float = DEFAULT_ETA_M,
    pm: Optional[float] = None,
) -> List[Individual]:
    """Tournament + SBX + polynomial mutation, producing exactly `count` children."""
    if count <= 0:
        return []
    rate = 1.0 / bounds.n if pm is None else pm
    n_pairs = (count + 1) // 2
    parents = binary_tournament(pop, 2 * n_pairs, rng)
    children: List[Individual] = []
    for p in range(n_pairs):
        a = pop.members[parents[2 * p]]
        b = pop.members[parents[2 * p + 1]]
        c1, c2 = sbx_crossover(a, b, eta_c, bounds, rng)
        children.append(polynomial_mutation(c1, eta_m, rate, bounds, rng))
        children.append(polynomial_mutation(c2, eta_m, rate, bounds, rng))
    return children[:count]


# =============================================================================
# Selection
# =============================================================================

def environmental_selection(pop: Population, d: int) -> Population:
    """Truncate to d members: whole fronts by rank, last front by descending crowding."""
    if pop.size < d:
        raise InvalidArgumentError(f"cannot select {d} survivors from {pop.size} members")
    fronts = assign_rank_and_crowding(pop)
    survivors: List[int] = []
    for front in fronts:
        if len(survivors) + len(front) <= d:
            survivors.extend(front)
            if len(survivors) == d:
                break
            continue
        slots = d - len(survivors)
        idx = np.asarray(front)
        crowd = np.asarray([pop.members[i].crowding for i in front], dtype=np.float64)
        order = np.lexsort((idx, -crowd))
        survivors.extend(int(i) for i in idx[order[:slots]])
        break
    return Population(members=[pop.members[i] for i in survivors], fe_count=pop.fe_count)


def first_front(pop: Population) -> List[Individual]:
    fronts = fast_nondominated_sort(pop)
    return [pop.members[i] for i in fronts[0]] if fronts else []
