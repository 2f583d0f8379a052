"""Pareto-front quality indicators and per-generation run traces.

Both indicators work in a space normalized by the reference front's ideal and nadir
points, so values are comparable across generations and across algorithms.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from errors import InvalidArgumentError, InvalidConfigError
from evo_core import Individual, Population, first_front, nondominated_mask, objective_matrix

logger = logging.getLogger(__name__)

DEFAULT_REF_POINT = 1.1


def _as_points(points: Any) -> np.ndarray:
    arr = np.asarray(points, dtype=np.float64)
    if arr.size == 0:
        return np.empty((0, 2))
    if arr.ndim == 1:
        arr = arr[None, :]
    return arr


@dataclass
class NormalizationContext:
    ideal: np.ndarray
    nadir: np.ndarray
    ref_point: np.ndarray = field(default_factory=lambda: np.array([DEFAULT_REF_POINT, DEFAULT_REF_POINT]))

    def __post_init__(self) -> None:
        self.ideal = np.asarray(self.ideal, dtype=np.float64)
        self.nadir = np.asarray(self.nadir, dtype=np.float64)
        self.ref_point = np.asarray(self.ref_point, dtype=np.float64)
        if self.ideal.shape != self.nadir.shape:
            raise InvalidConfigError("ideal and nadir points differ in dimension")
        if not np.all(self.ideal < self.nadir):
            raise InvalidConfigError("degenerate normalization: ideal must be below nadir in every objective")
        if np.any(self.ref_point <= 1.0):
            raise InvalidConfigError("normalized reference point must exceed 1 in every objective", field="ref_point")

    @classmethod
    def from_reference(cls, reference: Any, ref_point: float = DEFAULT_REF_POINT) -> "NormalizationContext":
        R = _as_points(reference)
        if R.shape[0] == 0:
            raise InvalidArgumentError("reference front is empty")
        return cls(ideal=R.min(axis=0), nadir=R.max(axis=0), ref_point=np.full(R.shape[1], ref_point))

    @classmethod
    def identity(cls, n_obj: int = 2, ref_point: float = DEFAULT_REF_POINT) -> "NormalizationContext":
        return cls(ideal=np.zeros(n_obj), nadir=np.ones(n_obj), ref_point=np.full(n_obj, ref_point))

    def normalize(self, points: Any) -> np.ndarray:
        return (_as_points(points) - self.ideal) / (self.nadir - self.ideal)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ideal": self.ideal.tolist(),
            "nadir": self.nadir.tolist(),
            "ref_point": self.ref_point.tolist(),
            "space": "normalized",
        }


def hv_2d(front: Any, ctx: NormalizationContext) -> float:
    """Exact hypervolume of a bi-objective front against ctx.ref_point, in normalized space."""
    P = ctx.normalize(front)
    if P.shape[0] == 0:
        return 0.0
    if P.shape[1] != 2:
        raise InvalidArgumentError(f"hv_2d needs 2 objectives, got {P.shape[1]}")
    ref = ctx.ref_point
    P = P[np.all(P < ref, axis=1)]
    if P.shape[0] == 0:
        return 0.0
    order = np.lexsort((P[:, 1], P[:, 0]))
    volume = 0.0
    best_f2 = ref[1]
    for f1, f2 in P[order]:
        if f2 < best_f2:
            volume += (ref[0] - f1) * (best_f2 - f2)
            best_f2 = f2
    return float(volume)


def igd(front: Any, reference: Any, ctx: NormalizationContext) -> float:
    """Mean distance from each reference point to its nearest front point, in normalized space."""
    F = _as_points(front)
    R = _as_points(reference)
    if F.shape[0] == 0:
        raise InvalidArgumentError("IGD of an empty front")
    if R.shape[0] == 0:
        raise InvalidArgumentError("IGD against an empty reference front")
    distances = cdist(ctx.normalize(R), ctx.normalize(F))
    return float(np.mean(np.min(distances, axis=1)))


# =============================================================================
# Run traces
# =============================================================================

TRACE_COLUMNS = ("generation", "fe", "hv", "igd")


@dataclass
class RunTrace:
    rows: List[Tuple[int, int, float, float]] = field(default_factory=list)
    final_front: List[Individual] = field(default_factory=list)
    config_echo: Dict[str, Any] = field(default_factory=dict)
    seed: Optional[int] = None
    normalization: Optional[Dict[str, Any]] = None

    @property
    def final_fe(self) -> int:
        return self.rows[-1][1] if self.rows else 0

    @property
    def final_hv(self) -> float:
        return self.rows[-1][2] if self.rows else 0.0

    @property
    def final_igd(self) -> float:
        return self.rows[-1][3] if self.rows else float("inf")


class TraceRecorder:
    """Samples HV/IGD of the current first front (or a cumulative archive) every few generations."""

    def __init__(
        self,
        reference: np.ndarray,
        ctx: NormalizationContext,
        *,
        trace_every: int = 1,
        archive: bool = False,
    ):
        self.reference = _as_points(reference)
        self.ctx = ctx
        self.trace_every = max(1, int(trace_every))
        self.archive_enabled = archive
        self.archive: List[Individual] = []
        self.trace = RunTrace(normalization=ctx.to_dict())

    def _update_archive(self, front: Sequence[Individual]) -> List[Individual]:
        pool = self.archive + [ind.copy() for ind in front]
        F = objective_matrix(pool)
        _, unique_idx = np.unique(F, axis=0, return_index=True)
        pool = [pool[i] for i in sorted(unique_idx)]
        mask = nondominated_mask(objective_matrix(pool))
        self.archive = [ind for ind, keep in zip(pool, mask) if keep]
        return self.archive

    def observe(self, generation: int, pop: Population, *, final: bool = False) -> None:
        front = first_front(pop)
        if self.archive_enabled:
            front = self._update_archive(front)
        if not final and generation % self.trace_every != 0:
            return
        if self.trace.rows and self.trace.rows[-1][1] == pop.fe_count:
            return
        F = objective_matrix(front)
        row = (generation, pop.fe_count, hv_2d(F, self.ctx), igd(F, self.reference, self.ctx))
        self.trace.rows.append(row)
        logger.debug("gen=%s fe=%s hv=%.6f igd=%.6f", *row)

    def finish(self, pop: Population) -> RunTrace:
        front = self.archive if self.archive_enabled else first_front(pop)
        self.trace.final_front = sorted(
            (ind.copy() for ind in front),
            key=lambda ind: tuple(ind.f.tolist()),
        )
        return self.trace


DEFAULT_REFERENCE_POINTS = 200


def default_recorder(problem: Any, points: int = DEFAULT_REFERENCE_POINTS, **kwargs: Any) -> TraceRecorder:
    """Recorder normalized by the problem's own reference front."""
    reference = problem.reference_front(points)
    return TraceRecorder(reference, NormalizationContext.from_reference(reference), **kwargs)
