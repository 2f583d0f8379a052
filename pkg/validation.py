# validation.py — oracle suites behind `bench_cli validate`.
#
# Each suite checks a production routine against an independent, deliberately naive
# re-implementation (or a Monte Carlo estimate). Suites are plain functions returning
# (ok, detail); a suite that raises counts as a failure.

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

import attention_moea
import evo_core
import metrics
from config import McsSettings
from evo_core import Individual, Population
from lmocso import run_lmocso
from problems.mcs import McsInstance, McsProblem, mcs_evaluate, mcs_instance, mcs_reference_front
from utils import log_event, make_rng

logger = logging.getLogger(__name__)

VALIDATION_SEED = 20240601
MC_SAMPLES = 1_000_000
HV_FRONTS = 50
SORT_POPULATIONS = 200
AUDIT_REL_TOL = 1e-9

SuiteFn = Callable[[np.random.Generator], Tuple[bool, str]]


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str
    seconds: float


@dataclass
class ValidationReport:
    results: List[SuiteResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.results) and all(r.passed for r in self.results)

    def failures(self) -> List[SuiteResult]:
        return [r for r in self.results if not r.passed]


# =============================================================================
# Brute-force oracles
# =============================================================================

def brute_force_fronts(F: np.ndarray) -> List[set]:
    """Peel fronts with an O(N^2 * M) pairwise scan per layer."""
    remaining = set(range(F.shape[0]))
    fronts: List[set] = []
    while remaining:
        layer = set()
        for i in remaining:
            if not any(evo_core.dominates(F[j], F[i]) for j in remaining if j != i):
                layer.add(i)
        fronts.append(layer)
        remaining -= layer
    return fronts


def brute_force_igd(front: np.ndarray, reference: np.ndarray) -> float:
    total = 0.0
    for r in reference:
        best = math.inf
        for p in front:
            best = min(best, math.sqrt(sum((float(a) - float(b)) ** 2 for a, b in zip(r, p))))
        total += best
    return total / len(reference)


def two_pass_variance(X: np.ndarray) -> np.ndarray:
    N, n = X.shape
    out = np.zeros(n)
    for i in range(n):
        mean = sum(float(X[j, i]) for j in range(N)) / N
        out[i] = sum((float(X[j, i]) - mean) ** 2 for j in range(N)) / N
    return out


def monte_carlo_hv(front: np.ndarray, ref: np.ndarray, samples: int, rng: np.random.Generator) -> float:
    """Fraction of uniform samples in [0, ref] dominated by the front, times the box volume."""
    order = np.argsort(front[:, 0], kind="stable")
    f1 = front[order, 0]
    prefix_min_f2 = np.minimum.accumulate(front[order, 1])
    S = rng.random((samples, 2)) * ref
    idx = np.searchsorted(f1, S[:, 0], side="right") - 1
    covered = (idx >= 0) & (prefix_min_f2[np.maximum(idx, 0)] <= S[:, 1])
    return float(np.mean(covered) * ref[0] * ref[1])


def reference_mcs_objectives(inst: McsInstance, p: Sequence[float]) -> Tuple[float, float]:
    """Scalar re-statement of the MCS model, one sensor at a time."""
    delays = []
    energy = 0.0
    for i in range(inst.n):
        snr = float(p[i]) * float(inst.gain[i]) / inst.noise_w
        rate = inst.bandwidth_hz * math.log2(1.0 + snr)
        t = float(inst.data_bits[i]) / rate
        delays.append(t)
        energy += float(p[i]) * t
    delay = max(delays) if inst.delay_mode == "max" else sum(delays)
    return delay, energy


def _random_nondominated_front(rng: np.random.Generator, size: int) -> np.ndarray:
    f1 = np.sort(rng.random(size))
    f2 = np.sort(rng.random(size))[::-1]
    pts = np.unique(np.column_stack([f1, f2]), axis=0)
    return pts[evo_core.nondominated_mask(pts)]


# =============================================================================
# Suites
# =============================================================================

def suite_dominance_sort(rng: np.random.Generator) -> Tuple[bool, str]:
    mismatches = 0
    for _ in range(SORT_POPULATIONS):
        N = int(rng.integers(1, 51))
        M = int(rng.choice([2, 3]))
        # Coarse integer grid forces ties and duplicates.
        F = rng.integers(0, 6, size=(N, M)).astype(np.float64)
        fast = [set(front) for front in evo_core.nondominated_fronts(F)]
        if fast != brute_force_fronts(F):
            mismatches += 1
    return mismatches == 0, f"{mismatches} mismatches over {SORT_POPULATIONS} populations"


def suite_hypervolume(rng: np.random.Generator) -> Tuple[bool, str]:
    ctx = metrics.NormalizationContext.identity()
    single = metrics.hv_2d(np.array([[0.5, 0.5]]), ctx)
    if not math.isclose(single, 0.36, abs_tol=1e-12):
        return False, f"single point (0.5, 0.5) gave {single!r}, expected 0.36"
    worst = 0.0
    for _ in range(HV_FRONTS):
        front = _random_nondominated_front(rng, int(rng.integers(1, 30)))
        exact = metrics.hv_2d(front, ctx)
        estimate = monte_carlo_hv(front, ctx.ref_point, MC_SAMPLES, rng)
        worst = max(worst, abs(exact - estimate))
    return worst <= 1e-2, f"max |exact - monte carlo| = {worst:.2e} over {HV_FRONTS} fronts"


def suite_igd(rng: np.random.Generator) -> Tuple[bool, str]:
    ctx = metrics.NormalizationContext.identity()
    worst = 0.0
    for _ in range(20):
        F = rng.random((int(rng.integers(1, 25)), 2))
        R = rng.random((int(rng.integers(1, 25)), 2))
        worst = max(worst, abs(metrics.igd(F, R, ctx) - brute_force_igd(F, R)))
    R = rng.random((15, 2))
    self_igd = metrics.igd(R, R, ctx)
    ok = worst <= 1e-12 and self_igd == 0.0
    return ok, f"max deviation {worst:.2e}, igd(R, R) = {self_igd!r}"


def suite_variance(rng: np.random.Generator) -> Tuple[bool, str]:
    worst = 0.0
    for _ in range(10):
        X = rng.random((int(rng.integers(2, 40)), int(rng.integers(1, 30)))) * 10.0 - 5.0
        pop = Population(members=[Individual(x=row) for row in X])
        worst = max(worst, float(np.max(np.abs(attention_moea.variance_vector(pop) - two_pass_variance(X)))))
    return worst <= 1e-12, f"max deviation {worst:.2e}"


def suite_mcs_model(rng: np.random.Generator) -> Tuple[bool, str]:
    worst = 0.0
    for mode in ("sum", "max"):
        inst = mcs_instance(McsSettings(delay_mode=mode), 25, rng)
        for _ in range(20):
            p = rng.uniform(inst.p_lo, inst.p_hi, size=inst.n)
            got = mcs_evaluate(inst, p)
            want = reference_mcs_objectives(inst, p)
            for a, b in zip(got, want):
                worst = max(worst, abs(a - b) / abs(b))
    # Monotonicity of per-sensor delay (down) and energy (up) in power.
    inst = mcs_instance(McsSettings(), 20, rng)
    grid = np.linspace(inst.p_lo, inst.p_hi, 1000)
    monotone = True
    for i in range(inst.n):
        single = McsInstance(
            n=1,
            gain=inst.gain[i:i + 1],
            data_bits=inst.data_bits[i:i + 1],
            bandwidth_hz=inst.bandwidth_hz,
            noise_w=inst.noise_w,
            p_lo=inst.p_lo,
            p_hi=inst.p_hi,
        )
        pts = np.array([mcs_evaluate(single, np.array([p])) for p in grid])
        monotone &= bool(np.all(np.diff(pts[:, 0]) < 0) and np.all(np.diff(pts[:, 1]) > 0))
    ok = worst <= 1e-12 and monotone
    return ok, f"max relative deviation {worst:.2e}, monotone={monotone}"


def _clearly_dominates(q: np.ndarray, r: np.ndarray) -> bool:
    return bool(np.all(q <= r) and np.any(q < r * (1.0 - AUDIT_REL_TOL)))


def suite_reference_front(rng: np.random.Generator) -> Tuple[bool, str]:
    problems = [
        McsProblem(mcs_instance(McsSettings(), 20, rng)),
        McsProblem(mcs_instance(McsSettings(delay_mode="max"), 20, rng)),
    ]
    issues: List[str] = []
    for problem in problems:
        ref = mcs_reference_front(problem.instance, 100)
        if ref.shape[0] < 2:
            issues.append(f"{problem.instance.delay_mode}: only {ref.shape[0]} reference points")
            continue
        if not np.all(evo_core.nondominated_mask(ref)):
            issues.append(f"{problem.instance.delay_mode}: reference points dominate each other")
        ctx = metrics.NormalizationContext.from_reference(ref)
        recorder = metrics.TraceRecorder(ref, ctx)
        params = attention_moea.AttentionParams(k=4, g=6, d=20, fe_budget=600)
        front_a, _ = attention_moea.run_attention_moea(problem, params, make_rng(int(rng.integers(1 << 31))), recorder)
        front_b, _ = run_lmocso(problem, 20, 600, make_rng(int(rng.integers(1 << 31))))
        produced = evo_core.objective_matrix(front_a + front_b)
        hits = sum(_clearly_dominates(q, r) for q in produced for r in ref)
        if hits:
            issues.append(f"{problem.instance.delay_mode}: {hits} optimizer/reference dominations")
    return not issues, "; ".join(issues) or "reference fronts mutually non-dominated and never beaten"


def suite_attention_identity(rng: np.random.Generator) -> Tuple[bool, str]:
    n = 20
    worst = 0.0
    shapes_ok = True
    bounds = evo_core.Bounds.box(n, 0.0, 1.0)
    for k in (1, 2, n // 2, n):
        v = Individual(x=rng.random(n))
        key = attention_moea.build_key_matrix(rng.random(n), k)
        shapes_ok &= (v.x @ key.assign).shape == (k,)
        a = attention_moea.attention_vector(np.ones(k), key)
        shapes_ok &= a.shape == (n,)
        child = attention_moea.reconstruct_offspring(a, v, bounds)
        worst = max(worst, float(np.max(np.abs(child.x - v.x))))
    return worst == 0.0 and shapes_ok, f"max deviation of all-ones reconstruction {worst:.2e}, shapes_ok={shapes_ok}"


SUITES: Dict[str, SuiteFn] = {
    "dominance_sort": suite_dominance_sort,
    "hypervolume_monte_carlo": suite_hypervolume,
    "igd_brute_force": suite_igd,
    "variance_two_pass": suite_variance,
    "mcs_dual_implementation": suite_mcs_model,
    "reference_front_audit": suite_reference_front,
    "attention_identity": suite_attention_identity,
}


def validate(suites: Optional[Sequence[str]] = None, *, seed: int = VALIDATION_SEED) -> ValidationReport:
    """Run the oracle suites (all by default) and print one pass/fail line per suite."""
    names = list(suites) if suites else list(SUITES)
    report = ValidationReport()
    for name in names:
        fn = SUITES.get(name)
        started = time.perf_counter()
        if fn is None:
            result = SuiteResult(name, False, "unknown suite", 0.0)
        else:
            try:
                ok, detail = fn(make_rng(seed))
            except Exception as e:
                logger.exception("Suite %s raised", name)
                ok, detail = False, f"{type(e).__name__}: {e}"
            result = SuiteResult(name, bool(ok), detail, time.perf_counter() - started)
        report.results.append(result)
        print(f"[{'PASS' if result.passed else 'FAIL'}] {name}: {result.detail} ({result.seconds:.1f}s)")
        log_event("validation_suite", suite=name, passed=result.passed, seconds=round(result.seconds, 3))
    return report
