# experiment.py — seeded multi-run execution and head-to-head comparison.
#
# Each (config, seed) pair fully determines a run: its own RNG stream, its own output
# files, no shared mutable state. Seeds may therefore run in separate processes.

from __future__ import annotations

import logging
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

import run_store
from attention_moea import AttentionParams, run_attention_moea
from config import ExperimentConfig, build_config, get_runtime_config
from errors import InvalidConfigError, RunStoreError
from lmocso import run_lmocso
from metrics import NormalizationContext, RunTrace, TraceRecorder
from problems import Problem, build_problem
from utils import CODE_VERSION, log_event, make_rng, stable_hash

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    seed: int
    paths: Dict[str, str]
    final_fe: int
    final_hv: float
    final_igd: float
    cached: bool = False


@dataclass
class ComparisonReport:
    rows: List[Dict[str, Any]]
    median_hv_a: float
    median_hv_b: float
    median_igd_a: float
    median_igd_b: float
    hv_wins_a: int
    hv_wins_b: int
    igd_wins_a: int
    igd_wins_b: int
    report_path: Optional[str] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        """True when a is at least as good as b on both median indicators."""
        return self.median_hv_a >= self.median_hv_b and self.median_igd_a <= self.median_igd_b

    @property
    def neutral(self) -> bool:
        return self.median_hv_a == self.median_hv_b and self.median_igd_a == self.median_igd_b


# =============================================================================
# Problem + reference set-up
# =============================================================================

def reference_key(problem: Problem, config: ExperimentConfig) -> str:
    """Cache key of a reference front: instance plus the number of weights it was built from."""
    return f"{problem.instance_key()}-w{config.reference_points}"


def prepare_problem(config: ExperimentConfig) -> Tuple[Problem, np.ndarray, NormalizationContext]:
    problem = build_problem(config)
    if config.problem == "mcs":
        key = reference_key(problem, config)
        reference = run_store.load_or_build_reference_front(
            config.out_dir,
            key,
            lambda: problem.reference_front(config.reference_points),
            columns=problem.objective_names,
        )
    else:
        reference = problem.reference_front(config.reference_points)
    ctx = NormalizationContext.from_reference(reference, config.ref_point)
    return problem, reference, ctx


def attention_params(config: ExperimentConfig) -> AttentionParams:
    return AttentionParams(
        k=config.k,
        g=config.g,
        d=config.d,
        fe_budget=config.fe_budget,
        epsilon=config.epsilon,
        eta_c=config.eta_c,
        eta_m=config.eta_m,
        pure_attention=config.pure_attention,
        query_generations=config.query_generations,
    )


def _manifest(config: ExperimentConfig, trace: RunTrace, seed: int, wall_time_s: float, problem: Problem) -> Dict[str, Any]:
    identity = config.identity()
    return {
        "algorithm": config.algorithm,
        "problem": config.problem,
        "seed": seed,
        "config": identity,
        "config_hash": stable_hash(identity),
        "instance_key": problem.instance_key(),
        "normalization": trace.normalization,
        "final": {"fe": trace.final_fe, "hv": trace.final_hv, "igd": trace.final_igd},
        "wall_time_s": round(wall_time_s, 3),
        "code_version": CODE_VERSION,
    }


def run_seed(config: ExperimentConfig, seed: int, *, eval_workers: int = 1) -> RunResult:
    problem, reference, ctx = prepare_problem(config)
    recorder = TraceRecorder(reference, ctx, trace_every=config.trace_every, archive=config.archive)
    rng = make_rng(seed)
    log_event("run_started", algorithm=config.algorithm, problem=config.problem, seed=seed, n=config.n, fe_budget=config.fe_budget)
    started = time.perf_counter()
    if config.algorithm == "attention":
        _, trace = run_attention_moea(problem, attention_params(config), rng, recorder, eval_workers=eval_workers)
    elif config.algorithm == "lmocso":
        _, trace = run_lmocso(
            problem,
            config.d,
            config.fe_budget,
            rng,
            recorder,
            eta_m=config.eta_m,
            eval_workers=eval_workers,
        )
    else:
        raise InvalidConfigError(f"unknown algorithm {config.algorithm!r}", field="algorithm")
    wall = time.perf_counter() - started
    trace.seed = seed
    trace.config_echo = config.identity()
    paths = run_store.write_run(
        config.out_dir,
        config.algorithm,
        config.problem,
        trace,
        _manifest(config, trace, seed, wall, problem),
    )
    log_event(
        "run_finished",
        algorithm=config.algorithm,
        problem=config.problem,
        seed=seed,
        fe=trace.final_fe,
        hv=trace.final_hv,
        igd=trace.final_igd,
        wall_time_s=round(wall, 3),
    )
    return RunResult(seed=seed, paths=paths, final_fe=trace.final_fe, final_hv=trace.final_hv, final_igd=trace.final_igd)


def _run_seed_job(payload: Tuple[Dict[str, Any], int, int]) -> RunResult:
    values, seed, eval_workers = payload
    return run_seed(build_config(values), seed, eval_workers=eval_workers)


def run(
    config: ExperimentConfig,
    *,
    seeds: Optional[Sequence[int]] = None,
    max_workers: Optional[int] = None,
) -> List[RunResult]:
    """One optimizer run per seed; returns results ordered by seed."""
    runtime = get_runtime_config()
    workers = max_workers if max_workers is not None else runtime["max_workers"]
    eval_workers = runtime["eval_workers"]
    todo = sorted(set(seeds if seeds is not None else config.seeds))
    run_store.ensure_dir(config.out_dir)
    # Build (or load) the reference front once so parallel workers only ever read the cache.
    prepare_problem(config)
    logger.info(
        "Running %s on %s: %s seed(s), n=%s d=%s fe_budget=%s workers=%s",
        config.algorithm, config.problem, len(todo), config.n, config.d, config.fe_budget, workers,
    )
    if workers > 1 and len(todo) > 1:
        values = config.model_dump(mode="json")
        with ProcessPoolExecutor(max_workers=min(workers, len(todo))) as executor:
            results = list(executor.map(_run_seed_job, [(values, s, eval_workers) for s in todo]))
    else:
        results = [run_seed(config, s, eval_workers=eval_workers) for s in todo]
    return sorted(results, key=lambda r: r.seed)


# =============================================================================
# Comparison
# =============================================================================

def _shared_fields_check(a: ExperimentConfig, b: ExperimentConfig) -> None:
    for name in ("problem", "n", "fe_budget", "reference_points", "ref_point"):
        if getattr(a, name) != getattr(b, name):
            raise InvalidConfigError(f"compared configs differ in {name}", field=name)
    if sorted(a.seeds) != sorted(b.seeds):
        raise InvalidConfigError("compared configs use different seeds", field="seeds")
    if a.problem == "mcs" and a.mcs != b.mcs:
        raise InvalidConfigError("compared configs use different MCS instances", field="mcs")
    if (
        a.algorithm == b.algorithm
        and os.path.abspath(a.out_dir) == os.path.abspath(b.out_dir)
        and a.identity() != b.identity()
    ):
        raise InvalidConfigError("configs with the same algorithm need distinct out_dir values", field="out_dir")


def cached_result(config: ExperimentConfig, seed: int) -> Optional[RunResult]:
    paths = run_store.artifact_paths(config.out_dir, config.algorithm, config.problem, seed)
    manifest = run_store.read_json(paths["manifest"])
    if manifest is None or not os.path.exists(paths["trace"]):
        return None
    if manifest.get("config") != config.identity() or manifest.get("code_version") != CODE_VERSION:
        logger.warning("Ignoring cached run %s: config or code version changed", paths["manifest"])
        return None
    final = manifest.get("final") or {}
    try:
        trace = run_store.read_trace(paths["trace"])
    except RunStoreError as e:
        logger.warning("Ignoring cached run %s: %s", paths["trace"], e)
        return None
    if trace.empty or int(trace["fe"].iloc[-1]) != int(final.get("fe", -1)):
        logger.warning("Ignoring cached run %s: trace does not end at the recorded budget", paths["trace"])
        return None
    return RunResult(
        seed=seed,
        paths=paths,
        final_fe=int(final.get("fe", 0)),
        final_hv=float(final.get("hv", 0.0)),
        final_igd=float(final.get("igd", float("inf"))),
        cached=True,
    )


def collect(config: ExperimentConfig, *, max_workers: Optional[int] = None) -> List[RunResult]:
    """Cached results where the manifest matches, fresh runs for the rest."""
    results: Dict[int, RunResult] = {}
    missing: List[int] = []
    for seed in sorted(set(config.seeds)):
        hit = cached_result(config, seed)
        if hit is None:
            missing.append(seed)
        else:
            results[seed] = hit
    if missing:
        for res in run(config, seeds=missing, max_workers=max_workers):
            results[res.seed] = res
    return [results[s] for s in sorted(results)]


def _winner(a: float, b: float, *, larger_is_better: bool) -> str:
    if a == b:
        return "tie"
    if larger_is_better:
        return "a" if a > b else "b"
    return "a" if a < b else "b"


def compare(
    config_a: ExperimentConfig,
    config_b: ExperimentConfig,
    *,
    report_path: Optional[str] = None,
    max_workers: Optional[int] = None,
) -> ComparisonReport:
    _shared_fields_check(config_a, config_b)
    results_a = collect(config_a, max_workers=max_workers)
    results_b = collect(config_b, max_workers=max_workers)

    rows: List[Dict[str, Any]] = []
    for ra, rb in zip(results_a, results_b):
        rows.append({
            "seed": ra.seed,
            "hv_a": ra.final_hv,
            "hv_b": rb.final_hv,
            "igd_a": ra.final_igd,
            "igd_b": rb.final_igd,
            "hv_winner": _winner(ra.final_hv, rb.final_hv, larger_is_better=True),
            "igd_winner": _winner(ra.final_igd, rb.final_igd, larger_is_better=False),
        })

    report = ComparisonReport(
        rows=rows,
        median_hv_a=statistics.median(r["hv_a"] for r in rows),
        median_hv_b=statistics.median(r["hv_b"] for r in rows),
        median_igd_a=statistics.median(r["igd_a"] for r in rows),
        median_igd_b=statistics.median(r["igd_b"] for r in rows),
        hv_wins_a=sum(r["hv_winner"] == "a" for r in rows),
        hv_wins_b=sum(r["hv_winner"] == "b" for r in rows),
        igd_wins_a=sum(r["igd_winner"] == "a" for r in rows),
        igd_wins_b=sum(r["igd_winner"] == "b" for r in rows),
    )
    if report_path is None:
        report_path = os.path.join(
            config_a.out_dir,
            f"comparison_{config_a.algorithm}_vs_{config_b.algorithm}_{config_a.problem}.csv",
        )
    summary = {
        "a": {"algorithm": config_a.algorithm, "config_hash": stable_hash(config_a.identity())},
        "b": {"algorithm": config_b.algorithm, "config_hash": stable_hash(config_b.identity())},
        "median_hv": {"a": report.median_hv_a, "b": report.median_hv_b},
        "median_igd": {"a": report.median_igd_a, "b": report.median_igd_b},
        "hv_wins": {"a": report.hv_wins_a, "b": report.hv_wins_b},
        "igd_wins": {"a": report.igd_wins_a, "b": report.igd_wins_b},
        "verdict": report.verdict,
        "neutral": report.neutral,
        "seeds": [r["seed"] for r in rows],
        "code_version": CODE_VERSION,
    }
    report.report_path = run_store.write_comparison(report_path, rows, summary)
    report.extra = summary
    log_event(
        "comparison_finished",
        a=config_a.algorithm,
        b=config_b.algorithm,
        problem=config_a.problem,
        verdict=report.verdict,
        neutral=report.neutral,
        report=report.report_path,
    )
    return report
