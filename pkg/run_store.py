# run_store.py — on-disk artifacts: traces, fronts, manifests, reference fronts, comparison reports.
# Column orders are fixed; see docs/OUTPUT_FORMATS.md.

from __future__ import annotations

import json
import logging
import os
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from errors import RunStoreError
from evo_core import Individual
from metrics import TRACE_COLUMNS, RunTrace

logger = logging.getLogger(__name__)

REFERENCE_DIR = "reference_fronts"
FLOAT_FORMAT = "%.17g"
COMPARISON_COLUMNS = ["seed", "hv_a", "hv_b", "igd_a", "igd_b", "hv_winner", "igd_winner"]


def ensure_dir(path: str) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise RunStoreError("cannot create output directory", path) from exc
    if not os.access(path, os.W_OK):
        raise RunStoreError("output directory is not writable", path)
    return path


def run_stem(algorithm: str, problem: str, seed: int) -> str:
    return f"{algorithm}_{problem}_seed{seed}"


def artifact_paths(out_dir: str, algorithm: str, problem: str, seed: int) -> Dict[str, str]:
    stem = os.path.join(out_dir, run_stem(algorithm, problem, seed))
    return {
        "trace": f"{stem}_trace.csv",
        "front": f"{stem}_front.csv",
        "manifest": f"{stem}_manifest.json",
    }


def _write_csv(df: pd.DataFrame, path: str) -> None:
    try:
        df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as exc:
        raise RunStoreError("cannot write CSV", path) from exc


def trace_frame(trace: RunTrace) -> pd.DataFrame:
    df = pd.DataFrame(trace.rows, columns=list(TRACE_COLUMNS))
    return df.astype({"generation": "int64", "fe": "int64", "hv": "float64", "igd": "float64"})


def front_frame(front: Sequence[Individual]) -> pd.DataFrame:
    if not front:
        return pd.DataFrame(columns=["f1", "f2"])
    F = np.vstack([ind.f for ind in front])
    X = np.vstack([ind.x for ind in front])
    columns = [f"f{m + 1}" for m in range(F.shape[1])] + [f"x{i + 1}" for i in range(X.shape[1])]
    return pd.DataFrame(np.hstack([F, X]), columns=columns)


def write_run(out_dir: str, algorithm: str, problem: str, trace: RunTrace, manifest: Dict[str, Any]) -> Dict[str, str]:
    ensure_dir(out_dir)
    paths = artifact_paths(out_dir, algorithm, problem, int(trace.seed))
    _write_csv(trace_frame(trace), paths["trace"])
    _write_csv(front_frame(trace.final_front), paths["front"])
    write_json(paths["manifest"], manifest)
    return paths


def write_json(path: str, payload: Dict[str, Any]) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise RunStoreError("cannot write JSON", path) from exc


def read_json(path: str) -> Optional[Dict[str, Any]]:
    if not os.path.exists(path):
        return None
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        logger.warning("run_store: unreadable manifest %s: %s", path, e)
        return None
    return data if isinstance(data, dict) else None


def read_trace(path: str) -> pd.DataFrame:
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise RunStoreError("cannot read trace CSV", path) from exc


# =============================================================================
# Reference fronts
# =============================================================================

def reference_front_path(out_dir: str, key: str) -> str:
    return os.path.join(out_dir, REFERENCE_DIR, f"{key}.csv")


def load_or_build_reference_front(
    out_dir: str,
    key: str,
    build: Callable[[], np.ndarray],
    columns: Sequence[str] = ("f1", "f2"),
) -> np.ndarray:
    """Return the cached reference front for `key`, building and persisting it on a miss."""
    path = reference_front_path(out_dir, key)
    if os.path.exists(path):
        try:
            front = pd.read_csv(path, float_precision="round_trip")[list(columns)].to_numpy(dtype=np.float64)
            logger.info("Reference front cache hit: %s (%s points)", path, front.shape[0])
            return front
        except (OSError, KeyError, pd.errors.ParserError) as e:
            logger.warning("Reference front cache unreadable, rebuilding %s: %s", path, e)
    front = np.asarray(build(), dtype=np.float64)
    ensure_dir(os.path.dirname(path))
    _write_csv(pd.DataFrame(front, columns=list(columns)), path)
    logger.info("Reference front cache miss: built %s points -> %s", front.shape[0], path)
    return front


def write_reference_front(path: str, front: np.ndarray, columns: Sequence[str]) -> str:
    parent = os.path.dirname(path)
    if parent:
        ensure_dir(parent)
    _write_csv(pd.DataFrame(front, columns=list(columns)), path)
    return path


def sensor_layout_path(front_path: str) -> str:
    return os.path.splitext(front_path)[0] + "_sensors.csv"


def write_sensor_layout(path: str, positions: np.ndarray, gain: np.ndarray) -> str:
    """One row per sensor: ground position in metres and its channel gain."""
    df = pd.DataFrame({"x_m": positions[:, 0], "y_m": positions[:, 1], "gain": gain})
    parent = os.path.dirname(path)
    if parent:
        ensure_dir(parent)
    _write_csv(df, path)
    return path


# =============================================================================
# Comparison report
# =============================================================================

def write_comparison(path: str, rows: List[Dict[str, Any]], summary: Dict[str, Any]) -> str:
    parent = os.path.dirname(path)
    if parent:
        ensure_dir(parent)
    df = pd.DataFrame(rows, columns=COMPARISON_COLUMNS)
    _write_csv(df, path)
    write_json(os.path.splitext(path)[0] + "_summary.json", summary)
    return path
