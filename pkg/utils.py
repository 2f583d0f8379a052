# utils.py — small shared helpers: hashing, structured event log, code version

import hashlib
import json
import logging
from datetime import datetime, timezone
from typing import Any, Dict

import numpy as np

CODE_VERSION = "0.3.0"

event_logger = logging.getLogger("moea.events")


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return str(value)


def stable_hash(payload: Any) -> str:
    """Return a sha256 hex digest of a JSON-serialisable payload (key order independent)."""
    data = json.dumps(payload, ensure_ascii=True, sort_keys=True, default=_json_default)
    return hashlib.sha256(data.encode("utf-8")).hexdigest()


def array_hash(*arrays: np.ndarray) -> str:
    digest = hashlib.sha256()
    for arr in arrays:
        digest.update(np.ascontiguousarray(arr, dtype=np.float64).tobytes())
    return digest.hexdigest()


def log_event(event_type: str, **fields: Any) -> None:
    """Structured event log: one JSON object per line. Do not pass decision vectors."""
    payload: Dict[str, Any] = {
        "event": event_type,
        "ts": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
    }
    payload.update({k: v for k, v in fields.items() if v is not None})
    event_logger.info("%s", json.dumps(payload, default=_json_default))


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)
