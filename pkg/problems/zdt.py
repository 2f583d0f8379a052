"""ZDT validation problems with analytic Pareto fronts.

All variables live in [0, 1], both objectives are minimized, and the optimal
front is reached with x[1:] == 0 (g(x) == 1).
"""

from typing import Callable, Dict

import numpy as np

from errors import InvalidArgumentError, InvalidConfigError
from evo_core import Bounds
from problems import Problem


def _g(x: np.ndarray) -> float:
    return 1.0 + 9.0 * float(np.sum(x[1:])) / (x.shape[0] - 1)


def zdt1(x: np.ndarray) -> np.ndarray:
    f1 = float(x[0])
    g = _g(x)
    return np.array([f1, g * (1.0 - np.sqrt(f1 / g))])


def zdt2(x: np.ndarray) -> np.ndarray:
    f1 = float(x[0])
    g = _g(x)
    return np.array([f1, g * (1.0 - (f1 / g) ** 2)])


VARIANTS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "zdt1": zdt1,
    "zdt2": zdt2,
}

_FRONTS: Dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "zdt1": lambda f1: 1.0 - np.sqrt(f1),
    "zdt2": lambda f1: 1.0 - f1 ** 2,
}


def _variant(variant: str) -> str:
    key = (variant or "").strip().lower()
    if key not in VARIANTS:
        raise InvalidConfigError(f"unknown ZDT variant {variant!r}", field="problem")
    return key


def zdt_evaluate(variant: str, x: np.ndarray) -> np.ndarray:
    fn = VARIANTS[_variant(variant)]
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 2:
        raise InvalidArgumentError("ZDT problems need a decision vector of length >= 2")
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise InvalidArgumentError("ZDT decision vector outside the unit box")
    return fn(x)


def zdt_front(variant: str, points: int) -> np.ndarray:
    """Sample the analytic front uniformly in f1."""
    key = _variant(variant)
    if points < 2:
        raise InvalidConfigError("front needs at least 2 points", field="reference_points")
    f1 = np.linspace(0.0, 1.0, points)
    return np.column_stack([f1, _FRONTS[key](f1)])


class ZdtProblem(Problem):
    def __init__(self, variant: str, n: int):
        if n < 2:
            raise InvalidConfigError("ZDT problems need n >= 2", field="n")
        self.name = _variant(variant)
        self.n = n
        self.bounds = Bounds.box(n, 0.0, 1.0)

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return zdt_evaluate(self.name, x)

    def reference_front(self, points: int) -> np.ndarray:
        return zdt_front(self.name, points)

    def instance_key(self) -> str:
        return f"{self.name}-n{self.n}"
