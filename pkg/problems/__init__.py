"""Objective-function modules: the UAV-aided sensing problem and analytic validation problems."""

from abc import ABC, abstractmethod
from typing import TYPE_CHECKING

import numpy as np

from errors import InvalidConfigError
from evo_core import Bounds

if TYPE_CHECKING:
    from config import ExperimentConfig


class Problem(ABC):
    name: str = "problem"
    n: int
    n_obj: int = 2
    bounds: Bounds

    @abstractmethod
    def evaluate(self, x: np.ndarray) -> np.ndarray:
        """Return the objective vector of x. Must be pure."""

    @abstractmethod
    def reference_front(self, points: int) -> np.ndarray:
        """Return a (m, n_obj) array of mutually non-dominated reference points."""

    @abstractmethod
    def instance_key(self) -> str:
        """Stable identifier of the instance, used to key cached reference fronts."""

    @property
    def objective_names(self) -> tuple:
        return ("f1", "f2")


def build_problem(config: "ExperimentConfig") -> Problem:
    from problems.mcs import McsProblem
    from problems.zdt import ZdtProblem

    if config.problem == "mcs":
        return McsProblem.from_settings(config.mcs, config.n)
    if config.problem in ("zdt1", "zdt2"):
        return ZdtProblem(config.problem, config.n)
    raise InvalidConfigError(f"unknown problem {config.problem!r}", field="problem")
