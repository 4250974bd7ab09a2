"""Input checks shared by the estimators and the command line."""

from __future__ import annotations

import math
import numbers

from .model import ProblemInstance, validate_instance
from .solvers import ALGORITHMS


def check_instance(instance) -> ProblemInstance:
    if not isinstance(instance, ProblemInstance):
        raise TypeError(f"expected a ProblemInstance, got {type(instance).__name__}")
    problems = validate_instance(instance)
    if problems:
        raise ValueError("invalid problem instance: " + "; ".join(problems))
    return instance


def check_algorithm(name: str) -> str:
    key = str(name).lower()
    if key not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}; expected one of {', '.join(ALGORITHMS)}")
    return key


def check_weights(c_spec, c_res):
    for w in (c_spec, c_res):
        if not isinstance(w, numbers.Real) or not 0.0 <= w <= 1.0:
            raise ValueError("weights must be reals in [0, 1]")
    if not math.isclose(c_spec + c_res, 1.0, abs_tol=1e-9):
        raise ValueError("weights must sum to 1")
    return float(c_spec), float(c_res)


def check_count(value, name: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
