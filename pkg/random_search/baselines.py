"""Gradient-estimation baselines: RSGF (forward differences along a sphere direction)
and ZO-CD (central differences along every coordinate).

Both reuse one minibatch for all evaluations of an iteration. Costs are 2b
(RSGF) and 2bd (ZO-CD) component queries per iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from .constants import MU_FD_FACTOR
from .directions import DirectionDistribution, sample_direction
from .errors import ConfigError, NumericalAbortError
from .objectives import FiniteSumObjective
from .search import RunRecord, SearchState, StopRule, record_point, split_streams


class BaselineMethod(str, Enum):
    RSGF = "rsgf"
    ZOCD = "zocd"


@dataclass(frozen=True)
class SmoothingParams:
    mu_fd: float
    step: float

    def __post_init__(self) -> None:
        if not self.mu_fd > 0:
            raise ConfigError(f"Finite-difference radius must be > 0, got {self.mu_fd}")
        if not self.step > 0:
            raise ConfigError(f"Step size must be > 0, got {self.step}")


def default_mu_fd(dim: int) -> float:
    return MU_FD_FACTOR * math.sqrt(dim)


def _batch(
    obj: FiniteSumObjective, b: int, rng, full_pass: bool
) -> Tuple[Optional[np.ndarray], int]:
    if b < 1:
        raise ConfigError(f"Batch size must be >= 1, got {b}")
    if full_pass:
        return None, obj.n
    return rng.integers(0, obj.n, size=b), b


def rsgf_gradient(
    x: np.ndarray,
    obj: FiniteSumObjective,
    b: int,
    mu_fd: float,
    rng,
    *,
    full_pass: bool = False,
) -> Tuple[np.ndarray, int]:
    dir_rng, est_rng = split_streams(rng)
    u = sample_direction(DirectionDistribution("sphere", obj.dim), dir_rng).vector
    idx, count = _batch(obj, b, est_rng, full_pass)
    f_shift = obj.batch_value(idx, x + mu_fd * u)
    f_base = obj.batch_value(idx, x)
    g = ((f_shift - f_base) / mu_fd) * u
    return g, 2 * count


def zocd_gradient(
    x: np.ndarray,
    obj: FiniteSumObjective,
    b: int,
    mu_fd: float,
    rng,
    *,
    full_pass: bool = False,
) -> Tuple[np.ndarray, int]:
    _, est_rng = split_streams(rng)
    idx, count = _batch(obj, b, est_rng, full_pass)
    g = np.empty(obj.dim)
    for i in range(obj.dim):
        e = np.zeros(obj.dim)
        e[i] = mu_fd
        g[i] = (obj.batch_value(idx, x + e) - obj.batch_value(idx, x - e)) / (2.0 * mu_fd)
    return g, 2 * count * obj.dim


def _apply(x: np.ndarray, g: np.ndarray, step: float, name: str) -> np.ndarray:
    if not np.all(np.isfinite(g)):
        raise NumericalAbortError(
            f"{name} produced a non-finite gradient estimate; try a smaller step size"
        )
    return x - step * g


def rsgf_step(
    x: np.ndarray, obj: FiniteSumObjective, b: int, params: SmoothingParams, rng
) -> np.ndarray:
    g, _ = rsgf_gradient(x, obj, b, params.mu_fd, rng)
    return _apply(x, g, params.step, "RSGF")


def zocd_step(
    x: np.ndarray, obj: FiniteSumObjective, b: int, params: SmoothingParams, rng
) -> np.ndarray:
    g, _ = zocd_gradient(x, obj, b, params.mu_fd, rng)
    return _apply(x, g, params.step, "ZO-CD")


def run_baseline(
    method: BaselineMethod | str,
    x0: np.ndarray,
    obj: FiniteSumObjective,
    b: int,
    params: SmoothingParams,
    stop: StopRule,
    rng,
    *,
    record_gradient: bool = False,
) -> List[RunRecord]:
    method = BaselineMethod(method)
    estimate = rsgf_gradient if method is BaselineMethod.RSGF else zocd_gradient
    name = "RSGF" if method is BaselineMethod.RSGF else "ZO-CD"
    state = SearchState(
        x=np.array(x0, dtype=float, copy=True), eta=params.step, record_gradient=record_gradient
    )
    record_point(state, obj, 0)
    while not stop.reached(state):
        g, queries = estimate(state.x, obj, b, params.mu_fd, rng)
        state.x = _apply(state.x, g, params.step, name)
        state.t += 1
        state.cumulative_queries += queries
        state.nominal_queries += queries
        record_point(state, obj, 0)
    return state.trace
