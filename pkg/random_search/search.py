"""The sign-of-difference random search loop and its budget/trace accounting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .directions import DirectionDistribution, sample_direction
from .errors import ConfigError, NumericalAbortError
from .estimators import Estimator
from .objectives import FiniteSumObjective
from .planner import Plan
from .rng import TrialStreams


@dataclass(frozen=True)
class RunRecord:
    t: int
    queries: int
    f_true: float
    grad_norm: Optional[float] = None
    step_sign: int = 0
    helper_calls: int = 0
    nominal_queries: int = 0


@dataclass
class SearchState:
    x: np.ndarray
    eta: float
    t: int = 0
    cumulative_queries: int = 0
    helper_calls: int = 0
    nominal_queries: int = 0
    instrumentation_queries: int = 0
    record_gradient: bool = False
    trace: List[RunRecord] = field(default_factory=list)

    @property
    def budget_used(self) -> int:
        """Optimizer-side cost: component queries plus helper calls."""
        return self.cumulative_queries + self.helper_calls


@dataclass(frozen=True)
class StopRule:
    max_iters: Optional[int] = None
    max_queries: Optional[int] = None

    def __post_init__(self) -> None:
        if self.max_iters is None and self.max_queries is None:
            raise ConfigError("A stop rule needs max_iters, max_queries or both")
        if self.max_queries is not None and self.max_queries <= 0:
            raise ConfigError(f"Query budget must be > 0, got {self.max_queries}")

    def reached(self, state: SearchState) -> bool:
        if self.max_iters is not None and state.t >= self.max_iters:
            return True
        return self.max_queries is not None and state.budget_used >= self.max_queries


def decide_sign(m_plus: float, m_minus: float) -> int:
    """sign(M+ - M-) with the tie convention sign(0) = +1."""
    return 1 if m_plus - m_minus >= 0 else -1


def split_streams(rng) -> Tuple[np.random.Generator, np.random.Generator]:
    if isinstance(rng, TrialStreams):
        return rng.directions, rng.estimator
    return rng, rng


def record_point(state: SearchState, obj: FiniteSumObjective, step_sign: int) -> None:
    """Meter f(x_t) (and optionally ||grad f||) on the instrumentation ledger."""
    f_true = obj.full_value(state.x)
    state.instrumentation_queries += obj.n
    grad_norm = None
    if state.record_gradient:
        grad_norm = float(np.linalg.norm(obj.full_gradient(state.x)))
    state.trace.append(
        RunRecord(
            t=state.t,
            queries=state.cumulative_queries,
            f_true=f_true,
            grad_norm=grad_norm,
            step_sign=step_sign,
            helper_calls=state.helper_calls,
            nominal_queries=state.nominal_queries,
        )
    )


def init_state(
    x0: np.ndarray, eta: float, obj: FiniteSumObjective, *, record_gradient: bool = False
) -> SearchState:
    if not eta > 0:
        raise ConfigError(f"Step size must be > 0, got {eta}")
    x = np.array(x0, dtype=float, copy=True)
    state = SearchState(x=x, eta=eta, record_gradient=record_gradient)
    record_point(state, obj, 0)
    return state


def srs_step(
    state: SearchState,
    dist: DirectionDistribution,
    estimator: Estimator,
    obj: FiniteSumObjective,
    rng,
) -> SearchState:
    """One iteration: x <- x - eta sign(M+ - M-) s with exactly one estimator call."""
    dir_rng, est_rng = split_streams(rng)
    s = sample_direction(dist, dir_rng).vector
    x_plus = state.x + state.eta * s
    x_minus = state.x - state.eta * s
    pair = estimator(obj, x_plus, x_minus, est_rng)
    if not (math.isfinite(pair.m_plus) and math.isfinite(pair.m_minus)):
        raise NumericalAbortError(
            f"Non-finite estimate at t={state.t} (M+={pair.m_plus}, M-={pair.m_minus}); "
            "the objective probably overflowed, try a smaller step size"
        )
    sign = decide_sign(pair.m_plus, pair.m_minus)
    state.x = state.x - (state.eta * sign) * s
    state.t += 1
    state.cumulative_queries += pair.queries
    state.helper_calls += pair.helper_calls
    state.nominal_queries += pair.ledger_queries
    record_point(state, obj, sign)
    return state


def run_search(
    x0: np.ndarray,
    plan: Plan,
    dist: DirectionDistribution,
    estimator: Estimator,
    obj: FiniteSumObjective,
    stop: Optional[StopRule],
    rng,
    *,
    record_gradient: bool = False,
) -> SearchState:
    stop = stop if stop is not None else StopRule(max_iters=plan.T)
    estimator.reset()
    state = init_state(x0, plan.eta, obj, record_gradient=record_gradient)
    while not stop.reached(state):
        srs_step(state, dist, estimator, obj, rng)
    return state


def run(
    x0: np.ndarray,
    plan: Plan,
    dist: DirectionDistribution,
    estimator: Estimator,
    obj: FiniteSumObjective,
    stop: Optional[StopRule],
    rng,
    *,
    record_gradient: bool = False,
) -> List[RunRecord]:
    return run_search(
        x0, plan, dist, estimator, obj, stop, rng, record_gradient=record_gradient
    ).trace


def stp_reference(
    x0: np.ndarray,
    eta: float,
    T: int,
    dist: DirectionDistribution,
    obj: FiniteSumObjective,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, List[float]]:
    """Three-point search on exact values: keep the best of x - eta s, x, x + eta s."""
    x = np.array(x0, dtype=float, copy=True)
    f_x = obj.full_value(x)
    values = [f_x]
    for _ in range(T):
        s = sample_direction(dist, rng).vector
        x_plus = x + eta * s
        x_minus = x - eta * s
        f_plus = obj.full_value(x_plus)
        f_minus = obj.full_value(x_minus)
        if f_plus < f_x and f_plus <= f_minus:
            x, f_x = x_plus, f_plus
        elif f_minus < f_x:
            x, f_x = x_minus, f_minus
        values.append(f_x)
    return x, values
