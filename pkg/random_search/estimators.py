"""Paired value estimates (M+, M-) for the two trial points.

All minibatch estimators draw one batch of indices (i.i.d., with replacement)
and evaluate both trial points on it. Query costs are component evaluations;
helper calls are counted separately.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .errors import ConfigError, InvalidDimensionError, SnapshotError
from .objectives import FiniteSumObjective


class Regime(str, Enum):
    MINIBATCH = "minibatch"
    EXACT = "exact"
    VR_SYMMETRIC = "vr-sym"
    VR_SNAPSHOT = "vr-snap"
    HELPER = "helper"
    MOMENTUM = "momentum"


@dataclass(frozen=True)
class EstimatePair:
    m_plus: float
    m_minus: float
    queries: int
    regime: Regime
    helper_calls: int = 0
    nominal_queries: Optional[int] = None

    @property
    def difference(self) -> float:
        return self.m_plus - self.m_minus

    @property
    def ledger_queries(self) -> int:
        """Cost under the one-pass-per-epoch convention (equals ``queries`` outside VR)."""
        return self.queries if self.nominal_queries is None else self.nominal_queries


@dataclass
class VrState:
    epoch_len: int
    iter_in_epoch: int = 0
    snapshot_plus: Optional[np.ndarray] = None
    snapshot_minus: Optional[np.ndarray] = None
    snapshot_value_plus: Optional[float] = None
    snapshot_value_minus: Optional[float] = None

    def __post_init__(self) -> None:
        if self.epoch_len < 1:
            raise ConfigError(f"Epoch length must be >= 1, got {self.epoch_len}")

    @property
    def at_boundary(self) -> bool:
        return self.iter_in_epoch == 0

    def advance(self) -> None:
        self.iter_in_epoch = (self.iter_in_epoch + 1) % self.epoch_len

    def refresh(
        self, x_plus: np.ndarray, x_minus: np.ndarray, f_plus: float, f_minus: float
    ) -> None:
        self.snapshot_plus = np.array(x_plus, dtype=float, copy=True)
        self.snapshot_minus = np.array(x_minus, dtype=float, copy=True)
        self.snapshot_value_plus = float(f_plus)
        self.snapshot_value_minus = float(f_minus)

    def reset(self) -> None:
        self.iter_in_epoch = 0
        self.snapshot_plus = self.snapshot_minus = None
        self.snapshot_value_plus = self.snapshot_value_minus = None


class HelperMode(str, Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class HelperSpec:
    """Simulated helper h(x) = f(x) + per-call noise.

    Uniform: delta/2 * U[-1, 1], so E|h(x) - h(y) - (f(x) - f(y))| = delta / 3.
    Gaussian: N(0, (delta sqrt(pi/8))^2), so the same expectation is delta / sqrt(2).
    """

    delta: float
    mode: HelperMode = HelperMode.UNIFORM

    def __post_init__(self) -> None:
        if not self.delta >= 0:
            raise ConfigError(f"Helper delta must be >= 0, got {self.delta}")
        object.__setattr__(self, "mode", HelperMode(self.mode))

    @property
    def max_perturbation(self) -> float:
        """Largest per-call deviation |h - f| (infinite for Gaussian noise)."""
        if self.delta == 0:
            return 0.0
        return self.delta / 2.0 if self.mode is HelperMode.UNIFORM else math.inf


def _check_points(obj: FiniteSumObjective, x_plus: np.ndarray, x_minus: np.ndarray) -> None:
    if x_plus.shape != (obj.dim,) or x_minus.shape != (obj.dim,):
        raise InvalidDimensionError(
            f"Trial points of shape {x_plus.shape} / {x_minus.shape} "
            f"do not match dimension {obj.dim}"
        )


def _check_batch_size(b: int) -> None:
    if b < 1:
        raise ConfigError(f"Batch size must be >= 1, got {b}")


def _draw_batch(obj: FiniteSumObjective, b: int, rng) -> np.ndarray:
    _check_batch_size(b)
    return rng.integers(0, obj.n, size=b)


def exact_pair(obj: FiniteSumObjective, x_plus: np.ndarray, x_minus: np.ndarray) -> EstimatePair:
    _check_points(obj, x_plus, x_minus)
    return EstimatePair(obj.full_value(x_plus), obj.full_value(x_minus), 2 * obj.n, Regime.EXACT)


def minibatch_pair(
    obj: FiniteSumObjective,
    x_plus: np.ndarray,
    x_minus: np.ndarray,
    b: int,
    rng,
    *,
    full_pass: bool = False,
) -> EstimatePair:
    _check_points(obj, x_plus, x_minus)
    if full_pass:
        _check_batch_size(b)
        idx, count = None, obj.n
    else:
        idx = _draw_batch(obj, b, rng)
        count = b
    m_plus = obj.batch_value(idx, x_plus)
    m_minus = obj.batch_value(idx, x_minus)
    return EstimatePair(m_plus, m_minus, 2 * count, Regime.MINIBATCH)


def vr_pair_symmetric(
    obj: FiniteSumObjective,
    x_plus: np.ndarray,
    x_minus: np.ndarray,
    b: int,
    state: VrState,
    rng,
) -> EstimatePair:
    """Exact values at epoch boundaries, plain common-batch minibatch otherwise."""
    if state.at_boundary:
        pair = exact_pair(obj, x_plus, x_minus)
        out = EstimatePair(
            pair.m_plus, pair.m_minus, pair.queries, Regime.VR_SYMMETRIC, nominal_queries=obj.n
        )
    else:
        pair = minibatch_pair(obj, x_plus, x_minus, b, rng)
        out = EstimatePair(pair.m_plus, pair.m_minus, pair.queries, Regime.VR_SYMMETRIC)
    state.advance()
    return out


def control_variate_pair(
    obj: FiniteSumObjective,
    x_plus: np.ndarray,
    x_minus: np.ndarray,
    b: int,
    state: VrState,
    rng,
    *,
    full_pass: bool = False,
) -> EstimatePair:
    """Mid-epoch two-snapshot estimate f(x~) + mean_B(f_i(x) - f_i(x~)).

    Does not advance ``state``.
    """
    if state.snapshot_plus is None or state.snapshot_minus is None:
        raise SnapshotError("Two-snapshot estimate requested before any snapshot was taken")
    _check_points(obj, x_plus, x_minus)
    if full_pass:
        idx, count = None, obj.n
    else:
        idx, count = _draw_batch(obj, b, rng), b
    corr_plus = obj.component_values(idx, x_plus) - obj.component_values(idx, state.snapshot_plus)
    corr_minus = obj.component_values(idx, x_minus) - obj.component_values(
        idx, state.snapshot_minus
    )
    m_plus = state.snapshot_value_plus + float(np.mean(corr_plus))
    m_minus = state.snapshot_value_minus + float(np.mean(corr_minus))
    return EstimatePair(m_plus, m_minus, 4 * count, Regime.VR_SNAPSHOT)


def vr_pair_two_snapshot(
    obj: FiniteSumObjective,
    x_plus: np.ndarray,
    x_minus: np.ndarray,
    b: int,
    state: VrState,
    rng,
    *,
    full_pass: bool = False,
) -> EstimatePair:
    if state.at_boundary:
        pair = exact_pair(obj, x_plus, x_minus)
        state.refresh(x_plus, x_minus, pair.m_plus, pair.m_minus)
        out = EstimatePair(
            pair.m_plus, pair.m_minus, pair.queries, Regime.VR_SNAPSHOT, nominal_queries=obj.n
        )
    else:
        out = control_variate_pair(obj, x_plus, x_minus, b, state, rng, full_pass=full_pass)
    state.advance()
    return out


def helper_pair(
    obj: FiniteSumObjective,
    x_plus: np.ndarray,
    x_minus: np.ndarray,
    spec: HelperSpec,
    rng,
) -> EstimatePair:
    """Query the simulated helper at both points; no component queries are charged.

    With ``delta == 0`` nothing is drawn from ``rng``.
    """
    _check_points(obj, x_plus, x_minus)
    h_plus = obj.full_value(x_plus)
    h_minus = obj.full_value(x_minus)
    if spec.delta > 0:
        if spec.mode is HelperMode.UNIFORM:
            noise = 0.5 * spec.delta * rng.uniform(-1.0, 1.0, size=2)
        else:
            noise = rng.normal(0.0, spec.delta * math.sqrt(math.pi / 8.0), size=2)
        h_plus += float(noise[0])
        h_minus += float(noise[1])
    return EstimatePair(h_plus, h_minus, 0, Regime.HELPER, helper_calls=2)


def translation_gap(pair: EstimatePair, f_plus: float, f_minus: float) -> float:
    """Optimal-shift residual 1/2 |(M+ - M-) - (f+ - f-)|."""
    return 0.5 * abs((pair.m_plus - pair.m_minus) - (f_plus - f_minus))


def shift_residual(
    m_plus: float, m_minus: float, f_plus: float, f_minus: float, c
) -> np.ndarray | float:
    """|M+ - c - f+| + |M- - c - f-| for a scalar or array of shifts ``c``."""
    return np.abs(m_plus - c - f_plus) + np.abs(m_minus - c - f_minus)


def grid_min_shift_residual(
    m_plus: float,
    m_minus: float,
    f_plus: float,
    f_minus: float,
    *,
    lo: float = -10.0,
    hi: float = 10.0,
    step: float = 1e-4,
) -> Tuple[float, float]:
    """Brute-force inf over a grid of shifts; returns (minimum, minimizing c)."""
    count = int(round((hi - lo) / step)) + 1
    grid = lo + step * np.arange(count)
    residuals = shift_residual(m_plus, m_minus, f_plus, f_minus, grid)
    k = int(np.argmin(residuals))
    return float(residuals[k]), float(grid[k])


class Estimator(ABC):
    """Callable ``(obj, x_plus, x_minus, rng) -> EstimatePair`` used by the search loop."""

    regime: Regime

    @abstractmethod
    def __call__(
        self, obj: FiniteSumObjective, x_plus: np.ndarray, x_minus: np.ndarray, rng
    ) -> EstimatePair:
        ...

    def reset(self) -> None:
        """Forget per-run state before a new run starts."""


class MinibatchEstimator(Estimator):
    regime = Regime.MINIBATCH

    def __init__(self, b: int, *, full_pass: bool = False) -> None:
        _check_batch_size(b)
        self.b = b
        self.full_pass = full_pass

    def __call__(self, obj, x_plus, x_minus, rng) -> EstimatePair:
        return minibatch_pair(obj, x_plus, x_minus, self.b, rng, full_pass=self.full_pass)


class ExactEstimator(Estimator):
    regime = Regime.EXACT

    def __call__(self, obj, x_plus, x_minus, rng) -> EstimatePair:
        return exact_pair(obj, x_plus, x_minus)


class SymmetricVrEstimator(Estimator):
    regime = Regime.VR_SYMMETRIC

    def __init__(self, b: int, epoch_len: int) -> None:
        _check_batch_size(b)
        self.b = b
        self.state = VrState(epoch_len)

    def __call__(self, obj, x_plus, x_minus, rng) -> EstimatePair:
        return vr_pair_symmetric(obj, x_plus, x_minus, self.b, self.state, rng)

    def reset(self) -> None:
        self.state.reset()


class TwoSnapshotVrEstimator(Estimator):
    regime = Regime.VR_SNAPSHOT

    def __init__(self, b: int, epoch_len: int) -> None:
        _check_batch_size(b)
        self.b = b
        self.state = VrState(epoch_len)

    def __call__(self, obj, x_plus, x_minus, rng) -> EstimatePair:
        return vr_pair_two_snapshot(obj, x_plus, x_minus, self.b, self.state, rng)

    def reset(self) -> None:
        self.state.reset()


class HelperEstimator(Estimator):
    regime = Regime.HELPER

    def __init__(self, spec: HelperSpec) -> None:
        self.spec = spec

    def __call__(self, obj, x_plus, x_minus, rng) -> EstimatePair:
        return helper_pair(obj, x_plus, x_minus, self.spec, rng)
