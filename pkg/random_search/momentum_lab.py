"""Momentum on value differences (heavy-ball, MVR, implicit transport) and the
instrumentation that shows why it does not help random search.

The momentum buffer is a scalar: it averages minibatch differences
f_B(x+) - f_B(x-), and the sign of the buffer replaces sign(M+ - M-).

Error decomposition: with D_t = f(x_t+) - f(x_t-), S_t the sampled difference,
e_t = M_t - D_t, b_t = D_t - D_{t-1} and v_t = S_t - D_t, the heavy-ball
recursion gives e_t = (1 - beta)(e_{t-1} - b_t) + beta v_t exactly. The drift
enters with a minus sign for this orientation of b_t.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .directions import DirectionDistribution, sample_direction, sample_directions
from .errors import ConfigError
from .estimators import EstimatePair, Estimator, Regime
from .objectives import FiniteSumObjective
from .planner import Plan
from .rng import TrialStreams
from .search import StopRule, decide_sign, run


class MomentumVariant(str, Enum):
    HEAVY_BALL = "heavyball"
    MVR = "mvr"
    TRANSPORT = "transport"


@dataclass
class MomentumState:
    beta: float
    variant: MomentumVariant = MomentumVariant.HEAVY_BALL
    M: Optional[float] = None
    prev_points: Optional[Tuple[np.ndarray, np.ndarray]] = None
    corrected_sign: bool = False
    t: int = 0

    def __post_init__(self) -> None:
        if not (0.0 < self.beta <= 1.0):
            raise ConfigError(f"beta must lie in (0, 1], got {self.beta}")
        self.variant = MomentumVariant(self.variant)

    @property
    def extrapolation(self) -> float:
        return (1.0 - self.beta) / self.beta

    def reset(self) -> None:
        self.M = None
        self.prev_points = None
        self.t = 0


def momentum_difference(
    state: MomentumState,
    fresh_diff: float,
    *,
    stale_diff: Optional[float] = None,
    extrapolated_diff: Optional[float] = None,
) -> float:
    """Advance the buffer with one sampled difference and return M_t.

    MVR takes ``stale_diff``, the difference at the previous trial points on the
    current batch, and adds it as written in the recursion it reproduces;
    ``corrected_sign`` subtracts it instead. Transport takes the difference at the
    extrapolated points and falls back to heavy-ball while there is no previous
    point.
    """
    beta = state.beta
    if state.M is None:
        state.M = float(fresh_diff)
    elif state.variant is MomentumVariant.HEAVY_BALL:
        state.M = (1.0 - beta) * state.M + beta * fresh_diff
    elif state.variant is MomentumVariant.MVR:
        if stale_diff is None:
            stale_diff = 0.0 if beta == 1.0 else None
        if stale_diff is None:
            raise ConfigError("MVR momentum needs the stale difference after the first step")
        stale = -stale_diff if state.corrected_sign else stale_diff
        state.M = (1.0 - beta) * (state.M + fresh_diff + stale) + beta * fresh_diff
    else:
        diff = fresh_diff if extrapolated_diff is None else extrapolated_diff
        state.M = (1.0 - beta) * state.M + beta * diff
    state.t += 1
    return state.M


class MomentumEstimator(Estimator):
    """Wraps the buffer as a search estimator returning (M_t, 0.0).

    With ``beta == 1`` no extra evaluations happen, so the run replays plain
    minibatch search exactly.
    """

    regime = Regime.MOMENTUM

    def __init__(
        self,
        variant: MomentumVariant | str,
        beta: float,
        b: int,
        *,
        corrected_sign: bool = False,
    ) -> None:
        if b < 1:
            raise ConfigError(f"Batch size must be >= 1, got {b}")
        self.b = b
        self.state = MomentumState(beta, MomentumVariant(variant), corrected_sign=corrected_sign)
        self.last_fresh: Optional[float] = None

    def reset(self) -> None:
        self.state.reset()
        self.last_fresh = None

    def __call__(self, obj, x_plus, x_minus, rng) -> EstimatePair:
        state = self.state
        idx = rng.integers(0, obj.n, size=self.b)
        fresh = obj.batch_value(idx, x_plus) - obj.batch_value(idx, x_minus)
        queries = 2 * self.b
        stale = extrapolated = None
        if state.prev_points is not None and state.beta < 1.0:
            prev_plus, prev_minus = state.prev_points
            if state.variant is MomentumVariant.MVR:
                stale = obj.batch_value(idx, prev_plus) - obj.batch_value(idx, prev_minus)
                queries += 2 * self.b
            elif state.variant is MomentumVariant.TRANSPORT:
                k = state.extrapolation
                ext_plus = x_plus + k * (x_plus - prev_plus)
                ext_minus = x_minus + k * (x_minus - prev_minus)
                extrapolated = obj.batch_value(idx, ext_plus) - obj.batch_value(idx, ext_minus)
                queries += 2 * self.b
        M = momentum_difference(state, fresh, stale_diff=stale, extrapolated_diff=extrapolated)
        state.prev_points = (np.array(x_plus, copy=True), np.array(x_minus, copy=True))
        self.last_fresh = fresh
        return EstimatePair(M, 0.0, queries, Regime.MOMENTUM)


@dataclass(frozen=True)
class ErrorDecomposition:
    e_t: float
    b_t: float
    v_t: float

    def recursion_residual(self, prev_e: float, beta: float) -> float:
        return abs(self.e_t - ((1.0 - beta) * (prev_e - self.b_t) + beta * self.v_t))


def decompose_error(
    M_t: float,
    f_plus: float,
    f_minus: float,
    prev_e: Optional[float],
    true_prev_diff: Optional[float],
    true_diff: Optional[float],
    sample_diff: float,
) -> ErrorDecomposition:
    """Split the momentum error into drift and sampling noise (exact values required).

    ``prev_e`` is accepted for symmetry with the recursion and is not needed for
    the split itself; ``true_prev_diff=None`` means there is no previous step.
    """
    diff = (f_plus - f_minus) if true_diff is None else true_diff
    drift = 0.0 if true_prev_diff is None else diff - true_prev_diff
    return ErrorDecomposition(e_t=M_t - diff, b_t=drift, v_t=sample_diff - diff)


@dataclass(frozen=True)
class DecompositionStep:
    t: int
    parts: ErrorDecomposition
    residual: Optional[float]


def trace_error_decomposition(
    obj: FiniteSumObjective,
    dist: DirectionDistribution,
    eta: float,
    beta: float,
    steps: int,
    streams: TrialStreams,
    *,
    b: int = 1,
    x0: Optional[np.ndarray] = None,
) -> List[DecompositionStep]:
    """Run heavy-ball random search while metering (e_t, b_t, v_t) and the recursion residual."""
    est = MomentumEstimator(MomentumVariant.HEAVY_BALL, beta, b)
    x = np.zeros(obj.dim) if x0 is None else np.array(x0, dtype=float, copy=True)
    prev_e: Optional[float] = None
    prev_diff: Optional[float] = None
    out: List[DecompositionStep] = []
    for t in range(steps):
        s = sample_direction(dist, streams.directions).vector
        x_plus, x_minus = x + eta * s, x - eta * s
        pair = est(obj, x_plus, x_minus, streams.estimator)
        f_plus, f_minus = obj.full_value(x_plus), obj.full_value(x_minus)
        parts = decompose_error(
            pair.m_plus, f_plus, f_minus, prev_e, prev_diff, f_plus - f_minus, est.last_fresh
        )
        residual = None if prev_e is None else parts.recursion_residual(prev_e, beta)
        out.append(DecompositionStep(t, parts, residual))
        prev_e, prev_diff = parts.e_t, f_plus - f_minus
        x = x - eta * decide_sign(pair.m_plus, pair.m_minus) * s
    return out


@dataclass(frozen=True)
class BetaRow:
    beta: float
    mean_final: float
    sd_final: float
    finals: Tuple[float, ...]


def beta_sweep(
    obj: FiniteSumObjective,
    dist: DirectionDistribution,
    plan: Plan,
    betas: Sequence[float],
    trials: int,
    seed: int,
    *,
    variant: MomentumVariant | str = MomentumVariant.HEAVY_BALL,
    x0: Optional[np.ndarray] = None,
    workers: int = 1,
    quiet: bool = True,
) -> List[BetaRow]:
    """Final f per beta under an identical query budget (2 b T) and shared trial streams."""
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    for beta in betas:
        if not (0.0 < beta <= 1.0):
            raise ConfigError(f"beta must lie in (0, 1], got {beta}")
    x_start = np.zeros(obj.dim) if x0 is None else np.asarray(x0, dtype=float)
    stop = StopRule(max_queries=2 * plan.b * max(plan.T, 1))
    jobs = [(beta, trial) for beta in betas for trial in range(trials)]

    def _one(job: Tuple[float, int]) -> float:
        beta, trial = job
        est = MomentumEstimator(variant, beta, plan.b)
        trace = run(x_start, plan, dist, est, obj, stop, TrialStreams(seed, trial))
        return trace[-1].f_true

    with ThreadPoolExecutor(max_workers=max(1, workers)) as ex:
        finals = list(
            tqdm(ex.map(_one, jobs), total=len(jobs), disable=quiet, desc="Beta sweep")
        )

    rows: List[BetaRow] = []
    for k, beta in enumerate(betas):
        vals = np.array(finals[k * trials : (k + 1) * trials])
        sd = float(vals.std(ddof=1)) if trials > 1 else 0.0
        rows.append(BetaRow(float(beta), float(vals.mean()), sd, tuple(float(v) for v in vals)))
    return rows


@dataclass(frozen=True)
class VarianceRatio:
    beta: float
    ratio: float
    std_error: float
    plain_variance: float
    extrapolated_variance: float


def transport_variance_ratio(
    obj: FiniteSumObjective,
    x: np.ndarray,
    beta: float,
    eta: float,
    b: int,
    reps: int,
    rng: np.random.Generator,
    *,
    dist: Optional[DirectionDistribution] = None,
    directions: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> VarianceRatio:
    """Var over batches of the extrapolated difference divided by Var of the plain one.

    The geometry is one step: previous trial points around ``x + eta s_prev``,
    current ones around ``x``; both differences share each batch.
    """
    if not (0.0 < beta <= 1.0):
        raise ConfigError(f"beta must lie in (0, 1], got {beta}")
    if reps < 2:
        raise ConfigError("reps must be >= 2")
    dist = dist if dist is not None else DirectionDistribution("sphere", obj.dim)
    if directions is None:
        s, s_prev = sample_directions(dist, rng, 2)
    else:
        s, s_prev = directions
    x = np.asarray(x, dtype=float)
    x_prev = x + eta * s_prev
    x_plus, x_minus = x + eta * s, x - eta * s
    p_plus, p_minus = x_prev + eta * s_prev, x_prev - eta * s_prev
    k = (1.0 - beta) / beta
    e_plus, e_minus = x_plus + k * (x_plus - p_plus), x_minus + k * (x_minus - p_minus)

    plain = obj.component_values(None, x_plus) - obj.component_values(None, x_minus)
    extra = obj.component_values(None, e_plus) - obj.component_values(None, e_minus)
    idx = rng.integers(0, obj.n, size=(reps, b))
    plain_means = plain[idx].mean(axis=1)
    extra_means = extra[idx].mean(axis=1)
    var_plain = float(plain_means.var(ddof=1))
    var_extra = float(extra_means.var(ddof=1))
    if var_plain == 0.0:
        raise ConfigError("Plain difference has zero variance; use a noisy objective")
    ratio = var_extra / var_plain
    # delta-method standard error of a ratio of sample variances
    se = ratio * math.sqrt(4.0 / (reps - 1))
    return VarianceRatio(float(beta), ratio, se, var_plain, var_extra)
