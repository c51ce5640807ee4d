"""Executable checks of the descent, variance and error-scaling properties.

Each check returns a :class:`CheckReport`; composite checks carry their
sub-measurements in ``parts``. Bound checks allow ``TOLERANCES.std_errors``
standard errors of Monte Carlo slack, slope checks are ordinary least squares
on log-log grids.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import linregress

from .constants import TOLERANCES, Tolerances
from .datasets import load_objective
from .directions import (
    DirectionDistribution,
    estimate_mu,
    sample_directions,
    second_moment_projection_with_error,
)
from .errors import CapViolationError, ConfigError
from .estimators import (
    EstimatePair,
    ExactEstimator,
    HelperEstimator,
    HelperSpec,
    Regime,
    VrState,
    control_variate_pair,
    grid_min_shift_residual,
    translation_gap,
)
from .objectives import FiniteSumObjective, estimate_constants, make_quadratic
from .planner import Plan
from .rng import TrialStreams, spawn_stream
from .search import decide_sign, run

logger = logging.getLogger(__name__)

PASSED = "passed"
FAILED = "failed"
INCONCLUSIVE = "inconclusive"
ADVISORY = "advisory"


@dataclass(frozen=True)
class CheckReport:
    name: str
    measured: float
    target: float
    passed: bool
    samples_used: int
    status: str = PASSED
    detail: str = ""
    parts: Tuple["CheckReport", ...] = field(default_factory=tuple)


def _report(
    name: str,
    measured: float,
    target: float,
    ok: bool,
    samples: int,
    detail: str = "",
    parts: Sequence[CheckReport] = (),
    status: Optional[str] = None,
) -> CheckReport:
    if status is None:
        status = PASSED if ok else FAILED
    return CheckReport(
        name, float(measured), float(target), bool(ok), int(samples), status, detail, tuple(parts)
    )


def _composite(name: str, parts: Sequence[CheckReport], detail: str = "") -> CheckReport:
    ok = all(p.passed for p in parts)
    samples = sum(p.samples_used for p in parts)
    status = PASSED if ok else FAILED
    if any(p.status == INCONCLUSIVE for p in parts):
        status = INCONCLUSIVE
    head = parts[0]
    return CheckReport(name, head.measured, head.target, ok, samples, status, detail, tuple(parts))


def flatten_reports(reports: Sequence[CheckReport]) -> List[Dict]:
    """One row per report and per part (named ``check:part``) for CSV output."""
    rows: List[Dict] = []
    for rep in reports:
        rows.append(_row(rep.name, rep))
        for part in rep.parts:
            rows.append(_row(f"{rep.name}:{part.name}", part))
    return rows


def _row(name: str, rep: CheckReport) -> Dict:
    return {
        "check": name,
        "measured": rep.measured,
        "target": rep.target,
        "passed": rep.passed,
        "samples": rep.samples_used,
        "status": rep.status,
    }


def _require_slope_points(check: str, label: str, count: int, tolerances: Tolerances) -> None:
    if count < tolerances.min_slope_points:
        raise ConfigError(
            f"{check} needs at least {tolerances.min_slope_points} {label} for a slope fit, "
            f"got {count}"
        )


def _slope_part(name: str, xs, ys, target: float, tol: float, samples: int) -> CheckReport:
    fit = linregress(np.log(xs), np.log(ys))
    ok = abs(fit.slope - target) <= tol
    return _report(name, fit.slope, target, ok, samples, f"tolerance +/-{tol}")


# -- translation invariance and direction constants ---------------------------------


def check_translation_invariance(
    tuples: int, rng: np.random.Generator, *, step: float = 1e-4, scale: float = 4.0
) -> CheckReport:
    """Grid-minimized shifted error equals twice the translation gap; signs ignore shifts."""
    worst = 0.0
    sign_mismatches = 0
    for _ in range(tuples):
        m_plus, m_minus, f_plus, f_minus = rng.uniform(-scale, scale, size=4)
        pair = EstimatePair(m_plus, m_minus, 0, Regime.EXACT)
        best, _ = grid_min_shift_residual(m_plus, m_minus, f_plus, f_minus, step=step)
        worst = max(worst, abs(best - 2.0 * translation_gap(pair, f_plus, f_minus)))
        c = rng.uniform(-10.0, 10.0)
        if decide_sign(m_plus + c, m_minus + c) != decide_sign(m_plus, m_minus):
            sign_mismatches += 1
    identity = _report("grid_identity", worst, step, worst <= step, tuples)
    signs = _report("sign_shift", sign_mismatches, 0, sign_mismatches == 0, tuples)
    return _composite("translation_invariance", [identity, signs])


def check_mu_scaling(
    dims: Sequence[int],
    samples: int,
    rng: np.random.Generator,
    tolerances: Tolerances = TOLERANCES,
) -> CheckReport:
    """mu_D sqrt(d) on the sphere is roughly constant; spread = max |v - mean| / mean."""
    scaled = []
    for d in dims:
        dist = DirectionDistribution("sphere", d)
        scaled.append(estimate_mu(dist, np.eye(d)[0], samples, rng) * math.sqrt(d))
    scaled = np.array(scaled)
    spread = float(np.max(np.abs(scaled - scaled.mean())) / scaled.mean())
    detail = ", ".join(f"d={d}: {v:.4f}" for d, v in zip(dims, scaled))
    return _report(
        "mu_scaling",
        spread,
        tolerances.mu_relative_spread,
        spread <= tolerances.mu_relative_spread,
        samples * len(dims),
        detail,
    )


def check_sphere_projection(
    dims: Sequence[int], samples: int, rng: np.random.Generator, *, rel_tol: float = 0.01
) -> CheckReport:
    """E<v, u>^2 = ||v||^2 / d on the sphere, relative error per dimension."""
    worst = 0.0
    for d in dims:
        v = rng.standard_normal(d)
        est, _ = second_moment_projection_with_error(
            DirectionDistribution("sphere", d), v, samples, rng
        )
        exact = float(v @ v) / d
        worst = max(worst, abs(est - exact) / exact)
    return _report("sphere_projection", worst, rel_tol, worst <= rel_tol, samples * len(dims))


# -- descent ------------------------------------------------------------------------


def check_descent_lemma(
    obj: FiniteSumObjective,
    dist: DirectionDistribution,
    eta: float,
    x: np.ndarray,
    reps: int,
    rng: np.random.Generator,
    *,
    L0: Optional[float] = None,
    L1: Optional[float] = None,
    mu_D: Optional[float] = None,
    tolerances: Tolerances = TOLERANCES,
) -> CheckReport:
    """One exact-estimator step: E f(x1) <= f(x) - (mu/2) eta ||g|| + ((L0 + L1 ||g||)/2) eta^2."""
    x = np.asarray(x, dtype=float)
    if L0 is None or L1 is None:
        consts = estimate_constants(obj, 16, rng, x0=x)
        L0 = consts.L0 if L0 is None else L0
        L1 = consts.L1 if L1 is None else L1
    grad = obj.full_gradient(x)
    g_norm = float(np.linalg.norm(grad))
    if mu_D is None:
        ref = grad if g_norm > 0 else np.eye(obj.dim)[0]
        mu_D = estimate_mu(dist, ref, 100_000, rng)
    if L1 > 0 and eta > mu_D / L1:
        raise CapViolationError(
            f"Step size {eta} exceeds the descent cap mu_D / L1 = {mu_D / L1:.6g}; "
            "the bound is not claimed there"
        )
    s = sample_directions(dist, rng, reps)
    f_plus = obj.full_values(x + eta * s)
    f_minus = obj.full_values(x - eta * s)
    f_next = np.where(f_plus - f_minus >= 0, f_minus, f_plus)
    f_x = float(obj.full_values(x[None, :])[0])
    bound = f_x - 0.5 * mu_D * eta * g_norm + 0.5 * (L0 + L1 * g_norm) * eta**2
    mean = float(f_next.mean())
    se = float(f_next.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    slack = tolerances.std_errors * se + 1e-12 * (1.0 + abs(f_x))
    return _report(
        "descent_lemma",
        mean,
        bound,
        mean <= bound + slack,
        reps,
        f"f(x)={f_x:.6g}, ||grad||={g_norm:.4g}, se={se:.3g}",
    )


# -- minibatch variance ---------------------------------------------------------------


def exhaustive_batch_moments(values: np.ndarray, b: int) -> Tuple[float, float]:
    """Exact mean and variance of the batch mean over all n^b ordered batches."""
    values = np.asarray(values, dtype=float)
    combos = itertools.product(range(values.size), repeat=b)
    means = np.array([values[list(combo)].mean() for combo in combos])
    return float(means.mean()), float(means.var())


def batch_mean_variance(
    values: np.ndarray, b: int, reps: int, rng: np.random.Generator, *, full_pass: bool = False
) -> float:
    if full_pass:
        return 0.0
    idx = rng.integers(0, values.size, size=(reps, b))
    return float(values[idx].mean(axis=1).var(ddof=1))


def check_variance_lemma(
    obj: FiniteSumObjective,
    x: np.ndarray,
    b_grid: Sequence[int],
    reps: int,
    rng: np.random.Generator,
    *,
    max_enumeration: int = 100_000,
    tolerances: Tolerances = TOLERANCES,
) -> CheckReport:
    """Var of a with-replacement batch mean is Var(single) / b."""
    if reps < 1000:
        raise ConfigError(f"Variance check needs reps >= 1000, got {reps}")
    values = obj.component_values(None, np.asarray(x, dtype=float))
    var_single = float(values.var())
    if var_single == 0.0:
        return _report(
            "variance_lemma", 0.0, tolerances.variance_slope, True, 0, "constant components"
        )
    parts: List[CheckReport] = []
    if obj.n <= 6:
        worst = 0.0
        enumerated = 0
        for b in b_grid:
            if obj.n**b > max_enumeration:
                continue
            mean, var = exhaustive_batch_moments(values, b)
            worst = max(worst, abs(var - var_single / b) / var_single, abs(mean - values.mean()))
            enumerated += obj.n**b
        if enumerated:
            parts.append(_report("exhaustive", worst, 0.0, worst <= 1e-9, enumerated))
    if len(b_grid) >= 2:
        _require_slope_points("Variance check", "batch sizes", len(b_grid), tolerances)
        variances = [batch_mean_variance(values, b, reps, rng) for b in b_grid]
        parts.append(
            _slope_part(
                "slope",
                b_grid,
                variances,
                tolerances.variance_slope,
                tolerances.variance_slope_tol,
                reps * len(b_grid),
            )
        )
    if not parts:
        raise ConfigError("Variance check needs n <= 6 or at least two batch sizes")
    return _composite("variance_lemma", parts, f"Var(single)={var_single:.6g}")


def check_case1_value_error(
    obj: FiniteSumObjective,
    x: np.ndarray,
    b_grid: Sequence[int],
    reps: int,
    rng: np.random.Generator,
    *,
    sigma0: float,
    sigma_known: bool,
) -> CheckReport:
    """E|M - f(x)| <= sigma0 / sqrt(b); advisory when sigma0 is only an estimate."""
    x = np.asarray(x, dtype=float)
    values = obj.component_values(None, x)
    f_x = float(values.mean())
    worst = -math.inf
    for b in b_grid:
        idx = rng.integers(0, obj.n, size=(reps, b))
        err = float(np.mean(np.abs(values[idx].mean(axis=1) - f_x)))
        bound = sigma0 / math.sqrt(b) * (1.0 + 3.0 / math.sqrt(reps))
        worst = max(worst, err / bound if bound > 0 else math.inf)
    ok = worst <= 1.0
    status = None if sigma_known else ADVISORY
    return _report(
        "case1_value_error", worst, 1.0, ok, reps * len(b_grid),
        "ratio of measured error to sigma0/sqrt(b)", status=status,
    )


def check_common_random_numbers(
    obj: FiniteSumObjective,
    x: np.ndarray,
    eta: float,
    b: int,
    reps: int,
    rng: np.random.Generator,
    *,
    dist: Optional[DirectionDistribution] = None,
) -> CheckReport:
    """Var(M+ - M-) with a shared batch is no larger than with independent batches."""
    dist = dist if dist is not None else DirectionDistribution("sphere", obj.dim)
    s = sample_directions(dist, rng, 1)[0]
    x = np.asarray(x, dtype=float)
    v_plus = obj.component_values(None, x + eta * s)
    v_minus = obj.component_values(None, x - eta * s)
    idx = rng.integers(0, obj.n, size=(reps, b))
    other = rng.integers(0, obj.n, size=(reps, b))
    shared = (v_plus[idx] - v_minus[idx]).mean(axis=1)
    independent = v_plus[idx].mean(axis=1) - v_minus[other].mean(axis=1)
    var_shared = float(shared.var(ddof=1))
    var_indep = float(independent.var(ddof=1))
    return _report("common_random_numbers", var_shared, var_indep, var_shared <= var_indep, reps)


# -- gradient-noise projection ------------------------------------------------------------


def projection_error(
    grads: np.ndarray,
    b: int,
    reps: int,
    dist: DirectionDistribution,
    rng: np.random.Generator,
    *,
    full_pass: bool = False,
    chunk_elems: int = 2_000_000,
) -> float:
    """E|<batch-mean gradient - full gradient, s>| over batches and directions."""
    if full_pass:
        return 0.0
    n, d = grads.shape
    mean_grad = grads.mean(axis=0)
    total = 0.0
    done = 0
    per = max(1, chunk_elems // max(1, b * d))
    while done < reps:
        k = min(per, reps - done)
        idx = rng.integers(0, n, size=(k, b))
        noise = grads[idx].mean(axis=1) - mean_grad
        s = sample_directions(dist, rng, k)
        total += float(np.abs(np.einsum("ij,ij->i", noise, s)).sum())
        done += k
    return total / reps


def make_projection_family(
    d_grid: Sequence[int], n: int, sigma1: float, rng: np.random.Generator
) -> Dict[int, FiniteSumObjective]:
    """Noisy quadratics with gradient-noise level sigma1 in every dimension."""
    return {d: make_quadratic(np.ones(d), sigma1 / math.sqrt(d), n, rng) for d in d_grid}


def check_case2_projection(
    objectives: FiniteSumObjective | Mapping[int, FiniteSumObjective],
    b_grid: Sequence[int],
    reps: int,
    rng: np.random.Generator,
    *,
    x: Optional[np.ndarray] = None,
    tolerances: Tolerances = TOLERANCES,
) -> CheckReport:
    """E|<M - grad f(x), s>| scales as 1/sqrt(d b): slope -1/2 in log b and in log d."""
    if isinstance(objectives, FiniteSumObjective):
        objectives = {objectives.dim: objectives}
    dims = sorted(objectives)
    table: Dict[Tuple[int, int], float] = {}
    for d in dims:
        obj = objectives[d]
        point = np.zeros(d) if x is None or len(x) != d else np.asarray(x, dtype=float)
        grads = obj.component_gradients(None, point)
        dist = DirectionDistribution("sphere", d)
        for b in b_grid:
            table[(d, b)] = projection_error(grads, b, reps, dist, rng)
    parts: List[CheckReport] = []
    target, tol = tolerances.projection_slope, tolerances.projection_slope_tol
    if len(b_grid) >= 2:
        _require_slope_points("Projection check", "batch sizes", len(b_grid), tolerances)
        for d in dims:
            parts.append(
                _slope_part(
                    f"slope_b[d={d}]",
                    b_grid,
                    [table[(d, b)] for b in b_grid],
                    target,
                    tol,
                    reps * len(b_grid),
                )
            )
    if len(dims) >= 2:
        _require_slope_points("Projection check", "dimensions", len(dims), tolerances)
        for b in b_grid:
            parts.append(
                _slope_part(
                    f"slope_d[b={b}]",
                    dims,
                    [table[(d, b)] for d in dims],
                    target,
                    tol,
                    reps * len(dims),
                )
            )
    if not parts:
        raise ConfigError("Projection check needs at least two batch sizes or two dimensions")
    return _composite("case2_projection", parts)


# -- variance-reduced error scaling ---------------------------------------------------------


@dataclass(frozen=True)
class VrGeometry:
    """Base point, search direction and independent unit drifts of the two trial points."""

    base: np.ndarray
    s: np.ndarray
    w_plus: np.ndarray
    w_minus: np.ndarray

    def points(self, eta: float, m: int):
        snap_plus = self.base + eta * self.s
        snap_minus = self.base - eta * self.s
        drift = eta * m
        x_plus = snap_plus + drift * self.w_plus
        x_minus = snap_minus + drift * self.w_minus
        return x_plus, x_minus, snap_plus, snap_minus


def vr_geometry(dim: int, rng: np.random.Generator, *, base_scale: float = 0.5) -> VrGeometry:
    sphere = DirectionDistribution("sphere", dim)
    s, w_plus, w_minus = sample_directions(sphere, rng, 3)
    base = base_scale * rng.standard_normal(dim) / math.sqrt(dim)
    return VrGeometry(base, s, w_plus, w_minus)


def component_lipschitz(obj: FiniteSumObjective, points: Sequence[np.ndarray]) -> float:
    """Largest component-gradient norm seen at ``points`` (a lower estimate of G)."""
    norms = (np.linalg.norm(obj.component_gradients(None, p), axis=1) for p in points)
    return max(float(np.max(v)) for v in norms)


def vr_mean_abs_error(
    obj: FiniteSumObjective,
    eta: float,
    m: int,
    b: int,
    reps: int,
    rng: np.random.Generator,
    geometry: VrGeometry,
) -> Tuple[float, float]:
    """Mean and standard error of |Delta| for a frozen two-snapshot state drifted by eta m."""
    x_plus, x_minus, snap_plus, snap_minus = geometry.points(eta, m)
    state = VrState(epoch_len=m + 1, iter_in_epoch=1)
    state.refresh(snap_plus, snap_minus, obj.full_value(snap_plus), obj.full_value(snap_minus))
    true_diff = obj.full_value(x_plus) - obj.full_value(x_minus)
    errs = np.empty(reps)
    for k in range(reps):
        pair = control_variate_pair(obj, x_plus, x_minus, b, state, rng)
        errs[k] = abs(pair.difference - true_diff)
    return float(errs.mean()), float(errs.std(ddof=1) / math.sqrt(reps))


def check_vr_error_scaling(
    obj: FiniteSumObjective,
    eta: float,
    m_grid: Sequence[int],
    b_grid: Sequence[int],
    reps: int,
    rng: np.random.Generator,
    *,
    eta_grid: Optional[Sequence[float]] = None,
    tolerances: Tolerances = TOLERANCES,
) -> CheckReport:
    """Mid-epoch error E|Delta| grows like eta m / sqrt(b) and stays under 4 eta G m / sqrt(b)."""
    eta_grid = list(eta_grid) if eta_grid is not None else [eta / 2, eta, 2 * eta, 4 * eta]
    grids = {"epoch lengths": m_grid, "batch sizes": b_grid, "step sizes": eta_grid}
    for label, grid in grids.items():
        _require_slope_points("VR check", label, len(grid), tolerances)
    geometry = vr_geometry(obj.dim, rng)
    cells: Dict[Tuple[int, int], float] = {}
    for m in m_grid:
        for b in b_grid:
            cells[(m, b)] = vr_mean_abs_error(obj, eta, m, b, reps, rng, geometry)[0]

    keys = list(cells)
    design = np.column_stack(
        [np.ones(len(keys)), np.log([k[0] for k in keys]), np.log([k[1] for k in keys])]
    )
    coef, *_ = np.linalg.lstsq(design, np.log([cells[k] for k in keys]), rcond=None)
    slope_m, slope_b = float(coef[1]), float(coef[2])
    samples = reps * len(keys)
    m_ok = abs(slope_m - 1.0) <= tolerances.vr_linear_slope_tol
    b_ok = abs(slope_b + 0.5) <= tolerances.vr_batch_slope_tol
    parts = [
        _report("slope_m", slope_m, 1.0, m_ok, samples),
        _report("slope_b", slope_b, -0.5, b_ok, samples),
    ]

    m_mid, b_mid = m_grid[len(m_grid) // 2], b_grid[len(b_grid) // 2]
    eta_errs = [vr_mean_abs_error(obj, e, m_mid, b_mid, reps, rng, geometry)[0] for e in eta_grid]
    parts.append(
        _slope_part(
            "slope_eta",
            eta_grid,
            eta_errs,
            1.0,
            tolerances.vr_linear_slope_tol,
            reps * len(eta_grid),
        )
    )

    probe = []
    for m in m_grid:
        for p in geometry.points(eta, m):
            probe.append(p)
    G = component_lipschitz(obj, probe)
    within = sum(cells[(m, b)] <= 4.0 * eta * G * m / math.sqrt(b) for (m, b) in keys)
    fraction = within / len(keys)
    target = tolerances.vr_cell_fraction
    parts.append(
        _report("bound_fraction", fraction, target, fraction >= target, samples, f"G={G:.4g}")
    )
    return _composite("vr_error_scaling", parts)


# -- helper floor -------------------------------------------------------------------------


@dataclass(frozen=True)
class FloorMeasurement:
    delta: float
    eta: float
    floor: float
    previous: float

    @property
    def settled(self) -> bool:
        return self.previous <= 1.3 * self.floor


def _decile_means(values: Sequence[float]) -> Tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    k = max(1, arr.size // 10)
    last = float(arr[-k:].mean())
    prev = float(arr[-2 * k : -k].mean()) if arr.size >= 2 * k else last
    return last, prev


def helper_step_size(delta: float, L0: float, L1: float, mu_D: float) -> float:
    eta = math.sqrt(2.0 * delta / L0)
    if L1 > 0:
        eta = min(eta, mu_D / L1)
    return eta


def check_helper_floor(
    obj: FiniteSumObjective,
    dist: DirectionDistribution,
    deltas: Sequence[float],
    plan: Plan,
    trials: int,
    seed: int,
    *,
    x0: Optional[np.ndarray] = None,
    L0: Optional[float] = None,
    L1: float = 0.0,
    mu_D: Optional[float] = None,
    mode: str = "uniform",
    tolerances: Tolerances = TOLERANCES,
) -> CheckReport:
    """Floor of ||grad f|| (last-decile mean) against delta: slope 1/2 in log-log.

    Each delta > 0 runs ``plan.T`` iterations at eta = sqrt(2 delta / L0); delta = 0
    is compared step for step with the exact estimator at ``plan.eta``.
    """
    if trials < 1:
        raise ConfigError(f"trials must be >= 1, got {trials}")
    positive = sum(1 for delta in deltas if delta > 0)
    if positive >= 2:
        _require_slope_points("Helper floor check", "positive deltas", positive, tolerances)
    start = np.zeros(obj.dim) if x0 is None else np.asarray(x0, dtype=float)
    if L0 is None:
        L0 = estimate_constants(obj, 16, spawn_stream(seed, 0, "diagnostics"), x0=start).L0
    if mu_D is None:
        mu_rng = spawn_stream(seed, 1, "diagnostics")
        mu_D = estimate_mu(dist, np.eye(obj.dim)[0], 100_000, mu_rng)

    parts: List[CheckReport] = []
    measurements: List[FloorMeasurement] = []
    for delta in deltas:
        spec = HelperSpec(delta, mode)
        if delta == 0:
            helper_est = HelperEstimator(spec)
            helper_run = run(start, plan, dist, helper_est, obj, None, TrialStreams(seed))
            exact_run = run(start, plan, dist, ExactEstimator(), obj, None, TrialStreams(seed))
            helper = [r.f_true for r in helper_run]
            exact = [r.f_true for r in exact_run]
            same = helper == exact
            parts.append(_report("zero_delta_matches_exact", float(same), 1.0, same, len(helper)))
            continue
        eta = helper_step_size(delta, L0, L1, mu_D)
        run_plan = Plan(eta=eta, T=plan.T)
        lasts, prevs = [], []
        for trial in range(trials):
            trace = run(
                start,
                run_plan,
                dist,
                HelperEstimator(spec),
                obj,
                None,
                TrialStreams(seed, trial),
                record_gradient=True,
            )
            last, prev = _decile_means([r.grad_norm for r in trace[1:]])
            lasts.append(last)
            prevs.append(prev)
        floor, previous = float(np.mean(lasts)), float(np.mean(prevs))
        measurements.append(FloorMeasurement(delta, eta, floor, previous))

    detail = "; ".join(f"delta={m.delta:g}: floor={m.floor:.4g}" for m in measurements)
    if len(measurements) >= 2:
        slope = _slope_part(
            "slope",
            [m.delta for m in measurements],
            [m.floor for m in measurements],
            tolerances.helper_slope,
            tolerances.helper_slope_tol,
            trials * plan.T * len(measurements),
        )
        if not all(m.settled for m in measurements):
            slope = CheckReport(
                slope.name, slope.measured, slope.target, slope.passed, slope.samples_used,
                INCONCLUSIVE, "floor still decreasing; raise the iteration budget",
            )
            logger.warning("Helper floor check inconclusive: %s", detail)
        parts.insert(0, slope)
    elif measurements:
        m = measurements[0]
        parts.insert(0, _report("floor", m.floor, 0.0, math.isfinite(m.floor), trials * plan.T))
    if not parts:
        raise ConfigError("Helper floor check needs at least one delta")
    return _composite("helper_floor", parts, detail)


# -- bundle for the verify command ---------------------------------------------------------


def run_all_checks(seed: int = 0, *, quick: bool = True) -> List[CheckReport]:
    """The full battery on a synthetic logistic task and constructed quadratics."""
    scale = 1 if quick else 10
    streams = [spawn_stream(seed, k, "diagnostics") for k in range(12)]
    logistic = load_objective("synthetic", seed=seed)
    quad = make_quadratic(np.linspace(0.5, 2.0, 10), 0.5, 200, streams[0])
    sphere10 = DirectionDistribution("sphere", 10)
    x_logistic = 0.3 * streams[1].standard_normal(logistic.dim) / math.sqrt(logistic.dim)
    unit = np.eye(10)[0]

    reports = [
        check_translation_invariance(100 * scale, streams[2]),
        check_sphere_projection((2, 3, 30), 1_000_000, streams[3]),
        check_mu_scaling((2, 8, 32, 128), 1_000_000, streams[4]),
        check_variance_lemma(
            logistic, x_logistic, (1, 2, 4, 8, 16, 32, 64), 1000 * scale, streams[5]
        ),
        check_case1_value_error(
            quad, unit, (1, 4, 16, 64), 1000 * scale, streams[6], sigma0=0.5, sigma_known=True
        ),
        check_descent_lemma(quad, sphere10, 0.01, unit, 1000 * scale, streams[7], L0=2.0, L1=0.0),
        check_case2_projection(
            make_projection_family((2, 4, 8, 16, 32), 200, 1.0, streams[8]),
            (4, 16, 64, 256), 500 * scale, streams[8],
        ),
        check_vr_error_scaling(
            logistic, 0.005, (2, 4, 8, 16), (4, 16, 64, 256), 200 * scale, streams[9]
        ),
        check_common_random_numbers(logistic, x_logistic, 0.01, 10, 1000 * scale, streams[10]),
    ]
    helper_obj = make_quadratic(np.ones(30), 0.0, 1, streams[11])
    x0 = np.full(30, 1.0 / math.sqrt(30))
    reports.append(
        check_helper_floor(
            helper_obj,
            DirectionDistribution("sphere", 30),
            (0.0, 1e-4, 1e-3, 1e-2, 1e-1),
            Plan(eta=0.01, T=3000),
            1 if quick else 3,
            seed,
            x0=x0,
            L0=1.0,
        )
    )
    return reports
