"""Budgeted multi-trial experiments on the logistic benchmark.

Trials run through a thread pool (``workers``), each with its own seeded
streams and estimator, so results do not depend on the worker count. Files are
written on the calling thread after all trials finish.
"""

from __future__ import annotations

import dataclasses
import functools
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .baselines import SmoothingParams, default_mu_fd, run_baseline
from .constants import (
    BENCHMARK_SEPARATION,
    CHECKPOINTS,
    DEFAULT_BATCH,
    DEFAULT_BETA,
    DEFAULT_BUDGET,
    DEFAULT_EPOCH,
    DEFAULT_LAMBDA,
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    DIRECTION_KINDS,
    METHODS,
    OUTPUT_DIR,
    PANEL_ITERS,
    PILOT_FRACTION,
    PILOT_GRID,
)
from .datasets import load_objective
from .directions import DirectionDistribution
from .errors import ConfigError, NumericalAbortError, PilotError
from .estimators import (
    ExactEstimator,
    Estimator,
    HelperEstimator,
    HelperSpec,
    MinibatchEstimator,
    SymmetricVrEstimator,
    TwoSnapshotVrEstimator,
)
from .momentum_lab import MomentumEstimator
from .objectives import FiniteSumObjective
from .planner import Plan
from .rng import MAIN_NAMESPACE, PILOT_NAMESPACE, TrialStreams
from .search import RunRecord, StopRule, run
from .storage import (
    aggregate_csv_path,
    ensure_output_dir,
    save_manifest,
    trial_csv_path,
    write_curve_csv,
    write_rows,
    write_trace_csv,
)

logger = logging.getLogger(__name__)

BASELINES = ("rsgf", "zocd")
SWEEP_SUMMARY = "sweep_summary.csv"
PLOT_SCRIPT = "plot_curves.py"


@dataclass
class ExperimentConfig:
    method: str = "mi2p"
    batch: int = DEFAULT_BATCH
    budget: int = DEFAULT_BUDGET
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED
    dataset: str = "synthetic"
    separation: float = BENCHMARK_SEPARATION
    lam: float = DEFAULT_LAMBDA
    direction: str = "sphere"
    eta: Optional[float] = None
    mu_fd: Optional[float] = None
    epoch: int = DEFAULT_EPOCH
    delta: float = 0.0
    helper_mode: str = "uniform"
    beta: float = DEFAULT_BETA
    corrected_sign: bool = False
    standardize: bool = True
    checkpoints: int = CHECKPOINTS
    pilot_grid: Tuple[float, ...] = PILOT_GRID
    pilot_fraction: float = PILOT_FRACTION
    workers: int = 1
    out: Path = OUTPUT_DIR

    def validate(self) -> "ExperimentConfig":
        if self.method not in METHODS:
            expected = ", ".join(METHODS)
            raise ConfigError(f"Unknown method '{self.method}' (expected one of: {expected})")
        if self.direction not in DIRECTION_KINDS:
            raise ConfigError(f"Unknown direction '{self.direction}'")
        if self.separation < 0:
            raise ConfigError(f"separation must be >= 0, got {self.separation}")
        if self.budget <= 0:
            raise ConfigError(f"budget must be > 0, got {self.budget}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.batch < 1:
            raise ConfigError(f"batch must be >= 1, got {self.batch}")
        if self.epoch < 1:
            raise ConfigError(f"epoch length m must be >= 1, got {self.epoch}")
        if self.eta is not None and not self.eta > 0:
            raise ConfigError(f"eta must be > 0 or 'pilot', got {self.eta}")
        if self.mu_fd is not None and not self.mu_fd > 0:
            raise ConfigError(f"mu_fd must be > 0, got {self.mu_fd}")
        if self.delta < 0:
            raise ConfigError(f"delta must be >= 0, got {self.delta}")
        if not (0 < self.beta <= 1):
            raise ConfigError(f"beta must lie in (0, 1], got {self.beta}")
        if self.checkpoints < 2:
            raise ConfigError(f"checkpoints must be >= 2, got {self.checkpoints}")
        if not self.pilot_grid:
            raise ConfigError("pilot_grid must not be empty")
        if not (0 < self.pilot_fraction <= 1):
            raise ConfigError(f"pilot_fraction must lie in (0, 1], got {self.pilot_fraction}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        return self

    def to_manifest(self) -> Dict[str, Any]:
        data = asdict(self)
        data["out"] = str(self.out)
        data["pilot_grid"] = list(self.pilot_grid)
        return data


# -- config file + overrides -------------------------------------------------------------


def _parse_bool(raw: str) -> bool:
    value = raw.strip().lower()
    if value in {"1", "true", "yes", "on"}:
        return True
    if value in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_eta(raw: str) -> Optional[float]:
    return None if raw.strip().lower() == "pilot" else float(raw)


def _parse_optional_float(raw: str) -> Optional[float]:
    return None if raw.strip().lower() in {"", "none", "default"} else float(raw)


def _parse_grid(raw: str) -> Tuple[float, ...]:
    return tuple(float(v) for v in raw.replace(",", " ").split())


_PARSERS: Dict[str, Callable[[str], Any]] = {
    "method": str,
    "batch": int,
    "budget": int,
    "trials": int,
    "seed": int,
    "dataset": str,
    "separation": float,
    "lam": float,
    "direction": str,
    "eta": _parse_eta,
    "mu_fd": _parse_optional_float,
    "epoch": int,
    "delta": float,
    "helper_mode": str,
    "beta": float,
    "corrected_sign": _parse_bool,
    "standardize": _parse_bool,
    "checkpoints": int,
    "pilot_grid": _parse_grid,
    "pilot_fraction": float,
    "workers": int,
    "out": Path,
}
_ALIASES = {"lambda": "lam", "m": "epoch", "b": "batch"}


def _canonical_key(key: str) -> str:
    key = key.strip().replace("-", "_")
    return _ALIASES.get(key, key)


def load_config_file(path: Path | str) -> Dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    values: Dict[str, str] = {}
    for line_no, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{line_no}: expected 'key = value', got {line.strip()!r}")
        key, value = text.split("=", 1)
        values[_canonical_key(key)] = value.strip()
    return values


def build_config(
    file_values: Optional[Mapping[str, Any]] = None, overrides: Optional[Mapping[str, Any]] = None
) -> ExperimentConfig:
    """Defaults, then the config file, then overrides (flags win).

    ``None`` overrides are ignored so unset CLI flags fall through.
    """
    merged: Dict[str, Any] = {}
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            merged[_canonical_key(key)] = value
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(merged) - known)
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
    kwargs: Dict[str, Any] = {}
    for key, value in merged.items():
        if isinstance(value, str) and key not in {"method", "dataset", "direction", "helper_mode"}:
            try:
                value = _PARSERS[key](value)
            except ValueError as exc:
                raise ConfigError(f"Bad value for '{key}': {exc}") from None
        kwargs[key] = value
    if "pilot_grid" in kwargs:
        kwargs["pilot_grid"] = tuple(float(v) for v in kwargs["pilot_grid"])
    if "out" in kwargs:
        kwargs["out"] = Path(kwargs["out"])
    return ExperimentConfig(**kwargs).validate()


# -- single trials -------------------------------------------------------------------------


def objective_for(config: ExperimentConfig) -> FiniteSumObjective:
    return load_objective(
        config.dataset,
        lam=config.lam,
        seed=config.seed,
        standardize_features=config.standardize,
        separation=config.separation,
    )


def make_estimator(config: ExperimentConfig) -> Estimator:
    method = config.method
    if method == "mi2p":
        return MinibatchEstimator(config.batch)
    if method == "exact":
        return ExactEstimator()
    if method == "vr_mi2p":
        return SymmetricVrEstimator(config.batch, config.epoch)
    if method == "vr_snap":
        return TwoSnapshotVrEstimator(config.batch, config.epoch)
    if method == "helper":
        return HelperEstimator(HelperSpec(config.delta, config.helper_mode))
    if method.startswith("momentum_"):
        variant = method.split("_", 1)[1]
        return MomentumEstimator(
            variant, config.beta, config.batch, corrected_sign=config.corrected_sign
        )
    raise ConfigError(f"Method '{method}' is not a random-search estimator")


def run_trial(
    config: ExperimentConfig,
    obj: FiniteSumObjective,
    eta: float,
    trial: int,
    *,
    budget: Optional[int] = None,
    namespace: int = MAIN_NAMESPACE,
    x0: Optional[np.ndarray] = None,
) -> List[RunRecord]:
    """One seeded trial from ``x0`` (the origin by default) until the budget is spent."""
    streams = TrialStreams(config.seed, trial, namespace)
    x0 = np.zeros(obj.dim) if x0 is None else np.asarray(x0, dtype=float)
    stop = StopRule(max_queries=budget if budget is not None else config.budget)
    if config.method in BASELINES:
        mu_fd = config.mu_fd if config.mu_fd is not None else default_mu_fd(obj.dim)
        params = SmoothingParams(mu_fd, eta)
        return run_baseline(config.method, x0, obj, config.batch, params, stop, streams)
    dist = DirectionDistribution.from_name(config.direction, obj.dim)
    return run(x0, Plan(eta=eta, T=0), dist, make_estimator(config), obj, stop, streams)


def pilot_tune(
    config: ExperimentConfig,
    obj: FiniteSumObjective,
    *,
    x0: Optional[np.ndarray] = None,
    quiet: bool = True,
) -> float:
    """Pick the grid step size with the least final f over a pilot run.

    Each candidate runs on the pilot streams for ``pilot_fraction`` of the budget.
    """
    budget = max(1, int(config.budget * config.pilot_fraction))
    scores: List[Tuple[float, float]] = []
    desc = f"Pilot {config.method} b={config.batch}"
    for eta in tqdm(config.pilot_grid, disable=quiet, desc=desc):
        try:
            trace = run_trial(
                config, obj, eta, 0, budget=budget, namespace=PILOT_NAMESPACE, x0=x0
            )
            final = trace[-1].f_true
        except NumericalAbortError as exc:
            logger.info("Pilot eta=%g aborted: %s", eta, exc)
            continue
        if not math.isfinite(final):
            logger.info("Pilot eta=%g diverged", eta)
            continue
        scores.append((final, eta))
    if not scores:
        grid = ", ".join(f"{g:g}" for g in config.pilot_grid)
        raise PilotError(f"All pilot step sizes diverged for {config.method} (grid: {grid})")
    best = min(scores, key=lambda item: item[0])
    logger.info("Pilot for %s b=%d chose eta=%g", config.method, config.batch, best[1])
    return best[1]


# -- aggregation -----------------------------------------------------------------------------


@dataclass
class AggregateCurve:
    method: str
    queries: np.ndarray
    mean: np.ndarray
    sd: np.ndarray
    finals: np.ndarray
    eta: Optional[float] = None

    @property
    def lo(self) -> np.ndarray:
        return self.mean - self.sd

    @property
    def hi(self) -> np.ndarray:
        return self.mean + self.sd

    @property
    def mean_final(self) -> float:
        return float(self.finals.mean())

    @property
    def sd_final(self) -> float:
        return float(self.finals.std(ddof=1)) if self.finals.size > 1 else 0.0


@dataclass
class ExperimentResult:
    curve: AggregateCurve
    traces: List[List[RunRecord]]
    eta: float
    paths: List[Path] = field(default_factory=list)


def spent(record: RunRecord) -> int:
    return record.queries + record.helper_calls


def checkpoint_grid(budget: int, count: int = CHECKPOINTS) -> np.ndarray:
    return np.unique(np.rint(np.linspace(0, budget, count)).astype(np.int64))


def interpolate_trace(trace: Sequence[RunRecord], grid: np.ndarray) -> np.ndarray:
    """Last value carried forward onto ``grid``."""
    used = np.array([spent(r) for r in trace])
    values = np.array([r.f_true for r in trace])
    pos = np.searchsorted(used, grid, side="right") - 1
    return values[np.clip(pos, 0, None)]


def aggregate(
    method: str, traces: Sequence[Sequence[RunRecord]], grid: np.ndarray
) -> AggregateCurve:
    table = np.vstack([interpolate_trace(t, grid) for t in traces])
    sd = table.std(axis=0, ddof=1) if len(traces) > 1 else np.zeros(grid.size)
    finals = np.array([t[-1].f_true for t in traces])
    return AggregateCurve(method, grid, table.mean(axis=0), sd, finals)


def run_experiment(
    config: ExperimentConfig,
    obj: Optional[FiniteSumObjective] = None,
    *,
    x0: Optional[np.ndarray] = None,
    quiet: bool = True,
    write: bool = True,
) -> ExperimentResult:
    config.validate()
    if obj is None:
        obj = objective_for(config)
    eta = config.eta if config.eta is not None else pilot_tune(config, obj, x0=x0, quiet=quiet)
    trial_fn = functools.partial(run_trial, config, obj, eta, x0=x0)
    with ThreadPoolExecutor(max_workers=min(config.workers, config.trials)) as ex:
        traces = list(
            tqdm(
                ex.map(trial_fn, range(config.trials)),
                total=config.trials,
                disable=quiet,
                desc=f"{config.method} trials",
            )
        )
    curve = aggregate(config.method, traces, checkpoint_grid(config.budget, config.checkpoints))
    curve.eta = eta
    result = ExperimentResult(curve, traces, eta)
    if write:
        out = ensure_output_dir(config.out)
        for k, trace in enumerate(traces):
            result.paths.append(
                write_trace_csv(
                    trial_csv_path(out, config.method, k),
                    [spent(r) for r in trace],
                    [r.f_true for r in trace],
                )
            )
        result.paths.extend(emit_plot_data([curve], out))
        manifest = config.to_manifest()
        manifest["eta_used"] = eta
        result.paths.append(save_manifest(manifest, out))
    return result


def emit_plot_data(curves: Sequence[AggregateCurve], path: Path | str) -> List[Path]:
    """One ``<method>_agg.csv`` per curve plus a matplotlib script that plots them."""
    if not curves:
        raise ConfigError("No curves to emit")
    out = ensure_output_dir(Path(path))
    paths = [
        write_curve_csv(aggregate_csv_path(out, c.method), c.queries, c.mean, c.lo, c.hi)
        for c in curves
    ]
    script = out / PLOT_SCRIPT
    names = ", ".join(repr(p.name) for p in paths)
    script.write_text(_PLOT_STUB.format(files=names), encoding="utf-8")
    paths.append(script)
    return paths


_PLOT_STUB = '''"""Plot f(x) against queries from the aggregate CSVs next to this script."""

import csv
from pathlib import Path

import matplotlib.pyplot as plt

FILES = [{files}]


def main() -> None:
    here = Path(__file__).parent
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in FILES:
        with (here / name).open() as f:
            rows = list(csv.DictReader(f))
        q = [int(r["queries"]) for r in rows]
        mean = [float(r["mean"]) for r in rows]
        lo = [float(r["lo"]) for r in rows]
        hi = [float(r["hi"]) for r in rows]
        label = name[: -len("_agg.csv")]
        ax.plot(q, mean, label=label)
        ax.fill_between(q, lo, hi, alpha=0.2)
    ax.set_xlabel("queries")
    ax.set_ylabel("f(x)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(here / "curves.png", dpi=150)


if __name__ == "__main__":
    main()
'''


# -- sweeps -------------------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    batch: int
    method: str
    budget: int
    eta: float
    mean_final: float
    sd_final: float


def compare_methods(a: AggregateCurve, b: AggregateCurve) -> Tuple[float, float]:
    """(mean final f of a minus that of b, pooled sd of the final values)."""
    pooled = math.sqrt(0.5 * (a.sd_final**2 + b.sd_final**2))
    return a.mean_final - b.mean_final, pooled


def sweep_batch(
    config: ExperimentConfig,
    batches: Sequence[int],
    methods: Sequence[str],
    obj: Optional[FiniteSumObjective] = None,
    *,
    panel_iters: Optional[int] = PANEL_ITERS,
    quiet: bool = True,
) -> Tuple[List[SweepRow], Dict[Tuple[int, str], AggregateCurve]]:
    """Pilot-tuned runs of every method at every batch size.

    All methods of a panel share one query budget: ``2 * b * panel_iters`` (the
    cost of ``panel_iters`` minibatch iterations), or ``config.budget`` for every
    panel when ``panel_iters`` is None.
    """
    if panel_iters is not None and panel_iters < 1:
        raise ConfigError(f"panel_iters must be >= 1, got {panel_iters}")
    config.validate()
    if obj is None:
        obj = objective_for(config)
    out = ensure_output_dir(config.out)
    rows: List[SweepRow] = []
    curves: Dict[Tuple[int, str], AggregateCurve] = {}
    for b in batches:
        budget = config.budget if panel_iters is None else 2 * b * panel_iters
        panel: List[AggregateCurve] = []
        for method in methods:
            cfg = dataclasses.replace(
                config, batch=b, method=method, budget=budget, out=out / f"b{b}" / method
            )
            result = run_experiment(cfg, obj, quiet=quiet, write=True)
            curves[(b, method)] = result.curve
            panel.append(result.curve)
            curve = result.curve
            rows.append(SweepRow(b, method, budget, result.eta, curve.mean_final, curve.sd_final))
        emit_plot_data(panel, out / f"b{b}")
    write_rows(
        out / SWEEP_SUMMARY,
        ("batch", "method", "budget", "eta", "mean_final", "sd_final"),
        ((r.batch, r.method, r.budget, r.eta, r.mean_final, r.sd_final) for r in rows),
    )
    return rows, curves


def reproduction_verdict(curves: Mapping[Tuple[int, str], AggregateCurve]) -> Dict[str, bool]:
    """Qualitative outcome per batch: Mi2P vs RSGF for b >= 25, Mi2P vs ZO-CD for b >= 5."""
    verdict: Dict[str, bool] = {}
    for (b, method), curve in sorted(curves.items()):
        if method != "mi2p":
            continue
        rsgf = curves.get((b, "rsgf"))
        zocd = curves.get((b, "zocd"))
        if rsgf is not None and b >= 25:
            diff, pooled = compare_methods(curve, rsgf)
            verdict[f"b={b}: mi2p <= rsgf + 0.5 sd"] = diff <= 0.5 * pooled
        if zocd is not None and b >= 5:
            verdict[f"b={b}: mi2p < zocd"] = curve.mean_final < zocd.mean_final
    return verdict
