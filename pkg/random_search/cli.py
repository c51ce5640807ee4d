import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from .constants import (
    BATCH_GRID,
    BETA_GRID,
    DIRECTION_KINDS,
    METHODS,
    PANEL_ITERS,
    PLAN_NAME,
    REPORT_NAME,
)
from .diagnostics import FAILED, flatten_reports, run_all_checks
from .directions import DirectionDistribution
from .errors import SearchLabError
from .harness import (
    ExperimentConfig,
    build_config,
    load_config_file,
    objective_for,
    pilot_tune,
    reproduction_verdict,
    run_experiment,
    sweep_batch,
)
from .momentum_lab import MomentumVariant, beta_sweep
from .objectives import estimate_constants
from .planner import Plan, PlanRegime, format_plan, plan_parameters
from .rng import spawn_stream
from .storage import ensure_output_dir, write_dict_rows, write_rows

logger = logging.getLogger(__name__)

BETA_SWEEP_NAME = "beta_sweep.csv"


def _int_list(raw: str) -> List[int]:
    return [int(v) for v in raw.replace(",", " ").split()]


def _float_list(raw: str) -> List[float]:
    return [float(v) for v in raw.replace(",", " ").split()]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="Flat key = value config file (flags override it)")
    p.add_argument("--out", help="Output directory (default results)")
    p.add_argument("--workers", type=int, help="Threads running trials in parallel (default 1)")
    p.add_argument("--seed", type=int, help="Run seed (default 0)")
    p.add_argument("--quiet", action="store_true", help="Suppress progress and summary output")
    p.add_argument("--verbose", action="store_true", help="Log at INFO level")


def _add_experiment(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=METHODS)
    p.add_argument("--batch", type=int, help="Minibatch size b")
    p.add_argument("--budget", type=int, help="Total optimizer query budget per trial")
    p.add_argument("--trials", type=int)
    p.add_argument("--dataset", help="Dataset CSV path or 'synthetic'")
    p.add_argument("--lambda", dest="lam", type=float, help="L2 regularization strength")
    p.add_argument(
        "--separation", type=float, help="Class mean distance of the synthetic task (default 10)"
    )
    p.add_argument("--direction", choices=DIRECTION_KINDS)
    p.add_argument("--eta", help="Step size or 'pilot'")
    p.add_argument("--mu-fd", dest="mu_fd", type=float, help="RSGF / ZO-CD smoothing radius")
    p.add_argument("--m", dest="epoch", type=int, help="VR epoch length")
    p.add_argument("--delta", type=float, help="Helper perturbation bound")
    p.add_argument("--helper-mode", dest="helper_mode", choices=["uniform", "gaussian"])
    p.add_argument("--beta", type=float, help="Momentum weight on the fresh difference")
    p.add_argument("--corrected-sign", dest="corrected_sign", action="store_true", default=None)
    p.add_argument("--no-standardize", dest="standardize", action="store_false", default=None)
    p.add_argument("--checkpoints", type=int)
    p.add_argument("--pilot-grid", dest="pilot_grid", help="Comma-separated pilot step sizes")
    p.add_argument("--pilot-fraction", dest="pilot_fraction", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srs-lab", description="Stochastic random search experiments and checks"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="Multi-trial budgeted run of one method")
    _add_common(run_p)
    _add_experiment(run_p)

    sweep_p = sub.add_parser("sweep-batch", help="Pilot-tuned comparison over batch sizes")
    _add_common(sweep_p)
    _add_experiment(sweep_p)
    sweep_p.add_argument(
        "--batches",
        type=_int_list,
        default=list(BATCH_GRID),
        help="Batch sizes (default 1,5,10,25,50,100)",
    )
    sweep_p.add_argument(
        "--methods",
        default="mi2p,rsgf,zocd",
        help="Comma-separated methods (default mi2p,rsgf,zocd)",
    )
    sweep_p.add_argument(
        "--panel-iters",
        dest="panel_iters",
        type=int,
        default=PANEL_ITERS,
        help="Panel budget is 2 * b * N queries (default 1000); 0 uses --budget for every panel",
    )

    beta_p = sub.add_parser("sweep-beta", help="Momentum weight sweep at equal budget")
    _add_common(beta_p)
    _add_experiment(beta_p)
    beta_p.add_argument("--betas", type=_float_list, default=list(BETA_GRID))
    beta_p.add_argument(
        "--variant",
        choices=[v.value for v in MomentumVariant],
        default=MomentumVariant.HEAVY_BALL.value,
    )

    verify_p = sub.add_parser("verify", help="Run the diagnostic checks and write report.csv")
    _add_common(verify_p)
    verify_p.add_argument("--full", action="store_true", help="Ten times the Monte Carlo samples")

    plan_p = sub.add_parser("plan", help="Estimate constants and plan (eta, T, b, m)")
    _add_common(plan_p)
    plan_p.add_argument(
        "--regime", choices=[r.value for r in PlanRegime], default=PlanRegime.AVG_SMOOTH.value
    )
    plan_p.add_argument("--epsilon", type=float, default=0.1, help="Target gradient norm")
    plan_p.add_argument("--delta", type=float, default=0.0, help="Helper perturbation bound")
    plan_p.add_argument("--probe-points", dest="probe_points", type=int, default=50)
    plan_p.add_argument("--dataset", help="Dataset CSV path or 'synthetic'")
    plan_p.add_argument("--lambda", dest="lam", type=float)
    plan_p.add_argument("--direction", choices=DIRECTION_KINDS)
    return parser


_CONFIG_FLAGS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def _resolve(args: argparse.Namespace) -> ExperimentConfig:
    file_values = load_config_file(args.config) if args.config else {}
    overrides: Dict[str, object] = {
        key: value for key, value in vars(args).items() if key in _CONFIG_FLAGS
    }
    return build_config(file_values, overrides)


def _cmd_run(args, config: ExperimentConfig, quiet: bool) -> int:
    result = run_experiment(config, quiet=quiet)
    if not quiet:
        curve = result.curve
        print(f"{config.method} b={config.batch} eta={result.eta:g} trials={config.trials}")
        print(f"Final f: {curve.mean_final:.6g} +/- {curve.sd_final:.3g}")
        print(f"Wrote {len(result.paths)} files to {config.out}")
    return 0


def _cmd_sweep_batch(args, config: ExperimentConfig, quiet: bool) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    panel_iters = args.panel_iters or None
    rows, curves = sweep_batch(config, args.batches, methods, panel_iters=panel_iters, quiet=quiet)
    if not quiet:
        for row in rows:
            print(
                f"b={row.batch:<4d} {row.method:<20s} budget={row.budget:<8d} eta={row.eta:<10.4g} "
                f"final={row.mean_final:.6g} +/- {row.sd_final:.3g}"
            )
        for name, ok in reproduction_verdict(curves).items():
            print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return 0


def _cmd_sweep_beta(args, config: ExperimentConfig, quiet: bool) -> int:
    obj = objective_for(config)
    eta = config.eta
    if eta is None:
        eta = pilot_tune(dataclasses.replace(config, method="mi2p"), obj, quiet=quiet)
    plan = Plan(eta=eta, T=max(1, config.budget // (2 * config.batch)), b=config.batch)
    rows = beta_sweep(
        obj,
        DirectionDistribution.from_name(config.direction, obj.dim),
        plan,
        args.betas,
        config.trials,
        config.seed,
        variant=args.variant,
        workers=config.workers,
        quiet=quiet,
    )
    out = ensure_output_dir(config.out)
    path = write_rows(
        out / BETA_SWEEP_NAME,
        ("beta", "mean_final", "sd_final"),
        ((r.beta, r.mean_final, r.sd_final) for r in rows),
    )
    if not quiet:
        for r in rows:
            print(f"beta={r.beta:<6g} final={r.mean_final:.6g} +/- {r.sd_final:.3g}")
        print(f"Wrote {path}")
    return 0


def _cmd_verify(args, quiet: bool) -> int:
    seed = args.seed if args.seed is not None else 0
    reports = run_all_checks(seed, quick=not args.full)
    rows = flatten_reports(reports)
    out = ensure_output_dir(Path(args.out) if args.out else ExperimentConfig().out)
    path = write_dict_rows(
        out / REPORT_NAME, rows, ("check", "measured", "target", "passed", "samples", "status")
    )
    if not quiet:
        for rep in reports:
            print(
                f"{rep.status.upper():<13s} {rep.name:<28s} "
                f"measured={rep.measured:.4g} target={rep.target:.4g}"
            )
        print(f"Wrote {path}")
    return 1 if any(r.status == FAILED for r in reports) else 0


def _cmd_plan(args, quiet: bool) -> int:
    file_values = load_config_file(args.config) if args.config else {}
    overrides = {
        "dataset": args.dataset,
        "lam": args.lam,
        "direction": args.direction,
        "seed": args.seed,
        "out": args.out,
    }
    config = build_config(file_values, overrides)
    obj = objective_for(config)
    constants = estimate_constants(
        obj,
        args.probe_points,
        spawn_stream(config.seed, 0, "diagnostics"),
        dist=DirectionDistribution.from_name(config.direction, obj.dim),
    )
    plan = plan_parameters(args.regime, constants, args.epsilon, obj.n, delta=args.delta)
    text = format_plan(plan)
    out = ensure_output_dir(config.out)
    path = out / PLAN_NAME
    path.write_text(text, encoding="utf-8")
    if not quiet:
        print(text, end="")
        print(f"Wrote {path}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    quiet = args.quiet
    try:
        if args.command == "verify":
            return _cmd_verify(args, quiet)
        if args.command == "plan":
            return _cmd_plan(args, quiet)
        config = _resolve(args)
        if args.command == "run":
            return _cmd_run(args, config, quiet)
        if args.command == "sweep-batch":
            return _cmd_sweep_batch(args, config, quiet)
        return _cmd_sweep_beta(args, config, quiet)
    except SearchLabError as exc:
        logger.debug("Aborting", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
