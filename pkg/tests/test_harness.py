import dataclasses
import math

import numpy as np
import pytest

from random_search.errors import ConfigError, PilotError
from random_search.harness import (
    AggregateCurve,
    ExperimentConfig,
    aggregate,
    build_config,
    checkpoint_grid,
    compare_methods,
    emit_plot_data,
    interpolate_trace,
    load_config_file,
    pilot_tune,
    reproduction_verdict,
    run_experiment,
    run_trial,
    sweep_batch,
)
from random_search.search import RunRecord
from random_search.storage import load_manifest, read_curve_csv, read_trace_csv


def _config(tmp_path, **overrides):
    values = dict(eta=0.01, trials=1, batch=5, budget=200, checkpoints=5, out=tmp_path)
    values.update(overrides)
    return ExperimentConfig(**values).validate()


def _curve(method, finals):
    finals = np.asarray(finals, dtype=float)
    grid = np.array([0, 10])
    mean = np.array([1.0, finals.mean()])
    return AggregateCurve(method, grid, mean, np.zeros(2), finals)


def test_config_file_and_flag_overrides(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text(
        "# benchmark settings\n"
        "method = vr_mi2p\n"
        "b = 25\n"
        "m = 8\n"
        "lambda = 0.5   # ridge\n"
        "pilot-grid = 0.01, 0.1\n"
        "\n"
        "eta = pilot\n",
        encoding="utf-8",
    )
    values = load_config_file(path)
    assert values["batch"] == "25" and values["epoch"] == "8" and values["lam"] == "0.5"

    config = build_config(values, {"batch": 50, "seed": None, "out": str(tmp_path / "o")})
    assert config.method == "vr_mi2p"
    assert config.batch == 50
    assert config.epoch == 8
    assert config.lam == 0.5
    assert config.eta is None
    assert config.pilot_grid == (0.01, 0.1)
    assert config.seed == 0
    assert config.out == tmp_path / "o"


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config_file(tmp_path / "missing.cfg")
    bad_line = tmp_path / "bad.cfg"
    bad_line.write_text("method = mi2p\nbatch 10\n", encoding="utf-8")
    with pytest.raises(ConfigError, match=":2:"):
        load_config_file(bad_line)
    with pytest.raises(ConfigError, match="Unknown config keys: colour"):
        build_config({"colour": "red"})
    with pytest.raises(ConfigError, match="batch"):
        build_config({"batch": "ten"})
    with pytest.raises(ConfigError):
        build_config(overrides={"budget": 0})
    with pytest.raises(ConfigError):
        build_config(overrides={"method": "adam"})
    with pytest.raises(ConfigError):
        build_config({"eta": "-1"})


def test_manifest_form_of_config(tmp_path):
    manifest = _config(tmp_path).to_manifest()
    assert manifest["out"] == str(tmp_path)
    assert isinstance(manifest["pilot_grid"], list)
    assert manifest["method"] == "mi2p"
    assert manifest["separation"] == 10.0


def test_checkpoint_grid_and_interpolation():
    assert list(checkpoint_grid(100, 5)) == [0, 25, 50, 75, 100]
    assert list(checkpoint_grid(2, 5)) == [0, 1, 2]
    trace = [RunRecord(0, 0, 3.0), RunRecord(1, 20, 2.0), RunRecord(2, 40, 1.0)]
    values = interpolate_trace(trace, np.array([0, 10, 20, 39, 40, 100]))
    assert list(values) == [3.0, 3.0, 2.0, 2.0, 1.0, 1.0]


def test_helper_calls_count_towards_the_budget_axis():
    trace = [RunRecord(0, 0, 3.0), RunRecord(1, 0, 2.0, helper_calls=2)]
    assert list(interpolate_trace(trace, np.array([0, 1, 2]))) == [3.0, 3.0, 2.0]


def test_minimal_budget_runs_one_iteration(logistic, tmp_path):
    config = _config(tmp_path, batch=10, budget=20, checkpoints=2)
    result = run_experiment(config, logistic, write=False)
    (trace,) = result.traces
    assert [r.queries for r in trace] == [0, 20]
    assert list(result.curve.queries) == [0, 20]
    assert list(result.curve.mean) == [trace[0].f_true, trace[1].f_true]
    assert trace[0].f_true == pytest.approx(math.log(2.0))


def test_aggregate_matches_manual_mean(logistic, tmp_path):
    result = run_experiment(_config(tmp_path, trials=3), logistic, write=False)
    grid = checkpoint_grid(200, 5)
    table = np.array([interpolate_trace(t, grid) for t in result.traces])
    assert np.allclose(result.curve.mean, table.mean(axis=0))
    assert np.allclose(result.curve.sd, table.std(axis=0, ddof=1))
    assert result.curve.mean_final == pytest.approx(np.mean([t[-1].f_true for t in result.traces]))
    again = aggregate("mi2p", result.traces, grid)
    assert np.array_equal(again.mean, result.curve.mean)


def test_worker_count_does_not_change_results(logistic, tmp_path):
    serial = run_experiment(_config(tmp_path, trials=4, workers=1), logistic, write=False)
    pooled = run_experiment(_config(tmp_path, trials=4, workers=3), logistic, write=False)
    assert np.array_equal(serial.curve.mean, pooled.curve.mean)
    assert serial.traces == pooled.traces


def test_reruns_write_identical_files(logistic, tmp_path):
    config = _config(tmp_path, trials=2)
    first = run_experiment(config, logistic)
    snapshot = {p.name: p.read_bytes() for p in first.paths}
    second = run_experiment(config, logistic)
    assert {p.name: p.read_bytes() for p in second.paths} == snapshot
    assert {"mi2p_trial0.csv", "mi2p_trial1.csv", "mi2p_agg.csv", "manifest.json"} <= set(snapshot)


def test_written_files_match_the_result(logistic, tmp_path):
    result = run_experiment(_config(tmp_path, trials=2), logistic)
    trace = read_trace_csv(tmp_path / "mi2p_trial1.csv")
    assert trace["f_true"] == [r.f_true for r in result.traces[1]]
    curve = read_curve_csv(tmp_path / "mi2p_agg.csv")
    assert curve["mean"] == [float(v) for v in result.curve.mean]
    manifest = load_manifest(tmp_path / "manifest.json")
    assert manifest["eta_used"] == 0.01
    assert manifest["batch"] == 5


def test_mi2p_and_rsgf_spend_the_same_budget(logistic, tmp_path):
    for method in ("mi2p", "rsgf"):
        result = run_experiment(_config(tmp_path, method=method), logistic, write=False)
        (trace,) = result.traces
        assert trace[-1].queries >= 200
        assert trace[-2].queries < 200
        assert result.curve.queries[-1] == 200


def test_vr_trace_uses_actual_and_nominal_ledgers(small_logistic, tmp_path):
    n, b = small_logistic.n, 4
    config = _config(tmp_path, method="vr_mi2p", batch=b, epoch=3, budget=4 * n + 4 * b)
    trace = run_trial(config, small_logistic, 0.01, 0)
    assert [r.queries for r in trace] == [0, 2 * n, 2 * n + 2 * b, 2 * n + 4 * b, 4 * n + 4 * b]
    assert [r.nominal_queries for r in trace] == [0, n, n + 2 * b, n + 4 * b, 2 * n + 4 * b]


def test_pilot_with_one_candidate(small_logistic, tmp_path):
    config = _config(tmp_path, eta=None, pilot_grid=(0.05,))
    assert pilot_tune(config, small_logistic) == 0.05


def test_pilot_budget_decides_between_speed_and_floor(unit_quadratic, tmp_path):
    # 10^4 exact iterations: eta = 1e-3 needs about 4000 of them to reach its floor
    x0 = np.full(10, 1.0 / np.sqrt(10))
    full = _config(
        tmp_path, method="exact", eta=None, budget=20_000, pilot_grid=(1e-3, 1e-2, 1e-1, 1.0)
    )
    assert pilot_tune(full, unit_quadratic, x0=x0) == 0.001
    for fraction in (0.1, 0.2):
        short = dataclasses.replace(full, pilot_fraction=fraction)
        assert pilot_tune(short, unit_quadratic, x0=x0) == 0.01
    default = dataclasses.replace(full, pilot_grid=ExperimentConfig().pilot_grid)
    assert pilot_tune(default, unit_quadratic, x0=x0) == pytest.approx(0.001)


def test_pilot_lands_next_to_the_best_full_budget_step(benchmark_logistic, tmp_path):
    grid = (0.003, 0.01, 0.03, 0.1, 0.3)
    config = _config(tmp_path, eta=None, batch=25, budget=25_000, trials=4, pilot_grid=grid)
    chosen = pilot_tune(config, benchmark_logistic)
    finals = [
        run_experiment(
            dataclasses.replace(config, eta=eta), benchmark_logistic, write=False
        ).curve.mean_final
        for eta in grid
    ]
    assert abs(grid.index(chosen) - int(np.argmin(finals))) <= 1


def test_pilot_error_lists_the_grid(nan_objective, tmp_path):
    config = _config(tmp_path, eta=None, pilot_grid=(0.1, 1.0))
    with pytest.raises(PilotError, match="0.1, 1"):
        pilot_tune(config, nan_objective)


def test_emit_plot_data(tmp_path):
    with pytest.raises(ConfigError):
        emit_plot_data([], tmp_path)
    curve = AggregateCurve(
        "mi2p",
        np.array([0, 50, 100]),
        np.array([0.7, 0.5, 0.4]),
        np.array([0.0, 0.1, 0.05]),
        np.array([0.4]),
    )
    paths = emit_plot_data([curve], tmp_path / "plots")
    assert [p.name for p in paths] == ["mi2p_agg.csv", "plot_curves.py"]
    rows = paths[0].read_text(encoding="utf-8").splitlines()
    assert len(rows) == 4
    back = read_curve_csv(paths[0])
    assert back["queries"] == [0, 50, 100]
    assert back["lo"] == [float(v) for v in curve.lo]
    script = paths[1].read_text(encoding="utf-8")
    assert "matplotlib" in script and "'mi2p_agg.csv'" in script


def test_compare_methods_and_verdict():
    mi2p = _curve("mi2p", [0.30, 0.32])
    rsgf = _curve("rsgf", [0.31, 0.33])
    diff, pooled = compare_methods(mi2p, rsgf)
    assert diff == pytest.approx(-0.01)
    assert pooled == pytest.approx(np.std([0.30, 0.32], ddof=1))

    curves = {
        (1, "mi2p"): _curve("mi2p", [0.5, 0.6]),
        (1, "rsgf"): _curve("rsgf", [0.2, 0.3]),
        (5, "mi2p"): _curve("mi2p", [0.4, 0.5]),
        (5, "zocd"): _curve("zocd", [0.3, 0.35]),
        (25, "mi2p"): mi2p,
        (25, "rsgf"): rsgf,
        (25, "zocd"): _curve("zocd", [0.6, 0.7]),
    }
    assert reproduction_verdict(curves) == {
        "b=5: mi2p < zocd": False,
        "b=25: mi2p <= rsgf + 0.5 sd": True,
        "b=25: mi2p < zocd": True,
    }


def test_sweep_batch_writes_per_batch_panels(small_logistic, tmp_path):
    config = _config(tmp_path, trials=2, budget=100, eta=None, pilot_grid=(0.01, 0.1))
    rows, curves = sweep_batch(config, (2, 5), ("mi2p", "rsgf"), small_logistic, panel_iters=10)
    expected = [(2, "mi2p"), (2, "rsgf"), (5, "mi2p"), (5, "rsgf")]
    assert [(r.batch, r.method) for r in rows] == expected
    assert list(curves) == expected
    assert [r.budget for r in rows] == [40, 40, 100, 100]
    assert curves[(2, "rsgf")].queries[-1] == 40
    assert all(r.eta in (0.01, 0.1) for r in rows)
    assert (tmp_path / "b5" / "mi2p_agg.csv").exists()
    assert load_manifest(tmp_path / "b5" / "rsgf" / "manifest.json")["budget"] == 100
    summary = (tmp_path / "sweep_summary.csv").read_text(encoding="utf-8").splitlines()
    assert summary[0] == "batch,method,budget,eta,mean_final,sd_final"
    assert len(summary) == 5


def test_sweep_batch_without_panel_iters_uses_the_config_budget(small_logistic, tmp_path):
    config = _config(tmp_path, trials=1, budget=60)
    rows, _ = sweep_batch(config, (2, 5), ("mi2p",), small_logistic, panel_iters=None)
    assert [r.budget for r in rows] == [60, 60]
    with pytest.raises(ConfigError):
        sweep_batch(config, (2,), ("mi2p",), small_logistic, panel_iters=0)


@pytest.mark.slow
def test_batch_sweep_reproduces_the_method_ranking(benchmark_logistic, tmp_path):
    config = ExperimentConfig(out=tmp_path).validate()
    _, curves = sweep_batch(
        config, (5, 10, 25, 50, 100), ("mi2p", "rsgf", "zocd"), benchmark_logistic
    )
    verdict = reproduction_verdict(curves)
    assert len(verdict) == 8
    assert all(verdict.values()), verdict
