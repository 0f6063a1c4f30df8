"""Tests for the Monte-Carlo harness, aggregation, CSV output and benchmarking."""
# ruff: noqa: D102,D103,D105,D107

from __future__ import annotations
import csv
import math
from typing import Sequence
from pathlib import Path

import numpy as np
import pytest
from numpy.typing import NDArray

from algebraic_estimators.models import LOG_MARGINAL_TRUTH, Model, make_rng, log_marginal
from algebraic_estimators.homotopy import solve
from algebraic_estimators.estimators import estimator_system
from algebraic_estimators.simulate import (
    PlanError,
    TrialRecord,
    AggregateRow,
    ExperimentPlan,
    read_csv,
    run_bench,
    aggregate,
    emit_csv,
    mse_slope,
    csv_fields,
    trial_seeds,
    emit_plot_data,
    emit_bench_csv,
    run_experiment,
)


def _exact_sampler(model: Model, point: Sequence[float], n: int, rng: np.random.Generator) -> NDArray[np.float64]:
    return model.eta_at(point)


def _record(n: int, trial: int, error: float | None, label: str = "mle") -> TrialRecord:
    if error is None:
        return TrialRecord("toy-linear", n, trial, label, False, (), (), (), 0.5, 3)
    return TrialRecord("toy-linear", n, trial, label, True, (error,), (error,), (error,), 0.5, 3)


def _plan(**overrides: object) -> ExperimentPlan:
    base: dict[str, object] = {
        "model_id": "toy-linear",
        "truth": (0.5,),
        "estimators": ("mle",),
        "n_grid": (10, 100),
        "trials": 2,
        "seed": 0,
    }
    base.update(overrides)
    return ExperimentPlan(**base)  # type: ignore[arg-type]


@pytest.mark.parametrize(
    "overrides,message",
    [
        ({"model_id": "nope"}, "unknown model"),
        ({"model_id": "periodic-gaussian", "truth": (1.0,)}, r"\[0, 1\)"),
        ({"trials": 0}, "trials must be at least 1"),
        ({"n_grid": (100, 10)}, "strictly increasing"),
        ({"n_grid": (0, 10)}, "positive sample sizes"),
        ({"estimators": ()}, "no estimators"),
        ({"estimators": ("third-order",)}, "unknown estimators"),
    ],
)
def test_plan_validation(overrides: dict[str, object], message: str) -> None:
    """Bad plans fail before any trial runs."""
    with pytest.raises(PlanError, match=message):
        _plan(**overrides).validate()


def test_plan_rejects_truth_off_the_model() -> None:
    """An implicit truth must satisfy the model constraints."""
    truth = (0.2, *LOG_MARGINAL_TRUTH[1:])
    with pytest.raises(PlanError, match="violates the model constraints"):
        _plan(model_id="log-marginal", truth=truth).validate()


def test_trial_seeds_are_independent() -> None:
    """Cells differ in both streams; the same cell repeats."""
    a_data, a_solver = trial_seeds(0, 0, 0)
    b_data, b_solver = trial_seeds(0, 0, 1)
    assert a_solver != b_solver
    assert a_data.generate_state(2).tolist() != b_data.generate_state(2).tolist()
    assert trial_seeds(0, 0, 0)[1] == a_solver


def test_exact_data_recovers_the_truth() -> None:
    """With the data mean pinned at η(0.5) the MLE is exact and -bc moves by b/(2N)."""
    plan = _plan(estimators=("mle", "mle-bc"), sampler=_exact_sampler)
    records = run_experiment(plan, progress=False)
    assert len(records) == 2 * 2 * 2
    assert all(r.success for r in records)
    for r in records:
        if r.estimator == "mle":
            assert r.point_error[0] == pytest.approx(0.0, abs=1e-9)
        else:
            # toy bias at u = 0.5 is 4u / (1 + 4u^2)^2 = 0.5
            assert r.point_error[0] == pytest.approx(-0.5 / (2 * r.n), rel=1e-5)


def test_reruns_are_byte_identical(tmp_path: Path) -> None:
    """A fixed seed and timing=False give identical aggregate files."""
    outputs = []
    for k in range(2):
        rows = aggregate(run_experiment(_plan(trials=3), progress=False))
        path = tmp_path / f"run{k}.csv"
        emit_csv(rows, path, d=2, timing=False)
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]


def test_aggregate_excludes_failures_from_mse() -> None:
    """MSE and bias use successful trials; the failure shows up in fail_rate."""
    rows = aggregate([_record(100, 0, 0.1), _record(100, 1, -0.3), _record(100, 2, None)])
    (row,) = rows
    assert row.trials == 3
    assert row.mse == pytest.approx(0.05)
    assert row.bias[0] == pytest.approx(-0.1)
    assert row.fail_rate == pytest.approx(1 / 3)
    assert row.mean_time_s == pytest.approx(0.5)


def test_aggregate_order_and_all_failed_groups() -> None:
    """Rows run by N, then by first-seen estimator; an all-failed group reports NaN."""
    records = [_record(10, 0, None, "second-order"), _record(10, 0, 0.2, "mle"), _record(100, 0, 0.1, "mle")]
    rows = aggregate(records)
    assert [(r.n, r.estimator) for r in rows] == [(10, "second-order"), (10, "mle"), (100, "mle")]
    assert math.isnan(rows[0].mse)
    assert rows[0].fail_rate == 1.0


def test_mse_slope() -> None:
    """MSE proportional to 1/N has slope -1; small N is left out."""
    rows = [AggregateRow("m", "mle", n, 10, 1.0 / n, (0.0,), 0.0, 0.0) for n in (10, 100, 1000, 10000)]
    rows[0] = AggregateRow("m", "mle", 10, 10, 5.0, (0.0,), 0.0, 0.0)
    assert mse_slope(rows, "mle") == pytest.approx(-1.0)
    with pytest.raises(ValueError, match="need two"):
        mse_slope(rows, "mle", min_n=5000)


def test_csv_roundtrip(tmp_path: Path) -> None:
    """emit_csv writes the documented columns and read_csv restores the values."""
    rows = [
        AggregateRow("log-marginal", "mle", 100, 200, 0.0123, (1e-3, -2e-3), 0.25, 0.0),
        AggregateRow("log-marginal", "second-order", 100, 200, 0.0125, (1.5e-3, -1e-3), 0.01, 0.005),
    ]
    path = tmp_path / "out" / "agg.csv"
    emit_csv(rows, path)
    with open(path, newline="") as handle:
        assert next(csv.reader(handle)) == csv_fields(2)
    back = read_csv(path)
    assert [(r.estimator, r.n, r.mse, r.bias, r.mean_time_s) for r in back] == [
        (r.estimator, r.n, r.mse, r.bias, r.mean_time_s) for r in rows
    ]
    emit_csv(rows, path, timing=False)
    assert all(math.isnan(r.mean_time_s) for r in read_csv(path))


def test_plot_data_long_format(tmp_path: Path) -> None:
    """One line per row and metric; timing can be left out."""
    rows = [AggregateRow("m", "mle", 100, 5, 0.1, (0.0,), 0.2, 0.0, mse_u=0.05)]
    path = tmp_path / "plot.csv"
    emit_plot_data(rows, path)
    with open(path, newline="") as handle:
        lines = list(csv.reader(handle))
    assert lines[0] == ["N", "estimator", "metric", "value"]
    assert [line[2] for line in lines[1:]] == ["mse", "mse_u", "mean_time_s", "fail_rate"]
    emit_plot_data(rows, path, timing=False)
    with open(path, newline="") as handle:
        assert len(list(csv.reader(handle))) == 4


def test_bench(tmp_path: Path) -> None:
    """Each estimator is solved reps times and timed."""
    rows = run_bench("toy-linear", ["mle"], [0.5, 0.25], reps=2, seed=1)
    (row,) = rows
    assert (row.paths, row.reps) == (3, 2)
    assert row.mean_time_s > 0 and row.std_time_s >= 0
    path = tmp_path / "bench.csv"
    emit_bench_csv(rows, path)
    with open(path, newline="") as handle:
        assert next(csv.reader(handle)) == ["model", "estimator", "paths", "reps", "mean_time_s", "std_time_s"]
    with pytest.raises(PlanError, match="data values"):
        run_bench("toy-linear", ["mle"], [0.5], reps=1)
    with pytest.raises(PlanError, match="reps"):
        run_bench("toy-linear", ["mle"], [0.5, 0.25], reps=0)
    with pytest.raises(PlanError, match="unknown estimator"):
        run_bench("toy-linear", ["fourth-order"], [0.5, 0.25], reps=1)


@pytest.mark.slow
def test_log_marginal_efficiency_and_rate() -> None:
    """MSE falls like 1/N for both estimators, they stay within parity, and the reduced solve is faster."""
    plan = ExperimentPlan(
        model_id="log-marginal",
        truth=LOG_MARGINAL_TRUTH,
        estimators=("mle", "second-order"),
        n_grid=(100, 1000, 10000),
        trials=200,
        seed=0,
    )
    rows = aggregate(run_experiment(plan, progress=False))
    for label in plan.estimators:
        assert -1.15 <= mse_slope(rows, label) <= -0.85
    by_key = {(r.n, r.estimator): r for r in rows}
    for n in plan.n_grid:
        if n >= 1000:
            assert 0.7 <= by_key[n, "second-order"].mse / by_key[n, "mle"].mse <= 1.4
        assert by_key[n, "second-order"].mean_time_s < by_key[n, "mle"].mean_time_s
    assert np.isfinite([r.mse for r in rows]).all()


@pytest.mark.slow
def test_reduced_solve_is_three_times_faster() -> None:
    """Tracking 32 paths of the reduced second-order system takes at most a third of the 500-path MLE solve."""
    model = log_marginal()
    data = model.sample_mean(LOG_MARGINAL_TRUTH, 1000, make_rng(0)).tolist()
    times: dict[str, float] = {}
    for label, paths in (("mle", 500), ("second-order", 32)):
        system = estimator_system(model.id, label).instantiate(data)
        reports = [solve(system, seed=seed) for seed in range(3)]
        assert all(r.path_count == paths for r in reports)
        times[label] = float(np.median([r.wall_time for r in reports]))
    assert times["mle"] / times["second-order"] >= 3, times
