"""Monte-Carlo experiments: sample means at a true parameter, solve every estimator, aggregate MSE/bias/time."""

from __future__ import annotations
import os
import csv
import math
import logging
from typing import Callable, Iterable, Sequence
from pathlib import Path
from fractions import Fraction
from dataclasses import field, dataclass

import numpy as np
from tqdm import tqdm
from numpy.typing import NDArray

from algebraic_estimators.config import config
from algebraic_estimators.models import Model, ModelError, get_model, make_rng
from algebraic_estimators.geometry import GeometryError, bias_correction
from algebraic_estimators.homotopy import TrackerConfig, HomotopyError, solve, select_estimate
from algebraic_estimators.estimators import ESTIMATOR_LABELS, EstimatingSystem, estimator_system


logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]
Sampler = Callable[[Model, Sequence[float], int, np.random.Generator], FloatArray]

# Tolerance on the model constraints at the true parameter.
TRUTH_TOL = 1e-12
# Sample sizes below this are reported but left out of slope fits.
ASYMPTOTIC_N = 30


class PlanError(ValueError):
    """Raised for plans that cannot run."""


def _label_ok(label: str) -> bool:
    return label.removesuffix("-bc") in ESTIMATOR_LABELS


@dataclass(frozen=True)
class ExperimentPlan:
    """What to run: model, truth, estimator labels, the N grid, trials per N and the master seed.

    ``sampler`` replaces the model's own sampler, e.g. to pin the data mean in tests.
    """

    model_id: str
    truth: tuple[float, ...]
    estimators: tuple[str, ...]
    n_grid: tuple[int, ...]
    trials: int = field(default_factory=lambda: config.TRIALS)
    seed: int = field(default_factory=lambda: config.SEED)
    tracker: TrackerConfig = field(default_factory=TrackerConfig)
    c: Fraction | None = None
    sampler: Sampler | None = field(default=None, repr=False, compare=False)

    def validate(self) -> Model:
        try:
            model = get_model(self.model_id)
            point = model.check_point(self.truth)
        except ModelError as exc:
            raise PlanError(str(exc)) from exc
        eta = model.eta_at(point)
        residuals = model.constraint_residuals(eta, eta)
        if residuals.size and np.max(np.abs(residuals)) > TRUTH_TOL:
            raise PlanError(f"true parameter violates the model constraints: {residuals.tolist()}")
        if self.trials < 1:
            raise PlanError(f"trials must be at least 1, got {self.trials}")
        if not self.n_grid or any(n < 1 for n in self.n_grid):
            raise PlanError(f"N grid must hold positive sample sizes, got {self.n_grid}")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise PlanError(f"N grid must be strictly increasing, got {self.n_grid}")
        if not self.estimators:
            raise PlanError("no estimators requested")
        bad = [e for e in self.estimators if not _label_ok(e)]
        if bad:
            raise PlanError(f"unknown estimators {bad}; choose from {ESTIMATOR_LABELS} with optional -bc suffix")
        return model


@dataclass(frozen=True)
class TrialRecord:
    model_id: str
    n: int
    trial: int
    estimator: str
    success: bool
    estimate: tuple[float, ...]
    error: tuple[float, ...]
    point_error: tuple[float, ...]
    time_s: float
    paths: int


@dataclass(frozen=True)
class AggregateRow:
    model: str
    estimator: str
    n: int
    trials: int
    mse: float
    bias: tuple[float, ...]
    mean_time_s: float
    fail_rate: float
    mse_u: float = math.nan


def trial_seeds(master: int, n_index: int, trial: int) -> tuple[np.random.SeedSequence, int]:
    """Independent data stream and solver seed for one (N, trial) cell."""
    data, solver = np.random.SeedSequence([master, n_index, trial]).spawn(2)
    return data, int(solver.generate_state(1)[0])


def run_experiment(plan: ExperimentPlan, *, progress: bool | None = None) -> list[TrialRecord]:
    """Every (N, trial) cell samples once and runs each estimator on the same data mean."""
    model = plan.validate()
    systems = {label: estimator_system(model.id, label, plan.c) for label in plan.estimators}
    truth_point = np.asarray(plan.truth, dtype=np.float64)
    truth_eta = model.eta_at(truth_point)
    sampler = plan.sampler or (lambda m, p, n, rng: m.sample_mean(p, n, rng))
    show = config.PROGRESS if progress is None else progress
    cells = [(ni, n, t) for ni, n in enumerate(plan.n_grid) for t in range(plan.trials)]
    records: list[TrialRecord] = []
    # None: tqdm stays off without a TTY
    for ni, n, trial in tqdm(cells, desc=f"{model.id}", disable=None if show else True):
        data_seed, solver_seed = trial_seeds(plan.seed, ni, trial)
        xbar = np.asarray(sampler(model, plan.truth, n, make_rng(data_seed)), dtype=np.float64)
        for label, system in systems.items():
            record = _run_one(model, label, system, xbar, n, trial, solver_seed, plan, truth_point, truth_eta)
            records.append(record)
    failures = sum(1 for r in records if not r.success)
    if failures:
        logger.warning("%d of %d trials had no usable estimate", failures, len(records))
    return records


def _run_one(
    model: Model,
    label: str,
    system: EstimatingSystem,
    xbar: FloatArray,
    n: int,
    trial: int,
    seed: int,
    plan: ExperimentPlan,
    truth_point: FloatArray,
    truth_eta: FloatArray,
) -> TrialRecord:
    paths, elapsed = system.total_degree_product, 0.0
    try:
        report = solve(system.instantiate([float(x) for x in xbar]), plan.tracker, seed)
        paths, elapsed = report.path_count, report.wall_time
        selection = select_estimate(report, model, xbar)
        point = selection.point
        if label.endswith("-bc"):
            point = model.shift(point, -bias_correction(model, point, n))
        eta = model.eta_at(point)
    except (HomotopyError, GeometryError, ModelError) as exc:
        logger.debug("%s N=%d trial %d: %s", label, n, trial, exc)
        return TrialRecord(model.id, n, trial, label, False, (), (), (), elapsed, paths)
    return TrialRecord(
        model_id=model.id,
        n=n,
        trial=trial,
        estimator=label,
        success=True,
        estimate=tuple(eta.tolist()),
        error=tuple((eta - truth_eta).tolist()),
        point_error=tuple((np.asarray(point) - truth_point).tolist()),
        time_s=elapsed,
        paths=paths,
    )


def aggregate(records: Iterable[TrialRecord]) -> list[AggregateRow]:
    """Group by (N, estimator) in first-seen estimator order; failed trials only count toward fail_rate."""
    groups: dict[tuple[int, str], list[TrialRecord]] = {}
    order: dict[str, int] = {}
    for r in records:
        order.setdefault(r.estimator, len(order))
        groups.setdefault((r.n, r.estimator), []).append(r)
    rows = []
    for (n, label), members in sorted(groups.items(), key=lambda kv: (kv[0][0], order[kv[0][1]])):
        ok = [m for m in members if m.success]
        if ok:
            errors = np.asarray([m.error for m in ok], dtype=np.float64)
            point_errors = np.asarray([m.point_error for m in ok], dtype=np.float64)
            mse = float(np.mean(np.sum(errors**2, axis=1)))
            bias = tuple(float(b) for b in errors.mean(axis=0))
            mse_u = float(np.mean(np.sum(point_errors**2, axis=1)))
        else:
            width = max((len(m.error) for m in members), default=0)
            mse, bias, mse_u = math.nan, (math.nan,) * width, math.nan
        rows.append(
            AggregateRow(
                model=members[0].model_id,
                estimator=label,
                n=n,
                trials=len(members),
                mse=mse,
                bias=bias,
                mean_time_s=float(np.mean([m.time_s for m in members])),
                fail_rate=1.0 - len(ok) / len(members),
                mse_u=mse_u,
            )
        )
    return rows


def mse_slope(rows: Sequence[AggregateRow], estimator: str, min_n: int = ASYMPTOTIC_N) -> float:
    """Least-squares slope of log MSE against log N."""
    pts = [(r.n, r.mse) for r in rows if r.estimator == estimator and r.n >= min_n and r.mse > 0]
    if len(pts) < 2:
        raise ValueError(f"need two finite MSE values for {estimator}, got {len(pts)}")
    x, y = np.log([p[0] for p in pts]), np.log([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


def _fmt(value: float) -> str:
    return repr(float(value))


def _ensure_parent(path: str | Path) -> None:
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)


def csv_fields(d: int) -> list[str]:
    return ["model", "estimator", "N", "trials", "mse", *(f"bias_{i}" for i in range(1, d + 1)), "mean_time_s", "fail_rate"]


def emit_csv(rows: Sequence[AggregateRow], path: str | Path, *, d: int | None = None, timing: bool = True) -> None:
    """Write aggregate rows; ``timing=False`` blanks the wall-clock column so reruns are byte-identical."""
    width = d if d is not None else (len(rows[0].bias) if rows else 0)
    fieldnames = csv_fields(width)
    _ensure_parent(path)
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            record = {
                "model": row.model,
                "estimator": row.estimator,
                "N": row.n,
                "trials": row.trials,
                "mse": _fmt(row.mse),
                "mean_time_s": _fmt(row.mean_time_s) if timing else "",
                "fail_rate": _fmt(row.fail_rate),
            }
            record.update({f"bias_{i}": _fmt(b) for i, b in enumerate(row.bias, start=1)})
            writer.writerow(record)
    logger.info("aggregate CSV saved: %s", path)


def read_csv(path: str | Path) -> list[AggregateRow]:
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        fields = reader.fieldnames or []
        width = sum(1 for f in fields if f.startswith("bias_"))
        rows = []
        for raw in reader:
            rows.append(
                AggregateRow(
                    model=raw["model"],
                    estimator=raw["estimator"],
                    n=int(raw["N"]),
                    trials=int(raw["trials"]),
                    mse=float(raw["mse"]),
                    bias=tuple(float(raw[f"bias_{i}"]) for i in range(1, width + 1)),
                    mean_time_s=float(raw["mean_time_s"]) if raw["mean_time_s"] else math.nan,
                    fail_rate=float(raw["fail_rate"]),
                )
            )
    return rows


PLOT_METRICS = ("mse", "mse_u", "mean_time_s", "fail_rate")


def emit_plot_data(rows: Sequence[AggregateRow], path: str | Path, *, timing: bool = True) -> None:
    """Long format for plotting tools: N, estimator, metric, value."""
    _ensure_parent(path)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["N", "estimator", "metric", "value"])
        for row in rows:
            for metric in PLOT_METRICS:
                if metric == "mean_time_s" and not timing:
                    continue
                writer.writerow([row.n, row.estimator, metric, _fmt(getattr(row, metric))])


# benchmarking


@dataclass(frozen=True)
class BenchRow:
    model: str
    estimator: str
    paths: int
    reps: int
    mean_time_s: float
    std_time_s: float


def run_bench(
    model_id: str,
    estimators: Sequence[str],
    data: Sequence[float],
    *,
    reps: int | None = None,
    tracker: TrackerConfig | None = None,
    seed: int = 0,
    c: Fraction | None = None,
) -> list[BenchRow]:
    """Solve the same instantiated system ``reps`` times per estimator and time each solve."""
    reps = config.BENCH_REPS if reps is None else reps
    if reps < 1:
        raise PlanError(f"reps must be at least 1, got {reps}")
    model = get_model(model_id)
    if len(data) != model.d:
        raise PlanError(f"{model.id} needs {model.d} data values, got {len(data)}")
    rows = []
    for label in estimators:
        if not _label_ok(label):
            raise PlanError(f"unknown estimator {label!r}")
        system = estimator_system(model.id, label, c).instantiate([float(x) for x in data])
        times, paths = [], 0
        for _ in range(reps):
            report = solve(system, tracker, seed)
            times.append(report.wall_time)
            paths = report.path_count
        rows.append(
            BenchRow(
                model=model.id,
                estimator=label,
                paths=paths,
                reps=reps,
                mean_time_s=float(np.mean(times)),
                std_time_s=float(np.std(times, ddof=1)) if reps > 1 else 0.0,
            )
        )
        logger.info("bench %s/%s: %d paths, %.3f ± %.3f s", model.id, label, paths, rows[-1].mean_time_s, rows[-1].std_time_s)
    return rows


def emit_bench_csv(rows: Sequence[BenchRow], path: str | Path) -> None:
    _ensure_parent(path)
    with open(path, "w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=["model", "estimator", "paths", "reps", "mean_time_s", "std_time_s"])
        writer.writeheader()
        for row in rows:
            writer.writerow(
                {
                    "model": row.model,
                    "estimator": row.estimator,
                    "paths": row.paths,
                    "reps": row.reps,
                    "mean_time_s": _fmt(row.mean_time_s),
                    "std_time_s": _fmt(row.std_time_s),
                }
            )
