"""Entrypoint for the algebraic estimators command line."""

import sys
import json
import logging
import argparse
from typing import Any, Callable, Sequence
from pathlib import Path

from algebraic_estimators.utils import parse_args, setup_logger, apply_ceilings, tracker_from_args
from algebraic_estimators.frames import FrameError
from algebraic_estimators.golden import compare_printed, run_selftest
from algebraic_estimators.models import ModelError, get_model
from algebraic_estimators.polyalg import PolynomialError, format_polynomial
from algebraic_estimators.geometry import GeometryError
from algebraic_estimators.groebner import ResourceLimitError
from algebraic_estimators.homotopy import HomotopyError, NoRealSolutionError, solve, select_estimate, write_report_csv
from algebraic_estimators.simulate import (
    PlanError,
    ExperimentPlan,
    emit_csv,
    aggregate,
    run_bench,
    emit_bench_csv,
    run_experiment,
    emit_plot_data,
)
from algebraic_estimators.estimators import (
    EstimatorError,
    EstimatingSystem,
    PerturbationChoice,
    eliminate_v,
    certificate,
    parse_system,
    format_system,
    reduce_system,
    build_mle_system,
    estimator_system,
    format_certificate,
    build_vector_version,
)


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_NO_SOLUTION = 4
EXIT_SELFTEST = 5

USAGE_ERRORS = (PolynomialError, ModelError, EstimatorError, PlanError, FrameError, GeometryError, ValueError, OSError)


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    Path(output).parent.mkdir(parents=True, exist_ok=True)
    Path(output).write_text(text)
    logger.info("written: %s", output)


def _system_json(system: EstimatingSystem) -> dict[str, Any]:
    return {
        "model": system.model_id,
        "clazz": system.clazz.value,
        "c": str(system.c),
        "unknowns": list(system.unknowns),
        "variables": list(system.table.names),
        "constraints": system.n_constraints,
        "degrees": list(system.degrees),
        "total_degree_product": system.total_degree_product,
        "equations": [format_polynomial(eq) for eq in system.equations],
    }


def _load_system(path: str) -> EstimatingSystem:
    return parse_system(Path(path).read_text())


def cmd_construct(args: argparse.Namespace) -> int:
    """Print the MLE system or a first/second-order system of a built-in model."""
    model = get_model(args.model)
    if args.clazz == "mle":
        system = build_mle_system(model)
    elif isinstance(args.c, str) and not model.is_implicit:
        order = 2 if args.clazz == "second-order" else 1
        system = eliminate_v(build_vector_version(model, PerturbationChoice.default(model, order, args.c), order))
    else:
        system = estimator_system(model.id, args.clazz, None if isinstance(args.c, str) else args.c)
    factors = compare_printed(system) if args.show_golden else None
    if args.format == "json":
        payload = _system_json(system)
        if args.show_golden:
            payload["golden_factors"] = None if factors is None else [None if f is None else str(f) for f in factors]
        _emit(json.dumps(payload, indent=2) + "\n", args.output)
        return EXIT_OK
    text = format_system(system)
    if args.show_golden:
        if factors is None:
            text += "# golden none printed for this system\n"
        else:
            text += "# golden factors " + " ".join("none" if f is None else str(f) for f in factors) + "\n"
    _emit(text, args.output)
    return EXIT_OK


def cmd_reduce(args: argparse.Namespace) -> int:
    """Reduce an MLE system modulo I_k and append the class certificate."""
    mle = build_mle_system(get_model(args.model)) if args.model else _load_system(args.input)
    reduced = reduce_system(mle, args.k)
    entries = certificate(reduced, mle, args.k)
    if args.format == "json":
        payload = _system_json(reduced)
        payload["certificate"] = [
            {"index": e.index, "member": e.member, "eta_degree": e.eta_degree, "factor": str(e.factor)}
            for e in entries
        ]
        _emit(json.dumps(payload, indent=2) + "\n", args.output)
    else:
        _emit(format_system(reduced) + format_certificate(entries, args.k, reduced.total_degree_product) + "\n", args.output)
    if not all(e.member for e in entries):
        logger.warning("reduced system failed its ideal-membership certificate")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    """Solve one estimating system at a data mean and print the selected estimate."""
    system = _load_system(args.input) if args.input else estimator_system(args.model, args.estimator, args.c)
    model = get_model(system.model_id)
    report = solve(system.instantiate(args.data), tracker_from_args(args), args.seed)
    if args.report:
        write_report_csv(report, args.report)
        logger.info("path report saved: %s", args.report)
    selection = select_estimate(report, model, args.data)
    if args.format == "json":
        payload = {
            "model": model.id,
            "clazz": system.clazz.value,
            "paths": report.path_count,
            "distinct": len(report.solutions),
            "real": len(report.real_solutions),
            "estimate": dict(zip(system.unknowns, selection.point.tolist())),
            "eta": selection.eta.tolist(),
            "wall_time_s": report.wall_time,
        }
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    else:
        estimate = " ".join(f"{n}={v!r}" for n, v in zip(system.unknowns, selection.point.tolist()))
        sys.stdout.write(
            f"{model.id} {system.clazz.value}: paths={report.path_count} real={len(report.real_solutions)} "
            f"time={report.wall_time:.3f}s\n{estimate}\n"
        )
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    """Run the Monte-Carlo experiment and write the aggregate CSV."""
    model = get_model(args.model)
    plan = ExperimentPlan(
        model_id=model.id,
        truth=tuple(args.truth) if args.truth else model.truth,
        estimators=tuple(args.estimators),
        n_grid=tuple(args.n_grid),
        **{k: v for k, v in (("trials", args.trials), ("seed", args.seed)) if v is not None},
        tracker=tracker_from_args(args),
        c=args.c,
    )
    rows = aggregate(run_experiment(plan, progress=not args.quiet))
    emit_csv(rows, args.output, d=model.d, timing=not args.no_timing)
    if args.plot_data:
        emit_plot_data(rows, args.plot_data, timing=not args.no_timing)
    for row in rows:
        logger.info("%s N=%d: mse=%.4g fail_rate=%.3f", row.estimator, row.n, row.mse, row.fail_rate)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    """Time repeated solves of each estimator at one data mean."""
    rows = run_bench(
        args.model, args.estimators, args.data, reps=args.reps, tracker=tracker_from_args(args), seed=args.seed
    )
    if args.output:
        emit_bench_csv(rows, args.output)
    for row in rows:
        sys.stdout.write(
            f"{row.model} {row.estimator}: paths={row.paths} {row.mean_time_s:.3f} ± {row.std_time_s:.3f} s "
            f"({row.reps} reps)\n"
        )
    return EXIT_OK


def cmd_selftest(args: argparse.Namespace) -> int:
    """Run the published-polynomial checks; any failure exits with the selftest code."""
    results = run_selftest()
    if args.format == "json":
        payload = [{"name": r.name, "passed": r.passed, "detail": r.detail, "seconds": r.seconds} for r in results]
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    else:
        for r in results:
            sys.stdout.write(f"[{'ok' if r.passed else 'FAIL'}] {r.name}: {r.detail} ({r.seconds:.2f}s)\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_SELFTEST


COMMANDS: dict[str, Callable[[argparse.Namespace], int]] = {
    "construct": cmd_construct,
    "reduce": cmd_reduce,
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "bench": cmd_bench,
    "selftest": cmd_selftest,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Entrypoint for the algebraic estimators command line."""
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    logger = setup_logger(args.debug)
    try:
        apply_ceilings(args)
        return COMMANDS[args.command](args)
    except ResourceLimitError as e:
        logger.error("Resource ceiling exceeded: %s", e)
        return EXIT_RESOURCE
    except NoRealSolutionError as e:
        logger.error("No real solution: %s", e)
        return EXIT_NO_SOLUTION
    except HomotopyError as e:
        logger.error("Solve failed: %s", e)
        return EXIT_NO_SOLUTION
    except USAGE_ERRORS as e:
        logger.error("%s: %s", type(e).__name__, e)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
