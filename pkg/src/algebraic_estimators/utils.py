import logging
import argparse
import warnings
from typing import Sequence
from fractions import Fraction

from algebraic_estimators.config import config
from algebraic_estimators.models import MODELS
from algebraic_estimators.homotopy import TrackerConfig
from algebraic_estimators.estimators import PERTURBATION_SYMBOL, ESTIMATOR_LABELS


ESTIMATOR_CHOICES = tuple(ESTIMATOR_LABELS) + tuple(f"{label}-bc" for label in ESTIMATOR_LABELS)


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _perturbation(text: str) -> Fraction | str:
    return text if text == PERTURBATION_SYMBOL else _rational(text)


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _shared_options() -> argparse.ArgumentParser:
    """Flags every subcommand accepts: logging, tolerances and resource ceilings."""
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--debug", default=False, action="store_true", help="Enable debug logging")
    shared.add_argument("--quiet", default=False, action="store_true", help="Hide progress bars")
    shared.add_argument("--format", choices=["text", "json"], default="text", help="Output format (default: text)")
    shared.add_argument("--threads", type=_positive_int, default=None, help="Path-tracking threads")
    shared.add_argument("--initial-step", type=float, default=None, help="Initial tracker step in t")
    shared.add_argument("--min-step", type=float, default=None, help="Smallest tracker step before a path fails")
    shared.add_argument("--newton-tol", type=float, default=None, help="Corrector tolerance")
    shared.add_argument("--endpoint-tol", type=float, default=None, help="Residual bound for converged endpoints")
    shared.add_argument("--real-tol", type=float, default=None, help="Imaginary-part bound for real solutions")
    shared.add_argument("--max-basis", type=_positive_int, default=None, help="Groebner basis size ceiling")
    shared.add_argument("--max-degree", type=_positive_int, default=None, help="Groebner degree ceiling")
    return shared


def _add_model(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", choices=sorted(MODELS), required=True, help="Built-in model id")


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_options()
    parser = argparse.ArgumentParser("algebraic-estimators", description="Algebraic second-order efficient estimators")
    commands = parser.add_subparsers(dest="command", required=True)

    construct = commands.add_parser("construct", parents=[shared], help="Print an estimating system")
    _add_model(construct)
    construct.add_argument("--clazz", choices=ESTIMATOR_LABELS, default="mle", help="Estimator class (default: mle)")
    construct.add_argument(
        "--c", type=_perturbation, default=None, help=f"Perturbation constant, a rational or {PERTURBATION_SYMBOL!r}"
    )
    construct.add_argument("--show-golden", default=False, action="store_true", help="Compare with the printed form")
    construct.add_argument("--output", default=None, help="Write the system here instead of stdout")

    reduce = commands.add_parser("reduce", parents=[shared], help="Reduce an MLE system modulo I_2 or I_3")
    source = reduce.add_mutually_exclusive_group(required=True)
    source.add_argument("--model", choices=sorted(MODELS), help="Reduce the model's MLE system")
    source.add_argument("--input", help="Reduce a system file in the exchange grammar")
    reduce.add_argument("--k", type=int, choices=[2, 3], default=3, help="Residual power (default: 3)")
    reduce.add_argument("--output", default=None, help="Write the system here instead of stdout")

    solve = commands.add_parser("solve", parents=[shared], help="Solve an estimating system by homotopy")
    target = solve.add_mutually_exclusive_group(required=True)
    target.add_argument("--model", choices=sorted(MODELS), help="Built-in model id")
    target.add_argument("--input", help="System file in the exchange grammar")
    solve.add_argument("--estimator", choices=ESTIMATOR_LABELS, default="mle", help="Estimator (default: mle)")
    solve.add_argument("--data", type=float, nargs="+", required=True, help="Observed sufficient-statistic mean")
    solve.add_argument("--c", type=_rational, default=None, help="Perturbation constant")
    solve.add_argument("--seed", type=int, default=0, help="Start-system seed")
    solve.add_argument("--report", default=None, help="Write per-path CSV here")

    simulate = commands.add_parser("simulate", parents=[shared], help="Monte-Carlo MSE/bias/time experiment")
    _add_model(simulate)
    simulate.add_argument("--estimators", choices=ESTIMATOR_CHOICES, nargs="+", default=["mle", "second-order"])
    simulate.add_argument("--truth", type=float, nargs="+", default=None, help="True point (default: model's)")
    simulate.add_argument("--n-grid", type=_positive_int, nargs="+", default=[100, 1000, 10000], help="Sample sizes")
    simulate.add_argument("--trials", type=_positive_int, default=None, help=f"Trials per N (default: {config.TRIALS})")
    simulate.add_argument("--seed", type=int, default=None, help=f"Master seed (default: {config.SEED})")
    simulate.add_argument("--c", type=_rational, default=None, help="Perturbation constant")
    simulate.add_argument("--output", required=True, help="Aggregate CSV path")
    simulate.add_argument("--plot-data", default=None, help="Long-format plot data CSV path")
    simulate.add_argument("--no-timing", default=False, action="store_true", help="Blank the timing column")

    bench = commands.add_parser("bench", parents=[shared], help="Time repeated solves")
    _add_model(bench)
    bench.add_argument("--estimators", choices=ESTIMATOR_LABELS, nargs="+", default=["mle", "second-order"])
    bench.add_argument("--data", type=float, nargs="+", required=True, help="Observed sufficient-statistic mean")
    bench.add_argument("--reps", type=_positive_int, default=None, help=f"Repetitions (default: {config.BENCH_REPS})")
    bench.add_argument("--seed", type=int, default=0, help="Start-system seed")
    bench.add_argument("--output", default=None, help="Bench CSV path")

    commands.add_parser("selftest", parents=[shared], help="Check the built-in models against published polynomials")
    return parser


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """Parse command line arguments; unknown flags are rejected."""
    return build_parser().parse_args(argv)


def tracker_from_args(args: argparse.Namespace) -> TrackerConfig:
    """Configured tracker defaults with the command-line overrides applied."""
    overrides = {
        "threads": args.threads,
        "initial_step": args.initial_step,
        "min_step": args.min_step,
        "newton_tol": args.newton_tol,
        "endpoint_tol": args.endpoint_tol,
        "real_tol": args.real_tol,
    }
    return TrackerConfig(**{k: v for k, v in overrides.items() if v is not None})


def apply_ceilings(args: argparse.Namespace) -> None:
    if args.max_basis is not None:
        config.GB_MAX_BASIS = args.max_basis
    if args.max_degree is not None:
        config.GB_MAX_DEGREE = args.max_degree
    if args.quiet:
        config.PROGRESS = False


def setup_logger(debug: bool) -> logging.Logger:
    """Setups the logger."""
    log_level = "DEBUG" if debug else "INFO"
    logging.basicConfig(
        level=getattr(logging, log_level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s:%(lineno)d | %(message)s",
    )
    logger = logging.getLogger(__name__)

    # numpy polyfit on near-flat MSE curves
    warnings.filterwarnings("ignore", message=".*Polyfit may be poorly conditioned.*")

    # Tame third-party noise (looser in DEBUG)
    logging.getLogger("dotenv").setLevel(logging.INFO if log_level == "DEBUG" else logging.ERROR)
    return logger
