import os
import logging
from fractions import Fraction

from dotenv import find_dotenv, load_dotenv


logger = logging.getLogger(__name__)


def _env_flag(name: str, default: bool = False) -> bool:
    """Parse a boolean environment flag.

    Accepted truthy values: 1, true, yes, on
    Accepted falsy values: 0, false, no, off
    """
    raw = os.getenv(name)
    if raw is None:
        return default

    value = raw.strip().lower()
    if value in {"1", "true", "yes", "on"}:
        return True
    if value in {"0", "false", "no", "off"}:
        return False

    logger.warning("Invalid boolean value for %s=%r, using default=%s", name, raw, default)
    return default


def _env_int(name: str, default: int) -> int:
    """Parse an integer environment variable, falling back to ``default`` on bad input."""
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw.strip())
    except ValueError:
        logger.warning("Invalid integer value for %s=%r, using default=%s", name, raw, default)
        return default


def _env_float(name: str, default: float) -> float:
    """Parse a float environment variable, falling back to ``default`` on bad input."""
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return float(raw.strip())
    except ValueError:
        logger.warning("Invalid float value for %s=%r, using default=%s", name, raw, default)
        return default


def _env_fraction(name: str, default: Fraction) -> Fraction:
    """Parse a rational environment variable such as ``1/2``, falling back to ``default`` on bad input."""
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return Fraction(raw.strip())
    except (ValueError, ZeroDivisionError):
        logger.warning("Invalid rational value for %s=%r, using default=%s", name, raw, default)
        return default


_skip_dotenv = _env_flag("ALGEST_SKIP_DOTENV", default=False)

if _skip_dotenv:
    logger.info("Skipping .env loading because ALGEST_SKIP_DOTENV is set")
else:
    # Locate .env file (search upward from current working directory)
    dotenv_path = find_dotenv(usecwd=True)

    if dotenv_path:
        load_dotenv(dotenv_path=dotenv_path, override=True)
        logger.info(f"Configuration loaded from {dotenv_path}")
    else:
        logger.debug("No .env file found, using environment variables")


class Config:
    """Defaults for the estimator toolkit; every value is overridable per CLI invocation."""

    # Groebner resource ceilings
    GB_MAX_BASIS = _env_int("ALGEST_GB_MAX_BASIS", 10_000)
    GB_MAX_DEGREE = _env_int("ALGEST_GB_MAX_DEGREE", 40)

    # Path tracker
    TRACK_INITIAL_STEP = _env_float("ALGEST_TRACK_INITIAL_STEP", 0.05)
    TRACK_MIN_STEP = _env_float("ALGEST_TRACK_MIN_STEP", 1e-8)
    NEWTON_TOL = _env_float("ALGEST_NEWTON_TOL", 1e-10)
    NEWTON_MAX_ITER = _env_int("ALGEST_NEWTON_MAX_ITER", 5)
    DIVERGENCE = _env_float("ALGEST_DIVERGENCE", 1e8)
    ENDPOINT_TOL = _env_float("ALGEST_ENDPOINT_TOL", 1e-8)
    CLUSTER_RADIUS = _env_float("ALGEST_CLUSTER_RADIUS", 1e-8)
    REAL_TOL = _env_float("ALGEST_REAL_TOL", 1e-8)

    # Estimator construction
    PERTURBATION_C = _env_fraction("ALGEST_PERTURBATION_C", Fraction(1))
    FD_STEP = _env_float("ALGEST_FD_STEP", 1e-4)

    # Experiments
    TRIALS = _env_int("ALGEST_TRIALS", 200)
    SEED = _env_int("ALGEST_SEED", 0)
    BENCH_REPS = _env_int("ALGEST_BENCH_REPS", 10)
    THREADS = _env_int("ALGEST_THREADS", 1)
    PROGRESS = _env_flag("ALGEST_PROGRESS", default=True)

    logger.debug(f"GB ceilings: basis={GB_MAX_BASIS}, degree={GB_MAX_DEGREE}, threads={THREADS}")

    def __init__(self) -> None:
        """Validate the configured values."""
        if self.GB_MAX_BASIS < 1 or self.GB_MAX_DEGREE < 1:
            raise RuntimeError(
                "Config.__init__(): Groebner ceilings must be positive, got "
                f"ALGEST_GB_MAX_BASIS={self.GB_MAX_BASIS}, ALGEST_GB_MAX_DEGREE={self.GB_MAX_DEGREE}."
            )
        if not 0 < self.TRACK_INITIAL_STEP <= 1:
            raise RuntimeError(
                f"Config.__init__(): ALGEST_TRACK_INITIAL_STEP must lie in (0, 1], got {self.TRACK_INITIAL_STEP}."
            )
        if not 0 < self.TRACK_MIN_STEP < self.TRACK_INITIAL_STEP:
            raise RuntimeError(
                "Config.__init__(): ALGEST_TRACK_MIN_STEP must be positive and below ALGEST_TRACK_INITIAL_STEP, "
                f"got {self.TRACK_MIN_STEP} with initial step {self.TRACK_INITIAL_STEP}."
            )
        tolerances = {
            "ALGEST_NEWTON_TOL": self.NEWTON_TOL,
            "ALGEST_DIVERGENCE": self.DIVERGENCE,
            "ALGEST_ENDPOINT_TOL": self.ENDPOINT_TOL,
            "ALGEST_CLUSTER_RADIUS": self.CLUSTER_RADIUS,
            "ALGEST_REAL_TOL": self.REAL_TOL,
            "ALGEST_FD_STEP": self.FD_STEP,
        }
        bad = sorted(name for name, value in tolerances.items() if not value > 0)
        if bad:
            raise RuntimeError(f"Config.__init__(): tolerances must be positive: {bad}.")
        if self.NEWTON_MAX_ITER < 1 or self.TRIALS < 1 or self.BENCH_REPS < 1 or self.THREADS < 1:
            raise RuntimeError(
                "Config.__init__(): ALGEST_NEWTON_MAX_ITER, ALGEST_TRIALS, ALGEST_BENCH_REPS and ALGEST_THREADS "
                "must be at least 1."
            )


config = Config()
