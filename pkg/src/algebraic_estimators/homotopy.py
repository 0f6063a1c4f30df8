"""Total-degree homotopy continuation for square polynomial systems.

The target F is compiled to dense numpy exponent/coefficient arrays. Each start root of
``a_i z_i^{d_i} − b_i`` is tracked along H(z, t) = γ(1 − t)·S(z) + t·F(z) with an Euler predictor and a Newton
corrector, halving the step on corrector failure and doubling it after a run of successes. Paths that blow
up or stall are recorded, never raised.
"""

from __future__ import annotations
import csv
import time
import logging
import itertools
from enum import Enum
from typing import TYPE_CHECKING, Sequence
from pathlib import Path
from dataclasses import field, dataclass
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from numpy.typing import NDArray

from algebraic_estimators.config import config
from algebraic_estimators.models import make_rng
from algebraic_estimators.polyalg import Polynomial


if TYPE_CHECKING:
    from algebraic_estimators.models import Model
    from algebraic_estimators.estimators import EstimatingSystem


logger = logging.getLogger(__name__)

ComplexArray = NDArray[np.complex128]

# Consecutive accepted steps before the step size doubles.
GROWTH_STREAK = 3
# Newton iterations allowed when polishing an endpoint at t = 1.
REFINE_ITER = 50
# Largest step in t.
MAX_STEP = 0.25


class HomotopyError(RuntimeError):
    """Raised when every path fails or the system cannot be tracked at all."""


class NoRealSolutionError(HomotopyError):
    """Raised by estimate selection when no real solution survived."""


class PathStatus(str, Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    FAILED = "failed"


@dataclass(frozen=True)
class TrackerConfig:
    """Step control and tolerances; defaults come from the configuration."""

    initial_step: float = field(default_factory=lambda: config.TRACK_INITIAL_STEP)
    min_step: float = field(default_factory=lambda: config.TRACK_MIN_STEP)
    newton_tol: float = field(default_factory=lambda: config.NEWTON_TOL)
    newton_max_iter: int = field(default_factory=lambda: config.NEWTON_MAX_ITER)
    divergence: float = field(default_factory=lambda: config.DIVERGENCE)
    endpoint_tol: float = field(default_factory=lambda: config.ENDPOINT_TOL)
    cluster_radius: float = field(default_factory=lambda: config.CLUSTER_RADIUS)
    real_tol: float = field(default_factory=lambda: config.REAL_TOL)
    threads: int = field(default_factory=lambda: config.THREADS)

    def __post_init__(self) -> None:
        """Reject inconsistent step sizes and nonpositive tolerances."""
        if not 0 < self.initial_step <= 1:
            raise ValueError(f"initial step must lie in (0, 1], got {self.initial_step}")
        if not 0 < self.min_step < self.initial_step:
            raise ValueError(f"min step {self.min_step} must be positive and below the initial step")
        for name in ("newton_tol", "divergence", "endpoint_tol", "cluster_radius", "real_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.newton_max_iter < 1 or self.threads < 1:
            raise ValueError("newton_max_iter and threads must be at least 1")


@dataclass(frozen=True)
class CompiledSystem:
    """Polynomials over named unknowns as stacked exponent rows with owning-equation indices."""

    names: tuple[str, ...]
    exponents: NDArray[np.int64]
    coefficients: ComplexArray
    owner: NDArray[np.int64]
    degrees: tuple[int, ...]

    @classmethod
    def from_polynomials(cls, polys: Sequence[Polynomial], names: Sequence[str]) -> CompiledSystem:
        if not polys:
            raise HomotopyError("cannot compile an empty system")
        table = polys[0].table
        idx = [table.index(n) for n in names]
        rows, coeffs, owner, degrees = [], [], [], []
        for k, p in enumerate(polys):
            extra = set(p.free_variables()) - set(names)
            if extra:
                raise HomotopyError(f"equation {k} has unbound variables {sorted(extra)}; instantiate the data first")
            if p.is_zero:
                raise HomotopyError(f"equation {k} is identically zero")
            degree = 0
            for exps, c in p.terms.items():
                row = [exps[i] for i in idx]
                rows.append(row)
                coeffs.append(complex(c))
                owner.append(k)
                degree = max(degree, sum(row))
            degrees.append(degree)
        return cls(
            names=tuple(names),
            exponents=np.asarray(rows, dtype=np.int64).reshape(-1, len(idx)),
            coefficients=np.asarray(coeffs, dtype=np.complex128),
            owner=np.asarray(owner, dtype=np.int64),
            degrees=tuple(degrees),
        )

    @property
    def size(self) -> int:
        return len(self.degrees)

    def _powers(self, z: ComplexArray) -> ComplexArray:
        return np.power(z[None, :], self.exponents)

    def __call__(self, z: ComplexArray) -> ComplexArray:
        values = self.coefficients * np.prod(self._powers(z), axis=1)
        out = np.zeros(self.size, dtype=np.complex128)
        np.add.at(out, self.owner, values)
        return out

    def jacobian(self, z: ComplexArray) -> ComplexArray:
        powers = self._powers(z)
        lowered = np.power(z[None, :], np.maximum(self.exponents - 1, 0))
        out = np.zeros((self.size, len(self.names)), dtype=np.complex128)
        for k in range(len(self.names)):
            column = powers.copy()
            column[:, k] = self.exponents[:, k] * lowered[:, k]
            np.add.at(out[:, k], self.owner, self.coefficients * np.prod(column, axis=1))
        return out


@dataclass(frozen=True)
class StartSystem:
    """a_i z_i^{d_i} − b_i with all ∏ d_i roots and the γ constant of the homotopy."""

    degrees: tuple[int, ...]
    a: ComplexArray
    b: ComplexArray
    gamma: complex
    roots: ComplexArray

    def __call__(self, z: ComplexArray) -> ComplexArray:
        return self.a * z ** np.asarray(self.degrees) - self.b

    def jacobian(self, z: ComplexArray) -> ComplexArray:
        deg = np.asarray(self.degrees)
        return np.diag(self.a * deg * z ** (deg - 1))


def _unit(rng: np.random.Generator, size: int) -> ComplexArray:
    return np.exp(2j * np.pi * rng.random(size))


def total_degree_start(system: EstimatingSystem | CompiledSystem, seed: int) -> StartSystem:
    """Start system matching the equation degrees, with every root listed explicitly."""
    compiled = system if isinstance(system, CompiledSystem) else compile_system(system)
    degrees = compiled.degrees
    if any(d < 1 for d in degrees):
        raise HomotopyError(f"equation degrees {degrees} include a constant equation")
    rng = make_rng(seed)
    a, b = _unit(rng, len(degrees)), _unit(rng, len(degrees))
    gamma = complex(_unit(rng, 1)[0])
    per_coordinate = []
    for ai, bi, d in zip(a, b, degrees):
        base = (bi / ai) ** (1 / d)
        per_coordinate.append(base * np.exp(2j * np.pi * np.arange(d) / d))
    roots = np.array(list(itertools.product(*per_coordinate)), dtype=np.complex128)
    return StartSystem(degrees=degrees, a=a, b=b, gamma=gamma, roots=roots)


def compile_system(system: EstimatingSystem) -> CompiledSystem:
    return CompiledSystem.from_polynomials(system.equations, system.unknowns)


@dataclass(frozen=True)
class PathOutcome:
    status: PathStatus
    endpoint: ComplexArray
    steps: int
    residual: float


def _newton(
    jac: ComplexArray, value: ComplexArray
) -> ComplexArray | None:
    try:
        return np.asarray(np.linalg.solve(jac, -value), dtype=np.complex128)
    except np.linalg.LinAlgError:
        return None


def _norm(z: ComplexArray) -> float:
    return float(np.max(np.abs(z))) if len(z) else 0.0


def track_path(target: CompiledSystem, start: StartSystem, root: ComplexArray, cfg: TrackerConfig) -> PathOutcome:
    """Follow one root from t = 0 to t = 1 and polish the endpoint on the target alone."""
    gamma = start.gamma

    def h(z: ComplexArray, t: float) -> ComplexArray:
        return gamma * (1 - t) * start(z) + t * target(z)

    def hz(z: ComplexArray, t: float) -> ComplexArray:
        return gamma * (1 - t) * start.jacobian(z) + t * target.jacobian(z)

    def ht(z: ComplexArray) -> ComplexArray:
        return target(z) - gamma * start(z)

    z = np.array(root, dtype=np.complex128)
    t, step, streak, steps = 0.0, cfg.initial_step, 0, 0
    if _norm(target(z)) < cfg.newton_tol:
        # a common root of start and target stays put along the whole homotopy
        t, steps = 1.0, 1
    while t < 1.0:
        step = min(step, 1.0 - t)
        direction = _newton(hz(z, t), ht(z))
        accepted = False
        if direction is not None:
            t_next = 1.0 if 1.0 - (t + step) < 1e-14 else t + step
            candidate = z + (t_next - t) * direction
            for _ in range(cfg.newton_max_iter):
                delta = _newton(hz(candidate, t_next), h(candidate, t_next))
                if delta is None or not np.all(np.isfinite(delta)):
                    break
                candidate = candidate + delta
                if _norm(delta) <= cfg.newton_tol * (1.0 + _norm(candidate)):
                    accepted = True
                    break
        steps += 1
        if accepted:
            z, t = candidate, t_next
            streak += 1
            if streak >= GROWTH_STREAK:
                step, streak = min(2 * step, MAX_STEP), 0
            if _norm(z) > cfg.divergence:
                return PathOutcome(PathStatus.DIVERGED, z, steps, float("inf"))
        else:
            step, streak = step / 2, 0
            if step < cfg.min_step:
                status = PathStatus.DIVERGED if _norm(z) > np.sqrt(cfg.divergence) else PathStatus.FAILED
                return PathOutcome(status, z, steps, _norm(target(z)))

    for _ in range(REFINE_ITER):
        delta = _newton(target.jacobian(z), target(z))
        if delta is None or not np.all(np.isfinite(delta)):
            break
        z = z + delta
        if _norm(delta) <= 1e-15 * (1.0 + _norm(z)):
            break
    residual = _norm(target(z))
    if not np.isfinite(residual):
        return PathOutcome(PathStatus.DIVERGED, z, steps, float("inf"))
    status = PathStatus.CONVERGED if residual < cfg.endpoint_tol else PathStatus.FAILED
    return PathOutcome(status, z, steps, residual)


@dataclass(frozen=True)
class SolveReport:
    unknowns: tuple[str, ...]
    path_count: int
    outcomes: tuple[PathOutcome, ...]
    solutions: tuple[ComplexArray, ...]
    real_solutions: tuple[NDArray[np.float64], ...]
    wall_time: float

    def count(self, status: PathStatus) -> int:
        return sum(1 for o in self.outcomes if o.status is status)


def cluster_endpoints(points: Sequence[ComplexArray], radius: float) -> list[ComplexArray]:
    """Greedy clustering in canonical order; the first member of a cluster represents it."""
    ordered = sorted(points, key=lambda z: tuple(itertools.chain.from_iterable((c.real, c.imag) for c in z)))
    reps: list[ComplexArray] = []
    for z in ordered:
        if all(_norm(z - r) > radius * max(1.0, _norm(r)) for r in reps):
            reps.append(z)
    return reps


def solve(system: EstimatingSystem, cfg: TrackerConfig | None = None, seed: int = 0) -> SolveReport:
    """Track every total-degree path, cluster converged endpoints, keep the real ones."""
    cfg = cfg or TrackerConfig()
    started = time.perf_counter()
    target = compile_system(system)
    start = total_degree_start(target, seed)
    roots = list(start.roots)
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            outcomes = list(pool.map(lambda r: track_path(target, start, r, cfg), roots))
    else:
        outcomes = [track_path(target, start, r, cfg) for r in roots]
    converged = [o.endpoint for o in outcomes if o.status is PathStatus.CONVERGED]
    if not converged and all(o.status is PathStatus.FAILED for o in outcomes):
        raise HomotopyError(f"all {len(outcomes)} paths failed for {system.model_id}/{system.clazz.value}")
    solutions = cluster_endpoints(converged, cfg.cluster_radius)
    real = tuple(
        np.asarray(z.real, dtype=np.float64) for z in solutions if np.max(np.abs(z.imag), initial=0.0) < cfg.real_tol
    )
    report = SolveReport(
        unknowns=system.unknowns,
        path_count=len(roots),
        outcomes=tuple(outcomes),
        solutions=tuple(solutions),
        real_solutions=real,
        wall_time=time.perf_counter() - started,
    )
    failed = report.count(PathStatus.FAILED)
    if failed:
        logger.warning("%d of %d paths failed", failed, report.path_count)
    logger.info(
        "solve %s/%s: %d paths, %d converged, %d diverged, %d distinct, %d real, %.3fs",
        system.model_id,
        system.clazz.value,
        report.path_count,
        report.count(PathStatus.CONVERGED),
        report.count(PathStatus.DIVERGED),
        len(solutions),
        len(real),
        report.wall_time,
    )
    return report


@dataclass(frozen=True)
class Selection:
    point: NDArray[np.float64]
    eta: NDArray[np.float64]
    distance: float


def select_estimate(report: SolveReport, model: Model, data: Sequence[float]) -> Selection:
    """Real solution whose η is closest to the data mean; ties go to the lexicographically smallest η."""
    if not report.real_solutions:
        raise NoRealSolutionError(f"no real solution among {len(report.solutions)} distinct endpoints")
    target = np.asarray(data, dtype=np.float64)
    best: tuple[float, tuple[float, ...], NDArray[np.float64], NDArray[np.float64]] | None = None
    for point in report.real_solutions:
        eta = model.eta_at(point)
        dist = float(np.linalg.norm(eta - target))
        key = (dist, tuple(eta.tolist()))
        if best is None or key < best[:2]:
            best = (dist, key[1], point, eta)
    assert best is not None
    return Selection(point=best[2], eta=best[3], distance=best[0])


def write_report_csv(report: SolveReport, path: str | Path) -> None:
    """One row per path: path_id, status, steps, residual, then re/im pairs of the endpoint."""
    n = len(report.unknowns)
    header = ["path_id", "status", "steps", "residual"]
    for i in range(1, n + 1):
        header += [f"re_{i}", f"im_{i}"]
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for k, outcome in enumerate(report.outcomes):
            row: list[object] = [k, outcome.status.value, outcome.steps, repr(outcome.residual)]
            for value in outcome.endpoint:
                row += [repr(float(value.real)), repr(float(value.imag))]
            writer.writerow(row)
