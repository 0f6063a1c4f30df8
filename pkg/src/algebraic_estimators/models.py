"""Built-in curved exponential families.

Each model carries its expectation-parameter locus (parametrized or cut out by constraints), its frames, its
Fisher metric with respect to the natural parameter, an optional closed-form bias term and a sampler that
draws the sufficient-statistic mean of N observations.

Models:
- ``periodic-gaussian``: 4-variate centred Gaussian with circulant covariance Σ(a), d=3, p=1;
- ``log-marginal``: 2×3 Poisson table with a constant-acceleration ratio constraint, d=6, p=3;
- ``toy-linear``: parabola η(u) = (u, u²) in a unit-covariance Gaussian mean family, d=2, p=1.
"""

from __future__ import annotations
import logging
from typing import Callable, Sequence
from functools import lru_cache
from dataclasses import field, dataclass

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from algebraic_estimators.frames import (
    FrameSet,
    PolyVector,
    PolyMatrix,
    dual_frame,
    normal_frame,
    cyclic_tangent,
    exchange_tangent,
    tangent_from_parametrization,
)
from algebraic_estimators.geometry import BiasTerm
from algebraic_estimators.polyalg import Polynomial, VariableTable, parse_polynomial


logger = logging.getLogger(__name__)

FloatArray = NDArray[np.float64]

# Observations drawn per chunk by the Gaussian sampler.
SAMPLE_CHUNK = 250_000

# True parameter of the log-marginal experiments.
LOG_MARGINAL_TRUTH = (1 / 6, 1 / 4, 1 / 12, 1 / 12, 1 / 4, 1 / 6)


class ModelError(ValueError):
    """Raised for unknown model ids and parameters outside a model's domain."""


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    """Counter-based generator; identical seeds replay identical streams."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class SufficientStatMap:
    """Raw observations (one per row) to sufficient statistics."""

    t: Callable[[FloatArray], FloatArray]
    dim: int


@dataclass(frozen=True)
class Model:
    """Symbolic and numeric description of one curved exponential family.

    ``unknowns`` are the solver unknowns: the η-block for implicit models, the u-coordinates otherwise.
    ``eta`` is η(u, 0) over ``table``; ``fisher_theta`` is the Fisher metric with respect to θ (the
    covariance of the sufficient statistic).
    """

    id: str
    d: int
    p: int
    table: VariableTable
    unknowns: tuple[str, ...]
    eta: PolyVector
    constraints: tuple[Polynomial, ...]
    frames: FrameSet
    fisher_theta: PolyMatrix
    statistic: SufficientStatMap
    truth: tuple[float, ...]
    sampler: Callable[[Model, FloatArray, int, np.random.Generator], FloatArray] = field(repr=False)
    bias_term: BiasTerm | None = None
    u_indices: tuple[int, ...] = ()
    domain_check: Callable[[FloatArray], str | None] | None = field(default=None, repr=False)

    @property
    def is_implicit(self) -> bool:
        return self.unknowns == self.table.eta_block

    @property
    def data_names(self) -> tuple[str, ...]:
        return self.table.data_block

    @property
    def v_indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.d) if i not in self.u_indices)

    def assignment(self, point: Sequence[float]) -> dict[str, float]:
        if len(point) != len(self.unknowns):
            raise ModelError(f"{self.id} expects {len(self.unknowns)} coordinates, got {len(point)}")
        return {name: float(x) for name, x in zip(self.unknowns, point)}

    def check_point(self, point: Sequence[float]) -> FloatArray:
        arr = np.asarray(point, dtype=np.float64)
        if arr.shape != (len(self.unknowns),) or not np.all(np.isfinite(arr)):
            raise ModelError(f"{self.id} expects {len(self.unknowns)} finite coordinates, got {list(point)}")
        if self.domain_check is not None:
            problem = self.domain_check(arr)
            if problem:
                raise ModelError(f"{self.id}: {problem}")
        return arr

    def eta_at(self, point: Sequence[float]) -> FloatArray:
        """Expectation parameter of a model point."""
        if self.is_implicit:
            return np.asarray(point, dtype=np.float64)
        values = self.assignment(point)
        return np.array([_real(e, values) for e in self.eta], dtype=np.float64)

    def ancillary_point(self, point: Sequence[float]) -> tuple[FloatArray, FloatArray]:
        """(u, v) coordinates of a model point; v is zero on the model."""
        arr = np.asarray(point, dtype=np.float64)
        if self.is_implicit:
            return arr[list(self.u_indices)], arr[list(self.v_indices)]
        return arr, np.zeros(self.d - self.p)

    def ancillary_eta(self, u: FloatArray, v: FloatArray) -> FloatArray:
        """η(u, v) = η(u, 0) + Σ v_i e_i(u)."""
        if self.is_implicit:
            out = np.empty(self.d)
            out[list(self.u_indices)] = u
            out[list(self.v_indices)] = v
            return out
        values = self.assignment(u)
        eta = np.array([_real(e, values) for e in self.eta])
        for coeff, normal in zip(v, self.frames.g_normal):
            if coeff:
                eta = eta + coeff * np.array([_real(e, values) for e in normal])
        return eta

    def shift(self, point: Sequence[float], delta: FloatArray) -> FloatArray:
        """Move a model point by ``delta`` along its u-coordinates."""
        out = np.array(point, dtype=np.float64)
        if self.is_implicit:
            out[list(self.u_indices)] += delta
        else:
            out += delta
        return out

    def fisher_at(self, point: Sequence[float]) -> FloatArray:
        values = self.assignment(point)
        return np.array([[_real(g, values) for g in row] for row in self.fisher_theta], dtype=np.float64)

    def constraint_residuals(self, eta: Sequence[float], data: Sequence[float]) -> FloatArray:
        """Constraint values at η, data-dependent constants taken from ``data``."""
        values = {name: float(x) for name, x in zip(self.table.eta_block, eta)}
        values.update({name: float(x) for name, x in zip(self.data_names, data)})
        return np.array([_real(m, values) for m in self.constraints], dtype=np.float64)

    def sample_mean(self, point: Sequence[float], n: int, rng: np.random.Generator) -> FloatArray:
        """Sufficient-statistic mean of ``n`` observations at ``point``."""
        if n < 1:
            raise ModelError(f"sample size must be positive, got {n}")
        return self.sampler(self, self.check_point(point), n, rng)


def _real(p: Polynomial, values: dict[str, float]) -> float:
    if p.is_zero:
        return 0.0
    return complex(p.to_complex().eval(values)).real


def _vector(table: VariableTable, texts: Sequence[str]) -> PolyVector:
    return tuple(parse_polynomial(t, table) for t in texts)


# periodic Gaussian


def circulant_covariance(a: float) -> FloatArray:
    return np.array([[1, a, a * a, a], [a, 1, a, a * a], [a * a, a, 1, a], [a, a * a, a, 1]], dtype=np.float64)


def symmetric_sqrt(sigma: FloatArray) -> FloatArray:
    """Symmetric square root Q·diag(√λ)·Qᵀ."""
    eigenvalues, vectors = scipy.linalg.eigh(sigma)
    if eigenvalues.min() < -1e-12:
        raise ModelError(f"covariance is not positive semidefinite (min eigenvalue {eigenvalues.min():.3g})")
    return np.asarray((vectors * np.sqrt(np.clip(eigenvalues, 0.0, None))) @ vectors.T, dtype=np.float64)


def periodic_gaussian_statistic(x: FloatArray) -> FloatArray:
    """t(x) = (−½Σx², −(x1x2+x2x3+x3x4+x4x1), −(x1x3+x2x4)) per row."""
    x1, x2, x3, x4 = x[:, 0], x[:, 1], x[:, 2], x[:, 3]
    return np.stack(
        [-0.5 * np.sum(x * x, axis=1), -(x1 * x2 + x2 * x3 + x3 * x4 + x4 * x1), -(x1 * x3 + x2 * x4)], axis=1
    )


def _gaussian_sampler(model: Model, point: FloatArray, n: int, rng: np.random.Generator) -> FloatArray:
    root = symmetric_sqrt(circulant_covariance(float(point[0])))
    total = np.zeros(model.d)
    remaining = n
    while remaining:
        size = min(remaining, SAMPLE_CHUNK)
        draws = rng.standard_normal((size, 4)) @ root
        total += model.statistic.t(draws).sum(axis=0)
        remaining -= size
    return total / n


def _check_correlation(point: FloatArray) -> str | None:
    a = float(point[0])
    return None if 0 <= a < 1 else f"a must lie in [0, 1), got {a}"


@lru_cache(maxsize=None)
def periodic_gaussian() -> Model:
    table = VariableTable(("a", "x1", "x2", "x3"))
    eta = _vector(table, ["-2", "-4*a", "-2*a^2"])
    edge = "8*a + 8*a^3"
    fisher = (
        _vector(table, ["2*a^4 + 4*a^2 + 2", edge, "8*a^2"]),
        _vector(table, [edge, "4 + 24*a^2 + 4*a^4", edge]),
        _vector(table, ["8*a^2", edge, "2*a^4 + 4*a^2 + 2"]),
    )
    tangent = tangent_from_parametrization(eta, ("a",))
    dual = dual_frame(tangent, fisher)
    frames = FrameSet(
        tangent=tangent,
        g_normal=(_vector(table, ["3*a^2 + 1", "4*a", "0"]), _vector(table, ["-a^2 - 1", "0", "2"])),
        # ∂η/4
        completion=(_vector(table, ["0", "-1", "-a"]),),
        dual=dual,
    )
    bias = BiasTerm(
        numerators=(parse_polynomial("a^9 - 4*a^7 + 6*a^5 - 4*a^3 + a", table),),
        denominator=parse_polynomial("4*a^4 + 4*a^2 + 1", table),
    )
    return Model(
        id="periodic-gaussian",
        d=3,
        p=1,
        table=table,
        unknowns=("a",),
        eta=eta,
        constraints=(),
        frames=frames,
        fisher_theta=fisher,
        statistic=SufficientStatMap(t=periodic_gaussian_statistic, dim=4),
        truth=(0.5,),
        sampler=_gaussian_sampler,
        bias_term=bias,
        domain_check=_check_correlation,
    )


# log marginal


def _poisson_sampler(model: Model, point: FloatArray, n: int, rng: np.random.Generator) -> FloatArray:
    # the sum of n i.i.d. Po(η) vectors is Po(nη)
    return np.asarray(rng.poisson(n * point), dtype=np.float64) / n


def _check_intensities(point: FloatArray) -> str | None:
    return None if np.all(point > 0) else f"intensities must be positive, got {point.tolist()}"


def log_marginal_constraints(table: VariableTable) -> tuple[Polynomial, ...]:
    """Ratio constraint, row balance, and total mass equal to the data total s = Σx."""
    return (
        parse_polynomial("eta1*eta3*eta5^2 - eta2^2*eta4*eta6", table),
        parse_polynomial("eta1 + eta2 + eta3 - eta4 - eta5 - eta6", table),
        parse_polynomial("eta1 + eta2 + eta3 + eta4 + eta5 + eta6 - x1 - x2 - x3 - x4 - x5 - x6", table),
    )


@lru_cache(maxsize=None)
def log_marginal() -> Model:
    table = VariableTable.standard(6)
    eta = Polynomial.variables(table, *table.eta_block)
    constraints = log_marginal_constraints(table)
    gradient = tuple(constraints[0].diff(name) for name in table.eta_block)
    zero = Polynomial.zero(table)
    fisher = tuple(tuple(eta[i] if i == j else zero for j in range(6)) for i in range(6))
    tangent = (
        exchange_tangent(gradient, (0, 1), (3, 5)),
        exchange_tangent(gradient, (2, 1), (3, 5)),
        cyclic_tangent(gradient, (3, 4, 5)),
    )
    normals = (
        _vector(table, ["eta1", "eta2", "eta3", "0", "0", "0"]),
        _vector(
            table,
            [
                "-eta1^2*eta5^2 + eta1*eta3*eta5^2",
                "-eta1*eta2*eta5^2 - 2*eta2^2*eta4*eta6",
                "0",
                "eta2^2*eta4^2 - eta2^2*eta4*eta6",
                "eta2^2*eta4*eta5 + 2*eta1*eta3*eta5^2",
                "0",
            ],
        ),
        _vector(
            table,
            [
                "eta1^2*eta5^2 - eta1*eta3*eta5^2",
                "eta1*eta2*eta5^2 + 2*eta2^2*eta4*eta6",
                "0",
                "2*eta1*eta3*eta4*eta5 + eta2^2*eta4*eta6",
                "0",
                "eta2^2*eta4*eta6 + 2*eta1*eta3*eta5*eta6",
            ],
        ),
    )
    frames = FrameSet(tangent=tangent, g_normal=normals, completion=(tangent[0],), dual=dual_frame(tangent, fisher))
    bias = BiasTerm(numerators=(zero, zero, zero), denominator=Polynomial.constant(table, 1))
    return Model(
        id="log-marginal",
        d=6,
        p=3,
        table=table,
        unknowns=table.eta_block,
        eta=eta,
        constraints=constraints,
        frames=frames,
        fisher_theta=fisher,
        statistic=SufficientStatMap(t=lambda x: x, dim=6),
        truth=LOG_MARGINAL_TRUTH,
        sampler=_poisson_sampler,
        bias_term=bias,
        u_indices=(0, 2, 4),
        domain_check=_check_intensities,
    )


# toy linear


def _toy_sampler(model: Model, point: FloatArray, n: int, rng: np.random.Generator) -> FloatArray:
    return model.eta_at(point) + rng.standard_normal(model.d) / np.sqrt(n)


@lru_cache(maxsize=None)
def toy_linear() -> Model:
    table = VariableTable(("u", "x1", "x2"))
    eta = _vector(table, ["u", "u^2"])
    one, zero = Polynomial.constant(table, 1), Polynomial.zero(table)
    fisher = ((one, zero), (zero, one))
    tangent = tangent_from_parametrization(eta, ("u",))
    dual = dual_frame(tangent, fisher)
    frames = FrameSet(tangent=tangent, g_normal=normal_frame(dual), completion=tangent, dual=dual)
    return Model(
        id="toy-linear",
        d=2,
        p=1,
        table=table,
        unknowns=("u",),
        eta=eta,
        constraints=(),
        frames=frames,
        fisher_theta=fisher,
        statistic=SufficientStatMap(t=lambda x: x, dim=2),
        truth=(0.5,),
        sampler=_toy_sampler,
    )


MODELS: dict[str, Callable[[], Model]] = {
    "periodic-gaussian": periodic_gaussian,
    "log-marginal": log_marginal,
    "toy-linear": toy_linear,
}


def get_model(model_id: str) -> Model:
    try:
        factory = MODELS[model_id]
    except KeyError:
        raise ModelError(f"unknown model {model_id!r}; choose from {sorted(MODELS)}") from None
    return factory()
