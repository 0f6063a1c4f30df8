"""Numeric information geometry at a model point.

Everything here works on the ancillary parametrization w = (u, v) of a model: derivatives of η(u, v) in u at
v = 0 come from central finite differences, and the natural-parameter derivatives come from solving against the
model's Fisher metric with respect to θ. Two pairings are offered for the m-connection:

* ``"fisher"`` contracts ∂²η with ∂θ = G⁻¹∂η, the usual definition;
* ``"euclidean"`` contracts ∂²η with ∂η itself, which reproduces the closed form published for the periodic
  Gaussian model.
"""

from __future__ import annotations
import logging
from typing import TYPE_CHECKING, Literal, Mapping
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from numpy.typing import NDArray

from algebraic_estimators.config import config
from algebraic_estimators.polyalg import Polynomial


if TYPE_CHECKING:
    from algebraic_estimators.models import Model


logger = logging.getLogger(__name__)

Pairing = Literal["fisher", "euclidean"]
PAIRINGS: tuple[Pairing, ...] = ("fisher", "euclidean")

# Condition number above which the Fisher matrix is treated as singular.
SINGULAR_CONDITION = 1e12


class GeometryError(ValueError):
    """Raised when the Fisher matrix is singular at the requested point."""


@dataclass(frozen=True)
class BiasTerm:
    """Closed-form bias b^a(u): one numerator per u-coordinate over a shared denominator."""

    numerators: tuple[Polynomial, ...]
    denominator: Polynomial

    def evaluate(self, assignment: Mapping[str, float]) -> NDArray[np.float64]:
        den = _real(self.denominator, assignment)
        if den == 0:
            raise GeometryError(f"bias denominator vanishes at {dict(assignment)}")
        return np.array([_real(n, assignment) / den for n in self.numerators], dtype=np.float64)


def _real(p: Polynomial, assignment: Mapping[str, float]) -> float:
    if p.is_zero:
        return 0.0
    return complex(p.to_complex().eval(assignment)).real


@dataclass(frozen=True)
class _Jet:
    first: NDArray[np.float64]  # (d, p)
    second: NDArray[np.float64]  # (d, p, p)


def _jet(model: Model, point: NDArray[np.float64], h: float) -> _Jet:
    u0, v0 = model.ancillary_point(point)
    p = len(u0)

    def eta(u: NDArray[np.float64]) -> NDArray[np.float64]:
        return model.ancillary_eta(u, v0)

    steps = np.eye(p) * h
    center = eta(u0)
    plus = [eta(u0 + steps[a]) for a in range(p)]
    minus = [eta(u0 - steps[a]) for a in range(p)]
    first = np.stack([(plus[a] - minus[a]) / (2 * h) for a in range(p)], axis=1)
    second = np.empty((len(center), p, p))
    for a in range(p):
        second[:, a, a] = (plus[a] - 2 * center + minus[a]) / h**2
        for b in range(a + 1, p):
            mixed = (
                eta(u0 + steps[a] + steps[b])
                - eta(u0 + steps[a] - steps[b])
                - eta(u0 - steps[a] + steps[b])
                + eta(u0 - steps[a] - steps[b])
            ) / (4 * h**2)
            second[:, a, b] = second[:, b, a] = mixed
    return _Jet(first=first, second=second)


def _theta_derivative(model: Model, point: NDArray[np.float64], first: NDArray[np.float64]) -> NDArray[np.float64]:
    gram = model.fisher_at(point)
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > SINGULAR_CONDITION:
        raise GeometryError(f"Fisher matrix of {model.id} is singular at {point.tolist()} (condition {cond:.3g})")
    try:
        return np.asarray(scipy.linalg.solve(gram, first, assume_a="sym"), dtype=np.float64)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise GeometryError(f"Fisher matrix of {model.id} is singular at {point.tolist()}") from exc


def fisher_information(model: Model, point: NDArray[np.float64], *, step: float | None = None) -> NDArray[np.float64]:
    """Induced metric g_ab = ∂_aη · ∂_bθ on the model coordinates."""
    point = np.asarray(point, dtype=np.float64)
    jet = _jet(model, point, step or config.FD_STEP)
    return jet.first.T @ _theta_derivative(model, point, jet.first)


def m_connection(
    model: Model, point: NDArray[np.float64], pairing: Pairing = "fisher", *, step: float | None = None
) -> NDArray[np.float64]:
    """Γ_{ab,c} = ∂_a∂_bη · D_c, with D = ∂θ (fisher) or ∂η (euclidean)."""
    if pairing not in PAIRINGS:
        raise ValueError(f"unknown pairing {pairing!r}; expected one of {PAIRINGS}")
    point = np.asarray(point, dtype=np.float64)
    jet = _jet(model, point, step or config.FD_STEP)
    contract = _theta_derivative(model, point, jet.first) if pairing == "fisher" else jet.first
    return np.einsum("iab,ic->abc", jet.second, contract)


def bias_vector(
    model: Model, point: NDArray[np.float64], pairing: Pairing = "fisher", *, step: float | None = None
) -> NDArray[np.float64]:
    """b^a = g^{ae} Γ_{cd,e} g^{cd} by central differences."""
    if pairing not in PAIRINGS:
        raise ValueError(f"unknown pairing {pairing!r}; expected one of {PAIRINGS}")
    point = np.asarray(point, dtype=np.float64)
    jet = _jet(model, point, step or config.FD_STEP)
    dtheta = _theta_derivative(model, point, jet.first)
    metric = jet.first.T @ dtheta
    try:
        inverse = np.linalg.inv(metric)
    except np.linalg.LinAlgError as exc:
        raise GeometryError(f"induced metric of {model.id} is singular at {point.tolist()}") from exc
    contract = dtheta if pairing == "fisher" else jet.first
    gamma = np.einsum("iab,ic->abc", jet.second, contract)
    return np.einsum("ae,cde,cd->a", inverse, gamma, inverse)


def bias_correction(model: Model, point: NDArray[np.float64], n: int) -> NDArray[np.float64]:
    """Return b(û)/(2N), the amount to subtract from û in model coordinates.

    The model's closed form is used when it has one, otherwise the numeric Fisher-paired bias.
    """
    if n < 1:
        raise ValueError(f"sample size must be positive, got {n}")
    point = np.asarray(point, dtype=np.float64)
    if model.bias_term is not None:
        b = model.bias_term.evaluate(model.assignment(point))
    else:
        b = bias_vector(model, point, "fisher")
    logger.debug("bias term of %s at %s: %s", model.id, point.tolist(), b.tolist())
    return b / (2 * n)
