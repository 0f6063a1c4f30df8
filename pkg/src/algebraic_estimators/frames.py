"""Frame vectors of a curved exponential family.

A frame set holds the tangent directions of the model, a completion of the tangent space, a basis of its
Fisher-orthogonal complement and the dual vectors whose pairing with ``x - eta`` gives the estimating
equations. Built-in models mostly carry their published frames; the synthesis helpers here produce the rest
and are checked against the published ones in the tests.
"""

from __future__ import annotations
import math
import logging
import itertools
from typing import Sequence
from fractions import Fraction
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from algebraic_estimators.polyalg import (
    Exponents,
    Polynomial,
    MonomialOrder,
    content,
    exact_quotient,
    univariate_gcd,
    monomial_content,
)


logger = logging.getLogger(__name__)

PolyVector = tuple[Polynomial, ...]
PolyMatrix = tuple[tuple[Polynomial, ...], ...]


class FrameError(ValueError):
    """Raised when a frame construction degenerates."""


@dataclass(frozen=True)
class FrameSet:
    """Tangent, completion, Fisher-normal and dual vectors of one model."""

    tangent: tuple[PolyVector, ...]
    g_normal: tuple[PolyVector, ...]
    completion: tuple[PolyVector, ...]
    dual: tuple[PolyVector, ...]


def dot(u: Sequence[Polynomial], v: Sequence[Polynomial]) -> Polynomial:
    if len(u) != len(v):
        raise FrameError(f"vector lengths differ: {len(u)} vs {len(v)}")
    total = Polynomial.zero(u[0].table, u[0].domain)
    for a, b in zip(u, v):
        if a and b:
            total = total + a * b
    return total


def mat_vec(m: Sequence[Sequence[Polynomial]], v: Sequence[Polynomial]) -> PolyVector:
    return tuple(dot(row, v) for row in m)


def determinant(m: Sequence[Sequence[Polynomial]]) -> Polynomial:
    """Laplace expansion along the sparsest row; zero entries are skipped."""
    n = len(m)
    if n == 0:
        raise FrameError("determinant of an empty matrix")
    table, domain = m[0][0].table, m[0][0].domain
    if n == 1:
        return m[0][0]
    row = min(range(n), key=lambda r: sum(1 for x in m[r] if x))
    if not any(m[row]):
        return Polynomial.zero(table, domain)
    total = Polynomial.zero(table, domain)
    for col, entry in enumerate(m[row]):
        if not entry:
            continue
        minor = [[x for j, x in enumerate(r) if j != col] for i, r in enumerate(m) if i != row]
        term = entry * determinant(minor)
        total = total - term if (row + col) % 2 else total + term
    return total


def adjugate(m: Sequence[Sequence[Polynomial]]) -> PolyMatrix:
    n = len(m)
    if n == 1:
        return ((Polynomial.constant(m[0][0].table, 1, m[0][0].domain),),)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            minor = [[x for c, x in enumerate(r) if c != i] for k, r in enumerate(m) if k != j]
            cof = determinant(minor)
            row.append(-cof if (i + j) % 2 else cof)
        out.append(tuple(row))
    return tuple(out)


def strip_content(vector: Sequence[Polynomial]) -> PolyVector:
    """Remove the common monomial factor, the univariate gcd if any, and the rational content."""
    nonzero = [p for p in vector if p]
    if not nonzero:
        raise FrameError("cannot normalise the zero vector")
    table = nonzero[0].table
    common = monomial_content(nonzero)
    out = list(vector)
    if common is not None and any(common):
        out = [_shift(p, common) for p in out]
    names = set().union(*(p.free_variables() for p in out if p))
    if len(names) == 1:
        g = Polynomial.zero(table)
        for p in out:
            if p:
                g = univariate_gcd(g, p) if g else p.monic(MonomialOrder.lex(table))
        if g and not g.is_constant:
            out = [exact_quotient(p, g) if p else p for p in out]
    num, den = 0, 1
    for p in out:
        if p:
            c = content(p)
            num, den = math.gcd(num, c.numerator), math.lcm(den, c.denominator)
    return tuple(p.scale(Fraction(den, num)) for p in out)


def _shift(p: Polynomial, common: Exponents) -> Polynomial:
    if not p:
        return p
    return Polynomial._raw(
        p.table, {tuple(e - c for e, c in zip(exps, common)): v for exps, v in p.terms.items()}, p.domain
    )


def dual_frame(
    tangents: Sequence[Sequence[Polynomial]], fisher_theta: Sequence[Sequence[Polynomial]]
) -> tuple[PolyVector, ...]:
    """Dual vectors adj(G)·t_j with denominators cleared.

    ``fisher_theta`` is the Fisher metric with respect to the natural parameter, so G⁻¹·t is the natural-
    parameter derivative along t and (x − η)ᵀG⁻¹t = 0 are the likelihood equations.
    """
    adj = adjugate(fisher_theta)
    duals = []
    for t in tangents:
        raw = mat_vec(adj, t)
        if not any(raw):
            raise FrameError("tangent vector maps to zero; Fisher metric is singular along it")
        duals.append(strip_content(raw))
    return tuple(duals)


def normal_frame(duals: Sequence[Sequence[Polynomial]]) -> tuple[PolyVector, ...]:
    """Basis of {e : ẽ_jᵀe = 0 for all j} from maximal minors.

    The first pivot column set with a nonzero minor is used; for every other column k the vector has
    det(D_P) at k and −adj(D_P)·D_k on the pivots.
    """
    p, d = len(duals), len(duals[0])
    table = duals[0][0].table
    for pivots in itertools.combinations(range(d), p):
        block = [[row[c] for c in pivots] for row in duals]
        det = determinant(block)
        if det:
            break
    else:
        raise FrameError("dual frame has no nonzero maximal minor; determinant vanishes identically")
    adj = adjugate(block)
    normals = []
    for k in range(d):
        if k in pivots:
            continue
        column = [row[k] for row in duals]
        pivot_part = mat_vec(adj, column)
        vec = [Polynomial.zero(table) for _ in range(d)]
        vec[k] = det
        for slot, c in enumerate(pivots):
            vec[c] = -pivot_part[slot]
        normals.append(strip_content(vec))
    return tuple(normals)


def exchange_tangent(gradient: Sequence[Polynomial], first: tuple[int, int], second: tuple[int, int]) -> PolyVector:
    """Tangent vector moving mass inside two index pairs.

    For a model cut out by one polynomial with gradient ``g`` and by sums over the blocks holding the two
    pairs, the vector with (g_k − g_l) at i, −(g_k − g_l) at j, −(g_i − g_j) at k and (g_i − g_j) at l
    annihilates ``g`` and keeps both block sums fixed.
    """
    (i, j), (k, l) = first, second
    table = gradient[0].table
    out = [Polynomial.zero(table) for _ in gradient]
    a = gradient[k] - gradient[l]
    b = gradient[i] - gradient[j]
    out[i], out[j], out[k], out[l] = a, -a, -b, b
    return tuple(out)


def tangent_from_parametrization(eta: Sequence[Polynomial], unknowns: Sequence[str]) -> tuple[PolyVector, ...]:
    """∂η/∂u_a for each unknown."""
    return tuple(tuple(e.diff(u) for e in eta) for u in unknowns)


def frame_is_orthogonal(frames: FrameSet) -> bool:
    """True iff every Fisher-normal vector pairs to the zero polynomial with every dual vector."""
    return all(dot(e, dual).is_zero for e in frames.g_normal for dual in frames.dual)


def frame_matrix_at(frames: FrameSet, assignment: dict[str, float]) -> NDArray[np.float64]:
    """Columns completion ∪ g_normal evaluated at a point."""
    columns = [*frames.completion, *frames.g_normal]
    values = [[complex(p.to_complex().eval(assignment)).real if p else 0.0 for p in col] for col in columns]
    return np.asarray(values, dtype=np.float64).T


def is_proportional(u: Sequence[Polynomial], v: Sequence[Polynomial]) -> bool:
    """True iff u and v are parallel as polynomial vectors (all 2×2 minors vanish)."""
    return all((u[i] * v[j] - u[j] * v[i]).is_zero for i in range(len(u)) for j in range(i + 1, len(u)))


def cyclic_tangent(gradient: Sequence[Polynomial], block: tuple[int, int, int]) -> PolyVector:
    """Tangent vector supported on three coordinates of one block.

    (g_k − g_j, g_i − g_k, g_j − g_i) at (i, j, k) sums to zero and annihilates ``g``.
    """
    i, j, k = block
    out = [Polynomial.zero(gradient[0].table) for _ in gradient]
    out[i] = gradient[k] - gradient[j]
    out[j] = gradient[i] - gradient[k]
    out[k] = gradient[j] - gradient[i]
    return tuple(out)
