"""Estimating systems: MLE, vector/algebraic versions, degree reduction and class certificates.

An estimating system is a square list of polynomial equations in the model unknowns with the data block
``x1..xd`` as parameters. The MLE equations pair ``x − η`` with the dual frame and append the model
constraints. Higher-order variants come from two routes:

* parametrized models: the vector version ``x = η(u) − Σ v_i e_i(u) − c·Σ f_j(u, v) e_j(u)`` with the ancillary
  coordinates v eliminated by a lex Groebner basis;
* implicit models: the MLE orthogonality equations reduced modulo the residual-power ideal I_k.
"""

from __future__ import annotations
import enum
import math
import logging
from typing import Sequence
from fractions import Fraction
from functools import lru_cache
from dataclasses import dataclass

from algebraic_estimators.config import config
from algebraic_estimators.frames import dot
from algebraic_estimators.models import Model, get_model
from algebraic_estimators.groebner import buchberger, normal_form, reduction_basis
from algebraic_estimators.polyalg import (
    Domain,
    Scalar,
    Polynomial,
    MonomialOrder,
    VariableTable,
    ZERO_DEGREE,
    PolynomialError,
    primitive_part,
    parse_polynomial,
    format_polynomial,
)


logger = logging.getLogger(__name__)

PERTURBATION_SYMBOL = "c"

# Estimator labels shared by the solver front ends.
ESTIMATOR_LABELS = ("mle", "first-order", "second-order")


class EstimatorError(ValueError):
    """Raised on class mismatches, misaligned systems and perturbations of the wrong degree."""


class EstimatorClass(str, enum.Enum):
    MLE = "mle"
    FIRST = "first-order"
    SECOND = "second-order"
    REDUCED_FIRST = "reduced-first-order"
    REDUCED_SECOND = "reduced-second-order"

    @property
    def order(self) -> int | None:
        """Efficiency order the class guarantees beyond the MLE, or None for the MLE itself."""
        if self in (EstimatorClass.FIRST, EstimatorClass.REDUCED_FIRST):
            return 1
        if self in (EstimatorClass.SECOND, EstimatorClass.REDUCED_SECOND):
            return 2
        return None

    @property
    def is_reduced(self) -> bool:
        return self in (EstimatorClass.REDUCED_FIRST, EstimatorClass.REDUCED_SECOND)


def _reduced_class(k: int) -> EstimatorClass:
    return EstimatorClass.REDUCED_SECOND if k == 3 else EstimatorClass.REDUCED_FIRST


def _vector_class(order_class: str | int | EstimatorClass) -> EstimatorClass:
    lookup = {
        "first": EstimatorClass.FIRST,
        "second": EstimatorClass.SECOND,
        1: EstimatorClass.FIRST,
        2: EstimatorClass.SECOND,
        EstimatorClass.FIRST: EstimatorClass.FIRST,
        EstimatorClass.SECOND: EstimatorClass.SECOND,
        "first-order": EstimatorClass.FIRST,
        "second-order": EstimatorClass.SECOND,
    }
    try:
        return lookup[order_class]
    except KeyError:
        raise EstimatorError(f"order class must be first or second, got {order_class!r}") from None


@dataclass(frozen=True)
class EstimatingSystem:
    """Square polynomial system; the last ``n_constraints`` equations are model constraints."""

    model_id: str
    table: VariableTable
    equations: tuple[Polynomial, ...]
    unknowns: tuple[str, ...]
    clazz: EstimatorClass
    c: Fraction | str = Fraction(0)
    n_constraints: int = 0

    def __post_init__(self) -> None:
        """Check squareness and that every equation lives on the system table."""
        if len(self.equations) != len(self.unknowns):
            raise EstimatorError(
                f"{self.model_id}/{self.clazz.value}: {len(self.equations)} equations for "
                f"{len(self.unknowns)} unknowns"
            )
        if not 0 <= self.n_constraints <= len(self.equations):
            raise EstimatorError(f"constraint count {self.n_constraints} out of range")
        for eq in self.equations:
            if eq.table != self.table:
                raise EstimatorError("equation table differs from the system table")
        for name in self.unknowns:
            self.table.index(name)

    @property
    def domain(self) -> Domain:
        return self.equations[0].domain if self.equations else Domain.QQ

    @property
    def orthogonality(self) -> tuple[Polynomial, ...]:
        return self.equations[: len(self.equations) - self.n_constraints]

    @property
    def constraints(self) -> tuple[Polynomial, ...]:
        return self.equations[len(self.equations) - self.n_constraints :]

    @property
    def degrees(self) -> tuple[int, ...]:
        out = []
        for eq in self.equations:
            degree = eq.degree_in(self.unknowns)
            out.append(0 if degree == ZERO_DEGREE else int(degree))
        return tuple(out)

    @property
    def total_degree_product(self) -> int:
        return math.prod(self.degrees)

    def parameters(self) -> tuple[str, ...]:
        """Variables used by the equations besides the unknowns."""
        used: set[str] = set()
        for eq in self.equations:
            used.update(eq.free_variables())
        return tuple(n for n in self.table.names if n in used and n not in self.unknowns)

    def instantiate(self, data: Sequence[Scalar | float], c: Scalar | float | None = None) -> EstimatingSystem:
        """Bind the data block (and a symbolic c) to numbers.

        Exact inputs (int, Fraction) keep the rational domain; any float or complex switches to complex floats.
        """
        names = self.table.data_block
        if len(data) != len(names):
            raise EstimatorError(f"expected {len(names)} data values for {names}, got {len(data)}")
        values: dict[str, Scalar | float] = dict(zip(names, data))
        if isinstance(self.c, str):
            if c is None:
                raise EstimatorError("system has a symbolic perturbation constant; pass c to instantiate")
            values[self.c] = c
        exact = self.domain is Domain.QQ and all(
            isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in values.values()
        )
        equations = []
        for eq in self.equations:
            source = eq if exact else eq.to_complex()
            equations.append(source.substitute({k: v for k, v in values.items() if k in self.table}))  # type: ignore[misc]
        bound_c = _as_fraction(c) if isinstance(self.c, str) else self.c
        return EstimatingSystem(
            model_id=self.model_id,
            table=self.table,
            equations=tuple(equations),
            unknowns=self.unknowns,
            clazz=self.clazz,
            c=bound_c,
            n_constraints=self.n_constraints,
        )


def _as_fraction(value: object) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, complex):
        value = value.real
    return Fraction(value).limit_denominator(10**9)  # type: ignore[arg-type]


@dataclass(frozen=True)
class PerturbationChoice:
    """Higher-order terms f_j(u, v) added along the completion vectors, scaled by c."""

    f: tuple[Polynomial, ...]
    c: Fraction | str

    @classmethod
    def default(cls, model: Model, order_class: str | int, c: Fraction | str | None = None) -> PerturbationChoice:
        """f_1 = v1³ for second order, v1² for first order; c from configuration unless given."""
        clazz = _vector_class(order_class)
        table = vector_table(model, symbolic=isinstance(c, str))
        power = 3 if clazz is EstimatorClass.SECOND else 2
        f1 = Polynomial.variable(table, "v1") ** power
        return cls(f=(f1,), c=Fraction(config.PERTURBATION_C) if c is None else c)


@dataclass(frozen=True)
class VectorSystem:
    """The d vector-version equations plus model constraints, in unknowns (u, v)."""

    model_id: str
    table: VariableTable
    equations: tuple[Polynomial, ...]
    constraints: tuple[Polynomial, ...]
    u_names: tuple[str, ...]
    v_names: tuple[str, ...]
    clazz: EstimatorClass
    c: Fraction | str


def vector_table(model: Model, *, symbolic: bool = False) -> VariableTable:
    v_names = tuple(f"v{i}" for i in range(1, model.d - model.p + 1))
    return model.table.extend(*v_names, *((PERTURBATION_SYMBOL,) if symbolic else ()))


def build_mle_system(model: Model, data: Sequence[Scalar | float] | None = None) -> EstimatingSystem:
    """(x − η)ᵀẽ_j = 0 for every dual vector, followed by the model constraints."""
    table = model.table
    residual = tuple(Polynomial.variable(table, x) - e for x, e in zip(model.data_names, model.eta))
    equations = tuple(dot(residual, dual) for dual in model.frames.dual)
    if any(eq.is_zero for eq in equations):
        raise EstimatorError(f"{model.id}: an orthogonality equation vanishes identically")
    system = EstimatingSystem(
        model_id=model.id,
        table=table,
        equations=equations + model.constraints,
        unknowns=model.unknowns,
        clazz=EstimatorClass.MLE,
        c=Fraction(0),
        n_constraints=len(model.constraints),
    )
    logger.debug("%s MLE system: degrees %s", model.id, system.degrees)
    return system if data is None else system.instantiate(data)


def build_vector_version(
    model: Model, choice: PerturbationChoice, order_class: str | int | EstimatorClass
) -> VectorSystem:
    """x − η(u) + Σ v_i e_i(u) + c·Σ f_j(u, v) e_j(u) = 0 componentwise."""
    clazz = _vector_class(order_class)
    symbolic = isinstance(choice.c, str)
    if symbolic and choice.c != PERTURBATION_SYMBOL:
        raise EstimatorError(f"symbolic perturbation constant must be named {PERTURBATION_SYMBOL!r}")
    table = vector_table(model, symbolic=symbolic)
    v_names = tuple(n for n in table.names if n.startswith("v") and n not in model.table)
    bound = 3 if clazz is EstimatorClass.SECOND else 2
    if len(choice.f) > len(model.frames.completion):
        raise EstimatorError(f"{len(choice.f)} perturbation terms for {len(model.frames.completion)} completion vectors")
    for j, f in enumerate(choice.f):
        f = f.to_table(table)
        if not f.is_zero:
            low = min(sum(exps[table.index(v)] for v in v_names) for exps in f.terms)
            if low < bound:
                raise EstimatorError(
                    f"perturbation f_{j + 1} has a term of v-degree {low}; {clazz.value} needs at least {bound}"
                )

    def lift(p: Polynomial) -> Polynomial:
        return p.to_table(table)

    c = Polynomial.variable(table, PERTURBATION_SYMBOL) if symbolic else Polynomial.constant(table, choice.c)  # type: ignore[arg-type]
    v = Polynomial.variables(table, *v_names)
    equations = []
    for k, x in enumerate(model.data_names):
        eq = Polynomial.variable(table, x) - lift(model.eta[k])
        for coeff, normal in zip(v, model.frames.g_normal):
            eq = eq + coeff * lift(normal[k])
        for f, completion in zip(choice.f, model.frames.completion):
            if completion[k]:
                eq = eq + c * f.to_table(table) * lift(completion[k])
        equations.append(eq)
    return VectorSystem(
        model_id=model.id,
        table=table,
        equations=tuple(equations),
        constraints=tuple(lift(m) for m in model.constraints),
        u_names=model.unknowns,
        v_names=v_names,
        clazz=clazz,
        c=choice.c,
    )


def eliminate_v(vector_system: VectorSystem, order: MonomialOrder | None = None) -> EstimatingSystem:
    """Eliminate the ancillary coordinates with a lex basis that ranks v above everything else."""
    vs = vector_system
    order = order or MonomialOrder.lex(vs.table, vs.v_names)
    if order.priority_names[: len(vs.v_names)] != vs.v_names:
        raise EstimatorError("elimination order must rank the v-block highest")
    gb = buchberger(list(vs.equations) + list(vs.constraints), order)
    free = [g for g in gb.generators if g.degree_in(vs.v_names) == 0]
    target = VariableTable(tuple(n for n in vs.table.names if n not in vs.v_names))
    lex = MonomialOrder.lex(target)
    kept = [primitive_part(g.to_table(target), lex) for g in free]
    logger.info("%s: eliminated %s, %d of %d basis elements are v-free", vs.model_id, vs.v_names, len(kept), len(gb))
    if len(kept) != len(vs.u_names):
        raise EstimatorError(
            f"{vs.model_id}: elimination left {len(kept)} equations for {len(vs.u_names)} unknowns"
        )
    return EstimatingSystem(
        model_id=vs.model_id,
        table=target,
        equations=tuple(kept),
        unknowns=vs.u_names,
        clazz=vs.clazz,
        c=vs.c,
        n_constraints=0,
    )


def reduce_system(system: EstimatingSystem, k: int) -> EstimatingSystem:
    """Replace every orthogonality equation by its normal form modulo GB(I_k)."""
    if k not in (2, 3):
        raise EstimatorError(f"reduction order must be 2 or 3, got {k}")
    if system.clazz is not EstimatorClass.MLE:
        raise EstimatorError(f"only MLE systems can be reduced, got {system.clazz.value}")
    if system.unknowns != system.table.eta_block or system.domain is not Domain.QQ:
        raise EstimatorError("reduction needs an exact system in the eta block with symbolic data")
    gb = reduction_basis(k, system.table)
    reduced = tuple(normal_form(eq, gb) for eq in system.orthogonality)
    if any(eq.is_zero for eq in reduced):
        raise EstimatorError(f"an orthogonality equation lies in I_{k}; the reduced system is degenerate")
    out = EstimatingSystem(
        model_id=system.model_id,
        table=system.table,
        equations=reduced + system.constraints,
        unknowns=system.unknowns,
        clazz=_reduced_class(k),
        c=system.c,
        n_constraints=system.n_constraints,
    )
    logger.info("%s reduced mod I_%d: degrees %s, total degree %d", system.model_id, k, out.degrees, out.total_degree_product)
    return out


@dataclass(frozen=True)
class CertificateEntry:
    index: int
    member: bool
    eta_degree: int
    factor: Fraction | None


def certificate(candidate: EstimatingSystem, mle: EstimatingSystem, k: int) -> list[CertificateEntry]:
    """Per-equation verdicts: candidate_j − λ·mle_j ∈ I_k with λ matched on normal-form leading coefficients."""
    if candidate.table != mle.table or len(candidate.equations) != len(mle.equations):
        raise EstimatorError("systems are not aligned: tables or equation counts differ")
    if candidate.n_constraints != mle.n_constraints or candidate.constraints != mle.constraints:
        raise EstimatorError("systems are not aligned: constraints differ")
    if candidate.domain is not Domain.QQ or mle.domain is not Domain.QQ:
        raise EstimatorError("certificates need exact systems")
    gb = reduction_basis(k, mle.table)
    entries = []
    eta = mle.table.eta_block
    for j, (cand, ref) in enumerate(zip(candidate.orthogonality, mle.orthogonality)):
        nf_cand, nf_ref = normal_form(cand, gb), normal_form(ref, gb)
        factor: Fraction | None
        if nf_ref.is_zero:
            factor = Fraction(1)
        elif nf_cand.is_zero:
            factor = None
        else:
            factor = Fraction(nf_cand.leading_coefficient(gb.order)) / Fraction(nf_ref.leading_coefficient(gb.order))  # type: ignore[arg-type]
        member = factor is not None and factor != 0 and normal_form(cand - ref.scale(factor), gb).is_zero
        degree = cand.degree_in(eta)
        entries.append(CertificateEntry(j, member, 0 if degree == ZERO_DEGREE else int(degree), factor))
    return entries


def certify_class(candidate: EstimatingSystem, mle: EstimatingSystem, k: int) -> bool:
    return all(entry.member for entry in certificate(candidate, mle, k))


def format_certificate(entries: Sequence[CertificateEntry], k: int, total_degree: int) -> str:
    member = ",".join(str(e.member).lower() for e in entries)
    degrees = ",".join(str(e.eta_degree) for e in entries)
    return f"# certificate k={k} member={member} eta_degree={degrees} total_degree={total_degree}"


def estimator_system(model_id: str, label: str, c: Fraction | None = None) -> EstimatingSystem:
    """Symbolic system behind an estimator label; ``-bc`` suffixes share their base system.

    Implicit models reach first/second order by reduction mod I_2/I_3, parametrized models by elimination.
    Cached per label, resolved c and Groebner ceilings.
    """
    resolved = Fraction(config.PERTURBATION_C) if c is None else c
    return _estimator_system(model_id, label, resolved, config.GB_MAX_BASIS, config.GB_MAX_DEGREE)


@lru_cache(maxsize=32)
def _estimator_system(
    model_id: str, label: str, c: Fraction, max_basis: int, max_degree: int
) -> EstimatingSystem:
    base = label.removesuffix("-bc")
    if base not in ESTIMATOR_LABELS:
        raise EstimatorError(f"unknown estimator {label!r}; choose from {ESTIMATOR_LABELS} with optional -bc")
    model = get_model(model_id)
    mle = build_mle_system(model)
    if base == "mle":
        return mle
    order = 2 if base == "second-order" else 1
    if model.is_implicit:
        return reduce_system(mle, order + 1)
    choice = PerturbationChoice.default(model, order, c)
    return eliminate_v(build_vector_version(model, choice, order))


# exchange grammar for whole systems


def format_system(system: EstimatingSystem) -> str:
    lines = [
        f"# model {system.model_id}",
        f"# clazz {system.clazz.value}",
        f"# c {system.c}",
        "# unknowns " + " ".join(system.unknowns),
        "# variables " + " ".join(system.table.names),
        f"# constraints {system.n_constraints}",
        f"# domain {system.domain.value}",
        f"# total_degree_product {system.total_degree_product}",
    ]
    lines.extend(format_polynomial(eq) for eq in system.equations)
    return "\n".join(lines) + "\n"


def parse_system(text: str) -> EstimatingSystem:
    headers: dict[str, str] = {}
    body: list[str] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" ")
            headers[key] = value.strip()
        else:
            body.append(line)
    missing = [k for k in ("model", "clazz", "unknowns", "variables") if k not in headers]
    if missing:
        raise PolynomialError(f"system text lacks headers {missing}")
    table = VariableTable(tuple(headers["variables"].split()))
    domain = Domain(headers.get("domain", Domain.QQ.value))
    raw_c = headers.get("c", "0")
    c: Fraction | str = raw_c if raw_c == PERTURBATION_SYMBOL else Fraction(raw_c)
    try:
        clazz = EstimatorClass(headers["clazz"])
    except ValueError:
        raise PolynomialError(f"unknown class {headers['clazz']!r}") from None
    system = EstimatingSystem(
        model_id=headers["model"],
        table=table,
        equations=tuple(parse_polynomial(b, table, domain) for b in body),
        unknowns=tuple(headers["unknowns"].split()),
        clazz=clazz,
        c=c,
        n_constraints=int(headers.get("constraints", "0")),
    )
    declared = headers.get("total_degree_product")
    if declared is not None and int(declared) != system.total_degree_product:
        raise PolynomialError(f"declared total degree {declared} != computed {system.total_degree_product}")
    return system
