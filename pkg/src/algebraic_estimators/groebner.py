"""Buchberger's algorithm, normal forms and the residual-power ideals I_2 / I_3."""

from __future__ import annotations
import logging
import itertools
from fractions import Fraction
from functools import lru_cache
from dataclasses import dataclass

from algebraic_estimators.config import config
from algebraic_estimators.polyalg import (
    Domain,
    Exponents,
    Polynomial,
    MonomialOrder,
    VariableTable,
    PolynomialError,
    monomial_div,
    monomial_lcm,
    monomial_mul,
    parse_polynomial,
    format_polynomial,
    monomial_divides,
    divide_with_remainder,
)


logger = logging.getLogger(__name__)


class ResourceLimitError(RuntimeError):
    """Raised when Buchberger exceeds the basis-size or degree ceiling."""

    def __init__(self, limit_name: str, limit: int, observed: int) -> None:
        """Record which ceiling was hit."""
        super().__init__(f"Groebner {limit_name} ceiling exceeded: {observed} > {limit}")
        self.limit_name = limit_name
        self.limit = limit
        self.observed = observed


@dataclass(frozen=True)
class GroebnerBasis:
    """A Groebner basis with the order it was computed for."""

    generators: tuple[Polynomial, ...]
    order: MonomialOrder
    reduced: bool = True

    @property
    def table(self) -> VariableTable:
        return self.order.table

    def leading_exponents(self) -> list[Exponents]:
        return [g.leading_exponents(self.order) for g in self.generators]

    def normal_form(self, f: Polynomial) -> Polynomial:
        return normal_form(f, self)

    def __contains__(self, f: object) -> bool:
        return isinstance(f, Polynomial) and ideal_membership(f, self)

    def __len__(self) -> int:
        return len(self.generators)


@dataclass(frozen=True)
class ReductionIdeal:
    """Ideal generated by all k-fold products of residual factors (x_i - eta_i)."""

    k: int
    d: int
    generators: tuple[Polynomial, ...]


def s_polynomial(f: Polynomial, g: Polynomial, order: MonomialOrder) -> Polynomial:
    """Return lcm/LT(f)·f − lcm/LT(g)·g, cancelling the leading terms."""
    if f.is_zero or g.is_zero:
        raise PolynomialError("s_polynomial needs nonzero inputs")
    lf, lg = f.leading_exponents(order), g.leading_exponents(order)
    lcm = monomial_lcm(lf, lg)
    unit: Fraction | complex = Fraction(1) if f.domain is Domain.QQ else 1 + 0j
    cf = unit / f.terms[lf]
    cg = unit / g.terms[lg]
    uf = monomial_div(lcm, lf)
    ug = monomial_div(lcm, lg)
    assert uf is not None and ug is not None
    return f.mul_term(uf, cf) - g.mul_term(ug, cg)


def _select(
    leads: list[Exponents], pairs: set[tuple[int, int]], order: MonomialOrder
) -> tuple[int, int]:
    """Normal strategy: smallest lcm first, ties broken by pair indices."""
    return min(pairs, key=lambda p: (order.key(monomial_lcm(leads[p[0]], leads[p[1]])), p))


def _update(
    leads: list[Exponents], pairs: set[tuple[int, int]], f_lead: Exponents, order: MonomialOrder
) -> set[tuple[int, int]]:
    """Gebauer-Moeller pair update for a new basis element with leading exponents ``f_lead``."""
    new_index = len(leads)
    kept = set()
    for i, j in pairs:
        pair_lcm = monomial_lcm(leads[i], leads[j])
        if (
            not monomial_divides(f_lead, pair_lcm)
            or pair_lcm == monomial_lcm(leads[i], f_lead)
            or pair_lcm == monomial_lcm(leads[j], f_lead)
        ):
            kept.add((i, j))

    by_lcm: dict[Exponents, list[int]] = {}
    for i, lead in enumerate(leads):
        by_lcm.setdefault(monomial_lcm(lead, f_lead), []).append(i)
    minimal: list[Exponents] = []
    for lcm in sorted(by_lcm, key=order.key):
        if all(not monomial_divides(m, lcm) for m in minimal):
            minimal.append(lcm)
    for lcm in minimal:
        # coprime leading terms: the S-polynomial reduces to zero
        if not any(lcm == monomial_mul(leads[i], f_lead) for i in by_lcm[lcm]):
            kept.add((min(by_lcm[lcm]), new_index))
    return kept


def _minimalize(basis: list[Polynomial], order: MonomialOrder) -> list[Polynomial]:
    out: list[Polynomial] = []
    for f in sorted(basis, key=lambda h: order.key(h.leading_exponents(order))):
        lead = f.leading_exponents(order)
        if all(not monomial_divides(g.leading_exponents(order), lead) for g in out):
            out.append(f)
    return out


def _interreduce(basis: list[Polynomial], order: MonomialOrder) -> list[Polynomial]:
    out = []
    for i, g in enumerate(basis):
        others = basis[:i] + basis[i + 1 :]
        _, r = divide_with_remainder(g, others, order) if others else ([], g)
        out.append(r.monic(order))
    return out


def buchberger(
    gens: list[Polynomial] | tuple[Polynomial, ...],
    order: MonomialOrder,
    *,
    max_basis: int | None = None,
    max_degree: int | None = None,
) -> GroebnerBasis:
    """Return the reduced Groebner basis of ``<gens>``.

    Pair selection is deterministic given the input order. The ceilings default to the configured values
    and abort with ``ResourceLimitError``.
    """
    max_basis = config.GB_MAX_BASIS if max_basis is None else max_basis
    max_degree = config.GB_MAX_DEGREE if max_degree is None else max_degree
    nonzero = [g.to_table(order.table) for g in gens if not g.is_zero]
    if not nonzero:
        raise PolynomialError("buchberger needs at least one nonzero generator")

    basis: list[Polynomial] = []
    leads: list[Exponents] = []
    pairs: set[tuple[int, int]] = set()

    def add(f: Polynomial) -> None:
        nonlocal pairs
        degree = int(f.degree)
        if degree > max_degree:
            raise ResourceLimitError("degree", max_degree, degree)
        if len(basis) + 1 > max_basis:
            raise ResourceLimitError("basis size", max_basis, len(basis) + 1)
        f = f.monic(order)
        lead = f.leading_exponents(order)
        pairs = _update(leads, pairs, lead, order)
        basis.append(f)
        leads.append(lead)

    for f in nonzero:
        add(f)

    processed = 0
    while pairs:
        i, j = _select(leads, pairs, order)
        pairs.discard((i, j))
        s = s_polynomial(basis[i], basis[j], order)
        _, r = divide_with_remainder(s, basis, order)
        processed += 1
        if not r.is_zero:
            add(r)
            logger.debug("pair (%d, %d) added generator %d, %d pairs pending", i, j, len(basis) - 1, len(pairs))

    reduced = _interreduce(_minimalize(basis, order), order)
    logger.debug("buchberger processed %d pairs, reduced basis has %d generators", processed, len(reduced))
    return GroebnerBasis(tuple(reduced), order, reduced=True)


def normal_form(f: Polynomial, gb: GroebnerBasis) -> Polynomial:
    """Remainder of f on division by the basis; unique for a Groebner basis."""
    _, r = divide_with_remainder(f.to_table(gb.table), list(gb.generators), gb.order)
    return r


def ideal_membership(f: Polynomial, gb: GroebnerBasis) -> bool:
    return normal_form(f, gb).is_zero


def satisfies_buchberger_criterion(gb: GroebnerBasis) -> bool:
    """True iff every S-polynomial of a generator pair reduces to zero."""
    gens = gb.generators
    return all(
        normal_form(s_polynomial(gens[i], gens[j], gb.order), gb).is_zero
        for i, j in itertools.combinations(range(len(gens)), 2)
    )


def is_reduced(gb: GroebnerBasis) -> bool:
    """Monic generators, no term divisible by another generator's leading term."""
    leads = gb.leading_exponents()
    for i, g in enumerate(gb.generators):
        if g.terms[leads[i]] != 1:
            return False
        for exps in g.terms:
            if any(j != i and monomial_divides(lead, exps) for j, lead in enumerate(leads)):
                return False
    return True


def residual_order(table: VariableTable) -> MonomialOrder:
    """Lex order eta1 > … > etad > x1 > … > xd, remaining names after."""
    return MonomialOrder.lex(table, table.eta_block + table.data_block)


def reduction_ideal(k: int, table: VariableTable) -> ReductionIdeal:
    """Generators (x_i - eta_i)(x_j - eta_j)… over multisets i <= j <= …"""
    if k not in (2, 3):
        raise ValueError(f"reduction ideal order must be 2 or 3, got {k}")
    eta, data = table.eta_block, table.data_block
    if not eta or len(eta) != len(data):
        raise PolynomialError("reduction ideals need matching eta and x blocks")
    residuals = [Polynomial.variable(table, x) - Polynomial.variable(table, e) for e, x in zip(eta, data)]
    generators = []
    for combo in itertools.combinations_with_replacement(range(len(eta)), k):
        product = Polynomial.constant(table, 1)
        for i in combo:
            product = product * residuals[i]
        generators.append(product)
    return ReductionIdeal(k=k, d=len(eta), generators=tuple(generators))


def reduction_basis(
    k: int, table: VariableTable, *, max_basis: int | None = None, max_degree: int | None = None
) -> GroebnerBasis:
    """Reduced Groebner basis of I_k under the residual lex order; cached per table and ceilings."""
    max_basis = config.GB_MAX_BASIS if max_basis is None else max_basis
    max_degree = config.GB_MAX_DEGREE if max_degree is None else max_degree
    return _reduction_basis(k, table, max_basis, max_degree)


@lru_cache(maxsize=16)
def _reduction_basis(k: int, table: VariableTable, max_basis: int, max_degree: int) -> GroebnerBasis:
    ideal = reduction_ideal(k, table)
    gb = buchberger(list(ideal.generators), residual_order(table), max_basis=max_basis, max_degree=max_degree)
    logger.info("GB(I_%d) for d=%d has %d generators", k, ideal.d, len(gb))
    return gb


def format_basis(gb: GroebnerBasis) -> str:
    lines = [
        gb.order.header(),
        "# variables " + " ".join(gb.table.names),
        f"# reduced {str(gb.reduced).lower()}",
    ]
    lines.extend(format_polynomial(g, gb.order) for g in gb.generators)
    return "\n".join(lines) + "\n"


def parse_basis(text: str) -> GroebnerBasis:
    priority: list[str] = []
    names: list[str] = []
    reduced = True
    body: list[str] = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("# order lex"):
            priority = [p.strip() for p in line[len("# order lex") :].split(">")]
        elif line.startswith("# variables"):
            names = line[len("# variables") :].split()
        elif line.startswith("# reduced"):
            reduced = line.split()[-1] == "true"
        elif not line.startswith("#"):
            body.append(line)
    if not names:
        raise PolynomialError("basis text has no '# variables' header")
    table = VariableTable(tuple(names))
    order = MonomialOrder.lex(table, priority or None)
    return GroebnerBasis(tuple(parse_polynomial(b, table) for b in body), order, reduced)
