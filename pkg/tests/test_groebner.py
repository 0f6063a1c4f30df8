"""Tests for Buchberger, normal forms and the residual-power ideals."""
# ruff: noqa: D102,D103,D105,D107

from __future__ import annotations
import random
from fractions import Fraction

import pytest
import sympy

from algebraic_estimators.config import config
from algebraic_estimators.polyalg import Polynomial, MonomialOrder, VariableTable, PolynomialError, parse_polynomial
from algebraic_estimators.groebner import (
    ResourceLimitError,
    is_reduced,
    buchberger,
    normal_form,
    parse_basis,
    format_basis,
    s_polynomial,
    residual_order,
    reduction_basis,
    reduction_ideal,
    ideal_membership,
    satisfies_buchberger_criterion,
)


XYZ = VariableTable(("x", "y", "z"))


def _p(text: str, table: VariableTable = XYZ) -> Polynomial:
    return parse_polynomial(text, table)


def _sympy_monic(exprs: list[sympy.Expr], names: tuple[str, ...]) -> set[sympy.Expr]:
    symbols = sympy.symbols(names)
    return {sympy.Poly(e, *symbols, domain="QQ").monic().as_expr() for e in exprs}


def _ours_as_sympy(gens: tuple[Polynomial, ...]) -> set[sympy.Expr]:
    return {sympy.sympify(str(g).replace("^", "**")) for g in gens}


def _random_poly(rng: random.Random, table: VariableTable, terms: int = 4, degree: int = 3) -> Polynomial:
    coeffs = {}
    for _ in range(terms):
        exps = tuple(rng.randint(0, degree) if rng.random() < 0.5 else 0 for _ in table.names)
        coeffs[exps] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
    return Polynomial(table, coeffs)


def test_s_polynomial_cancels_leading_terms() -> None:
    """S(x^2 y - 1, x y^2 - x) cancels x^2 y^2 and leaves x^2 - y."""
    order = MonomialOrder.lex(XYZ)
    f, g = _p("x^2*y - 1"), _p("x*y^2 - x")
    assert s_polynomial(f, g, order) == _p("x^2 - y")


@pytest.mark.parametrize(
    "texts",
    [
        ["x^2*y - 1", "x*y^2 - x"],
        ["x^2 + y^2 + z^2 - 1", "x - y", "y - z^2"],
        ["x*y - z", "y*z - x", "x*z - y"],
    ],
)
def test_buchberger_matches_sympy(texts: list[str]) -> None:
    """The reduced lex basis agrees with sympy's."""
    order = MonomialOrder.lex(XYZ)
    gb = buchberger([_p(t) for t in texts], order)
    expected = sympy.groebner([sympy.sympify(t.replace("^", "**")) for t in texts], *sympy.symbols("x y z"), order="lex")
    assert _ours_as_sympy(gb.generators) == _sympy_monic(list(expected.exprs), XYZ.names)
    assert is_reduced(gb)
    assert satisfies_buchberger_criterion(gb)


def test_buchberger_is_deterministic() -> None:
    """Two runs on the same input give identical bases."""
    order = MonomialOrder.lex(XYZ, ["z"])
    gens = [_p("x*y - z"), _p("y*z - x"), _p("x^2 - 1")]
    assert buchberger(gens, order).generators == buchberger(gens, order).generators


def test_unit_ideal() -> None:
    """Inconsistent generators give the basis {1}."""
    gb = buchberger([_p("x"), _p("x - 1")], MonomialOrder.lex(XYZ))
    assert gb.generators == (Polynomial.constant(XYZ, 1),)


def test_normal_form_properties() -> None:
    """NF is idempotent, f - NF(f) is in the ideal, and members reduce to zero."""
    rng = random.Random(3)
    gb = buchberger([_p("x^2 - y"), _p("x*y - z")], MonomialOrder.lex(XYZ))
    for _ in range(25):
        f = _random_poly(rng, XYZ)
        nf = normal_form(f, gb)
        assert normal_form(nf, gb) == nf
        assert ideal_membership(f - nf, gb)
    assert _p("x^3 - x*y") in gb
    assert _p("x + 1") not in gb


def test_ceilings_raise_resource_limit() -> None:
    """Basis-size and degree ceilings abort with their name and values."""
    order = MonomialOrder.lex(XYZ)
    with pytest.raises(ResourceLimitError, match="basis size") as info:
        buchberger([_p("x^2*y - 1"), _p("x*y^2 - x")], order, max_basis=2)
    assert info.value.limit == 2
    with pytest.raises(ResourceLimitError, match="degree"):
        buchberger([_p("x^5 - y")], order, max_degree=4)


def test_buchberger_needs_a_nonzero_generator() -> None:
    """An empty or all-zero input is refused."""
    with pytest.raises(PolynomialError, match="nonzero"):
        buchberger([Polynomial.zero(XYZ)], MonomialOrder.lex(XYZ))


def test_reduction_ideal_generators() -> None:
    """I_2 in d=2 has the three products of residual factors."""
    table = VariableTable.standard(2)
    ideal = reduction_ideal(2, table)
    assert ideal.k == 2 and ideal.d == 2
    expected = {
        parse_polynomial("x1^2 - 2*x1*eta1 + eta1^2", table),
        parse_polynomial("x1*x2 - x1*eta2 - x2*eta1 + eta1*eta2", table),
        parse_polynomial("x2^2 - 2*x2*eta2 + eta2^2", table),
    }
    assert set(ideal.generators) == expected
    with pytest.raises(ValueError, match="2 or 3"):
        reduction_ideal(4, table)


def test_residual_order_ranks_eta_first() -> None:
    """Lex order eta1 > eta2 > x1 > x2 with auxiliaries last."""
    table = VariableTable(("c", "x1", "x2", "eta1", "eta2"))
    assert residual_order(table).priority_names == ("eta1", "eta2", "x1", "x2", "c")


@pytest.mark.parametrize("d,k", [(2, 2), (2, 3), (3, 2), (3, 3)])
def test_reduction_basis_degree_bound(d: int, k: int) -> None:
    """Normal forms modulo GB(I_k) have eta-degree below k."""
    table = VariableTable.standard(d)
    gb = reduction_basis(k, table)
    assert satisfies_buchberger_criterion(gb)
    rng = random.Random(d * 10 + k)
    for _ in range(50):
        f = _random_poly(rng, table, terms=3, degree=4)
        assert normal_form(f, gb).degree_in(table.eta_block) < k


@pytest.mark.slow
@pytest.mark.parametrize("k", [2, 3])
def test_reduction_basis_degree_bound_d6(k: int) -> None:
    """The six-cell bases pass the Buchberger criterion and keep the same bound."""
    table = VariableTable.standard(6)
    gb = reduction_basis(k, table)
    assert satisfies_buchberger_criterion(gb)
    rng = random.Random(60 + k)
    for _ in range(50):
        f = _random_poly(rng, table, terms=3, degree=3)
        assert normal_form(f, gb).degree_in(table.eta_block) < k


@pytest.mark.parametrize("d,k", [(2, 2), (3, 2), (3, 3)])
def test_normal_form_ignores_generator_order(d: int, k: int) -> None:
    """Shuffling the I_k generators before Buchberger yields the same reduced basis and normal forms."""
    table = VariableTable.standard(d)
    order = residual_order(table)
    reference = reduction_basis(k, table)
    rng = random.Random(100 * d + k)
    gens = list(reduction_ideal(k, table).generators)
    for _ in range(3):
        rng.shuffle(gens)
        shuffled = buchberger(gens, order)
        assert set(shuffled.generators) == set(reference.generators)
        for _ in range(20):
            f = _random_poly(rng, table, terms=3, degree=4)
            assert normal_form(f, shuffled) == normal_form(f, reference)


def test_reduction_basis_respects_current_ceilings(monkeypatch: pytest.MonkeyPatch) -> None:
    """A basis cached under generous ceilings is not returned once the ceilings shrink."""
    table = VariableTable.standard(2)
    assert satisfies_buchberger_criterion(reduction_basis(2, table))
    with pytest.raises(ResourceLimitError, match="basis size") as err:
        reduction_basis(2, table, max_basis=1)
    assert err.value.limit == 1
    monkeypatch.setattr(config, "GB_MAX_DEGREE", 1)
    with pytest.raises(ResourceLimitError, match="degree"):
        reduction_basis(2, table)
    monkeypatch.undo()
    assert reduction_basis(2, table) is reduction_basis(2, table)


def test_basis_text_roundtrip() -> None:
    """format_basis writes the order header that parse_basis reads back."""
    gb = buchberger([_p("x*y - z"), _p("y^2 - 1")], MonomialOrder.lex(XYZ, ["y"]))
    text = format_basis(gb)
    assert text.startswith("# order lex y > x > z\n")
    back = parse_basis(text)
    assert back.order.priority_names == gb.order.priority_names
    assert back.generators == gb.generators
