"""Published polynomials for the built-in models and the self-test suite that checks the pipeline against them."""

from __future__ import annotations
import time
import logging
from typing import Callable
from fractions import Fraction
from dataclasses import dataclass

import numpy as np

from algebraic_estimators.models import LOG_MARGINAL_TRUTH, log_marginal, periodic_gaussian
from algebraic_estimators.geometry import bias_vector
from algebraic_estimators.polyalg import Polynomial, VariableTable, parse_polynomial, proportionality_factor
from algebraic_estimators.estimators import (
    PERTURBATION_SYMBOL,
    EstimatorClass,
    EstimatingSystem,
    PerturbationChoice,
    eliminate_v,
    certify_class,
    reduce_system,
    build_mle_system,
    build_vector_version,
)


logger = logging.getLogger(__name__)

PG_QUINTIC = "4*a^5 - 8*a^3 + 2*a^3*x3 - 3*x2*a^2 + 4*a + 4*a*x1 + 2*a*x3 - x2"
# g(a) = 8(a-1)^2(a+1)^2(1+2a^2)^2 times the quintic; h(a) = cube of this linear form in x
PG_G_FACTORS = ("a - 1", "a - 1", "a + 1", "a + 1", "1 + 2*a^2", "1 + 2*a^2")
PG_H_BASE = "2*a^4 + a^3*x2 - a^2*x3 + 2*a^2 + a*x2 - 2*x1 - x3 - 4"

LM_MLE = (
    "x1*eta2^2*eta4^2*eta6 - x1*eta2^2*eta4*eta6^2 - x2*eta1*eta2*eta4^2*eta6 + x2*eta1*eta2*eta4*eta6^2"
    " - 2*x4*eta1*eta2*eta4*eta6^2 - x4*eta1*eta3*eta5^2*eta6 + 2*x6*eta1*eta2*eta4^2*eta6"
    " + x6*eta1*eta3*eta4*eta5^2",
    "-x2*eta2*eta3*eta4^2*eta6 + x2*eta2*eta3*eta4*eta6^2 + x3*eta2^2*eta4^2*eta6 - x3*eta2^2*eta4*eta6^2"
    " - x4*eta1*eta3*eta5^2*eta6 - 2*x4*eta2*eta3*eta4*eta6^2 + x6*eta1*eta3*eta4*eta5^2"
    " + 2*x6*eta2*eta3*eta4^2*eta6",
    "-2*x4*eta1*eta3*eta5^2*eta6 - x4*eta2^2*eta4*eta5*eta6 + x5*eta2^2*eta4^2*eta6 - x5*eta2^2*eta4*eta6^2"
    " + 2*x6*eta1*eta3*eta4*eta5^2 + x6*eta2^2*eta4*eta5*eta6",
)
LM_MLE_TOTAL_DEGREE = 500
LM_REDUCED_TOTAL_DEGREE = 32

# bias closed form vs central differences
BIAS_RTOL = 1e-6
CONSTRAINT_TOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def pg_g(table: VariableTable) -> Polynomial:
    g = parse_polynomial("8", table) * parse_polynomial(PG_QUINTIC, table)
    for factor in PG_G_FACTORS:
        g = g * parse_polynomial(factor, table)
    return g


def pg_h(table: VariableTable) -> Polynomial:
    return parse_polynomial(PG_H_BASE, table) ** 3


def printed_forms(system: EstimatingSystem) -> tuple[Polynomial, ...] | None:
    """Published equations matching a constructed system, over its table; None when nothing was printed."""
    table = system.table
    if system.model_id == "periodic-gaussian":
        if system.clazz is EstimatorClass.MLE:
            return (parse_polynomial(PG_QUINTIC, table),)
        if system.clazz is EstimatorClass.SECOND:
            if PERTURBATION_SYMBOL in table:
                c = Polynomial.variable(table, PERTURBATION_SYMBOL)
            else:
                c = Polynomial.constant(table, Fraction(system.c))
            return (pg_g(table) + c * pg_h(table),)
    if system.model_id == "log-marginal" and system.clazz is EstimatorClass.MLE:
        return tuple(parse_polynomial(text, table) for text in LM_MLE)
    return None


def compare_printed(system: EstimatingSystem) -> list[Fraction | None] | None:
    """Proportionality factor of each constructed equation against its printed counterpart."""
    printed = printed_forms(system)
    if printed is None:
        return None
    return [proportionality_factor(eq, ref) for eq, ref in zip(system.equations, printed)]


def _describe(factor: Fraction | None) -> str:
    return "not proportional" if factor is None else f"factor {factor}"


def check_pg_quintic() -> CheckResult:
    model = periodic_gaussian()
    (eq,) = build_mle_system(model).equations
    factor = proportionality_factor(eq, parse_polynomial(PG_QUINTIC, model.table))
    root = eq.eval({"a": Fraction(0), "x1": Fraction(-2), "x2": Fraction(0), "x3": Fraction(0)})
    passed = factor is not None and root == 0
    return CheckResult("periodic-gaussian MLE quintic", passed, f"{_describe(factor)}, value at a=0, x=η(0): {root}")


def check_pg_elimination() -> CheckResult:
    """g(a) + c·h(a) from eliminating v1, v2 with c left symbolic."""
    model = periodic_gaussian()
    choice = PerturbationChoice.default(model, 2, PERTURBATION_SYMBOL)
    (eq,) = eliminate_v(build_vector_version(model, choice, 2)).equations
    table = eq.table
    c = Polynomial.variable(table, PERTURBATION_SYMBOL)
    expected = pg_g(table) + c * pg_h(table)
    factor = proportionality_factor(eq, expected)
    return CheckResult("periodic-gaussian g + c·h by elimination", factor is not None, _describe(factor))


def check_lm_mle() -> CheckResult:
    model = log_marginal()
    mle = build_mle_system(model)
    factors = [proportionality_factor(eq, parse_polynomial(text, model.table)) for eq, text in zip(mle.orthogonality, LM_MLE)]
    passed = all(f is not None for f in factors) and mle.total_degree_product == LM_MLE_TOTAL_DEGREE
    detail = f"factors {[_describe(f) for f in factors]}, total degree {mle.total_degree_product}"
    return CheckResult("log-marginal MLE equations", passed, detail)


def check_lm_reduction() -> CheckResult:
    mle = build_mle_system(log_marginal())
    second = reduce_system(mle, 3)
    first = reduce_system(mle, 2)
    eta = mle.table.eta_block
    low_second = all(eq.degree_in(eta) <= 2 for eq in second.orthogonality)
    low_first = all(eq.degree_in(eta) <= 1 for eq in first.orthogonality)
    certified = certify_class(second, mle, 3) and certify_class(first, mle, 2)
    passed = second.total_degree_product == LM_REDUCED_TOTAL_DEGREE and low_second and low_first and certified
    detail = (
        f"second-order total degree {second.total_degree_product}, degrees {second.degrees}, "
        f"first-order degrees {first.degrees}, certified {certified}"
    )
    return CheckResult("log-marginal reduction mod I_2/I_3", passed, detail)


def check_lm_truth() -> CheckResult:
    model = log_marginal()
    residuals = model.constraint_residuals(LOG_MARGINAL_TRUTH, LOG_MARGINAL_TRUTH)
    worst = float(np.max(np.abs(residuals)))
    return CheckResult("log-marginal constraints at the true point", worst < CONSTRAINT_TOL, f"max residual {worst:.3g}")


def check_pg_bias() -> CheckResult:
    model = periodic_gaussian()
    at_zero = model.bias_term.evaluate({"a": 0.0}) if model.bias_term else np.array([np.nan])
    worst = 0.0
    for a in (0.1, 0.3, 0.5, 0.7):
        closed = model.bias_term.evaluate({"a": a})[0] if model.bias_term else np.nan
        numeric = bias_vector(model, np.array([a]), "euclidean")[0]
        worst = max(worst, abs(numeric - closed) / abs(closed))
    passed = bool(at_zero[0] == 0.0) and worst < BIAS_RTOL
    detail = (
        f"validated with the euclidean pairing, not the Fisher pairing: "
        f"b(0)={at_zero[0]}, worst relative gap {worst:.3g}"
    )
    return CheckResult("periodic-gaussian bias closed form, euclidean pairing", passed, detail)


CHECKS: tuple[Callable[[], CheckResult], ...] = (
    check_pg_quintic,
    check_pg_elimination,
    check_lm_mle,
    check_lm_truth,
    check_pg_bias,
    check_lm_reduction,
)


def run_selftest() -> list[CheckResult]:
    results = []
    for check in CHECKS:
        started = time.perf_counter()
        result = check()
        result = CheckResult(result.name, result.passed, result.detail, time.perf_counter() - started)
        level = logging.INFO if result.passed else logging.ERROR
        logger.log(level, "%s: %s (%s)", result.name, "ok" if result.passed else "FAILED", result.detail)
        results.append(result)
    return results
