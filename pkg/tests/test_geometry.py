"""Tests for the numeric Fisher geometry and the second-order bias correction."""
# ruff: noqa: D102,D103,D105,D107

from __future__ import annotations

import numpy as np
import pytest

from algebraic_estimators.models import LOG_MARGINAL_TRUTH, Model, make_rng, toy_linear, log_marginal, periodic_gaussian
from algebraic_estimators.geometry import bias_vector, m_connection, bias_correction, fisher_information
from algebraic_estimators.estimators import build_mle_system


def test_toy_fisher_information() -> None:
    """With an identity θ-metric, g(u) = 1 + 4u^2."""
    np.testing.assert_allclose(fisher_information(toy_linear(), np.array([0.5])), [[2.0]], rtol=1e-8)


def test_toy_bias_both_pairings() -> None:
    """b(u) = 4u / (1 + 4u^2)^2, and the pairings agree when the θ-metric is the identity."""
    model = toy_linear()
    for u in (0.25, 0.5, 1.0):
        expected = 4 * u / (1 + 4 * u**2) ** 2
        assert bias_vector(model, np.array([u]), "fisher")[0] == pytest.approx(expected, rel=1e-6)
        assert bias_vector(model, np.array([u]), "euclidean")[0] == pytest.approx(expected, rel=1e-6)


@pytest.mark.parametrize("a", [0.1, 0.3, 0.5, 0.7])
def test_periodic_gaussian_closed_form(a: float) -> None:
    """The euclidean-paired numeric bias reproduces the published closed form."""
    model = periodic_gaussian()
    assert model.bias_term is not None
    closed = model.bias_term.evaluate({"a": a})[0]
    assert bias_vector(model, np.array([a]), "euclidean")[0] == pytest.approx(closed, rel=1e-6)


def test_periodic_gaussian_bias_vanishes_at_zero() -> None:
    """b(0) = 0 exactly."""
    model = periodic_gaussian()
    assert model.bias_term is not None
    assert model.bias_term.evaluate({"a": 0.0})[0] == 0.0


def test_log_marginal_bias_is_zero() -> None:
    """The log-marginal model is linear in its ancillary coordinates."""
    model = log_marginal()
    b = bias_vector(model, np.array(LOG_MARGINAL_TRUTH), "fisher")
    np.testing.assert_allclose(b, 0.0, atol=1e-8)
    np.testing.assert_allclose(bias_vector(model, np.array(LOG_MARGINAL_TRUTH), "euclidean"), 0.0, atol=1e-8)
    np.testing.assert_array_equal(bias_correction(model, np.array(LOG_MARGINAL_TRUTH), 100), [0.0, 0.0, 0.0])


def _log_marginal_point(rng: np.random.Generator) -> np.ndarray:
    """A positive point on the log-marginal locus: η5, η6 solve the balance and ratio constraints."""
    e1, e2, e3 = rng.uniform(0.2, 1.0, size=3)
    e4 = rng.uniform(0.05, 0.5)
    s = e1 + e2 + e3 - e4
    k = e1 * e3 / (e2**2 * e4)
    e5 = (np.sqrt(1 + 4 * k * s) - 1) / (2 * k)
    return np.array([e1, e2, e3, e4, e5, s - e5])


def _random_points(model: Model, rng: np.random.Generator, count: int) -> list[np.ndarray]:
    if model.id == "log-marginal":
        return [_log_marginal_point(rng) for _ in range(count)]
    if model.id == "periodic-gaussian":
        return [np.array([rng.uniform(0.0, 0.9)]) for _ in range(count)]
    return [np.array([rng.uniform(-2.0, 2.0)]) for _ in range(count)]


@pytest.mark.parametrize("model", [periodic_gaussian(), log_marginal(), toy_linear()], ids=lambda m: m.id)
def test_fisher_information_is_positive_definite(model: Model) -> None:
    """The induced metric is symmetric with positive spectrum at interior points."""
    rng = make_rng(3)
    for point in _random_points(model, rng, 50):
        g = fisher_information(model, point)
        np.testing.assert_allclose(g, g.T, atol=1e-8)
        assert np.linalg.eigvalsh(g).min() > 0


@pytest.mark.parametrize("model", [periodic_gaussian(), log_marginal(), toy_linear()], ids=lambda m: m.id)
def test_mle_system_vanishes_at_the_true_point(model: Model) -> None:
    """With data x = η(u0) every MLE equation and constraint is zero at u0."""
    rng = make_rng(4)
    for point in _random_points(model, rng, 20):
        np.testing.assert_allclose(model.constraint_residuals(model.eta_at(point), model.eta_at(point)), 0.0, atol=1e-12)
        system = build_mle_system(model, data=model.eta_at(point).tolist())
        values = dict(zip(system.unknowns, point.tolist()))
        residuals = [abs(complex(eq.eval(values))) for eq in system.equations]
        assert max(residuals) <= 1e-10, (point, residuals)


def test_m_connection_shape() -> None:
    """Γ_{ab,c} carries three model indices."""
    model = log_marginal()
    assert m_connection(model, np.array(LOG_MARGINAL_TRUTH)).shape == (3, 3, 3)


def test_bias_correction_scales_with_sample_size() -> None:
    """The correction is b/(2N), from the numeric bias when no closed form exists."""
    model = toy_linear()
    assert bias_correction(model, np.array([0.5]), 10)[0] == pytest.approx(0.5 / 20, rel=1e-6)
    with pytest.raises(ValueError, match="sample size must be positive"):
        bias_correction(model, np.array([0.5]), 0)


def test_unknown_pairing() -> None:
    """Only the fisher and euclidean pairings exist."""
    with pytest.raises(ValueError, match="unknown pairing"):
        bias_vector(toy_linear(), np.array([0.5]), "mixed")  # type: ignore[arg-type]
    with pytest.raises(ValueError, match="unknown pairing"):
        m_connection(toy_linear(), np.array([0.5]), "mixed")  # type: ignore[arg-type]
