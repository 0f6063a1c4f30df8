"""Tests for the built-in model descriptors and their samplers."""
# ruff: noqa: D102,D103,D105,D107

from __future__ import annotations
from typing import Sequence

import numpy as np
import pytest

from algebraic_estimators.models import (
    MODELS,
    LOG_MARGINAL_TRUTH,
    Model,
    ModelError,
    make_rng,
    get_model,
    toy_linear,
    log_marginal,
    symmetric_sqrt,
    periodic_gaussian,
    circulant_covariance,
    periodic_gaussian_statistic,
)


# One million observations split into replicate batches; the standard error comes from their spread.
REPLICATES = 40
BATCH = 25_000


def test_registry() -> None:
    """Every registered id resolves; unknown ids fail with the choices listed."""
    for model_id in MODELS:
        assert get_model(model_id).id == model_id
    with pytest.raises(ModelError, match="unknown model 'nope'"):
        get_model("nope")


def test_periodic_gaussian_descriptor() -> None:
    """d=3, p=1 and η(a) = (-2, -4a, -2a^2)."""
    model = periodic_gaussian()
    assert (model.d, model.p) == (3, 1)
    assert not model.is_implicit
    np.testing.assert_allclose(model.eta_at([0.5]), [-2.0, -2.0, -0.5])
    assert model.truth == (0.5,)


def test_periodic_gaussian_domain() -> None:
    """The correlation must lie in [0, 1)."""
    model = periodic_gaussian()
    with pytest.raises(ModelError, match=r"\[0, 1\)"):
        model.check_point([1.0])
    with pytest.raises(ModelError, match="finite"):
        model.check_point([float("nan")])


def test_symmetric_sqrt_squares_back() -> None:
    """R·R = Σ(a) and R is symmetric."""
    sigma = circulant_covariance(0.4)
    root = symmetric_sqrt(sigma)
    np.testing.assert_allclose(root, root.T, atol=1e-12)
    np.testing.assert_allclose(root @ root, sigma, atol=1e-12)


def test_statistic_signs() -> None:
    """t(x) on the all-ones vector is (-2, -4, -2)."""
    np.testing.assert_allclose(periodic_gaussian_statistic(np.ones((1, 4))), [[-2.0, -4.0, -2.0]])


def _within_five_standard_errors(model: Model, point: Sequence[float], seed: int) -> None:
    rng = make_rng(seed)
    means = np.stack([model.sample_mean(point, BATCH, rng) for _ in range(REPLICATES)])
    se = means.std(axis=0, ddof=1) / np.sqrt(REPLICATES)
    gap = np.abs(means.mean(axis=0) - model.eta_at(point))
    assert np.all(se > 0)
    assert np.all(gap <= 5 * se), (gap, se)


def test_gaussian_sampler_mean() -> None:
    """The mean of t over 1e6 draws lies within five standard errors of η(a)."""
    _within_five_standard_errors(periodic_gaussian(), [0.5], seed=1)


def test_sampler_is_seeded() -> None:
    """Equal seeds give equal draws; different seeds do not."""
    model = periodic_gaussian()
    a = model.sample_mean([0.3], 50, make_rng(np.random.SeedSequence([0, 1, 2])))
    b = model.sample_mean([0.3], 50, make_rng(np.random.SeedSequence([0, 1, 2])))
    c = model.sample_mean([0.3], 50, make_rng(np.random.SeedSequence([0, 1, 3])))
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    with pytest.raises(ModelError, match="positive"):
        model.sample_mean([0.3], 0, make_rng(0))


def test_log_marginal_descriptor() -> None:
    """Implicit model on the eta block with u = (η1, η3, η5)."""
    model = log_marginal()
    assert (model.d, model.p) == (6, 3)
    assert model.is_implicit
    assert model.u_indices == (0, 2, 4)
    assert model.v_indices == (1, 3, 5)
    assert len(model.constraints) == 3


def test_log_marginal_constraints_at_truth() -> None:
    """The true intensities satisfy all constraints when the data total is one."""
    model = log_marginal()
    residuals = model.constraint_residuals(LOG_MARGINAL_TRUTH, LOG_MARGINAL_TRUTH)
    np.testing.assert_allclose(residuals, 0.0, atol=1e-15)
    off = model.constraint_residuals(LOG_MARGINAL_TRUTH, [1.0] * 6)
    assert off[2] == pytest.approx(-5.0)


def test_log_marginal_fisher_is_diagonal() -> None:
    """g_ij = δ_ij η_i."""
    point = np.array(LOG_MARGINAL_TRUTH)
    np.testing.assert_allclose(log_marginal().fisher_at(point), np.diag(point))


def test_poisson_sampler_mean() -> None:
    """Po(Nη)/N over 1e6 draws lies within five standard errors of η."""
    model = log_marginal()
    _within_five_standard_errors(model, LOG_MARGINAL_TRUTH, seed=5)
    with pytest.raises(ModelError, match="positive"):
        model.check_point([0.0] * 6)


def test_toy_sampler_mean() -> None:
    """η(u) + N(0, I)/√N over 1e6 draws lies within five standard errors of η(u)."""
    _within_five_standard_errors(toy_linear(), [0.5], seed=9)


def test_ancillary_coordinates_and_shift() -> None:
    """(u, v) split and reassemble; shifts move only u."""
    model = log_marginal()
    point = np.arange(1.0, 7.0)
    u, v = model.ancillary_point(point)
    np.testing.assert_array_equal(u, [1.0, 3.0, 5.0])
    np.testing.assert_array_equal(v, [2.0, 4.0, 6.0])
    np.testing.assert_array_equal(model.ancillary_eta(u, v), point)
    shifted = model.shift(point, np.array([0.5, 0.5, 0.5]))
    np.testing.assert_array_equal(shifted, [1.5, 2.0, 3.5, 4.0, 5.5, 6.0])


def test_parametrized_ancillary_eta() -> None:
    """η(u, v) = η(u) + Σ v_i e_i(u) for the toy model."""
    model = toy_linear()
    np.testing.assert_allclose(model.ancillary_eta(np.array([2.0]), np.array([0.5])), [2.0 - 2.0, 4.0 + 0.5])
    np.testing.assert_allclose(model.shift([2.0], np.array([-0.25])), [1.75])
