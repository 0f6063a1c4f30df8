"""Tests for environment parsing and configuration validation."""
# ruff: noqa: D102,D103,D105,D107

from __future__ import annotations

from fractions import Fraction

import pytest

from algebraic_estimators.config import Config, _env_int, _env_flag, _env_float, _env_fraction


def test_env_flag(monkeypatch: pytest.MonkeyPatch) -> None:
    """Truthy and falsy spellings parse; anything else falls back to the default."""
    monkeypatch.setenv("ALGEST_TEST_FLAG", "Yes")
    assert _env_flag("ALGEST_TEST_FLAG") is True
    monkeypatch.setenv("ALGEST_TEST_FLAG", "off")
    assert _env_flag("ALGEST_TEST_FLAG", default=True) is False
    monkeypatch.setenv("ALGEST_TEST_FLAG", "maybe")
    assert _env_flag("ALGEST_TEST_FLAG", default=True) is True
    monkeypatch.delenv("ALGEST_TEST_FLAG")
    assert _env_flag("ALGEST_TEST_FLAG") is False


def test_env_numbers(monkeypatch: pytest.MonkeyPatch) -> None:
    """Bad numbers fall back to the default."""
    monkeypatch.setenv("ALGEST_TEST_INT", " 12 ")
    assert _env_int("ALGEST_TEST_INT", 3) == 12
    monkeypatch.setenv("ALGEST_TEST_INT", "twelve")
    assert _env_int("ALGEST_TEST_INT", 3) == 3
    monkeypatch.setenv("ALGEST_TEST_FLOAT", "1e-6")
    assert _env_float("ALGEST_TEST_FLOAT", 0.1) == 1e-6
    monkeypatch.setenv("ALGEST_TEST_FLOAT", "")
    assert _env_float("ALGEST_TEST_FLOAT", 0.1) == 0.1


def test_defaults_validate() -> None:
    """The shipped defaults pass validation."""
    Config()


@pytest.mark.parametrize(
    "name,value,message",
    [
        ("GB_MAX_BASIS", 0, "ceilings must be positive"),
        ("TRACK_INITIAL_STEP", 1.5, "ALGEST_TRACK_INITIAL_STEP"),
        ("TRACK_MIN_STEP", 1.0, "ALGEST_TRACK_MIN_STEP"),
        ("NEWTON_TOL", 0.0, "tolerances must be positive"),
        ("THREADS", 0, "at least 1"),
    ],
)
def test_invalid_values_raise(monkeypatch: pytest.MonkeyPatch, name: str, value: float, message: str) -> None:
    """Inconsistent settings stop the process at import time."""
    monkeypatch.setattr(Config, name, value)
    with pytest.raises(RuntimeError, match=message):
        Config()


def test_env_fraction(monkeypatch: pytest.MonkeyPatch) -> None:
    """Rational spellings parse exactly; malformed values and zero denominators fall back."""
    monkeypatch.setenv("ALGEST_TEST_FRACTION", " 1/2 ")
    assert _env_fraction("ALGEST_TEST_FRACTION", Fraction(1)) == Fraction(1, 2)
    monkeypatch.setenv("ALGEST_TEST_FRACTION", "-3")
    assert _env_fraction("ALGEST_TEST_FRACTION", Fraction(1)) == -3
    monkeypatch.setenv("ALGEST_TEST_FRACTION", "0.25")
    assert _env_fraction("ALGEST_TEST_FRACTION", Fraction(1)) == Fraction(1, 4)
    monkeypatch.setenv("ALGEST_TEST_FRACTION", "1/0")
    assert _env_fraction("ALGEST_TEST_FRACTION", Fraction(1)) == 1
    monkeypatch.setenv("ALGEST_TEST_FRACTION", "half")
    assert _env_fraction("ALGEST_TEST_FRACTION", Fraction(1)) == 1


def test_perturbation_default_is_rational() -> None:
    """The shipped perturbation constant is an exact rational."""
    assert isinstance(Config.PERTURBATION_C, Fraction)
