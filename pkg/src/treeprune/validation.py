"""Input validation helpers used by the estimator classes and core functions."""

from __future__ import annotations

from typing import Iterable

from sklearn.exceptions import NotFittedError


def check_non_empty_text(text: str, name: str = "text") -> str:
    """Return ``text`` if it is a string with non-whitespace content, else raise."""
    if not isinstance(text, str):
        raise TypeError(f"{name} must be a string, got {type(text).__name__}")
    if not text.strip():
        raise ValueError(f"{name} must be non-empty")
    return text


def check_token_index(n: int, idx: int, name: str = "index") -> int:
    """Validate a 1-based token index against sentence length ``n``."""
    if not isinstance(idx, int) or isinstance(idx, bool):
        raise TypeError(f"{name} must be an int, got {type(idx).__name__}")
    if not 1 <= idx <= n:
        raise IndexError(f"{name} {idx} out of range 1..{n}")
    return idx


def check_unit_interval(value: float, name: str, *, open_low: bool = False) -> float:
    """Validate a float in [0, 1] (or (0, 1] when ``open_low``)."""
    low_ok = value > 0.0 if open_low else value >= 0.0
    if not (low_ok and value <= 1.0):
        bound = "(0, 1]" if open_low else "[0, 1]"
        raise ValueError(f"{name} must be in {bound}, got {value}")
    return float(value)


def check_positive_int(value: int, name: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return value


def check_fitted(estimator, attributes: Iterable[str]) -> None:
    """Raise NotFittedError unless every trailing-underscore attribute exists."""
    missing = [a for a in attributes if not hasattr(estimator, a)]
    if missing:
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted yet; call fit() first "
            f"(missing {', '.join(missing)})"
        )
