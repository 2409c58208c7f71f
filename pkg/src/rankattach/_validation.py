"""Argument checks shared by the library, the estimators and the CLI."""

from __future__ import annotations

import numbers

import numpy as np


def check_alpha(alpha) -> float:
    """Return ``alpha`` as a float, requiring the open interval (0, 1)."""
    if isinstance(alpha, bool) or not isinstance(alpha, numbers.Real):
        raise TypeError(f"alpha must be a real number, got {type(alpha).__name__}")
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in the open interval (0, 1), got {alpha}")
    return alpha


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        # accept integral floats such as 1e6 coming from the command line
        if isinstance(value, numbers.Real) and float(value).is_integer():
            value = int(value)
        else:
            raise TypeError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_unit_interval(u, name: str = "u") -> float:
    u = float(u)
    if not (0.0 <= u < 1.0):
        raise ValueError(f"{name} must lie in [0, 1), got {u}")
    return u


def check_degrees(degrees) -> np.ndarray:
    """Validate a degree sequence and return it as a 1-d int64 array."""
    arr = np.asarray(degrees)
    if arr.ndim != 1:
        raise ValueError(f"degrees must be one-dimensional, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.isfinite(arr)) or not np.all(arr == np.round(arr)):
            raise ValueError("degrees must be integers")
    arr = arr.astype(np.int64, copy=False)
    if arr.size and arr.min() < 0:
        raise ValueError("degrees must be non-negative")
    return arr


def check_positive_samples(samples, name: str = "samples") -> np.ndarray:
    """1-d array of finite, non-negative reals as float64."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size and (not np.all(np.isfinite(arr)) or arr.min() < 0):
        raise ValueError(f"{name} must be finite and non-negative")
    return arr
