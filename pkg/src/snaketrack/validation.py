"""Input validation helpers used at public API boundaries.

All helpers return a validated (and possibly converted) numpy array so call
sites can write ``mask = check_binary_mask(mask)`` and rely on dtype/shape
downstream.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, ParameterError


def as_float_vector(x, n: int, name: str = "vector") -> np.ndarray:
    """Coerce to a finite float64 vector of length ``n``."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape != (n,):
        raise DimensionError(f"{name} must have shape ({n},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{name} must be finite")
    return arr


def check_binary_mask(mask, name: str = "mask") -> np.ndarray:
    """Coerce to a 2-D boolean array (nonzero treated as set)."""
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D (H, W), got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must have positive dimensions, got {arr.shape}")
    if arr.dtype != np.bool_:
        arr = arr != 0
    return arr


def check_soft_mask(mask, name: str = "mask") -> np.ndarray:
    """Coerce to a 2-D float64 array with values in [0, 1]."""
    arr = np.asarray(mask, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D (H, W), got ndim={arr.ndim}")
    if arr.size and (arr.min() < -1e-12 or arr.max() > 1.0 + 1e-12):
        raise ParameterError(f"{name} values must lie in [0, 1]")
    return arr


def check_same_shape(a: np.ndarray, b: np.ndarray, names: str = "masks") -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{names} must have equal shape, got {a.shape} vs {b.shape}")


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ParameterError(f"{name} must be positive and finite, got {value}")
    return value


def check_non_negative(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value < 0:
        raise ParameterError(f"{name} must be non-negative and finite, got {value}")
    return value
