"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np


def ensure_rng(seed) -> np.random.Generator:
    """Return a Generator from a seed, Generator, or None (fresh entropy)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def as_positions(arr, name: str = "positions") -> np.ndarray:
    """Coerce to an (n, 3) float64 array of finite coordinates."""
    out = np.asarray(arr, dtype=float)
    if out.ndim == 1 and out.size == 3:
        out = out.reshape(1, 3)
    if out.ndim != 2 or out.shape[1] != 3:
        raise ValueError(f"{name} must have shape (n, 3), got {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite values")
    return out


def as_colors(arr, name: str = "colors") -> np.ndarray:
    """Coerce to an (n, 3) float64 array of RGB channels in [0, 1]."""
    out = np.asarray(arr, dtype=float)
    if out.ndim == 1 and out.size == 3:
        out = out.reshape(1, 3)
    if out.ndim != 2 or out.shape[1] != 3:
        raise ValueError(f"{name} must have shape (n, 3), got {out.shape}")
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite values")
    if np.any(out < 0.0) or np.any(out > 1.0):
        raise ValueError(f"{name} channels must lie in [0, 1]")
    return out


def as_unit_vector(v, name: str = "vector", tol: float = 1e-9) -> np.ndarray:
    """Validate a 3-vector of unit length within tol."""
    out = np.asarray(v, dtype=float).reshape(3)
    if not np.all(np.isfinite(out)):
        raise ValueError(f"{name} contains non-finite values")
    norm = float(np.linalg.norm(out))
    if abs(norm - 1.0) > tol:
        raise ValueError(f"{name} must be unit length (norm {norm:.3e})")
    return out


def require_positive(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be a positive finite number, got {value}")
    return value


def readonly(arr: np.ndarray) -> np.ndarray:
    """Return a non-writeable view so shared containers stay immutable."""
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr
