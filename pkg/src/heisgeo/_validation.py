"""Input validation helpers shared by the functional API and the estimators."""

import numpy as np


class DimensionMismatchError(ValueError):
    """Raised when two objects live in Heisenberg groups of different n."""


def as_finite_vector(values, name="values"):
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def as_finite_matrix(values, name="values", min_rows=1):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.shape[0] < min_rows:
        raise ValueError(f"{name} needs at least {min_rows} rows, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def check_even_width(width, name="samples"):
    """Return n for a row width of 2n (planar) samples."""
    if width < 2 or width % 2:
        raise ValueError(f"{name} must have 2n columns (x1..xn, y1..yn), got {width}")
    return width // 2


def check_same_n(n1, n2):
    if n1 != n2:
        raise DimensionMismatchError(f"dimension mismatch: n={n1} vs n={n2}")


def frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr
