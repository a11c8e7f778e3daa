from __future__ import annotations
import numpy as np

from .errors import DimensionMismatch


def distance(a: np.ndarray, b: np.ndarray) -> float:
    """Euclidean distance: square root of the summed squared differences."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"vectors of length {a.size} and {b.size} cannot be compared")
    diff = a - b
    return float(np.sqrt(np.sum(diff * diff)))


def distances_to(weights: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Distance from x to every row of weights (one evaluation per row)."""
    if weights.shape[1] != x.shape[0]:
        raise DimensionMismatch(f"input has length {x.shape[0]}, map expects {weights.shape[1]}")
    diff = weights - x
    return np.sqrt(np.sum(diff * diff, axis=1))
