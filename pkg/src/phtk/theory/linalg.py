"""Small dense helpers shared by the theory modules."""

from __future__ import annotations

import numpy as np

from phtk.errors import NonSquare, ShapeMismatch


def as_square(matrix: np.ndarray | list, name: str = "matrix") -> np.ndarray:
    """Return ``matrix`` as a complex square ndarray or raise NonSquare."""
    arr = np.asarray(matrix, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NonSquare(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonSquare(f"{name} has non-finite entries")
    return arr


def check_same_shape(*arrays: np.ndarray) -> None:
    shapes = {a.shape for a in arrays}
    if len(shapes) > 1:
        raise ShapeMismatch(f"shape mismatch: {sorted(shapes)}")


def max_abs(a: np.ndarray) -> float:
    """Max-norm ``‖a‖_max``; 0 for empty arrays."""
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a)))


def relative(diff: np.ndarray, *scales: float) -> float:
    """``‖diff‖_max / max(1, product of scales)``."""
    denom = 1.0
    for s in scales:
        denom *= s
    return max_abs(diff) / max(1.0, denom)


def identity_residual(product: np.ndarray) -> float:
    return max_abs(product - np.eye(product.shape[0]))


def hermiticity_residual(a: np.ndarray) -> float:
    return relative(a - a.conj().T, max_abs(a))


def symmetry_residual(a: np.ndarray) -> float:
    return relative(a - a.T, max_abs(a))


def min_singular_value(a: np.ndarray) -> float:
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[-1])
