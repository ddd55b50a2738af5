"""Shared test helpers: small hand-checkable Hamiltonians and matrix files."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from phtk.cli.matrix_io import write_matrix
from phtk.theory.spectra import BiorthonormalSystem, biorthonormal_from_columns

# H = [[1, 1], [0, 2]] with ψ₁ = (1, 0), ψ₂ = (1, 1)
UPPER_TRIANGULAR = np.array([[1.0, 1.0], [0.0, 2.0]], dtype=complex)
UPPER_TRIANGULAR_PSI = np.array([[1.0, 1.0], [0.0, 1.0]], dtype=complex)

# H = [[0, 1], [−1, 0]] with ψ₊ = (1, i) for +i and ψ₋ = (1, −i) for −i
ROTATION = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
ROTATION_PSI = np.array([[1.0, 1.0], [1j, -1j]], dtype=complex)


def upper_triangular_system() -> BiorthonormalSystem:
    return biorthonormal_from_columns(UPPER_TRIANGULAR, UPPER_TRIANGULAR_PSI)


def rotation_system() -> BiorthonormalSystem:
    return biorthonormal_from_columns(ROTATION, ROTATION_PSI)


def column(system: BiorthonormalSystem, value: complex) -> int:
    """Column index of the (non-degenerate) eigenvalue closest to ``value``."""
    return int(np.argmin(np.abs(system.slot_values - value)))


def write_matrix_file(path: Path, matrix) -> Path:
    write_matrix(path, np.asarray(matrix, dtype=complex))
    return path
