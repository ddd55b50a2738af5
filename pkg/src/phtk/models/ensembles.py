"""Seeded random quasi- and pseudo-Hermitian matrices.

Every generator draws from ``numpy.random.default_rng(seed)`` (PCG64), so the
same seed always yields the same matrix.
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from phtk.errors import RangeError
from phtk.theory.linalg import as_square
from phtk.theory.spectra import BiorthonormalSystem

logger = logging.getLogger(__name__)

# Bound on cond(A) for the similarity transform
MAX_SIMILARITY_CONDITION = 100.0


def _ginibre(rng: np.random.Generator, n: int) -> np.ndarray:
    return (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)


def _unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(_ginibre(rng, n))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_similarity(n: int, rng: np.random.Generator) -> np.ndarray:
    """A = U·diag(s)·V† with Haar-like U, V and singular values in [1, 100]."""
    u = _unitary(rng, n)
    v = _unitary(rng, n)
    s = np.exp(rng.uniform(0.0, np.log(MAX_SIMILARITY_CONDITION), n))
    s[np.argmin(s)] = 1.0
    return (u * s) @ v.conj().T


def _similar(diagonal: np.ndarray, similarity: np.ndarray) -> np.ndarray:
    a = as_square(similarity, "similarity")
    if a.shape[0] != diagonal.size:
        raise RangeError(f"similarity of dim {a.shape[0]} for {diagonal.size} eigenvalues")
    return np.linalg.solve(a.T, (a * diagonal).T).T


def random_quasi_hermitian(
    n: int,
    spectrum: Sequence[float],
    seed: int = 0,
    similarity: np.ndarray | None = None,
) -> np.ndarray:
    """H = A·diag(spectrum)·A⁻¹ with a seeded A (or the given ``similarity``)."""
    values = np.asarray(spectrum, dtype=float)
    if values.size != n:
        raise RangeError(f"spectrum has {values.size} values for dimension {n}")
    if similarity is None:
        similarity = random_similarity(n, np.random.default_rng(seed))
    return _similar(values.astype(complex), similarity)


def random_pseudo_hermitian(
    n_real: int,
    pairs: Sequence[complex],
    seed: int = 0,
    reals: Sequence[float] | None = None,
    similarity: np.ndarray | None = None,
) -> np.ndarray:
    """H similar to diag(reals, E₁, E₁*, E₂, E₂*, …) for pair values with Im E > 0.

    Real eigenvalues are drawn uniformly from [−5, 5] unless ``reals`` is given.
    """
    pairs = [complex(e) for e in pairs]
    if any(e.imag <= 0 for e in pairs):
        raise RangeError("pair eigenvalues must have a positive imaginary part")
    rng = np.random.default_rng(seed)
    if reals is None:
        real_values = np.sort(rng.uniform(-5.0, 5.0, n_real))
    else:
        real_values = np.asarray(reals, dtype=float)
        if real_values.size != n_real:
            raise RangeError(f"got {real_values.size} real eigenvalues, expected {n_real}")
    diagonal = np.concatenate([
        real_values.astype(complex),
        np.array([v for e in pairs for v in (e, e.conjugate())], dtype=complex),
    ])
    if similarity is None:
        similarity = random_similarity(diagonal.size, rng)
    return _similar(diagonal, similarity)


def random_symmetry_generator(system: BiorthonormalSystem, seed: int = 0) -> np.ndarray:
    """Random invertible A with [A, H] = 0.

    A = Ψ·α·Φ† with α block diagonal over eigenvalue groups; each block is a
    random unitary times positive scales in [e⁻¹, e], so cond(α) ≤ e².
    """
    rng = np.random.default_rng(seed)
    alpha = np.zeros((system.dim, system.dim), dtype=complex)
    for g in system.groups:
        slots = list(g.slots)
        scales = np.exp(rng.uniform(-1.0, 1.0, len(slots)))
        alpha[np.ix_(slots, slots)] = _unitary(rng, len(slots)) * scales
    return system.psi @ alpha @ system.phi.conj().T
