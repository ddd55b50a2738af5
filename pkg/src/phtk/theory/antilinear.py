"""Antilinear operators and the anti-pseudo-Hermitian constructions.

An antilinear operator T is stored as a matrix M with T x = M·conj(x) in the
computational basis. Composition rules used throughout:

    L ∘ T   → antilinear, matrix L·M
    T ∘ L   → antilinear, matrix M·conj(L)
    T₂ ∘ T₁ → linear,     matrix M₂·conj(M₁)
    T⁻¹     → antilinear, matrix conj(M⁻¹)

T is Hermitian (⟨x|Ty⟩ = ⟨y|Tx⟩) iff Mᵀ = M, and an involution iff
M·conj(M) = I.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from phtk.errors import BlockNotSymmetric, NotInvertible, ShapeMismatch
from phtk.theory.linalg import (
    as_square,
    check_same_shape,
    identity_residual,
    max_abs,
    min_singular_value,
    symmetry_residual,
)
from phtk.theory.metrics import SignSequence
from phtk.theory.spectra import BiorthonormalSystem

logger = logging.getLogger(__name__)

# Singular values closer than this (relative) are one Takagi cluster
TAKAGI_CLUSTER_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class AntilinearOperator:
    matrix: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", as_square(self.matrix, "antilinear matrix"))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return apply_antilinear(self, x)

    def hermiticity_residual(self) -> float:
        return symmetry_residual(self.matrix)

    def involution_residual(self) -> float:
        return identity_residual(self.matrix @ self.matrix.conj())


Operator = np.ndarray | AntilinearOperator


def apply_antilinear(op: AntilinearOperator, x: np.ndarray) -> np.ndarray:
    """M·conj(x) for a vector or a matrix of column vectors."""
    x = np.asarray(x, dtype=complex)
    if x.shape[0] != op.dim:
        raise ShapeMismatch(f"vector of length {x.shape[0]} for operator of dim {op.dim}")
    return op.matrix @ x.conj()


def compose(*ops: Operator) -> Operator:
    """Compose operators right to left: compose(A, B, C) acts as A∘B∘C."""
    if not ops:
        raise ValueError("compose needs at least one operator")
    result = ops[-1]
    for left in reversed(ops[:-1]):
        result = _compose_pair(left, result)
    return result


def _compose_pair(left: Operator, right: Operator) -> Operator:
    left_anti = isinstance(left, AntilinearOperator)
    right_anti = isinstance(right, AntilinearOperator)
    lm = left.matrix if left_anti else as_square(left, "operator")
    rm = right.matrix if right_anti else as_square(right, "operator")
    check_same_shape(lm, rm)
    if left_anti and right_anti:
        return lm @ rm.conj()
    if left_anti:
        return AntilinearOperator(lm @ rm.conj())
    if right_anti:
        return AntilinearOperator(lm @ rm)
    return lm @ rm


def inverse(op: Operator) -> Operator:
    """Inverse of a linear or antilinear operator.

    Raises NotInvertible when the matrix is numerically singular.
    """
    m = op.matrix if isinstance(op, AntilinearOperator) else as_square(op, "operator")
    if min_singular_value(m) <= np.finfo(float).eps * max(1.0, max_abs(m)) * m.shape[0]:
        raise NotInvertible("operator is singular")
    inv = np.linalg.inv(m)
    if isinstance(op, AntilinearOperator):
        return AntilinearOperator(inv.conj())
    return inv


# ── Constructions from a biorthonormal system ──


def tau_plus(system: BiorthonormalSystem) -> AntilinearOperator:
    """τ₊ with M = Φ·Φᵀ, i.e. τ₊x = Σ φ⟨φ|x⟩*."""
    return AntilinearOperator(system.phi @ system.phi.T)


def tau_sigma(system: BiorthonormalSystem, sigma: SignSequence | None = None) -> AntilinearOperator:
    """τ_σ = Σσφφᵀ over real slots plus Σφφᵀ over every nonreal slot."""
    w = (sigma or SignSequence.uniform(system)).weights(system)
    d = system.coefficients(w, pairs="diagonal")
    return AntilinearOperator(system.phi @ d @ system.phi.T)


def tau_plus_inverse(system: BiorthonormalSystem) -> AntilinearOperator:
    """τ₊⁻¹ with M = Ψ·Ψᵀ, i.e. τ₊⁻¹x = Σ ψ⟨ψ|x⟩*."""
    return AntilinearOperator(system.psi @ system.psi.T)


def tau_sigma_inverse(system: BiorthonormalSystem, sigma: SignSequence | None = None) -> AntilinearOperator:
    w = (sigma or SignSequence.uniform(system)).weights(system)
    d = system.coefficients(w, pairs="diagonal")
    return AntilinearOperator(system.psi @ d @ system.psi.T)


def tau_general(system: BiorthonormalSystem, a: np.ndarray) -> AntilinearOperator:
    """A†∘τ₊∘A, matrix A†·ΦΦᵀ·conj(A)."""
    a = as_square(a, "A")
    return compose(a.conj().T, tau_plus(system), a)


def is_anti_pseudo_hermitian(
    hamiltonian: np.ndarray, op: AntilinearOperator, tol: float = 1e-10,
) -> tuple[bool, float]:
    """Check H†∘T = T∘H, i.e. H†·M = M·conj(H)."""
    h = as_square(hamiltonian, "H")
    m = op.matrix
    check_same_shape(h, m)
    diff = h.conj().T @ m - m @ h.conj()
    residual = max_abs(diff) / max(1.0, max_abs(h) * max_abs(m))
    return residual <= tol, residual


# ── Takagi factorization ──


def _fix_column_signs(u: np.ndarray) -> np.ndarray:
    """Flip columns so the leading component has argument in (−π/2, π/2]."""
    for k in range(u.shape[1]):
        mags = np.abs(u[:, k])
        lead = int(np.argmax(mags >= (1.0 - 1e-8) * mags.max()))
        angle = np.angle(u[lead, k])
        if angle <= -np.pi / 2 or angle > np.pi / 2:
            u[:, k] = -u[:, k]
    return u


def takagi(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Takagi factorization x = U·diag(s)·Uᵀ of a complex symmetric matrix.

    U is unitary and s ≥ 0 (descending). Built from the SVD x = V·diag(s)·W†:
    within each cluster of equal singular values Z = V_cᵀW_c is unitary and
    symmetric, and U_c = V_c·conj(√Z).

    Raises BlockNotSymmetric when x is not symmetric.
    """
    x = as_square(x, "x")
    if symmetry_residual(x) > 1e3 * np.finfo(float).eps * max(1, x.shape[0]):
        raise BlockNotSymmetric(f"matrix is not symmetric (residual {symmetry_residual(x):.2e})")
    x = (x + x.T) / 2
    v, s, wh = np.linalg.svd(x)
    w = wh.conj().T
    atol = np.finfo(float).eps * max(1.0, s[0] if s.size else 1.0) * x.shape[0]

    clusters: list[list[int]] = []
    for i, value in enumerate(s):
        if clusters and abs(s[clusters[-1][0]] - value) <= TAKAGI_CLUSTER_RTOL * max(s[0], 1.0):
            clusters[-1].append(i)
        else:
            clusters.append([i])

    u = np.zeros_like(x)
    for c in clusters:
        if s[c[0]] <= atol:
            u[:, c] = v[:, c]
            continue
        z = v[:, c].T @ w[:, c]
        q = scipy.linalg.sqrtm(z)
        u[:, c] = v[:, c] @ q.conj()
    return _fix_column_signs(u), s


def decompose_tau(
    system: BiorthonormalSystem, op: AntilinearOperator, tol: float = 1e-8,
) -> np.ndarray:
    """Factor a Hermitian antilinear τ as τ = A†∘τ₊∘A with [A, H] = 0.

    x = Ψᵀ·conj(M)·Ψ is block diagonal over eigenvalue groups when H is
    anti-pseudo-Hermitian with respect to τ; each complex symmetric block
    is Takagi factorized, x = aᵀa with a = diag(√s)·Uᵀ, and A = Ψ·a·Φ†.

    Raises:
        BlockNotSymmetric: M is not symmetric, a block is not symmetric, or x
            couples distinct eigenvalues.
        NotInvertible: M or a block is singular.
    """
    m = op.matrix
    check_same_shape(m, system.hamiltonian)
    if symmetry_residual(m) > tol:
        raise BlockNotSymmetric(f"antilinear operator is not Hermitian ({symmetry_residual(m):.2e})")

    psi = system.psi
    x = psi.T @ m.conj() @ psi
    scale = max(1.0, max_abs(x))
    if min_singular_value(x) < tol * scale:
        raise NotInvertible("antilinear operator is singular")

    allowed = np.zeros(x.shape, dtype=bool)
    for g in system.groups:
        allowed[np.ix_(g.slots, g.slots)] = True
    leakage = max_abs(np.where(allowed, 0.0, x)) / scale
    if leakage > tol:
        raise BlockNotSymmetric(
            f"operator couples distinct eigenvalues (leakage {leakage:.2e}); "
            "H is not anti-pseudo-Hermitian with respect to it"
        )

    a = np.zeros_like(x)
    for g in system.groups:
        slots = list(g.slots)
        block = x[np.ix_(slots, slots)]
        residual = max_abs(block - block.T) / scale
        if residual > tol:
            raise BlockNotSymmetric(f"block n={g.index} is not symmetric ({residual:.2e})")
        u, s = takagi((block + block.T) / 2)
        if s[-1] < tol * scale:
            raise NotInvertible(f"block n={g.index} is singular")
        a[np.ix_(slots, slots)] = np.diag(np.sqrt(s)) @ u.T

    logger.debug("decompose_tau: %d blocks, leakage %.2e", len(system.groups), leakage)
    return psi @ a @ system.phi.conj().T
