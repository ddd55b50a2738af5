"""Linear metric operators η with H† = ηHη⁻¹.

All metrics here are built in the dual basis, η = Φ·J·Φ†, and their inverses
in the eigenvector basis, η⁻¹ = Ψ·J⁻¹·Ψ†. J is diagonal with signs σ on real
slots and couples each ν₊ slot to its ν₋ partner.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

import numpy as np

from phtk.errors import (
    BlockNotHermitian,
    NotAMetric,
    ShapeMismatch,
    SignDomainMismatch,
)
from phtk.theory.linalg import (
    as_square,
    check_same_shape,
    hermiticity_residual,
    max_abs,
    min_singular_value,
)
from phtk.theory.spectra import BiorthonormalSystem, SpectralLabel, require_paired

logger = logging.getLogger(__name__)


# ── Sign sequences ──


@dataclass(frozen=True)
class SignSequence:
    """Signs σₙᵃ ∈ {+1, −1} keyed by (group index n, degeneracy index a).

    Only real-eigenvalue slots carry a sign; conjugate-pair slots never do.
    """

    signs: Mapping[tuple[int, int], int]

    @classmethod
    def uniform(cls, system: BiorthonormalSystem, sign: int = 1) -> SignSequence:
        return cls({system.slot_key(s): sign for s in system.real_slots})

    @classmethod
    def alternating(cls, system: BiorthonormalSystem) -> SignSequence:
        """σₙᵃ = (−1)ⁿ with n the group ordering index."""
        return cls({(n, a): (-1) ** n for n, a in map(system.slot_key, system.real_slots)})

    @classmethod
    def from_list(cls, system: BiorthonormalSystem, signs: Iterable[int]) -> SignSequence:
        """Signs listed in real-slot column order."""
        values = list(signs)
        real = system.real_slots
        if len(values) != len(real):
            raise SignDomainMismatch(
                f"expected {len(real)} signs for the real slots, got {len(values)}"
            )
        return cls({system.slot_key(s): int(v) for s, v in zip(real, values)})

    def as_list(self) -> list[int]:
        return [self.signs[k] for k in sorted(self.signs)]

    def is_uniform(self) -> bool:
        return all(v == 1 for v in self.signs.values())

    def weights(self, system: BiorthonormalSystem) -> np.ndarray:
        """Per-column weight vector (σ on real slots, 0 elsewhere).

        Raises SignDomainMismatch when the keys are not exactly the real slots
        of ``system`` or a value is not ±1.
        """
        expected = {system.slot_key(s) for s in system.real_slots}
        keys = set(self.signs)
        if keys != expected:
            missing = sorted(expected - keys)
            extra = sorted(keys - expected)
            raise SignDomainMismatch(
                f"sign sequence does not match the real slots (missing {missing}, extra {extra})"
            )
        bad = {k: v for k, v in self.signs.items() if v not in (1, -1)}
        if bad:
            raise SignDomainMismatch(f"signs must be +1 or -1, got {bad}")
        w = np.zeros(system.dim)
        for s in system.real_slots:
            w[s] = self.signs[system.slot_key(s)]
        return w


# ── Metric operators ──


class MetricKind(str, Enum):
    POSITIVE = "Positive"
    INDEFINITE = "Indefinite"
    GENERAL = "General"


@dataclass(frozen=True, eq=False)
class MetricOperator:
    matrix: np.ndarray
    kind: MetricKind

    @property
    def min_eigenvalue(self) -> float:
        herm = (self.matrix + self.matrix.conj().T) / 2
        return float(np.linalg.eigvalsh(herm)[0])

    def is_positive(self, tol: float = 1e-10) -> bool:
        """Smallest eigenvalue of the Hermitian part above 10·tol·‖η‖."""
        return self.min_eigenvalue > 10 * tol * max_abs(self.matrix)


def _metric_kind(system: BiorthonormalSystem, sigma: SignSequence | None) -> MetricKind:
    if system.pair_slots:
        return MetricKind.INDEFINITE
    if sigma is None or sigma.is_uniform():
        return MetricKind.POSITIVE
    return MetricKind.INDEFINITE


def _resolve_sigma(system: BiorthonormalSystem, sigma: SignSequence | None) -> np.ndarray:
    if sigma is None:
        sigma = SignSequence.uniform(system)
    return sigma.weights(system)


def _as_matrix(eta: MetricOperator | np.ndarray) -> np.ndarray:
    if isinstance(eta, MetricOperator):
        return eta.matrix
    return as_square(eta, "eta")


def eta_sigma(system: BiorthonormalSystem, sigma: SignSequence | None = None) -> MetricOperator:
    """η_σ = Σσφφ† over real slots plus Σ(φ₊φ₋† + φ₋φ₊†) over pairs.

    Raises UnpairedSpectrum when a nonreal eigenvalue has no partner and
    SignDomainMismatch when ``sigma`` does not match the real slots.
    """
    require_paired(system)
    j = system.coefficients(_resolve_sigma(system, sigma), pairs="swap")
    phi = system.phi
    return MetricOperator(phi @ j @ phi.conj().T, _metric_kind(system, sigma))


def eta_plus(system: BiorthonormalSystem) -> MetricOperator:
    """Positive metric η₊ (cross-coupled on conjugate pairs)."""
    return eta_sigma(system, None)


def eta_sigma_inverse(system: BiorthonormalSystem, sigma: SignSequence | None = None) -> MetricOperator:
    """η_σ⁻¹ = Σσψψ† over real slots plus Σ(ψ₊ψ₋† + ψ₋ψ₊†) over pairs."""
    require_paired(system)
    j = system.coefficients(_resolve_sigma(system, sigma), pairs="swap")
    psi = system.psi
    return MetricOperator(psi @ j @ psi.conj().T, _metric_kind(system, sigma))


def eta_plus_inverse(system: BiorthonormalSystem) -> MetricOperator:
    return eta_sigma_inverse(system, None)


def lambda_operator(system: BiorthonormalSystem) -> np.ndarray:
    """Λ = Σψψ† over every slot (equals η₊⁻¹ for real spectra)."""
    return system.psi @ system.psi.conj().T


def eta_general(
    system: BiorthonormalSystem, a: np.ndarray, sigma: SignSequence | None = None,
) -> MetricOperator:
    """General metric A†·η_σ·A for a symmetry generator A of H."""
    a = as_square(a, "A")
    base = eta_sigma(system, sigma).matrix
    check_same_shape(a, base)
    return MetricOperator(a.conj().T @ base @ a, MetricKind.GENERAL)


# ── Checks ──


def is_pseudo_hermitian(
    hamiltonian: np.ndarray, eta: MetricOperator | np.ndarray, tol: float = 1e-10,
) -> tuple[bool, float]:
    """Check H†η = ηH.

    Residual is ‖H†η − ηH‖_max / max(1, ‖H‖_max·‖η‖_max); no inverse is formed.
    """
    h = as_square(hamiltonian, "H")
    m = _as_matrix(eta)
    check_same_shape(h, m)
    diff = h.conj().T @ m - m @ h
    residual = max_abs(diff) / max(1.0, max_abs(h) * max_abs(m))
    return residual <= tol, residual


def pseudo_inner(x: np.ndarray, y: np.ndarray, eta: MetricOperator | np.ndarray) -> complex:
    """⟨x|η y⟩."""
    m = _as_matrix(eta)
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    if x.shape != y.shape or x.shape != (m.shape[0],):
        raise ShapeMismatch(f"vectors {x.shape}, {y.shape} do not match metric {m.shape}")
    return complex(np.vdot(x, m @ y))


# ── Decomposition ──


def _phase_fixed_eigh(block: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, u = np.linalg.eigh((block + block.conj().T) / 2)
    for k in range(u.shape[1]):
        lead = int(np.argmax(np.abs(u[:, k])))
        u[:, k] *= np.conj(u[lead, k]) / abs(u[lead, k])
    return w, u


def decompose_eta(
    system: BiorthonormalSystem, eta: MetricOperator | np.ndarray, tol: float = 1e-8,
) -> tuple[np.ndarray, SignSequence]:
    """Factor a metric as η = A†·η_σ·A with [A, H] = 0.

    Works block by block on x = Ψ†ηΨ: each real degeneracy block is
    diagonalized as x = u·diag(w)·u† with σ = sign(w) and
    α = diag(√|w|)·u†; each conjugate pair contributes α₊ = I and
    α₋ = x[ν₊, ν₋]. Then A = Ψ·α·Φ†.

    Raises:
        NotAMetric: η is not Hermitian, or a block is singular.
        BlockNotHermitian: x has weight outside the allowed blocks or a
            real block is not Hermitian, so η is not a metric for this H.
    """
    require_paired(system)
    m = _as_matrix(eta)
    check_same_shape(m, system.hamiltonian)
    if hermiticity_residual(m) > tol:
        raise NotAMetric(f"eta is not Hermitian (residual {hermiticity_residual(m):.2e})")

    psi = system.psi
    x = psi.conj().T @ m @ psi
    scale = max(1.0, max_abs(x))

    allowed = np.zeros(x.shape, dtype=bool)
    for g in system.groups:
        if g.label is SpectralLabel.REAL:
            allowed[np.ix_(g.slots, g.slots)] = True
    for plus, minus in system.pair_slots:
        allowed[plus, minus] = allowed[minus, plus] = True
    # Degenerate pair groups couple every ν₊ slot with every ν₋ slot
    for g in system.groups:
        if g.label is SpectralLabel.UPPER and g.partner is not None:
            partner = system.groups[g.partner].slots
            allowed[np.ix_(g.slots, partner)] = True
            allowed[np.ix_(partner, g.slots)] = True

    leakage = max_abs(np.where(allowed, 0.0, x)) / scale
    if leakage > tol:
        raise BlockNotHermitian(
            f"eta couples non-conjugate eigenvalues (leakage {leakage:.2e}); "
            "it is not a metric for this Hamiltonian"
        )

    alpha = np.zeros_like(x)
    signs: dict[tuple[int, int], int] = {}
    for g in system.groups:
        slots = list(g.slots)
        if g.label is SpectralLabel.REAL:
            block = x[np.ix_(slots, slots)]
            residual = max_abs(block - block.conj().T) / scale
            if residual > tol:
                raise BlockNotHermitian(f"block n={g.index} is not Hermitian ({residual:.2e})")
            w, u = _phase_fixed_eigh(block)
            if np.min(np.abs(w)) < tol * scale:
                raise NotAMetric(f"block n={g.index} is singular (|x| = {np.min(np.abs(w)):.2e})")
            alpha[np.ix_(slots, slots)] = np.diag(np.sqrt(np.abs(w))) @ u.conj().T
            for a, value in enumerate(w):
                signs[(g.index, a)] = 1 if value > 0 else -1
        elif g.label is SpectralLabel.UPPER:
            partner = list(system.groups[g.partner].slots)
            y = x[np.ix_(slots, partner)]
            if min_singular_value(y) < tol * scale:
                raise NotAMetric(f"pair block n={g.index} is singular")
            alpha[np.ix_(slots, slots)] = np.eye(len(slots))
            alpha[np.ix_(partner, partner)] = y

    a_matrix = psi @ alpha @ system.phi.conj().T
    logger.debug(
        "decompose_eta: %d real blocks, %d pairs, leakage %.2e",
        sum(1 for g in system.groups if g.label is SpectralLabel.REAL),
        len(system.pair_slots),
        leakage,
    )
    return a_matrix, SignSequence(signs)
