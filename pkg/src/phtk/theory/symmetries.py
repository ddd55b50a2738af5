"""Canonical symmetry generators and the involution conditions.

Every check comes in two flavours: a ``*_residuals`` function returning the
raw numbers used by reports, and a boolean predicate comparing them with a
tolerance.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import numpy as np

from phtk.errors import (
    NotASymmetry,
    PreconditionUnmet,
    RangeError,
    UnpairedSpectrum,
    UnrecognizedAction,
)
from phtk.theory.antilinear import AntilinearOperator, tau_plus, tau_sigma
from phtk.theory.linalg import (
    as_square,
    check_same_shape,
    identity_residual,
    max_abs,
    min_singular_value,
    relative,
)
from phtk.theory.metrics import (
    MetricOperator,
    SignSequence,
    eta_plus_inverse,
    eta_sigma,
    eta_sigma_inverse,
)
from phtk.theory.spectra import BiorthonormalSystem, require_paired

logger = logging.getLogger(__name__)

# Largest real-slot count for which every sign sequence is enumerated
MAX_ENUMERATED_SLOTS = 10


# ── Canonical generators ──


def canonical_X(system: BiorthonormalSystem, sigma: SignSequence | None = None) -> AntilinearOperator:
    """X_σ = η_σ⁻¹∘τ₊ with matrix Σσψφᵀ (real) + Σ(ψ₊φ₋ᵀ + ψ₋φ₊ᵀ) (pairs)."""
    require_paired(system)
    w = (sigma or SignSequence.uniform(system)).weights(system)
    j = system.coefficients(w, pairs="swap")
    return AntilinearOperator(system.psi @ j @ system.phi.T)


def canonical_X_route_residual(system: BiorthonormalSystem, sigma: SignSequence | None = None) -> float:
    """Disagreement between the η_σ⁻¹∘τ₊ and η₊⁻¹∘τ_σ constructions."""
    first = eta_sigma_inverse(system, sigma).matrix @ tau_plus(system).matrix
    second = eta_plus_inverse(system).matrix @ tau_sigma(system, sigma).matrix
    return relative(first - second, max_abs(first))


def S_sigma(system: BiorthonormalSystem, sigma: SignSequence | None = None) -> np.ndarray:
    """S_σ = η₊⁻¹η_σ = Σσψφ† on real slots, identity on conjugate pairs."""
    require_paired(system)
    w = (sigma or SignSequence.uniform(system)).weights(system)
    d = system.coefficients(w, pairs="diagonal")
    return system.psi @ d @ system.phi.conj().T


def symmetry_generator(eta: MetricOperator | np.ndarray, tau: AntilinearOperator) -> AntilinearOperator:
    """𝒳 = η⁻¹∘τ for a metric/antilinear-metric pair of the same H."""
    m = eta.matrix if isinstance(eta, MetricOperator) else as_square(eta, "eta")
    check_same_shape(m, tau.matrix)
    return AntilinearOperator(np.linalg.solve(m, tau.matrix))


def is_antilinear_symmetry(
    hamiltonian: np.ndarray, op: AntilinearOperator, tol: float = 1e-10,
) -> tuple[bool, float]:
    """Check X∘H = H∘X, i.e. M·conj(H) = H·M."""
    h = as_square(hamiltonian, "H")
    check_same_shape(h, op.matrix)
    m = op.matrix
    residual = max_abs(m @ h.conj() - h @ m) / max(1.0, max_abs(h) * max_abs(m))
    return residual <= tol, residual


def has_antilinear_involution_symmetry(system: BiorthonormalSystem, tol: float = 1e-10) -> bool:
    """True iff the canonical X₊ is an antilinear involution commuting with H.

    Unpaired spectra admit no such symmetry and give False.
    """
    try:
        x = canonical_X(system)
    except UnpairedSpectrum:
        return False
    commutes, _ = is_antilinear_symmetry(system.hamiltonian, x, 10 * tol)
    return commutes and is_involution_antilinear(x, 10 * tol)


def sign_sequences(system: BiorthonormalSystem) -> Iterator[SignSequence]:
    """Every sign sequence on the real slots, all-plus first."""
    real = system.real_slots
    if len(real) > MAX_ENUMERATED_SLOTS:
        raise RangeError(
            f"{len(real)} real slots; enumeration is limited to {MAX_ENUMERATED_SLOTS}"
        )
    keys = [system.slot_key(s) for s in real]
    for combo in itertools.product((1, -1), repeat=len(keys)):
        yield SignSequence(dict(zip(keys, combo)))


# ── Eigenvector action ──


class ActionKind(str, Enum):
    EXACT = "Exact"
    SWAP = "Swap"


@dataclass(frozen=True)
class SlotAction:
    column: int
    kind: ActionKind
    factor: complex
    target: int

    @property
    def sign(self) -> int:
        return 1 if self.factor.real >= 0 else -1


def _proportional(v: np.ndarray, target: np.ndarray, tol: float) -> complex | None:
    nv, nt = np.linalg.norm(v), np.linalg.norm(target)
    if nv == 0 or nt == 0:
        return None
    overlap = np.vdot(target, v)
    if abs(overlap) / (nv * nt) >= 1 - 10 * tol:
        return complex(overlap / np.vdot(target, target))
    return None


def symmetry_action(op: AntilinearOperator, system: BiorthonormalSystem, tol: float = 1e-10) -> list[SlotAction]:
    """Classify X on each eigenvector as Exact (X ψ ∝ ψ) or Swap (X ψ ∝ partner).

    Raises:
        NotASymmetry: X does not commute with H.
        UnrecognizedAction: X ψ is proportional to neither.
    """
    commutes, residual = is_antilinear_symmetry(system.hamiltonian, op, 10 * tol)
    if not commutes:
        raise NotASymmetry(f"operator does not commute with H (residual {residual:.2e})")

    partner = {}
    for plus, minus in system.pair_slots:
        partner[plus], partner[minus] = minus, plus

    images = op.matrix @ system.psi.conj()
    actions = []
    for k in range(system.dim):
        image = images[:, k]
        factor = _proportional(image, system.psi[:, k], tol)
        if factor is not None:
            actions.append(SlotAction(k, ActionKind.EXACT, factor, k))
            continue
        if k in partner:
            factor = _proportional(image, system.psi[:, partner[k]], tol)
            if factor is not None:
                actions.append(SlotAction(k, ActionKind.SWAP, factor, partner[k]))
                continue
        raise UnrecognizedAction(f"image of column {k} matches neither the column nor its partner")
    return actions


# ── Involutions ──


def is_involution_linear(s: np.ndarray, tol: float = 1e-10) -> bool:
    s = as_square(s, "S")
    return identity_residual(s @ s) <= tol


def is_involution_antilinear(op: AntilinearOperator, tol: float = 1e-10) -> bool:
    return op.involution_residual() <= tol


def _slot_classes(system: BiorthonormalSystem) -> np.ndarray:
    is_real = np.zeros(system.dim, dtype=bool)
    is_real[system.real_slots] = True
    return is_real


def _split_by_class(diff: np.ndarray, system: BiorthonormalSystem, scale: float, prefix: str) -> dict[str, float]:
    """Max residual over real–real, real–pair and pair–pair entries."""
    is_real = _slot_classes(system)
    rr = np.outer(is_real, is_real)
    pp = np.outer(~is_real, ~is_real)
    rp = ~(rr | pp)
    out = {}
    for suffix, mask in (("1", rr), ("2", rp), ("3", pp)):
        out[f"{prefix}{suffix}"] = max_abs(diff[mask]) / scale if mask.any() else 0.0
    return out


def tau_condition_residuals(system: BiorthonormalSystem, sigma: SignSequence | None = None) -> dict[str, float]:
    """Residuals of ⟨φ_i|φ_j⟩ = d_i d_j ⟨ψ_j|ψ_i⟩ keyed c3.1 / c3.2 / c3.3.

    d is σ on real slots and 1 on nonreal ones; the identities hold iff
    τ_σ is an involution.
    """
    w = (sigma or SignSequence.uniform(system)).weights(system)
    d = np.diag(system.coefficients(w, pairs="diagonal"))
    g_phi = system.phi.conj().T @ system.phi
    g_psi = system.psi.conj().T @ system.psi
    diff = g_phi - np.outer(d, d) * g_psi.T
    scale = max(1.0, max_abs(g_phi), max_abs(g_psi))
    return _split_by_class(diff, system, scale, "c3.")


def eta_condition_residuals(system: BiorthonormalSystem, sigma: SignSequence | None = None) -> dict[str, float]:
    """Residuals of Φ†Φ = J·Ψ†Ψ·J keyed inv-eta-condi-1/2/3.

    J is the η_σ coefficient matrix; the identities hold iff η_σ is an
    involution.
    """
    require_paired(system)
    w = (sigma or SignSequence.uniform(system)).weights(system)
    j = system.coefficients(w, pairs="swap")
    g_phi = system.phi.conj().T @ system.phi
    g_psi = system.psi.conj().T @ system.psi
    diff = g_phi - j @ g_psi @ j
    scale = max(1.0, max_abs(g_phi), max_abs(g_psi))
    return _split_by_class(diff, system, scale, "inv-eta-condi-")


def involution_conditions_tau(system: BiorthonormalSystem, sigma: SignSequence | None = None, tol: float = 1e-10) -> bool:
    return max(tau_condition_residuals(system, sigma).values()) <= tol


def involution_conditions_eta(system: BiorthonormalSystem, sigma: SignSequence | None = None, tol: float = 1e-10) -> bool:
    return max(eta_condition_residuals(system, sigma).values()) <= tol


def commu_residual(system: BiorthonormalSystem, sigma: SignSequence | None = None) -> float:
    """‖τ_σ∘η_σ − η_σ∘τ_σ‖, i.e. M·conj(η) − η·M, relative to ‖M‖‖η‖."""
    m = tau_sigma(system, sigma).matrix
    eta = eta_sigma(system, sigma).matrix
    return relative(m @ eta.conj() - eta @ m, max_abs(m), max_abs(eta))


def check_commu(system: BiorthonormalSystem, sigma: SignSequence | None = None, tol: float = 1e-10) -> bool:
    """[τ_σ, η_σ] = 0, defined when both τ_σ and η_σ are involutions.

    Raises PreconditionUnmet otherwise.
    """
    if not involution_conditions_tau(system, sigma, tol):
        raise PreconditionUnmet("tau_sigma is not an involution")
    if not involution_conditions_eta(system, sigma, tol):
        raise PreconditionUnmet("eta_sigma is not an involution")
    return commu_residual(system, sigma) <= tol


def corollary3_residual(system: BiorthonormalSystem, a: np.ndarray, tol: float = 1e-10) -> float:
    """Residual of G·Gᵀ = I with G = Ψ†(AA†)⁻¹Ψ.

    Zero iff A†∘τ₊∘A is an antilinear involution.

    Raises NotASymmetry when A is singular or does not commute with H.
    """
    a = as_square(a, "A")
    h = system.hamiltonian
    check_same_shape(a, h)
    if min_singular_value(a) <= tol * max(1.0, max_abs(a)):
        raise NotASymmetry("A is singular")
    commutator = relative(a @ h - h @ a, max_abs(a), max_abs(h))
    if commutator > 10 * tol:
        raise NotASymmetry(f"A does not commute with H (residual {commutator:.2e})")
    psi = system.psi
    g = psi.conj().T @ np.linalg.solve(a @ a.conj().T, psi)
    return relative(g @ g.T - np.eye(len(g)), max_abs(g) ** 2)


def check_corollary3(system: BiorthonormalSystem, a: np.ndarray, tol: float = 1e-10) -> bool:
    return corollary3_residual(system, a, tol) <= 10 * tol


def exact_symmetry_classes(system: BiorthonormalSystem, tol: float = 1e-10) -> dict[str, int]:
    """Count Exact and Swap slots of the canonical X₊ (all Exact iff real spectrum)."""
    actions = symmetry_action(canonical_X(system), system, tol)
    counts = {ActionKind.EXACT.value: 0, ActionKind.SWAP.value: 0}
    for action in actions:
        counts[action.kind.value] += 1
    logger.debug(
        "X+ action: %d exact, %d swap (%d real slots)",
        counts["Exact"], counts["Swap"], len(system.real_slots),
    )
    return counts
