"""Biorthonormal eigensystems and spectral classification.

A diagonalizable H is decomposed as H = Ψ·diag(E)·Φ†, with the columns of Ψ
the eigenvectors |ψ_n,a⟩ and the columns of Φ = (Ψ⁻¹)† the dual vectors
|φ_n,a⟩ (eigenvectors of H†). Every other theory module builds its operators
as Ψ·J·Φ†, Φ·J·Φ† and so on, from a coefficient matrix J in this slot basis.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg

from phtk.errors import InvalidEigenbasis, NotDiagonalizable, UnpairedSpectrum
from phtk.theory.linalg import as_square, identity_residual, max_abs, relative

logger = logging.getLogger(__name__)

# Above this condition number the eigenvector matrix is treated as defective
MAX_CONDITION = 1.0 / (100.0 * np.finfo(float).eps)

# Components within this relative distance of the largest count as "largest"
_PHASE_TIE = 1e-8


class SpectralLabel(str, Enum):
    """Class of an eigenvalue group: real, or member of a conjugate pair."""

    REAL = "nu0"
    UPPER = "nu+"
    LOWER = "nu-"


class SpectralKind(str, Enum):
    REAL = "Real"
    CONJUGATE_PAIRED = "ConjugatePaired"
    UNPAIRED = "Unpaired"


@dataclass(frozen=True)
class SpectralClass:
    kind: SpectralKind
    witness: complex | None = None


@dataclass(frozen=True)
class EigenGroup:
    """One eigenvalue, its degeneracy slots and its conjugate partner (if any)."""

    index: int
    value: complex
    slots: tuple[int, ...]
    label: SpectralLabel
    partner: int | None = None
    spread: float = 0.0

    @property
    def multiplicity(self) -> int:
        return len(self.slots)


@dataclass(frozen=True, eq=False)
class BiorthonormalSystem:
    """Eigenvectors ψ (columns of ``psi``) and duals φ (columns of ``phi``).

    Columns are ordered group by group; ``groups[n].slots`` lists the columns
    of the n-th eigenvalue in ascending (real part, imaginary part) order.
    """

    hamiltonian: np.ndarray
    groups: tuple[EigenGroup, ...]
    psi: np.ndarray
    phi: np.ndarray
    tol: float
    condition: float

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([g.value for g in self.groups], dtype=complex)

    @property
    def multiplicities(self) -> list[int]:
        return [g.multiplicity for g in self.groups]

    @property
    def labels(self) -> list[SpectralLabel]:
        return [g.label for g in self.groups]

    @property
    def slot_values(self) -> np.ndarray:
        """Eigenvalue attached to each column."""
        values = np.empty(self.dim, dtype=complex)
        for g in self.groups:
            values[list(g.slots)] = g.value
        return values

    @property
    def slot_groups(self) -> np.ndarray:
        owner = np.empty(self.dim, dtype=int)
        for g in self.groups:
            owner[list(g.slots)] = g.index
        return owner

    @property
    def real_slots(self) -> list[int]:
        return [s for g in self.groups if g.label is SpectralLabel.REAL for s in g.slots]

    @property
    def pair_slots(self) -> list[tuple[int, int]]:
        """(ν₊ column, ν₋ column) for every paired degeneracy slot."""
        pairs = []
        for g in self.groups:
            if g.label is SpectralLabel.UPPER and g.partner is not None:
                partner = self.groups[g.partner]
                pairs.extend(zip(g.slots, partner.slots))
        return pairs

    @property
    def unpaired_groups(self) -> list[EigenGroup]:
        return [
            g for g in self.groups
            if g.label is not SpectralLabel.REAL and g.partner is None
        ]

    def slot_key(self, column: int) -> tuple[int, int]:
        """(group index n, degeneracy index a) of a column; a starts at 0."""
        for g in self.groups:
            if column in g.slots:
                return g.index, g.slots.index(column)
        raise IndexError(column)

    def partner_permutation(self) -> np.ndarray:
        """Column permutation swapping ν₊ ↔ ν₋ partners, fixing real slots.

        Raises UnpairedSpectrum when some nonreal slot has no partner.
        """
        if self.unpaired_groups:
            g = self.unpaired_groups[0]
            raise UnpairedSpectrum(f"eigenvalue {g.value} has no conjugate partner", g.value)
        perm = np.arange(self.dim)
        for plus, minus in self.pair_slots:
            perm[plus], perm[minus] = minus, plus
        return perm

    def coefficients(self, real_weights: np.ndarray, pairs: str) -> np.ndarray:
        """Coefficient matrix J in the slot basis.

        Real slots get ``real_weights[column]`` on the diagonal. Paired slots
        get either the cross coupling ν₊ ↔ ν₋ (``pairs="swap"``, the form of
        η₊, η_σ and the canonical symmetry generators) or a unit diagonal
        entry (``pairs="diagonal"``, the form of τ_σ and S_σ).
        """
        if pairs not in ("swap", "diagonal"):
            raise ValueError(f"pairs must be 'swap' or 'diagonal', got {pairs!r}")
        j = np.zeros((self.dim, self.dim), dtype=complex)
        real = self.real_slots
        j[real, real] = np.asarray(real_weights, dtype=complex)[real]
        if pairs == "swap":
            perm = self.partner_permutation()
            for plus, minus in self.pair_slots:
                j[plus, perm[plus]] = 1.0
                j[minus, perm[minus]] = 1.0
        else:
            nonreal = [s for g in self.groups if g.label is not SpectralLabel.REAL for s in g.slots]
            j[nonreal, nonreal] = 1.0
        return j


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def _scale(h: np.ndarray) -> float:
    return max(1.0, max_abs(h))


def _is_real(value: complex, tol: float) -> bool:
    """Relative test |Im E| ≤ tol·max(1, |E|), not an absolute |Im E| ≤ tol."""
    return abs(value.imag) <= tol * max(1.0, abs(value))


def _fix_phase(psi: np.ndarray) -> np.ndarray:
    """Unit-normalize columns; first (near-)largest component real positive."""
    out = psi / np.linalg.norm(psi, axis=0)
    for k in range(out.shape[1]):
        mags = np.abs(out[:, k])
        lead = int(np.argmax(mags >= (1.0 - _PHASE_TIE) * mags.max()))
        out[:, k] *= np.conj(out[lead, k]) / mags[lead]
    return out


def _cluster(values: np.ndarray, threshold: float) -> list[list[int]]:
    """Single-linkage clusters of eigenvalues closer than ``threshold``."""
    n = len(values)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= threshold:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)

    clusters: dict[int, list[int]] = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(i)

    def key(members: list[int]) -> tuple[float, float]:
        mean = complex(np.mean(values[members]))
        return (mean.real, mean.imag)

    ordered = sorted(clusters.values(), key=key)
    return [sorted(c, key=lambda i: (values[i].real, values[i].imag)) for c in ordered]


def _pair_groups(groups: list[EigenGroup], threshold: float) -> list[EigenGroup]:
    """Greedy nearest-conjugate matching of ν₊ groups with ν₋ groups."""
    partner: dict[int, int] = {}
    lowers = [g for g in groups if g.label is SpectralLabel.LOWER]
    for g in groups:
        if g.label is not SpectralLabel.UPPER:
            continue
        best, best_dist = None, threshold
        for low in lowers:
            if low.index in partner or low.multiplicity != g.multiplicity:
                continue
            dist = abs(g.value - np.conj(low.value))
            if dist <= best_dist:
                best, best_dist = low, dist
        if best is not None:
            partner[g.index] = best.index
            partner[best.index] = g.index

    return [
        EigenGroup(g.index, g.value, g.slots, g.label, partner.get(g.index), g.spread)
        for g in groups
    ]


def _assemble(h: np.ndarray, values: np.ndarray, psi: np.ndarray, tol: float) -> BiorthonormalSystem:
    condition = float(np.linalg.cond(psi))
    logger.debug("Eigenvector condition number %.3e (dim=%d)", condition, h.shape[0])
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise NotDiagonalizable(
            f"eigenvector matrix condition {condition:.3e} exceeds {MAX_CONDITION:.3e}",
            condition,
        )

    threshold = tol * _scale(h)
    clusters = _cluster(values, threshold)
    order = [i for members in clusters for i in members]
    psi = psi[:, order]

    groups: list[EigenGroup] = []
    column = 0
    for n, members in enumerate(clusters):
        raw = values[members]
        value = complex(np.mean(raw))
        spread = float(np.max(np.abs(raw - value))) if len(raw) > 1 else 0.0
        if spread > 0.0:
            logger.debug("Degenerate cluster n=%d (d=%d, spread %.2e)", n, len(raw), spread)
        if _is_real(value, tol):
            label = SpectralLabel.REAL
            value = complex(value.real, 0.0)
        elif value.imag > 0:
            label = SpectralLabel.UPPER
        else:
            label = SpectralLabel.LOWER
        slots = tuple(range(column, column + len(members)))
        groups.append(EigenGroup(n, value, slots, label, None, spread))
        column += len(members)

    groups = _pair_groups(groups, threshold)
    phi = np.linalg.inv(psi).conj().T
    return BiorthonormalSystem(h, tuple(groups), psi, phi, tol, condition)


def eig_biorthonormal(hamiltonian: np.ndarray, tol: float = 1e-10) -> BiorthonormalSystem:
    """Eigen-decompose H into a complete biorthonormal system.

    Eigenvectors are unit-normalized with their first largest component real
    and positive before the duals Φ = (Ψ⁻¹)† are formed.

    Raises:
        NonSquare: H is not a finite square matrix.
        NotDiagonalizable: cond(Ψ) exceeds MAX_CONDITION.
    """
    h = as_square(hamiltonian, "H")
    values, vectors = scipy.linalg.eig(h)
    return _assemble(h, values.astype(complex), _fix_phase(vectors.astype(complex)), tol)


def biorthonormal_from_columns(
    hamiltonian: np.ndarray, psi: np.ndarray, tol: float = 1e-10,
) -> BiorthonormalSystem:
    """Build the system from caller-chosen eigenvector columns (kept unscaled).

    The biorthonormal system is unique only up to invertible symmetries of H;
    this fixes one explicitly instead of using the normalization convention
    of :func:`eig_biorthonormal`.
    """
    h = as_square(hamiltonian, "H")
    psi = as_square(psi, "psi")
    if psi.shape != h.shape:
        raise InvalidEigenbasis(f"psi shape {psi.shape} does not match H {h.shape}")
    try:
        dual = np.linalg.inv(psi)
    except np.linalg.LinAlgError as e:
        raise InvalidEigenbasis("eigenvector columns are linearly dependent") from e
    projected = dual @ h @ psi
    values = np.diag(projected).copy()
    off = relative(projected - np.diag(values), _scale(h))
    if off > 10 * tol:
        raise InvalidEigenbasis(f"columns are not eigenvectors of H (residual {off:.2e})")
    return _assemble(h, values, psi.copy(), tol)


# ---------------------------------------------------------------------------
# Classification and residuals
# ---------------------------------------------------------------------------


def classify_spectrum(system: BiorthonormalSystem, tol: float | None = None) -> SpectralClass:
    """Real / ConjugatePaired / Unpaired classification of the spectrum."""
    tol = system.tol if tol is None else tol
    if all(_is_real(g.value, tol) for g in system.groups):
        return SpectralClass(SpectralKind.REAL)
    unpaired = [g for g in system.unpaired_groups if not _is_real(g.value, tol)]
    if unpaired:
        return SpectralClass(SpectralKind.UNPAIRED, unpaired[0].value)
    return SpectralClass(SpectralKind.CONJUGATE_PAIRED)


def require_paired(system: BiorthonormalSystem) -> SpectralClass:
    """Return the spectral class, raising UnpairedSpectrum for unpaired spectra."""
    cls = classify_spectrum(system)
    if cls.kind is SpectralKind.UNPAIRED:
        raise UnpairedSpectrum(
            f"eigenvalue {cls.witness} has no conjugate partner; H is not pseudo-Hermitian",
            cls.witness,
        )
    return cls


def biorthonormal_residuals(system: BiorthonormalSystem) -> dict[str, float]:
    """Residuals of Φ†Ψ = I, ΨΦ† = I and H = Σ E ψφ†."""
    psi, phi = system.psi, system.phi
    reconstructed = (psi * system.slot_values) @ phi.conj().T
    return {
        "bi-ortho": identity_residual(phi.conj().T @ psi),
        "complete": identity_residual(psi @ phi.conj().T),
        "sr": relative(reconstructed - system.hamiltonian, max_abs(system.hamiltonian)),
    }
