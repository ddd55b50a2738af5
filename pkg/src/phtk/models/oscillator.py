"""Truncated oscillator-basis models of H_ν = p² + x²(ix)^ν on the real line.

Units: ħ = 1, m = 1/2, so the ν = 0 Hamiltonian p² + x² is diag(2n+1) in
the Hermite-function basis. Parity is diag((−1)ⁿ) and time reversal is plain
complex conjugation because the basis functions are real.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
from numpy.polynomial.hermite import hermgauss

from phtk.config import ToleranceProfile
from phtk.errors import (
    ComplexSpectrum,
    NuOutOfRange,
    PTPhaseNotFound,
    QuadratureTooCoarse,
    RangeError,
)
from phtk.theory.antilinear import AntilinearOperator, tau_sigma
from phtk.theory.checks import CheckReport, as_profile
from phtk.theory.linalg import identity_residual, max_abs, relative
from phtk.theory.metrics import SignSequence, eta_plus, eta_sigma, lambda_operator
from phtk.theory.spectra import BiorthonormalSystem, SpectralLabel
from phtk.theory.symmetries import S_sigma, canonical_X

logger = logging.getLogger(__name__)

MIN_BASIS = 2


@dataclass(frozen=True, eq=False)
class OscillatorModel:
    """Hamiltonian matrix with the parity and time-reversal operators of its basis."""

    N: int
    nu: float
    quadrature_nodes: int
    H: np.ndarray
    P: np.ndarray
    T: AntilinearOperator
    metadata: dict = field(default_factory=dict)

    def pt_operator(self) -> AntilinearOperator:
        """PT as an antilinear operator, matrix P·M_T."""
        return AntilinearOperator(self.P @ self.T.matrix)


def _check_basis(n: int) -> None:
    if n < MIN_BASIS:
        raise RangeError(f"basis size must be at least {MIN_BASIS}, got {n}")


def parity_matrix(n: int) -> np.ndarray:
    return np.diag((-1.0) ** np.arange(n)).astype(complex)


def kinetic_matrix(n: int) -> np.ndarray:
    """p² in the Hermite basis: (2k+1)/2 on the diagonal, −√((k+1)(k+2))/2 at ±2."""
    k = np.arange(n)
    p2 = np.diag((2 * k + 1) / 2.0)
    off = -np.sqrt((k[:-2] + 1) * (k[:-2] + 2)) / 2.0
    p2[k[:-2] + 2, k[:-2]] = off
    p2[k[:-2], k[:-2] + 2] = off
    return p2.astype(complex)


def _scaled_hermite(n: int, x: np.ndarray) -> np.ndarray:
    """Hermite functions without the Gaussian factor, rows k = 0..n−1.

    ĥ₀ = π^(−1/4), ĥ₁ = √2·x·ĥ₀, ĥ_{k+1} = √(2/(k+1))·x·ĥ_k − √(k/(k+1))·ĥ_{k−1}.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty((n, x.size))
    out[0] = np.pi ** -0.25
    if n > 1:
        out[1] = np.sqrt(2.0) * x * out[0]
    for k in range(1, n - 1):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * x * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def hermite_functions(n: int, x: np.ndarray) -> np.ndarray:
    """Normalized Hermite functions h_0..h_{n−1} at the points ``x`` (shape (n, len(x)))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return _scaled_hermite(n, x) * np.exp(-(x ** 2) / 2.0)


def potential(x: np.ndarray, nu: float) -> np.ndarray:
    """x²(ix)^ν on the real line, principal branch: |x|^(ν+2)·e^(iπν·sign(x)/2)."""
    x = np.asarray(x, dtype=float)
    angle = np.pi * nu / 2.0
    return np.abs(x) ** (nu + 2) * (np.cos(angle) + 1j * np.sign(x) * np.sin(angle))


def _symmetric_nodes(m: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = hermgauss(m)
    return (x - x[::-1]) / 2.0, (w + w[::-1]) / 2.0


def harmonic_oscillator(n: int) -> OscillatorModel:
    """Exact ν = 0 model, H = diag(1, 3, …, 2n−1)."""
    _check_basis(n)
    h = np.diag(2.0 * np.arange(n) + 1.0).astype(complex)
    return OscillatorModel(n, 0.0, 0, h, parity_matrix(n), AntilinearOperator(np.eye(n)))


def bender_hamiltonian(nu: float, n: int, m: int | None = None) -> OscillatorModel:
    """Assemble H_ν = p² + V in the first ``n`` Hermite functions.

    V_kl = Σ_j w_j ĥ_k(x_j) V(x_j) ĥ_l(x_j) over ``m`` Gauss–Hermite nodes
    (default 2n), symmetrized so that P·conj(H)·P = H holds to rounding.

    Raises:
        NuOutOfRange: ν outside [0, 2).
        QuadratureTooCoarse: m < 2n.
    """
    if not (0.0 <= nu < 2.0):
        raise NuOutOfRange(f"nu must lie in [0, 2), got {nu}")
    _check_basis(n)
    m = 2 * n if m is None else m
    if m < 2 * n:
        raise QuadratureTooCoarse(f"need at least {2 * n} quadrature nodes for basis {n}, got {m}")

    start = time.perf_counter()
    x, w = _symmetric_nodes(m)
    basis = _scaled_hermite(n, x) * np.sqrt(w)
    v = (basis * potential(x, nu)) @ basis.T
    h = kinetic_matrix(n) + v
    h = (h + h.T) / 2
    logger.debug("Assembled H_nu (nu=%.4g, N=%d, M=%d) in %.3fs", nu, n, m, time.perf_counter() - start)
    return OscillatorModel(
        n, float(nu), m, h, parity_matrix(n), AntilinearOperator(np.eye(n)),
        metadata={"potential": "x^2(ix)^nu", "branch": "principal"},
    )


# ── Physical modes ──

# |Im E| ≤ REAL_TOL·max(1, |E|) marks a truncation eigenvalue as real
REAL_TOL = 1e-6


def physical_eigenvalues(values: np.ndarray, tol: float = REAL_TOL) -> tuple[np.ndarray, int]:
    """Real eigenvalues in ascending order, and how many nonreal ones were dropped.

    Truncation produces spurious complex pairs far from the physical
    spectrum; they are counted but never ranked among the modes.
    """
    values = np.asarray(values, dtype=complex)
    real = np.abs(values.imag) <= tol * np.maximum(1.0, np.abs(values))
    kept = values[real]
    return kept[np.argsort(kept.real, kind="stable")], int(np.sum(~real))


def mode_signs(system: BiorthonormalSystem) -> SignSequence:
    """(−1)ⁿ with n counting real modes only, lowest first."""
    return SignSequence.from_list(system, [(-1) ** n for n in range(len(system.real_slots))])


def _bilinear_weights(system: BiorthonormalSystem) -> np.ndarray:
    """ψᵀψ per column after PT normalization: (−1)ⁿ on real modes, 1 on pair slots."""
    w = np.ones(system.dim)
    real = system.real_slots
    w[real] = (-1.0) ** np.arange(len(real))
    return w


# ── PT normalization ──


def _pt_factor(pt: AntilinearOperator, v: np.ndarray, tol: float) -> complex:
    image = pt(v)
    overlap = np.vdot(v, image)
    cosine = abs(overlap) / (np.linalg.norm(v) * np.linalg.norm(image))
    if cosine < 1 - tol:
        raise PTPhaseNotFound(f"eigenvector is not PT-invariant up to a phase (cosine {cosine:.6f})")
    return complex(overlap / np.vdot(v, v))


def _normalize_real(pt: AntilinearOperator, v: np.ndarray, n: int, tol: float) -> tuple[np.ndarray, float]:
    c = _pt_factor(pt, v, tol)
    v = v * np.exp(0.5j * np.angle(c))
    q = complex(v @ v)
    if abs(q) < tol:
        raise PTPhaseNotFound(f"PT norm of mode n={n} vanishes")
    return v / np.sqrt(abs(q)), (1.0 if q.real > 0 else -1.0)


def pt_normalize(
    system: BiorthonormalSystem,
    model: OscillatorModel,
    tol: float = 1e-8,
    strict_modes: int | None = None,
) -> BiorthonormalSystem:
    """Rescale eigenvectors so that PTψ = ψ and ψᵀψ = sₙ ∈ {±1}.

    Real modes are numbered n = 0, 1, … in ascending order, skipping
    conjugate pairs. They take the phase e^(i·arg(c)/2), where PTv = c·v,
    and the real scale giving ψᵀψ = ±1; duals are φₙ = sₙ·conj(ψₙ) with the
    observed sₙ. Conjugate-pair modes get ψ₊ᵀψ₊ = 1, ψ₋ = PTψ₊ and
    φ = conj(ψ).

    With ``strict_modes`` set, only real modes n < strict_modes must
    normalize. Higher modes and pairs whose norm vanishes (near an
    exceptional point of the truncation) keep their input columns and are
    logged; the result stays biorthonormal.

    Raises:
        PTPhaseNotFound: a degenerate group, or a strictly normalized vector
            that is not PT-invariant up to a phase or has a vanishing norm.
    """
    pt = model.pt_operator()
    psi = system.psi.copy()
    phi = system.phi.copy()
    mismatched: list[int] = []
    skipped: list[str] = []

    def lenient(n: int | None) -> bool:
        return strict_modes is not None and (n is None or n >= strict_modes)

    n = 0
    for g in system.groups:
        if g.multiplicity > 1:
            raise PTPhaseNotFound(f"eigenvalue {g.value} is {g.multiplicity}-fold degenerate")
        k = g.slots[0]
        if g.label is SpectralLabel.REAL:
            try:
                v, s = _normalize_real(pt, psi[:, k], n, tol)
            except PTPhaseNotFound as e:
                if not lenient(n):
                    raise
                skipped.append(f"n={n} ({e})")
            else:
                psi[:, k] = v
                phi[:, k] = s * v.conj()
                if s != (-1) ** n:
                    mismatched.append(n)
            n += 1
        elif g.label is SpectralLabel.UPPER:
            if g.partner is None:
                raise ComplexSpectrum(f"eigenvalue {g.value} has no conjugate partner")
            v = psi[:, k]
            q = complex(v @ v)
            if abs(q) < tol:
                if not lenient(None):
                    raise PTPhaseNotFound(f"bilinear norm of pair {g.value} vanishes")
                skipped.append(f"pair {g.value:.6g}")
                continue
            v = v / np.sqrt(q)
            partner = system.groups[g.partner].slots[0]
            psi[:, k] = v
            psi[:, partner] = pt(v)
            phi[:, k] = v.conj()
            phi[:, partner] = psi[:, partner].conj()
        elif g.partner is None:
            raise ComplexSpectrum(f"eigenvalue {g.value} has no conjugate partner")

    if mismatched:
        logger.warning(
            "PT norm sign differs from (-1)^n for %d mode(s), first at n=%d",
            len(mismatched), mismatched[0],
        )
    if skipped:
        logger.warning("Left %d near-exceptional mode(s) unnormalized: %s", len(skipped), ", ".join(skipped))
    residual = identity_residual(phi.conj().T @ psi)
    logger.debug("pt_normalize: biorthonormality residual %.2e", residual)
    return BiorthonormalSystem(system.hamiltonian, system.groups, psi, phi, system.tol, system.condition)


# ── Truncated-basis verification ──


def verify_section4(
    model: OscillatorModel,
    system: BiorthonormalSystem,
    tol: float | ToleranceProfile = 1e-6,
    modes: int | None = None,
) -> CheckReport:
    """Check the PT-model identities on the lowest ``modes`` real modes.

    Defaults to ⌊N/4⌋ modes; higher modes are dominated by truncation error
    and nonreal truncation pairs are never counted as modes.
    Every identity is evaluated as an operator equation applied to the
    low-mode columns Ψ_k. The PT-invariance check comes first so that an
    unnormalized system is flagged at the top of the report.
    """
    profile = as_profile(tol)
    report = CheckReport(profile)
    real = system.real_slots
    k = max(1, model.N // 4) if modes is None else modes
    k = min(k, len(real))
    if k == 0:
        raise ComplexSpectrum("truncated spectrum has no real modes to check")
    low = real[:k]
    d = (-1.0) ** np.arange(k)

    psi, phi = system.psi, system.phi
    pk, fk = psi[:, low], phi[:, low]
    p = model.P
    pt = model.pt_operator()
    t = model.T

    def cols(a: np.ndarray) -> float:
        return relative(a, max_abs(pk))

    pt_k = pt.matrix @ pk.conj()
    report.measure("pt=", cols(pt_k - pk))
    report.measure("sigma=", max_abs(np.einsum("ij,ij->j", pk, pk) - d))
    pt_gram = pt_k.T @ pk
    report.measure("ortho-1", max_abs(pt_gram - np.diag(d)))
    report.measure("eq0", max_abs(pt_gram - pk.conj().T @ p @ pk))
    report.measure("bi-ortho", identity_residual(fk.conj().T @ pk))
    report.measure("eq01", cols(fk - (p @ pk) * d))
    g_psi = pk.conj().T @ pk
    g_phi = fk.conj().T @ fk
    report.measure("eq02", relative(g_psi - g_psi.T, max_abs(g_psi)))
    report.measure("eq03", relative(g_phi - np.outer(d, d) * g_psi, max_abs(g_psi)))

    alt = mode_signs(system)
    eta_alt = eta_sigma(system, alt).matrix
    report.measure("P-ph", cols(p @ pk - eta_alt @ pk))
    tau_alt = tau_sigma(system, alt)
    report.measure("T=", cols(t.matrix @ pk.conj() - tau_alt.matrix @ pk.conj()))
    x_plus = canonical_X(system)
    report.measure("PT=", cols(pt_k - x_plus.matrix @ pk.conj()))

    eta = eta_plus(system).matrix
    lam = lambda_operator(system)
    report.measure("eta-inv", cols(lam @ (eta @ pk) - pk))
    report.measure("C", cols(lam @ (p @ pk) - pk * d))
    report.measure("C2", cols(psi @ (psi.T @ pk) - pk * d))
    c = S_sigma(system, alt)
    report.measure("C=def", cols(c @ pk - lam @ (p @ pk)))

    x_alt = canonical_X(system, alt)
    cpt_k = x_alt.matrix @ pk.conj()
    report.measure("eq05", cols(t.matrix @ (eta @ pk).conj() - cpt_k))
    eta_gram = pk.conj().T @ eta @ pk
    cpt_gram = cpt_k.T @ pk
    report.measure("eq06", max_abs(cpt_gram - eta_gram))
    report.measure("ortho-cpt", identity_residual(eta_gram))

    all_d = _bilinear_weights(system)
    report.measure("comp1", cols((psi * all_d) @ (psi.T @ pk) - pk))
    report.measure("zz1", cols((phi @ (phi.conj().T @ pk)) - psi.conj() @ (psi.T @ pk)))
    report.measure("zz2", cols(p @ ((psi * all_d) @ (psi.T @ pk)) - p @ pk))

    logger.info(
        "PT-model identity checks on %d/%d modes: %d failures", k, system.dim, len(report.failures()),
    )
    return report


# ── Position representation and convergence ──

KERNELS = ("comp1", "C", "eta", "P")


def position_kernel(
    model: OscillatorModel,
    system: BiorthonormalSystem,
    x: np.ndarray,
    y: np.ndarray,
    kind: str,
    modes: int | None = None,
) -> np.ndarray:
    """Evaluate a mode-sum kernel K(x_i, y_j) at truncation.

    kinds: ``comp1`` Σψₙ(x)φₙ(y)*, which is Σ(−1)ⁿψₙ(x)ψₙ(y) on PT-normalized
    modes, ``C`` Σψₙ(x)ψₙ(y), ``eta`` Σψₙ(x)*ψₙ(y), ``P`` Σ(−1)ⁿφₙ(x)φₙ(y)*.
    ``modes`` keeps the lowest real modes only; the default sums every column.
    """
    if kind not in KERNELS:
        raise ValueError(f"unknown kernel {kind!r} (expected one of {', '.join(KERNELS)})")
    cols = list(range(system.dim)) if modes is None else system.real_slots[:modes]
    hx = hermite_functions(model.N, x)
    hy = hermite_functions(model.N, y)
    psi_x = system.psi[:, cols].T @ hx
    psi_y = system.psi[:, cols].T @ hy
    if kind == "C":
        return psi_x.T @ psi_y
    if kind == "eta":
        return psi_x.conj().T @ psi_y
    phi_y = system.phi[:, cols].T @ hy
    if kind == "comp1":
        return psi_x.T @ phi_y.conj()
    signs = _bilinear_weights(system)[cols]
    phi_x = system.phi[:, cols].T @ hx
    return (phi_x * signs[:, None]).T @ phi_y.conj()


@dataclass
class ConvergenceStudy:
    nu: float
    sizes: list[int]
    eigenvalues: list[np.ndarray]
    differences: list[float]

    def converged(self, tol: float) -> bool:
        return bool(self.differences) and self.differences[-1] <= tol


def lowest_eigenvalues(model: OscillatorModel, k: int, tol: float = REAL_TOL) -> np.ndarray:
    """Lowest ``k`` real eigenvalues; nonreal truncation pairs are skipped."""
    values, nonreal = physical_eigenvalues(scipy.linalg.eigvals(model.H), tol)
    if nonreal:
        logger.debug("nu=%.4g N=%d: skipped %d nonreal eigenvalue(s)", model.nu, model.N, nonreal)
    return values[:k]


def convergence_study(
    nu: float,
    sizes: Sequence[int],
    k: int = 4,
    on_progress: Callable[[dict], None] | None = None,
) -> ConvergenceStudy:
    """Lowest-k real eigenvalues for increasing basis sizes and their successive max differences."""
    sizes = sorted(sizes)
    eigenvalues: list[np.ndarray] = []
    differences: list[float] = []
    for i, n in enumerate(sizes):
        values = lowest_eigenvalues(bender_hamiltonian(nu, n), k)
        if eigenvalues:
            m = min(len(values), len(eigenvalues[-1]))
            differences.append(float(np.max(np.abs(values[:m] - eigenvalues[-1][:m]), initial=0.0)))
        eigenvalues.append(values)
        if on_progress:
            on_progress({"step": "convergence", "current": i + 1, "total": len(sizes), "N": n})
        logger.debug("nu=%.4g N=%d lowest=%s", nu, n, np.round(values, 8))
    return ConvergenceStudy(float(nu), list(sizes), eigenvalues, differences)
