"""Pipeline steps behind the ``analyze``, ``model``, ``sweep`` and ``verify`` commands.

Each ``cmd_*`` function does the work and returns a result object; argument
parsing, printing and exit codes live in `phtk.cli.main`.
"""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from phtk.cli.matrix_io import MatrixInput, load_input, write_bundle
from phtk.cli.report import AnalysisReport, write_report
from phtk.cli.runner import run_ordered
from phtk.config import ToleranceProfile, get_profile
from phtk.errors import (
    ComplexSpectrum,
    NotASymmetry,
    PhtkError,
    PTPhaseNotFound,
    RangeError,
    UnrecognizedAction,
)
from phtk.models.ensembles import (
    random_pseudo_hermitian,
    random_quasi_hermitian,
    random_symmetry_generator,
)
from phtk.models.oscillator import (
    OscillatorModel,
    bender_hamiltonian,
    physical_eigenvalues,
    pt_normalize,
    verify_section4,
)
from phtk.theory.antilinear import decompose_tau, is_anti_pseudo_hermitian, tau_general, tau_plus, tau_sigma
from phtk.theory.checks import CheckReport, CheckResult
from phtk.theory.linalg import max_abs, relative
from phtk.theory.metrics import SignSequence, decompose_eta, eta_general, eta_plus, eta_sigma, is_pseudo_hermitian
from phtk.theory.ptc import verify_lemma1
from phtk.theory.spectra import (
    BiorthonormalSystem,
    SpectralKind,
    SpectralLabel,
    biorthonormal_residuals,
    classify_spectrum,
    eig_biorthonormal,
)
from phtk.theory.symmetries import (
    MAX_ENUMERATED_SLOTS,
    ActionKind,
    S_sigma,
    canonical_X,
    canonical_X_route_residual,
    check_corollary3,
    commu_residual,
    corollary3_residual,
    has_antilinear_involution_symmetry,
    involution_conditions_eta,
    involution_conditions_tau,
    is_antilinear_symmetry,
    is_involution_antilinear,
    is_involution_linear,
    sign_sequences,
    symmetry_action,
)

logger = logging.getLogger(__name__)

# Clustering tolerance cap for truncated models, whose near-real conjugate
# pairs must not merge into one degenerate group
MODEL_SYSTEM_TOL = 1e-9

ENSEMBLES = ("quasi", "pseudo")
MAX_VERIFY_DIM = 16
SWEEP_LOWEST = 4


# ── analyze ──


def _spectral_checks(system: BiorthonormalSystem, profile: ToleranceProfile) -> CheckReport:
    report = CheckReport(profile)
    for tag, value in biorthonormal_residuals(system).items():
        report.measure(tag, value)
    return report


def _metric_checks(system: BiorthonormalSystem, profile: ToleranceProfile) -> CheckReport:
    report = CheckReport(profile)
    h = system.hamiltonian
    eta = eta_plus(system)
    report.measure("ph", is_pseudo_hermitian(h, eta)[1])
    report.measure("eta+-herm", relative(eta.matrix - eta.matrix.conj().T, max_abs(eta.matrix)))
    if not system.pair_slots:
        report.verdict("eta+-pos", eta.is_positive(profile.tol), note="eta+ positive definite")
    tau = tau_plus(system)
    report.measure("anti-ph", is_anti_pseudo_hermitian(h, tau)[1])
    report.measure("tau+-herm", tau.hermiticity_residual())
    report.measure("can-X", canonical_X_route_residual(system))
    return report


def _action_entries(system: BiorthonormalSystem, profile: ToleranceProfile) -> tuple[list[dict], bool, str]:
    """X₊ action per column, and whether it is Exact(+) on real slots and Swap on pairs."""
    try:
        actions = symmetry_action(canonical_X(system), system, profile.tol)
    except (NotASymmetry, UnrecognizedAction) as e:
        return [], False, str(e)
    real = set(system.real_slots)
    expected = True
    entries = []
    for a in actions:
        entries.append({
            "column": a.column,
            "kind": a.kind.value,
            "factor": [float(a.factor.real), float(a.factor.imag)],
            "target": a.target,
        })
        if a.column in real:
            expected &= a.kind is ActionKind.EXACT and a.sign == 1
        else:
            expected &= a.kind is ActionKind.SWAP
    return entries, expected, "Exact(+) on real slots, Swap on pair slots"


def _symmetry_checks(
    system: BiorthonormalSystem, profile: ToleranceProfile,
) -> tuple[CheckReport, dict[str, bool], list[dict]]:
    report = CheckReport(profile)
    h = system.hamiltonian
    alt = SignSequence.alternating(system)
    report.measure("sym", is_antilinear_symmetry(h, canonical_X(system))[1])
    report.measure("sym-alt", is_antilinear_symmetry(h, canonical_X(system, alt))[1])
    s = S_sigma(system, alt)
    report.measure("S2", relative(s @ s - np.eye(system.dim), max_abs(s) ** 2))
    report.measure("S-commute", relative(s @ h - h @ s, max_abs(s), max_abs(h)))
    threshold = profile.threshold("inv-condi")
    report.verdict(
        "+sym",
        has_antilinear_involution_symmetry(system, profile.tol),
        note="canonical X+ is an antilinear involution symmetry",
    )
    entries, ok, note = _action_entries(system, profile)
    report.verdict("action", ok, note=note)

    involutions = {
        "eta+": involution_conditions_eta(system, None, threshold),
        "tau+": involution_conditions_tau(system, None, threshold),
        "P": involution_conditions_eta(system, alt, threshold),
        "T": involution_conditions_tau(system, alt, threshold),
        "C": is_involution_linear(s, threshold),
    }
    if involutions["P"] and involutions["T"]:
        report.measure("commu", commu_residual(system, alt))
    return report, involutions, entries


def _full_space(report: CheckReport) -> CheckReport:
    """Mark whole-space checks of a truncated model as recorded, not decisive."""
    scoped = CheckReport(report.profile)
    scoped.checks = [
        c if c.conditional else replace(c, conditional=True, note=c.note or "full truncated space")
        for c in report.checks
    ]
    return scoped


def _model_checks(
    model: OscillatorModel, system: BiorthonormalSystem, profile: ToleranceProfile, analysis: AnalysisReport,
) -> None:
    try:
        normalized = pt_normalize(
            system, model, tol=profile.threshold("pt-phase"), strict_modes=max(1, model.N // 4),
        )
        report = verify_section4(model, normalized, profile)
    except (PTPhaseNotFound, ComplexSpectrum) as e:
        analysis.errors.append(f"model: {e}")
        return
    analysis.add("model", report)


def analyze_matrix(
    matrix: MatrixInput, profile: ToleranceProfile, source: dict | None = None,
) -> AnalysisReport:
    """Run the full analysis pipeline on one Hamiltonian.

    Unpaired spectra still produce a report; it carries the classification,
    the checks that need no pairing, and an error entry.
    """
    start = time.perf_counter()
    h = matrix.hamiltonian
    tol = min(profile.tol, MODEL_SYSTEM_TOL) if matrix.is_model else profile.tol
    system = eig_biorthonormal(h, tol)
    cls = classify_spectrum(system)
    analysis = AnalysisReport(
        source=source or {"path": matrix.source, "dim": int(h.shape[0])},
        profile=profile,
        spectral_class=cls.kind.value,
        eigenvalues=list(system.eigenvalues),
        multiplicities=system.multiplicities,
        labels=[label.value for label in system.labels],
    )
    # Truncated models are judged on their low modes; the rest is recorded
    scope = _full_space if matrix.is_model else (lambda r: r)
    analysis.add("spectra", scope(_spectral_checks(system, profile)))

    if cls.kind is SpectralKind.UNPAIRED:
        report = CheckReport(profile)
        report.measure("anti-ph", is_anti_pseudo_hermitian(h, tau_plus(system))[1])
        analysis.add("metrics", report)
        analysis.errors.append(f"Unpaired: eigenvalue {cls.witness} has no conjugate partner")
        logger.info("Spectrum is unpaired (witness %s); skipping metric constructions", cls.witness)
        return analysis

    analysis.add("metrics", scope(_metric_checks(system, profile)))
    symmetry_report, involutions, entries = _symmetry_checks(system, profile)
    analysis.add("symmetries", scope(symmetry_report))
    analysis.involutions = involutions
    analysis.symmetry_action = entries
    analysis.add("lemma", scope(verify_lemma1(system, profile)))
    if matrix.is_model:
        _model_checks(matrix.to_model(), system, profile, analysis)

    logger.info(
        "Analyzed dim=%d (%s): %d failures in %.3fs",
        system.dim, cls.kind.value, len(analysis.failures()), time.perf_counter() - start,
    )
    return analysis


def cmd_analyze(
    path: Path, profile_name: str | None = None, out: Path | None = None, include_metadata: bool = True,
) -> tuple[AnalysisReport, str]:
    """Analyze a matrix file or model bundle; returns the report and its JSON text.

    Model bundles name their own profile (``spectral``); an explicit
    ``profile_name`` wins.
    """
    matrix = load_input(path)
    profile = get_profile(profile_name or matrix.metadata.get("profile"))
    source = {"path": str(path), "dim": int(matrix.hamiltonian.shape[0])}
    if matrix.is_model:
        source["nu"] = matrix.metadata.get("nu")
        source["N"] = matrix.metadata.get("basis")
    report = analyze_matrix(matrix, profile, source)
    return report, write_report(report, out, include_metadata=include_metadata)


# ── model ──


def cmd_model(nu: float, basis: int, out: Path, quad: int | None = None) -> OscillatorModel:
    model = bender_hamiltonian(nu, basis, quad)
    write_bundle(out, model)
    logger.info("Wrote model bundle nu=%g N=%d M=%d to %s", nu, basis, model.quadrature_nodes, out)
    return model


# ── sweep ──


def sweep_grid(nu_min: float, nu_max: float, steps: int) -> list[float]:
    """Ascending ν grid; a single step gives [nu_min].

    Raises RangeError outside [0, 2), for a reversed range, or for fewer
    than one step.
    """
    if steps < 1:
        raise RangeError(f"steps must be at least 1, got {steps}")
    for name, value in (("nu-min", nu_min), ("nu-max", nu_max)):
        if not (0.0 <= value < 2.0):
            raise RangeError(f"{name} must lie in [0, 2), got {value}")
    if nu_min > nu_max:
        raise RangeError(f"reversed range: nu-min {nu_min} > nu-max {nu_max}")
    if steps == 1:
        return [float(nu_min)]
    return [float(v) for v in np.linspace(nu_min, nu_max, steps)]


def sweep_header(k: int) -> list[str]:
    columns = ["nu"]
    for i in range(k):
        columns += [f"E{i}_re", f"E{i}_im"]
    return columns + ["max_abs_im", "pt_residual", "nonreal_count"]


def _sweep_row(nu: float, basis: int, k: int, tol: float) -> list[float]:
    model = bender_hamiltonian(nu, basis)
    h, p = model.H, model.P
    values, nonreal = physical_eigenvalues(np.linalg.eigvals(h), tol)
    lowest = values[:k]
    row: list[float] = [nu]
    for z in lowest:
        row += [float(z.real), float(z.imag)]
    row += [float("nan")] * (2 * (k - len(lowest)))
    pt_residual = relative(p @ h.conj() @ p - h, max_abs(h))
    return row + [float(np.max(np.abs(lowest.imag), initial=0.0)), pt_residual, nonreal]


def cmd_sweep(
    nu_min: float,
    nu_max: float,
    steps: int,
    basis: int,
    out: Path | None = None,
    k: int = SWEEP_LOWEST,
    threads: int | None = None,
    on_progress: Callable[[dict], None] | None = None,
) -> str:
    """Lowest-k eigenvalues of H_ν over a ν grid as CSV text, one row per ν ascending.

    Columns: ν, then Re/Im of each of the k lowest real eigenvalues (NaN when
    the truncation has fewer), the largest |Im| among them, the PT residual
    ‖P·conj(H)·P − H‖ and the number of nonreal eigenvalues of the whole
    truncated spectrum. Nonreal truncation pairs never enter the lowest k.
    """
    grid = sweep_grid(nu_min, nu_max, steps)
    k = min(k, basis)
    tol = get_profile("spectral").tol
    start = time.perf_counter()
    rows = run_ordered(
        lambda nu: _sweep_row(nu, basis, k, tol), grid, threads, step="sweep", on_progress=on_progress,
    )
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(sweep_header(k))
    for row in rows:
        writer.writerow([format(v, ".17g") for v in row[:-1]] + [str(int(row[-1]))])
    text = buffer.getvalue()
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
    logger.info("Swept %d nu values (N=%d) in %.2fs", len(grid), basis, time.perf_counter() - start)
    return text


# ── verify ──


@dataclass(frozen=True)
class EnsembleMember:
    index: int
    seed: int
    ensemble: str
    hamiltonian: np.ndarray
    degenerate: bool = False


def draw_member(ensemble: str, dim: int, index: int, seed: int) -> EnsembleMember:
    """Seeded ensemble member.

    quasi: real spectrum in [−5, 5]; every fourth member (dim ≥ 2) has a
    doubly degenerate lowest eigenvalue.
    pseudo: at least one conjugate pair when dim ≥ 2, Im E ∈ [0.5, 3].
    """
    rng = np.random.default_rng(seed)
    if ensemble == "pseudo" and dim >= 2:
        n_pairs = int(rng.integers(1, dim // 2 + 1))
        pairs = rng.uniform(-5.0, 5.0, n_pairs) + 1j * rng.uniform(0.5, 3.0, n_pairs)
        h = random_pseudo_hermitian(dim - 2 * n_pairs, pairs, seed=seed)
        return EnsembleMember(index, seed, ensemble, h)
    spectrum = np.sort(rng.uniform(-5.0, 5.0, dim))
    degenerate = dim >= 2 and index % 4 == 3
    if degenerate:
        spectrum[1] = spectrum[0]
    h = random_quasi_hermitian(dim, spectrum, seed=seed)
    return EnsembleMember(index, seed, ensemble, h, degenerate)


def _sigma_candidates(system: BiorthonormalSystem) -> list[SignSequence]:
    if len(system.real_slots) <= MAX_ENUMERATED_SLOTS:
        return list(sign_sequences(system))
    return [SignSequence.uniform(system), SignSequence.alternating(system)]


def _involution_equivalence(system: BiorthonormalSystem, report: CheckReport) -> None:
    """Condition predicates against direct squaring for every σ; commu where both hold."""
    threshold = report.profile.threshold("inv-condi")
    disagreements = 0
    worst_commu = 0.0
    both = 0
    for sigma in _sigma_candidates(system):
        tau_ok = involution_conditions_tau(system, sigma, threshold)
        eta_ok = involution_conditions_eta(system, sigma, threshold)
        tau_direct = is_involution_antilinear(tau_sigma(system, sigma), threshold)
        eta_direct = is_involution_linear(eta_sigma(system, sigma).matrix, threshold)
        disagreements += (tau_ok != tau_direct) + (eta_ok != eta_direct)
        if tau_ok and eta_ok:
            both += 1
            worst_commu = max(worst_commu, commu_residual(system, sigma))
    report.verdict("inv-equiv", disagreements == 0, note=f"{disagreements} disagreements")
    if both:
        report.measure("commu", worst_commu, note=f"{both} sign sequences")


def _roundtrips(system: BiorthonormalSystem, member: EnsembleMember, report: CheckReport) -> None:
    h = system.hamiltonian
    a = random_symmetry_generator(system, member.seed)
    rng = np.random.default_rng(member.seed + 1)
    sigma = SignSequence.from_list(system, rng.choice([1, -1], len(system.real_slots)))

    eta = eta_general(system, a, sigma).matrix
    a_eta, sigma_eta = decompose_eta(system, eta, tol=report.profile.threshold("gen-eta"))
    rebuilt = a_eta.conj().T @ eta_sigma(system, sigma_eta).matrix @ a_eta
    report.measure("gen-eta", relative(rebuilt - eta, max_abs(eta)))
    report.measure("a4-commute", relative(a_eta @ h - h @ a_eta, max_abs(a_eta), max_abs(h)))

    tau = tau_general(system, a)
    a_tau = decompose_tau(system, tau, tol=report.profile.threshold("gen-tau"))
    rebuilt_tau = tau_general(system, a_tau).matrix
    report.measure("gen-tau", relative(rebuilt_tau - tau.matrix, max_abs(tau.matrix)))
    report.measure("b2-commute", relative(a_tau @ h - h @ a_tau, max_abs(a_tau), max_abs(h)))

    threshold = report.profile.threshold("inv-condi")
    report.measure("cor3", corollary3_residual(system, a, report.profile.tol), conditional=True)
    report.verdict(
        "cor3-agree",
        check_corollary3(system, a, report.profile.tol) == is_involution_antilinear(tau, threshold),
        note="Gram criterion agrees with squaring A†τ+A",
    )


def verify_member(member: EnsembleMember, profile: ToleranceProfile) -> dict[str, list[CheckResult]]:
    """Full invariant suite on one ensemble member, checks grouped by section."""
    system = eig_biorthonormal(member.hamiltonian, profile.tol)
    spectra = _spectral_checks(system, profile)
    cls = classify_spectrum(system)
    spectra.verdict("paired", cls.kind is not SpectralKind.UNPAIRED, note=cls.kind.value)
    sections = {"spectra": spectra.checks}
    if cls.kind is SpectralKind.UNPAIRED:
        return sections

    sections["metrics"] = _metric_checks(system, profile).checks
    sections["symmetries"] = _symmetry_checks(system, profile)[0].checks
    sections["lemma"] = verify_lemma1(system, profile).checks
    suite = CheckReport(profile)
    if member.ensemble == "pseudo" and member.hamiltonian.shape[0] >= 2:
        suite.verdict(
            "has-pair",
            any(g.label is SpectralLabel.UPPER for g in system.groups),
            note="pseudo member carries a conjugate pair",
        )
    _involution_equivalence(system, suite)
    _roundtrips(system, member, suite)
    sections["suite"] = suite.checks
    return sections


def _verify_or_record(member: EnsembleMember, profile: ToleranceProfile) -> dict[str, list[CheckResult]]:
    """verify_member, with a raised error recorded as the member's only failure."""
    try:
        return verify_member(member, profile)
    except (PhtkError, np.linalg.LinAlgError) as e:
        logger.warning("Member %d (seed %d) raised %s: %s", member.index, member.seed, type(e).__name__, e)
        return {"error": [CheckResult(tag="exception", passed=False, note=f"{type(e).__name__}: {e}")]}


@dataclass
class TagSummary:
    tag: str
    passed: int = 0
    total: int = 0
    worst: float | None = None
    conditional: bool = False

    def add(self, check: CheckResult) -> None:
        self.total += 1
        self.passed += int(check.passed)
        self.conditional = self.conditional or check.conditional
        if check.residual is not None:
            self.worst = check.residual if self.worst is None else max(self.worst, check.residual)


@dataclass
class VerifySummary:
    ensemble: str
    dim: int
    count: int
    seed: int
    profile: str
    members_passed: int = 0
    tags: dict[str, TagSummary] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def format(self) -> str:
        lines = [
            f"Ensemble {self.ensemble} dim={self.dim} count={self.count} seed={self.seed} "
            f"profile={self.profile}: {self.members_passed}/{self.count} members passed",
        ]
        width = max((len(t) for t in self.tags), default=4)
        for tag in sorted(self.tags):
            s = self.tags[tag]
            worst = "-" if s.worst is None else f"{s.worst:.3e}"
            marker = " (conditional)" if s.conditional else ""
            lines.append(f"  {tag:<{width}}  {s.passed:>4}/{s.total:<4}  worst {worst}{marker}")
        lines.extend(f"  FAIL {f}" for f in self.failures)
        return "\n".join(lines)


def cmd_verify(
    seed: int,
    count: int,
    dim: int,
    ensemble: str = "quasi",
    profile_name: str | None = None,
    threads: int | None = None,
    on_progress: Callable[[dict], None] | None = None,
) -> VerifySummary:
    """Run the invariant suite over ``count`` seeded members; merge in member order."""
    if ensemble not in ENSEMBLES:
        raise RangeError(f"unknown ensemble {ensemble!r} (expected one of {', '.join(ENSEMBLES)})")
    if not (1 <= dim <= MAX_VERIFY_DIM):
        raise RangeError(f"dim must lie in [1, {MAX_VERIFY_DIM}], got {dim}")
    if count < 1:
        raise RangeError(f"count must be at least 1, got {count}")
    profile = get_profile(profile_name)
    children = np.random.SeedSequence(seed).spawn(count)
    members = [
        draw_member(ensemble, dim, i, int(child.generate_state(1)[0]))
        for i, child in enumerate(children)
    ]

    start = time.perf_counter()
    results = run_ordered(
        lambda m: _verify_or_record(m, profile), members, threads, step="verify", on_progress=on_progress,
    )

    summary = VerifySummary(ensemble, dim, count, seed, profile.name)
    for member, sections in zip(members, results):
        failed = []
        for section, checks in sections.items():
            for c in checks:
                key = f"{section}/{c.tag}"
                summary.tags.setdefault(key, TagSummary(key)).add(c)
                if not c.passed and not c.conditional:
                    failed.append(key)
        if not failed:
            summary.members_passed += 1
        summary.failures.extend(f"member {member.index} (seed {member.seed}): {key}" for key in failed)
    logger.info(
        "Verified %d %s members (dim=%d): %d passed in %.2fs",
        count, ensemble, dim, summary.members_passed, time.perf_counter() - start,
    )
    return summary
